"""Exact assortment optimization and the revenue-ordered shortcut.

Expected revenue is additive over the offered products, so the best size-k
assortment is both the argmax over all C(n, k) subsets and the top k
products by individual contribution.  The script shows the two routes
agreeing, revenue growing with k, and per-segment assortments beating a
shared one when segments disagree.
"""

import numpy as np

from assort_mnl import (
    GenSpec,
    ProblemInstance,
    expected_revenue,
    generate_instance,
    optimize_assortment,
    revenue_ordered_oracle,
)

rng_seed = 20_240_601
inst = generate_instance(GenSpec(n=5, m=1, M=50.0), seed=rng_seed)

print("Per-product revenue contributions at the largest fixed point:")
best, w, sol = optimize_assortment(inst, k=2)
contrib = sol.q @ inst.lam
for i, c in enumerate(contrib):
    print(f"  product {i + 1}: 0.44 * {c:.4f} = {0.44 * c:.4f}")

oracle = revenue_ordered_oracle(inst, 2, sol.q)
print(f"\nenumerated optimum (k=2): {[i + 1 for i in best.per_segment[0]]}, W* = {w:.4f}")
print(f"revenue-ordered top-2:    {[i + 1 for i in oracle.per_segment[0]]}, "
      f"W = {expected_revenue(inst, oracle, sol.q):.4f}")

print("\nRevenue is nondecreasing in assortment size (ceiling 0.44 per slot):")
for k in range(1, 6):
    _, w_k, _ = optimize_assortment(inst, k)
    print(f"  k={k}: W* = {w_k:.4f}  (bound {0.44 * k:.2f})")

# Two segments with opposite tastes: a shared page must compromise, while
# per-segment pages serve each side its favorite.
y = np.array([[4.0, -4.0], [-4.0, 4.0]])
split = ProblemInstance(y=y, alpha=np.zeros((2, 2)), F=[0.0, 0.0], lam=[0.5, 0.5])
shared_best, shared_w, _ = optimize_assortment(split, k=1, mode="shared")
per_best, per_w, _ = optimize_assortment(split, k=1, mode="per-segment")
print("\nOpposite-taste segments, one slot to fill:")
print(f"  shared page:      {shared_best.per_segment}  W = {shared_w:.4f}")
print(f"  per-segment page: {per_best.per_segment}  W = {per_w:.4f}")
