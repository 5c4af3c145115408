"""Logit demand with network effects and exact assortment optimization.

A market snapshot couples ``n`` products with ``m`` customer segments.  A
customer in segment ``j`` backs product ``i`` with probability
``sigma(V_ij)``, where the mean utility ``V_ij`` combines the product's
intrinsic appeal, a penalty for its remaining funding gap, and a
network-effect bonus proportional to the total support mass the product
draws from the whole population.  That mass depends on the choice
probabilities themselves, so demand is pinned down by the fixed point
``q = sigma(V(q))``.  Iterating the map from the all-zeros matrix is
componentwise nondecreasing and converges to the smallest fixed point;
from the all-ones matrix it is nonincreasing and converges to the largest.
Every fixed point lies between the two limits.

Expected platform revenue is additive over the offered products, so the
exact optimum over size-k assortments can be found by brute-force subset
enumeration, and the same answer must fall out of ranking products by
their individual revenue contributions.  ``revenue_ordered_oracle``
implements that second route as an independent check on the first.

Everything here is a pure function of its inputs: no mutation, no global
state, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy.special import expit

__all__ = [
    "ZERO_START",
    "ONE_START",
    "SHARED",
    "PER_SEGMENT",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "NonConvergenceError",
    "RevenueTerms",
    "ProblemInstance",
    "SupportSolution",
    "Assortment",
    "total_support_mass",
    "mean_utility",
    "choice_probability",
    "support_map",
    "solve_fixed_point",
    "expected_revenue",
    "optimize_assortment",
    "revenue_ordered_oracle",
]

ZERO_START = "zero"
ONE_START = "one"
SHARED = "shared"
PER_SEGMENT = "per-segment"

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class NonConvergenceError(RuntimeError):
    """Raised when a fixed-point solve is required but did not converge.

    Carries the partial result in ``solution``.
    """

    def __init__(self, solution: "SupportSolution"):
        super().__init__(
            "fixed-point iteration did not converge after "
            f"{solution.iterations} iterations (residual {solution.residual:.3e})"
        )
        self.solution = solution


@dataclass(frozen=True)
class RevenueTerms:
    """Platform revenue parameters.

    Contribution sizes are uniform on ``[a, b]``; only the mean
    ``(a + b) / 2`` enters expected revenue.  The platform keeps an
    ``omega`` share of each contribution plus a ``xi`` share of all raised
    funds.  The defaults (contributions of $1 to $10, a 5% revenue share
    and a 3% processing share) give 0.44 expected revenue per fully
    supported product.
    """

    a: float = 1.0
    b: float = 10.0
    omega: float = 0.05
    xi: float = 0.03

    def __post_init__(self):
        if not 0.0 <= self.a <= self.b:
            raise ValueError(f"need 0 <= a <= b, got a={self.a}, b={self.b}")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")

    @property
    def per_support(self) -> float:
        """Expected revenue from one unit of weighted support mass."""
        return 0.5 * (self.a + self.b) * (self.omega + self.xi)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One market snapshot: n products, m customer segments.

    Attributes
    ----------
    y : (n, m) array
        Intrinsic utility of product i for a segment-j customer.
    alpha : (n, m) array, >= 0
        Network-effect sensitivity: utility gained per unit of total
        support mass behind the product.
    beta : (n, m) array
        Sensitivity to the remaining funding gap.  ``None`` defaults to
        all ones.
    F : (n,) array, >= 0
        Remaining funding gap of each product.
    lam : (m,) array
        Segment weights; nonnegative, summing to 1 (within 1e-12).
    revenue : RevenueTerms
        Platform revenue parameters.

    Arrays are copied and frozen at construction; instances are immutable
    and safe to share across threads.
    """

    y: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray | None = None
    F: np.ndarray = None
    lam: np.ndarray = None
    revenue: RevenueTerms = RevenueTerms()

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
            raise ValueError(f"y must be a nonempty 2-d matrix, got shape {np.shape(self.y)}")
        n, m = y.shape
        alpha = np.array(self.alpha, dtype=float)
        beta = np.ones((n, m)) if self.beta is None else np.array(self.beta, dtype=float)
        if self.F is None or self.lam is None:
            raise ValueError("F and lam are required")
        F = np.array(self.F, dtype=float).reshape(-1)
        lam = np.array(self.lam, dtype=float).reshape(-1)

        if alpha.shape != (n, m):
            raise ValueError(f"alpha must have shape {(n, m)}, got {alpha.shape}")
        if beta.shape != (n, m):
            raise ValueError(f"beta must have shape {(n, m)}, got {beta.shape}")
        if F.shape != (n,):
            raise ValueError(f"F must have length {n}, got {F.shape}")
        if lam.shape != (m,):
            raise ValueError(f"lam must have length {m}, got {lam.shape}")
        for name, arr in (("y", y), ("alpha", alpha), ("beta", beta), ("F", F), ("lam", lam)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        if np.any(alpha < 0.0):
            raise ValueError("alpha must be componentwise nonnegative")
        if np.any(F < 0.0):
            raise ValueError("F must be componentwise nonnegative")
        if np.any(lam < 0.0):
            raise ValueError("lam must be componentwise nonnegative")
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"lam must sum to 1 within 1e-12, got sum {lam.sum()!r}")

        for name, arr in (("y", y), ("alpha", alpha), ("beta", beta), ("F", F), ("lam", lam)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            np.array_equal(self.y, other.y)
            and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.F, other.F)
            and np.array_equal(self.lam, other.lam)
            and self.revenue == other.revenue
        )


@dataclass(frozen=True)
class SupportSolution:
    """Result of a fixed-point solve.

    ``q`` is the final (n, m) iterate; ``residual`` is the sup-norm of
    ``q - sigma(V(q))`` evaluated at that iterate.
    """

    q: np.ndarray
    start: str
    iterations: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class Assortment:
    """Per-segment product sets of a fixed cardinality k.

    Product indices are 0-based here; file formats use 1-based indices.
    Blocks are normalized to sorted tuples, so equality is set equality.
    """

    per_segment: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        blocks = []
        for block in self.per_segment:
            ids = sorted(int(i) for i in block)
            if len(set(ids)) != len(ids):
                raise ValueError(f"assortment block {block} has repeated products")
            if len(ids) != self.k:
                raise ValueError(f"assortment block {block} must have exactly k={self.k} products")
            if ids and ids[0] < 0:
                raise ValueError(f"product indices must be nonnegative, got {block}")
            blocks.append(tuple(ids))
        if not blocks:
            raise ValueError("assortment needs at least one segment block")
        object.__setattr__(self, "per_segment", tuple(blocks))

    @classmethod
    def shared(cls, products, m: int, k: int | None = None) -> "Assortment":
        """Offer the same product set to all m segments."""
        block = tuple(sorted(int(i) for i in products))
        return cls(per_segment=(block,) * m, k=len(block) if k is None else k)


def _check_support(instance: ProblemInstance, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (instance.n, instance.m):
        raise ValueError(
            f"support matrix must have shape {(instance.n, instance.m)}, got {q.shape}"
        )
    if not np.all(np.isfinite(q)):
        raise ValueError("support probabilities must be finite")
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ValueError("support probabilities must lie in [0, 1]")
    return q


def total_support_mass(instance: ProblemInstance, q) -> np.ndarray:
    """Population support mass per product: ``s_i = sum_j lam_j q_ij``.

    Each ``s_i`` lies in [0, 1] because the weights sum to one.
    """
    q = _check_support(instance, q)
    return q @ instance.lam


def mean_utility(instance: ProblemInstance, q) -> np.ndarray:
    """Mean utilities ``V_ij = y_ij - beta_ij F_i + alpha_ij s_i``.

    ``s`` is the population support mass from :func:`total_support_mass`;
    the network bonus for a product is driven by backers of that product
    across all segments.
    """
    s = total_support_mass(instance, q)
    return instance.y - instance.beta * instance.F[:, None] + instance.alpha * s[:, None]


def choice_probability(V) -> np.ndarray:
    """Per-product logit choice probabilities ``sigma(V_ij)``.

    Evaluated in the overflow-safe form that branches on the sign of V
    (scipy's expit), so large |V| saturates cleanly instead of producing
    NaN.
    """
    V = np.asarray(V, dtype=float)
    if not np.all(np.isfinite(V)):
        raise ValueError("mean utilities must be finite")
    return expit(V)


def support_map(instance: ProblemInstance, q) -> np.ndarray:
    """One application of the demand map ``q -> sigma(V(q))``."""
    return choice_probability(mean_utility(instance, q))


def solve_fixed_point(
    instance: ProblemInstance,
    start: str = ONE_START,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SupportSolution:
    """Solve ``q = sigma(V(q))`` by monotone fixed-point iteration.

    Parameters
    ----------
    start : "zero" or "one"
        Starting matrix.  "zero" iterates upward to the smallest fixed
        point, "one" iterates downward to the largest.
    tol : float
        Stop once consecutive iterates differ by at most ``tol`` in
        sup-norm.
    max_iter : int
        Iteration cap.  Exhausting it yields ``converged=False`` with the
        last iterate; it never raises.

    Returns
    -------
    SupportSolution
        The final iterate plus iteration count and the honest fixed-point
        residual ``sup|q - sigma(V(q))|``.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if start == ZERO_START:
        q = np.zeros((instance.n, instance.m))
    elif start == ONE_START:
        q = np.ones((instance.n, instance.m))
    else:
        raise ValueError(f"start must be {ZERO_START!r} or {ONE_START!r}, got {start!r}")

    converged = False
    iterations = 0
    for _ in range(max_iter):
        q_next = support_map(instance, q)
        delta = float(np.max(np.abs(q_next - q)))
        q = q_next
        iterations += 1
        if delta <= tol:
            converged = True
            break

    residual = float(np.max(np.abs(support_map(instance, q) - q)))
    q.setflags(write=False)
    return SupportSolution(
        q=q, start=start, iterations=iterations, residual=residual, converged=converged
    )


def expected_revenue(instance: ProblemInstance, assortment: Assortment, q) -> float:
    """Expected per-customer revenue of offering ``assortment`` at support ``q``.

    ``W = (a+b)/2 * (omega+xi) * sum_j lam_j * sum_{i in G_j} q_ij``.
    """
    q = _check_support(instance, q)
    if len(assortment.per_segment) != instance.m:
        raise ValueError(
            f"assortment has {len(assortment.per_segment)} segment blocks, "
            f"instance has {instance.m} segments"
        )
    total = 0.0
    for j, block in enumerate(assortment.per_segment):
        for i in block:
            if i >= instance.n:
                raise ValueError(f"product index {i} out of range for n={instance.n}")
        total += instance.lam[j] * float(q[list(block), j].sum())
    return instance.revenue.per_support * total


def optimize_assortment(
    instance: ProblemInstance,
    k: int,
    mode: str = SHARED,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[Assortment, float, SupportSolution]:
    """Exact revenue-maximizing size-k assortment by enumeration.

    Support probabilities are solved once from the all-ones start (the
    largest fixed point); they do not depend on the assortment offered.
    In "shared" mode all C(n, k) subsets are enumerated and every segment
    sees the winning set; in "per-segment" mode the best size-k set is
    chosen independently for each segment.  Revenue ties go to the
    lexicographically smallest index set.

    Returns ``(assortment, revenue, solution)``; raises
    :class:`NonConvergenceError` if the fixed point did not converge.
    """
    if not 1 <= k <= instance.n:
        raise ValueError(f"k must lie in [1, {instance.n}], got {k}")
    if mode not in (SHARED, PER_SEGMENT):
        raise ValueError(f"mode must be {SHARED!r} or {PER_SEGMENT!r}, got {mode!r}")
    solution = solve_fixed_point(instance, ONE_START, tol=tol, max_iter=max_iter)
    if not solution.converged:
        raise NonConvergenceError(solution)
    q = solution.q

    if mode == SHARED:
        # Subset sums are compared exactly (floats as rationals): plain
        # float sums can round two distinct sums to the same value when
        # probabilities saturate near 1, and the phantom tie would then be
        # broken differently than by contribution ranking.
        contribution = [Fraction(c) for c in (q @ instance.lam).tolist()]
        best_combo = None
        best_sum = None
        # combinations() yields index sets in lexicographic order, so strict
        # improvement keeps the lexicographically smallest argmax.
        for combo in combinations(range(instance.n), k):
            s = sum(contribution[i] for i in combo)
            if best_sum is None or s > best_sum:
                best_combo, best_sum = combo, s
        best = Assortment(per_segment=(best_combo,) * instance.m, k=k)
        return best, expected_revenue(instance, best, q), solution

    blocks = []
    for j in range(instance.m):
        weight = Fraction(float(instance.lam[j]))
        column = [Fraction(v) for v in q[:, j].tolist()]
        best_block = None
        best_sum = None
        for combo in combinations(range(instance.n), k):
            s = weight * sum(column[i] for i in combo)
            if best_sum is None or s > best_sum:
                best_block, best_sum = combo, s
        blocks.append(best_block)
    assortment = Assortment(per_segment=tuple(blocks), k=k)
    return assortment, expected_revenue(instance, assortment, q), solution


def revenue_ordered_oracle(instance: ProblemInstance, k: int, q) -> Assortment:
    """Top-k products by per-product revenue contribution.

    Independent check for shared-mode optimization: because expected
    revenue is additive over offered products, sorting by the contribution
    ``sum_j lam_j q_ij`` (ties to the lower index) and keeping the top k
    must reproduce the enumerated optimum.
    """
    if not 1 <= k <= instance.n:
        raise ValueError(f"k must lie in [1, {instance.n}], got {k}")
    q = _check_support(instance, q)
    contribution = q @ instance.lam
    # Stable sort on the negated values puts ties in ascending index order.
    order = np.argsort(-contribution, kind="stable")
    top = tuple(sorted(int(i) for i in order[:k]))
    return Assortment(per_segment=(top,) * instance.m, k=k)
