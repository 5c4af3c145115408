"""Seeded synthesis of market instances and labeled assortment datasets.

Generation is deterministic: an instance is a pure function of
``(spec, seed)`` and a dataset record's seed is a pure function of
``(master_seed, record index)``, so datasets regenerate byte-identically
and records could be produced in any order or in parallel without
changing the result.

Datasets persist as JSON Lines.  Line 1 is a header object::

    {"format_version": 1, "spec": {...}, "master_seed": ..., "count": ...,
     "seed_mix": "splitmix64", "excluded": [...]}

and each following line is one record::

    {"idx": ..., "seed": ..., "y": [[...]], "alpha": [[...]],
     "beta": [[...]], "F": [...], "lambda": [...],
     "revenue": {"a": ..., "b": ..., "omega": ..., "xi": ...},
     "q": [[...]], "label": {"per_segment": [[...]], "k": ...}, "r_a": ...}

Product indices are 1-based inside files and 0-based in memory.  Floats
are serialized with ``repr`` precision, so a read after a write
reproduces every number exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    PER_SEGMENT,
    SHARED,
    Assortment,
    NonConvergenceError,
    ProblemInstance,
    RevenueTerms,
    expected_revenue,
    optimize_assortment,
)

__all__ = [
    "FORMAT_VERSION",
    "UNIT_SCALE",
    "DOLLAR_SCALE",
    "DOLLAR_MAX",
    "DatasetFormatError",
    "GenSpec",
    "DatasetRecord",
    "LabeledDataset",
    "record_seed",
    "normalize_weights",
    "generate_instance",
    "generate_dataset",
    "relabel_dataset",
    "write_dataset",
    "read_dataset",
]

FORMAT_VERSION = 1

UNIT_SCALE = "unit"
DOLLAR_SCALE = "dollar"
DOLLAR_MAX = 10_000

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed or fails its schema."""


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one family of random instances.

    ``y`` and ``alpha`` entries are uniform on [0, M] (``alpha`` forced to
    zero when ``network_effects`` is off), ``beta`` is all ones, segment
    weights are uniform draws normalized to sum to one, and funding gaps
    follow ``f_mode``: uniform on [0, M] ("unit") or uniform on the
    integers 1..10000 ("dollar").  ``k`` and ``mode`` fix how generated
    instances are labeled with their optimal assortment.
    """

    n: int
    m: int
    M: float = 50.0
    network_effects: bool = True
    f_mode: str = UNIT_SCALE
    revenue: RevenueTerms = RevenueTerms()
    k: int = 1
    mode: str = SHARED

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must lie in [1, {self.n}], got {self.k}")
        if self.f_mode not in (UNIT_SCALE, DOLLAR_SCALE):
            raise ValueError(f"f_mode must be {UNIT_SCALE!r} or {DOLLAR_SCALE!r}, got {self.f_mode!r}")
        if self.mode not in (SHARED, PER_SEGMENT):
            raise ValueError(f"mode must be {SHARED!r} or {PER_SEGMENT!r}, got {self.mode!r}")


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    """One labeled example: instance, its support matrix, and the optimum."""

    idx: int
    seed: int
    instance: ProblemInstance
    q: np.ndarray
    label: Assortment
    r_a: float

    def __eq__(self, other):
        if not isinstance(other, DatasetRecord):
            return NotImplemented
        return (
            self.idx == other.idx
            and self.seed == other.seed
            and self.instance == other.instance
            and np.array_equal(self.q, other.q)
            and self.label == other.label
            and self.r_a == other.r_a
        )


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """A reproducible sequence of labeled examples.

    ``count`` is the requested number of records; indices listed in
    ``excluded`` hit the fixed-point iteration cap and carry no record.
    """

    spec: GenSpec
    master_seed: int
    count: int
    records: tuple[DatasetRecord, ...]
    excluded: tuple[int, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.master_seed == other.master_seed
            and self.count == other.count
            and self.excluded == other.excluded
            and len(self.records) == len(other.records)
            and all(a == b for a, b in zip(self.records, other.records))
        )


def record_seed(master_seed: int, index: int) -> int:
    """Per-record seed: SplitMix64 output ``index`` steps from ``master_seed``.

    A pure 64-bit mix of (master_seed, index), so record seeds are
    independent of generation order.
    """
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    z = (int(master_seed) + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def normalize_weights(raw) -> np.ndarray:
    """Scale nonnegative draws to a probability vector: ``raw / sum(raw)``."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size < 1:
        raise ValueError("raw weights must be a nonempty 1-d sequence")
    if np.any(raw < 0.0) or not np.all(np.isfinite(raw)):
        raise ValueError("raw weights must be finite and nonnegative")
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("raw weights must not all be zero")
    return raw / total


def generate_instance(spec: GenSpec, seed: int) -> ProblemInstance:
    """Draw one instance from ``spec`` with a deterministic generator.

    Draw order is fixed (y, alpha, F, lambda).  alpha is always consumed
    from the stream and only zeroed afterwards when network effects are
    off, so flipping the toggle under a shared seed changes nothing else.
    """
    rng = np.random.default_rng(seed)
    n, m = spec.n, spec.m
    y = rng.uniform(0.0, spec.M, size=(n, m))
    alpha = rng.uniform(0.0, spec.M, size=(n, m))
    if not spec.network_effects:
        alpha = np.zeros((n, m))
    if spec.f_mode == UNIT_SCALE:
        F = rng.uniform(0.0, spec.M, size=n)
    else:
        F = rng.integers(1, DOLLAR_MAX + 1, size=n).astype(float)
    lam = normalize_weights(rng.uniform(0.0, spec.M, size=m))
    return ProblemInstance(
        y=y, alpha=alpha, beta=np.ones((n, m)), F=F, lam=lam, revenue=spec.revenue
    )


def generate_dataset(spec: GenSpec, count: int, master_seed: int) -> LabeledDataset:
    """Generate ``count`` instances and label each with its optimal assortment.

    Record ``t`` uses seed ``record_seed(master_seed, t)``; labels come
    from exact enumeration at the largest fixed point.  Records whose
    fixed point fails to converge are dropped and reported in
    ``excluded``.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    records = []
    excluded = []
    for idx in range(count):
        seed = record_seed(master_seed, idx)
        instance = generate_instance(spec, seed)
        try:
            label, r_a, solution = optimize_assortment(instance, spec.k, spec.mode)
        except NonConvergenceError:
            excluded.append(idx)
            continue
        records.append(
            DatasetRecord(
                idx=idx, seed=seed, instance=instance, q=solution.q, label=label, r_a=r_a
            )
        )
    return LabeledDataset(
        spec=spec,
        master_seed=int(master_seed),
        count=count,
        records=tuple(records),
        excluded=tuple(excluded),
    )


def relabel_dataset(dataset: LabeledDataset, k=None, mode=None) -> LabeledDataset:
    """Recompute labels of an existing dataset under a new ``k`` or ``mode``.

    Instances and seeds are kept; q, label and r_a are recomputed.  Useful
    for sweeping assortment size over one shared set of instances.
    """
    spec = replace(
        dataset.spec,
        k=dataset.spec.k if k is None else k,
        mode=dataset.spec.mode if mode is None else mode,
    )
    records = []
    excluded = list(dataset.excluded)
    for rec in dataset.records:
        try:
            label, r_a, solution = optimize_assortment(rec.instance, spec.k, spec.mode)
        except NonConvergenceError:
            excluded.append(rec.idx)
            continue
        records.append(replace(rec, q=solution.q, label=label, r_a=r_a))
    return LabeledDataset(
        spec=spec,
        master_seed=dataset.master_seed,
        count=dataset.count,
        records=tuple(records),
        excluded=tuple(sorted(excluded)),
    )


def _revenue_to_dict(rev: RevenueTerms) -> dict:
    return {"a": rev.a, "b": rev.b, "omega": rev.omega, "xi": rev.xi}


def _revenue_from_dict(d: dict, where: str) -> RevenueTerms:
    try:
        return RevenueTerms(a=d["a"], b=d["b"], omega=d["omega"], xi=d["xi"])
    except KeyError as e:
        raise DatasetFormatError(f"{where}: revenue is missing field {e.args[0]!r}") from None


def spec_to_dict(spec: GenSpec) -> dict:
    return {
        "n": spec.n,
        "m": spec.m,
        "M": spec.M,
        "network_effects": spec.network_effects,
        "f_mode": spec.f_mode,
        "revenue": _revenue_to_dict(spec.revenue),
        "k": spec.k,
        "mode": spec.mode,
    }


def spec_from_dict(d: dict, where: str = "spec") -> GenSpec:
    try:
        return GenSpec(
            n=d["n"],
            m=d["m"],
            M=d["M"],
            network_effects=d["network_effects"],
            f_mode=d["f_mode"],
            revenue=_revenue_from_dict(d["revenue"], where),
            k=d["k"],
            mode=d["mode"],
        )
    except KeyError as e:
        raise DatasetFormatError(f"{where}: missing field {e.args[0]!r}") from None


def _record_to_dict(rec: DatasetRecord) -> dict:
    inst = rec.instance
    return {
        "idx": rec.idx,
        "seed": rec.seed,
        "y": inst.y.tolist(),
        "alpha": inst.alpha.tolist(),
        "beta": inst.beta.tolist(),
        "F": inst.F.tolist(),
        "lambda": inst.lam.tolist(),
        "revenue": _revenue_to_dict(inst.revenue),
        "q": rec.q.tolist(),
        "label": {
            "per_segment": [[i + 1 for i in block] for block in rec.label.per_segment],
            "k": rec.label.k,
        },
        "r_a": rec.r_a,
    }


def _get(obj: dict, key: str, lineno: int):
    try:
        return obj[key]
    except KeyError:
        raise DatasetFormatError(f"line {lineno}: missing field {key!r}") from None


def _record_from_dict(obj: dict, lineno: int) -> DatasetRecord:
    label_obj = _get(obj, "label", lineno)
    try:
        instance = ProblemInstance(
            y=_get(obj, "y", lineno),
            alpha=_get(obj, "alpha", lineno),
            beta=_get(obj, "beta", lineno),
            F=_get(obj, "F", lineno),
            lam=_get(obj, "lambda", lineno),
            revenue=_revenue_from_dict(_get(obj, "revenue", lineno), f"line {lineno}"),
        )
        label = Assortment(
            per_segment=tuple(
                tuple(int(i) - 1 for i in block)
                for block in _get(label_obj, "per_segment", lineno)
            ),
            k=_get(label_obj, "k", lineno),
        )
        q = np.array(_get(obj, "q", lineno), dtype=float)
        q.setflags(write=False)
        return DatasetRecord(
            idx=_get(obj, "idx", lineno),
            seed=_get(obj, "seed", lineno),
            instance=instance,
            q=q,
            label=label,
            r_a=_get(obj, "r_a", lineno),
        )
    except DatasetFormatError:
        raise
    except (TypeError, ValueError) as e:
        raise DatasetFormatError(f"line {lineno}: invalid record ({e})") from None


def write_dataset(dataset: LabeledDataset, path) -> None:
    """Write a dataset as JSON Lines (see the module docstring for the schema)."""
    path = Path(path)
    header = {
        "format_version": FORMAT_VERSION,
        "spec": spec_to_dict(dataset.spec),
        "master_seed": dataset.master_seed,
        "count": dataset.count,
        "seed_mix": "splitmix64",
        "excluded": list(dataset.excluded),
    }
    lines = [json.dumps(header, separators=(",", ":"))]
    lines.extend(
        json.dumps(_record_to_dict(rec), separators=(",", ":")) for rec in dataset.records
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dataset(path) -> LabeledDataset:
    """Read a JSON Lines dataset; inverse of :func:`write_dataset`.

    Raises :class:`DatasetFormatError` on malformed content, naming the
    offending line; nothing partial is ever returned.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise DatasetFormatError("line 1: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"line 1: invalid JSON ({e.msg})") from None
    version = _get(header, "format_version", 1)
    if version != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format_version {version!r}, expected {FORMAT_VERSION}"
        )
    spec = spec_from_dict(_get(header, "spec", 1))
    count = _get(header, "count", 1)
    excluded = tuple(_get(header, "excluded", 1))

    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise DatasetFormatError(f"line {lineno}: blank line inside record block")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"line {lineno}: invalid JSON ({e.msg})") from None
        records.append(_record_from_dict(obj, lineno))
    if len(records) + len(excluded) != count:
        raise DatasetFormatError(
            f"expected {count} records ({len(excluded)} excluded), found {len(records)}"
        )
    return LabeledDataset(
        spec=spec,
        master_seed=_get(header, "master_seed", 1),
        count=count,
        records=tuple(records),
        excluded=excluded,
    )


def verify_labels(dataset: LabeledDataset, tol: float = 1e-12) -> None:
    """Assert every stored r_a matches a fresh revenue evaluation of its label.

    Cheap consistency check used by file consumers; raises ValueError on
    the first mismatch.
    """
    for rec in dataset.records:
        w = expected_revenue(rec.instance, rec.label, rec.q)
        if abs(w - rec.r_a) > tol:
            raise ValueError(
                f"record {rec.idx}: stored r_a {rec.r_a!r} differs from evaluated {w!r}"
            )
