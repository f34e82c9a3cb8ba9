"""Quadratic binary programs, the penalty reduction to QUBO form, and solvers.

A `QuboInstance` is an unconstrained quadratic form z^T Q z over binary z.
A `QbpInstance` adds a linear term and an explicit cardinality constraint
``1^T z = k``.  Folding the constraint into the objective with a quadratic
penalty turns a QBP into a QUBO; `sufficient_penalty` gives a weight large
enough that the penalized minimizer is always feasible.

Solvers: exhaustive enumeration (ground truth, hard-capped), enumeration of
the feasible k-subsets, and single-bit-flip Metropolis simulated annealing.
The enumeration and annealing inner loops live in `accel` (numba-jitted with
a numpy fallback).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import accel
from .errors import CapacityError, InputError, NumericalIntegrityError

EXHAUSTIVE_MAX_VARS = 24
CONSTRAINED_MAX_SUBSETS = 5_000_000

_SYM_TOL = 1e-12


def _check_square_symmetric(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InputError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    skew = np.abs(a - a.T).max()
    if skew > _SYM_TOL:
        raise InputError(f"{name} is not symmetric (max |M - M^T| = {skew:.3e})")
    return a


@dataclass(frozen=True)
class QuboInstance:
    """Symmetric matrix of the unconstrained objective z^T Q z."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _check_square_symmetric(self.matrix, "QUBO matrix").copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class QbpInstance:
    """Quadratic part, linear part and target cardinality of a constrained program."""

    quadratic: np.ndarray
    linear: np.ndarray
    k: int

    def __post_init__(self):
        a = _check_square_symmetric(self.quadratic, "quadratic part").copy()
        b = np.asarray(self.linear, dtype=np.float64).reshape(-1).copy()
        if b.shape[0] != a.shape[0]:
            raise InputError(
                f"linear part has length {b.shape[0]} but quadratic part is "
                f"{a.shape[0]}x{a.shape[0]}"
            )
        if not np.all(np.isfinite(b)):
            raise InputError("linear part contains non-finite entries")
        if not (1 <= int(self.k) <= a.shape[0]):
            raise InputError(f"cardinality k={self.k} out of range [1, {a.shape[0]}]")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "quadratic", a)
        object.__setattr__(self, "linear", b)
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return self.quadratic.shape[0]


@dataclass(frozen=True)
class Selection:
    """Binary indicator vector over the dataset; index i set means point i is chosen."""

    indicator: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.indicator)
        if z.ndim != 1 or z.shape[0] < 1:
            raise InputError(f"indicator must be a 1-D vector, got shape {z.shape}")
        zi = z.astype(np.int64)
        if not np.array_equal(zi, z) or not np.all((zi == 0) | (zi == 1)):
            raise InputError("indicator entries must be 0 or 1")
        zi = zi.copy()
        zi.setflags(write=False)
        object.__setattr__(self, "indicator", zi)

    @classmethod
    def from_indices(cls, n: int, indices) -> "Selection":
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise InputError(f"selection indices out of range [0, {n})")
        z = np.zeros(n, dtype=np.int64)
        z[idx] = 1
        return cls(z)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.indicator)

    @property
    def n(self) -> int:
        return self.indicator.shape[0]

    @property
    def size(self) -> int:
        return int(self.indicator.sum())


@dataclass(frozen=True)
class SolveStats:
    evaluations: int
    restarts: int
    seed: int
    wall_time: float


@dataclass(frozen=True)
class SolveReport:
    """Solver output: best selection found, its objective, and run statistics."""

    best: Selection
    objective: float
    feasible: bool
    stats: SolveStats


@dataclass(frozen=True)
class SaSchedule:
    """Annealing schedule: geometric temperature decay from t_start to t_end.

    One sweep proposes n single-bit flips; restarts are independent chains
    with seeds derived as ``seed + restart_index``.
    """

    t_start: float = 10.0
    t_end: float = 1e-3
    sweeps: int = 500
    restarts: int = 8

    def __post_init__(self):
        if not (self.t_start > self.t_end > 0):
            raise InputError(
                f"need t_start > t_end > 0, got t_start={self.t_start}, t_end={self.t_end}"
            )
        if self.sweeps < 1 or self.restarts < 1:
            raise InputError("sweeps and restarts must both be >= 1")

    def temperatures(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.t_start])
        return np.geomspace(self.t_start, self.t_end, self.sweeps)


def _check_dims(n: int, sel: Selection) -> np.ndarray:
    if sel.n != n:
        raise InputError(f"selection has length {sel.n}, instance has n={n}")
    return sel.indicator.astype(np.float64)


def qubo_energy(q: QuboInstance, sel: Selection) -> float:
    """Objective z^T Q z in double precision."""
    z = _check_dims(q.n, sel)
    return float(z @ q.matrix @ z)


def qbp_energy(p: QbpInstance, sel: Selection) -> float:
    """Objective z^T A z + b^T z; feasibility is the caller's concern."""
    z = _check_dims(p.n, sel)
    return float(z @ p.quadratic @ z + p.linear @ z)


_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def _product_err(a: float, b: float, p: float) -> float:
    # Rounding error of p = fl(a * b), via Dekker's two-product.
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def penalized_diagonal(a_diag: np.ndarray, b: np.ndarray, lam: float, k: int) -> np.ndarray:
    """Diagonal of the penalty fold, ``A_ii + lam + b_i - 2*lam*k``, correctly rounded.

    The dominant term 2*lam*k can sit three binades above the result, so a
    naive left-to-right sum loses up to one ulp of it.  Splitting the product
    exactly and summing with fsum returns the nearest double of the true value,
    which keeps independently built but algebraically equal QUBO matrices
    bit-identical on the diagonal.
    """
    p = (2.0 * lam) * k
    e = _product_err(2.0 * lam, float(k), p)
    out = np.empty_like(b)
    for i in range(b.shape[0]):
        out[i] = math.fsum((a_diag[i], lam, b[i], -p, -e))
    return out


def qbp_to_qubo(p: QbpInstance, lam: float) -> QuboInstance:
    """Fold the cardinality constraint into the objective with weight lam.

    The result satisfies, for every binary z,
    ``z^T Q z = z^T A z + b^T z + lam * ((1^T z - k)^2 - k^2)``:
    the penalized objective up to the constant ``lam * k^2``, which is dropped.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise InputError(f"penalty weight must be positive, got {lam}")
    q = p.quadratic + lam
    idx = np.diag_indices(p.n)
    q[idx] = penalized_diagonal(p.quadratic.diagonal(), p.linear, lam, p.k)
    return QuboInstance(q)


def sufficient_penalty(p: QbpInstance) -> float:
    """A penalty weight guaranteed to make every penalized minimizer feasible.

    Returns ``1 + sum|A_ij| + sum|b_i|``.  Any single bit flip away from the
    feasible set raises the penalty term by at least this weight while the
    unpenalized objective can change by at most the weight minus one, so no
    infeasible point can beat a feasible one.
    """
    return float(1.0 + np.abs(p.quadratic).sum() + np.abs(p.linear).sum())


def solve_exhaustive(q: QuboInstance) -> SolveReport:
    """Enumerate all 2^n states and return a global minimizer.

    Ties are broken toward the smallest indicator vector read as a
    little-endian integer (bit 0 least significant).
    """
    if q.n > EXHAUSTIVE_MAX_VARS:
        raise CapacityError(
            f"exhaustive enumeration is capped at n={EXHAUSTIVE_MAX_VARS}, got n={q.n}"
        )
    t0 = time.perf_counter()
    z, _ = accel.exhaustive_best(q.matrix)
    best = Selection(z)
    objective = qubo_energy(q, best)
    stats = SolveStats(
        evaluations=1 << q.n, restarts=0, seed=0, wall_time=time.perf_counter() - t0
    )
    return SolveReport(best=best, objective=objective, feasible=True, stats=stats)


def solve_constrained_exhaustive(p: QbpInstance) -> SolveReport:
    """Enumerate all k-subsets and return a global minimizer of the QBP objective."""
    count = math.comb(p.n, p.k)
    if count > CONSTRAINED_MAX_SUBSETS:
        raise CapacityError(
            f"C({p.n}, {p.k}) = {count} feasible subsets exceeds the cap of "
            f"{CONSTRAINED_MAX_SUBSETS}"
        )
    t0 = time.perf_counter()
    idx, _ = accel.constrained_best(p.quadratic, p.linear, p.k)
    best = Selection.from_indices(p.n, idx)
    objective = qbp_energy(p, best)
    stats = SolveStats(evaluations=count, restarts=0, seed=0, wall_time=time.perf_counter() - t0)
    return SolveReport(best=best, objective=objective, feasible=True, stats=stats)


def solve_sa(q: QuboInstance, schedule: SaSchedule | None = None, seed: int = 0) -> SolveReport:
    """Single-bit-flip Metropolis simulated annealing.

    Deterministic given (instance, schedule, seed): every restart pre-draws
    its initial state, flip indices and acceptance uniforms from
    ``default_rng(seed + restart)``.  Returns the best state visited across
    restarts; its incrementally tracked energy is checked against a full
    re-evaluation before reporting.
    """
    sched = schedule if schedule is not None else SaSchedule()
    temps = sched.temperatures()
    n = q.n
    t0 = time.perf_counter()
    best_z = None
    best_e = np.inf
    for restart in range(sched.restarts):
        rng = np.random.default_rng(seed + restart)
        z0 = rng.integers(0, 2, size=n).astype(np.int8)
        flips = rng.integers(0, n, size=sched.sweeps * n)
        us = rng.random(sched.sweeps * n)
        z, e = accel.sa_run(q.matrix, z0, flips, us, temps)
        if e < best_e:
            best_e = e
            best_z = z
    best = Selection(best_z)
    objective = qubo_energy(q, best)
    if abs(objective - best_e) > 1e-9:
        raise NumericalIntegrityError(
            f"incremental energy {best_e!r} drifted from re-evaluated {objective!r}"
        )
    stats = SolveStats(
        evaluations=sched.restarts * sched.sweeps * n,
        restarts=sched.restarts,
        seed=seed,
        wall_time=time.perf_counter() - t0,
    )
    return SolveReport(best=best, objective=objective, feasible=True, stats=stats)


def export_qubo(q: QuboInstance) -> str:
    """Render a QUBO in the sparse upper-triangular text format.

    Header line ``n nnz``, then one ``i j value`` line per nonzero with
    ``i <= j``; off-diagonal values are doubled so that reading the file as an
    upper-triangular objective reproduces z^T Q z.
    """
    lines = []
    m = q.matrix
    for i in range(q.n):
        if m[i, i] != 0.0:
            lines.append(f"{i} {i} {float(m[i, i])!r}")
        for j in range(i + 1, q.n):
            if m[i, j] != 0.0:
                lines.append(f"{i} {j} {float(2.0 * m[i, j])!r}")
    return "\n".join([f"{q.n} {len(lines)}"] + lines) + "\n"
