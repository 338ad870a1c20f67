"""
Numerical certification of the three upper bounds on the GHZ functional:

* classical stochastic model: G <= 1/16
* product (separable) histories: G <= 0
* two-time entangled history with a product tail: G <= 1/16

Maximization is a multistart search: a coarse lattice stage picks starting
points, then bounded Nelder-Mead refines each. Constrained domains (the
probability simplex, the unit sphere of Bell magnitudes) are handled by
mapping a box of raw coordinates onto the domain, so the objective itself
is always the exact polynomial.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .histories import separable_history
from .measurement import g_two_time_params, ghz_functional

CLASSICAL_BOUND = 1 / 16
SEPARABLE_BOUND = 0.0
PARTIAL_BOUND = 1 / 16

# Rows of the sign table: which of the four triple products
# (XXX, XYY, YXY, YYX) are +1 in each of the eight classical assignments.
ASSIGNMENTS = np.array(
    [
        [+1, +1, +1, +1],
        [+1, -1, -1, +1],
        [+1, -1, +1, -1],
        [+1, +1, -1, -1],
        [-1, -1, -1, -1],
        [-1, -1, +1, +1],
        [-1, +1, -1, +1],
        [-1, +1, +1, -1],
    ]
)

# The four signed sums exactly as they appear in the G[chi] product.
CLASSICAL_SIGNS = np.array(
    [
        [+1, +1, +1, +1, -1, -1, -1, -1],
        [+1, +1, -1, -1, -1, +1, +1, -1],
        [+1, -1, +1, -1, -1, +1, -1, +1],
        [+1, -1, -1, +1, -1, -1, +1, +1],
    ]
)

CLASSICAL_ARGMAX = (0.25, 0.25, 0.25, 0.0, 0.0, 0.25, 0.0, 0.0)


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ClassicalDistribution:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) != 8:
            raise ValueError(f"need 8 probabilities, got {len(p)}")
        if min(p) < 0 or abs(sum(p) - 1) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "p", p)


def classical_correlators(p) -> np.ndarray:
    """The four signed sums; ``p`` may be an (..., 8) array."""
    return np.asarray(p, dtype=float) @ CLASSICAL_SIGNS.T


def classical_g(dist) -> float:
    if not isinstance(dist, ClassicalDistribution):
        dist = ClassicalDistribution(dist)
    return float(-np.prod(classical_correlators(dist.p)))


def classical_g_batch(p: np.ndarray) -> np.ndarray:
    return -np.prod(classical_correlators(p), axis=-1)


def relabelings() -> list[tuple[int, ...]]:
    """Permutations of p1..p8 induced by flipping a classical variable.

    Flipping Q^t_x or Q^t_y negates exactly two of the four triple products.
    Composing such flips gives the even-weight sign flips of the assignment
    columns; each acts on the eight rows as a permutation."""
    perms = set()
    for flips in itertools.product((1, -1), repeat=4):
        if np.prod(flips) != 1:
            continue
        flipped = ASSIGNMENTS * np.array(flips)
        perm = tuple(
            int(np.flatnonzero((ASSIGNMENTS == row).all(axis=1))[0]) for row in flipped
        )
        perms.add(perm)
    return sorted(perms)


# -- optimizer --------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Box of raw coordinates plus an optional map onto the actual domain."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    transform: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise DomainError("lower and upper bounds must be equal-length 1-d sequences")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi >= lo)):
            raise DomainError("invalid domain bounds")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def map(self, raw) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        return raw if self.transform is None else self.transform(raw)


def box(bounds: Sequence[tuple[float, float]]) -> Domain:
    lo, hi = zip(*bounds)
    return Domain(tuple(lo), tuple(hi))


def _to_simplex(raw: np.ndarray) -> np.ndarray:
    a = np.abs(raw)
    s = a.sum()
    if s == 0:
        return np.full(a.shape, 1 / a.size)
    return a / s


def simplex(n: int) -> Domain:
    return Domain((0.0,) * n, (1.0,) * n, _to_simplex)


@dataclass(frozen=True)
class OptimizerOptions:
    grid_points: int = 21  # per raw dimension
    max_grid_evals: int = 4096  # lattice is subsampled beyond this
    n_starts: int = 8
    max_iter: int = 4000  # Nelder-Mead iterations per start
    xatol: float = 1e-10
    fatol: float = 1e-15
    seed: int = 0
    starts: tuple[tuple[float, ...], ...] | None = None  # raw points; skips the lattice
    record_trace: bool = False


@dataclass(frozen=True)
class OptimizationResult:
    best_value: float
    argmax: tuple[float, ...]
    iterations: int
    trace: tuple[tuple[int, float], ...] | None = None
    raw_argmax: tuple[float, ...] = field(default=(), repr=False)


def _lattice_starts(domain: Domain, opts: OptimizerOptions, f) -> list[np.ndarray]:
    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)
    axes = [np.linspace(a, b, opts.grid_points) for a, b in zip(lo, hi)]
    total = opts.grid_points ** domain.dim
    if total <= opts.max_grid_evals:
        points = np.array(list(itertools.product(*axes)))
    else:
        rng = np.random.default_rng(opts.seed)
        idx = rng.integers(0, opts.grid_points, size=(opts.max_grid_evals, domain.dim))
        points = np.stack([axes[d][idx[:, d]] for d in range(domain.dim)], axis=1)
    values = np.array([f(x) for x in points])
    # best first; ties broken by the lexicographically smallest point
    order = sorted(range(len(points)), key=lambda i: (-values[i], tuple(points[i])))
    return [points[i] for i in order[: opts.n_starts]]


def optimizer_core(objective: Callable, domain: Domain, options: OptimizerOptions | None = None) -> OptimizationResult:
    """Maximize ``objective`` over ``domain``.

    ``objective`` receives the mapped point (e.g. a probability vector for a
    simplex domain). Deterministic for a fixed ``options.seed``."""
    opts = options or OptimizerOptions()
    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)

    def f(raw):
        return float(objective(domain.map(np.clip(raw, lo, hi))))

    if opts.starts is not None:
        starts = [np.asarray(s, dtype=float) for s in opts.starts]
    else:
        starts = _lattice_starts(domain, opts, f)
    if not starts:
        raise DomainError("no starting points")

    candidates = []
    iterations = 0
    trace: list[tuple[int, float]] = []
    best_so_far = -np.inf
    for x0 in starts:
        if opts.max_iter <= 0:
            candidates.append((f(x0), tuple(x0)))
            continue
        history: list[float] = []

        def callback(xk, _h=history):
            _h.append(f(xk))

        res = minimize(
            lambda x: -f(x),
            x0,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            callback=callback if opts.record_trace else None,
            options={"maxiter": opts.max_iter, "xatol": opts.xatol, "fatol": opts.fatol},
        )
        if opts.record_trace:
            for v in history:
                iterations += 1
                best_so_far = max(best_so_far, v)
                trace.append((iterations, best_so_far))
        else:
            iterations += int(res.nit)
        x = np.clip(res.x, lo, hi)
        candidates.append((f(x), tuple(x)))
        start_value = f(x0)
        if start_value > candidates[-1][0]:
            candidates[-1] = (start_value, tuple(x0))

    value, raw = min(candidates, key=lambda c: (-c[0], c[1]))
    point = domain.map(np.asarray(raw))
    return OptimizationResult(
        best_value=float(objective(point)),
        argmax=tuple(float(v) for v in point),
        iterations=iterations,
        trace=tuple(trace) if opts.record_trace else None,
        raw_argmax=tuple(float(v) for v in raw),
    )


# -- the three bound searches -----------------------------------------------

def classical_objective(p) -> float:
    return float(-np.prod(classical_correlators(p)))


def maximize_classical_g(options: OptimizerOptions | None = None) -> OptimizationResult:
    return optimizer_core(classical_objective, simplex(8), options)


def separable_objective(params) -> float:
    """G of the product history with angles (t1, p1, t2, p2, t3, p3)."""
    return ghz_functional(separable_history(*params))


SEPARABLE_DOMAIN = box([(0.0, np.pi)] * 6)


def maximize_separable_g(options: OptimizerOptions | None = None) -> OptimizationResult:
    return optimizer_core(separable_objective, SEPARABLE_DOMAIN, options)


def _to_partial(raw: np.ndarray) -> np.ndarray:
    mags = np.abs(raw[:4])
    n = np.linalg.norm(mags)
    mags = np.full(4, 0.5) if n == 0 else mags / n
    return np.concatenate([mags, raw[4:]])


# raw: |a|, |b|, |c|, |d| (normalized onto the unit sphere), phase_ab, phase_cd, theta, phi
PARTIAL_DOMAIN = Domain(
    (0.0,) * 4 + (0.0,) * 4,
    (1.0,) * 4 + (np.pi,) * 4,
    _to_partial,
)


def partial_objective(params) -> float:
    """Closed-form G for (|a|, |b|, |c|, |d|, phase_ab, phase_cd, theta, phi)."""
    params = np.asarray(params, dtype=float)
    return g_two_time_params(params[:4], params[4], params[5], params[6], params[7])


PARTIAL_ANALYTIC_ARGMAX = (
    float(np.sqrt((1 + 1 / np.sqrt(2)) / 2)),
    float(np.sqrt((1 - 1 / np.sqrt(2)) / 2)),
    0.0,
    0.0,
    np.pi / 2,
    0.0,
    np.pi / 4,
    np.pi / 4,
)


def maximize_partial_g(options: OptimizerOptions | None = None) -> OptimizationResult:
    return optimizer_core(partial_objective, PARTIAL_DOMAIN, options)


def with_seed(options: OptimizerOptions | None, seed: int) -> OptimizerOptions:
    return replace(options or OptimizerOptions(), seed=seed)
