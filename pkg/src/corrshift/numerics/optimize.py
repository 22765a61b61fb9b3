"""
Bounded Nelder-Mead simplex search.

Trial points are clamped into the box; objective values that are not finite
are replaced by :data:`PENALTY` so the simplex is pushed back toward the
feasible region instead of aborting. After the first convergence the search is
restarted once from the best vertex with a fresh simplex, which catches the
premature collapses Nelder-Mead is known for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from corrshift.errors import SetupError

__all__ = ["PENALTY", "BoundBox", "OptimResult", "minimize"]

PENALTY = 1e10

# reflection, expansion, contraction, shrink
_RHO, _CHI, _PSI, _SIGMA = 1.0, 2.0, 0.5, 0.5
_NONZDELT = 0.05
_ZDELT = 0.00025


@dataclass(frozen=True)
class BoundBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise SetupError("lower and upper bounds differ in length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or not np.all(lo < hi):
            raise SetupError("bounds must satisfy lower < upper elementwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple]) -> "BoundBox":
        lo = [(-math.inf if a is None else a) for a, _ in pairs]
        hi = [(math.inf if b is None else b) for _, b in pairs]
        return cls(np.array(lo, dtype=float), np.array(hi, dtype=float))

    @classmethod
    def unbounded(cls, n: int) -> "BoundBox":
        return cls(np.full(n, -math.inf), np.full(n, math.inf))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool
    message: str


def _initial_simplex(x0, box):
    n = x0.size
    sim = np.empty((n + 1, n))
    sim[0] = x0
    for k in range(n):
        step = _NONZDELT * abs(x0[k]) if x0[k] != 0 else _ZDELT
        y = x0.copy()
        y[k] = x0[k] + step
        if y[k] > box.upper[k]:
            y[k] = x0[k] - step
        y = box.clip(y)
        if y[k] == x0[k]:
            # box narrower than the step on both sides; take the wider side
            y[k] = 0.5 * (box.upper[k] + x0[k]) if box.upper[k] - x0[k] > x0[k] - box.lower[k] \
                else 0.5 * (box.lower[k] + x0[k])
        sim[k + 1] = y
    return sim


def _nelder_mead(f, x0, box, tol, budget):
    sim = _initial_simplex(x0, box)
    n = x0.size
    fsim = np.array([f(v) for v in sim])
    nfev = n + 1
    nit = 0
    converged = False
    while nit < budget:
        order = np.argsort(fsim, kind="stable")
        sim = sim[order]
        fsim = fsim[order]
        diameter = np.max(np.abs(sim[1:] - sim[0]))
        spread = np.max(np.abs(fsim[1:] - fsim[0]))
        if diameter <= tol and spread <= tol:
            converged = True
            break
        nit += 1

        centroid = sim[:-1].mean(axis=0)
        xr = box.clip((1 + _RHO) * centroid - _RHO * sim[-1])
        fr = f(xr)
        nfev += 1
        shrink = False
        if fr < fsim[0]:
            xe = box.clip((1 + _RHO * _CHI) * centroid - _RHO * _CHI * sim[-1])
            fe = f(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-1]:
            xc = box.clip((1 + _PSI * _RHO) * centroid - _PSI * _RHO * sim[-1])
            fc = f(xc)
            nfev += 1
            if fc <= fr:
                sim[-1], fsim[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = box.clip((1 - _PSI) * centroid + _PSI * sim[-1])
            fcc = f(xcc)
            nfev += 1
            if fcc < fsim[-1]:
                sim[-1], fsim[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for j in range(1, n + 1):
                sim[j] = sim[0] + _SIGMA * (sim[j] - sim[0])
                fsim[j] = f(sim[j])
            nfev += n

    best = int(np.argmin(fsim))
    return sim[best].copy(), float(fsim[best]), nit, nfev, converged


def minimize(
    objective: Callable[[np.ndarray], float],
    start,
    bounds: BoundBox | None = None,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> OptimResult:
    """Minimise ``objective`` over a box with a restarted Nelder-Mead search.

    Parameters
    ----------
    objective : callable
        Maps a parameter vector to a real number. Non-finite values and
        exceptions of type ``FloatingPointError``/``ArithmeticError`` are
        scored as :data:`PENALTY`.
    start : array_like
        Starting point; must lie inside ``bounds`` and give a finite objective.
    bounds : BoundBox, optional
        Box constraints. Unbounded when omitted.
    tol : float
        Convergence threshold applied to both the simplex diameter (max-norm,
        parameter units) and the spread of objective values.
    max_iter : int
        Iteration budget shared by the initial run and the restart.

    Returns
    -------
    OptimResult
        Best point found. ``converged`` reflects the final (restarted) run.
    """
    x0 = np.asarray(start, dtype=float).ravel().copy()
    box = BoundBox.unbounded(x0.size) if bounds is None else bounds
    if box.lower.size != x0.size:
        raise SetupError(f"bounds have {box.lower.size} entries for {x0.size} parameters")
    if not box.contains(x0):
        raise SetupError(f"start point {x0} lies outside the bounds")

    def f(x):
        try:
            v = float(objective(x))
        except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError):
            return PENALTY
        return v if math.isfinite(v) else PENALTY

    f0 = f(x0)
    if f0 >= PENALTY:
        raise SetupError("objective is not finite at the start point")

    x1, f1, it1, ev1, conv1 = _nelder_mead(f, x0, box, tol, max_iter)
    remaining = max_iter - it1
    if remaining <= 0:
        return OptimResult(x1, f1, it1, ev1 + 1, False, "iteration budget exhausted")
    x2, f2, it2, ev2, conv2 = _nelder_mead(f, x1, box, tol, remaining)
    nit = it1 + it2
    nfev = 1 + ev1 + ev2
    x, fx = (x2, f2) if f2 <= f1 else (x1, f1)
    if conv2:
        msg = "simplex diameter and objective spread below tolerance"
    else:
        msg = "iteration budget exhausted"
    return OptimResult(x, fx, nit, nfev, conv2, msg)
