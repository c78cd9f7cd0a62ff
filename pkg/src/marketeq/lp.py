"""Dense two-phase simplex.

Every program built elsewhere in the package goes through :func:`solve_lp`
or :func:`check_feasible`. The pivoting kernel is compiled with numba and
releases the GIL, so independent solves can run on separate threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

LE, EQ, GE = "<=", "==", ">="
_SENSE_CODE = {LE: 0, EQ: 1, GE: 2}

TAU_FEAS = 1e-7
TAU_DUAL = 1e-8
# coefficients this small relative to the largest one are rounding noise
TAU_DROP = 1e-12
BLAND_AFTER = 50
MAX_ITER = 1_000_000

_ST_OPTIMAL, _ST_INFEASIBLE, _ST_UNBOUNDED, _ST_STALL = 0, 1, 2, 3


class MalformedProgram(ValueError):
    pass


class NumericalStall(RuntimeError):
    pass


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """``max/min c @ x`` subject to ``A[i] @ x  senses[i]  rhs[i]``.

    Variables are nonnegative unless flagged in ``free``.
    """

    c: np.ndarray
    A: np.ndarray
    senses: list
    rhs: np.ndarray
    maximize: bool = True
    free: np.ndarray | None = None

    @property
    def n_vars(self):
        return len(self.c)

    @property
    def n_rows(self):
        return len(self.rhs)


@dataclass
class LpOutcome:
    status: Status
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


@njit(cache=True, nogil=True)
def _pivot(T, basis, r, e):
    m1, w = T.shape
    piv = T[r, e]
    for j in range(w):
        T[r, j] /= piv
    for i in range(m1):
        if i == r:
            continue
        f = T[i, e]
        if f != 0.0:
            for j in range(w):
                T[i, j] -= f * T[r, j]
            T[i, e] = 0.0
    T[r, e] = 1.0
    basis[r] = e


@njit(cache=True, nogil=True)
def _optimize(T, basis, allowed, max_iter, bland_after, it0):
    """Run simplex pivots on a canonical tableau (last row = reduced costs)."""
    m = T.shape[0] - 1
    ncol = T.shape[1] - 1
    obj = m
    rc_tol = 1e-9
    piv_tol = 1e-9
    it = it0
    degenerate_run = 0
    bland = False
    while True:
        if it >= max_iter:
            return _ST_STALL, it
        e = -1
        if bland:
            for j in range(ncol):
                if allowed[j] and T[obj, j] < -rc_tol:
                    e = j
                    break
        else:
            best = -rc_tol
            for j in range(ncol):
                if allowed[j] and T[obj, j] < best:
                    best = T[obj, j]
                    e = j
        if e < 0:
            return _ST_OPTIMAL, it
        r = -1
        best_ratio = np.inf
        for i in range(m):
            a = T[i, e]
            if a > piv_tol:
                rhs = T[i, ncol]
                if rhs < 0.0:
                    rhs = 0.0
                ratio = rhs / a
                if r < 0 or ratio < best_ratio - 1e-12 * (1.0 + best_ratio):
                    r = i
                    best_ratio = ratio
                elif ratio <= best_ratio + 1e-12 * (1.0 + best_ratio):
                    if bland:
                        if basis[i] < basis[r]:
                            r = i
                    elif a > T[r, e]:
                        r = i
                    if ratio < best_ratio:
                        best_ratio = ratio
        if r < 0:
            return _ST_UNBOUNDED, it
        if best_ratio <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= bland_after:
                bland = True
        else:
            degenerate_run = 0
        _pivot(T, basis, r, e)
        it += 1


@njit(cache=True, nogil=True)
def _simplex(A, b, sense, c, phase1_only, feas_tol, max_iter, bland_after):
    """Two-phase simplex on ``max c@x, A x (sense) b, x >= 0``.

    Returns (status, x, duals, iterations). Rows must already be scaled.
    """
    m, n = A.shape
    A = A.copy()
    b = b.copy()
    sense = sense.copy()
    flip = np.ones(m)
    for i in range(m):
        if b[i] < 0.0:
            flip[i] = -1.0
            b[i] = -b[i]
            for j in range(n):
                A[i, j] = -A[i, j]
            if sense[i] == 0:
                sense[i] = 2
            elif sense[i] == 2:
                sense[i] = 0
    n_slack = 0
    n_art = 0
    for i in range(m):
        if sense[i] != 1:
            n_slack += 1
        if sense[i] != 0:
            n_art += 1
    ncol = n + n_slack + n_art
    T = np.zeros((m + 1, ncol + 1))
    basis = np.empty(m, dtype=np.int64)
    # auxiliary column j >= n is a signed unit vector in row col_row[j - n]
    col_row = np.empty(n_slack + n_art, dtype=np.int64)
    col_sign = np.ones(n_slack + n_art)
    s = n
    a = n + n_slack
    for i in range(m):
        for j in range(n):
            T[i, j] = A[i, j]
        T[i, ncol] = b[i]
        if sense[i] == 0:
            T[i, s] = 1.0
            col_row[s - n] = i
            basis[i] = s
            s += 1
        else:
            if sense[i] == 2:
                T[i, s] = -1.0
                col_row[s - n] = i
                col_sign[s - n] = -1.0
                s += 1
            T[i, a] = 1.0
            col_row[a - n] = i
            basis[i] = a
            a += 1
    art0 = n + n_slack
    allowed = np.ones(ncol, dtype=np.bool_)
    it = 0
    if n_art > 0:
        for j in range(art0, ncol):
            T[m, j] = 1.0
        for i in range(m):
            if basis[i] >= art0:
                for j in range(ncol + 1):
                    T[m, j] -= T[i, j]
        st, it = _optimize(T, basis, allowed, max_iter, bland_after, it)
        if st == _ST_STALL:
            return _ST_STALL, np.zeros(n), np.zeros(m), it
        if -T[m, ncol] > feas_tol:
            return _ST_INFEASIBLE, np.zeros(n), np.zeros(m), it
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= art0:
                best = 1e-7
                e = -1
                for j in range(art0):
                    if abs(T[i, j]) > best:
                        best = abs(T[i, j])
                        e = j
                if e >= 0:
                    _pivot(T, basis, i, e)
        for j in range(art0, ncol):
            allowed[j] = False
    if not phase1_only:
        for j in range(ncol + 1):
            T[m, j] = 0.0
        for j in range(n):
            T[m, j] = -c[j]
        for i in range(m):
            k = basis[i]
            if k < n and c[k] != 0.0:
                for j in range(ncol + 1):
                    T[m, j] += c[k] * T[i, j]
        st, it = _optimize(T, basis, allowed, max_iter, bland_after, it)
        if st != _ST_OPTIMAL:
            return st, np.zeros(n), np.zeros(m), it
    # refine the vertex and duals from the final basis
    Bm = np.zeros((m, m))
    cb = np.zeros(m)
    for i in range(m):
        k = basis[i]
        if k < n:
            for r in range(m):
                Bm[r, i] = A[r, k]
            if not phase1_only:
                cb[i] = c[k]
        else:
            Bm[col_row[k - n], i] = col_sign[k - n]
    x = np.zeros(n)
    y = np.zeros(m)
    if m > 0:
        xb = np.linalg.solve(Bm, b)
        for i in range(m):
            if basis[i] < n:
                x[basis[i]] = xb[i] if xb[i] > 0.0 else 0.0
        y = np.linalg.solve(Bm.T, cb)
    for i in range(m):
        y[i] *= flip[i]
    return _ST_OPTIMAL, x, y, it


def _as_program_arrays(lp):
    c = np.asarray(lp.c, dtype=float).ravel()
    n = c.size
    A = np.asarray(lp.A, dtype=float)
    if A.size == 0:
        A = A.reshape(len(lp.rhs), n)
    rhs = np.asarray(lp.rhs, dtype=float).ravel()
    if A.ndim != 2 or A.shape != (rhs.size, n):
        raise MalformedProgram(
            f"row matrix has shape {A.shape}, expected ({rhs.size}, {n})")
    if len(lp.senses) != rhs.size:
        raise MalformedProgram("one relation per row is required")
    try:
        sense = np.array([_SENSE_CODE[s] for s in lp.senses], dtype=np.int64)
    except KeyError as exc:
        raise MalformedProgram(f"unknown relation {exc.args[0]!r}") from None
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))
            and np.all(np.isfinite(c))):
        raise MalformedProgram("coefficients must be finite")
    free = (np.zeros(n, dtype=bool) if lp.free is None
            else np.asarray(lp.free, dtype=bool).ravel())
    if free.size != n:
        raise MalformedProgram("free mask must have one entry per variable")
    return c, A, sense, rhs, free


def _run(lp, phase1_only):
    c, A, sense, rhs, free = _as_program_arrays(lp)
    n = c.size
    if not lp.maximize:
        c = -c
    if free.any():
        idx = np.flatnonzero(free)
        A = np.hstack([A, -A[:, idx]])
        c = np.concatenate([c, -c[idx]])
    big = np.abs(A).max() if A.size else 0.0
    A = np.where(np.abs(A) <= TAU_DROP * (1.0 + big), 0.0, A)
    scale = np.abs(A).max(axis=1) if A.shape[1] else np.zeros(len(rhs))
    # rows without coefficients are decided here and left out
    empty = scale == 0.0
    if empty.any():
        r, sn = rhs[empty], sense[empty]
        bad = ((sn == 0) & (r < -TAU_FEAS)) | ((sn == 2) & (r > TAU_FEAS)) \
            | ((sn == 1) & (np.abs(r) > TAU_FEAS))
        if bad.any():
            return LpOutcome(Status.INFEASIBLE)
    keep = ~empty
    As = A[keep] / scale[keep, None]
    bs = rhs[keep] / scale[keep]
    feas_tol = TAU_FEAS * (1.0 + (np.abs(bs).max() if bs.size else 0.0))
    st, x, yk, it = _simplex(np.ascontiguousarray(As), bs, sense[keep],
                             np.ascontiguousarray(c), phase1_only, feas_tol,
                             MAX_ITER, BLAND_AFTER)
    if st == _ST_STALL:
        raise NumericalStall(f"no convergence within {MAX_ITER} pivots")
    if st == _ST_INFEASIBLE:
        return LpOutcome(Status.INFEASIBLE, iterations=it)
    if st == _ST_UNBOUNDED:
        return LpOutcome(Status.UNBOUNDED, iterations=it)
    if free.any():
        x = x[:n].copy() - _scatter(x[n:], idx, n)
    y = np.zeros(len(rhs))
    y[keep] = yk / scale[keep]
    if phase1_only:
        return LpOutcome(Status.OPTIMAL, x, 0.0, np.zeros(len(rhs)), it)
    obj = float(np.asarray(lp.c, dtype=float) @ x)
    if not lp.maximize:
        y = -y
    return LpOutcome(Status.OPTIMAL, x, obj, y, it)


def _scatter(vals, idx, n):
    out = np.zeros(n)
    out[idx] = vals
    return out


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Optimize ``lp``.

    On success the outcome carries a basic optimal point and one dual value
    per row, signed so that ``rhs @ duals`` equals the optimal objective.

    Raises
    ------
    MalformedProgram
        Dimension mismatch, unknown relation or non-finite data.
    NumericalStall
        Pivot cap exceeded even after switching to Bland's rule.
    """
    return _run(lp, phase1_only=False)


def check_feasible(lp: LinearProgram) -> LpOutcome:
    """Phase one only: return some feasible point, or ``INFEASIBLE``."""
    return _run(lp, phase1_only=True)
