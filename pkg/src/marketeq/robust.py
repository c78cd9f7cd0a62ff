"""Robust versions of utilities.

The perspective construction mixes a bundle ``x = x' + x''`` between the
original utility scaled by ``alpha`` and a "saturated" part scaled by
``1 - alpha`` that must reach the box maximum and earns a bonus ``xi``.
For a CPLC utility the whole construction is again one LP, which we write
in the standard ``(q, s, A, B, b)`` form so every downstream LP can use it
unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveVmax
from .model import CplcUtility, PlcUtility

ARGMAX_TIE = 1e-9


@dataclass
class RobustifiedCplc:
    utility: CplcUtility
    xi: float
    vmax: float
    source: CplcUtility


def perspective_robustify(u: CplcUtility, xi: float, vmax: float):
    """Perspective robustification of ``u`` with bonus ``xi``.

    The auxiliary block is ``[x', t', t'', alpha, alpha_bar]``; ``x''`` is
    eliminated as ``x - x'``. Rows, in order:

    * ``A x' + B t' - alpha b <= 0``
    * ``A (x - x') + B t'' - alpha_bar b <= 0``
    * ``q (x - x') + s t'' >= alpha_bar vmax``
    * ``0 <= x' <= x``
    * ``alpha + alpha_bar == 1`` (two rows), ``alpha, alpha_bar >= 0``

    and the value is ``q x + s t' + s t'' + xi alpha_bar``.
    """
    if not vmax > 0:
        raise NonPositiveVmax(f"box maximum {vmax!r} must be positive")
    if not xi > 0:
        raise ValueError("xi must be positive")
    m, r, k = u.n_items, u.n_aux, u.n_rows
    A, B, b, q, s = u.A, u.B, u.b, u.q, u.s
    width = m + 2 * r + 2
    ia = m + 2 * r           # alpha
    ib = ia + 1              # alpha_bar
    Zkm, Zkr = np.zeros((k, m)), np.zeros((k, r))
    zk = np.zeros((k, 1))

    rows_x, rows_t = [], []

    rows_x.append(Zkm)
    rows_t.append(np.hstack([A, B, Zkr, -b[:, None], zk]))

    rows_x.append(A)
    rows_t.append(np.hstack([-A, Zkr, B, zk, -b[:, None]]))

    rows_x.append(-q[None, :])
    rows_t.append(np.r_[q, np.zeros(r), -s, 0.0, vmax][None, :])

    eye = np.eye(m)
    Zmt = np.zeros((m, 2 * r + 2))
    rows_x.append(-eye)
    rows_t.append(np.hstack([eye, Zmt]))
    rows_x.append(np.zeros((m, m)))
    rows_t.append(np.hstack([-eye, Zmt]))

    mix = np.zeros((4, width))
    mix[0, ia] = mix[0, ib] = 1.0
    mix[1, ia] = mix[1, ib] = -1.0
    mix[2, ia] = -1.0
    mix[3, ib] = -1.0
    rows_x.append(np.zeros((4, m)))
    rows_t.append(mix)

    A_new = np.vstack(rows_x)
    B_new = np.vstack(rows_t)
    b_new = np.zeros(A_new.shape[0])
    b_new[-4] = 1.0
    b_new[-3] = -1.0
    s_new = np.r_[np.zeros(m), s, s, 0.0, xi]
    out = CplcUtility(q.copy(), s_new, A_new, B_new, b_new)
    return RobustifiedCplc(out, float(xi), float(vmax), u)


def additive_robustify_plc(u: PlcUtility, xi: float, m: int) -> PlcUtility:
    """Raise every piece coefficient by ``xi / m``."""
    if m != u.n_items:
        raise ValueError(f"item count {m} does not match utility ({u.n_items})")
    return PlcUtility(u.a + xi / m, u.beta.copy())


def linear_matching_robustify(a, xi: float) -> np.ndarray:
    """Add ``xi`` to the favourite items (ties within ``1e-9``)."""
    a = np.asarray(a, dtype=float).ravel()
    out = a.copy()
    out[a >= a.max() - ARGMAX_TIE] += xi
    return out


def argmax_set(a) -> np.ndarray:
    a = np.asarray(a, dtype=float).ravel()
    return np.flatnonzero(a >= a.max() - ARGMAX_TIE)
