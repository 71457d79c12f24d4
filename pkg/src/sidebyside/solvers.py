"""Bracketing solvers used by the best-response computation."""

from __future__ import annotations

import math
from typing import Callable

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1 / phi
INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1 / phi**2


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Maximise a unimodal ``f`` on ``[a, b]``.

    Returns the final bracket ``(lo, hi)`` with ``hi - lo <= tol`` and the
    best point seen with its value.  Ties move the bracket left, so on a
    plateau the smaller end is kept.  ``-inf`` values are allowed.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INVPHI2 * h
    d = a + INVPHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = INVPHI * h
            c = a + INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INVPHI * h
            d = a + INVPHI * h
            fd = f(d)
    if fc >= fd:
        return (a, d), c, fc
    return (c, b), d, fd


def bisect(g: Callable[[float], float], lo: float, hi: float, xtol: float = 0.0, max_iter: int = 200) -> float:
    """Root of an increasing function ``g`` with ``g(lo) < 0 <= g(hi)``.

    Stops at ``xtol`` or when the midpoint no longer splits the bracket in
    floating point.  Returns the upper end, where ``g >= 0``.
    """
    glo, ghi = g(lo), g(hi)
    if glo >= 0:
        return lo
    if ghi < 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: g = ({glo}, {ghi})")
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi
