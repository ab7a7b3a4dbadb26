"""Closed-form real roots of low-degree polynomials."""
from __future__ import annotations

import math


def solve_quadratic(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    # avoid cancellation in the smaller root
    q = -0.5 * (b + math.copysign(sq, b))
    if q == 0.0:
        return [0.0]
    return sorted({q / a, c / q})


def solve_cubic(a: float, b: float, c: float, d: float, rel_eps: float = 1e-14) -> list[float]:
    """Real roots of ``a x^3 + b x^2 + c x + d``, ascending.

    Uses the trigonometric form when all three roots are real and Cardano's
    formula otherwise; each root gets up to two residual-decreasing Newton steps
    against the original polynomial.
    """
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if scale == 0.0:
        raise ValueError("zero polynomial")
    if abs(a) <= rel_eps * scale:
        return solve_quadratic(b, c, d)
    b, c, d = b / a, c / a, d / a
    # depressed cubic t^3 + p t + q with x = t - b/3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if abs(p) < 1e-300 and abs(q) < 1e-300:
        roots = [0.0]
    elif disc > 0.0 or p >= 0.0:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + sq) ** (1.0 / 3.0), -q / 2.0 + sq)
        v = math.copysign(abs(-q / 2.0 - sq) ** (1.0 / 3.0), -q / 2.0 - sq)
        roots = [u + v]
    else:
        r = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, (3.0 * q) / (2.0 * p * r))) if p != 0.0 else 0.0
        phi = math.acos(arg) / 3.0
        roots = [2.0 * r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    out = []
    for t in roots:
        x = t - shift
        f = ((x + b) * x + c) * x + d
        for _ in range(2):
            df = (3.0 * x + 2.0 * b) * x + c
            if df == 0.0:
                break
            # near a multiple root f' vanishes and a raw step can overshoot
            x_new = x - f / df
            f_new = ((x_new + b) * x_new + c) * x_new + d
            if abs(f_new) >= abs(f):
                break
            x, f = x_new, f_new
        out.append(x)
    return sorted(out)
