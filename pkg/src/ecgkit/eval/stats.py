"""Paired t-test with a self-contained Student-t distribution."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..exceptions import ValidationError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10000


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the continued fraction converges fast on the side below the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf2(t: float, dof: float) -> float:
    """Two-tailed tail probability ``P(|T| >= |t|)``."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    if math.isinf(t):
        return 0.0
    return betainc(dof / 2.0, 0.5, dof / (dof + t * t))


def t_cdf(t: float, dof: float) -> float:
    tail = 0.5 * t_sf2(t, dof)
    return 1.0 - tail if t > 0 else tail


@dataclass(frozen=True)
class PairedTTestResult:
    mean_diff: float
    sd_diff: float
    t: float
    p: float
    n: int
    degenerate: bool = False

    @property
    def dof(self) -> int:
        return self.n - 1


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> PairedTTestResult:
    """Two-sided paired t-test on ``a - b``.

    Zero spread in the differences is degenerate: identical samples give
    ``t = 0, p = 1``; a constant nonzero shift gives ``t = +-inf, p = 0``.
    """
    if len(a) != len(b):
        raise ValidationError("paired samples differ in length")
    n = len(a)
    if n < 2:
        raise ValidationError("a paired t-test needs at least two pairs")
    d = [float(x) - float(y) for x, y in zip(a, b)]
    if not all(math.isfinite(v) for v in d):
        raise ValidationError("non-finite score")
    mean = math.fsum(d) / n
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in d) / (n - 1))
    if sd == 0.0:
        if mean == 0.0:
            return PairedTTestResult(0.0, 0.0, 0.0, 1.0, n, degenerate=True)
        return PairedTTestResult(mean, 0.0, math.copysign(math.inf, mean), 0.0, n, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    return PairedTTestResult(mean, sd, t, t_sf2(t, n - 1), n)
