"""Closed-form expected draw counts for the two reference transforms.

Two stopping problems have exact answers and anchor every other module:

* the plain uniform sum (identity transform): the expected number of
  uniform draws whose running sum first exceeds t, here
  ``uniform_sum_count``;
* the product form (logproduct transform): increments ln(1 + (e-1)X),
  equivalently a product of 1 + (e-1)X factors crossing e^t, with exact
  formulas on [0, 1] and [1, 2] plus a convergent series on [0, 1].

The series for the product form is built from partial Taylor sums of
exp(-t); those helpers are exposed because their three-term recurrence is
a sharp self-test of the whole evaluation chain.
"""

from __future__ import annotations

import math

from .bijections import ConvergenceError, DomainError

__all__ = [
    "taylor_exp_neg",
    "exp_tail_weight",
    "product_series_term",
    "product_count_01",
    "product_count_12",
    "product_count",
    "product_count_series",
    "product_count_asymptote",
    "uniform_sum_count",
    "uniform_sum_asymptote",
    "SUM_COUNT_T_CAP",
]

_E = math.e
_EM1 = math.e - 1.0
# growth rate of the product-form count on [1, 2]
_RATE = _E / _EM1
# constant in front of the e^{rate*t} term on [1, 2]
_C12 = -_EM1 / _E ** (2.0 + 1.0 / _EM1) + 1.0 / _E + math.exp(-_RATE) / _EM1

# beyond this the alternating sum in uniform_sum_count has shed too much
# precision to be called exact (see the docstring)
SUM_COUNT_T_CAP = 30.0


def _check_unit_t(t: float, name: str = "t") -> float:
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {t}")
    return t


def taylor_exp_neg(t: float, n: int) -> float:
    """Partial Taylor sum of exp(-t): sum of (-t)^k / k! for k < n.

    Summed in ascending k with compensated (Kahan) accumulation so the
    alternating terms cancel without picking up accumulation error.
    """
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if not (isinstance(n, int) and n >= 1):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    total = 0.0
    comp = 0.0
    term = 1.0
    for k in range(n):
        y = term - comp
        tmp = total + y
        comp = (tmp - total) - y
        total = tmp
        term *= -t / (k + 1)
    return total


def exp_tail_weight(t: float, n: int) -> float:
    """Scaled Taylor remainder of exp(-t): (-1)^n (1 - e^t * taylor_exp_neg).

    Nonnegative for t in [0, 1], and satisfies the recurrence

        W(t, n+1) + W(t, n) = e^t t^n / n!

    which the verification suite checks to 1e-12.
    """
    t = _check_unit_t(t)
    if not (isinstance(n, int) and n >= 0):
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    if n == 0:
        # empty partial sum, weight is exactly 1
        return 1.0
    sign = -1.0 if n % 2 else 1.0
    return sign * (1.0 - taylor_exp_neg(t, n) * math.exp(t))


def product_series_term(t: float, n: int) -> float:
    """n-th term of the series for the product-form count: weight / (e-1)^n."""
    t = _check_unit_t(t)
    if not (isinstance(n, int) and n >= 0):
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    if n == 0:
        return 1.0
    return exp_tail_weight(t, n) / _EM1**n


def product_count_01(t: float) -> float:
    """Exact expected draw count for the product form, t in [0, 1]."""
    t = _check_unit_t(t)
    return _EM1 / _E + math.exp(t - 1.0 + t / _EM1)


def product_count_12(t: float) -> float:
    """Exact expected draw count for the product form, t in [1, 2]."""
    t = float(t)
    if not (1.0 <= t <= 2.0):
        raise DomainError(f"t must lie in [1, 2], got {t}")
    grow = math.exp(_RATE * t)
    return grow * _C12 + 2.0 * _EM1 / _E - math.exp(-_RATE) * t * grow / _EM1


def product_count(t: float) -> float:
    """Exact product-form count on [0, 2], dispatching to the right branch."""
    t = float(t)
    if not (0.0 <= t <= 2.0):
        raise DomainError(f"t must lie in [0, 2], got {t}")
    return product_count_01(t) if t <= 1.0 else product_count_12(t)


def product_count_series(t: float, tol: float = 1e-12) -> float:
    """Series evaluation of the product-form count on [0, 1].

    Terms are added in ascending n and the sum stops once |term| < tol
    with at least 5 terms taken.  Terms decay geometrically (ratio below
    1/(e-1)), so the truncated tail is of the same order as tol and the
    result agrees with ``product_count_01`` within about 10 * tol.
    """
    t = _check_unit_t(t)
    tol = float(tol)
    if not (0.0 < tol <= 1e-3):
        raise DomainError(f"tol must be in (0, 1e-3], got {tol}")
    total = 1.0
    for n in range(1, 400):
        term = product_series_term(t, n)
        total += term
        if abs(term) < tol and n >= 5:
            return total
    raise ConvergenceError(  # pragma: no cover - terms decay geometrically
        f"series did not reach tol={tol:g} within 400 terms"
    )


def product_count_asymptote(t: float) -> float:
    """Asymptotic line for the product form: (e-1) * (t + (e-2)/2)."""
    return _EM1 * (float(t) + (_E - 2.0) / 2.0)


def uniform_sum_count(t: float) -> float:
    """Exact expected number of uniform draws for the plain sum to exceed t.

    Evaluates the alternating series

        sum over k = 0..floor(t) of (-1)^k (t-k)^k e^{t-k} / k!

    with exact summation of the computed terms (math.fsum).  The terms grow
    roughly like e^{0.9 t} before cancelling down to an O(t) result, so the
    absolute error grows with t: about (floor(t)+2) * 2^-53 * max |term|,
    measured at ~2e-10 for t = 10 and ~1 near t = 30.  Values of t above
    30 are rejected rather than silently degraded.
    """
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if t > SUM_COUNT_T_CAP:
        raise DomainError(
            f"exact sum-count series is supported for t in [0, {SUM_COUNT_T_CAP:g}] "
            f"(alternating-series precision cap), got {t}"
        )
    terms = []
    for k in range(math.floor(t) + 1):
        sign = -1.0 if k % 2 else 1.0
        # (t-k)**k with the 0**0 = 1 convention at t = k = 0
        terms.append(sign * (t - k) ** k * math.exp(t - k) / math.factorial(k))
    return math.fsum(terms)


def uniform_sum_asymptote(t: float) -> float:
    """Asymptotic line for the plain uniform sum: 2t + 2/3."""
    return 2.0 * float(t) + 2.0 / 3.0
