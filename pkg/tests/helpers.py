"""Independent oracles used by the unit and acceptance tests.

Everything here is deliberately written in plain Python loops against the
formula definitions, so library bugs cannot leak into the expected values.
"""

from __future__ import annotations

from fractions import Fraction


def brute_xi(x, y) -> float:
    """Coefficient by pairwise-comparison ranks and term-by-term evaluation."""
    n = len(x)
    order = sorted(range(n), key=lambda i: x[i])
    u = []
    for i in order:
        rank = sum(1 for v in y if v <= y[i])
        u.append(rank / n)
    total = 0.0
    for i in range(n - 1):
        total += abs(u[i + 1] - u[i])
    return 1.0 - 3.0 * n / (n * n - 1.0) * total


def exact_null_variance_fraction(n: int) -> Fraction:
    return Fraction(n * (n - 2) * (4 * n - 7), 10 * (n - 1) ** 2 * (n + 1))


def variance_numerator_fraction(q: int) -> Fraction:
    if q == 1:
        return Fraction(7, 20)
    if q == 2:
        return Fraction(1353, 2800)
    return Fraction(8, 25) + Fraction(88, 175 * q) - Fraction(229, 700 * q * q)


def mse_fraction(n: int, q: int) -> Fraction:
    m = (n - 1) // (q + 1)
    bias = Fraction(2, 5) + Fraction(1, 10 * q) - exact_null_variance_fraction(n)
    return variance_numerator_fraction(q) / m + bias * bias


def q_star_fraction(n: int) -> int:
    best_q = 1
    best = mse_fraction(n, 1)
    for q in range(2, (n - 1) // 2 + 1):
        value = mse_fraction(n, q)
        if value < best:
            best, best_q = value, q
    return best_q
