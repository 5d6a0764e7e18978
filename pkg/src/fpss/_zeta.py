"""Even zeta values and derived series coefficients.

Everything downstream expands logarithms of sinc-type products in the series

    ln sinc(x) = -sum_{n>=1} q_n x^(2n),   q_n = zeta(2n) / (n pi^(2n)),

so the quantity actually needed is q_n, which is exactly rational:

    q_n = 2^(2n) |B_{2n}| / (2n (2n)!).

Computing q_n from Bernoulli numbers with Fraction arithmetic and converting
once to float gives correctly rounded coefficients with no pi in sight (the
pi^(2n) cancels against zeta's closed form), which keeps the series accurate
to the last bit.  zeta(2n) itself is exposed for tests and casual use.
"""

from __future__ import annotations

import math
from fractions import Fraction

N_TERMS = 64


def _bernoulli(m: int) -> list[Fraction]:
    """B_0..B_m as exact Fractions, via the defining recurrence."""
    b = [Fraction(0)] * (m + 1)
    b[0] = Fraction(1)
    for n in range(1, m + 1):
        acc = Fraction(0)
        binom = 1  # C(n+1, 0)
        for j in range(n):
            acc += binom * b[j]
            binom = binom * (n + 1 - j) // (j + 1)
        b[n] = -acc / (n + 1)
    return b


def _build_tables() -> tuple[tuple[float, ...], tuple[float, ...]]:
    bern = _bernoulli(2 * N_TERMS)
    q = []
    fact = math.factorial
    for n in range(1, N_TERMS + 1):
        num = (1 << (2 * n)) * abs(bern[2 * n])
        q_n = num / (2 * n * fact(2 * n))  # Fraction
        q.append(float(q_n))
    zeta = tuple(q[n - 1] * n * math.pi ** (2 * n) for n in range(1, N_TERMS + 1))
    return tuple(q), zeta


#: q_n = zeta(2n) / (n pi^(2n)), n = 1..64
Q64, _ZETA_EVEN = _build_tables()

#: 2n q_n (series for 1/x - cot x)
QD64 = tuple(2.0 * n * Q64[n - 1] for n in range(1, N_TERMS + 1))

#: (2n+1) q_n (series for ln H_1 = theta^2/2 + V_1)
QV64 = tuple((2.0 * n + 1.0) * Q64[n - 1] for n in range(1, N_TERMS + 1))

#: 2n(2n+1) q_n (series for f(theta) = theta (ln H_1)'(theta))
QF64 = tuple(2.0 * n * (2.0 * n + 1.0) * Q64[n - 1] for n in range(1, N_TERMS + 1))


def zeta_even(n: int) -> float:
    """zeta(2n) for 1 <= n <= 64."""
    if not 1 <= n <= N_TERMS:
        raise ValueError(f"zeta_even supports 1 <= n <= {N_TERMS}, got {n}")
    return _ZETA_EVEN[n - 1]
