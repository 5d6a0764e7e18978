"""Envelopes with explicit masses for two restricted densities.

Two families appear throughout the small-delta sampler: x^(c-1) e^x and
x^(c-1) e^(-x), each restricted to an interval (a, b].  Neither has a
closed-form mass, but both admit computable bounds M and G that are tight to
a constant factor, and envelopes built from those bounds whose normalized
forms are directly sampleable.  Everything is carried in log scale because
the masses range over thousands of orders of magnitude in actual use.

The half-exponential density E_s(x) = (s/2) min(1, e^(1-sx)) on x >= 0 is
the basic building block: any decreasing log-concave density with a mass
bound can be dominated by a multiple of it.
"""

from __future__ import annotations

import math
from math import exp, expm1, inf, log, log1p

from fpss import _kernels
from fpss.special import (
    ln_expm1,
    ln_expm1_minus_x,
    log1mexp,
    logsumexp,
)

__all__ = [
    "ln_E",
    "draw_E",
    "ln_pow_diff",
    "ln_M",
    "ln_G",
    "PhiStar",
    "GStar",
    "R74",
]

# r_7(4) = (e^4 - sum_{k<=7} 4^k/k!) * 8!/4^8, the tail ratio that caps the
# k=8 mixture weight; must stay <= 2*8/9 for the left envelope's mass bound
R74 = (math.exp(4.0) - sum(4.0**k / math.factorial(k) for k in range(8))) * (
    math.factorial(8) / 4.0**8
)
assert R74 <= 16.0 / 9.0, R74

_LN2 = math.log(2.0)


def ln_E(s: float, x: float) -> float:
    """ln E_s(x); -inf for x < 0 or s <= 0 (E_0 is identically zero)."""
    if x < 0.0 or s <= 0.0:
        return -inf
    return log(s / 2.0) + min(0.0, 1.0 - s * x)


def draw_E(rng, s: float) -> float:
    """Sample from E_s (uniform half plus exponential tail)."""
    return _kernels.sample_E(rng, s)


def ln_pow_diff(a: float, b: float, p: float) -> float:
    """ln(b^p - a^p) for 0 <= a < b, p > 0, stable for a close to b."""
    if a == 0.0:
        return p * log(b)
    return p * log(a) + ln_expm1(p * log1p((b - a) / a))


def ln_M(a: float, b: float, c: float) -> float:
    """ln M(a,b,c) where M bounds the mass of x^(c-1) e^x on (a, b].

    M = (b^c - a^c)/c + 2[b^(c-1)(e^b-1-b) - a^(c-1)(e^a-1-a)] and the true
    mass lies in (M/2, M].  Needs c in (0,1); returns -inf when a >= b.
    """
    if a >= b:
        return -inf
    term1 = ln_pow_diff(a, b, c) - log(c)
    lb = _LN2 + (c - 1.0) * log(b) + ln_expm1_minus_x(b)
    if a == 0.0:
        bracket = lb
    else:
        la = _LN2 + (c - 1.0) * log(a) + ln_expm1_minus_x(a)
        bracket = lb + log1mexp(la - lb)
    return logsumexp((term1, bracket))


def ln_G(a: float, b: float, c: float) -> float:
    """ln G(a,b,c) where G bounds the mass of x^(c-1) e^(-x) on (a, b].

    The true mass lies in [G/e, G].  Needs c in (0,2); returns -inf when
    a >= b; b may be +inf.
    """
    if a >= b:
        return -inf
    if b <= a + 1.0:
        # e^-a (b^c - a^c)/c
        return -a + ln_pow_diff(a, b, c) - log(c)
    if b <= a + 2.0:
        return logsumexp((ln_G(a, a + 1.0, c), ln_G(a + 1.0, b, c)))
    head = ln_G(a, a + 2.0, c)
    if c >= 1.0:
        # 2[(a+2)^(c-1) e^(-a-2) - b^(c-1) e^(-b)], decreasing integrand
        l1 = (c - 1.0) * log(a + 2.0) - (a + 2.0)
        l2 = (c - 1.0) * log(b) - b if b < inf else -inf
        tail = _LN2 + l1 + (log1mexp(l2 - l1) if l2 > -inf else 0.0)
    else:
        # (a+2)^(c-1) (e^(-a-2) - e^(-b))
        drop = log1mexp(-(b - (a + 2.0))) if b < inf else 0.0
        tail = (c - 1.0) * log(a + 2.0) - (a + 2.0) + drop
    return logsumexp((head, tail))


def _pick_ln(rng, ln_weights) -> int:
    """Categorical index draw from unnormalized log weights."""
    m = max(ln_weights)
    ws = [exp(v - m) for v in ln_weights]
    u = rng.u() * sum(ws)
    acc = 0.0
    for i, w in enumerate(ws):
        acc += w
        if u <= acc:
            return i
    return len(ws) - 1


class PhiStar:
    """Envelope for x^(c-1) e^x on (a, b], c in (0,1), with mass 2M(a,b,c).

    The interval splits at x_c = (1+sqrt(1-c))^2: below it a 9-term power
    mixture dominates (the series tail ratio r_7(4) caps the last weight),
    above it the density is log-concave after the p_c power transform and an
    E_s tail dominates.  ``sample_ln`` returns ln X, or None when the tail
    part lands outside (0, b] (callers treat that as an AR rejection);
    ``eval_ln`` is the log of the unnormalized envelope density.
    """

    __slots__ = (
        "a",
        "b",
        "c",
        "x_c",
        "p_c",
        "A",
        "B",
        "ln_m_left",
        "ln_m_right",
        "ln_total",
        "_ln_w",
        "_ln_w_sum",
        "_b_pow",
        "_ln_s",
        "_ln_b",
    )

    def __init__(self, a: float, b: float, c: float):
        if not 0.0 <= a < b:
            raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
        if not 0.0 < c < 1.0:
            raise ValueError(f"need c in (0,1), got {c}")
        self.a, self.b, self.c = a, b, c
        root = math.sqrt(1.0 - c)
        self.x_c = (1.0 + root) ** 2
        self.p_c = 1.0 / (1.0 + root)
        self.A = min(b, self.x_c)
        self.B = max(a, self.x_c)
        self.ln_m_left = ln_M(a, self.A, c)
        self.ln_m_right = ln_M(self.B, b, c)
        self.ln_total = _LN2 + logsumexp((self.ln_m_left, self.ln_m_right))
        if self.ln_m_left > -inf:
            ln_w = []
            ln_a = log(a) if a > 0.0 else -inf
            ln_ratio = (ln_a - log(self.A)) if a > 0.0 else -inf
            for k in range(9):
                p = k + c
                lw = p * log(self.A) - log(p) - math.lgamma(k + 1.0)
                if a > 0.0:
                    lw += log1mexp(p * ln_ratio)
                if k == 8:
                    lw += log(R74)
                ln_w.append(lw)
            self._ln_w = ln_w
            self._ln_w_sum = logsumexp(ln_w)
            # the mixture mass must stay below the envelope mass it stands for
            assert self._ln_w_sum <= _LN2 + self.ln_m_left + 1e-9
        else:
            self._ln_w = None
            self._ln_w_sum = -inf
        if self.ln_m_right > -inf:
            self._b_pow = b ** (1.0 / self.p_c)
            self._ln_s = (
                log(self.p_c) + (c - 1.0 / self.p_c) * log(b) + b - self.ln_m_right
            )
        else:
            self._b_pow = 0.0
            self._ln_s = -inf
        self._ln_b = log(b)

    def sample_ln(self, rng) -> float | None:
        """Draw ln X from the normalized envelope; None means auto-reject."""
        pick_right = log(rng.u()) > self.ln_m_left - (self.ln_total - _LN2)
        if not pick_right:
            k = _pick_ln(rng, self._ln_w)
            p = k + self.c
            v = rng.u()
            if self.a == 0.0:
                return log(self.A) + log(v) / p
            grow = expm1(p * log1p((self.A - self.a) / self.a)) * v
            return log(self.a) + log1p(grow) / p
        y = draw_E(rng, exp(self._ln_s))
        d = self._b_pow - y
        if d <= 0.0:
            return None
        return self.p_c * log(d)

    def eval_ln(self, ln_x: float) -> float:
        """ln of the envelope density at x = e^(ln_x) (x in (0, b])."""
        return (self.c - 1.0) * ln_x + self.eval_ln_tilted(ln_x)

    def eval_ln_tilted(self, ln_x: float) -> float:
        """ln of x^(1-c) times the envelope density at x = e^(ln_x).

        The tilt cancels the power singularity of the left mixture exactly,
        so the result stays accurate for ln_x far below -745 where x itself
        is not representable.  Callers whose acceptance ratio carries a
        matching x^(c-1) factor should combine with this form.
        """
        x = exp(ln_x)
        parts = []
        in_left = (
            self._ln_w is not None
            and (x > self.a or (self.a == 0.0 and ln_x > -inf))
            and ln_x <= log(self.A) + 1e-9
        )
        if in_left:
            # 2 M_left * f_7(x) / sum(w): f_7 = sum x^k/k! + r74 x^8/8!
            acc = 0.0
            t = 1.0
            for k in range(8):
                acc += t
                t *= x / (k + 1.0)
            acc += R74 * t
            parts.append(_LN2 + self.ln_m_left + log(acc) - self._ln_w_sum)
        if self.ln_m_right > -inf:
            t_arg = self._b_pow - exp(ln_x / self.p_c)
            if t_arg < 0.0 and ln_x <= self._ln_b + 1e-9:
                # x <= b in exact arithmetic: the negative is power rounding
                t_arg = 0.0
            le = ln_E(exp(self._ln_s), t_arg)
            if le > -inf:
                parts.append(
                    _LN2
                    + self.ln_m_right
                    - log(self.p_c)
                    + (1.0 / self.p_c - self.c) * ln_x
                    + le
                )
        if not parts:
            return -inf
        return logsumexp(parts)


class GStar:
    """Envelope for x^(c-1) e^(-x) on (a, b], c in (0,2), with mass <= 2e times the target's.

    For c in [1,2) the density splits at its mode c-1 into increasing and
    decreasing log-concave halves, each dominated by a reflected E tail.  For
    c in (0,1) the power transform t = x^c makes it decreasing log-concave
    outright.  Same sample/eval interface as PhiStar.
    """

    __slots__ = (
        "a",
        "b",
        "c",
        "A",
        "B",
        "ln_g_left",
        "ln_g_right",
        "ln_total",
        "_s_left",
        "_s_right",
        "_ln_g",
        "_s_pow",
        "_a_pow_m1",
    )

    def __init__(self, a: float, b: float, c: float):
        if not 0.0 <= a < b:
            raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
        if not 0.0 < c < 2.0:
            raise ValueError(f"need c in (0,2), got {c}")
        self.a, self.b, self.c = a, b, c
        if c >= 1.0:
            self.A = min(b, c - 1.0)
            self.B = max(a, c - 1.0)
            self.ln_g_left = ln_G(a, self.A, c)
            self.ln_g_right = ln_G(self.B, b, c)
            self.ln_total = _LN2 + logsumexp((self.ln_g_left, self.ln_g_right))
            self._s_left = (
                exp((c - 1.0) * log(self.A) - self.A - self.ln_g_left)
                if self.ln_g_left > -inf
                else 0.0
            )
            self._s_right = (
                exp((c - 1.0) * log(self.B) - self.B - self.ln_g_right)
                if self.ln_g_right > -inf and self.B > 0.0
                else (
                    exp(-self.B - self.ln_g_right) if self.ln_g_right > -inf else 0.0
                )
            )
            self._ln_g = -inf
            self._s_pow = 0.0
            self._a_pow_m1 = 0.0
        else:
            self.A = self.B = 0.0
            self.ln_g_left = self.ln_g_right = -inf
            self._s_left = self._s_right = 0.0
            self._ln_g = ln_G(a, b, c)
            self.ln_total = _LN2 + self._ln_g
            self._s_pow = exp(-a - log(c) - self._ln_g)
            # a^c - 1 kept in expm1 form: a^c itself rounds to 1 when c*ln(a)
            # is below ulp resolution, which wipes out the offset entirely
            self._a_pow_m1 = expm1(c * log(a)) if a > 0.0 else -1.0

    def sample_ln(self, rng) -> float | None:
        """Draw ln X from the normalized envelope; None means auto-reject."""
        if self.c >= 1.0:
            go_left = log(rng.u()) <= self.ln_g_left - (self.ln_total - _LN2)
            if go_left:
                x = self.A - draw_E(rng, self._s_left)
                if x <= 0.0:
                    return None
                return log(x)
            return log(self.B + draw_E(rng, self._s_right))
        z = draw_E(rng, self._s_pow)
        if self.a > 0.0:
            return log1p(self._a_pow_m1 + z) / self.c
        return log(z) / self.c

    def eval_ln(self, ln_x: float) -> float:
        """ln of the envelope density at x = e^(ln_x)."""
        x = exp(ln_x)
        if self.c >= 1.0:
            parts = []
            if self.ln_g_left > -inf:
                arg = self.A - x
                if arg < 0.0 and ln_x <= log(self.A) + 1e-9:
                    arg = 0.0  # x <= A in exact arithmetic
                le = ln_E(self._s_left, arg)
                if le > -inf:
                    parts.append(_LN2 + self.ln_g_left + le)
            if self.ln_g_right > -inf:
                arg = x - self.B
                if arg < 0.0 and (self.B == 0.0 or ln_x >= log(self.B) - 1e-9):
                    arg = 0.0  # x >= B in exact arithmetic
                le = ln_E(self._s_right, arg)
                if le > -inf:
                    parts.append(_LN2 + self.ln_g_right + le)
            if not parts:
                return -inf
            return logsumexp(parts)
        if self.a > 0.0:
            t_arg = expm1(self.c * ln_x) - self._a_pow_m1
        else:
            t_arg = exp(self.c * ln_x)
        if t_arg < 0.0 and (self.a == 0.0 or ln_x >= log(self.a) - 1e-9):
            t_arg = 0.0  # x >= a in exact arithmetic
        le = ln_E(self._s_pow, t_arg)
        if le == -inf:
            return -inf
        return _LN2 + log(self.c) + self._ln_g + (self.c - 1.0) * ln_x + le
