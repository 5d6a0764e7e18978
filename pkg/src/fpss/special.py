"""Numerically careful special functions for the samplers.

Everything here is scalar double precision.  The functions fall in three
groups: generic log-domain helpers (softplus and the expm1 family), the
ln H family for a fixed alpha (series below 2.2, closed forms above, all
stable as alpha -> 1), and the tail factorizations Xi and XI of H near pi
that the interval-grid sampler needs where H itself overflows.
"""

from __future__ import annotations

import math
from math import exp, expm1, inf, log, log1p

from fpss import _kernels
from fpss.context import AlphaContext

__all__ = [
    "softplus",
    "ln_expm1",
    "ln_expm1_minus_x",
    "log1mexp",
    "expm1_ratio",
    "one_minus_pow",
    "logsumexp",
    "sinc",
    "ln_sinc",
    "g_cot",
    "ln_H",
    "H",
    "dln_H",
    "ln_H1",
    "V1",
    "f_slope",
    "ln_Xi",
    "ln_XI",
    "ln_XI_at_pi",
    "ln_tail_factor",
    "ln_tail_factor_diff",
    "dln_H_tail_lower",
    "ln_psi",
    "ln_Q",
]

PI = math.pi

# public derivative bound must never exceed the true slope; the raw formula
# is two-sided accurate to ~1e-9 relative, so shrinking by 5e-9 makes it
# one-sided while staying within 1e-8 of exact
_DLNH_DEFLATE = 1.0 - 5e-9


# ---------------------------------------------------------------------------
# generic log-domain helpers
# ---------------------------------------------------------------------------


def softplus(x: float) -> float:
    """ln(1 + e^x) without overflow."""
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


def ln_expm1(x: float) -> float:
    """ln(e^x - 1) for x > 0 (-inf at 0)."""
    if x <= 0.0:
        if x == 0.0:
            return -inf
        raise ValueError(f"ln_expm1 needs x >= 0, got {x}")
    if x > 0.693:
        # e^-x < 1/2 so log1p is exact; above ~745 it underflows to ln(e^x)=x
        return x + log1p(-exp(-x))
    return log(expm1(x))


def ln_expm1_minus_x(x: float) -> float:
    """ln(e^x - 1 - x) for x >= 0, stable through the x^2/2 regime."""
    if x < 0.0:
        raise ValueError(f"ln_expm1_minus_x needs x >= 0, got {x}")
    if x == 0.0:
        return -inf
    if x < 0.5:
        # e^x - 1 - x = (x^2/2) sum_j 2 x^j / (j+2)!
        acc = 0.0
        t = 1.0
        j = 0
        while t > 1e-18 * acc or j == 0:
            acc += t
            t *= x / (j + 3)
            j += 1
        return log(x * x / 2.0) + log(acc)
    if x <= 700.0:
        return log(expm1(x) - x)
    return x + log1p(-(1.0 + x) * exp(-x))


def log1mexp(x: float) -> float:
    """ln(1 - e^x) for x < 0 (-inf at 0)."""
    if x >= 0.0:
        if x == 0.0:
            return -inf
        raise ValueError(f"log1mexp needs x <= 0, got {x}")
    if x > -0.693:
        return log(-expm1(x))
    return log1p(-exp(x))


def expm1_ratio(t: float) -> float:
    """t / (e^t - 1), continuously extended to 1 at t = 0."""
    if t == 0.0:
        return 1.0
    if t > 709.0:
        return t * exp(-t)
    return t / expm1(t)


def one_minus_pow(x: float, p: float) -> float:
    """1 - x^p for x > 0, exact where x^p is within rounding of 1."""
    if x < 0.0:
        raise ValueError(f"one_minus_pow needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0
    return -expm1(p * log(x))


def logsumexp(values) -> float:
    """ln(sum of e^v) over a small iterable, tolerant of -inf entries."""
    m = max(values)
    if m == -inf:
        return -inf
    if m == inf:
        return inf
    return m + log(sum(exp(v - m) for v in values))


# ---------------------------------------------------------------------------
# the ln H family
# ---------------------------------------------------------------------------


def sinc(x: float) -> float:
    """sin(x)/x with sinc(0) = 1."""
    if x == 0.0:
        return 1.0
    return math.sin(x) / x


def ln_sinc(x: float) -> float:
    """ln(sin(x)/x) for |x| <= pi."""
    return _kernels.ln_sinc(x)


def g_cot(x: float) -> float:
    """cot(x) - 1/x."""
    return _kernels.g_cot(x)


def ln_H(ctx: AlphaContext, theta: float) -> float:
    """ln H_alpha(theta) for theta in [0, pi); +inf as theta -> pi."""
    if not 0.0 <= theta < PI:
        if theta == PI:
            return inf
        raise ValueError(f"theta must be in [0, pi], got {theta}")
    return _kernels.ln_h(theta, ctx.alpha, ctx.delta, ctx.coef)


def H(ctx: AlphaContext, theta: float) -> float:
    """H_alpha(theta) itself; overflows to +inf close to pi when delta is tiny."""
    v = ln_H(ctx, theta)
    if v > 709.0:
        return inf
    return exp(v)


def dln_H(ctx: AlphaContext, theta: float) -> float:
    """A tight lower bound on (ln H_alpha)'(theta), within 1e-8 relative.

    One-sidedness matters: exponential tail envelopes built from this slope
    must dominate the target, so the returned value never overestimates.
    """
    if not 0.0 < theta < PI:
        raise ValueError(f"theta must be in (0, pi), got {theta}")
    return _kernels.dlnh_raw(theta, ctx.alpha, ctx.delta, ctx.dcoef) * _DLNH_DEFLATE


def ln_H1(theta: float) -> float:
    """ln H_1(theta), the alpha -> 1 limit (= theta^2/2 + V1)."""
    return _kernels.lnh1(theta)


def V1(theta: float) -> float:
    """V_1(theta) = ln H_1(theta) - theta^2/2; nonnegative and increasing."""
    return _kernels.v1(theta)


def f_slope(theta: float) -> float:
    """theta * (ln H_1)'(theta); increasing, ~theta^2 small, ~unbounded at pi."""
    return _kernels.f_slope(theta)


# ---------------------------------------------------------------------------
# tail factorizations of H near pi
# ---------------------------------------------------------------------------


def ln_Xi(ctx: AlphaContext, theta: float, u: float | None = None) -> float:
    """ln Xi(theta) where H = Xi * theta/(pi-theta) * (1+delta pi/(alpha(pi-theta)))^(alpha/delta).

    Xi stays bounded as theta -> pi (worth ~sinc(delta pi)^(1/delta)), which is
    what makes it usable where ln H is astronomically large.  Callers that
    track pi - theta exactly should pass it as ``u``; recomputing it from
    theta loses everything once u drops near one ulp of pi.
    """
    if u is None:
        if not 0.0 < theta <= PI:
            raise ValueError(f"theta must be in (0, pi], got {theta}")
        u = PI - theta
    elif u <= 0.0:
        raise ValueError(f"need u = pi - theta > 0, got {u}")
    alpha, delta = ctx.alpha, ctx.delta
    dth = delta * (PI - u)
    # pi - alpha*theta = u + delta*theta exactly, and stays positive
    t = _kernels.lnsinc_diff(u, u + dth, alpha / delta, alpha * (PI - u))
    return _kernels.ln_sinc(dth) - _kernels.ln_sinc(u) + t


def ln_XI(ctx: AlphaContext, theta: float, u: float | None = None) -> float:
    """ln XI(theta) = ln H - (1/delta) ln(1 + delta pi/(alpha(pi-theta))).

    Equal to ln Xi + ln(alpha theta) - ln(pi - alpha theta); finite on (0, pi]
    and increasing near pi, so interval weights can use it directly.  Pass
    ``u`` = pi - theta when it is known exactly (see ln_Xi).
    """
    alpha, delta = ctx.alpha, ctx.delta
    if u is None:
        u = PI - theta
    theta = PI - u
    # pi - alpha*theta = alpha*u + delta*pi exactly
    return ln_Xi(ctx, theta, u) + log(theta) + ctx.ln_alpha - log(alpha * u + delta * PI)


def ln_XI_at_pi(ctx: AlphaContext) -> float:
    """ln XI(pi) = ln(alpha/delta) + (1/delta) ln sinc(delta pi)."""
    return (
        ctx.ln_alpha
        - ctx.ln_delta
        + _kernels.ln_sinc(ctx.delta * PI) / ctx.delta
    )


def ln_tail_factor(ctx: AlphaContext, u: float) -> float:
    """(1/delta) ln(1 + delta pi/(alpha u)) for u = pi - theta > 0.

    This is ln H - ln XI; it blows up like |ln u|/delta near pi, which is why
    it is kept separate from the bounded XI part.
    """
    if u <= 0.0:
        return inf
    return log1p(ctx.delta * PI / (ctx.alpha * u)) / ctx.delta


def ln_tail_factor_diff(ctx: AlphaContext, u_from: float, dx: float) -> float:
    """ln_tail_factor at u_from - dx minus at u_from, without cancellation.

    Uses the single-log form
        (1/delta) ln(1 + delta pi dx / (u_to (alpha u_from + delta pi)))
    so the result stays accurate even when both tail factors are ~1/delta
    large and the difference is O(1).  Requires 0 <= dx < u_from; returns
    +inf when u_from - dx <= 0 (theta past pi).
    """
    u_to = u_from - dx
    if u_to <= 0.0:
        return inf
    if dx == 0.0:
        return 0.0
    y = ctx.delta * PI * dx / (u_to * (ctx.alpha * u_from + ctx.delta * PI))
    return log1p(y) / ctx.delta


def dln_H_tail_lower(ctx: AlphaContext, u: float) -> float:
    """Lower bound on (ln H)'(theta) at theta = pi - u, valid for theta >= theta_c.

    (ln H)' splits into (ln Xi)' plus pi^2/(theta (pi-theta)(pi-alpha theta)),
    and the Xi part is nonnegative once theta is past the monotonicity
    threshold (pi/3)(1 + 1/alpha), so dropping it leaves a lower bound.  The
    remaining term is computed from u exactly and shrunk by a few ulps.
    """
    theta = PI - u
    if theta <= (1.0 + 1.0 / ctx.alpha) * PI / 3.0:
        raise ValueError("tail slope bound needs theta past the Xi monotone point")
    return (1.0 - 1e-12) * PI * PI / (theta * u * (ctx.alpha * u + ctx.delta * PI))


# ---------------------------------------------------------------------------
# the psi majorant and the Q density kernel
# ---------------------------------------------------------------------------


def _ln_ell_of_inv(ln_tau: float) -> float:
    """ln of ell(1/tau) = ln(log1p(e^(-ln tau))), stable at both ends."""
    if ln_tau >= 35.0:
        return -ln_tau
    if ln_tau <= -35.0:
        return log(-ln_tau)
    return log(log1p(exp(-ln_tau)))


def ln_psi(ctx: AlphaContext, ln_tau: float) -> float:
    """ln psi(tau) where psi majorizes the angular density normalizer.

    psi(tau) = kappa1 tau ell(1/tau)^delta + kappa2 ell(1/tau)^(-alpha) + 1,
    needing alpha >= 1/2 for kappa1 >= 0.
    """
    if ctx.alpha < 0.5:
        raise ValueError("psi needs alpha >= 1/2")
    ln_ell = _ln_ell_of_inv(ln_tau)
    # kappa1 hits exactly 0 at alpha = 1/2; drop the term instead of log(0)
    t1 = -inf if ctx.kappa1 == 0.0 else log(ctx.kappa1) + ln_tau + ctx.delta * ln_ell
    return logsumexp((t1, log(ctx.kappa2) - ctx.alpha * ln_ell, 0.0))


def ln_Q(ctx: AlphaContext, ln_z: float, theta: float) -> float:
    """ln of Q(theta) = psi(z H(theta)) e^(-z H(theta)); -inf when it underflows."""
    ln_tau = ln_z + ln_H(ctx, theta)
    if ln_tau > 709.0:
        return -inf
    return ln_psi(ctx, ln_tau) - exp(ln_tau)
