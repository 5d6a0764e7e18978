"""First passage of a stable subordinator across a non-increasing barrier.

The passage time, the undershoot, and the jump across the barrier are drawn
exactly in one pass: a scale variable z comes from the angle-exponential
representation, the passage time follows by inverting B(t) = t^(-1/alpha) b(t),
a Bernoulli step decides creeping versus jumping, and on a jump the
undershoot fraction x = (1+y)^(-delta/alpha) and the jump size
b(t)(1-x) V^(-1/alpha) are assembled from a jump-kernel draw.

Everything is carried in log-domain: for alpha near 1 the scale z can be
far below the smallest positive double, and the undershoot fraction can be
within 1e-300 of either endpoint of (0,1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import exp, inf, log, nan

from .context import AlphaContext
from .chi import ChiSampler, select_algorithm
from .special import PI, ln_H, log1mexp, softplus

__all__ = [
    "Barrier",
    "FirstPassage",
    "barrier_constant",
    "barrier_powcap",
    "barrier_from_json",
    "draw_z",
    "sample_first_passage",
]


@dataclass(frozen=True, slots=True)
class Barrier:
    """A non-increasing barrier bound to one alpha.

    ``b`` and ``b_prime`` are the barrier and its derivative; ``b_inv``
    inverts B(t) = t^(-1/alpha) b(t) (strictly decreasing, so the inverse
    is unique).  The ln_* closures are the log-domain forms the sampler
    actually uses; the plain ones exist for inspection and round-trip
    checks.  ``describe`` round-trips to the JSON spec.
    """

    b: callable
    b_prime: callable
    b_inv: callable
    ln_b: callable
    ln_b_inv: callable
    ln_neg_slope: callable
    describe: dict


def barrier_constant(ctx: AlphaContext, b0: float) -> Barrier:
    """Constant barrier: b(t) = b0, B_inv(s) = (b0/s)^alpha, never creeps."""
    if not b0 > 0.0:
        raise ValueError(f"need b0 > 0, got {b0}")
    alpha = ctx.alpha
    ln_b0 = log(b0)
    return Barrier(
        b=lambda t: b0,
        b_prime=lambda t: 0.0,
        b_inv=lambda s: (b0 / s) ** alpha,
        ln_b=lambda ln_t: ln_b0,
        ln_b_inv=lambda ln_s: alpha * (ln_b0 - ln_s),
        ln_neg_slope=lambda ln_t: -inf,
        describe={"family": "constant", "b0": b0},
    )


def barrier_powcap(ctx: AlphaContext, c: float) -> Barrier:
    """Decreasing barrier b(t) = (c - t^(1/alpha))+, absorbed at t = c^alpha.

    B_inv(s) = [c/(s+1)]^alpha and -b'(t) = t^(delta/alpha)/alpha on the
    support, so the creep probability given t reduces to t^(1/alpha)/c.
    """
    if not c > 0.0:
        raise ValueError(f"need c > 0, got {c}")
    alpha, delta = ctx.alpha, ctx.delta
    ln_c = log(c)
    ln_alpha = ctx.ln_alpha

    def b(t):
        v = c - t ** (1.0 / alpha)
        return v if v > 0.0 else 0.0

    def b_prime(t):
        if t ** (1.0 / alpha) >= c:
            return 0.0
        return -(t ** (delta / alpha)) / alpha

    def ln_b(ln_t):
        # ln(c - t^(1/alpha)) = ln c + ln(1 - e^(ln_t/alpha - ln_c))
        arg = ln_t / alpha - ln_c
        if arg >= 0.0:
            raise ValueError("barrier evaluated at or past its zero")
        return ln_c + log1mexp(arg)

    return Barrier(
        b=b,
        b_prime=b_prime,
        b_inv=lambda s: (c / (s + 1.0)) ** alpha,
        ln_b=ln_b,
        ln_b_inv=lambda ln_s: alpha * (ln_c - softplus(ln_s)),
        ln_neg_slope=lambda ln_t: (delta / alpha) * ln_t - ln_alpha,
        describe={"family": "powcap", "c": c},
    )


_FAMILIES = {
    "constant": (barrier_constant, "b0"),
    "powcap": (barrier_powcap, "c"),
}


def barrier_from_json(ctx: AlphaContext, spec) -> Barrier:
    """Build a barrier from {"family": name, <param>: value} (dict or JSON)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError(f"barrier spec needs a 'family' key, got {spec!r}")
    family = spec["family"]
    if family not in _FAMILIES:
        raise ValueError(f"unknown barrier family {family!r}")
    ctor, param = _FAMILIES[family]
    if param not in spec:
        raise ValueError(f"barrier family {family!r} needs parameter {param!r}")
    return ctor(ctx, float(spec[param]))


@dataclass(frozen=True, slots=True)
class FirstPassage:
    """One passage draw: time, undershoot fraction, jump size.

    ``z`` and ``tau_time`` are plain values (z may underflow to 0.0 for
    alpha extremely close to 1 — ``ln_z`` is always exact).  ``ln_x`` and
    ``ln_1m_x`` are the stable pair for the undershoot fraction
    x = pre-passage level / barrier level; on a creep x = 1 by convention
    and ``ln_jump`` is -inf.  ``theta`` and ``ln_y`` are diagnostics from
    the jump-kernel draw (nan on creep), ``alg`` names the sampler used.
    """

    z: float
    tau_time: float
    creep: bool
    ln_x: float
    ln_1m_x: float
    ln_jump: float
    theta: float
    ln_z: float
    ln_t: float
    ln_y: float
    alg: str


def draw_z(rng, ctx: AlphaContext) -> tuple[float, float]:
    """The scale variable: ln z = ln xi - ln H(Theta), Theta uniform on
    (0, pi), xi standard exponential.  Returns (ln_z, theta_used)."""
    theta = PI * rng.u()
    xi = rng.exp1()
    return log(xi) - ln_H(ctx, theta), theta


def _undershoot_pair(ctx: AlphaContext, ln_y: float) -> tuple[float, float]:
    """(ln_x, ln_1m_x) for x = (1+y)^(-delta/alpha) from ln_y, stable on
    both ends: y huge (x near 0) and ln_y hugely negative (x near 1)."""
    v = softplus(ln_y)  # ln(1+y)
    w = (ctx.delta / ctx.alpha) * v
    ln_x = -w
    if w > 1e-8:
        return ln_x, log1mexp(-w)
    # 1 - e^(-w) = w(1 - w/2 + ...); take ln w from logs so underflow of
    # w itself (possible at delta ~ 1e-12) cannot zero the result
    ln_v = log(v) if v > 0.0 else ln_y
    ln_w = ctx.ln_delta - ctx.ln_alpha + ln_v
    return ln_x, ln_w - 0.5 * w


def sample_first_passage(
    rng,
    ctx: AlphaContext,
    barrier: Barrier,
    *,
    method: str = "auto",
    audit: bool = False,
) -> FirstPassage:
    """One exact draw of (passage time, undershoot, jump).

    Draw order is fixed (scale angle, scale exponential, creep uniform,
    then the jump-kernel draw and its V uniform), so results are
    reproducible for a given seed regardless of ``method``'s value only
    when the method resolves to the same sampler.
    """
    alpha, delta = ctx.alpha, ctx.delta
    ln_z, _ = draw_z(rng, ctx)
    ln_s = ctx.ln_alpha + (delta / alpha) * (ctx.ln_delta - ln_z)
    ln_t = barrier.ln_b_inv(ln_s)
    t = exp(ln_t)
    ln_q = barrier.ln_neg_slope(ln_t)
    if ln_q > -inf:
        # creep with probability q/(q+d), d = b(t)/(alpha t)
        ln_d = barrier.ln_b(ln_t) - ctx.ln_alpha - ln_t
        p_creep = 1.0 / (1.0 + exp(ln_d - ln_q))
        if rng.u() < p_creep:
            return FirstPassage(
                z=exp(ln_z) if ln_z > -745.0 else 0.0,
                tau_time=t,
                creep=True,
                ln_x=0.0,
                ln_1m_x=-inf,
                ln_jump=-inf,
                theta=nan,
                ln_z=ln_z,
                ln_t=ln_t,
                ln_y=nan,
                alg="creep",
            )
    sampler = ChiSampler(ctx, ln_z, method=method, audit=audit)
    s = sampler.draw(rng)
    ln_x, ln_1m_x = _undershoot_pair(ctx, s.ln_y)
    ln_jump = barrier.ln_b(ln_t) + ln_1m_x - log(rng.u()) / alpha
    return FirstPassage(
        z=exp(ln_z) if ln_z > -745.0 else 0.0,
        tau_time=t,
        creep=False,
        ln_x=ln_x,
        ln_1m_x=ln_1m_x,
        ln_jump=ln_jump,
        theta=s.theta,
        ln_z=ln_z,
        ln_t=ln_t,
        ln_y=s.ln_y,
        alg=sampler.method,
    )
