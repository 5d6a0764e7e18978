"""Unified interface to the three jump-kernel samplers.

The bivariate kernel density on (0, inf) x [0, pi) is proportional to

    [1 - (y+1)^(-delta/alpha)]^(-alpha) H(theta) exp(-z H(theta) (y+1))

and three exact rejection samplers cover it: "A" (Gaussian angle envelope,
efficient for z around 1 or larger), "B" (flat angle envelope, uniformly
fine for moderate alpha at any z), and "P" (the piecewise-grid sampler of
chi_p, built for alpha close to 1 with z at or below 1).  ``ChiSampler``
wraps all three behind one draw interface, and ``select_algorithm``
implements the published switching rule.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import inf, log

from . import _kernels
from .context import AlphaContext
from .chi_p import ChiPSampler
from .grid import AngleGrid, QGridConfig
from .special import PI, ln_H

__all__ = ["ChiSample", "ChiSampler", "select_algorithm", "get_angle_grid"]

# B handles z down to delta * 1e-30 before the grid sampler pays off
_LN_SWITCH_FACTOR = -30.0 * log(10.0)


@dataclass(frozen=True, slots=True)
class ChiSample:
    """One accepted draw.

    ln_y is the log of the radial part; theta the angle; u = pi - theta
    carried exactly (meaningful when theta is within rounding of pi);
    ln_tau = ln(z H(theta)) evaluated in whichever form is accurate for
    the regime that produced the draw.
    """

    ln_y: float
    theta: float
    u: float
    ln_tau: float


def select_algorithm(ctx: AlphaContext, ln_z: float) -> str:
    """Published switching rule: A for z >= 1, then B unless both alpha
    is beyond 0.9 and z is below delta * 1e-30, where P takes over."""
    if ln_z >= 0.0:
        return "A"
    if ctx.alpha <= 0.9:
        return "B"
    if ln_z >= ctx.ln_delta + _LN_SWITCH_FACTOR:
        return "B"
    return "P"


_GRID_LOCK = threading.Lock()
_GRID_CACHE: dict[tuple, AngleGrid] = {}


def get_angle_grid(ctx: AlphaContext, config: QGridConfig | None = None) -> AngleGrid:
    """Per-alpha cache of the angle ladders (build-once, thread-safe).

    The ladders depend only on (alpha, config); the z-specific attachment
    is rebuilt cheaply inside ChiPSampler for every new z.
    """
    cfg = config if config is not None else QGridConfig()
    key = (ctx.alpha, cfg.gap, cfg.alpha_floor, cfg.theta_start)
    grid = _GRID_CACHE.get(key)
    if grid is not None:
        return grid
    with _GRID_LOCK:
        grid = _GRID_CACHE.get(key)
        if grid is None:
            grid = AngleGrid(ctx, cfg)
            _GRID_CACHE[key] = grid
    return grid


class ChiSampler:
    """Draws ChiSample values for one (alpha, z) pair.

    ``method`` is "A", "B", "P", or "auto" (the switching rule).  With
    ``audit=True`` the banded acceptance shortcuts are disabled so every
    proposal evaluates its ratio exactly, and the largest observed
    ln(target/envelope) is tracked in ``stats`` — it must stay at or
    below zero up to rounding for the envelopes to be honest.
    """

    def __init__(
        self,
        ctx: AlphaContext,
        ln_z: float,
        *,
        method: str = "auto",
        audit: bool = False,
        config: QGridConfig | None = None,
    ):
        if method not in ("auto", "A", "B", "P"):
            raise ValueError(f"unknown method {method!r}")
        self.ctx = ctx
        self.ln_z = ln_z
        self.audit = audit
        self.method = select_algorithm(ctx, ln_z) if method == "auto" else method
        self._p = None
        self._lo = self._hi = None
        if self.method == "P":
            self._p = ChiPSampler(get_angle_grid(ctx, config), ln_z, audit=audit)
        elif not audit:
            self._lo, self._hi = ctx.bounds(self.method, ln_z)
        self.rounds = 0
        self.accepts = 0
        self.inner_proposals = 0
        self.max_ln_ratio = -inf

    def draw(self, rng) -> ChiSample:
        """One accepted draw from the normalized kernel."""
        ctx = self.ctx
        if self.method == "P":
            ln_y, theta, u, ln_tau = self._p.draw(rng)
            self.accepts += 1
            return ChiSample(ln_y, theta, u, ln_tau)
        if self.method == "A":
            r = _kernels.chi_A(
                rng, ctx.alpha, ctx.delta, self.ln_z,
                ctx.coef, ctx.lgamma_delta, self._lo, self._hi,
            )
        else:
            r = _kernels.chi_B(
                rng, ctx.alpha, ctx.delta, self.ln_z,
                ctx.coef, ctx.lgamma_delta, self._lo, self._hi,
            )
        ln_y, theta, n_outer, n_inner, max_d_inner, max_d_outer = r
        self.rounds += n_outer
        self.inner_proposals += n_inner
        self.accepts += 1
        d = max(max_d_inner, max_d_outer)
        if d > self.max_ln_ratio:
            self.max_ln_ratio = d
        return ChiSample(ln_y, theta, PI - theta, self.ln_z + ln_H(ctx, theta))

    @property
    def stats(self) -> dict:
        """Proposal accounting, harmonized across the three methods."""
        if self.method == "P":
            s = self._p.stats
            return {
                "method": "P",
                "accepts": s["accepts"],
                "rounds": s["rounds"],
                "inner_proposals": s["angle_proposals"],
                "max_ln_ratio": max(
                    s["max_angle_ln_ratio"], s["max_joint_ln_ratio"]
                ),
                "ratio_violations": s["ratio_violations"],
            }
        viol = 1 if self.max_ln_ratio > log(1.0 + 1e-10) else 0
        return {
            "method": self.method,
            "accepts": self.accepts,
            "rounds": self.rounds,
            "inner_proposals": self.inner_proposals,
            "max_ln_ratio": self.max_ln_ratio,
            "ratio_violations": viol,
        }
