"""Piecewise envelope construction for the steep-angle rejection sampler.

The angular density handled here is proportional to
``psi(z H(theta)) exp(-z H(theta))`` on [0, pi).  For z near 1 the mass
sits at small angles; as z shrinks it migrates toward pi, and once
delta = 1 - alpha is tiny the transition happens inside a band of width
O(delta) next to pi.  No single closed-form envelope covers that whole
family with bounded rejection cost, so [0, pi) is split into three zones:

* a flat zone [0, theta_start): cut at angles where H grows by at most a
  factor 1 + gap, one constant envelope per cell;
* a mid zone [theta_start, split): cut the same way but tracked in the
  variable u = pi - theta, each cell carrying a three-part envelope in the
  transformed coordinate t = log(1 + 1/(z J)), where J is the cellwise
  staircase minorant of H;
* a tail zone [split, pi), past the angle where z H crosses 1, covered by
  one exponential-decay envelope.

Cell boundaries depend only on alpha and are built once (AngleGrid);
everything that depends on z is attached per value (ZGrid), so a single
AngleGrid serves any number of z draws.  Adjacent cell values of H are
certified to differ by a ratio in [1, 1 + gap], which is what keeps the
expected proposal count bounded no matter how small delta gets.

Floating-point policy: u = pi - theta is carried exactly and never
recomputed from theta near pi, and every envelope constant that involves
ln z (which can reach 1e11 in magnitude at delta = 1e-12) is widened by a
conditioning margin so that domination survives roundoff.  The margins
inflate envelope mass by under one part in a thousand at the extremes.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from math import exp, expm1, inf, isfinite, log, log1p, sin

from . import _kernels
from .context import AlphaContext
from .envelopes import GStar, PhiStar
from .special import (
    PI,
    dln_H,
    dln_H_tail_lower,
    ln_H,
    ln_psi,
    ln_tail_factor,
    ln_XI,
    log1mexp,
    logsumexp,
    softplus,
)

__all__ = ["QGridConfig", "AngleGrid", "ZGrid"]

_EPS = 2.220446049250313e-16
_LN2 = 0.6931471805599453

# hard floor on u at the tail split: below this the angle is within one
# subnormal-ish sliver of pi and double precision cannot represent the
# geometry any more, so the construction refuses rather than degrades
_U_SPLIT_MIN = 1e-290


@dataclass(frozen=True)
class QGridConfig:
    """Tuning knobs for the angle ladders.

    gap controls how much H may grow across one cell (envelope looseness),
    alpha_floor is the smallest alpha for which the mid-zone step rule is
    certified, and theta_start is where the flat zone hands over to the
    mid zone.  The defaults are the tested operating point; changing them
    trades cell count against per-cell acceptance.
    """

    gap: float = 0.5
    alpha_floor: float = 2.0 / 3.0
    theta_start: float = 6.0 * PI / 7.0

    def __post_init__(self) -> None:
        if not 0.0 < self.gap < 1.0:
            raise ValueError(f"gap must be in (0, 1), got {self.gap}")
        if not 0.5 < self.alpha_floor < 1.0:
            raise ValueError(
                f"alpha_floor must be in (1/2, 1), got {self.alpha_floor}"
            )
        lo = PI / 3.0 + PI / (3.0 * self.alpha_floor)
        if not lo < self.theta_start < PI:
            raise ValueError(
                f"theta_start must be in ({lo:.6f}, pi) for this alpha_floor, "
                f"got {self.theta_start}"
            )

    @property
    def step_cap(self) -> float:
        """Largest plain theta-increment the mid ladder may take.

        Bounded by the curvature of ln sinc at pi - alpha_floor*theta_start
        so that one capped step cannot raise the cell ratio past 1 + gap.
        """
        x = PI - self.alpha_floor * self.theta_start
        curv = PI * (1.0 / (sin(x) * sin(x)) - 1.0 / (x * x))
        return log((1.0 + self.gap) / (1.0 + 0.5 * self.gap)) / curv


class AngleGrid:
    """Angle ladders for one alpha: cell boundaries plus cached H values.

    Attributes
    ----------
    t_nodes, ln_h_flat:
        flat-zone boundaries 0 = t_0 < ... < t_M = theta_start and
        ln H at each.
    u_nodes, ln_xi_nodes, ln_tail_nodes, ln_h_steep:
        mid-zone boundaries expressed as u = pi - theta (decreasing), with
        ln H split into its bounded part (ln XI) and its blowup part
        (ln_tail_factor) so downstream arithmetic can difference them
        without cancellation.  Empty when alpha < alpha_floor; the mid
        zone is then unavailable and only z with a flat-zone crossing is
        accepted.
    """

    def __init__(self, ctx: AlphaContext, config: QGridConfig | None = None):
        self.ctx = ctx
        self.config = config or QGridConfig()
        cfg = self.config

        step_ln = log1p(cfg.gap)
        rev = [cfg.theta_start]
        t = cfg.theta_start
        for _ in range(100000):
            f = _kernels.f_slope(t)
            t = t * (1.0 - step_ln / f) if f > step_ln else 0.0
            if t <= 0.0:
                rev.append(0.0)
                break
            rev.append(t)
        else:  # pragma: no cover - the slope is ~theta^2, this cannot run long
            raise RuntimeError("flat ladder failed to terminate")
        self.t_nodes: list[float] = rev[::-1]
        self.ln_h_flat: list[float] = [ln_H(ctx, t) for t in self.t_nodes]

        us: list[float] = []
        if ctx.alpha >= cfg.alpha_floor:
            h = 0.5 * cfg.gap
            eps_step = cfg.step_cap
            u = PI - cfg.theta_start
            for _ in range(200000):
                us.append(u)
                theta = PI - u
                u1 = PI * (u - h * ctx.delta * theta) / (PI + ctx.alpha * h * theta)
                u = max(u1, u - eps_step)
                if u <= 0.0:
                    break
            else:  # pragma: no cover - terminates once u < gap*delta*pi/2
                raise RuntimeError("mid ladder failed to terminate")
        self.u_nodes: list[float] = us
        self.ln_xi_nodes: list[float] = [ln_XI(ctx, PI - u, u) for u in us]
        self.ln_tail_nodes: list[float] = [ln_tail_factor(ctx, u) for u in us]
        self.ln_h_steep: list[float] = [
            a + b for a, b in zip(self.ln_xi_nodes, self.ln_tail_nodes)
        ]
        if us:
            # the two ladders compute ln H(theta_start) by different routes;
            # they must agree or one of them is broken
            drift = abs(self.ln_h_flat[-1] - self.ln_h_steep[0])
            assert drift < 1e-7, f"ladder junction mismatch: {drift}"

    @property
    def has_steep(self) -> bool:
        return bool(self.u_nodes)

    @property
    def interval_count(self) -> int:
        """Total number of ladder cells (flat plus mid)."""
        return (len(self.t_nodes) - 1) + len(self.u_nodes)


@dataclass(slots=True)
class FlatPiece:
    """Constant envelope ln_env over the angle interval [lo, hi)."""

    lo: float
    hi: float
    ln_env: float


@dataclass(slots=True)
class MidPiece:
    """Envelope for one mid-zone cell in the coordinate t = log(1 + 1/(zJ)).

    wide is True when the cell sits at least delta*pi/alpha away from pi
    (the two regimes take different envelope shapes).  g1/g2 are the
    gamma-kernel sub-envelopes; the third sub-branch is a pure exponential
    handled inline.  u_lo/u_hi bound the cell in u = pi - theta, with
    u_hi the cell's left angle edge (larger u) and u_lo its right edge.
    """

    n: int
    wide: bool
    c: float
    d: float
    a_end: float
    ln_pi: float
    u_hi: float
    u_lo: float
    ln_xi_n: float
    g1: GStar
    g2: GStar | PhiStar
    ln_m1: float
    ln_m2: float
    ln_m3: float


@dataclass(slots=True)
class TailPiece:
    """Exponential envelope h*(1 ^ e^(1-r x)) in x = theta - split."""

    ln_h: float
    r: float


class ZGrid:
    """Everything z-specific: the split angle and the per-piece envelopes.

    Raises ValueError when the requested (alpha, z) pair is outside what
    the construction certifies: z > 1, alpha < 1/2, a mid-zone crossing
    with alpha below the config floor, or z so small that the split angle
    is not representable in double precision.
    """

    def __init__(self, grid: AngleGrid, ln_z: float):
        if not (isfinite(ln_z) and ln_z <= 0.0):
            raise ValueError(f"need ln_z <= 0 and finite, got {ln_z}")
        ctx = grid.ctx
        cfg = grid.config
        alpha, delta = ctx.alpha, ctx.delta
        if alpha < 0.5:
            raise ValueError("the steep-angle sampler needs alpha >= 1/2")
        self.grid = grid
        self.ln_z = ln_z

        tn = grid.t_nodes
        lht = grid.ln_h_flat
        if -ln_z <= lht[-1]:
            # crossing inside the flat zone
            self.case = 1
            i = bisect.bisect_left(lht, -ln_z)
            if i == 0:
                # z = 1 crosses at theta = 0 where the tail slope vanishes;
                # start the tail one cell in, the flat envelope still covers
                # [0, t_1) and z H(t_1) <= 1 + gap keeps the tail sharp
                i = 1
            u_split = PI - tn[i]
            ln_tau = ln_z + lht[i]
            eta = 32.0 * _EPS * (1.0 + abs(ln_z) + abs(lht[i]))
            n_flat = i
            n_mid = 0
        else:
            self.case = 2
            if not grid.has_steep:
                raise ValueError(
                    f"z H(theta_start) < 1 puts the crossing in the mid zone, "
                    f"which needs alpha >= {cfg.alpha_floor:.6f} "
                    f"(got alpha = {alpha})"
                )
            lhs = grid.ln_h_steep
            i = bisect.bisect_right(lhs, -ln_z) - 1
            assert i >= 0, "mid ladder must start below the crossing"
            s_star = -ln_z - grid.ln_xi_nodes[i]
            ds = delta * s_star
            scale = delta * PI / alpha
            u_star = scale * exp(-ds) if ds > 350.0 else scale / expm1(ds)
            if u_star < _U_SPLIT_MIN:
                raise ValueError(
                    "z is below the angle-resolution floor for this alpha: "
                    "the split angle would be within 1e-290 of pi"
                )
            u_next = grid.u_nodes[i + 1] if i + 1 < len(grid.u_nodes) else 0.0
            if u_star < u_next:
                # the staircase crosses 1/z at the next node, not inside the
                # cell; both the cell ratio and the crossing pin ln_tau into
                # [0, log1p(gap)], so clamp the ill-conditioned part there
                u_split = u_next
                cell = grid.ln_xi_nodes[i + 1] - grid.ln_xi_nodes[i]
                r = s_star - grid.ln_tail_nodes[i + 1]
                ln_tau = cell - min(max(r, 0.0), cell)
            else:
                u_star = min(u_star, grid.u_nodes[i])
                u_split = u_star
                ln_tau = ln_XI(ctx, PI - u_star, u_star) - grid.ln_xi_nodes[i]
                ln_tau = min(max(ln_tau, 0.0), log1p(cfg.gap))
            eta = 32.0 * _EPS * (
                1.0
                + abs(ln_z)
                + abs(grid.ln_xi_nodes[i])
                + abs(grid.ln_tail_nodes[i])
            )
            n_flat = len(tn) - 1
            n_mid = i + 1  # cells 0..i; any cell starting at the split is skipped

        self.u_split = u_split
        self.theta_split = PI - u_split
        self.ln_tau_split = ln_tau
        self.eta = eta
        self.ln_xi_split = ln_XI(ctx, self.theta_split, u_split)
        self.ln_ratio_tol = 1e-9 + 64.0 * _EPS * (1.0 + abs(ln_z))

        # tail envelope: height from the largest psi majorant consistent
        # with the tau uncertainty, decay rate from the smallest
        if u_split >= 1e-5:
            rho = dln_H(ctx, self.theta_split)
        else:
            rho = dln_H_tail_lower(ctx, u_split)
        l_lo = max(0.0, ln_tau - eta)
        l_hi = ln_tau + eta
        ln_h_tail = log(ctx.kappa3) + alpha * l_lo - exp(l_lo)
        g_lo = (1.0 + alpha) * l_lo - exp(l_lo)
        g_hi = (1.0 + alpha) * l_hi - exp(l_hi)
        r_tail = rho * exp(min(g_lo, g_hi))

        pieces: list[FlatPiece | MidPiece | TailPiece] = []
        ln_mass: list[float] = []

        for k in range(n_flat):
            lo, hi = tn[k], tn[k + 1]
            bump = 64.0 * _EPS * (1.0 + abs(ln_z) + abs(lht[k]))
            ln_env = log1p(cfg.gap) + ln_psi(ctx, ln_z + lht[k]) + bump
            pieces.append(FlatPiece(lo, hi, ln_env))
            ln_mass.append(ln_env + log(hi - lo))

        ln_k2 = log(ctx.kappa2)
        ln_k1 = log(ctx.kappa1) if ctx.kappa1 > 0.0 else -inf
        for n in range(n_mid):
            u_n = grid.u_nodes[n]
            if u_n <= u_split:
                continue  # cell entirely at or past the split
            u_np = grid.u_nodes[n + 1] if n + 1 < len(grid.u_nodes) else 0.0
            ln_xi_n = grid.ln_xi_nodes[n]
            eta_n = 32.0 * _EPS * (
                1.0 + abs(ln_z) + abs(ln_xi_n) + abs(grid.ln_tail_nodes[n])
            )
            if u_np >= u_split:
                # full cell: right edge at the next node
                s_c = -ln_z - ln_xi_n - grid.ln_tail_nodes[n + 1]
                c = softplus(s_c) - eta_n
            else:
                # cell truncated by the split, where z J = 1 exactly
                c = _LN2 - eta_n
            assert c > 0.55, f"transform coordinate floor broken: c={c}"
            d = softplus(-ln_z - ln_xi_n - grid.ln_tail_nodes[n]) + eta_n
            if d <= c:
                if u_split >= u_n:  # pragma: no cover - filtered above
                    continue
                d = c + 8.0 * eta_n  # keep a positive window, domination-safe
            span = d - c
            w = delta * span
            # z J at the cell's right edge; e^c - 1 overflows when the cell
            # sits many decades below the crossing, where a_end is just 0
            a_end = 1.0 / expm1(c) if c < 36.0 else exp(-c)
            b_n = delta * PI / (alpha * u_n + delta * PI)
            wide = b_n <= 0.5
            zxi = ln_z + ln_xi_n
            if wide:
                ln_pi = (
                    2.0 * log1p(a_end)
                    + ctx.ln_alpha
                    - log(PI)
                    - delta * zxi
                    + 2.0 * log(u_n)
                )
                g1 = GStar((1.0 + delta) * c, (1.0 + delta) * d, 1.0 + delta)
                g2: GStar | PhiStar = GStar(delta * c, delta * d, delta)
                ln_m1 = (
                    -inf
                    if ln_k1 == -inf
                    else log1p(a_end)
                    + ln_k1
                    - (1.0 + delta) * log1p(delta)
                    + g1.ln_total
                )
                ln_m3 = -delta * c + log1mexp(-w) - ctx.ln_delta
            else:
                ln_pi = (
                    2.0 * log1p(a_end)
                    + 2.0 * ctx.ln_delta
                    + log(PI)
                    - ctx.ln_alpha
                    - 2.0 * log(b_n)
                    + delta * zxi
                )
                g1 = GStar(alpha * c, alpha * d, 1.0 + delta)
                g2 = PhiStar(delta * c, delta * d, delta)
                ln_m1 = (
                    -inf
                    if ln_k1 == -inf
                    else ln_k1 - (1.0 + delta) * ctx.ln_alpha + g1.ln_total
                )
                ln_m3 = delta * d + log1mexp(-w) - ctx.ln_delta
            ln_m2 = ln_k2 - delta * ctx.ln_delta + g2.ln_total
            ln_pi += eta_n
            pieces.append(
                MidPiece(
                    n,
                    wide,
                    c,
                    d,
                    a_end,
                    ln_pi,
                    u_n,
                    max(u_np, u_split),
                    ln_xi_n,
                    g1,
                    g2,
                    ln_m1,
                    ln_m2,
                    ln_m3,
                )
            )
            ln_mass.append(
                log1p(cfg.gap) + ln_pi + logsumexp((ln_m1, ln_m2, ln_m3))
            )

        pieces.append(TailPiece(ln_h_tail, r_tail))
        ln_mass.append(_LN2 + ln_h_tail - log(r_tail))

        self.pieces = pieces
        self.ln_mass = ln_mass
        self.ln_mass_total = logsumexp(ln_mass)
        total = self.ln_mass_total
        cum: list[float] = []
        acc = 0.0
        for v in ln_mass:
            acc += exp(v - total)
            cum.append(acc)
        cum[-1] = 1.0
        self._cum = cum
        self.n_flat = n_flat
        self.n_mid = len(pieces) - n_flat - 1

    def pick_piece(self, v: float) -> FlatPiece | MidPiece | TailPiece:
        """Map a uniform v in (0, 1) to a piece, proportionally to mass."""
        return self.pieces[bisect.bisect_right(self._cum, v)]

    def describe(self) -> dict:
        """Shape summary used by the command-line grid inspector."""
        return {
            "alpha": self.grid.ctx.alpha,
            "delta": self.grid.ctx.delta,
            "ln_z": self.ln_z,
            "case": self.case,
            "theta_split": self.theta_split,
            "u_split": self.u_split,
            "ln_tau_split": self.ln_tau_split,
            "pieces_flat": self.n_flat,
            "pieces_mid": self.n_mid,
            "ladder_cells": self.grid.interval_count,
            "ln_mass_total": self.ln_mass_total,
        }
