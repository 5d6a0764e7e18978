"""Bivariate jump-kernel sampler tuned for alpha close to 1.

Draws (y, theta) pairs from the density proportional to

    [1 - (y+1)^(-delta/alpha)]^(-alpha) H(theta) exp(-z H(theta) (y+1))

on (0, inf) x [0, pi), working in v = log(1+y).  The envelope factorizes:
its theta-marginal is proportional to psi(z H) exp(-z H), which the
piecewise grid sampler handles, and conditionally on theta the v-part is
a three-branch mixture (a power-kernel envelope below v = log(1 + 1/tau)
plus two exponential tails, tau = z H(theta)).  Because the marginal and
the conditional come from one envelope, the two stages compose into a
single rejection step whose acceptance rate stays bounded away from zero
uniformly in z and delta.

The class here owns the cold path: it builds the z-specific envelope grid
and packs it into flat double arrays, then hands each draw to the kernel
backend (``_kernels.chi_P``), whose compiled variant runs the whole
rejection loop in C.  Cost per draw is dominated by the angle stage;
everything in the hot path is O(1) arithmetic on logs, so the sampler
stays usable at delta = 1e-12 and ln z = -1e10 where the direct
representation of H(theta) overflows.
"""

from __future__ import annotations

from array import array
from math import exp, inf, log, log1p

from . import _kernels
from .envelopes import PhiStar
from .grid import AngleGrid, FlatPiece, MidPiece, ZGrid
from .special import logsumexp

__all__ = ["ChiPSampler"]

# one packed piece record; see the slot map in the kernel backends
_STRIDE = 64


class ChiPSampler:
    """Rejection sampler for one (alpha, z) pair; alpha >= 1/2, z <= 1.

    The AngleGrid carries everything that depends on alpha only, so it can
    be shared between instances; the z-specific envelope is built and packed
    once per instance.  Counters accumulate across draws: ``rounds`` counts
    joint proposals, ``angle_proposals`` the inner angle proposals.  Every
    proposal's acceptance ratio is checked against the certified bound; a
    ratio beyond the conditioning-aware tolerance raises RuntimeError, and
    ``ratio_violations`` counts proposals past 1 + 1e-10 for the stricter
    audit reports.
    """

    def __init__(self, grid: AngleGrid, ln_z: float, *, audit: bool = False):
        self.grid = grid
        self.ctx = grid.ctx
        self.zgrid = ZGrid(grid, ln_z)
        self.ln_z = ln_z
        self.audit = audit
        ctx = self.ctx
        self._ln_k1 = log(ctx.kappa1) if ctx.kappa1 > 0.0 else -inf
        self._ln_k2 = log(ctx.kappa2)
        self._hdr, self._pp, self._cum = self._pack()
        self.angle_proposals = 0
        self.angle_accepts = 0
        self.rounds = 0
        self.accepts = 0
        self.max_angle_ln_ratio = -inf
        self.max_joint_ln_ratio = -inf
        self.ratio_violations = 0

    def _pack(self) -> tuple[array, array, array]:
        """Flatten the piece envelopes into the kernel's array layout."""
        ctx = self.ctx
        zg = self.zgrid
        alpha, delta = ctx.alpha, ctx.delta
        hdr = array(
            "d",
            (
                alpha,
                delta,
                ctx.ln_alpha,
                ctx.ln_delta,
                ctx.ln_c_alpha,
                self._ln_k1,
                self._ln_k2,
                self.ln_z,
                zg.u_split,
                zg.ln_tau_split,
                zg.ln_xi_split,
                zg.ln_ratio_tol,
                log1p(self.grid.config.gap),
                self._ln_k2 + alpha * ctx.ln_delta,
                1.0 if self.audit else 0.0,
                0.0,
            ),
        )
        pp = array("d", bytes(8 * _STRIDE * len(zg.pieces)))
        for i, piece in enumerate(zg.pieces):
            o = _STRIDE * i
            if isinstance(piece, FlatPiece):
                pp[o] = 0.0
                pp[o + 1] = piece.lo
                pp[o + 2] = piece.hi
                pp[o + 3] = piece.ln_env
            elif isinstance(piece, MidPiece):
                pp[o] = 1.0
                pp[o + 1] = 1.0 if piece.wide else 0.0
                pp[o + 2] = piece.c
                pp[o + 3] = piece.d
                pp[o + 4] = delta * (piece.d - piece.c)
                pp[o + 5] = piece.ln_pi
                pp[o + 6] = piece.u_hi
                pp[o + 7] = piece.u_lo
                pp[o + 8] = piece.ln_xi_n
                total = logsumexp((piece.ln_m1, piece.ln_m2, piece.ln_m3))
                w1 = exp(piece.ln_m1 - total)
                pp[o + 9] = w1
                pp[o + 10] = w1 + exp(piece.ln_m2 - total)
                pp[o + 11] = 0.0 if piece.ln_m1 == -inf else 1.0
                if piece.wide:
                    pp[o + 12] = (
                        -delta * log1p(delta) + log1p(piece.a_end) + self._ln_k1
                    )
                    pp[o + 13] = log1p(delta)
                    pp[o + 14] = -delta
                else:
                    pp[o + 12] = self._ln_k1 - delta * ctx.ln_alpha
                    pp[o + 13] = ctx.ln_alpha
                    pp[o + 14] = delta
                g1 = piece.g1
                pp[o + 16] = g1.c
                pp[o + 17] = g1.A
                pp[o + 18] = g1.B
                pp[o + 19] = g1.ln_g_left
                pp[o + 20] = g1.ln_g_right
                pp[o + 21] = g1.ln_total
                pp[o + 22] = g1._s_left
                pp[o + 23] = g1._s_right
                g2 = piece.g2
                if isinstance(g2, PhiStar):
                    pp[o + 26] = 1.0
                    pp[o + 27] = g2.a
                    pp[o + 28] = g2.b
                    pp[o + 29] = g2.c
                    pp[o + 30] = g2.p_c
                    pp[o + 31] = g2.A
                    pp[o + 32] = g2.ln_m_left
                    pp[o + 33] = g2.ln_m_right
                    pp[o + 34] = g2.ln_total
                    pp[o + 35] = g2._ln_w_sum
                    pp[o + 36] = g2._b_pow
                    pp[o + 37] = g2._ln_s
                    pp[o + 38] = g2._ln_b
                    if g2._ln_w is not None:
                        for k in range(9):
                            pp[o + 39 + k] = g2._ln_w[k]
                    else:
                        for k in range(9):
                            pp[o + 39 + k] = -inf
                else:
                    pp[o + 26] = 0.0
                    pp[o + 27] = g2.a
                    pp[o + 28] = g2.c
                    pp[o + 29] = g2._ln_g
                    pp[o + 30] = g2.ln_total
                    pp[o + 31] = g2._s_pow
                    pp[o + 32] = g2._a_pow_m1
            else:
                pp[o] = 2.0
                pp[o + 1] = piece.ln_h
                pp[o + 2] = piece.r
        cum = array("d", zg._cum)
        return hdr, pp, cum

    def draw(self, rng) -> tuple[float, float, float, float]:
        """One accepted (ln_y, theta, u, ln_tau) draw."""
        ln_y, theta, u_t, ln_tau, nr, nap, max_a, max_j, nv = _kernels.chi_P(
            rng, self._hdr, self._pp, self._cum, self.ctx.coef
        )
        self.rounds += nr
        self.accepts += 1
        self.angle_proposals += nap
        self.angle_accepts += nr
        if max_a > self.max_angle_ln_ratio:
            self.max_angle_ln_ratio = max_a
        if max_j > self.max_joint_ln_ratio:
            self.max_joint_ln_ratio = max_j
        self.ratio_violations += nv
        return ln_y, theta, u_t, ln_tau

    @property
    def stats(self) -> dict:
        """Proposal accounting for efficiency experiments."""
        return {
            "rounds": self.rounds,
            "accepts": self.accepts,
            "angle_proposals": self.angle_proposals,
            "angle_accepts": self.angle_accepts,
            "max_angle_ln_ratio": self.max_angle_ln_ratio,
            "max_joint_ln_ratio": self.max_joint_ln_ratio,
            "ratio_violations": self.ratio_violations,
        }
