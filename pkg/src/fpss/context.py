"""Per-alpha precomputation shared by the samplers.

An :class:`AlphaContext` freezes everything that depends only on the index
alpha: logs of alpha and delta = 1 - alpha computed from whichever was given
exactly, the series coefficient tables for ln H and its derivative, the
constants used by the small-delta sampler, and cached per-z acceptance bound
tables that let the rejection kernels skip most exact evaluations.
"""

from __future__ import annotations

import math
from array import array

import numpy as np

from fpss import _kernels
from fpss._zeta import Q64

__all__ = ["AlphaContext", "DELTA_MIN"]

# below this the coefficient tables and (alpha/delta) powers start losing
# meaning in double precision; the guard keeps failure modes loud
DELTA_MIN = 1e-14

_LNH_TABLE_BINS = 4096
_BOUND_SLACK = 1e-12
_LN2 = math.log(2.0)


def _series_tables(alpha: float, delta: float, ln_delta: float) -> tuple[array, array]:
    """Coefficient tables for the ln H and (ln H)' series.

    coef[n-1] = alpha * q_n * G_n with G_n = (1-alpha^(2n))/delta
    + (1-delta^(2n))/alpha, both parts in expm1 form so nothing cancels as
    alpha -> 1.  dcoef[n-1] = 2n * coef[n-1].
    """
    ln_alpha = math.log1p(-delta)
    coef = array("d", bytes(8 * 64))
    dcoef = array("d", bytes(8 * 64))
    for n in range(1, 65):
        g = -math.expm1(2 * n * ln_alpha) / delta - math.expm1(2 * n * ln_delta) / alpha
        c = alpha * Q64[n - 1] * g
        coef[n - 1] = c
        dcoef[n - 1] = 2 * n * c
    return coef, dcoef


class AlphaContext:
    """Everything that depends on alpha alone.

    Build with :meth:`from_alpha` or :meth:`from_delta`; the latter keeps full
    relative accuracy in delta when it is tiny (1 - 0.9999999999 loses digits,
    delta given directly does not).
    """

    __slots__ = (
        "alpha",
        "delta",
        "ln_alpha",
        "ln_delta",
        "lgamma_delta",
        "ln_c_alpha",
        "ln_c2",
        "kappa1",
        "kappa2",
        "kappa3",
        "kappa4",
        "coef",
        "dcoef",
        "_lnh_tab",
        "_bounds_cache",
    )

    def __init__(self, *, alpha: float | None = None, delta: float | None = None):
        if (alpha is None) == (delta is None):
            raise ValueError("give exactly one of alpha, delta")
        if alpha is not None:
            if not 0.0 < alpha < 1.0:
                raise ValueError(f"alpha must be in (0, 1), got {alpha}")
            delta = 1.0 - alpha
            ln_alpha = math.log(alpha)
            ln_delta = math.log1p(-alpha)
        else:
            if not 0.0 < delta < 1.0:
                raise ValueError(f"delta must be in (0, 1), got {delta}")
            alpha = 1.0 - delta
            ln_alpha = math.log1p(-delta)
            ln_delta = math.log(delta)
        if min(alpha, delta) < DELTA_MIN:
            raise ValueError(
                f"min(alpha, 1-alpha) must be >= {DELTA_MIN:g}; "
                f"got alpha={alpha!r}, delta={delta!r}"
            )
        self.alpha = alpha
        self.delta = delta
        self.ln_alpha = ln_alpha
        self.ln_delta = ln_delta
        self.lgamma_delta = math.lgamma(delta)
        # c_alpha = (alpha/delta)^alpha, c2 = max(1, alpha/delta)
        self.ln_c_alpha = alpha * (ln_alpha - ln_delta)
        self.ln_c2 = max(0.0, ln_alpha - ln_delta)
        c_alpha = math.exp(self.ln_c_alpha)
        self.kappa1 = 2.0 * c_alpha * (1.0 / delta - 2.0)
        self.kappa2 = c_alpha * (4.0 + 1.0 / math.e)
        self.kappa3 = self.kappa1 + _LN2 ** (-alpha) * self.kappa2 + 1.0
        self.kappa4 = self.kappa1 * _LN2**delta + self.kappa2
        self.coef, self.dcoef = _series_tables(alpha, delta, ln_delta)
        self._lnh_tab = None
        self._bounds_cache = {}

    @classmethod
    def from_alpha(cls, alpha: float) -> "AlphaContext":
        return cls(alpha=alpha)

    @classmethod
    def from_delta(cls, delta: float) -> "AlphaContext":
        return cls(delta=delta)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"AlphaContext(alpha={self.alpha!r}, delta={self.delta!r})"

    # -- ln H and friends bound to this alpha ------------------------------

    def ln_h(self, theta: float) -> float:
        return _kernels.ln_h(theta, self.alpha, self.delta, self.coef)

    def dlnh(self, theta: float) -> float:
        return _kernels.dlnh_raw(theta, self.alpha, self.delta, self.dcoef)

    @property
    def lnh_table(self):
        """ln H at the 4097 edges of the equispaced angle grid (cached)."""
        if self._lnh_tab is None:
            self._lnh_tab = _kernels.lnh_table(
                self.alpha, self.delta, self.coef, _LNH_TABLE_BINS
            )
        return self._lnh_tab

    # -- per-z acceptance bound tables --------------------------------------

    def bounds(self, kind: str, ln_z: float):
        """(lo, hi) bracketing the exact inner-acceptance threshold per bin.

        ``kind`` is "A" or "B".  For angle theta in bin i the exact threshold
        lies in [lo[i], hi[i]], so a proposal with test statistic <= lo[i] can
        be accepted and one with statistic > hi[i] rejected without evaluating
        ln H.  A small symmetric slack absorbs table rounding so the decisions
        match the exact path bit for bit.
        """
        key = (kind, ln_z)
        cached = self._bounds_cache.get(key)
        if cached is not None:
            return cached
        edges = np.asarray(self.lnh_table)
        ln_tau_lo = ln_z + edges[:-1]
        ln_tau_hi = ln_z + edges[1:]
        with np.errstate(over="ignore", invalid="ignore"):
            tau_lo = np.exp(ln_tau_lo)
            tau_hi = np.exp(ln_tau_hi)
            if kind == "A":
                hi = (
                    self.alpha * ln_tau_hi
                    - tau_lo
                    + np.logaddexp(0.0, self.ln_delta - ln_tau_lo)
                )
                lo = (
                    self.alpha * ln_tau_lo
                    - tau_hi
                    + np.logaddexp(0.0, self.ln_delta - ln_tau_hi)
                )
            elif kind == "B":
                hi = np.logaddexp(0.0, self.lgamma_delta + self.alpha * ln_tau_hi) - tau_lo
                lo = np.logaddexp(0.0, self.lgamma_delta + self.alpha * ln_tau_lo) - tau_hi
            else:
                raise ValueError(f"kind must be 'A' or 'B', got {kind!r}")
            # tau_lo = inf means the whole bin has threshold -inf: always reject
            hi = np.where(np.isposinf(tau_lo), -np.inf, hi)
        lo = np.ascontiguousarray(lo - _BOUND_SLACK)
        hi = np.ascontiguousarray(hi + _BOUND_SLACK)
        if len(self._bounds_cache) >= 64:
            self._bounds_cache.clear()
        self._bounds_cache[key] = (lo, hi)
        return lo, hi
