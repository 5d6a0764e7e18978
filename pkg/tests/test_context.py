"""AlphaContext construction, exact-delta bookkeeping, cached bounds."""

import math

import pytest

from fpss import AlphaContext
from fpss.context import DELTA_MIN


def test_keyword_only_and_exclusivity():
    with pytest.raises(TypeError):
        AlphaContext(0.5)  # positional form rejected on purpose
    with pytest.raises(ValueError):
        AlphaContext(alpha=0.5, delta=0.5)
    with pytest.raises(ValueError):
        AlphaContext()


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.7])
def test_range_checks(bad):
    with pytest.raises(ValueError):
        AlphaContext(alpha=bad)
    with pytest.raises(ValueError):
        AlphaContext(delta=bad)


def test_delta_floor():
    with pytest.raises(ValueError):
        AlphaContext(delta=DELTA_MIN / 2)
    with pytest.raises(ValueError):
        AlphaContext(alpha=DELTA_MIN / 2)  # alpha near 0 is equally barred
    AlphaContext(delta=DELTA_MIN)  # the boundary itself is fine


def test_delta_given_is_kept_exactly():
    ctx = AlphaContext(delta=1e-12)
    assert ctx.delta == 1e-12
    assert ctx.ln_delta == math.log(1e-12)
    assert ctx.alpha == 1.0 - 1e-12
    # from alpha: delta reconstructed, logs via log1p so nothing cancels
    ctx2 = AlphaContext(alpha=0.9999999999)
    assert ctx2.ln_delta == math.log1p(-0.9999999999)


def test_derived_constants():
    ctx = AlphaContext(alpha=0.7)
    assert ctx.ln_alpha == math.log(0.7)
    r = ctx.alpha / ctx.delta
    assert abs(ctx.ln_c_alpha - ctx.alpha * math.log(r)) < 1e-14
    assert ctx.ln_c2 == max(0.0, math.log(r))
    assert ctx.lgamma_delta == math.lgamma(ctx.delta)
    # kappa1 = 2 c_alpha (1/delta - 2): zero exactly at delta = 1/2
    assert AlphaContext(alpha=0.5).kappa1 == 0.0
    assert ctx.kappa1 > 0.0
    assert len(ctx.coef) == 64 and len(ctx.dcoef) == 64
    assert all(c > 0.0 for c in ctx.coef)
    assert all(d == 2 * (n + 1) * c for n, (c, d) in enumerate(zip(ctx.coef, ctx.dcoef)))


def test_bounds_cache_and_shape():
    ctx = AlphaContext(alpha=0.8)
    lo, hi = ctx.bounds("B", math.log(0.25))
    assert lo.shape == hi.shape
    assert (lo <= hi).all()
    lo2, hi2 = ctx.bounds("B", math.log(0.25))
    assert lo2 is lo and hi2 is hi  # cached per (kind, ln_z)
    lo3, _ = ctx.bounds("A", 0.7)
    assert lo3 is not lo
