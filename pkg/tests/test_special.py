"""Special-function unit tests against frozen 50-digit references.

The frozen values live in _refs.py (regenerate with
scripts/gen_reference_values.py).  The headline contract: full relative
accuracy survives delta = 1e-12, where naive evaluation of every one of
these quantities loses all significant digits.
"""

import math

import pytest

from fpss import AlphaContext, special
from _refs import EXPM1_RATIO_REFS, H_REFS, LN_EXPM1_REFS, ONE_MINUS_POW_REFS

RTOL = 1e-12


def rel(a: float, b: float) -> float:
    if b == 0.0:
        return abs(a)
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------
# frozen references
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("x,p,ref", ONE_MINUS_POW_REFS)
def test_one_minus_pow_refs(x, p, ref):
    assert rel(special.one_minus_pow(x, p), ref) <= RTOL


@pytest.mark.parametrize("t,ref", EXPM1_RATIO_REFS)
def test_expm1_ratio_refs(t, ref):
    assert rel(special.expm1_ratio(t), ref) <= RTOL


@pytest.mark.parametrize("v,ref", LN_EXPM1_REFS)
def test_ln_expm1_refs(v, ref):
    assert rel(special.ln_expm1(v), ref) <= RTOL


@pytest.mark.parametrize("delta,theta,ref", H_REFS)
def test_H_refs(delta, theta, ref):
    ctx = AlphaContext(delta=delta)
    assert rel(special.H(ctx, theta), ref) <= RTOL


# ---------------------------------------------------------------------------
# exact edge cases and domain errors
# ---------------------------------------------------------------------------


def test_one_minus_pow_edges():
    assert special.one_minus_pow(0.0, 0.5) == 1.0
    assert special.one_minus_pow(1.0, 1e-12) == 0.0
    with pytest.raises(ValueError):
        special.one_minus_pow(-0.1, 0.5)


def test_expm1_ratio_edges():
    assert special.expm1_ratio(0.0) == 1.0
    # continuous through the overflow-guard switch at t = 709
    lo, hi = special.expm1_ratio(708.9999999), special.expm1_ratio(709.0000001)
    assert rel(lo, hi) < 1e-6


def test_ln_expm1_edges():
    assert special.ln_expm1(0.0) == -math.inf
    with pytest.raises(ValueError):
        special.ln_expm1(-1e-9)
    # ln(e^v - 1) = 0 exactly at v = ln 2
    assert abs(special.ln_expm1(math.log(2.0))) < 1e-15


def test_softplus_identity():
    # softplus(x) - softplus(-x) = x, both branches exercised
    for x in (1e-300, 1e-8, 0.3, 5.0, 50.0, 800.0):
        assert abs(special.softplus(x) - special.softplus(-x) - x) <= 1e-15 * max(1.0, x)
    assert special.softplus(0.0) == math.log(2.0)


def test_log1mexp_domain():
    assert special.log1mexp(0.0) == -math.inf
    with pytest.raises(ValueError):
        special.log1mexp(1e-9)
    # round-trip: 1 - e^x recovered for moderate x
    for x in (-1e-8, -0.5, -1.0, -40.0):
        assert rel(math.exp(special.log1mexp(x)), -math.expm1(x)) < 1e-14


def test_ln_expm1_minus_x_regimes():
    # series region vs direct region agree where both are trustworthy
    for x in (0.4, 0.49999, 0.50001, 1.0, 10.0):
        direct = math.log(math.expm1(x) - x)
        assert rel(special.ln_expm1_minus_x(x), direct) < 1e-12
    # deep series region: e^x - 1 - x ~ x^2/2 * (1 + x/3)
    v = special.ln_expm1_minus_x(1e-8)
    assert rel(v, math.log(0.5e-16 * (1 + 1e-8 / 3))) < 1e-12
    assert special.ln_expm1_minus_x(0.0) == -math.inf
    with pytest.raises(ValueError):
        special.ln_expm1_minus_x(-1.0)


def test_logsumexp_edges():
    assert special.logsumexp((-math.inf, -math.inf)) == -math.inf
    assert rel(special.logsumexp((0.0, 0.0)), math.log(2.0)) < 1e-15
    assert rel(special.logsumexp((-1000.0, 0.0)), math.log1p(math.exp(-1000.0))) < 1e-15


def test_sinc_family():
    assert special.sinc(0.0) == 1.0
    assert rel(special.sinc(0.5), math.sin(0.5) / 0.5) < 1e-15
    # ln_sinc matches its definition away from 0 and its series near 0
    assert rel(special.ln_sinc(1.0), math.log(math.sin(1.0))) < 1e-14
    assert rel(special.ln_sinc(1e-8), -(1e-16) / 6.0) < 1e-10
    # g_cot = cot(x) - 1/x, odd and ~ -x/3 near 0
    assert rel(special.g_cot(1e-6), -1e-6 / 3.0) < 1e-9
    assert rel(special.g_cot(1.0), 1.0 / math.tan(1.0) - 1.0) < 1e-14


# ---------------------------------------------------------------------------
# the angular function H
# ---------------------------------------------------------------------------


def test_ln_H_normalization_and_domain():
    ctx = AlphaContext(alpha=0.7)
    assert special.ln_H(ctx, 0.0) == 0.0  # H(0) = 1
    assert special.ln_H(ctx, math.pi) == math.inf
    with pytest.raises(ValueError):
        special.ln_H(ctx, -0.1)
    with pytest.raises(ValueError):
        special.ln_H(ctx, math.pi + 0.1)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9, 0.999])
def test_ln_H_monotone(alpha):
    ctx = AlphaContext(alpha=alpha)
    grid = [i * math.pi / 200.0 for i in range(1, 200)]
    vals = [special.ln_H(ctx, t) for t in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[0] > 0.0


def test_ln_H_series_junction():
    # the series cut sits at theta = 2.2; both branches must agree there
    for alpha in (0.3, 0.9, 0.9999999):
        ctx = AlphaContext(alpha=alpha)
        lo = special.ln_H(ctx, 2.1999999999)
        hi = special.ln_H(ctx, 2.2000000001)
        assert abs(hi - lo) < 1e-8 * max(1.0, abs(lo))


def test_ln_H_delta_to_zero_limit():
    # ln_H1 is the alpha -> 1 limit; at delta = 1e-12 they agree closely
    ctx = AlphaContext(delta=1e-12)
    for theta in (0.3, 1.0, 2.0, 3.0):
        assert abs(special.ln_H(ctx, theta) - special.ln_H1(theta)) < 1e-9


def test_dln_H_is_tight_lower_bound():
    # one-sided: never above the true slope, within 1e-8 relative below it
    for alpha in (0.4, 0.9, 0.9999):
        ctx = AlphaContext(alpha=alpha)
        for theta in (0.5, 1.5, 2.5, 3.0):
            d = special.dln_H(ctx, theta)
            eps = 1e-6
            fd = (special.ln_H(ctx, theta + eps) - special.ln_H(ctx, theta - eps)) / (2 * eps)
            assert d > 0.0
            assert d <= fd * (1.0 + 1e-5)
            assert d >= fd * (1.0 - 1e-4)
