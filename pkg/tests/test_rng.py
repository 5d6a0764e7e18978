"""Seeded RNG: determinism, substreams, ranges, and backend bit-identity."""

import math

import pytest

from fpss import Rng, _kernels
from fpss._kernels import _pure

try:
    from fpss._kernels import _core
except ImportError:  # pragma: no cover - compiled backend not built
    _core = None


def test_determinism_and_substreams():
    a = [Rng(42, 0).u() for _ in range(64)]
    b = [Rng(42, 0).u() for _ in range(64)]
    assert a == b
    r = Rng(42, 0)
    assert [r.u() for _ in range(64)] != [Rng(42, 1).u() for _ in range(64)]
    assert [Rng(42, 0).u() for _ in range(8)] != [Rng(43, 0).u() for _ in range(8)]


def test_u_open_interval_and_counter():
    r = Rng(7)
    vals = [r.u() for _ in range(100000)]
    assert min(vals) > 0.0
    assert max(vals) < 1.0
    assert r.n_draws == 100000


def test_exp1_and_normal_moments():
    r = Rng(11)
    n = 100000
    es = [r.exp1() for _ in range(n)]
    assert min(es) > 0.0
    mean = sum(es) / n
    assert abs(mean - 1.0) < 4.0 / math.sqrt(n)  # 4 sigma
    r2 = Rng(12)
    ns = [r2.normal() for _ in range(n)]
    m = sum(ns) / n
    v = sum(x * x for x in ns) / n - m * m
    assert abs(m) < 4.0 / math.sqrt(n)
    assert abs(v - 1.0) < 4.0 * math.sqrt(2.0 / n)


def test_state_snapshot():
    r = Rng(3, 5)
    s0 = r.state()
    assert isinstance(s0, tuple) and len(s0) == 4
    r.u()
    assert r.state() != s0


def test_rejects_negative_seed():
    with pytest.raises(ValueError):
        Rng(-1)
    with pytest.raises(ValueError):
        Rng(0, -2)


@pytest.mark.skipif(_core is None, reason="compiled backend not built")
def test_backends_bit_identical():
    rp, rc = _pure.Rng(123, 9), _core.Rng(123, 9)
    for _ in range(2000):
        assert rp.u() == rc.u()
    rp, rc = _pure.Rng(5, 0), _core.Rng(5, 0)
    for _ in range(2000):
        assert rp.exp1() == rc.exp1()
    rp, rc = _pure.Rng(6, 1), _core.Rng(6, 1)
    for _ in range(2000):
        assert rp.normal() == rc.normal()
    assert rp.state() == rc.state()
    assert {"pure", "core"} == {_pure.BACKEND, _core.BACKEND}
    assert _kernels.BACKEND in ("pure", "core")
