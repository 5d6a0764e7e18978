"""Angle ladders and the per-z piece decomposition.

The load-bearing property: across any single ladder cell, H grows by at most
the configured gap factor (1 + gap).  That is what bounds the envelope
looseness — and hence the acceptance rate — of the piecewise sampler, so it
is asserted directly against ln_H on every cell, including the steep zone
where theta is within 1e-10 of pi.
"""

import math

import pytest

from fpss import AlphaContext, QGridConfig, ZGrid, get_angle_grid
from fpss.grid import AngleGrid, FlatPiece, MidPiece, TailPiece
from fpss.special import ln_H

LN10 = math.log(10.0)


def test_config_validation():
    with pytest.raises(ValueError):
        QGridConfig(gap=0.0)
    with pytest.raises(ValueError):
        QGridConfig(gap=1.0)
    with pytest.raises(ValueError):
        QGridConfig(alpha_floor=0.4)
    with pytest.raises(ValueError):
        QGridConfig(theta_start=math.pi)
    with pytest.raises(ValueError):
        QGridConfig(theta_start=1.0)  # below pi/3 + pi/(3 alpha_floor)
    assert QGridConfig().step_cap > 0.0


@pytest.mark.parametrize("alpha", [0.995, 0.9999])
def test_ladder_growth_capped(alpha):
    ctx = AlphaContext(alpha=alpha)
    grid = AngleGrid(ctx)
    cap = math.log1p(grid.config.gap) + 1e-9

    assert grid.t_nodes[0] == 0.0
    assert grid.t_nodes[-1] == grid.config.theta_start
    assert all(b > a for a, b in zip(grid.t_nodes, grid.t_nodes[1:]))
    for t, lh in zip(grid.t_nodes, grid.ln_h_flat):
        assert abs(lh - ln_H(ctx, t)) < 1e-12 * max(1.0, abs(lh))
    for lo, hi in zip(grid.ln_h_flat, grid.ln_h_flat[1:]):
        assert 0.0 <= hi - lo <= cap

    assert grid.has_steep
    assert all(b < a for a, b in zip(grid.u_nodes, grid.u_nodes[1:]))
    for u, lh in zip(grid.u_nodes, grid.ln_h_steep):
        ref = ln_H(ctx, math.pi - u)
        assert abs(lh - ref) < 1e-7 * max(1.0, abs(ref))
    # in the steep zone the growth cap applies to the bounded factor XI;
    # the blowup factor is integrated analytically per piece, not enveloped
    for lo, hi in zip(grid.ln_xi_nodes, grid.ln_xi_nodes[1:]):
        assert 0.0 <= hi - lo <= cap
    for lo, hi in zip(grid.ln_h_steep, grid.ln_h_steep[1:]):
        assert hi > lo
    # the two ladders meet at theta_start
    assert abs(grid.ln_h_steep[0] - grid.ln_h_flat[-1]) < 1e-7
    assert grid.interval_count == (len(grid.t_nodes) - 1) + len(grid.u_nodes)


def test_mid_zone_needs_alpha_floor():
    grid = AngleGrid(AlphaContext(alpha=0.6))  # below the default floor 2/3
    assert not grid.has_steep
    assert grid.u_nodes == []
    assert grid.interval_count == len(grid.t_nodes) - 1


def test_interval_count_grows_logarithmically():
    counts = [
        get_angle_grid(AlphaContext(delta=10.0**-k)).interval_count
        for k in (3, 6, 9)
    ]
    assert counts[0] < counts[1] < counts[2]
    # increments per factor 1e3 in delta are nearly equal (affine in ln delta)
    d1, d2 = counts[1] - counts[0], counts[2] - counts[1]
    assert abs(d2 - d1) <= 3


@pytest.mark.parametrize("alpha,z", [(0.995, 1e-3), (0.995, 1e-30), (0.9999, 1e-3), (0.9999, 1e-30)])
def test_zgrid_masses_and_pick(alpha, z):
    grid = get_angle_grid(AlphaContext(alpha=alpha))
    zg = ZGrid(grid, math.log(z))
    d = zg.describe()
    assert d["case"] in (1, 2)
    assert d["pieces_flat"] + d["pieces_mid"] + 1 == len(zg.pieces)
    assert isinstance(zg.pieces[-1], TailPiece)
    total = math.fsum(math.exp(v - zg.ln_mass_total) for v in zg.ln_mass)
    assert abs(total - 1.0) < 1e-12
    assert isinstance(zg.pick_piece(1e-12), FlatPiece)
    assert isinstance(zg.pick_piece(1.0 - 1e-12), TailPiece)
    assert 0.0 < d["theta_split"] < math.pi
    assert 0.0 < d["u_split"] < math.pi
    kinds = {type(p) for p in zg.pieces}
    assert kinds <= {FlatPiece, MidPiece, TailPiece}


def test_zgrid_refusals():
    grid_lo = get_angle_grid(AlphaContext(alpha=0.3))
    with pytest.raises(ValueError, match="alpha >= 1/2"):
        ZGrid(grid_lo, -1.0)
    grid = get_angle_grid(AlphaContext(alpha=0.9))
    with pytest.raises(ValueError, match="ln_z <= 0"):
        ZGrid(grid, 0.5)
    with pytest.raises(ValueError, match="angle-resolution floor"):
        ZGrid(grid, -1e7)


def test_grid_cache_reuses_instances():
    ctx = AlphaContext(alpha=0.875)
    assert get_angle_grid(ctx) is get_angle_grid(AlphaContext(alpha=0.875))
