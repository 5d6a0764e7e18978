"""Exact first-passage sampling for stable subordinators.

The package simulates the first passage of an alpha-stable subordinator
(Laplace exponent r^alpha, 0 < alpha < 1) across a non-increasing barrier by
pure acceptance-rejection: no numerical inversion or integration appears
anywhere in a sampling path, so every accepted draw follows the target law
exactly.  The expected work per draw stays bounded by O(1 + |ln(1-alpha)|)
uniformly in the scale parameter, which keeps sampling practical even at
alpha = 1 - 1e-12 and z = 1e-50.

Entry points
------------
- ``AlphaContext``: per-alpha precomputation (series tables, constants).
- ``Rng``: seeded uniform stream with independent substreams.
- ``ChiSampler``: draws from the normalized two-variable kernel at fixed
  (alpha, z), choosing among three acceptance-rejection strategies ("A",
  "B", "P") or selecting automatically.
- ``sample_first_passage`` / ``Barrier``: the full first-passage simulation
  across a constant or power-capped barrier, including creep handling.
- ``fpss.harness``: verification tools (KS tests, quadrature oracles,
  experiment runners) — imported lazily because it pulls in SciPy.

A compiled extension backend is used automatically when available; set
``FPSS_PURE_PYTHON=1`` before import to force the pure-Python backend.  Both
produce bit-identical streams.
"""

from ._kernels import BACKEND, Rng
from .context import AlphaContext
from .chi import ChiSample, ChiSampler, get_angle_grid, select_algorithm
from .chi_p import ChiPSampler
from .grid import AngleGrid, QGridConfig, ZGrid
from .first_passage import (
    Barrier,
    FirstPassage,
    barrier_constant,
    barrier_from_json,
    barrier_powcap,
    draw_z,
    sample_first_passage,
)

__all__ = [
    "AlphaContext",
    "AngleGrid",
    "BACKEND",
    "Barrier",
    "ChiPSampler",
    "ChiSample",
    "ChiSampler",
    "FirstPassage",
    "QGridConfig",
    "Rng",
    "ZGrid",
    "barrier_constant",
    "barrier_from_json",
    "barrier_powcap",
    "draw_z",
    "get_angle_grid",
    "sample_first_passage",
    "select_algorithm",
    "__version__",
]

__version__ = "0.1.0"
