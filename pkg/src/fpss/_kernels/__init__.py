"""Kernel backend selection.

Imports the compiled Cython kernels when available, otherwise the pure-Python
mirror.  Set ``FPSS_PURE_PYTHON=1`` to skip the compiled module even when it
is installed (used by the benchmark and the bit-identity test).
"""

from __future__ import annotations

import os

if os.environ.get("FPSS_PURE_PYTHON", "") == "1":
    from fpss._kernels import _pure as _backend
else:
    try:
        from fpss._kernels import _core as _backend  # type: ignore[attr-defined]
    except ImportError:
        from fpss._kernels import _pure as _backend

BACKEND = _backend.BACKEND
Rng = _backend.Rng
ln_sinc = _backend.ln_sinc
g_cot = _backend.g_cot
lnsinc_diff = _backend.lnsinc_diff
ln_h = _backend.ln_h
dlnh_raw = _backend.dlnh_raw
lnh1 = _backend.lnh1
v1 = _backend.v1
f_slope = _backend.f_slope
sample_m = _backend.sample_m
sample_E = _backend.sample_E
gamma_ln = _backend.gamma_ln
chi_A = _backend.chi_A
chi_B = _backend.chi_B
chi_P = _backend.chi_P
draw_lnz = _backend.draw_lnz
count_lnz_below = _backend.count_lnz_below
lnh_table = _backend.lnh_table

__all__ = [
    "BACKEND",
    "Rng",
    "ln_sinc",
    "g_cot",
    "lnsinc_diff",
    "ln_h",
    "dlnh_raw",
    "lnh1",
    "v1",
    "f_slope",
    "sample_m",
    "sample_E",
    "gamma_ln",
    "chi_A",
    "chi_B",
    "chi_P",
    "draw_lnz",
    "count_lnz_below",
    "lnh_table",
]
