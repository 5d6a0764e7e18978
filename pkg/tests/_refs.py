"""Frozen high-precision reference values.

Auto-generated by scripts/gen_reference_values.py (mpmath, 50 digits,
rounded to nearest double).  Do not edit by hand; rerun the script.
"""

# (x, p, reference) for one_minus_pow(x, p) = 1 - x**p
ONE_MINUS_POW_REFS = [
    (0.5, 1e-12, 6.931471805597051e-13),
    (0.5, 2.5e-13, 1.732867951399713e-13),
    (1e-300, 1e-12, 6.907755276596282e-10),
    (0.3, 0.999999999999, 0.6999999999996388),
    (0.7, 1.0, 0.30000000000000004),
    (0.9999999999999998, 1e-12, 2.2204460492503135e-28),
    (2.0, -1e-12, 6.931471805597051e-13),
    (0.9999999999, 0.5, 5.000000413826855e-11),
]

# (t, reference) for expm1_ratio(t) = t / (e^t - 1)
EXPM1_RATIO_REFS = [
    (1e-300, 1.0),
    (-1e-300, 1.0),
    (1e-12, 0.9999999999995),
    (-1e-12, 1.0000000000005),
    (1e-08, 0.999999995),
    (0.5, 0.7707470412683991),
    (-0.5, 1.2707470412683992),
    (37.0, 3.1572276215253046e-15),
    (-37.0, 37.0),
    (700.0, 6.90177358063184e-302),
    (-700.0, 700.0),
    (710.0, 3.1781632202293424e-306),
]

# (v, reference) for ln_expm1(v) = ln(e^v - 1)
LN_EXPM1_REFS = [
    (1e-300, -690.7755278982137),
    (1e-12, -27.63102111592805),
    (1e-06, -13.815510057964232),
    (0.5, -0.43275212956718856),
    (1.0, 0.5413248546129181),
    (36.0, 36.0),
    (40.0, 40.0),
    (700.0, 700.0),
    (745.0, 745.0),
]

# (delta, theta, reference) for H(theta) with alpha = 1 - delta
H_REFS = [
    (0.5, 0.001, 1.0000002500000416),
    (0.5, 0.1, 1.0025041725771424),
    (0.5, 0.5, 1.06519949673285),
    (0.5, 1.5707963267948966, 1.9999999999999998),
    (0.5, 2.5, 10.057509621834829),
    (0.5, 3.0, 199.85004452649247),
    (0.5, 3.13, 29764.537459104446),
    (1e-12, 0.001, 1.0000005000001528),
    (1e-12, 0.1, 1.0050153150486347),
    (1e-12, 0.5, 1.1351623098348536),
    (1e-12, 1.5707963267948966, 4.26986711132938),
    (1e-12, 2.5, 322.55909202610377),
    (1e-12, 3.0, 79778076440.47864),
    (1e-12, 3.13, 1.316151736050439e+120),
]
