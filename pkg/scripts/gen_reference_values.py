#!/usr/bin/env python3
"""Generate frozen high-precision reference values for the unit tests.

Writes tests/_refs.py: 50-digit mpmath evaluations of the numerically
delicate special functions, rounded to the nearest double.  The unit tests
compare the double-precision implementations against these frozen values at
1e-12 relative tolerance, which they must meet even where naive evaluation
loses every significant digit (delta = 1e-12).

Before freezing anything, this script cross-validates the high-precision
formulas against the package implementations at MODERATE parameters, where
double precision is unconditionally trustworthy.  If that validation fails,
nothing is written and the exit status is nonzero: a frozen reference is only
as good as the formula behind it.

H here is the angular function, normalized so that H(0) = 1:

    H(theta) = (sin(alpha*theta)/(alpha*sin(theta)))**(alpha/delta)
               * sin(delta*theta)/(delta*sin(theta)),

evaluated with alpha = 1 - delta exactly (the package context rounds alpha to
double, but its kernels carry all delta-sensitive differences in closed form,
so the exact-alpha value is the correct target).
"""

import math
import os
import sys

import mpmath as mp

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fpss import AlphaContext, special  # noqa: E402

mp.mp.dps = 50

OUT_PATH = os.path.join(os.path.dirname(__file__), "..", "tests", "_refs.py")


# ---------------------------------------------------------------------------
# high-precision formulas
# ---------------------------------------------------------------------------


def mp_one_minus_pow(x: float, p: float) -> mp.mpf:
    return 1 - mp.power(mp.mpf(x), mp.mpf(p))


def mp_expm1_ratio(t: float) -> mp.mpf:
    tm = mp.mpf(t)
    if tm == 0:
        return mp.mpf(1)
    return tm / mp.expm1(tm)


def mp_ln_expm1(v: float) -> mp.mpf:
    return mp.log(mp.expm1(mp.mpf(v)))


def mp_H(delta: float, theta: float) -> mp.mpf:
    d = mp.mpf(delta)  # exact binary double
    a = 1 - d  # exact in mp, unlike the double 1.0 - delta
    th = mp.mpf(theta)
    s = mp.sin(th)
    return mp.power(mp.sin(a * th) / (a * s), a / d) * mp.sin(d * th) / (d * s)


# ---------------------------------------------------------------------------
# evaluation points
# ---------------------------------------------------------------------------

PI = math.pi

ONE_MINUS_POW_POINTS = [
    (0.5, 1e-12),
    (0.5, 2.5e-13),
    (1e-300, 1e-12),
    (0.3, 0.999999999999),
    (0.7, 1.0),
    (1.0 - 2.0**-52, 1e-12),
    (2.0, -1e-12),
    (0.9999999999, 0.5),
]

EXPM1_RATIO_POINTS = [
    1e-300,
    -1e-300,
    1e-12,
    -1e-12,
    1e-8,
    0.5,
    -0.5,
    37.0,
    -37.0,
    700.0,
    -700.0,
    710.0,
]

LN_EXPM1_POINTS = [
    1e-300,
    1e-12,
    1e-6,
    0.5,
    1.0,
    36.0,
    40.0,
    700.0,
    745.0,
]

H_DELTAS = [0.5, 1e-12]
H_THETAS = [1e-3, 0.1, 0.5, PI / 2, 2.5, 3.0, 3.13]

# moderate parameters for the pre-freeze validation pass
VALIDATE_DELTAS = [0.5, 0.3, 0.25]
VALIDATE_RTOL = 5e-13


# ---------------------------------------------------------------------------
# validation at moderate parameters
# ---------------------------------------------------------------------------


def rel_err(approx: float, exact: mp.mpf) -> float:
    if exact == 0:
        return abs(approx)
    return float(abs((mp.mpf(approx) - exact) / exact))


def validate() -> list[str]:
    failures = []
    worst = {"one_minus_pow": 0.0, "expm1_ratio": 0.0, "ln_expm1": 0.0, "H": 0.0}

    for x, p in [(0.5, 0.5), (0.3, 2.0), (0.9, 1e-3), (1.5, -0.7)]:
        e = rel_err(special.one_minus_pow(x, p), mp_one_minus_pow(x, p))
        worst["one_minus_pow"] = max(worst["one_minus_pow"], e)
    for t in [0.5, -0.5, 3.0, 1e-3]:
        e = rel_err(special.expm1_ratio(t), mp_expm1_ratio(t))
        worst["expm1_ratio"] = max(worst["expm1_ratio"], e)
    for v in [0.1, 1.0, 5.0]:
        e = rel_err(special.ln_expm1(v), mp_ln_expm1(v))
        worst["ln_expm1"] = max(worst["ln_expm1"], e)

    # the H formula against the package kernels, moderate delta only
    for d in VALIDATE_DELTAS:
        ctx = AlphaContext(delta=d)
        for th in H_THETAS:
            e = rel_err(special.H(ctx, th), mp_H(d, th))
            worst["H"] = max(worst["H"], e)

    # independent closed form at delta = 1/2: with sin(theta) expanded as
    # 2*sin(theta/2)*cos(theta/2), H(theta) = 1/cos(theta/2)^2
    for th in H_THETAS:
        closed = 1 / mp.cos(mp.mpf(th) / 2) ** 2
        e = float(abs((mp_H(0.5, th) - closed) / closed))
        if e > 1e-45:
            failures.append(f"H closed-form check failed at theta={th}: {e:.3e}")

    for name, e in worst.items():
        line = f"validate {name}: worst relative error {e:.3e}"
        print(line)
        if e > VALIDATE_RTOL:
            failures.append(line + f" exceeds {VALIDATE_RTOL:.1e}")
    return failures


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def main() -> int:
    failures = validate()
    if failures:
        for f in failures:
            print("FAIL:", f, file=sys.stderr)
        return 1

    lines = [
        '"""Frozen high-precision reference values.',
        "",
        "Auto-generated by scripts/gen_reference_values.py (mpmath, 50 digits,",
        "rounded to nearest double).  Do not edit by hand; rerun the script.",
        '"""',
        "",
        "# (x, p, reference) for one_minus_pow(x, p) = 1 - x**p",
        "ONE_MINUS_POW_REFS = [",
    ]
    for x, p in ONE_MINUS_POW_POINTS:
        ref = float(mp_one_minus_pow(x, p))
        lines.append(f"    ({x!r}, {p!r}, {ref!r}),")
    lines += ["]", "", "# (t, reference) for expm1_ratio(t) = t / (e^t - 1)", "EXPM1_RATIO_REFS = ["]
    for t in EXPM1_RATIO_POINTS:
        ref = float(mp_expm1_ratio(t))
        lines.append(f"    ({t!r}, {ref!r}),")
    lines += ["]", "", "# (v, reference) for ln_expm1(v) = ln(e^v - 1)", "LN_EXPM1_REFS = ["]
    for v in LN_EXPM1_POINTS:
        ref = float(mp_ln_expm1(v))
        lines.append(f"    ({v!r}, {ref!r}),")
    lines += [
        "]",
        "",
        "# (delta, theta, reference) for H(theta) with alpha = 1 - delta",
        "H_REFS = [",
    ]
    for d in H_DELTAS:
        for th in H_THETAS:
            ref = float(mp_H(d, th))
            lines.append(f"    ({d!r}, {th!r}, {ref!r}),")
    lines += ["]", ""]

    os.makedirs(os.path.dirname(OUT_PATH), exist_ok=True)
    with open(OUT_PATH, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
    print(f"wrote {OUT_PATH}")

    # report how the implementation does against the frozen extremes
    ctx = AlphaContext(delta=1e-12)
    worst = 0.0
    for th in H_THETAS:
        worst = max(worst, rel_err(special.H(ctx, th), mp_H(1e-12, th)))
    print(f"implementation vs frozen H at delta=1e-12: worst rel err {worst:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
