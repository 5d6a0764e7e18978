"""Pure-Python kernel backend.

Reference implementation of the hot numerical kernels: the seeded RNG, the
sinc-logarithm family, the tilted-gamma style elementary samplers, and the
two simple rejection loops for the chi distribution.  The compiled backend in
``_core.pyx`` mirrors this module line for line; with the same seed the two
produce bit-identical streams, which a test asserts.

Everything here sticks to ``math`` and plain floats so the fallback has no
dependencies.
"""

from __future__ import annotations

import math
from array import array
from math import cos, exp, expm1, fabs, log, log1p, sin, sqrt

from fpss._zeta import Q64, QD64, QF64, QV64

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

BACKEND = "pure"

PI = math.pi
TWO_PI = 6.283185307179586
_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# ln-of-sinc series are used below this cut, closed forms above it; 64 terms
# of the zeta series reach ~1e-21 relative at 2.2 (ratio (2.2/pi)^2 ~ 0.49).
SERIES_CUT = 2.2
_EPS_BREAK = 1e-17
_INF = math.inf


# ---------------------------------------------------------------------------
# RNG: xoshiro256** with splitmix64 stream derivation
# ---------------------------------------------------------------------------


def _rotl(x: int, k: int) -> int:
    return ((x << k) & _MASK) | (x >> (64 - k))


def _splitmix_next(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z, state


class Rng:
    """Seeded uniform stream with substreams and a raw-draw counter.

    Stream k of seed s is derived by perturbing the splitmix64 state with
    k times the golden-gamma constant before expanding to the xoshiro256**
    state, so (seed, stream) pairs give independent-looking sequences and the
    same pair always gives the same sequence, on either backend.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "n_draws")

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative integers")
        st = (int(seed) + _GOLDEN * int(stream)) & _MASK
        s0, st = _splitmix_next(st)
        s1, st = _splitmix_next(st)
        s2, st = _splitmix_next(st)
        s3, st = _splitmix_next(st)
        if s0 == 0 and s1 == 0 and s2 == 0 and s3 == 0:
            s0 = _GOLDEN
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        self.n_draws = 0

    def _next64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def u(self) -> float:
        """Uniform on the open interval (0, 1)."""
        self.n_draws += 1
        return ((self._next64() >> 11) + 0.5) * 1.1102230246251565e-16

    def exp1(self) -> float:
        """Standard exponential."""
        return -log(self.u())

    def normal(self) -> float:
        """Standard normal (Box-Muller, two uniforms per call)."""
        a = self.u()
        b = self.u()
        return sqrt(-2.0 * log(a)) * cos(TWO_PI * b)

    def state(self) -> tuple[int, int, int, int]:
        return (self._s0, self._s1, self._s2, self._s3)


# ---------------------------------------------------------------------------
# sinc-logarithm family
# ---------------------------------------------------------------------------


def _sinc(x: float) -> float:
    return sin(x) / x if x != 0.0 else 1.0


def ln_sinc(x: float) -> float:
    """ln(sin(x)/x) with sinc(0) = 1, for |x| <= pi."""
    x = fabs(x)
    if x <= 1.0:
        x2 = x * x
        tp = 1.0
        acc = 0.0
        for q in Q64:
            tp *= x2
            t = q * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return -acc
    if x < PI:
        return log(sin(x) / x)
    if x == PI:
        return -_INF
    raise ValueError(f"ln_sinc needs |x| <= pi, got {x}")


def g_cot(x: float) -> float:
    """cot(x) - 1/x (the small-x cancellation is handled by series)."""
    ax = fabs(x)
    if ax <= 1.0:
        x2 = x * x
        tp = 1.0
        acc = 0.0
        for qd in QD64:
            t = qd * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
            tp *= x2
        return -x * acc
    return cos(x) / sin(x) - 1.0 / x


def lnsinc_diff(x1: float, x2: float, amp: float, amp_dx: float) -> float:
    """amp * (ln_sinc(x2) - ln_sinc(x1)), stable for huge amp.

    ``amp_dx`` must equal amp*(x2 - x1) computed without cancellation (the
    callers know this product in closed form).  Three regimes: a joint series
    with the difference factored out exactly; a direct difference when amp is
    small enough not to amplify rounding; a ratio/log1p form when amp is large
    but both arguments sit in the closed-form region.
    """
    ax = fabs(x1)
    ax2 = fabs(x2)
    if ax2 > ax:
        ax = ax2
    if ax <= SERIES_CUT:
        # sum_n q_n amp_dx S_{2n-1},  S_m = sum_{j<=m} x2^j x1^(m-j)
        s = 1.0
        x1p = 1.0
        acc = 0.0
        for q in Q64:
            x1p *= x1
            s = x2 * s + x1p
            t = q * s
            acc += t
            if t < _EPS_BREAK * acc:
                break
            x1p *= x1
            s = x2 * s + x1p
        return -amp_dx * acc
    if amp <= 100.0:
        return amp * (ln_sinc(x2) - ln_sinc(x1))
    d = x2 - x1
    if d == 0.0:
        return 0.0
    sx1 = sin(x1)
    half = 0.5 * d
    sc = _sinc(half)
    bracket = x1 * cos(x1) * _sinc(d) - sx1 - half * x1 * sx1 * sc * sc
    base = bracket / (x2 * sx1)
    r = d * base
    if r == 0.0:
        return amp_dx * base
    return amp_dx * base * (log1p(r) / r)


def ln_h(theta: float, alpha: float, delta: float, coef) -> float:
    """ln H_alpha(theta) on [0, pi); coef is the per-alpha series table."""
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for c in coef:
            tp *= t2
            t = c * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return (
        ln_sinc(delta * theta)
        - ln_sinc(theta)
        + lnsinc_diff(theta, alpha * theta, alpha / delta, -alpha * theta)
    )


def dlnh_raw(theta: float, alpha: float, delta: float, dcoef) -> float:
    """d/dtheta ln H_alpha(theta), best-effort two-sided accuracy."""
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for c in dcoef:
            t = c * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
            tp *= t2
        return theta * acc
    st = sin(theta)
    sat = sin(alpha * theta)
    return (
        delta * g_cot(delta * theta)
        - (1.0 + alpha) * g_cot(theta)
        + alpha * alpha * theta * _sinc(delta * theta) / (sat * st)
        - alpha / theta
    )


def lnh1(theta: float) -> float:
    """ln H_1(theta) = theta^2/2 + V_1(theta)."""
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for qv in QV64:
            tp *= t2
            t = qv * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return 1.0 - theta * cos(theta) / sin(theta) - ln_sinc(theta)


def v1(theta: float) -> float:
    """V_1(theta) = ln H_1(theta) - theta^2/2 (nonnegative, increasing)."""
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = t2
        acc = 0.0
        for i in range(1, len(QV64)):
            tp *= t2
            t = QV64[i] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return lnh1(theta) - 0.5 * theta * theta


def f_slope(theta: float) -> float:
    """f(theta) = theta * (ln H_1)'(theta) = 1 + sinc^-2 - 2 cos/sinc."""
    if theta <= 0.0:
        return 0.0
    if theta <= 1.0:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for qf in QF64:
            tp *= t2
            t = qf * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    st = sin(theta)
    return 1.0 + theta * theta / (st * st) - 2.0 * theta * cos(theta) / st


def _exp(x: float) -> float:
    """exp with C semantics: saturates to inf instead of raising."""
    if x > 709.782712893384:
        return _INF
    return exp(x)


def _softplus(x: float) -> float:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


# ---------------------------------------------------------------------------
# elementary samplers
# ---------------------------------------------------------------------------


def sample_m(rng: Rng, s: float) -> float:
    """Draw theta with density proportional to exp(-s theta^2/2) on (0, pi)."""
    if s <= 1.0:
        while True:
            th = PI * rng.u()
            if log(rng.u()) <= -0.5 * s * th * th:
                return th
    invs = 1.0 / sqrt(s)
    while True:
        th = fabs(rng.normal()) * invs
        if th < PI:
            return th


def sample_E(rng: Rng, t: float) -> float:
    """Draw from density (t/2) min(1, e^(1 - t x)) on (0, infinity)."""
    u = 2.0 * rng.u()
    if u <= 1.0:
        return u / t
    return (1.0 - log(2.0 - u)) / t


def _gamma_mt(rng: Rng, a: float) -> float:
    """Marsaglia-Tsang for shape a >= 1 (returns the draw itself)."""
    d = a - 1.0 / 3.0
    c = 1.0 / (3.0 * sqrt(d))
    while True:
        x = rng.normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = rng.u()
        xx = x * x
        if u < 1.0 - 0.0331 * xx * xx:
            return d * v
        if log(u) < 0.5 * xx + d - d * v + d * log(v):
            return d * v


def gamma_ln(rng: Rng, a: float, lgamma_a: float) -> float:
    """ln of a Gamma(a, 1) draw, exact for any shape down to ~1e-14.

    Shapes below 0.02 are drawn directly in log scale: V = ln X has density
    exp(a v - e^v)/Gamma(a), a log-concave curve with mode at ln a, enveloped
    two-sidedly by its modal value times min(1, e^(1 - f* |v - v*|)); the
    acceptance rate is exactly 1/4 independent of a.
    """
    if a >= 1.0:
        return log(_gamma_mt(rng, a))
    if a >= 0.02:
        g = _gamma_mt(rng, a + 1.0)
        return log(g) + log(rng.u()) / a
    vstar = log(a)
    lnf = a * vstar - a - lgamma_a
    fstar = exp(lnf)
    while True:
        side = rng.u()
        u2 = 2.0 * rng.u()
        w = (u2 if u2 <= 1.0 else 1.0 - log(2.0 - u2)) / fstar
        v = vstar - w if side < 0.5 else vstar + w
        if v >= 700.0:
            # e^v overflows and the target is zero beyond any doubt: reject
            continue
        ln_target = a * v - exp(v) - lgamma_a
        ln_env = lnf + min(0.0, 1.0 - fstar * w)
        if log(rng.u()) <= ln_target - ln_env:
            return v


# ---------------------------------------------------------------------------
# chi rejection loops
# ---------------------------------------------------------------------------


def chi_A(rng, alpha, delta, ln_z, coef, lgd, lo, hi):
    """Chi draw via the Gaussian-angle envelope (efficient for z >~ 1).

    Returns (ln_y, theta, n_outer, n_inner, max_d_inner, max_d_outer) where
    the max_d's track the largest observed ln(target/envelope) over exact
    evaluations; both must stay <= 0 up to rounding.  ``lo``/``hi`` are
    optional per-bin acceptance bound tables (pass None to force exact
    evaluation everywhere, used by the dominance audit).
    """
    ln_delta = log(delta)
    ln_alpha = log(alpha)
    z = _exp(ln_z)
    s_m = alpha * z
    ln_r = _softplus(ln_delta - ln_z) + alpha * ln_z
    cap = log1p(alpha * PI * PI / 2.0)
    if -ln_z > cap:
        ln_r += -ln_z
    else:
        ln_r += cap
    audit = lo is None
    nbins = 0 if audit else len(lo)
    k_over_pi = nbins / PI
    n_outer = 0
    n_inner = 0
    max_di = -_INF
    max_do = -_INF
    while True:
        n_outer += 1
        # inner: theta against the angular envelope
        while True:
            n_inner += 1
            th = sample_m(rng, s_m)
            lhs = log(rng.u()) + ln_r - (1.0 + 0.5 * alpha * th * th) * z
            lnh_val = -1.0
            if not audit:
                i = int(th * k_over_pi)
                if i >= nbins:
                    i = nbins - 1
                if lhs <= lo[i]:
                    break
                if lhs > hi[i]:
                    continue
            lnh_val = ln_h(th, alpha, delta, coef)
            ln_tau = ln_z + lnh_val
            tau = _exp(ln_tau)
            rhs = alpha * ln_tau - tau + _softplus(ln_delta - ln_tau)
            d = rhs - ln_r + (1.0 + 0.5 * alpha * th * th) * z
            if d > max_di:
                max_di = d
            if lhs <= rhs:
                break
        if lnh_val < 0.0:
            lnh_val = ln_h(th, alpha, delta, coef)
        ln_tau = ln_z + lnh_val
        tau = _exp(ln_tau)
        # y | theta: gamma mixture with weight delta/(tau+delta) on shape 1+delta
        w = delta / (tau + delta)
        shape = 1.0 + delta if rng.u() < w else delta
        ln_y = gamma_ln(rng, shape, lgd) - ln_tau
        ln1py = _softplus(ln_y)
        u2l = log(rng.u())
        if audit:
            omp = -expm1(-(delta / alpha) * ln1py)
            # omp == 0 happens only when y underflows, where R -> 1 exactly
            ln_R = ln_delta - ln_alpha + ln_y - log(omp) if omp > 0.0 else 0.0
            d2 = alpha * ln_R - ln1py
            if d2 > max_do:
                max_do = d2
            if u2l + ln1py <= alpha * ln_R:
                return (ln_y, th, n_outer, n_inner, max_di, max_do)
        else:
            if u2l + ln1py <= 0.0:
                return (ln_y, th, n_outer, n_inner, max_di, max_do)
            omp = -expm1(-(delta / alpha) * ln1py)
            ln_R = ln_delta - ln_alpha + ln_y - log(omp) if omp > 0.0 else 0.0
            if u2l + ln1py <= alpha * ln_R:
                return (ln_y, th, n_outer, n_inner, max_di, max_do)


def chi_B(rng, alpha, delta, ln_z, coef, lgd, lo, hi):
    """Chi draw via the flat-angle envelope (works for any z > 0).

    Same return convention as chi_A.
    """
    ln_delta = log(delta)
    ln_alpha = log(alpha)
    lgd1 = _softplus(lgd)  # ln(Gamma(delta) + 1)
    ln_c2 = ln_alpha - ln_delta
    if ln_c2 < 0.0:
        ln_c2 = 0.0
    ln_ca = alpha * (ln_alpha - ln_delta)
    audit = lo is None
    nbins = 0 if audit else len(lo)
    k_over_pi = nbins / PI
    n_outer = 0
    n_inner = 0
    max_di = -_INF
    max_do = -_INF
    while True:
        n_outer += 1
        while True:
            n_inner += 1
            th = PI * rng.u()
            lhs = log(rng.u()) + lgd1
            lnh_val = -1.0
            if not audit:
                i = int(th * k_over_pi)
                if i >= nbins:
                    i = nbins - 1
                if lhs <= lo[i]:
                    break
                if lhs > hi[i]:
                    continue
            lnh_val = ln_h(th, alpha, delta, coef)
            ln_tau = ln_z + lnh_val
            tau = _exp(ln_tau)
            rhs = _softplus(lgd + alpha * ln_tau) - tau
            d = rhs - lgd1
            if d > max_di:
                max_di = d
            if lhs <= rhs:
                break
        if lnh_val < 0.0:
            lnh_val = ln_h(th, alpha, delta, coef)
        ln_tau = ln_z + lnh_val
        tau = _exp(ln_tau)
        # y | theta: mixture of Gamma(delta, tau) and Exp(tau) with weight
        # 1/(Gamma(delta) tau^alpha + 1) on the exponential part
        arg = lgd + alpha * ln_tau
        wstar = exp(-_softplus(arg))
        if rng.u() < wstar:
            ln_y = log(rng.exp1()) - ln_tau
        else:
            ln_y = gamma_ln(rng, delta, lgd) - ln_tau
        ln1py = _softplus(ln_y)
        omp = -expm1(-(delta / alpha) * ln1py)
        ln_R = ln_delta - ln_alpha + ln_y - log(omp) if omp > 0.0 else 0.0
        d2 = alpha * ln_R - ln_c2 + ln_ca - _softplus(alpha * ln_y)
        if d2 > max_do:
            max_do = d2
        if log(rng.u()) <= d2:
            return (ln_y, th, n_outer, n_inner, max_di, max_do)


# ---------------------------------------------------------------------------
# steep-angle piecewise sampler (packed-grid kernel)
# ---------------------------------------------------------------------------
#
# chi_P consumes a grid packed by fpss.chi_p into three double arrays:
#
# hdr: 0 alpha, 1 delta, 2 ln_alpha, 3 ln_delta, 4 ln_c_alpha, 5 ln_kappa1,
#      6 ln_kappa2, 7 ln_z, 8 u_split, 9 ln_tau_split, 10 ln_xi_split,
#      11 ln_ratio_tol, 12 ln(1+gap), 13 ln_kappa2 + alpha*ln_delta,
#      14 audit flag, 15 reserved
#
# pp (stride 64 per piece), pp[o] is the kind tag:
#   flat (0): 1 lo, 2 hi, 3 ln_env
#   tail (2): 1 ln_h, 2 r
#   mid  (1): 1 wide, 2 c, 3 d, 4 delta*(d-c), 5 ln_pi, 6 u_hi, 7 u_lo,
#             8 ln_xi_n, 9 w1, 10 w1+w2, 11 has-branch-1, 12 e1_const,
#             13 shift1, 14 e3_coef,
#             16..23 the shape>=1 gamma-kernel envelope
#                 (c, A, B, ln_g_left, ln_g_right, ln_total, s_left, s_right),
#             26 sub-envelope-2 selector, then either
#                 27..32 shape<1 gamma-kernel (a, c, ln_g, ln_total, s_pow,
#                        a_pow-1), or
#                 27..47 power-mixture envelope in the 21-slot layout of
#                        _ps_init0 below.
#
# cum: cumulative piece-selection probabilities, cum[-1] = 1.0.

# tail ratio capping the k=8 weight of the 9-term power mixture:
# (e^4 - sum_{k<=7} 4^k/k!) * 8!/4^8, embedded as a literal so both backends
# carry bit-identical arithmetic
_R74 = 1.7176118367977251
_LN_R74 = 0.5409348590338424
_LN2 = 0.6931471805599453
_LN4 = 1.3862943611198906
_LN_PI = 1.1447298858494002
# ln Gamma(k+1) for k = 0..8, frozen to the interpreter's lgamma outputs
# (libm log(k!) differs in the last ulp for several k)
_LGK = (
    0.0,
    0.0,
    0.693147180559945,
    1.7917594692280554,
    3.178053830347945,
    4.787491742782047,
    6.579251212010102,
    8.525161361065415,
    10.604602902745249,
)
# acceptance ratios past 1 + 1e-10 count as envelope violations
_STRICT = 9.999999999500001e-11
# sub-envelope draws signal "outside the support, auto-reject" with +inf,
# which no genuine log-scale draw can produce
_REJECT = _INF


def _lse2(x: float, y: float) -> float:
    m = x if x > y else y
    if m == -_INF:
        return -_INF
    if m == _INF:
        return _INF
    return m + log(exp(x - m) + exp(y - m))


def _lse3(x: float, y: float, z: float) -> float:
    m = x if x > y else y
    if z > m:
        m = z
    if m == -_INF:
        return -_INF
    if m == _INF:
        return _INF
    return m + log(exp(x - m) + exp(y - m) + exp(z - m))


def _log1mexp(x: float) -> float:
    """ln(1 - e^x) for x <= 0 (-inf at 0)."""
    if x >= 0.0:
        if x == 0.0:
            return -_INF
        raise ValueError(f"log1mexp needs x <= 0, got {x}")
    if x > -0.693:
        return log(-expm1(x))
    return log1p(-exp(x))


def _ln_expm1(x: float) -> float:
    """ln(e^x - 1) for x >= 0 (-inf at 0)."""
    if x <= 0.0:
        if x == 0.0:
            return -_INF
        raise ValueError(f"ln_expm1 needs x >= 0, got {x}")
    if x > 0.693:
        return x + log1p(-exp(-x))
    return log(expm1(x))


def _ln_expm1_mx(x: float) -> float:
    """ln(e^x - 1 - x) for x >= 0."""
    if x == 0.0:
        return -_INF
    if x < 0.5:
        acc = 0.0
        t = 1.0
        j = 0
        while t > 1e-18 * acc or j == 0:
            acc += t
            t *= x / (j + 3)
            j += 1
        return log(x * x / 2.0) + log(acc)
    if x <= 700.0:
        return log(expm1(x) - x)
    return x + log1p(-(1.0 + x) * exp(-x))


def _ln_ell_inv(ln_tau: float) -> float:
    """ln of log1p(e^(-ln_tau)), stable at both ends."""
    if ln_tau >= 35.0:
        return -ln_tau
    if ln_tau <= -35.0:
        return log(-ln_tau)
    return log(log1p(exp(-ln_tau)))


def _ln_psi(ln_tau, ln_k1, ln_k2, alpha, delta) -> float:
    """ln of the angular normalizer majorant psi at tau = e^(ln_tau)."""
    ln_ell = _ln_ell_inv(ln_tau)
    t1 = -_INF if ln_k1 == -_INF else ln_k1 + ln_tau + delta * ln_ell
    return _lse3(t1, ln_k2 - alpha * ln_ell, 0.0)


def _ln_XI_u(u, alpha, delta, ln_alpha) -> float:
    """ln XI at theta = pi - u: the bounded part of ln H near pi."""
    dth = delta * (PI - u)
    t = lnsinc_diff(u, u + dth, alpha / delta, alpha * (PI - u))
    lnxi = ln_sinc(dth) - ln_sinc(u) + t
    theta = PI - u
    return lnxi + log(theta) + ln_alpha - log(alpha * u + delta * PI)


def _ln_tfd(u_from, dx, alpha, delta) -> float:
    """Growth of the tail factor of ln H from u_from to u_from - dx."""
    u_to = u_from - dx
    if u_to <= 0.0:
        return _INF
    if dx == 0.0:
        return 0.0
    y = delta * PI * dx / (u_to * (alpha * u_from + delta * PI))
    return log1p(y) / delta


def _ln_E(s: float, x: float) -> float:
    """ln of the half-exponential envelope density E_s at x."""
    if x < 0.0 or s <= 0.0:
        return -_INF
    return log(s / 2.0) + min(0.0, 1.0 - s * x)


def _ln_pow_diff(a: float, b: float, p: float) -> float:
    if a == 0.0:
        return p * log(b)
    return p * log(a) + _ln_expm1(p * log1p((b - a) / a))


def _ln_M(a: float, b: float, c: float) -> float:
    """ln of the mass bound for x^(c-1) e^x on (a, b]."""
    if a >= b:
        return -_INF
    term1 = _ln_pow_diff(a, b, c) - log(c)
    lb = _LN2 + (c - 1.0) * log(b) + _ln_expm1_mx(b)
    if a == 0.0:
        bracket = lb
    else:
        la = _LN2 + (c - 1.0) * log(a) + _ln_expm1_mx(a)
        bracket = lb + _log1mexp(la - lb)
    return _lse2(term1, bracket)


def _ps_init0(b: float, c: float):
    """Power-mixture envelope fields for the interval (0, b], shape c in (0,1).

    21-slot layout: 0 a, 1 b, 2 c, 3 p_c, 4 A, 5 ln_m_left, 6 ln_m_right,
    7 ln_total, 8 ln_w_sum, 9 b_pow, 10 ln_s, 11 ln_b, 12..20 ln_w[0..8].
    """
    root = sqrt(1.0 - c)
    x_c = (1.0 + root) ** 2
    p_c = 1.0 / (1.0 + root)
    A = b if b <= x_c else x_c
    B = x_c
    ln_m_left = _ln_M(0.0, A, c)
    ln_m_right = _ln_M(B, b, c)
    ln_total = _LN2 + _lse2(ln_m_left, ln_m_right)
    ps = [0.0] * 21
    m = -_INF
    for k in range(9):
        p = k + c
        lw = p * log(A) - log(p) - _LGK[k]
        if k == 8:
            lw += _LN_R74
        ps[12 + k] = lw
        if lw > m:
            m = lw
    acc = 0.0
    for k in range(9):
        acc += exp(ps[12 + k] - m)
    ln_w_sum = m + log(acc)
    if not ln_w_sum <= _LN2 + ln_m_left + 1e-9:
        raise AssertionError(f"mixture mass above its envelope bound: {ln_w_sum}")
    if ln_m_right > -_INF:
        b_pow = b ** (1.0 / p_c)
        ln_s = log(p_c) + (c - 1.0 / p_c) * log(b) + b - ln_m_right
    else:
        b_pow = 0.0
        ln_s = -_INF
    ps[0] = 0.0
    ps[1] = b
    ps[2] = c
    ps[3] = p_c
    ps[4] = A
    ps[5] = ln_m_left
    ps[6] = ln_m_right
    ps[7] = ln_total
    ps[8] = ln_w_sum
    ps[9] = b_pow
    ps[10] = ln_s
    ps[11] = log(b)
    return ps


def _ps_sample(rng, ps) -> float:
    """ln X from the normalized power-mixture envelope; +inf auto-rejects."""
    a = ps[0]
    c = ps[2]
    pick_right = log(rng.u()) > ps[5] - (ps[7] - _LN2)
    if not pick_right:
        m = ps[12]
        for k in range(13, 21):
            if ps[k] > m:
                m = ps[k]
        total = 0.0
        for k in range(9):
            total += exp(ps[12 + k] - m)
        u = rng.u() * total
        acc = 0.0
        kk = 8
        for k in range(9):
            acc += exp(ps[12 + k] - m)
            if u <= acc:
                kk = k
                break
        p = kk + c
        v = rng.u()
        if a == 0.0:
            return log(ps[4]) + log(v) / p
        grow = expm1(p * log1p((ps[4] - a) / a)) * v
        return log(a) + log1p(grow) / p
    y = sample_E(rng, exp(ps[10]))
    d = ps[9] - y
    if d <= 0.0:
        return _REJECT
    return ps[3] * log(d)


def _ps_eval_tilted(ps, ln_x: float) -> float:
    """ln of x^(1-c) times the power-mixture envelope density at e^(ln_x)."""
    x = exp(ln_x)
    a = ps[0]
    c = ps[2]
    p_c = ps[3]
    p1 = -_INF
    in_left = (
        ps[5] > -_INF
        and (x > a or (a == 0.0 and ln_x > -_INF))
        and ln_x <= log(ps[4]) + 1e-9
    )
    if in_left:
        acc = 0.0
        t = 1.0
        for k in range(8):
            acc += t
            t *= x / (k + 1.0)
        acc += _R74 * t
        p1 = _LN2 + ps[5] + log(acc) - ps[8]
    p2 = -_INF
    if ps[6] > -_INF:
        t_arg = ps[9] - exp(ln_x / p_c)
        if t_arg < 0.0 and ln_x <= ps[11] + 1e-9:
            t_arg = 0.0
        le = _ln_E(exp(ps[10]), t_arg)
        if le > -_INF:
            p2 = _LN2 + ps[6] - log(p_c) + (1.0 / p_c - c) * ln_x + le
    if p1 == -_INF and p2 == -_INF:
        return -_INF
    return _lse2(p1, p2)


def _ps_eval(ps, ln_x: float) -> float:
    return (ps[2] - 1.0) * ln_x + _ps_eval_tilted(ps, ln_x)


def _g1_sample(rng, pp, o) -> float:
    """ln X from the packed shape>=1 gamma-kernel envelope; +inf auto-rejects."""
    go_left = log(rng.u()) <= pp[o + 19] - (pp[o + 21] - _LN2)
    if go_left:
        x = pp[o + 17] - sample_E(rng, pp[o + 22])
        if x <= 0.0:
            return _REJECT
        return log(x)
    return log(pp[o + 18] + sample_E(rng, pp[o + 23]))


def _g1_eval(pp, o, ln_x: float) -> float:
    x = exp(ln_x)
    A = pp[o + 17]
    B = pp[o + 18]
    p1 = -_INF
    if pp[o + 19] > -_INF:
        arg = A - x
        if arg < 0.0 and ln_x <= log(A) + 1e-9:
            arg = 0.0
        le = _ln_E(pp[o + 22], arg)
        if le > -_INF:
            p1 = _LN2 + pp[o + 19] + le
    p2 = -_INF
    if pp[o + 20] > -_INF:
        arg = x - B
        if arg < 0.0 and (B == 0.0 or ln_x >= log(B) - 1e-9):
            arg = 0.0
        le = _ln_E(pp[o + 23], arg)
        if le > -_INF:
            p2 = _LN2 + pp[o + 20] + le
    if p1 == -_INF and p2 == -_INF:
        return -_INF
    return _lse2(p1, p2)


def _g2g_sample(rng, pp, o) -> float:
    """ln X from the packed shape<1 gamma-kernel envelope."""
    z = sample_E(rng, pp[o + 31])
    a = pp[o + 27]
    if a > 0.0:
        return log1p(pp[o + 32] + z) / pp[o + 28]
    return log(z) / pp[o + 28]


def _g2g_eval(pp, o, ln_x: float) -> float:
    a = pp[o + 27]
    cc = pp[o + 28]
    if a > 0.0:
        t_arg = expm1(cc * ln_x) - pp[o + 32]
    else:
        t_arg = exp(cc * ln_x)
    if t_arg < 0.0 and (a == 0.0 or ln_x >= log(a) - 1e-9):
        t_arg = 0.0
    le = _ln_E(pp[o + 31], t_arg)
    if le == -_INF:
        return -_INF
    return _LN2 + log(cc) + pp[o + 29] + (cc - 1.0) * ln_x + le


def chi_P(rng, hdr, pp, cum, coef):
    """One draw from the steep-angle piecewise sampler over a packed grid.

    Returns (ln_y, theta, u, ln_tau, rounds, angle_proposals,
    max_angle_ln_ratio, max_joint_ln_ratio, ratio_violations); the counters
    cover this call only.  Raises RuntimeError when an acceptance ratio
    breaks the certified envelope bound beyond the packed tolerance.
    """
    alpha = hdr[0]
    delta = hdr[1]
    ln_alpha = hdr[2]
    ln_delta = hdr[3]
    ln_c_alpha = hdr[4]
    ln_k1 = hdr[5]
    ln_k2 = hdr[6]
    ln_z = hdr[7]
    u_split = hdr[8]
    ln_tau_split = hdr[9]
    ln_xi_split = hdr[10]
    tol = hdr[11]
    ln1p_gap = hdr[12]
    e2_const = hdr[13]
    audit = hdr[14] != 0.0
    npieces = len(cum)
    rounds = 0
    angle_props = 0
    max_a = -_INF
    max_j = -_INF
    nviol = 0
    while True:
        rounds += 1

        # ---- angle stage: theta against the piecewise envelope ----
        while True:
            angle_props += 1
            pv = rng.u()
            lo_i = 0
            hi_i = npieces
            while lo_i < hi_i:
                mid_i = (lo_i + hi_i) >> 1
                if pv < cum[mid_i]:
                    hi_i = mid_i
                else:
                    lo_i = mid_i + 1
            o = lo_i * 64
            kind = pp[o]
            lr = -_INF
            theta = 0.0
            u_t = 0.0
            ln_tau = 0.0
            ok = True
            if kind == 0.0:
                theta = pp[o + 1] + rng.u() * (pp[o + 2] - pp[o + 1])
                u_t = PI - theta
                ln_tau = ln_z + ln_h(theta, alpha, delta, coef)
                if ln_tau > 709.0:
                    lq = -_INF
                else:
                    lq = _ln_psi(ln_tau, ln_k1, ln_k2, alpha, delta) - exp(ln_tau)
                lr = lq - pp[o + 3]
            elif kind == 1.0:
                wide = pp[o + 1] != 0.0
                c_t = pp[o + 2]
                d_t = pp[o + 3]
                x = rng.u()
                if x < pp[o + 9]:
                    lx = _g1_sample(rng, pp, o)
                    if lx == _REJECT:
                        ok = False
                    else:
                        ln_t = lx - pp[o + 13]
                        t = exp(ln_t)
                elif x < pp[o + 10]:
                    if pp[o + 26] != 0.0:
                        lx = _ps_sample(rng, pp[o + 27 : o + 48])
                    else:
                        lx = _g2g_sample(rng, pp, o)
                    if lx == _REJECT:
                        ok = False
                    else:
                        ln_t = lx - ln_delta
                        t = exp(ln_t)
                else:
                    w = pp[o + 4]
                    uu = rng.u()
                    if wide:
                        t = c_t - log1p((1.0 - uu) * expm1(-w)) / delta
                    else:
                        t = d_t + log1p((1.0 - uu) * expm1(-w)) / delta
                    ln_t = log(t)
                if ok and c_t < t <= d_t:
                    ln_ey = _ln_expm1(t)
                    s_t = -ln_z - pp[o + 8] - ln_ey
                    ds = delta * s_t
                    scale = delta * PI / alpha
                    u_t = scale * exp(-ds) if ds > 350.0 else scale / expm1(ds)
                    if pp[o + 7] < u_t <= pp[o + 6]:
                        theta = PI - u_t
                        ln_jac = (
                            log(u_t)
                            + log(alpha * u_t + delta * PI)
                            - _LN_PI
                            - _log1mexp(-t)
                        )
                        if pp[o + 11] == 0.0:
                            e1 = -_INF
                        else:
                            e1 = pp[o + 12] + _g1_eval(pp, o, ln_t + pp[o + 13])
                        if pp[o + 26] != 0.0:
                            ev2 = _ps_eval(pp[o + 27 : o + 48], ln_t + ln_delta)
                        else:
                            ev2 = _g2g_eval(pp, o, ln_t + ln_delta)
                        e2 = e2_const + ev2
                        e3 = pp[o + 14] * t
                        ln_env = ln1p_gap + pp[o + 5] + _lse3(e1, e2, e3) - ln_jac
                        ln_tau = (
                            _ln_XI_u(u_t, alpha, delta, ln_alpha) - pp[o + 8]
                        ) - ln_ey
                        lq = _ln_psi(ln_tau, ln_k1, ln_k2, alpha, delta) - exp(
                            ln_tau
                        )
                        lr = lq - ln_env
                    else:
                        ok = False
                else:
                    ok = False
            else:
                z_x = sample_E(rng, pp[o + 2])
                u_t = u_split - z_x
                if u_t <= 0.0:
                    ok = False
                else:
                    theta = PI - u_t
                    ln_env = pp[o + 1] + min(0.0, 1.0 - pp[o + 2] * z_x)
                    ln_tau = (
                        ln_tau_split
                        + (_ln_XI_u(u_t, alpha, delta, ln_alpha) - ln_xi_split)
                        + _ln_tfd(u_split, z_x, alpha, delta)
                    )
                    if ln_tau > 709.0:
                        lq = -_INF
                    else:
                        lq = _ln_psi(ln_tau, ln_k1, ln_k2, alpha, delta) - exp(
                            ln_tau
                        )
                    lr = lq - ln_env
            if not ok:
                continue
            if lr > max_a:
                max_a = lr
            if lr > _STRICT:
                nviol += 1
            if lr > tol:
                raise RuntimeError(
                    f"envelope domination broken: ln ratio {lr:.3e} "
                    f"(tolerance {tol:.3e}, angle stage)"
                )
            if lr == -_INF:
                continue
            if lr >= 0.0 or log(rng.u()) <= lr:
                break

        # ---- joint stage: y | theta against the factorized envelope ----
        ln_b = _ln_ell_inv(ln_tau)
        b = _softplus(-ln_tau)
        ps = _ps_init0(b, delta)
        ln_i0 = ps[7]
        ln_i1 = -1.0 - ln_tau - alpha * ln_b
        ln_i2 = -ln_c_alpha - ln_tau
        if audit:
            q = 2.0 / delta - 4.0
            closed = _lse2(
                _LN4 - ln_tau - alpha * ln_b,
                log(q) + delta * ln_b if q > 0.0 else -_INF,
            )
            if fabs(closed - ln_i0) > 1e-9 * (1.0 + fabs(closed)):
                raise RuntimeError(
                    f"power-branch mass drifted from its closed form: "
                    f"{ln_i0} vs {closed}"
                )
        total = _lse3(ln_i0, ln_i1, ln_i2)
        x = rng.u()
        if x < exp(ln_i0 - total):
            lv = _ps_sample(rng, ps)
            if lv == _REJECT:
                continue
            ln_v = lv
            v = exp(lv)  # 0.0 is fine: v only enters sums with tau_y
            ln_y = _ln_expm1(v) if ln_v > -40.0 else ln_v
            arg = ln_tau + ln_y
            if arg > 709.0:
                continue
            tau_y = exp(arg)
        else:
            # tau*y is exactly exponential (shifted by 1 on the middle
            # branch), which keeps tau_y - v exact where it matters
            tau_y = rng.exp1()
            if x < exp(ln_i0 - total) + exp(ln_i1 - total):
                tau_y += 1.0
            ln_y = log(tau_y) - ln_tau
            v = _softplus(ln_y)
            ln_v = log(v)
        # the singular factors [1-e^(-w)]^(-alpha) and the power envelope are
        # both carried tilted by v^alpha, which cancels their common
        # v^(-alpha) blowup: what remains is rho = [w/(1-e^(-w))]^alpha -> 1
        ln_w = ln_delta - ln_alpha + ln_v
        w = exp(ln_w)
        if w < 1e-4:
            ln_rho = alpha * (0.5 * w - w * w / 24.0)
        else:
            ln_rho = alpha * (ln_w - _log1mexp(-w))
        ln_phi_t = _ps_eval_tilted(ps, ln_v)
        if tau_y >= 1.0:
            flat = _lse2(-alpha * ln_b, -ln_c_alpha)
        else:
            flat = -ln_c_alpha
        lr = -alpha + ln_rho - _lse2(tau_y - v + ln_phi_t, alpha * ln_v + flat)
        if lr > max_j:
            max_j = lr
        if lr > _STRICT:
            nviol += 1
        if lr > tol:
            raise RuntimeError(
                f"envelope domination broken: ln ratio {lr:.3e} "
                f"(tolerance {tol:.3e}, joint stage)"
            )
        if lr == -_INF:
            continue
        if lr >= 0.0 or log(rng.u()) <= lr:
            return (ln_y, theta, u_t, ln_tau, rounds, angle_props, max_a, max_j, nviol)


# ---------------------------------------------------------------------------
# scale-variable draws and tables
# ---------------------------------------------------------------------------


def draw_lnz(rng, alpha, delta, coef) -> float:
    """ln z for the first-passage scale variable: z = xi / H(Theta)."""
    th = PI * rng.u()
    xi = rng.exp1()
    return log(xi) - ln_h(th, alpha, delta, coef)


def count_lnz_below(rng, n, threshold, alpha, delta, coef) -> int:
    c = 0
    for _ in range(n):
        if draw_lnz(rng, alpha, delta, coef) <= threshold:
            c += 1
    return c


def lnh_table(alpha, delta, coef, nbins):
    """ln H at the nbins+1 edges of an equispaced grid on [0, pi].

    Monotone, with table[0] = 0 and table[nbins] = +inf, so bin i brackets
    ln H on [i pi/nbins, (i+1) pi/nbins].
    """
    tab = array("d", bytes(8 * (nbins + 1)))
    step = PI / nbins
    for i in range(1, nbins):
        tab[i] = ln_h(i * step, alpha, delta, coef)
    tab[nbins] = _INF
    return tab
