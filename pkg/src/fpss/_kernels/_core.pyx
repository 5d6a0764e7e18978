# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend: line-for-line mirror of ``_pure``.

Same RNG, same arithmetic, same branch structure, so given the same seed the
two backends emit bit-identical samples.  The build disables FP contraction
(-ffp-contract=off) to keep the arithmetic order exactly IEEE.
"""

from libc.stdint cimport uint64_t
from libc.math cimport (cos, exp, expm1, fabs, log, log1p, pow, sin, sqrt,
                        INFINITY)

from fpss._zeta import Q64 as _Q64_py, QD64 as _QD64_py, QF64 as _QF64_py, QV64 as _QV64_py

BACKEND = "core"

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586
cdef double SERIES_CUT = 2.2
cdef double _EPS_BREAK = 1e-17

cdef double[64] _Q
cdef double[64] _QD
cdef double[64] _QV
cdef double[64] _QF
cdef int _i
for _i in range(64):
    _Q[_i] = _Q64_py[_i]
    _QD[_i] = _QD64_py[_i]
    _QV[_i] = _QV64_py[_i]
    _QF[_i] = _QF64_py[_i]

_PY_GOLDEN = 0x9E3779B97F4A7C15
_PY_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# RNG
# ---------------------------------------------------------------------------

cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef class Rng:
    """xoshiro256** stream; see the pure backend for the seeding contract."""

    cdef uint64_t s0, s1, s2, s3
    cdef public unsigned long long n_draws

    def __init__(self, seed, stream=0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative integers")
        st_py = (int(seed) + _PY_GOLDEN * int(stream)) & _PY_MASK
        cdef uint64_t st = <uint64_t> st_py
        cdef uint64_t s0, s1, s2, s3
        s0 = _splitmix(&st)
        s1 = _splitmix(&st)
        s2 = _splitmix(&st)
        s3 = _splitmix(&st)
        if s0 == 0 and s1 == 0 and s2 == 0 and s3 == 0:
            s0 = <uint64_t> 0x9E3779B97F4A7C15u
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        self.n_draws = 0

    cdef inline uint64_t _next64(self) nogil:
        cdef uint64_t s0 = self.s0, s1 = self.s1, s2 = self.s2, s3 = self.s3
        cdef uint64_t result = _rotl(s1 * 5u, 7) * 9u
        cdef uint64_t t = s1 << 17
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0 = s0
        self.s1 = s1
        self.s2 = s2
        self.s3 = s3
        return result

    cpdef double u(self):
        """Uniform on the open interval (0, 1)."""
        self.n_draws += 1
        return (<double> (self._next64() >> 11) + 0.5) * 1.1102230246251565e-16

    cpdef double exp1(self):
        """Standard exponential."""
        return -log(self.u())

    cpdef double normal(self):
        """Standard normal (Box-Muller, two uniforms per call)."""
        cdef double a = self.u()
        cdef double b = self.u()
        return sqrt(-2.0 * log(a)) * cos(TWO_PI * b)

    def state(self):
        return (self.s0, self.s1, self.s2, self.s3)


cdef uint64_t _splitmix(uint64_t* state) nogil:
    state[0] = state[0] + <uint64_t> 0x9E3779B97F4A7C15u
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9u
    z = (z ^ (z >> 27)) * <uint64_t> 0x94D049BB133111EBu
    z = z ^ (z >> 31)
    return z


# ---------------------------------------------------------------------------
# sinc-logarithm family
# ---------------------------------------------------------------------------

cdef inline double _sinc(double x) nogil:
    return sin(x) / x if x != 0.0 else 1.0


cpdef double ln_sinc(double x) except? -1e308:
    """ln(sin(x)/x) with sinc(0) = 1, for |x| <= pi."""
    x = fabs(x)
    cdef double x2, tp, acc, t
    cdef int n
    if x <= 1.0:
        x2 = x * x
        tp = 1.0
        acc = 0.0
        for n in range(64):
            tp *= x2
            t = _Q[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return -acc
    if x < PI:
        return log(sin(x) / x)
    if x == PI:
        return -INFINITY
    raise ValueError(f"ln_sinc needs |x| <= pi, got {x}")


cpdef double g_cot(double x):
    """cot(x) - 1/x."""
    cdef double ax = fabs(x)
    cdef double x2, tp, acc, t
    cdef int n
    if ax <= 1.0:
        x2 = x * x
        tp = 1.0
        acc = 0.0
        for n in range(64):
            t = _QD[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
            tp *= x2
        return -x * acc
    return cos(x) / sin(x) - 1.0 / x


cpdef double lnsinc_diff(double x1, double x2, double amp, double amp_dx):
    """amp * (ln_sinc(x2) - ln_sinc(x1)); amp_dx must be amp*(x2-x1) exact."""
    cdef double ax = fabs(x1)
    cdef double ax2 = fabs(x2)
    cdef double s, x1p, acc, t, d, sx1, half, sc, bracket, base, r
    cdef int n
    if ax2 > ax:
        ax = ax2
    if ax <= SERIES_CUT:
        s = 1.0
        x1p = 1.0
        acc = 0.0
        for n in range(64):
            x1p *= x1
            s = x2 * s + x1p
            t = _Q[n] * s
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


cpdef double ln_h(double theta, double alpha, double delta, double[::1] coef):
    """ln H_alpha(theta) on [0, pi)."""
    cdef double t2, tp, acc, t
    cdef int n
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for n in range(64):
            tp *= t2
            t = coef[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return (
        ln_sinc(delta * theta)
        - ln_sinc(theta)
        + lnsinc_diff(theta, alpha * theta, alpha / delta, -alpha * theta)
    )


cpdef double dlnh_raw(double theta, double alpha, double delta, double[::1] dcoef):
    """d/dtheta ln H_alpha(theta), best-effort two-sided accuracy."""
    cdef double t2, tp, acc, t, st, sat
    cdef int n
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for n in range(64):
            t = dcoef[n] * tp
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


cpdef double lnh1(double theta):
    """ln H_1(theta) = theta^2/2 + V_1(theta)."""
    cdef double t2, tp, acc, t
    cdef int n
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for n in range(64):
            tp *= t2
            t = _QV[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return 1.0 - theta * cos(theta) / sin(theta) - ln_sinc(theta)


cpdef double v1(double theta):
    """V_1(theta) = ln H_1(theta) - theta^2/2."""
    cdef double t2, tp, acc, t
    cdef int n
    if theta <= 0.0:
        return 0.0
    if theta <= SERIES_CUT:
        t2 = theta * theta
        tp = t2
        acc = 0.0
        for n in range(1, 64):
            tp *= t2
            t = _QV[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    return lnh1(theta) - 0.5 * theta * theta


cpdef double f_slope(double theta):
    """f(theta) = theta (ln H_1)'(theta)."""
    cdef double t2, tp, acc, t, st
    cdef int n
    if theta <= 0.0:
        return 0.0
    if theta <= 1.0:
        t2 = theta * theta
        tp = 1.0
        acc = 0.0
        for n in range(64):
            tp *= t2
            t = _QF[n] * tp
            acc += t
            if t < _EPS_BREAK * acc:
                break
        return acc
    st = sin(theta)
    return 1.0 + theta * theta / (st * st) - 2.0 * theta * cos(theta) / st


cdef inline double _softplus(double x) nogil:
    if x > 0.0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


# ---------------------------------------------------------------------------
# elementary samplers
# ---------------------------------------------------------------------------

cpdef double sample_m(Rng rng, double s):
    """theta with density proportional to exp(-s theta^2/2) on (0, pi)."""
    cdef double th, invs
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


cpdef double sample_E(Rng rng, double t):
    """Draw from density (t/2) min(1, e^(1 - t x)) on (0, infinity)."""
    cdef double u = 2.0 * rng.u()
    if u <= 1.0:
        return u / t
    return (1.0 - log(2.0 - u)) / t


cdef double _gamma_mt(Rng rng, double a):
    cdef double d = a - 1.0 / 3.0
    cdef double c = 1.0 / (3.0 * sqrt(d))
    cdef double x, v, u, xx
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


cpdef double gamma_ln(Rng rng, double a, double lgamma_a):
    """ln of a Gamma(a, 1) draw; see the pure backend docstring."""
    cdef double vstar, lnf, fstar, side, u2, w, v, ln_target, ln_env, g
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
            continue
        ln_target = a * v - exp(v) - lgamma_a
        ln_env = lnf + min(0.0, 1.0 - fstar * w)
        if log(rng.u()) <= ln_target - ln_env:
            return v


# ---------------------------------------------------------------------------
# chi rejection loops
# ---------------------------------------------------------------------------

def chi_A(Rng rng, double alpha, double delta, double ln_z, double[::1] coef,
          double lgd, lo_obj, hi_obj):
    """Chi draw via the Gaussian-angle envelope; see the pure backend."""
    cdef double ln_delta = log(delta)
    cdef double ln_alpha = log(alpha)
    cdef double z = exp(ln_z)
    cdef double s_m = alpha * z
    cdef double ln_r = _softplus(ln_delta - ln_z) + alpha * ln_z
    cdef double cap = log1p(alpha * PI * PI / 2.0)
    if -ln_z > cap:
        ln_r += -ln_z
    else:
        ln_r += cap
    cdef bint audit = lo_obj is None
    cdef double[::1] lo
    cdef double[::1] hi
    cdef int nbins = 0
    if not audit:
        lo = lo_obj
        hi = hi_obj
        nbins = lo.shape[0]
    cdef double k_over_pi = nbins / PI
    cdef long long n_outer = 0
    cdef long long n_inner = 0
    cdef double max_di = -INFINITY
    cdef double max_do = -INFINITY
    cdef double th, lhs, lnh_val, ln_tau, tau, rhs, d, w, shape, ln_y
    cdef double ln1py, u2l, omp, ln_R, d2
    cdef int i
    while True:
        n_outer += 1
        while True:
            n_inner += 1
            th = sample_m(rng, s_m)
            lhs = log(rng.u()) + ln_r - (1.0 + 0.5 * alpha * th * th) * z
            lnh_val = -1.0
            if not audit:
                i = <int> (th * k_over_pi)
                if i >= nbins:
                    i = nbins - 1
                if lhs <= lo[i]:
                    break
                if lhs > hi[i]:
                    continue
            lnh_val = ln_h(th, alpha, delta, coef)
            ln_tau = ln_z + lnh_val
            tau = exp(ln_tau)
            rhs = alpha * ln_tau - tau + _softplus(ln_delta - ln_tau)
            d = rhs - ln_r + (1.0 + 0.5 * alpha * th * th) * z
            if d > max_di:
                max_di = d
            if lhs <= rhs:
                break
        if lnh_val < 0.0:
            lnh_val = ln_h(th, alpha, delta, coef)
        ln_tau = ln_z + lnh_val
        tau = exp(ln_tau)
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


def chi_B(Rng rng, double alpha, double delta, double ln_z, double[::1] coef,
          double lgd, lo_obj, hi_obj):
    """Chi draw via the flat-angle envelope; see the pure backend."""
    cdef double ln_delta = log(delta)
    cdef double ln_alpha = log(alpha)
    cdef double lgd1 = _softplus(lgd)
    cdef double ln_c2 = ln_alpha - ln_delta
    if ln_c2 < 0.0:
        ln_c2 = 0.0
    cdef double ln_ca = alpha * (ln_alpha - ln_delta)
    cdef bint audit = lo_obj is None
    cdef double[::1] lo
    cdef double[::1] hi
    cdef int nbins = 0
    if not audit:
        lo = lo_obj
        hi = hi_obj
        nbins = lo.shape[0]
    cdef double k_over_pi = nbins / PI
    cdef long long n_outer = 0
    cdef long long n_inner = 0
    cdef double max_di = -INFINITY
    cdef double max_do = -INFINITY
    cdef double th, lhs, lnh_val, ln_tau, tau, rhs, d, arg, wstar, ln_y
    cdef double ln1py, omp, ln_R, d2
    cdef int i
    while True:
        n_outer += 1
        while True:
            n_inner += 1
            th = PI * rng.u()
            lhs = log(rng.u()) + lgd1
            lnh_val = -1.0
            if not audit:
                i = <int> (th * k_over_pi)
                if i >= nbins:
                    i = nbins - 1
                if lhs <= lo[i]:
                    break
                if lhs > hi[i]:
                    continue
            lnh_val = ln_h(th, alpha, delta, coef)
            ln_tau = ln_z + lnh_val
            tau = exp(ln_tau)
            rhs = _softplus(lgd + alpha * ln_tau) - tau
            d = rhs - lgd1
            if d > max_di:
                max_di = d
            if lhs <= rhs:
                break
        if lnh_val < 0.0:
            lnh_val = ln_h(th, alpha, delta, coef)
        ln_tau = ln_z + lnh_val
        tau = exp(ln_tau)
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
# Array layouts (hdr / pp / cum) are documented in the pure backend; the
# packer lives in fpss.chi_p.  All literals below are frozen to the doubles
# the interpreter produces so both backends carry bit-identical arithmetic.

cdef double _R74 = 1.7176118367977251
cdef double _LN_R74 = 0.5409348590338424
cdef double _LN2 = 0.6931471805599453
cdef double _LN4 = 1.3862943611198906
cdef double _LN_PI = 1.1447298858494002
cdef double _STRICT = 9.999999999500001e-11
cdef double _REJECT = INFINITY

cdef double[9] _LGK
_LGK[0] = 0.0
_LGK[1] = 0.0
_LGK[2] = 0.693147180559945
_LGK[3] = 1.7917594692280554
_LGK[4] = 3.178053830347945
_LGK[5] = 4.787491742782047
_LGK[6] = 6.579251212010102
_LGK[7] = 8.525161361065415
_LGK[8] = 10.604602902745249


cdef inline double _lse2(double x, double y) nogil:
    cdef double m = x if x > y else y
    if m == -INFINITY:
        return -INFINITY
    if m == INFINITY:
        return INFINITY
    return m + log(exp(x - m) + exp(y - m))


cdef inline double _lse3(double x, double y, double z) nogil:
    cdef double m = x if x > y else y
    if z > m:
        m = z
    if m == -INFINITY:
        return -INFINITY
    if m == INFINITY:
        return INFINITY
    return m + log(exp(x - m) + exp(y - m) + exp(z - m))


cdef inline double _log1mexp(double x) nogil:
    # ln(1 - e^x) for x <= 0; callers never pass x > 0
    if x == 0.0:
        return -INFINITY
    if x > -0.693:
        return log(-expm1(x))
    return log1p(-exp(x))


cdef inline double _ln_expm1(double x) nogil:
    # ln(e^x - 1) for x >= 0; callers never pass x < 0
    if x == 0.0:
        return -INFINITY
    if x > 0.693:
        return x + log1p(-exp(-x))
    return log(expm1(x))


cdef double _ln_expm1_mx(double x) nogil:
    # ln(e^x - 1 - x) for x >= 0
    cdef double acc, t
    cdef int j
    if x == 0.0:
        return -INFINITY
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


cdef inline double _ln_ell_inv(double ln_tau) nogil:
    # ln of log1p(e^(-ln_tau)), stable at both ends
    if ln_tau >= 35.0:
        return -ln_tau
    if ln_tau <= -35.0:
        return log(-ln_tau)
    return log(log1p(exp(-ln_tau)))


cdef inline double _ln_psi(double ln_tau, double ln_k1, double ln_k2,
                           double alpha, double delta) nogil:
    cdef double ln_ell = _ln_ell_inv(ln_tau)
    cdef double t1
    t1 = -INFINITY if ln_k1 == -INFINITY else ln_k1 + ln_tau + delta * ln_ell
    return _lse3(t1, ln_k2 - alpha * ln_ell, 0.0)


cdef double _ln_XI_u(double u, double alpha, double delta, double ln_alpha):
    cdef double dth = delta * (PI - u)
    cdef double t = lnsinc_diff(u, u + dth, alpha / delta, alpha * (PI - u))
    cdef double lnxi = ln_sinc(dth) - ln_sinc(u) + t
    cdef double theta = PI - u
    return lnxi + log(theta) + ln_alpha - log(alpha * u + delta * PI)


cdef inline double _ln_tfd(double u_from, double dx, double alpha,
                           double delta) nogil:
    cdef double u_to = u_from - dx
    cdef double y
    if u_to <= 0.0:
        return INFINITY
    if dx == 0.0:
        return 0.0
    y = delta * PI * dx / (u_to * (alpha * u_from + delta * PI))
    return log1p(y) / delta


cdef inline double _ln_E(double s, double x) nogil:
    cdef double t
    if x < 0.0 or s <= 0.0:
        return -INFINITY
    t = 1.0 - s * x
    return log(s / 2.0) + (t if t < 0.0 else 0.0)


cdef inline double _ln_pow_diff(double a, double b, double p) nogil:
    if a == 0.0:
        return p * log(b)
    return p * log(a) + _ln_expm1(p * log1p((b - a) / a))


cdef double _ln_M(double a, double b, double c) nogil:
    cdef double term1, lb, la, bracket
    if a >= b:
        return -INFINITY
    term1 = _ln_pow_diff(a, b, c) - log(c)
    lb = _LN2 + (c - 1.0) * log(b) + _ln_expm1_mx(b)
    if a == 0.0:
        bracket = lb
    else:
        la = _LN2 + (c - 1.0) * log(a) + _ln_expm1_mx(a)
        bracket = lb + _log1mexp(la - lb)
    return _lse2(term1, bracket)


cdef int _ps_init0(double b, double c, double* ps) except -1:
    # power-mixture envelope fields for (0, b], shape c in (0,1);
    # 21-slot layout documented in the pure backend
    cdef double root = sqrt(1.0 - c)
    cdef double x_c = pow(1.0 + root, 2.0)
    cdef double p_c = 1.0 / (1.0 + root)
    cdef double A = b if b <= x_c else x_c
    cdef double B = x_c
    cdef double ln_m_left = _ln_M(0.0, A, c)
    cdef double ln_m_right = _ln_M(B, b, c)
    cdef double ln_total = _LN2 + _lse2(ln_m_left, ln_m_right)
    cdef double m = -INFINITY
    cdef double p, lw, acc, ln_w_sum, b_pow, ln_s
    cdef int k
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
    if ln_m_right > -INFINITY:
        b_pow = pow(b, 1.0 / p_c)
        ln_s = log(p_c) + (c - 1.0 / p_c) * log(b) + b - ln_m_right
    else:
        b_pow = 0.0
        ln_s = -INFINITY
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
    return 0


cdef double _ps_sample(Rng rng, double* ps) except? -1e308:
    # ln X from the normalized power-mixture envelope; +inf auto-rejects
    cdef double a = ps[0]
    cdef double c = ps[2]
    cdef bint pick_right = log(rng.u()) > ps[5] - (ps[7] - _LN2)
    cdef double m, total, u, acc, p, v, grow, y, d
    cdef int k, kk
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


cdef double _ps_eval_tilted(double* ps, double ln_x) nogil:
    # ln of x^(1-c) times the power-mixture envelope density at e^(ln_x)
    cdef double x = exp(ln_x)
    cdef double a = ps[0]
    cdef double c = ps[2]
    cdef double p_c = ps[3]
    cdef double p1 = -INFINITY
    cdef double p2 = -INFINITY
    cdef double acc, t, t_arg, le
    cdef int k
    cdef bint in_left = (
        ps[5] > -INFINITY
        and (x > a or (a == 0.0 and ln_x > -INFINITY))
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
    if ps[6] > -INFINITY:
        t_arg = ps[9] - exp(ln_x / p_c)
        if t_arg < 0.0 and ln_x <= ps[11] + 1e-9:
            t_arg = 0.0
        le = _ln_E(exp(ps[10]), t_arg)
        if le > -INFINITY:
            p2 = _LN2 + ps[6] - log(p_c) + (1.0 / p_c - c) * ln_x + le
    if p1 == -INFINITY and p2 == -INFINITY:
        return -INFINITY
    return _lse2(p1, p2)


cdef inline double _ps_eval(double* ps, double ln_x) nogil:
    return (ps[2] - 1.0) * ln_x + _ps_eval_tilted(ps, ln_x)


cdef double _g1_sample(Rng rng, double[::1] pp, Py_ssize_t o) except? -1e308:
    # ln X from the packed shape>=1 gamma-kernel envelope; +inf auto-rejects
    cdef bint go_left = log(rng.u()) <= pp[o + 19] - (pp[o + 21] - _LN2)
    cdef double x
    if go_left:
        x = pp[o + 17] - sample_E(rng, pp[o + 22])
        if x <= 0.0:
            return _REJECT
        return log(x)
    return log(pp[o + 18] + sample_E(rng, pp[o + 23]))


cdef double _g1_eval(double[::1] pp, Py_ssize_t o, double ln_x) nogil:
    cdef double x = exp(ln_x)
    cdef double A = pp[o + 17]
    cdef double B = pp[o + 18]
    cdef double p1 = -INFINITY
    cdef double p2 = -INFINITY
    cdef double arg, le
    if pp[o + 19] > -INFINITY:
        arg = A - x
        if arg < 0.0 and ln_x <= log(A) + 1e-9:
            arg = 0.0
        le = _ln_E(pp[o + 22], arg)
        if le > -INFINITY:
            p1 = _LN2 + pp[o + 19] + le
    if pp[o + 20] > -INFINITY:
        arg = x - B
        if arg < 0.0 and (B == 0.0 or ln_x >= log(B) - 1e-9):
            arg = 0.0
        le = _ln_E(pp[o + 23], arg)
        if le > -INFINITY:
            p2 = _LN2 + pp[o + 20] + le
    if p1 == -INFINITY and p2 == -INFINITY:
        return -INFINITY
    return _lse2(p1, p2)


cdef double _g2g_sample(Rng rng, double[::1] pp, Py_ssize_t o) except? -1e308:
    # ln X from the packed shape<1 gamma-kernel envelope
    cdef double z = sample_E(rng, pp[o + 31])
    cdef double a = pp[o + 27]
    if a > 0.0:
        return log1p(pp[o + 32] + z) / pp[o + 28]
    return log(z) / pp[o + 28]


cdef double _g2g_eval(double[::1] pp, Py_ssize_t o, double ln_x) nogil:
    cdef double a = pp[o + 27]
    cdef double cc = pp[o + 28]
    cdef double t_arg, le
    if a > 0.0:
        t_arg = expm1(cc * ln_x) - pp[o + 32]
    else:
        t_arg = exp(cc * ln_x)
    if t_arg < 0.0 and (a == 0.0 or ln_x >= log(a) - 1e-9):
        t_arg = 0.0
    le = _ln_E(pp[o + 31], t_arg)
    if le == -INFINITY:
        return -INFINITY
    return _LN2 + log(cc) + pp[o + 29] + (cc - 1.0) * ln_x + le


def chi_P(Rng rng, double[::1] hdr, double[::1] pp, double[::1] cum,
          double[::1] coef):
    """One draw from the steep-angle piecewise sampler over a packed grid.

    Returns (ln_y, theta, u, ln_tau, rounds, angle_proposals,
    max_angle_ln_ratio, max_joint_ln_ratio, ratio_violations); the counters
    cover this call only.  Raises RuntimeError when an acceptance ratio
    breaks the certified envelope bound beyond the packed tolerance.
    """
    cdef double alpha = hdr[0]
    cdef double delta = hdr[1]
    cdef double ln_alpha = hdr[2]
    cdef double ln_delta = hdr[3]
    cdef double ln_c_alpha = hdr[4]
    cdef double ln_k1 = hdr[5]
    cdef double ln_k2 = hdr[6]
    cdef double ln_z = hdr[7]
    cdef double u_split = hdr[8]
    cdef double ln_tau_split = hdr[9]
    cdef double ln_xi_split = hdr[10]
    cdef double tol = hdr[11]
    cdef double ln1p_gap = hdr[12]
    cdef double e2_const = hdr[13]
    cdef bint audit = hdr[14] != 0.0
    cdef Py_ssize_t npieces = cum.shape[0]
    cdef long long rounds = 0
    cdef long long angle_props = 0
    cdef double max_a = -INFINITY
    cdef double max_j = -INFINITY
    cdef long long nviol = 0
    cdef Py_ssize_t lo_i, hi_i, mid_i, o
    cdef double pv, kind, lr, theta, u_t, ln_tau, lq
    cdef bint ok, wide
    cdef double c_t, d_t, x, lx, ln_t, t, w, uu, ln_ey, s_t, ds, scale
    cdef double ln_jac, e1, e2, e3, ev2, ln_env, z_x
    cdef double ln_b, b, ln_i0, ln_i1, ln_i2, q, closed, total
    cdef double lv, ln_v, v, ln_y, arg, tau_y, ln_w, ln_rho, ln_phi_t, flat
    cdef double ps_buf[21]
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
            lr = -INFINITY
            theta = 0.0
            u_t = 0.0
            ln_tau = 0.0
            t = 0.0
            ln_t = 0.0
            ok = True
            if kind == 0.0:
                theta = pp[o + 1] + rng.u() * (pp[o + 2] - pp[o + 1])
                u_t = PI - theta
                ln_tau = ln_z + ln_h(theta, alpha, delta, coef)
                if ln_tau > 709.0:
                    lq = -INFINITY
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
                        lx = _ps_sample(rng, &pp[o + 27])
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
                            e1 = -INFINITY
                        else:
                            e1 = pp[o + 12] + _g1_eval(pp, o, ln_t + pp[o + 13])
                        if pp[o + 26] != 0.0:
                            ev2 = _ps_eval(&pp[o + 27], ln_t + ln_delta)
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
                    t = 1.0 - pp[o + 2] * z_x
                    ln_env = pp[o + 1] + (t if t < 0.0 else 0.0)
                    ln_tau = (
                        ln_tau_split
                        + (_ln_XI_u(u_t, alpha, delta, ln_alpha) - ln_xi_split)
                        + _ln_tfd(u_split, z_x, alpha, delta)
                    )
                    if ln_tau > 709.0:
                        lq = -INFINITY
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
            if lr == -INFINITY:
                continue
            if lr >= 0.0 or log(rng.u()) <= lr:
                break

        # ---- joint stage: y | theta against the factorized envelope ----
        ln_b = _ln_ell_inv(ln_tau)
        b = _softplus(-ln_tau)
        _ps_init0(b, delta, ps_buf)
        ln_i0 = ps_buf[7]
        ln_i1 = -1.0 - ln_tau - alpha * ln_b
        ln_i2 = -ln_c_alpha - ln_tau
        if audit:
            q = 2.0 / delta - 4.0
            closed = _lse2(
                _LN4 - ln_tau - alpha * ln_b,
                log(q) + delta * ln_b if q > 0.0 else -INFINITY,
            )
            if fabs(closed - ln_i0) > 1e-9 * (1.0 + fabs(closed)):
                raise RuntimeError(
                    f"power-branch mass drifted from its closed form: "
                    f"{ln_i0} vs {closed}"
                )
        total = _lse3(ln_i0, ln_i1, ln_i2)
        x = rng.u()
        if x < exp(ln_i0 - total):
            lv = _ps_sample(rng, ps_buf)
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
        ln_phi_t = _ps_eval_tilted(ps_buf, ln_v)
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
        if lr == -INFINITY:
            continue
        if lr >= 0.0 or log(rng.u()) <= lr:
            return (ln_y, theta, u_t, ln_tau, rounds, angle_props, max_a, max_j, nviol)


# ---------------------------------------------------------------------------
# scale-variable draws and tables
# ---------------------------------------------------------------------------

cpdef double draw_lnz(Rng rng, double alpha, double delta, double[::1] coef):
    """ln z for the first-passage scale variable: z = xi / H(Theta)."""
    cdef double th = PI * rng.u()
    cdef double xi = rng.exp1()
    return log(xi) - ln_h(th, alpha, delta, coef)


def count_lnz_below(Rng rng, long long n, double threshold, double alpha,
                    double delta, double[::1] coef):
    cdef long long c = 0
    cdef long long j
    for j in range(n):
        if draw_lnz(rng, alpha, delta, coef) <= threshold:
            c += 1
    return c


def lnh_table(double alpha, double delta, double[::1] coef, int nbins):
    """ln H at the nbins+1 edges of an equispaced grid on [0, pi]."""
    from array import array as _array
    tab = _array("d", bytes(8 * (nbins + 1)))
    cdef double[::1] mv = tab
    cdef double step = PI / nbins
    cdef int i
    for i in range(1, nbins):
        mv[i] = ln_h(i * step, alpha, delta, coef)
    mv[nbins] = INFINITY
    return tab
