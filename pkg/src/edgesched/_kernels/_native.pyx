# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels. Bit-identical twins of pure.py.

Compiled with -ffp-contract=off and without -ffast-math so every double
operation matches the pure-Python fallback exactly.
"""

from libc.math cimport floor

BACKEND = "native"


def score_update(double[::1] scores, double[::1] u, double[::1] q,
                 double[::1] b, double[::1] l,
                 double alpha, double beta, double delta, double eps_w,
                 double eta, unsigned char[::1] over, double[::1] gamma,
                 double floor_):
    """Fused per-task score pipeline; see pure.score_update."""
    cdef Py_ssize_t n = scores.shape[0]
    cdef double keep = 1.0 - eta
    cdef double best = -1.0
    cdef Py_ssize_t arg = 0
    cdef Py_ssize_t i
    cdef double s
    for i in range(n):
        s = eta * scores[i] + keep * (alpha * u[i] + beta * q[i] + delta * b[i] + eps_w * l[i])
        if over[i]:
            s = gamma[i] * s
        if s < floor_:
            s = floor_
        scores[i] = s
        if s > best:
            best = s
            arg = i
    return arg


cdef inline double _hue(int r, int g, int b, int mx, int c):
    cdef double hf, h
    if mx == r:
        hf = (<double>(g - b)) / c
        if hf < 0.0:
            hf += 6.0
    elif mx == g:
        hf = (<double>(b - r)) / c + 2.0
    else:
        hf = (<double>(r - g)) / c + 4.0
    h = hf * (256.0 / 6.0)
    if h >= 256.0:
        h -= 256.0
    return h


cdef inline int _sat(int c, int mx):
    if mx == 0:
        return 0
    return <int>floor(255.0 * c / mx + 0.5)


cdef inline void _from_hsv(double h, int s, int v, int* rout, int* gout, int* bout):
    cdef double c, hf, f, p, x1, x2, rr, gg, bb
    cdef int i, r, g, b
    if s <= 0 or v == 0:
        rout[0] = v
        gout[0] = v
        bout[0] = v
        return
    c = v * s / 255.0
    hf = h * (6.0 / 256.0)
    i = <int>hf
    if i > 5:
        i = 5
    f = hf - i
    p = v - c
    x1 = v - c * f
    x2 = v - c * (1.0 - f)
    if i == 0:
        rr = v; gg = x2; bb = p
    elif i == 1:
        rr = x1; gg = v; bb = p
    elif i == 2:
        rr = p; gg = v; bb = x2
    elif i == 3:
        rr = p; gg = x1; bb = v
    elif i == 4:
        rr = x2; gg = p; bb = v
    else:
        rr = v; gg = p; bb = x1
    r = <int>floor(rr + 0.5)
    g = <int>floor(gg + 0.5)
    b = <int>floor(bb + 0.5)
    if r > 255:
        r = 255
    if g > 255:
        g = 255
    if b > 255:
        b = 255
    if r < 0:
        r = 0
    if g < 0:
        g = 0
    if b < 0:
        b = 0
    rout[0] = r
    gout[0] = g
    bout[0] = b


def rgb_to_hsv_px(int r, int g, int b):
    cdef int mx = r if r >= g else g
    cdef int mn = r if r <= g else g
    if b > mx:
        mx = b
    if b < mn:
        mn = b
    cdef int v = mx
    cdef int c = mx - mn
    cdef int s = _sat(c, mx)
    if c == 0:
        return 0.0, s, v
    return _hue(r, g, b, mx, c), s, v


def hsv_to_rgb_px(double h, int s, int v):
    cdef int r, g, b
    _from_hsv(h, s, v, &r, &g, &b)
    return r, g, b


def hsv_scale_rgb(unsigned char[::1] buf, double alpha, double beta):
    """Scale S by alpha and V by beta across an RGB24 buffer, in place."""
    cdef Py_ssize_t n = buf.shape[0] // 3
    cdef Py_ssize_t px, j
    cdef int r, g, b, mx, mn, c, s, v, s2, v2
    cdef double h
    for px in range(n):
        j = 3 * px
        r = buf[j]
        g = buf[j + 1]
        b = buf[j + 2]
        mx = r if r >= g else g
        mn = r if r <= g else g
        if b > mx:
            mx = b
        if b < mn:
            mn = b
        v = mx
        c = mx - mn
        s = _sat(c, mx)
        if c == 0:
            h = 0.0
        else:
            h = _hue(r, g, b, mx, c)
        s2 = <int>floor(alpha * s + 0.5)
        if s2 > 255:
            s2 = 255
        elif s2 < 0:
            s2 = 0
        v2 = <int>floor(beta * v + 0.5)
        if v2 > 255:
            v2 = 255
        elif v2 < 0:
            v2 = 0
        _from_hsv(h, s2, v2, &r, &g, &b)
        buf[j] = <unsigned char>r
        buf[j + 1] = <unsigned char>g
        buf[j + 2] = <unsigned char>b
