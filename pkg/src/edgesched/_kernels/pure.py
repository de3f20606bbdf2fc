"""Pure-Python kernels. Bit-identical twins of _native.pyx.

Keep every arithmetic expression in the same order as the compiled version:
cross-backend determinism relies on identical IEEE-754 double sequences.
"""

import math

BACKEND = "pure"


def score_update(scores, u, q, b, l, alpha, beta, delta, eps_w, eta, over, gamma, floor_):
    """Fused per-task score pipeline over all nodes.

    For each node i: exponential smoothing of the weighted instant score,
    multiplicative penalty when over[i] is set, then the floor clamp.
    Mutates ``scores`` in place and returns the argmax index (ties resolve
    to the lowest index).
    """
    n = len(scores)
    keep = 1.0 - eta
    best = -1.0
    arg = 0
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


def rgb_to_hsv_px(r, g, b):
    """8-bit RGB -> (h, s, v) with h kept as an exact float on [0, 256).

    v = max channel; s = round_half_up(255 * chroma / v); h follows the
    usual sector walk, scaled so a full hue turn spans 256. h stays a float
    so pipelines that leave hue untouched introduce no hue quantization.
    """
    mx = r if r >= g else g
    if b > mx:
        mx = b
    mn = r if r <= g else g
    if b < mn:
        mn = b
    v = mx
    c = mx - mn
    if mx == 0:
        s = 0
    else:
        s = int(math.floor(255.0 * c / mx + 0.5))
    if c == 0:
        return 0.0, s, v
    if mx == r:
        hf = (g - b) / c
        if hf < 0.0:
            hf += 6.0
    elif mx == g:
        hf = (b - r) / c + 2.0
    else:
        hf = (r - g) / c + 4.0
    h = hf * (256.0 / 6.0)
    if h >= 256.0:
        h -= 256.0
    return h, s, v


def hsv_to_rgb_px(h, s, v):
    """Inverse of rgb_to_hsv_px. Output channels round half up."""
    if s <= 0 or v == 0:
        return v, v, v
    c = v * s / 255.0
    hf = h * (6.0 / 256.0)
    i = int(hf)
    if i > 5:
        i = 5
    f = hf - i
    p = v - c
    x1 = v - c * f
    x2 = v - c * (1.0 - f)
    if i == 0:
        rr, gg, bb = float(v), x2, p
    elif i == 1:
        rr, gg, bb = x1, float(v), p
    elif i == 2:
        rr, gg, bb = p, float(v), x2
    elif i == 3:
        rr, gg, bb = p, x1, float(v)
    elif i == 4:
        rr, gg, bb = x2, p, float(v)
    else:
        rr, gg, bb = float(v), p, x1
    r = int(math.floor(rr + 0.5))
    g = int(math.floor(gg + 0.5))
    b = int(math.floor(bb + 0.5))
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
    return r, g, b


def hsv_scale_rgb(buf, alpha, beta):
    """Scale saturation by alpha and value by beta across an RGB24 buffer.

    Hue passes through untouched. Scaled S and V round half up and clamp to
    [0, 255] before conversion back. Mutates ``buf`` in place.
    """
    n = len(buf) // 3
    for px in range(n):
        j = 3 * px
        h, s, v = rgb_to_hsv_px(buf[j], buf[j + 1], buf[j + 2])
        s2 = int(math.floor(alpha * s + 0.5))
        if s2 > 255:
            s2 = 255
        elif s2 < 0:
            s2 = 0
        v2 = int(math.floor(beta * v + 0.5))
        if v2 > 255:
            v2 = 255
        elif v2 < 0:
            v2 = 0
        r, g, b = hsv_to_rgb_px(h, s2, v2)
        buf[j] = r
        buf[j + 1] = g
        buf[j + 2] = b
