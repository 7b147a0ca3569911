# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Mirrors :mod:`dichotuna._pykernels` one-to-one.

Border handling is half-sample symmetric reflection (``d c b a | a b c d``),
repeated as often as the window needs, so windows wider than the image work.
"""
import threading

import numpy as np

from libc.math cimport fabs, floor, fmod, isnan


_tls = threading.local()


cdef _scratch(str name, tuple shape):
    """Per-thread float64 work buffer reused across calls; contents are stale.

    Fresh multi-megabyte arrays cost a page fault per 4 KiB on first touch,
    which dominated the filter and SSIM kernels.
    """
    cache = getattr(_tls, "bufs", None)
    if cache is None:
        cache = _tls.bufs = {}
    buf = cache.get(name)
    if buf is None or buf.shape != shape:
        buf = cache[name] = np.empty(shape, dtype=np.float64)
    return buf


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period = 2 * n
    i = i % period
    if i < 0:
        i += period
    if i >= n:
        i = period - 1 - i
    return i


def _reflect_table(Py_ssize_t n, Py_ssize_t before, Py_ssize_t after):
    idx = np.empty(n + before + after, dtype=np.intp)
    cdef Py_ssize_t[::1] v = idx
    cdef Py_ssize_t k
    for k in range(n + before + after):
        v[k] = _reflect(k - before, n)
    return idx


cdef void _box_mean_into(const double[:, :] x, Py_ssize_t r,
                         const Py_ssize_t[::1] ri, const Py_ssize_t[::1] ci,
                         double[:, ::1] tmp, double[::1] col, double[:, ::1] out) noexcept nogil:
    # ri/ci come from _reflect_table(n, r + 1, r): entry k + r + 1 is reflect(k)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s
    cdef double inv = 1.0 / ((2 * r + 1) * (2 * r + 1))
    for i in range(h):
        s = 0.0
        for k in range(-r, r + 1):
            s = s + x[i, ci[k + r + 1]]
        tmp[i, 0] = s
        for j in range(1, w):
            s = s + x[i, ci[j + 2 * r + 1]] - x[i, ci[j]]
            tmp[i, j] = s
    for j in range(w):
        col[j] = 0.0
    for k in range(-r, r + 1):
        for j in range(w):
            col[j] += tmp[ri[k + r + 1], j]
    for j in range(w):
        out[0, j] = col[j] * inv
    for i in range(1, h):
        for j in range(w):
            col[j] += tmp[ri[i + 2 * r + 1], j] - tmp[ri[i], j]
            out[i, j] = col[j] * inv


def box_mean(const double[:, ::1] x, Py_ssize_t r):
    """Mean over (2r+1)^2 windows, running sums along both axes."""
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    out = np.empty((h, w), dtype=np.float64)
    tmp = np.empty((h, w), dtype=np.float64)
    col = np.empty(w, dtype=np.float64)
    _box_mean_into(x, r, _reflect_table(h, r + 1, r), _reflect_table(w, r + 1, r), tmp, col, out)
    return out


def self_guided_filter(const double[:, :] p, Py_ssize_t r, double eps, out=None):
    """Guided filter of ``p`` with itself as the guide, all passes fused.

    ``p`` and ``out`` may be strided views, e.g. one channel of an RGB image.
    """
    cdef Py_ssize_t h = p.shape[0], w = p.shape[1]
    cdef Py_ssize_t i, j
    cdef double m, var, a
    cdef Py_ssize_t[::1] ri = _reflect_table(h, r + 1, r)
    cdef Py_ssize_t[::1] ci = _reflect_table(w, r + 1, r)
    if out is None:
        out = np.empty((h, w), dtype=np.float64)
    cdef double[:, :] o = out
    if o.shape[0] != h or o.shape[1] != w:
        raise ValueError("out has the wrong shape")
    cdef double[:, ::1] tmp = _scratch("gf_tmp", (h, w))
    cdef double[::1] col = _scratch("gf_col", (w,))
    cdef double[:, ::1] sq = _scratch("gf_sq", (h, w))
    cdef double[:, ::1] mean_p = _scratch("gf_mean_p", (h, w))
    cdef double[:, ::1] mean_pp = _scratch("gf_mean_pp", (h, w))
    cdef double[:, ::1] mean_a = _scratch("gf_mean_a", (h, w))
    with nogil:
        for i in range(h):
            for j in range(w):
                sq[i, j] = p[i, j] * p[i, j]
        _box_mean_into(p, r, ri, ci, tmp, col, mean_p)
        _box_mean_into(sq, r, ri, ci, tmp, col, mean_pp)
        # reuse sq for a and mean_pp for b
        for i in range(h):
            for j in range(w):
                m = mean_p[i, j]
                var = mean_pp[i, j] - m * m
                a = var / (var + eps)
                sq[i, j] = a
                mean_pp[i, j] = m - a * m
        _box_mean_into(sq, r, ri, ci, tmp, col, mean_a)
        _box_mean_into(mean_pp, r, ri, ci, tmp, col, mean_p)
        for i in range(h):
            for j in range(w):
                o[i, j] = mean_a[i, j] * p[i, j] + mean_p[i, j]
    return out


def sep_convolve(const double[:, ::1] x, const double[::1] kernel):
    """Same-size separable convolution with a symmetric odd-length kernel."""
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t n = kernel.shape[0], rad = n // 2
    cdef Py_ssize_t i, j, k, src
    cdef double wk
    cdef Py_ssize_t[::1] ci = _reflect_table(w, rad, rad)
    cdef Py_ssize_t[::1] ri = _reflect_table(h, rad, rad)
    tmp_arr = np.zeros((h, w), dtype=np.float64)
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(h):
            for k in range(n):
                wk = kernel[k]
                for j in range(w):
                    tmp[i, j] += wk * x[i, ci[j + k]]
        for i in range(h):
            for k in range(n):
                wk = kernel[k]
                src = ri[i + k]
                for j in range(w):
                    out[i, j] += wk * tmp[src, j]
    return out_arr


def correlate_valid(const double[:, ::1] x, const double[::1] kernel):
    """Separable correlation keeping only windows fully inside ``x``."""
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t n = kernel.shape[0]
    cdef Py_ssize_t oh = h - n + 1, ow = w - n + 1
    cdef Py_ssize_t i, j, k
    cdef double wk
    if oh < 1 or ow < 1:
        raise ValueError("input smaller than kernel")
    tmp_arr = np.zeros((h, ow), dtype=np.float64)
    out_arr = np.zeros((oh, ow), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(h):
            for k in range(n):
                wk = kernel[k]
                for j in range(ow):
                    tmp[i, j] += wk * x[i, j + k]
        for i in range(oh):
            for k in range(n):
                wk = kernel[k]
                for j in range(ow):
                    out[i, j] += wk * tmp[i + k, j]
    return out_arr


def order_disagreements(a, b):
    """Count ordered pairs (x, y) where ``a[x] >= a[y]`` and ``b[x] >= b[y]`` differ.

    With ``A`` and ``B`` the two relations, disagreements are
    ``#A + #B - 2 #(A and B)``. The joint count is a non-strict dominance count,
    done with a Fenwick tree over the ranks of ``b`` in O(n log n).
    """
    a_arr = np.ascontiguousarray(a, dtype=np.float64).ravel()
    b_arr = np.ascontiguousarray(b, dtype=np.float64).ravel()
    if a_arr.size != b_arr.size:
        raise ValueError("length mismatch")
    if np.isnan(a_arr).any() or np.isnan(b_arr).any():
        raise ValueError("NaN in lightness values")
    cdef Py_ssize_t n = a_arr.size
    if n == 0:
        return 0
    _, ra_arr = np.unique(a_arr, return_inverse=True)
    _, rb_arr = np.unique(b_arr, return_inverse=True)
    ra_arr = ra_arr.astype(np.intp).ravel()
    rb_arr = rb_arr.astype(np.intp).ravel()
    # pairs with a[y] <= a[x], summed over x
    cdef long long count_a = int(np.cumsum(np.bincount(ra_arr))[ra_arr].sum())
    cdef long long count_b = int(np.cumsum(np.bincount(rb_arr))[rb_arr].sum())
    order_arr = np.lexsort((rb_arr, ra_arr)).astype(np.intp)
    cdef Py_ssize_t[::1] order = order_arr
    cdef Py_ssize_t[::1] ra = ra_arr
    cdef Py_ssize_t[::1] rb = rb_arr
    cdef Py_ssize_t nb = int(rb_arr.max()) + 1
    cdef long long[::1] tree = np.zeros(nb + 1, dtype=np.longlong)
    cdef long long joint = 0
    cdef Py_ssize_t start = 0, stop, i, k
    with nogil:
        while start < n:
            stop = start
            while stop < n and ra[order[stop]] == ra[order[start]]:
                stop += 1
            # insert the whole tie group first so ties count as ">="
            for i in range(start, stop):
                k = rb[order[i]] + 1
                while k <= nb:
                    tree[k] += 1
                    k += k & -k
            for i in range(start, stop):
                k = rb[order[i]] + 1
                while k > 0:
                    joint += tree[k]
                    k -= k & -k
            start = stop
    return int(count_a + count_b - 2 * joint)


cdef inline void _hsv(double r, double g, double b,
                      double* h_out, double* s_out, double* v_out) noexcept nogil:
    cdef double v, mn, delta, h
    v = r if r > g else g
    v = v if v > b else b
    mn = r if r < g else g
    mn = mn if mn < b else b
    delta = v - mn
    v_out[0] = v
    s_out[0] = delta / v if v > 0 else 0.0
    if delta > 0:
        if r == v:
            h = fmod((g - b) / delta, 6.0)
            if h < 0:
                h = h + 6.0
        elif g == v:
            h = (b - r) / delta + 2.0
        else:
            h = (r - g) / delta + 4.0
        h = h / 6.0
        if h >= 1.0:
            h = h - 1.0
    else:
        h = 0.0
    h_out[0] = h


cdef inline void _rgb(double h, double s, double v, double* out) noexcept nogil:
    cdef double h6 = h * 6.0
    cdef double fl = floor(h6)
    cdef double f = h6 - fl
    cdef long sector = (<long>fl) % 6
    cdef double p, q, t
    if sector < 0:
        sector = sector + 6
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    if sector == 0:
        out[0] = v; out[1] = t; out[2] = p
    elif sector == 1:
        out[0] = q; out[1] = v; out[2] = p
    elif sector == 2:
        out[0] = p; out[1] = v; out[2] = t
    elif sector == 3:
        out[0] = p; out[1] = q; out[2] = v
    elif sector == 4:
        out[0] = t; out[1] = p; out[2] = v
    else:
        out[0] = v; out[1] = p; out[2] = q


def rgb_to_hsv(const double[:, ::1] rgb):
    """``(n, 3)`` RGB rows to hue (turns), saturation and value vectors."""
    cdef Py_ssize_t n = rgb.shape[0], i
    h_arr = np.empty(n, dtype=np.float64)
    s_arr = np.empty(n, dtype=np.float64)
    v_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ho = h_arr
    cdef double[::1] so = s_arr
    cdef double[::1] vo = v_arr
    with nogil:
        for i in range(n):
            _hsv(rgb[i, 0], rgb[i, 1], rgb[i, 2], &ho[i], &so[i], &vo[i])
    return h_arr, s_arr, v_arr


def hsv_to_rgb(const double[::1] h, const double[::1] s, const double[::1] v):
    """Hue/saturation/value vectors back to ``(n, 3)`` RGB rows."""
    cdef Py_ssize_t n = h.shape[0], i
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if s.shape[0] != n or v.shape[0] != n:
        raise ValueError("length mismatch")
    with nogil:
        for i in range(n):
            _rgb(h[i], s[i], v[i], &out[i, 0])
    return out_arr


cdef bint _minmax_scale(double* x, Py_ssize_t n) noexcept nogil:
    """In-place min-max stretch to [0, 1]; returns True (and zeros) when flat."""
    cdef Py_ssize_t i
    cdef double lo = x[0], hi = x[0], scale
    for i in range(n):
        if x[i] < lo:
            lo = x[i]
        if x[i] > hi:
            hi = x[i]
    if not hi > lo:
        for i in range(n):
            x[i] = 0.0
        return True
    scale = hi - lo
    for i in range(n):
        x[i] = (x[i] - lo) / scale
    return False


def tuna_restore(const double[:, ::1] rgb, double gamma, double a, double b):
    """Dichotomy on V plus color restoration for ``(n, 3)`` rows.

    Returns ``(restored_rgb, dichotomy_flat, restore_flat)``; a flat stage
    normalizes to zeros.
    """
    cdef Py_ssize_t n = rgb.shape[0], i
    cdef double vi
    cdef bint flat_d = True, flat_r = True
    cdef double[::1] hh = _scratch("tr_h", (n,))
    cdef double[::1] ss = _scratch("tr_s", (n,))
    v_arr = _scratch("tr_v", (n,))
    cdef double[::1] vv = v_arr
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    if n == 0:
        return out_arr, True, True
    with nogil:
        for i in range(n):
            _hsv(rgb[i, 0], rgb[i, 1], rgb[i, 2], &hh[i], &ss[i], &vv[i])
    # numpy's vectorized power is several times faster than libm pow
    work_arr = np.power(v_arr, gamma, out=_scratch("tr_work", (n,)))
    cdef double[::1] work = work_arr
    with nogil:
        for i in range(n):
            work[i] = fabs(work[i] - vv[i])
        flat_d = _minmax_scale(&work[0], n)
        for i in range(n):
            vi = vv[i]
            work[i] = a * vi + b * (work[i] * (1.0 - vi))
        flat_r = _minmax_scale(&work[0], n)
        for i in range(n):
            _rgb(hh[i], ss[i], work[i], &out[i, 0])
    return out_arr, bool(flat_d), bool(flat_r)


def tuna_blend(const double[:, ::1] img, const double[:, ::1] rgb, const double[:, ::1] rgb1,
               double c, double d, double e, double gamma1):
    """Three-term blend, joint min-max, final gamma and 8-bit quantization.

    Returns ``(uint8 rows, blend_flat)``.
    """
    cdef Py_ssize_t n = img.shape[0], i, k
    cdef double x
    cdef bint flat = True, bad = False
    work_arr = _scratch("tb_work", (3 * n,))
    cdef double[::1] work = work_arr
    out_arr = np.empty((n, 3), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    if n == 0:
        return out_arr, True
    with nogil:
        for i in range(n):
            for k in range(3):
                work[3 * i + k] = c * ((1.0 - rgb[i, k]) * rgb1[i, k]) + e * img[i, k] + d * rgb[i, k]
        flat = _minmax_scale(&work[0], 3 * n)
    np.power(work_arr, gamma1, out=work_arr)
    with nogil:
        for i in range(n):
            for k in range(3):
                x = work[3 * i + k]
                if isnan(x):
                    bad = True
                    x = 0.0
                elif x < 0.0:
                    x = 0.0
                elif x > 1.0:
                    x = 1.0
                # x >= 0 here, so truncation is the floor
                out[i, k] = <unsigned char>(x * 255.0 + 0.5)
    if bad:
        raise ValueError("NaN sample in blended image")
    return out_arr, bool(flat)


def ssim_mean(const double[:, ::1] x, const double[:, ::1] y,
              const double[:, ::1] mu_y, const double[:, ::1] var_y,
              const double[::1] kernel, double c1, double c2):
    """Mean SSIM of ``x`` against ``y`` whose local mean/variance are precomputed.

    Local moments use the same valid separable correlation as ``correlate_valid``.
    """
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t n = kernel.shape[0]
    cdef Py_ssize_t oh = h - n + 1, ow = w - n + 1
    cdef Py_ssize_t i, j, k
    cdef double wk, xv, mx, my, vx, sxy, num, den, total = 0.0
    if oh < 1 or ow < 1:
        raise ValueError("input smaller than kernel")
    cdef double[:, ::1] t1 = _scratch("ssim_t1", (h, ow))
    cdef double[:, ::1] t2 = _scratch("ssim_t2", (h, ow))
    cdef double[:, ::1] t3 = _scratch("ssim_t3", (h, ow))
    cdef double[::1] r1 = _scratch("ssim_r1", (ow,))
    cdef double[::1] r2 = _scratch("ssim_r2", (ow,))
    cdef double[::1] r3 = _scratch("ssim_r3", (ow,))
    with nogil:
        for i in range(h):
            for j in range(ow):
                t1[i, j] = 0.0
                t2[i, j] = 0.0
                t3[i, j] = 0.0
            for k in range(n):
                wk = kernel[k]
                for j in range(ow):
                    xv = x[i, j + k]
                    t1[i, j] += wk * xv
                    t2[i, j] += wk * (xv * xv)
                    t3[i, j] += wk * (xv * y[i, j + k])
        for i in range(oh):
            for j in range(ow):
                r1[j] = 0.0
                r2[j] = 0.0
                r3[j] = 0.0
            for k in range(n):
                wk = kernel[k]
                for j in range(ow):
                    r1[j] += wk * t1[i + k, j]
                    r2[j] += wk * t2[i + k, j]
                    r3[j] += wk * t3[i + k, j]
            for j in range(ow):
                mx = r1[j]
                my = mu_y[i, j]
                vx = r2[j] - mx * mx
                sxy = r3[j] - mx * my
                num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
                den = (mx * mx + my * my + c1) * (vx + var_y[i, j] + c2)
                total += num / den
    return total / (oh * ow)


def sum_sq_diff_u8(const unsigned char[::1] a, const unsigned char[::1] b):
    """Exact sum of squared differences of two 8-bit buffers."""
    cdef Py_ssize_t n = a.shape[0], i
    cdef long long total = 0, d
    if b.shape[0] != n:
        raise ValueError("length mismatch")
    with nogil:
        for i in range(n):
            d = <long long>a[i] - <long long>b[i]
            total += d * d
    return total


def luminance_u8(const unsigned char[:, ::1] rgb):
    """Channel mean of ``(n, 3)`` 8-bit rows scaled to [0, 1]."""
    cdef Py_ssize_t n = rgb.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = (rgb[i, 0] / 255.0 + rgb[i, 1] / 255.0 + rgb[i, 2] / 255.0) / 3.0
    return out_arr
