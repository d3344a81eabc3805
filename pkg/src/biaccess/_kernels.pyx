# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batch cylinder verdicts, ray Newton tracing, rasters.

Mirrors ``_fallback``; cylinder arithmetic uses 128-bit integers.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, atan2, fabs, sqrt, M_PI, fmod, isfinite

cnp.import_array()

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef enum:
    CAP = 512

cdef enum:
    V_NO = 0
    V_YES = 1
    V_UNDECIDED = 2
    V_OVERFLOW = 3


cdef inline i128 pmod(i128 a, i128 n) nogil:
    cdef i128 r = a % n
    if r < 0:
        r += n
    return r


cdef int labels_c(long long k, long long m, long long p, long long q, int depth, char* out) nogil:
    # returns 1 if any boundary hit
    cdef i128 b1 = <i128>p * m
    cdef i128 b2 = b1 + <i128>q * m
    cdef i128 r = k % m
    cdef i128 x
    cdef int j, star = 0
    for j in range(depth):
        x = 2 * <i128>q * r
        if x == b1 or x == b2:
            out[j] = 42  # '*'
            star = 1
        elif b1 < x and x < b2:
            out[j] = 65
        else:
            out[j] = 66
        r = (2 * r) % m
    return star


cdef int intersect_c(i128 s, i128 length, i128 h, i128 hl, i128 n, i128* os, i128* ol, int cnt) nogil:
    cdef i128 s2 = pmod(s - h, n)
    cdef i128 lo, hi, off
    cdef int k
    for k in range(2):
        off = 0 if k == 0 else n
        lo = s2 if s2 > off else off
        hi = s2 + length
        if off + hl < hi:
            hi = off + hl
        if hi > lo:
            if cnt >= CAP:
                return -1
            os[cnt] = pmod(lo + h, n)
            ol[cnt] = hi - lo
            cnt += 1
    return cnt


cdef int cylinder_c(char* word, int d, long long p, long long q, i128* s_out, i128* l_out,
                    i128* tmp_s, i128* tmp_l, i128* n_out) nogil:
    cdef i128 n = 2 * <i128>q * ((<i128>1) << d)
    cdef i128 half = n / 2
    cdef i128 b1 = <i128>p * ((<i128>1) << d)
    cdef i128 ha, hb, h, s, length, s0
    cdef int cnt, newcnt, i, j, b
    ha = b1
    hb = pmod(b1 + half, n)
    s_out[0] = ha if word[d - 1] == 65 else hb
    l_out[0] = half
    cnt = 1
    for j in range(d - 2, -1, -1):
        h = ha if word[j] == 65 else hb
        newcnt = 0
        for i in range(cnt):
            s = s_out[i]
            length = l_out[i]
            for b in range(2):
                s0 = s / 2 if b == 0 else (s + n) / 2
                newcnt = intersect_c(s0, length / 2, h, half, n, tmp_s, tmp_l, newcnt)
                if newcnt < 0:
                    return -1
        for i in range(newcnt):
            s_out[i] = tmp_s[i]
            l_out[i] = tmp_l[i]
        cnt = newcnt
    n_out[0] = n
    return cnt


cdef int biaccess_one(long long k, long long m, long long p, long long q, int depth, char* word,
                      i128* s1, i128* l1, i128* s2, i128* l2) nogil:
    cdef int d0, cnt, i, found = -1
    cdef i128 n0, n, x, main_s = 0, main_l = 0, scale, off
    if labels_c(k, m, p, q, depth, word):
        return V_UNDECIDED
    d0 = depth / 2
    if d0 < 1:
        d0 = 1
    cnt = cylinder_c(word, d0, p, q, s1, l1, s2, l2, &n0)
    if cnt < 0:
        return V_OVERFLOW
    for i in range(cnt):
        x = pmod(<i128>k * n0 - s1[i] * m, n0 * m)
        if 0 < x and x < l1[i] * m:
            if found >= 0:
                return V_UNDECIDED
            found = i
            main_s = s1[i]
            main_l = l1[i]
    if found < 0:
        return V_UNDECIDED
    cnt = cylinder_c(word, depth, p, q, s1, l1, s2, l2, &n)
    if cnt < 0:
        return V_OVERFLOW
    scale = n / n0
    main_s *= scale
    main_l *= scale
    for i in range(cnt):
        off = pmod(s1[i] - main_s, n)
        if off + l1[i] > main_l:
            return V_YES
    return V_NO


def biaccess_batch(cnp.int64_t[::1] ks, long long m, long long p, long long q, int depth):
    cdef Py_ssize_t i, n = ks.shape[0]
    out = np.empty(n, dtype=np.int8)
    cdef cnp.int8_t[::1] ov = out
    cdef char[256] word
    cdef i128[CAP] s1, l1, s2, l2
    if depth > 250:
        raise ValueError("depth too large for the compiled kernel")
    with nogil:
        for i in range(n):
            ov[i] = biaccess_one(ks[i], m, p, q, depth, word, s1, l1, s2, l2)
    return out


cdef int spine_one(long long k, long long m, long long p, long long q, int depth, char* a, char* b) nogil:
    cdef int j
    k = k % m
    if (2 * <i128>k) % m == 0:
        return V_YES
    labels_c(k, m, p, q, depth, a)
    labels_c(m - k, m, p, q, depth, b)
    for j in range(depth):
        if a[j] == b[j]:
            continue
        if a[j] == 42 or b[j] == 42:
            return V_UNDECIDED
        return V_NO
    return V_YES


def spine_batch(cnp.int64_t[::1] ks, long long m, long long p, long long q, int depth):
    cdef Py_ssize_t i, n = ks.shape[0]
    out = np.empty(n, dtype=np.int8)
    cdef cnp.int8_t[::1] ov = out
    cdef char[256] a
    cdef char[256] b
    if depth > 250:
        raise ValueError("depth too large for the compiled kernel")
    with nogil:
        for i in range(n):
            ov[i] = spine_one(ks[i], m, p, q, depth, a, b)
    return out


def ray_newton(double complex c, double complex z0, cnp.int64_t[::1] ns, double[::1] logw,
               double[::1] argw, int newton_iter=60):
    """Newton-solve f^n(z) = W level by level; returns (points, levels reached)."""
    cdef Py_ssize_t j, L = ns.shape[0]
    pts = np.zeros(L, dtype=np.complex128)
    cdef double complex[::1] pv = pts
    cdef double complex z = z0, w, dw, step, delta
    cdef long long it, i, n
    cdef int ok
    cdef double lr, li, d, ad, ast, prev, first = 1e300
    cdef Py_ssize_t reached = 0
    with nogil:
        for j in range(L):
            n = ns[j]
            ok = 0
            prev = 1e300
            for it in range(newton_iter):
                w = z
                dw = 1.0
                for i in range(n):
                    dw = 2.0 * w * dw
                    w = w * w + c
                if w == 0 or dw == 0:
                    break
                lr = log(sqrt(w.real * w.real + w.imag * w.imag))
                li = atan2(w.imag, w.real)
                d = fmod(argw[j] - li + M_PI, 2 * M_PI)
                if d < 0:
                    d += 2 * M_PI
                delta = (logw[j] - lr) + 1j * (d - M_PI)
                step = delta * w / dw
                z = z + step
                ad = sqrt(delta.real * delta.real + delta.imag * delta.imag)
                ast = sqrt(step.real * step.real + step.imag * step.imag)
                if ad < 1e-11 or ast <= 1e-14 * max(1.0, sqrt(z.real * z.real + z.imag * z.imag)):
                    ok = 1
                    break
                # stalled at the rounding floor, which grows like 2^n in log space
                if it == 0:
                    first = ast
                elif ad < 0.5 and ast >= 0.5 * prev and ast < 1e-5 * first:
                    ok = 1
                    break
                prev = ast
            if not ok or not isfinite(z.real) or not isfinite(z.imag):
                break
            pv[j] = z
            reached = j + 1
    return pts, reached


def escape_raster(double complex c, double xmin, double xmax, double ymin, double ymax,
                  int width, int height, int max_iter):
    out = np.full((height, width), -1, dtype=np.int32)
    cdef int[:, ::1] ov = out
    cdef int i, j, it
    cdef double x, y, zr, zi, t
    cdef double r2 = max(4.0, (1 + sqrt(c.real * c.real + c.imag * c.imag)) ** 2) * 4
    with nogil:
        for j in range(height):
            y = ymax - (j + 0.5) * (ymax - ymin) / height
            for i in range(width):
                x = xmin + (i + 0.5) * (xmax - xmin) / width
                zr = x
                zi = y
                for it in range(max_iter):
                    if zr * zr + zi * zi > r2:
                        ov[j, i] = it
                        break
                    t = zr * zr - zi * zi + c.real
                    zi = 2 * zr * zi + c.imag
                    zr = t
    return out


def basin_attracted(double complex c, double complex[::1] zs, double complex[::1] cycle,
                    double radius, int max_iter):
    cdef Py_ssize_t idx, k, n = zs.shape[0], nc = cycle.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ov = out
    cdef double complex z
    cdef double bail = 4 + sqrt(c.real * c.real + c.imag * c.imag)
    cdef int it, hit
    with nogil:
        for idx in range(n):
            z = zs[idx]
            hit = 0
            for it in range(max_iter):
                if sqrt(z.real * z.real + z.imag * z.imag) > bail:
                    break
                for k in range(nc):
                    if sqrt((z - cycle[k]).real ** 2 + (z - cycle[k]).imag ** 2) < radius:
                        hit = 1
                        break
                if hit:
                    break
                z = z * z + c
            ov[idx] = hit
    return out
