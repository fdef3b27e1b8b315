# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Haar and SSIM kernels; see ``_kernels_py`` for the reference."""
import numpy as np

cdef double INV_SQRT2 = 0.7071067811865476

BACKEND = "cython"


def haar1d_forward(x):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], h = xv.shape[1] // 2, i, k
    out = np.empty((2, n, h))
    cdef double[:, :, ::1] ov = out
    cdef double e, o
    with nogil:
        for i in range(n):
            for k in range(h):
                e = xv[i, 2 * k]
                o = xv[i, 2 * k + 1]
                ov[0, i, k] = (e + o) * INV_SQRT2
                ov[1, i, k] = (e - o) * INV_SQRT2
    return out


def haar1d_inverse(approx, detail):
    cdef double[:, ::1] av = np.ascontiguousarray(approx, dtype=np.float64)
    cdef double[:, ::1] dv = np.ascontiguousarray(detail, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], h = av.shape[1], i, k
    out = np.empty((n, 2 * h))
    cdef double[:, ::1] ov = out
    cdef double a, d
    with nogil:
        for i in range(n):
            for k in range(h):
                a = av[i, k]
                d = dv[i, k]
                ov[i, 2 * k] = (a + d) * INV_SQRT2
                ov[i, 2 * k + 1] = (a - d) * INV_SQRT2
    return out


def haar2d_forward(x):
    cdef double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], h = xv.shape[1] // 2, w = xv.shape[2] // 2
    cdef Py_ssize_t c, k, l
    out = np.empty((4, n, h, w))
    cdef double[:, :, :, ::1] ov = out
    cdef double x00, x01, x10, x11, a0, d0, a1, d1
    with nogil:
        for c in range(n):
            for k in range(h):
                for l in range(w):
                    x00 = xv[c, 2 * k, 2 * l]
                    x01 = xv[c, 2 * k, 2 * l + 1]
                    x10 = xv[c, 2 * k + 1, 2 * l]
                    x11 = xv[c, 2 * k + 1, 2 * l + 1]
                    a0 = (x00 + x01) * INV_SQRT2
                    d0 = (x00 - x01) * INV_SQRT2
                    a1 = (x10 + x11) * INV_SQRT2
                    d1 = (x10 - x11) * INV_SQRT2
                    ov[0, c, k, l] = (a0 + a1) * INV_SQRT2
                    ov[1, c, k, l] = (d0 + d1) * INV_SQRT2
                    ov[2, c, k, l] = (a0 - a1) * INV_SQRT2
                    ov[3, c, k, l] = (d0 - d1) * INV_SQRT2
    return out


def haar2d_inverse(ll, hl, lh, hh):
    cdef double[:, :, ::1] llv = np.ascontiguousarray(ll, dtype=np.float64)
    cdef double[:, :, ::1] hlv = np.ascontiguousarray(hl, dtype=np.float64)
    cdef double[:, :, ::1] lhv = np.ascontiguousarray(lh, dtype=np.float64)
    cdef double[:, :, ::1] hhv = np.ascontiguousarray(hh, dtype=np.float64)
    cdef Py_ssize_t n = llv.shape[0], h = llv.shape[1], w = llv.shape[2]
    cdef Py_ssize_t c, k, l
    out = np.empty((n, 2 * h, 2 * w))
    cdef double[:, :, ::1] ov = out
    cdef double a0, a1, d0, d1
    with nogil:
        for c in range(n):
            for k in range(h):
                for l in range(w):
                    a0 = (llv[c, k, l] + lhv[c, k, l]) * INV_SQRT2
                    a1 = (llv[c, k, l] - lhv[c, k, l]) * INV_SQRT2
                    d0 = (hlv[c, k, l] + hhv[c, k, l]) * INV_SQRT2
                    d1 = (hlv[c, k, l] - hhv[c, k, l]) * INV_SQRT2
                    ov[c, 2 * k, 2 * l] = (a0 + d0) * INV_SQRT2
                    ov[c, 2 * k, 2 * l + 1] = (a0 - d0) * INV_SQRT2
                    ov[c, 2 * k + 1, 2 * l] = (a1 + d1) * INV_SQRT2
                    ov[c, 2 * k + 1, 2 * l + 1] = (a1 - d1) * INV_SQRT2
    return out


def ssim_mean(x, y, int win, double c1, double c2):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t nh = xv.shape[0] - win + 1, nw = xv.shape[1] - win + 1
    cdef Py_ssize_t i, j, p, q
    cdef double inv = 1.0 / (win * win)
    cdef double mx, my, vx, vy, cxy, dx, dy, acc = 0.0
    with nogil:
        for i in range(nh):
            for j in range(nw):
                mx = 0.0
                my = 0.0
                for p in range(win):
                    for q in range(win):
                        mx += xv[i + p, j + q]
                        my += yv[i + p, j + q]
                mx *= inv
                my *= inv
                vx = 0.0
                vy = 0.0
                cxy = 0.0
                for p in range(win):
                    for q in range(win):
                        dx = xv[i + p, j + q] - mx
                        dy = yv[i + p, j + q] - my
                        vx += dx * dx
                        vy += dy * dy
                        cxy += dx * dy
                vx *= inv
                vy *= inv
                cxy *= inv
                acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / (
                    (mx * mx + my * my + c1) * (vx + vy + c2))
    return acc / (nh * nw)
