# cython: language_level=3
"""Compiled kernels: elastic distances, sliding SFA, BOSS histograms and
distances, autocorrelation and the Durbin-Levinson recursion.

Every public function here has a twin in ``_pycore`` with the same signature
and output contract; ``_kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, sin, M_PI, INFINITY
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint32_t, int32_t, int64_t

cnp.import_array()

DEF REFRESH = 64
DEF STD_EPS = 1e-8
DEF VAR_EPS = 1e-12

# measure codes, mirrored in distances.py
DEF K_EUCLIDEAN = 0
DEF K_DTW = 1
DEF K_WDTW = 2
DEF K_LCSS = 3
DEF K_ERP = 4
DEF K_MSM = 5
DEF K_TWE = 6


cdef inline double _min3(double a, double b, double c) noexcept nogil:
    if b < a:
        a = b
    if c < a:
        a = c
    return a


cdef double _euclidean(const double* a, const double* b, Py_ssize_t n,
                       double cutoff) noexcept nogil:
    cdef double s = 0.0, d
    cdef Py_ssize_t i
    for i in range(n):
        d = a[i] - b[i]
        s += d * d
        if s > cutoff:
            return INFINITY
    return s


cdef double _dtw(const double* a, const double* b, Py_ssize_t n, Py_ssize_t r,
                 const double* wts, double cutoff,
                 double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j, jlo, jhi, k
    cdef double d, v, rowmin
    cdef double* tmp
    for j in range(n + 1):
        prev[j] = INFINITY
    prev[0] = 0.0
    for i in range(1, n + 1):
        jlo = i - r if i - r > 1 else 1
        jhi = i + r if i + r < n else n
        curr[jlo - 1] = INFINITY
        rowmin = INFINITY
        for j in range(jlo, jhi + 1):
            d = a[i - 1] - b[j - 1]
            d = d * d
            if wts != NULL:
                k = i - j if i >= j else j - i
                d = d * wts[k]
            v = d + _min3(prev[j - 1], prev[j], curr[j - 1])
            curr[j] = v
            if v < rowmin:
                rowmin = v
        if jhi < n:
            curr[jhi + 1] = INFINITY
        if rowmin > cutoff:
            return INFINITY
        tmp = prev
        prev = curr
        curr = tmp
    return prev[n]


cdef double _lcss(const double* a, const double* b, Py_ssize_t n, Py_ssize_t r,
                  double eps, double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double* tmp
    for j in range(n + 1):
        prev[j] = 0.0
    for i in range(1, n + 1):
        curr[0] = 0.0
        for j in range(1, n + 1):
            k = i - j if i >= j else j - i
            if k <= r and fabs(a[i - 1] - b[j - 1]) <= eps:
                curr[j] = prev[j - 1] + 1.0
            elif prev[j] >= curr[j - 1]:
                curr[j] = prev[j]
            else:
                curr[j] = curr[j - 1]
        tmp = prev
        prev = curr
        curr = tmp
    return 1.0 - prev[n] / n


cdef double _erp(const double* a, const double* b, Py_ssize_t n, Py_ssize_t r,
                 double g, double cutoff,
                 double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double da, db, dab, v, rowmin
    cdef double* tmp
    prev[0] = 0.0
    for j in range(1, n + 1):
        if j <= r:
            db = b[j - 1] - g
            prev[j] = prev[j - 1] + db * db
        else:
            prev[j] = INFINITY
    for i in range(1, n + 1):
        da = a[i - 1] - g
        da = da * da
        if i <= r:
            curr[0] = prev[0] + da
        else:
            curr[0] = INFINITY
        rowmin = curr[0]
        jlo = i - r if i - r > 1 else 1
        jhi = i + r if i + r < n else n
        if jlo > 1:
            curr[jlo - 1] = INFINITY
        for j in range(jlo, jhi + 1):
            dab = a[i - 1] - b[j - 1]
            db = b[j - 1] - g
            v = _min3(prev[j - 1] + dab * dab, prev[j] + da, curr[j - 1] + db * db)
            curr[j] = v
            if v < rowmin:
                rowmin = v
        if jhi < n:
            curr[jhi + 1] = INFINITY
        if rowmin > cutoff:
            return INFINITY
        tmp = prev
        prev = curr
        curr = tmp
    return prev[n]


cdef inline double _msm_cost(double new, double x, double y, double c) noexcept nogil:
    if (x <= new and new <= y) or (x >= new and new >= y):
        return c
    cdef double d1 = fabs(new - x)
    cdef double d2 = fabs(new - y)
    return c + (d1 if d1 < d2 else d2)


cdef double _msm(const double* a, const double* b, Py_ssize_t n, double c,
                 double cutoff, double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double v, rowmin
    cdef double* tmp
    prev[0] = fabs(a[0] - b[0])
    rowmin = prev[0]
    for j in range(1, n):
        prev[j] = prev[j - 1] + _msm_cost(b[j], a[0], b[j - 1], c)
        if prev[j] < rowmin:
            rowmin = prev[j]
    if rowmin > cutoff:
        return INFINITY
    for i in range(1, n):
        curr[0] = prev[0] + _msm_cost(a[i], a[i - 1], b[0], c)
        rowmin = curr[0]
        for j in range(1, n):
            v = _min3(prev[j - 1] + fabs(a[i] - b[j]),
                      prev[j] + _msm_cost(a[i], a[i - 1], b[j], c),
                      curr[j - 1] + _msm_cost(b[j], a[i], b[j - 1], c))
            curr[j] = v
            if v < rowmin:
                rowmin = v
        if rowmin > cutoff:
            return INFINITY
        tmp = prev
        prev = curr
        curr = tmp
    return prev[n - 1]


cdef double _twe(const double* a, const double* b, Py_ssize_t n, double nu,
                 double lam, double cutoff,
                 double* prev, double* curr) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double ai, ap, bj, bp, v, rowmin
    cdef double* tmp
    prev[0] = 0.0
    for j in range(1, n + 1):
        prev[j] = INFINITY
    for i in range(1, n + 1):
        ai = a[i - 1]
        ap = a[i - 2] if i > 1 else 0.0
        curr[0] = INFINITY
        rowmin = INFINITY
        for j in range(1, n + 1):
            bj = b[j - 1]
            bp = b[j - 2] if j > 1 else 0.0
            k = i - j if i >= j else j - i
            v = _min3(prev[j] + fabs(ai - ap) + nu + lam,
                      curr[j - 1] + fabs(bj - bp) + nu + lam,
                      prev[j - 1] + fabs(ai - bj) + fabs(ap - bp) + 2.0 * nu * k)
            curr[j] = v
            if v < rowmin:
                rowmin = v
        if rowmin > cutoff:
            return INFINITY
        tmp = prev
        prev = curr
        curr = tmp
    return prev[n]


cdef double _dispatch(int kind, const double* a, const double* b, Py_ssize_t n,
                      Py_ssize_t window, double p1, double p2, const double* wts,
                      double cutoff, double* prev, double* curr) noexcept nogil:
    if kind == K_EUCLIDEAN:
        return _euclidean(a, b, n, cutoff)
    if kind == K_DTW:
        return _dtw(a, b, n, window, NULL, cutoff, prev, curr)
    if kind == K_WDTW:
        return _dtw(a, b, n, n, wts, cutoff, prev, curr)
    if kind == K_LCSS:
        return _lcss(a, b, n, window, p1, prev, curr)
    if kind == K_ERP:
        return _erp(a, b, n, window, p1, cutoff, prev, curr)
    if kind == K_MSM:
        return _msm(a, b, n, p1, cutoff, prev, curr)
    if kind == K_TWE:
        return _twe(a, b, n, p1, p2, cutoff, prev, curr)
    return -1.0


def pair_distance(int kind, const double[::1] a, const double[::1] b,
                  Py_ssize_t window, double p1, double p2,
                  const double[::1] weights, double cutoff):
    """Distance between two equal-length series; INF once ``cutoff`` is provably exceeded."""
    cdef Py_ssize_t n = a.shape[0]
    cdef double* buf = <double*> malloc(2 * (n + 1) * sizeof(double))
    cdef const double* wts = &weights[0] if weights.shape[0] > 0 else NULL
    cdef double d
    if buf == NULL:
        raise MemoryError()
    with nogil:
        d = _dispatch(kind, &a[0], &b[0], n, window, p1, p2, wts, cutoff,
                      buf, buf + n + 1)
    free(buf)
    if d < 0:
        raise ValueError(f"unknown measure code {kind}")
    return d


def distance_matrix(int kind, const double[:, ::1] A, const double[:, ::1] B,
                    Py_ssize_t window, double p1, double p2,
                    const double[::1] weights, bint early_abandon):
    """Distances from every row of ``A`` to every row of ``B``.

    With ``early_abandon`` the running row minimum is used as the cutoff, so
    entries that cannot be the row minimum (or tie it) may come back INF.
    """
    cdef Py_ssize_t m = A.shape[0], c = B.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j
    cdef double best, d
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef const double* wts = &weights[0] if weights.shape[0] > 0 else NULL
    if m == 0 or c == 0:
        return out
    cdef double* buf = <double*> malloc(2 * (n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    with nogil:
        for i in range(m):
            best = INFINITY
            for j in range(c):
                d = _dispatch(kind, &A[i, 0], &B[j, 0], n, window, p1, p2, wts,
                              best if early_abandon else INFINITY,
                              buf, buf + n + 1)
                D[i, j] = d
                if d < best:
                    best = d
    free(buf)
    return out


def sfa_windows(const double[:, ::1] X, Py_ssize_t w, Py_ssize_t f, bint norm):
    """Low-frequency DFT coefficients of every sliding window of every row.

    Output shape ``(n, L - w + 1, f)``; values interleave real and imaginary
    parts starting at bin 1 when ``norm`` else bin 0, each window scaled by
    the inverse of its standard deviation.
    """
    cdef Py_ssize_t n = X.shape[0], L = X.shape[1]
    cdef Py_ssize_t nwin = L - w + 1
    cdef Py_ssize_t start = 1 if norm else 0
    cdef Py_ssize_t nb = (f + 1) // 2
    cdef Py_ssize_t row, t, k, m, q
    cdef bint use_mft = w > 16
    cdef double s1, s2, mean, var, scale, xo, xn, re, im, x
    out = np.empty((n, nwin, f), dtype=np.float64)
    cdef double[:, :, ::1] O = out
    ctab = np.empty((nb, w), dtype=np.float64)
    stab = np.empty((nb, w), dtype=np.float64)
    rot = np.empty((nb, 2), dtype=np.float64)
    for k in range(nb):
        for m in range(w):
            ctab[k, m] = cos(2.0 * M_PI * (k + start) * m / w)
            stab[k, m] = sin(2.0 * M_PI * (k + start) * m / w)
        rot[k, 0] = cos(2.0 * M_PI * (k + start) / w)
        rot[k, 1] = sin(2.0 * M_PI * (k + start) / w)
    cdef double[:, ::1] C = ctab
    cdef double[:, ::1] S = stab
    cdef double[:, ::1] R = rot
    # DC and Nyquist bins of a real signal have no imaginary part
    flags = np.array([(k + start) == 0 or 2 * (k + start) == w for k in range(nb)], dtype=np.uint8)
    cdef unsigned char[::1] real_bin = flags
    cdef double* res = <double*> malloc(nb * sizeof(double))
    cdef double* ims = <double*> malloc(nb * sizeof(double))
    if res == NULL or ims == NULL:
        free(res)
        free(ims)
        raise MemoryError()
    with nogil:
        for row in range(n):
            for t in range(nwin):
                if t % REFRESH == 0:
                    s1 = 0.0
                    s2 = 0.0
                    for m in range(w):
                        x = X[row, t + m]
                        s1 += x
                        s2 += x * x
                else:
                    xo = X[row, t - 1]
                    xn = X[row, t + w - 1]
                    s1 += xn - xo
                    s2 += xn * xn - xo * xo
                if not use_mft or t % REFRESH == 0:
                    for k in range(nb):
                        re = 0.0
                        im = 0.0
                        for m in range(w):
                            x = X[row, t + m]
                            re += x * C[k, m]
                            im -= x * S[k, m]
                        res[k] = re
                        ims[k] = im
                else:
                    xo = X[row, t - 1]
                    xn = X[row, t + w - 1]
                    for k in range(nb):
                        re = res[k] + xn - xo
                        im = ims[k]
                        res[k] = re * R[k, 0] - im * R[k, 1]
                        ims[k] = re * R[k, 1] + im * R[k, 0]
                mean = s1 / w
                var = s2 / w - mean * mean
                if var < 0.0:
                    var = 0.0
                scale = sqrt(var)
                scale = 1.0 if scale < STD_EPS else 1.0 / scale
                for q in range(f):
                    if q % 2 == 0:
                        O[row, t, q] = res[q // 2] * scale
                    elif real_bin[q // 2]:
                        O[row, t, q] = 0.0
                    else:
                        O[row, t, q] = ims[q // 2] * scale
    free(res)
    free(ims)
    return out


def sfa_words(const double[:, :, ::1] coeffs, const double[:, ::1] breakpoints):
    """Quantize coefficient vectors into integer word ids (base alphabet)."""
    cdef Py_ssize_t n = coeffs.shape[0], nwin = coeffs.shape[1], f = coeffs.shape[2]
    cdef Py_ssize_t nbp = breakpoints.shape[1]
    cdef uint32_t alpha = <uint32_t> (nbp + 1)
    cdef Py_ssize_t i, t, q, b
    cdef uint32_t word, sym
    cdef double v
    out = np.empty((n, nwin), dtype=np.uint32)
    cdef uint32_t[:, ::1] W = out
    with nogil:
        for i in range(n):
            for t in range(nwin):
                word = 0
                for q in range(f):
                    v = coeffs[i, t, q]
                    sym = 0
                    for b in range(nbp):
                        if breakpoints[q, b] < v:
                            sym += 1
                    word = word * alpha + sym
                W[i, t] = word
    return out


cdef int _cmp_u32(const void* x, const void* y) noexcept nogil:
    cdef uint32_t a = (<const uint32_t*> x)[0]
    cdef uint32_t b = (<const uint32_t*> y)[0]
    return (a > b) - (a < b)


def histograms(const uint32_t[:, ::1] words):
    """Numerosity-reduced word histograms in CSR form ``(indptr, words, counts)``."""
    cdef Py_ssize_t n = words.shape[0], nwin = words.shape[1]
    cdef Py_ssize_t i, t, pos, start, u, total
    cdef uint32_t last
    kept = np.empty(n * nwin, dtype=np.uint32)
    cdef uint32_t[::1] K = kept
    rowstart = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] RS = rowstart
    uniq = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] U = uniq
    with nogil:
        pos = 0
        for i in range(n):
            RS[i] = pos
            for t in range(nwin):
                if t == 0 or words[i, t] != words[i, t - 1]:
                    K[pos] = words[i, t]
                    pos += 1
            RS[i + 1] = pos
            start = RS[i]
            if pos > start:
                qsort(&K[start], pos - start, sizeof(uint32_t), _cmp_u32)
                u = 1
                for t in range(start + 1, pos):
                    if K[t] != K[t - 1]:
                        u += 1
                U[i + 1] = U[i] + u
            else:
                U[i + 1] = U[i]
    total = U[n]
    out_w = np.empty(total, dtype=np.uint32)
    out_c = np.empty(total, dtype=np.int32)
    cdef uint32_t[::1] OW = out_w
    cdef int32_t[::1] OC = out_c
    with nogil:
        for i in range(n):
            u = U[i] - 1
            for t in range(RS[i], RS[i + 1]):
                if t == RS[i] or K[t] != K[t - 1]:
                    u += 1
                    OW[u] = K[t]
                    OC[u] = 1
                else:
                    OC[u] += 1
    return uniq, out_w, out_c


cdef double _boss(const uint32_t* aw, const int32_t* ac, Py_ssize_t na,
                  const uint32_t* bw, const int32_t* bc, Py_ssize_t nb) noexcept nogil:
    cdef Py_ssize_t i = 0, j = 0
    cdef double s = 0.0, d
    while i < na:
        while j < nb and bw[j] < aw[i]:
            j += 1
        if j < nb and bw[j] == aw[i]:
            d = ac[i] - bc[j]
        else:
            d = ac[i]
        s += d * d
        i += 1
    return s


def boss_distance_matrix(const int64_t[::1] a_ptr, const uint32_t[::1] a_words,
                         const int32_t[::1] a_counts, const int64_t[::1] a_rows,
                         const int64_t[::1] b_ptr, const uint32_t[::1] b_words,
                         const int32_t[::1] b_counts, const int64_t[::1] b_rows):
    """BOSS distance from each selected histogram of A to each selected one of B."""
    cdef Py_ssize_t m = a_rows.shape[0], c = b_rows.shape[0], i, j
    cdef int64_t ra, rb
    out = np.empty((m, c), dtype=np.float64)
    cdef double[:, ::1] D = out
    if m == 0 or c == 0:
        return out
    with nogil:
        for i in range(m):
            ra = a_rows[i]
            for j in range(c):
                rb = b_rows[j]
                D[i, j] = _boss(&a_words[0] + a_ptr[ra], &a_counts[0] + a_ptr[ra],
                                a_ptr[ra + 1] - a_ptr[ra],
                                &b_words[0] + b_ptr[rb], &b_counts[0] + b_ptr[rb],
                                b_ptr[rb + 1] - b_ptr[rb])
    return out


def boss_candidate_distances(const int64_t[::1] ptr, const uint32_t[::1] words,
                             const int32_t[::1] counts,
                             const int64_t[:, ::1] inst_rows,
                             const int64_t[:, ::1] ex_rows):
    """Batched BOSS distances for many dictionary candidates over one CSR pool.

    ``inst_rows`` is (candidates, m) and ``ex_rows`` is (candidates, c), both
    holding global CSR rows; the result is (candidates, m, c).
    """
    cdef Py_ssize_t nc = inst_rows.shape[0], m = inst_rows.shape[1]
    cdef Py_ssize_t c = ex_rows.shape[1], k, i, j
    cdef int64_t ra, rb
    out = np.empty((nc, m, c), dtype=np.float64)
    cdef double[:, :, ::1] D = out
    if nc == 0 or m == 0 or c == 0:
        return out
    with nogil:
        for k in range(nc):
            for i in range(m):
                ra = inst_rows[k, i]
                for j in range(c):
                    rb = ex_rows[k, j]
                    D[k, i, j] = _boss(&words[0] + ptr[ra], &counts[0] + ptr[ra],
                                       ptr[ra + 1] - ptr[ra],
                                       &words[0] + ptr[rb], &counts[0] + ptr[rb],
                                       ptr[rb + 1] - ptr[rb])
    return out


def acf(const double[:, ::1] S, Py_ssize_t max_lag):
    """Autocorrelation at lags 1..max_lag of every row; flat rows give zeros."""
    cdef Py_ssize_t n = S.shape[0], m = S.shape[1], i, t, lag
    cdef double mean, denom, s
    out = np.zeros((n, max_lag), dtype=np.float64)
    cdef double[:, ::1] O = out
    cdef double* cen = <double*> malloc((m if m > 0 else 1) * sizeof(double))
    if cen == NULL:
        raise MemoryError()
    with nogil:
        for i in range(n):
            mean = 0.0
            for t in range(m):
                mean += S[i, t]
            mean /= m
            denom = 0.0
            for t in range(m):
                cen[t] = S[i, t] - mean
                denom += cen[t] * cen[t]
            if denom <= VAR_EPS:
                continue
            for lag in range(1, max_lag + 1):
                s = 0.0
                for t in range(m - lag):
                    s += cen[t] * cen[t + lag]
                O[i, lag - 1] = s / denom
    free(cen)
    return out


def durbin_levinson(const double[:, ::1] R):
    """PACF and final AR coefficients from autocorrelations at lags 1..p."""
    cdef Py_ssize_t n = R.shape[0], p = R.shape[1], i, k, j
    cdef double v, num, phikk
    pacf = np.zeros((n, p), dtype=np.float64)
    ar = np.zeros((n, p), dtype=np.float64)
    cdef double[:, ::1] P = pacf
    cdef double[:, ::1] A = ar
    cdef double* phi = <double*> malloc((p + 1) * sizeof(double))
    cdef double* tmp = <double*> malloc((p + 1) * sizeof(double))
    if phi == NULL or tmp == NULL:
        free(phi)
        free(tmp)
        raise MemoryError()
    with nogil:
        for i in range(n):
            if p == 0:
                continue
            for j in range(p + 1):
                phi[j] = 0.0
            v = 1.0
            for k in range(1, p + 1):
                if v <= VAR_EPS:
                    break
                num = R[i, k - 1]
                for j in range(1, k):
                    num -= phi[j] * R[i, k - j - 1]
                phikk = num / v
                for j in range(1, k):
                    tmp[j] = phi[j] - phikk * phi[k - j]
                for j in range(1, k):
                    phi[j] = tmp[j]
                phi[k] = phikk
                P[i, k - 1] = phikk
                v = v * (1.0 - phikk * phikk)
            for j in range(1, p + 1):
                A[i, j - 1] = phi[j]
    free(phi)
    free(tmp)
    return pacf, ar
