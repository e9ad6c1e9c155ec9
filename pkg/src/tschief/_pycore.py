"""NumPy implementations of the compiled kernels.

Same signatures and output contracts as ``_core``.  The dynamic programs are
vectorized along a row of the cost table with a running-minimum scan, and
across all exemplars at once, so they stay usable on small problems.
Early abandoning is not performed here: every entry is exact, which the
contract permits.
"""

import numpy as np

REFRESH = 64
STD_EPS = 1e-8
VAR_EPS = 1e-12

K_EUCLIDEAN, K_DTW, K_WDTW, K_LCSS, K_ERP, K_MSM, K_TWE = range(7)


def _scan(t, h):
    """Solve ``u[j] = min(t[j], u[j-1] + h[j])`` along the last axis."""
    s = np.cumsum(h, axis=-1)
    with np.errstate(invalid="ignore"):
        u = s + np.minimum.accumulate(t - s, axis=-1)
    u[np.isnan(u)] = np.inf
    return u


def _band(n, r):
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :]) <= r


def _dtw_rows(a, B, r, wts):
    c, n = B.shape
    inside = _band(n, r)
    prev = np.full((c, n + 1), np.inf)
    prev[:, 0] = 0.0
    for i in range(n):
        d = (a[i] - B) ** 2
        if wts is not None:
            d = d * wts[np.abs(i - np.arange(n))]
        t = np.where(inside[i], np.minimum(prev[:, :-1], prev[:, 1:]) + d, np.inf)
        curr = np.empty_like(prev)
        curr[:, 0] = np.inf
        curr[:, 1:] = np.where(inside[i], _scan(t, d), np.inf)
        prev = curr
    return prev[:, n]


def _lcss_rows(a, B, r, eps):
    c, n = B.shape
    inside = _band(n, r)
    prev = np.zeros((c, n + 1))
    for i in range(n):
        match = inside[i] & (np.abs(a[i] - B) <= eps)
        cand = np.maximum(prev[:, 1:], np.where(match, prev[:, :-1] + 1.0, 0.0))
        curr = np.zeros_like(prev)
        curr[:, 1:] = np.maximum.accumulate(cand, axis=1)
        prev = curr
    return 1.0 - prev[:, n] / n


def _erp_rows(a, B, r, g):
    c, n = B.shape
    full = np.abs(np.arange(n + 1)[:, None] - np.arange(n + 1)[None, :]) <= r
    gap_b = (B - g) ** 2
    prev = np.zeros((c, n + 1))
    prev[:, 1:] = np.cumsum(gap_b, axis=1)
    prev[:, ~full[0]] = np.inf
    for i in range(1, n + 1):
        da = (a[i - 1] - g) ** 2
        first = prev[:, 0] + da if full[i, 0] else np.full(c, np.inf)
        t = np.minimum(prev[:, :-1] + (a[i - 1] - B) ** 2, prev[:, 1:] + da)
        t = np.where(full[i, 1:], t, np.inf)
        tt = np.concatenate([first[:, None], t], axis=1)
        hh = np.concatenate([np.zeros((c, 1)), gap_b], axis=1)
        prev = np.where(full[i], _scan(tt, hh), np.inf)
    return prev[:, n]


def _msm_cost(new, x, y, c):
    between = ((x <= new) & (new <= y)) | ((x >= new) & (new >= y))
    return np.where(between, c, c + np.minimum(np.abs(new - x), np.abs(new - y)))


def _msm_rows(a, B, cost):
    c, n = B.shape
    prev = np.empty((c, n))
    prev[:, 0] = np.abs(a[0] - B[:, 0])
    h0 = _msm_cost(B[:, 1:], a[0], B[:, :-1], cost)
    prev[:, 1:] = prev[:, :1] + np.cumsum(h0, axis=1)
    for i in range(1, n):
        first = prev[:, 0] + _msm_cost(a[i], a[i - 1], B[:, 0], cost)
        t = np.minimum(prev[:, :-1] + np.abs(a[i] - B[:, 1:]),
                       prev[:, 1:] + _msm_cost(a[i], a[i - 1], B[:, 1:], cost))
        h = _msm_cost(B[:, 1:], a[i], B[:, :-1], cost)
        tt = np.concatenate([first[:, None], t], axis=1)
        hh = np.concatenate([np.zeros((c, 1)), h], axis=1)
        prev = _scan(tt, hh)
    return prev[:, n - 1]


def _twe_rows(a, B, nu, lam):
    c, n = B.shape
    a0 = np.concatenate([[0.0], a])
    B0 = np.concatenate([np.zeros((c, 1)), B], axis=1)
    steps = np.arange(1, n + 1)
    prev = np.full((c, n + 1), np.inf)
    prev[:, 0] = 0.0
    h = np.abs(B0[:, 1:] - B0[:, :-1]) + nu + lam
    for i in range(1, n + 1):
        vert = prev[:, 1:] + abs(a0[i] - a0[i - 1]) + nu + lam
        diag = (prev[:, :-1] + np.abs(a0[i] - B0[:, 1:])
                + np.abs(a0[i - 1] - B0[:, :-1]) + 2.0 * nu * np.abs(i - steps))
        curr = np.empty_like(prev)
        curr[:, 0] = np.inf
        curr[:, 1:] = _scan(np.minimum(vert, diag), h)
        prev = curr
    return prev[:, n]


def _rows(kind, a, B, window, p1, p2, wts):
    n = B.shape[1]
    if kind == K_EUCLIDEAN:
        return ((a - B) ** 2).sum(axis=1)
    if kind == K_DTW:
        return _dtw_rows(a, B, window, None)
    if kind == K_WDTW:
        return _dtw_rows(a, B, n, wts)
    if kind == K_LCSS:
        return _lcss_rows(a, B, window, p1)
    if kind == K_ERP:
        return _erp_rows(a, B, window, p1)
    if kind == K_MSM:
        return _msm_rows(a, B, p1)
    if kind == K_TWE:
        return _twe_rows(a, B, p1, p2)
    raise ValueError(f"unknown measure code {kind}")


def pair_distance(kind, a, b, window, p1, p2, weights, cutoff):
    wts = np.asarray(weights) if len(weights) else None
    d = float(_rows(kind, np.asarray(a), np.asarray(b)[None, :], window, p1, p2, wts)[0])
    return np.inf if d > cutoff else d


def distance_matrix(kind, A, B, window, p1, p2, weights, early_abandon):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.empty((A.shape[0], B.shape[0]))
    if out.size == 0:
        return out
    wts = np.asarray(weights) if len(weights) else None
    for i, a in enumerate(A):
        out[i] = _rows(kind, a, B, window, p1, p2, wts)
    return out


def sfa_windows(X, w, f, norm):
    X = np.asarray(X, dtype=np.float64)
    win = np.lib.stride_tricks.sliding_window_view(X, w, axis=1)
    start = 1 if norm else 0
    nb = (f + 1) // 2
    spec = np.fft.rfft(win, axis=2)
    if spec.shape[2] < start + nb:
        pad = start + nb - spec.shape[2]
        spec = np.concatenate([spec, np.zeros(spec.shape[:2] + (pad,))], axis=2)
    spec = spec[:, :, start:start + nb]
    std = win.std(axis=2)
    scale = np.where(std < STD_EPS, 1.0, 1.0 / np.where(std < STD_EPS, 1.0, std))
    out = np.empty(spec.shape[:2] + (2 * nb,))
    out[:, :, 0::2] = spec.real
    out[:, :, 1::2] = spec.imag
    return np.ascontiguousarray(out[:, :, :f] * scale[:, :, None])


def sfa_words(coeffs, breakpoints):
    coeffs = np.asarray(coeffs)
    breakpoints = np.asarray(breakpoints)
    alpha = breakpoints.shape[1] + 1
    syms = (breakpoints[None, None, :, :] < coeffs[:, :, :, None]).sum(axis=3)
    words = np.zeros(coeffs.shape[:2], dtype=np.uint64)
    for q in range(coeffs.shape[2]):
        words = words * alpha + syms[:, :, q].astype(np.uint64)
    return words.astype(np.uint32)


def histograms(words):
    words = np.asarray(words)
    ptr = [0]
    ws, cs = [], []
    for row in words:
        keep = np.ones(len(row), dtype=bool)
        keep[1:] = row[1:] != row[:-1]
        u, cnt = np.unique(row[keep], return_counts=True)
        ws.append(u.astype(np.uint32))
        cs.append(cnt.astype(np.int32))
        ptr.append(ptr[-1] + len(u))
    cat_w = np.concatenate(ws) if ws else np.empty(0, np.uint32)
    cat_c = np.concatenate(cs) if cs else np.empty(0, np.int32)
    return np.asarray(ptr, dtype=np.int64), cat_w, cat_c


def _boss(aw, ac, bw, bc):
    if len(aw) == 0:
        return 0.0
    idx = np.searchsorted(bw, aw)
    idx_c = np.minimum(idx, max(len(bw) - 1, 0))
    hit = (idx < len(bw)) & (bw[idx_c] == aw) if len(bw) else np.zeros(len(aw), bool)
    other = np.where(hit, bc[idx_c] if len(bw) else 0, 0)
    d = ac.astype(np.float64) - other
    return float((d * d).sum())


def boss_distance_matrix(a_ptr, a_words, a_counts, a_rows,
                         b_ptr, b_words, b_counts, b_rows):
    out = np.empty((len(a_rows), len(b_rows)))
    for i, ra in enumerate(a_rows):
        aw = a_words[a_ptr[ra]:a_ptr[ra + 1]]
        ac = a_counts[a_ptr[ra]:a_ptr[ra + 1]]
        for j, rb in enumerate(b_rows):
            out[i, j] = _boss(aw, ac, b_words[b_ptr[rb]:b_ptr[rb + 1]],
                              b_counts[b_ptr[rb]:b_ptr[rb + 1]])
    return out


def boss_candidate_distances(ptr, words, counts, inst_rows, ex_rows):
    inst_rows = np.asarray(inst_rows)
    ex_rows = np.asarray(ex_rows)
    out = np.empty((inst_rows.shape[0], inst_rows.shape[1], ex_rows.shape[1]))
    for k in range(inst_rows.shape[0]):
        out[k] = boss_distance_matrix(ptr, words, counts, inst_rows[k],
                                      ptr, words, counts, ex_rows[k])
    return out


def acf(S, max_lag):
    S = np.asarray(S, dtype=np.float64)
    n, m = S.shape
    out = np.zeros((n, max_lag))
    cen = S - S.mean(axis=1, keepdims=True)
    denom = (cen * cen).sum(axis=1)
    ok = denom > VAR_EPS
    for lag in range(1, max_lag + 1):
        num = (cen[:, :m - lag] * cen[:, lag:]).sum(axis=1)
        out[ok, lag - 1] = num[ok] / denom[ok]
    return out


def durbin_levinson(R):
    R = np.asarray(R, dtype=np.float64)
    n, p = R.shape
    pacf = np.zeros((n, p))
    ar = np.zeros((n, p))
    for i in range(n):
        phi = np.zeros(p + 1)
        v = 1.0
        for k in range(1, p + 1):
            if v <= VAR_EPS:
                break
            num = R[i, k - 1] - sum(phi[j] * R[i, k - j - 1] for j in range(1, k))
            phikk = num / v
            phi[1:k] = phi[1:k] - phikk * phi[k - 1:0:-1]
            phi[k] = phikk
            pacf[i, k - 1] = phikk
            v *= 1.0 - phikk * phikk
        ar[i] = phi[1:]
    return pacf, ar
