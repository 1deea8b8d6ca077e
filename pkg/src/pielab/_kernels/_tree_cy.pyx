# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree-growth kernel.

Mirrors ``_tree_py.grow_tree`` operation-for-operation (accumulation
order, tie-breaking, PRNG stream) so both backends grow identical trees.
See the fallback module for the algorithm contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN
from libc.stdint cimport int32_t, uint64_t

cnp.import_array()

cdef double _GAIN_EPS = 1e-12


cdef inline uint64_t _splitmix64(uint64_t* state) nogil:
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef void _feature_subset(int n_features, int mtry, uint64_t* state,
                          int32_t* perm, int32_t* out) nogil:
    cdef int i, j, k
    cdef int32_t tmp
    for i in range(n_features):
        perm[i] = i
    for i in range(mtry):
        j = i + <int>(_splitmix64(state) % <uint64_t>(n_features - i))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    # insertion sort of the first mtry entries, ascending
    for i in range(mtry):
        out[i] = perm[i]
    for i in range(1, mtry):
        tmp = out[i]
        k = i - 1
        while k >= 0 and out[k] > tmp:
            out[k + 1] = out[k]
            k -= 1
        out[k + 1] = tmp


def grow_tree(cnp.ndarray[cnp.float64_t, ndim=2] xt,
              cnp.ndarray[cnp.float64_t, ndim=1] y,
              cnp.ndarray[cnp.float64_t, ndim=1] w,
              cnp.ndarray[cnp.int32_t, ndim=2] sorted_rows,
              int mtry, double min_leaf_w, int max_depth, seed):
    """Grow one regression tree; see ``_tree_py.grow_tree``."""
    cdef int n_features = xt.shape[0]
    cdef Py_ssize_t n_total = xt.shape[1]
    cdef uint64_t state = <uint64_t>(int(seed) & ((1 << 64) - 1))

    out_feature = []
    out_threshold = []
    out_left = []
    out_right = []
    out_value = []

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] left_flag = np.zeros(n_total, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] perm_buf = np.empty(n_features, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] cand_buf = np.empty(n_features, dtype=np.int32)

    cdef cnp.ndarray[cnp.int32_t, ndim=2] rows, left_rows, right_rows
    cdef double[:, :] xt_v = xt
    cdef double[:] y_v = y
    cdef double[:] w_v = w
    cdef cnp.uint8_t[:] flag_v = left_flag
    cdef int32_t[:] perm_v = perm_buf
    cdef int32_t[:] cand_v = cand_buf
    cdef int32_t[:, :] rows_v, lrows_v, rrows_v

    cdef Py_ssize_t m, i, pos, n_left, il, ir
    cdef int idx, parent, depth, f, ci, n_cand, best_feature, best_pos
    cdef bint is_left
    cdef double total_w, total_s, value, parent_term, min_gain
    cdef double best_score, cw, cs, wl, sl, wr, sr, score, a, b, threshold
    cdef double prev_x, cur_x
    cdef int32_t r

    stack = [(sorted_rows, 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        rows_v = rows
        idx = len(out_feature)
        if parent >= 0:
            if is_left:
                out_left[parent] = idx
            else:
                out_right[parent] = idx

        m = rows.shape[1]
        total_w = 0.0
        total_s = 0.0
        for i in range(m):
            r = rows_v[0, i]
            total_w = total_w + w_v[r]
            total_s = total_s + w_v[r] * y_v[r]
        value = total_s / total_w

        out_feature.append(-1)
        out_threshold.append(NAN)
        out_left.append(-1)
        out_right.append(-1)
        out_value.append(value)

        if m < 2 or depth == max_depth or total_w < 2.0 * min_leaf_w:
            continue

        if mtry < n_features:
            _feature_subset(n_features, mtry, &state, &perm_v[0], &cand_v[0])
            n_cand = mtry
        else:
            for ci in range(n_features):
                cand_v[ci] = ci
            n_cand = n_features

        parent_term = (total_s * total_s) / total_w
        min_gain = parent_term + _GAIN_EPS * (1.0 + parent_term)
        best_score = -INFINITY
        best_feature = -1
        best_pos = -1

        for ci in range(n_cand):
            f = cand_v[ci]
            cw = 0.0
            cs = 0.0
            for i in range(m - 1):
                r = rows_v[f, i]
                cw = cw + w_v[r]
                cs = cs + w_v[r] * y_v[r]
                prev_x = xt_v[f, r]
                cur_x = xt_v[f, rows_v[f, i + 1]]
                if prev_x >= cur_x:
                    continue
                wl = cw
                sl = cs
                if wl < min_leaf_w:
                    continue
                wr = total_w - wl
                if wr < min_leaf_w:
                    continue
                sr = total_s - sl
                score = (sl * sl) / wl + (sr * sr) / wr
                if score > best_score and score > min_gain:
                    best_score = score
                    best_feature = f
                    best_pos = <int>i

        if best_feature < 0:
            continue

        a = xt_v[best_feature, rows_v[best_feature, best_pos]]
        b = xt_v[best_feature, rows_v[best_feature, best_pos + 1]]
        threshold = 0.5 * (a + b)
        if threshold >= b:
            threshold = a

        out_feature[idx] = best_feature
        out_threshold[idx] = threshold

        n_left = best_pos + 1
        for i in range(n_left):
            flag_v[rows_v[best_feature, i]] = 1

        left_rows = np.empty((n_features, n_left), dtype=np.int32)
        right_rows = np.empty((n_features, m - n_left), dtype=np.int32)
        lrows_v = left_rows
        rrows_v = right_rows
        for f in range(n_features):
            il = 0
            ir = 0
            for i in range(m):
                r = rows_v[f, i]
                if flag_v[r]:
                    lrows_v[f, il] = r
                    il += 1
                else:
                    rrows_v[f, ir] = r
                    ir += 1

        for i in range(n_left):
            flag_v[rows_v[best_feature, i]] = 0

        stack.append((right_rows, depth + 1, idx, False))
        stack.append((left_rows, depth + 1, idx, True))

    return (
        np.asarray(out_feature, dtype=np.int32),
        np.asarray(out_threshold, dtype=np.float64),
        np.asarray(out_left, dtype=np.int32),
        np.asarray(out_right, dtype=np.int32),
        np.asarray(out_value, dtype=np.float64),
    )
