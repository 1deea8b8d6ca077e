"""Pure-numpy tree-growth kernel (fallback backend).

Grows one weighted-CART regression tree from presorted row indices. The
algorithm is specified exactly (accumulation order, tie-breaking, PRNG
stream) so the compiled backend in ``_tree_cy.pyx`` reproduces it
bit-for-bit:

  * node statistics (total weight W, weighted target sum S) accumulate
    sequentially in feature-0 sorted order;
  * each candidate feature is scanned in its own sorted order via
    sequential prefix sums; boundary i (between sorted positions i, i+1)
    is valid when the feature values differ strictly and both sides carry
    at least ``min_leaf_w`` weight;
  * the split score is sl*sl/wl + sr*sr/wr with sr = S - sl, wr = W - wl;
    a split must beat the parent term S*S/W by a relative epsilon;
  * ties break to the lowest candidate feature index, then the lowest
    threshold (first strictly-better score wins, features scanned in
    ascending index order);
  * feature subsets are drawn by partial Fisher-Yates on a splitmix64
    stream, consumed only when mtry < p;
  * nodes are emitted in preorder, left child first.
"""

import numpy as np

_U64 = (1 << 64) - 1
_GAIN_EPS = 1e-12


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _U64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
    return state, z ^ (z >> 31)


def _feature_subset(n_features, mtry, state):
    """Partial Fisher-Yates draw of ``mtry`` distinct features, ascending."""
    perm = list(range(n_features))
    for i in range(mtry):
        state, r = _splitmix64(state)
        j = i + r % (n_features - i)
        perm[i], perm[j] = perm[j], perm[i]
    return sorted(perm[:mtry]), state


def grow_tree(xt, y, w, sorted_rows, mtry, min_leaf_w, max_depth, seed):
    """Grow one regression tree.

    Parameters
    ----------
    xt : (p, n) float64
        Feature matrix, one row per feature (full data, original row ids).
    y, w : (n,) float64
        Targets and fitting weights. Rows absent from ``sorted_rows``
        are ignored; included rows must have w > 0.
    sorted_rows : (p, m) int32
        For each feature, the node's row ids sorted ascending by that
        feature (stable order for ties).
    mtry : int
        Candidate features per split.
    min_leaf_w : float
        Minimum total weight per child.
    max_depth : int
        Depth limit; -1 means unlimited.
    seed : int
        splitmix64 seed for feature subsampling.

    Returns
    -------
    (feature, threshold, left, right, value) flat preorder node arrays;
    feature == -1 marks a leaf.
    """
    n_features = xt.shape[0]
    state = int(seed) & _U64

    out_feature = []
    out_threshold = []
    out_left = []
    out_right = []
    out_value = []

    # (rows (p, m) int32, depth, parent index, is_left)
    stack = [(sorted_rows, 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        idx = len(out_feature)
        if parent >= 0:
            if is_left:
                out_left[parent] = idx
            else:
                out_right[parent] = idx

        m = rows.shape[1]
        w0 = w[rows[0]]
        cw0 = np.cumsum(w0)
        cs0 = np.cumsum(w0 * y[rows[0]])
        total_w = cw0[-1]
        total_s = cs0[-1]
        value = total_s / total_w

        out_feature.append(-1)
        out_threshold.append(np.nan)
        out_left.append(-1)
        out_right.append(-1)
        out_value.append(value)

        if m < 2 or depth == max_depth or total_w < 2.0 * min_leaf_w:
            continue

        if mtry < n_features:
            candidates, state = _feature_subset(n_features, mtry, state)
        else:
            candidates = range(n_features)

        parent_term = (total_s * total_s) / total_w
        min_gain = parent_term + _GAIN_EPS * (1.0 + parent_term)
        best_score = -np.inf
        best_feature = -1
        best_pos = -1

        for f in candidates:
            rf = rows[f]
            if f == 0:
                cw, cs = cw0, cs0
            else:
                wf = w[rf]
                cw = np.cumsum(wf)
                cs = np.cumsum(wf * y[rf])
            xv = xt[f, rf]
            wl = cw[:-1]
            sl = cs[:-1]
            wr = total_w - wl
            sr = total_s - sl
            score = (sl * sl) / wl + (sr * sr) / wr
            invalid = (xv[:-1] >= xv[1:]) | (wl < min_leaf_w) | (wr < min_leaf_w)
            score[invalid] = -np.inf
            pos = int(np.argmax(score))
            if score[pos] > best_score and score[pos] > min_gain:
                best_score = score[pos]
                best_feature = f
                best_pos = pos

        if best_feature < 0:
            continue

        rbest = rows[best_feature]
        a = xt[best_feature, rbest[best_pos]]
        b = xt[best_feature, rbest[best_pos + 1]]
        threshold = 0.5 * (a + b)
        if threshold >= b:
            threshold = a

        out_feature[idx] = best_feature
        out_threshold[idx] = threshold

        is_left_row = np.zeros(xt.shape[1], dtype=bool)
        is_left_row[rbest[: best_pos + 1]] = True
        n_left = best_pos + 1
        left_rows = np.empty((n_features, n_left), dtype=np.int32)
        right_rows = np.empty((n_features, m - n_left), dtype=np.int32)
        for f in range(n_features):
            mask = is_left_row[rows[f]]
            left_rows[f] = rows[f][mask]
            right_rows[f] = rows[f][~mask]

        stack.append((right_rows, depth + 1, idx, False))
        stack.append((left_rows, depth + 1, idx, True))

    return (
        np.asarray(out_feature, dtype=np.int32),
        np.asarray(out_threshold, dtype=np.float64),
        np.asarray(out_left, dtype=np.int32),
        np.asarray(out_right, dtype=np.int32),
        np.asarray(out_value, dtype=np.float64),
    )
