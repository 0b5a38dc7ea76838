"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at the bottom dispatch on :data:`commevo._accel.USE_NUMBA`.
Both flavours of :func:`best_gini_split` perform the same integer counting
and the same floating point operations in the same order, so they agree
bit for bit; trees grown on either path are identical.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# Gini split search over one presorted numeric column
# --------------------------------------------------------------------------


@njit
def _best_gini_split_nb(xs, ys, n_classes, min_leaf):
    n = xs.shape[0]
    right = np.zeros(n_classes, dtype=np.int64)
    left = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        right[ys[i]] += 1
    s_right = 0
    for c in range(n_classes):
        s_right += right[c] * right[c]
    s_left = 0
    best = -1.0
    best_i = -1
    for i in range(n - 1):
        c = ys[i]
        s_left += 2 * left[c] + 1
        s_right -= 2 * right[c] - 1
        left[c] += 1
        right[c] -= 1
        n_left = i + 1
        n_right = n - n_left
        if n_left < min_leaf or n_right < min_leaf:
            continue
        if xs[i] == xs[i + 1]:
            continue
        score = float(s_left) / n_left + float(s_right) / n_right
        if score > best:
            best = score
            best_i = i
    return best, best_i


def _best_gini_split_np(xs, ys, n_classes, min_leaf):
    n = xs.shape[0]
    if n < 2:
        return -1.0, -1
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), ys] = 1
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    s_left = (left * left).sum(axis=1)
    s_right = (right * right).sum(axis=1)
    n_left = np.arange(1, n, dtype=np.int64)
    n_right = n - n_left
    valid = (n_left >= min_leaf) & (n_right >= min_leaf) & (xs[:-1] != xs[1:])
    if not valid.any():
        return -1.0, -1
    score = s_left.astype(np.float64) / n_left + s_right.astype(np.float64) / n_right
    score = np.where(valid, score, -1.0)
    i = int(np.argmax(score))
    return float(score[i]), i


# --------------------------------------------------------------------------
# Social position fixed point
# --------------------------------------------------------------------------


@njit
def _social_position_nb(weights, eps, tol, max_iter):
    n = weights.shape[0]
    trans = np.zeros((n, n))
    for y in range(n):
        total = 0.0
        for x in range(n):
            total += weights[y, x]
        if total > 0.0:
            for x in range(n):
                trans[y, x] = weights[y, x] / total
    sp = np.ones(n)
    new = np.empty(n)
    residual = 0.0
    it = 0
    while it < max_iter:
        it += 1
        for x in range(n):
            acc = 0.0
            for y in range(n):
                acc += sp[y] * trans[y, x]
            new[x] = (1.0 - eps) + eps * acc
        residual = 0.0
        for x in range(n):
            residual += abs(new[x] - sp[x])
            sp[x] = new[x]
        if residual < tol:
            break
    return sp, it, residual


def _social_position_np(weights, eps, tol, max_iter):
    totals = weights.sum(axis=1)
    safe = np.where(totals > 0, totals, 1.0)
    trans = np.where(totals[:, None] > 0, weights / safe[:, None], 0.0)
    sp = np.ones(weights.shape[0])
    residual = 0.0
    it = 0
    while it < max_iter:
        it += 1
        new = (1.0 - eps) + eps * (trans.T @ sp)
        residual = float(np.abs(new - sp).sum())
        sp = new
        if residual < tol:
            break
    return sp, it, residual


# --------------------------------------------------------------------------
# Mixed numeric / categorical distance
# --------------------------------------------------------------------------


@njit
def _mixed_distances_nb(q_num, t_num, q_cat, t_cat):
    nq = q_num.shape[0]
    nt = t_num.shape[0]
    out = np.empty((nq, nt))
    for i in range(nq):
        for j in range(nt):
            acc = 0.0
            for f in range(q_num.shape[1]):
                d = q_num[i, f] - t_num[j, f]
                acc += d * d
            mism = 0
            for f in range(q_cat.shape[1]):
                if q_cat[i, f] != t_cat[j, f]:
                    mism += 1
            out[i, j] = np.sqrt(acc) + mism
    return out


def _mixed_distances_np(q_num, t_num, q_cat, t_cat, chunk=128):
    out = np.empty((q_num.shape[0], t_num.shape[0]))
    for lo in range(0, q_num.shape[0], chunk):
        hi = lo + chunk
        diff = q_num[lo:hi, None, :] - t_num[None, :, :]
        block = np.sqrt((diff * diff).sum(axis=2))
        if q_cat.shape[1]:
            block = block + (q_cat[lo:hi, None, :] != t_cat[None, :, :]).sum(axis=2)
        out[lo:hi] = block
    return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def best_gini_split(xs, ys, n_classes, min_leaf):
    """Best boundary in a presorted column.

    Returns ``(score, i)`` where the split puts ``xs[:i + 1]`` left. ``score``
    is ``sum(left_counts**2)/n_left + sum(right_counts**2)/n_right``, which
    is maximal exactly where the weighted Gini impurity is minimal.
    ``i == -1`` means no admissible boundary.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    if USE_NUMBA:
        score, i = _best_gini_split_nb(xs, ys, int(n_classes), int(min_leaf))
        return float(score), int(i)
    return _best_gini_split_np(xs, ys, int(n_classes), int(min_leaf))


def social_position(weights, eps=0.85, tol=1e-8, max_iter=100):
    """Iterate ``SP = (1 - eps) + eps * T^T SP`` from all-ones.

    ``weights[y, x]`` is the weight of arc y -> x. Returns
    ``(scores, iterations, last_l1_change)``.
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if USE_NUMBA:
        sp, it, res = _social_position_nb(weights, float(eps), float(tol), int(max_iter))
        return sp, int(it), float(res)
    return _social_position_np(weights, float(eps), float(tol), int(max_iter))


def mixed_distances(q_num, t_num, q_cat, t_cat):
    """Euclidean distance on numeric columns plus categorical mismatch count."""
    q_num = np.ascontiguousarray(q_num, dtype=np.float64)
    t_num = np.ascontiguousarray(t_num, dtype=np.float64)
    q_cat = np.ascontiguousarray(q_cat, dtype=np.int64)
    t_cat = np.ascontiguousarray(t_cat, dtype=np.int64)
    if USE_NUMBA:
        return _mixed_distances_nb(q_num, t_num, q_cat, t_cat)
    return _mixed_distances_np(q_num, t_num, q_cat, t_cat)


# Both flavours stay importable for parity tests and the benchmark.
NUMBA_KERNELS = {
    "best_gini_split": _best_gini_split_nb,
    "social_position": _social_position_nb,
    "mixed_distances": _mixed_distances_nb,
}
NUMPY_KERNELS = {
    "best_gini_split": _best_gini_split_np,
    "social_position": _social_position_np,
    "mixed_distances": _mixed_distances_np,
}
