"""Pure numpy versions of the compiled graph kernels."""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


def all_pairs_bfs(indptr, indices, n):
    adj = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    d = shortest_path(adj, method="D", unweighted=True, directed=False)
    out = np.full((n, n), -1, dtype=np.int32)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int32)
    return out


def _four_point(s1, s2, s3):
    hi = np.maximum(np.maximum(s1, s2), s3)
    lo = np.minimum(np.minimum(s1, s2), s3)
    mid = s1 + s2 + s3 - hi - lo
    return 0.5 * (hi - mid)


def delta_exact(D):
    # for each x < y, evaluate all (z, w) at once; repeated nodes give 0
    D = np.asarray(D, dtype=np.int64)
    n = D.shape[0]
    best = 0.0
    for x in range(n):
        for y in range(x + 1, n):
            s1 = D[x, y] + D
            s2 = D[x][:, None] + D[y][None, :]
            s3 = D[y][:, None] + D[x][None, :]
            best = max(best, float(_four_point(s1, s2, s3).max()))
    return best


def delta_quads(D, quads):
    D = np.asarray(D, dtype=np.int64)
    q = np.asarray(quads, dtype=np.int64)
    if len(q) == 0:
        return 0.0
    x, y, z, w = q.T
    vals = _four_point(D[x, y] + D[z, w], D[x, z] + D[y, w], D[x, w] + D[y, z])
    return float(max(vals.max(), 0.0))
