# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels: all-pairs BFS and the four-point delta condition."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _four_point(int s1, int s2, int s3) nogil:
    cdef int hi, mid
    if s1 >= s2:
        if s2 >= s3:
            hi = s1; mid = s2
        elif s1 >= s3:
            hi = s1; mid = s3
        else:
            hi = s3; mid = s1
    else:
        if s1 >= s3:
            hi = s2; mid = s1
        elif s2 >= s3:
            hi = s2; mid = s3
        else:
            hi = s3; mid = s2
    return 0.5 * (hi - mid)


def all_pairs_bfs(cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices, Py_ssize_t n):
    """Hop distances between all node pairs of a CSR graph; -1 marks unreachable pairs."""
    dist_arr = np.full((n, n), -1, dtype=np.int32)
    cdef int[:, ::1] dist = dist_arr
    queue_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = queue_arr
    cdef Py_ssize_t s, head, tail, u, k, v
    with nogil:
        for s in range(n):
            dist[s, s] = 0
            queue[0] = s
            head = 0
            tail = 1
            while head < tail:
                u = queue[head]
                head += 1
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if dist[s, v] < 0:
                        dist[s, v] = dist[s, u] + 1
                        queue[tail] = v
                        tail += 1
    return dist_arr


def delta_exact(int[:, ::1] D):
    """Max of the four-point delta over every 4-subset of nodes."""
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t x, y, z, w
    cdef double best = 0.0, val
    cdef int dxy, dxz, dyz, dxw, dyw, dzw
    with nogil:
        for x in range(n):
            for y in range(x + 1, n):
                dxy = D[x, y]
                for z in range(y + 1, n):
                    dxz = D[x, z]
                    dyz = D[y, z]
                    for w in range(z + 1, n):
                        dxw = D[x, w]
                        dyw = D[y, w]
                        dzw = D[z, w]
                        val = _four_point(dxy + dzw, dxz + dyw, dxw + dyz)
                        if val > best:
                            best = val
    return best


def delta_quads(int[:, ::1] D, cnp.int64_t[:, ::1] quads):
    """Max of the four-point delta over the given rows of node indices."""
    cdef Py_ssize_t m = quads.shape[0], i
    cdef cnp.int64_t x, y, z, w
    cdef double best = 0.0, val
    with nogil:
        for i in range(m):
            x = quads[i, 0]; y = quads[i, 1]; z = quads[i, 2]; w = quads[i, 3]
            val = _four_point(D[x, y] + D[z, w], D[x, z] + D[y, w], D[x, w] + D[y, z])
            if val > best:
                best = val
    return best
