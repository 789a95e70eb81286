# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled unit propagation kernel; same contract as the pure-Python one."""

from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport int64_t


cdef int _cmp(const void* a, const void* b) noexcept nogil:
    cdef int64_t x = (<int64_t*>a)[0]
    cdef int64_t y = (<int64_t*>b)[0]
    return (x > y) - (x < y)


def propagate(int n_atoms, list units, list bodies, list heads, list target_pos):
    cdef Py_ssize_t n = len(bodies)
    cdef Py_ssize_t nu = len(units)
    cdef Py_ssize_t i, j, k, c, a, total = 0, htotal = 0, nh
    cdef int u, t, status = 2, tgt = -1
    cdef int64_t nextpos = n, key
    cdef int* remaining = <int*>malloc((n + 1) * sizeof(int))
    cdef int* head = <int*>malloc((n + 1) * sizeof(int))
    cdef char* alive = <char*>malloc(n + 1)
    cdef int64_t* pos = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int* tpos = <int*>malloc((n_atoms + 1) * sizeof(int))
    cdef char* done = <char*>malloc(n_atoms + 1)
    cdef int* ostart = <int*>malloc((n_atoms + 2) * sizeof(int))
    cdef int* hstart = <int*>malloc((n_atoms + 2) * sizeof(int))
    cdef int* occ = NULL
    cdef int* hocc = NULL
    cdef int* queue = NULL
    cdef int64_t* buf = NULL
    cdef Py_ssize_t qh = 0, qt = 0, qcap
    fired = []
    processed = []
    try:
        for a in range(n_atoms + 2):
            ostart[a] = 0
            hstart[a] = 0
        for a in range(n_atoms):
            tpos[a] = target_pos[a]
            done[a] = 0
        for c in range(n):
            b = bodies[c]
            remaining[c] = len(b)
            head[c] = heads[c]
            alive[c] = 1
            pos[c] = c
            total += len(b)
            for a in b:
                ostart[<int>a + 1] += 1
            if head[c] >= 0:
                hstart[head[c] + 1] += 1
                htotal += 1
        for a in range(n_atoms):
            ostart[a + 1] += ostart[a]
            hstart[a + 1] += hstart[a]
        occ = <int*>malloc((total + 1) * sizeof(int))
        hocc = <int*>malloc((htotal + 1) * sizeof(int))
        buf = <int64_t*>malloc((total + htotal + 1) * sizeof(int64_t))
        # fill the occurrence lists; cursors count entries already placed
        cursor = [0] * (n_atoms + 1)
        hcursor = [0] * (n_atoms + 1)
        for c in range(n):
            for a in bodies[c]:
                occ[ostart[a] + <int>cursor[a]] = c
                cursor[a] += 1
            if head[c] >= 0:
                hocc[hstart[head[c]] + <int>hcursor[head[c]]] = c
                hcursor[head[c]] += 1
        qcap = nu + n + 1
        queue = <int*>malloc(qcap * sizeof(int))
        for i in range(nu):
            queue[qt] = units[i]
            qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            if u < 0:
                status = 1
                break
            t = tpos[u]
            if t >= 0:
                status = 0
                tgt = t
                break
            if done[u]:
                continue
            nh = 0
            for k in range(ostart[u], ostart[u + 1]):
                c = occ[k]
                if alive[c]:
                    buf[nh] = pos[c] * (n + 1) + c
                    nh += 1
            for k in range(hstart[u], hstart[u + 1]):
                c = hocc[k]
                if alive[c] and remaining[c] > 0:
                    buf[nh] = pos[c] * (n + 1) + c
                    nh += 1
            qsort(buf, nh, sizeof(int64_t), _cmp)
            for k in range(nh):
                if k > 0 and buf[k] == buf[k - 1]:
                    continue
                c = buf[k] % (n + 1)
                if head[c] == u:
                    alive[c] = 0
                    continue
                remaining[c] -= 1
                if remaining[c] == 0:
                    alive[c] = 0
                    queue[qt] = head[c]
                    qt += 1
                    fired.append(c)
                else:
                    pos[c] = nextpos
                    nextpos += 1
            done[u] = 1
            processed.append(u)
        return status, tgt, fired, processed
    finally:
        free(remaining); free(head); free(alive); free(pos); free(tpos); free(done)
        free(ostart); free(hstart)
        if occ != NULL:
            free(occ)
        if hocc != NULL:
            free(hocc)
        if queue != NULL:
            free(queue)
        if buf != NULL:
            free(buf)
