# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-point propagation; same contract as ``_propagate.propagate``."""

from libc.stdlib cimport malloc, free


def propagate(unsigned char[::1] dom, unsigned char[::1] active, const unsigned char[::1] table,
              const int[::1] op, const int[::1] tgt, const int[::1] sstart, const int[::1] slen,
              const int[::1] srcs, const int[::1] cgroup, const int[::1] wstart, const int[::1] wlist,
              const int[::1] seed):
    cdef Py_ssize_t ncons = op.shape[0]
    cdef Py_ssize_t i, j, k, start, head = 0, size = 0, cap = ncons + 1
    cdef int c, o, ident, t, s, w, v, var, maxk = 1
    cdef unsigned char acc, nt, d, nd, left, right
    cdef int result = 1
    if ncons == 0:
        return 1
    for i in range(ncons):
        if slen[i] > maxk:
            maxk = slen[i]
    cdef int *queue = <int *> malloc(cap * sizeof(int))
    cdef unsigned char *queued = <unsigned char *> malloc(ncons)
    cdef unsigned char *fwd = <unsigned char *> malloc(maxk + 1)
    cdef unsigned char *bwd = <unsigned char *> malloc(maxk + 1)
    cdef int *changed = <int *> malloc((maxk + 1) * sizeof(int))
    cdef int nchanged
    try:
        for i in range(ncons):
            queued[i] = 0
        for i in range(seed.shape[0]):
            c = seed[i]
            if active[cgroup[c]] and not queued[c]:
                queued[c] = 1
                queue[(head + size) % cap] = c
                size += 1
        while size > 0:
            c = queue[head]
            head = (head + 1) % cap
            size -= 1
            queued[c] = 0
            o = op[c] * 64
            ident = 4 if o == 0 else 1
            start = sstart[c]
            k = slen[c]
            acc = ident
            fwd[0] = acc
            for j in range(k):
                acc = table[o + acc * 8 + dom[srcs[start + j]]]
                fwd[j + 1] = acc
            nchanged = 0
            t = tgt[c]
            nt = dom[t] & acc
            if nt == 0:
                result = 0
                break
            if nt != dom[t]:
                dom[t] = nt
                changed[nchanged] = t
                nchanged += 1
            acc = ident
            bwd[k] = acc
            for j in range(k - 1, -1, -1):
                acc = table[o + dom[srcs[start + j]] * 8 + acc]
                bwd[j] = acc
            for j in range(k):
                s = srcs[start + j]
                d = dom[s]
                nd = 0
                left = fwd[j]
                right = bwd[j + 1]
                v = 1
                while v <= 4:
                    if d & v and table[o + table[o + left * 8 + v] * 8 + right] & nt:
                        nd |= v
                    v <<= 1
                if nd == 0:
                    result = 0
                    break
                if nd != d:
                    dom[s] = nd
                    changed[nchanged] = s
                    nchanged += 1
            if result == 0:
                break
            for j in range(nchanged):
                var = changed[j]
                for i in range(wstart[var], wstart[var + 1]):
                    w = wlist[i]
                    if not queued[w] and active[cgroup[w]]:
                        queued[w] = 1
                        queue[(head + size) % cap] = w
                        size += 1
    finally:
        free(queue)
        free(queued)
        free(fwd)
        free(bwd)
        free(changed)
    return result
