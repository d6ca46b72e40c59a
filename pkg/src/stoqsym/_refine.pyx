# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled equitable-refinement kernel.

Twin of _refine_py; see that module for the algorithm and the exact
signature/trace contract.  The two must return identical results.
"""

from libc.stdlib cimport malloc, free
from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING, PyBytes_GET_SIZE

BACKEND = "compiled"

cdef unsigned long long FNV_OFFSET = 0xCBF29CE484222325ULL
cdef unsigned long long FNV_PRIME = 0x100000001B3ULL


cdef class KernelGraph:
    cdef int n
    cdef int *heads      # 3 * (n + 1)
    cdef int *flat       # concatenated adjacency, all three relations
    cdef int flat_off[4]
    cdef int max_sig     # max signature length in ints

    def __cinit__(self, int n, heads, flats):
        cdef int rel, v, i, total, deg_sum, d
        self.n = n
        self.heads = <int *> malloc(3 * (n + 1) * sizeof(int))
        total = 0
        for rel in range(3):
            self.flat_off[rel] = total
            total += len(flats[rel])
        self.flat_off[3] = total
        self.flat = <int *> malloc(max(total, 1) * sizeof(int))
        for rel in range(3):
            for v in range(n + 1):
                self.heads[rel * (n + 1) + v] = heads[rel][v]
            i = self.flat_off[rel]
            for d in flats[rel]:
                self.flat[i] = d
                i += 1
        self.max_sig = 4
        for v in range(n):
            deg_sum = 0
            for rel in range(3):
                deg_sum += heads[rel][v + 1] - heads[rel][v]
            if 4 + 2 * deg_sum > self.max_sig:
                self.max_sig = 4 + 2 * deg_sum

    def __dealloc__(self):
        if self.heads != NULL:
            free(self.heads)
        if self.flat != NULL:
            free(self.flat)


def make_graph(int n, heads, flats):
    return KernelGraph(n, heads, flats)


cdef inline unsigned long long _mix_bytes(unsigned long long h, const unsigned char *data, Py_ssize_t size):
    cdef Py_ssize_t i
    for i in range(size):
        h = (h ^ data[i]) * FNV_PRIME
    return h


cdef inline unsigned long long _mix_u32(unsigned long long h, unsigned int x):
    h = (h ^ ((x >> 24) & 0xFF)) * FNV_PRIME
    h = (h ^ ((x >> 16) & 0xFF)) * FNV_PRIME
    h = (h ^ ((x >> 8) & 0xFF)) * FNV_PRIME
    h = (h ^ (x & 0xFF)) * FNV_PRIME
    return h


cdef void _insertion_sort(int *a, int m):
    cdef int i, j, key
    for i in range(1, m):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j] > key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


def refine(KernelGraph g, colors):
    cdef int n = g.n
    if n == 0:
        return [], 0, _mix_u32(FNV_OFFSET, 0)

    cdef int *cur = <int *> malloc(n * sizeof(int))
    cdef int *nbr_colors = <int *> malloc(max(g.max_sig, 4) * sizeof(int))
    cdef int *sig = <int *> malloc(g.max_sig * sizeof(int))
    cdef unsigned char *packed = <unsigned char *> malloc(g.max_sig * 4)
    cdef int v, i, rel, start, end, m, prev, cnt, siglen, w, ncolors, c
    cdef int npairs, base
    cdef unsigned int x
    cdef unsigned long long trace = FNV_OFFSET
    cdef const unsigned char *kdata
    cdef Py_ssize_t ksize

    # densify input colors
    distinct = sorted(set(colors))
    remap = {}
    for i, c in enumerate(distinct):
        remap[c] = i
    for v in range(n):
        cur[v] = remap[colors[v]]
    ncolors = len(distinct)

    keys = [None] * n
    while ncolors < n:
        for v in range(n):
            siglen = 0
            sig[siglen] = cur[v]
            siglen += 1
            for rel in range(3):
                start = g.heads[rel * (n + 1) + v]
                end = g.heads[rel * (n + 1) + v + 1]
                m = end - start
                if m == 0:
                    sig[siglen] = 0
                    siglen += 1
                    continue
                for i in range(m):
                    w = g.flat[g.flat_off[rel] + start + i]
                    nbr_colors[i] = cur[w]
                _insertion_sort(nbr_colors, m)
                # run-length encode into sig, reserving slot for pair count
                prev = nbr_colors[0]
                cnt = 1
                siglen += 1
                sig[siglen - 1] = 0  # placeholder, patched below
                npairs = 0
                base = siglen
                for i in range(1, m):
                    if nbr_colors[i] == prev:
                        cnt += 1
                    else:
                        sig[siglen] = prev
                        sig[siglen + 1] = cnt
                        siglen += 2
                        npairs += 1
                        prev = nbr_colors[i]
                        cnt = 1
                sig[siglen] = prev
                sig[siglen + 1] = cnt
                siglen += 2
                npairs += 1
                sig[base - 1] = npairs
            for i in range(siglen):
                x = <unsigned int> sig[i]
                packed[4 * i] = (x >> 24) & 0xFF
                packed[4 * i + 1] = (x >> 16) & 0xFF
                packed[4 * i + 2] = (x >> 8) & 0xFF
                packed[4 * i + 3] = x & 0xFF
            keys[v] = PyBytes_FromStringAndSize(<char *> packed, 4 * siglen)
        counts = {}
        for v in range(n):
            key = keys[v]
            if key in counts:
                counts[key] += 1
            else:
                counts[key] = 1
        if len(counts) == ncolors:
            break
        ranks = {}
        i = 0
        for key in sorted(counts):
            ranks[key] = i
            kdata = <const unsigned char *> PyBytes_AS_STRING(key)
            ksize = PyBytes_GET_SIZE(key)
            trace = _mix_bytes(trace, kdata, ksize)
            trace = _mix_u32(trace, <unsigned int> counts[key])
            i += 1
        for v in range(n):
            cur[v] = ranks[keys[v]]
        ncolors = len(counts)

    trace = _mix_u32(trace, <unsigned int> ncolors)
    out = [0] * n
    for v in range(n):
        out[v] = cur[v]
    free(cur)
    free(nbr_colors)
    free(sig)
    free(packed)
    return out, ncolors, trace
