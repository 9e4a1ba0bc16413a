# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring _pykernels bit for bit on their fast domains.

box_scan_i64 assumes the caller proved every dot product fits in int64
(the dispatcher checks against 2^62).  badness_scan_pow2 handles
power-of-two denominators up to 2^256 with 4x64-bit limb residues; the
reduction modulo 2^k is a mask, and the float preselection ratio equals
the pure version exactly because scaling by 2^-k is lossless and the
limb-to-double conversion below rounds to nearest even like CPython's
int-to-float.
"""

from libc.math cimport pow as cpow, log as clog, ldexp
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef unsigned long long u128 "__uint128_t"


cdef inline double _limbs_to_double(uint64_t* l, int nl):
    """Correctly rounded double of sum_i l[i] * 2^(64 i)."""
    cdef int top = nl - 1
    cdef u128 window
    cdef bint sticky = False
    cdef int i, hb, shift
    cdef uint64_t keep, g, mant
    while top >= 0 and l[top] == 0:
        top -= 1
    if top < 0:
        return 0.0
    if top == 0:
        return <double> l[0]
    window = (((<u128> l[top]) << 64) | l[top - 1])
    for i in range(top - 1):
        if l[i] != 0:
            sticky = True
            break
    hb = 127
    while not (window >> hb) & 1:
        hb -= 1
    # keep 55 bits: 53 mantissa + 2 rounding bits
    shift = hb - 54
    if shift > 0:
        keep = <uint64_t> (window >> shift)
        if window & (((<u128> 1) << shift) - 1):
            sticky = True
    else:
        keep = <uint64_t> window
        shift = 0
    g = keep & 3
    mant = keep >> 2
    if g > 2 or (g == 2 and (sticky or (mant & 1))):
        mant += 1
        if mant == (<uint64_t> 1) << 53:
            mant >>= 1
            shift += 1
    return ldexp(<double> mant, shift + 2 + 64 * (top - 1))


cdef inline int _cmp_limbs(uint64_t* a, uint64_t* b, int nl):
    cdef int i
    for i in range(nl - 1, -1, -1):
        if a[i] < b[i]:
            return -1
        if a[i] > b[i]:
            return 1
    return 0


def badness_scan_pow2(list nums, object denominator, int X, int q_min,
                      double alpha, double delta=0.0, double margin=1e-6):
    """Same contract as _pykernels.badness_scan, denominator = 2^k, k <= 256."""
    if q_min < 1 or q_min > X:
        raise ValueError("empty q range")
    cdef int k = denominator.bit_length() - 1
    if k > 256:
        raise ValueError("denominator too wide for the limb kernel")
    cdef int nl = (k + 63) // 64 if k > 0 else 1
    cdef int d = len(nums)
    cdef Py_ssize_t n = X - q_min + 1
    cdef uint64_t mask_top
    cdef uint64_t* step = NULL
    cdef uint64_t* res = NULL
    cdef uint64_t* half = NULL
    cdef uint64_t* f = NULL
    cdef uint64_t* m = NULL
    cdef double* ratios = NULL
    cdef object D = denominator
    cdef object v
    cdef int j, i, q, cmp_half
    cdef uint64_t carry, s, prev
    cdef double ratio, dinv, best, cut
    cdef bint nonzero

    if k == 0:
        mask_top = 0
    elif k % 64 == 0:
        mask_top = <uint64_t> 0xFFFFFFFFFFFFFFFF
    else:
        mask_top = ((<uint64_t> 1) << (k % 64)) - 1

    step = <uint64_t*> malloc(d * 4 * sizeof(uint64_t))
    res = <uint64_t*> malloc(d * 4 * sizeof(uint64_t))
    half = <uint64_t*> malloc(4 * sizeof(uint64_t))
    f = <uint64_t*> malloc(4 * sizeof(uint64_t))
    m = <uint64_t*> malloc(4 * sizeof(uint64_t))
    ratios = <double*> malloc(n * sizeof(double))
    if not (step and res and half and f and m and ratios):
        if step: free(step)
        if res: free(res)
        if half: free(half)
        if f: free(f)
        if m: free(m)
        if ratios: free(ratios)
        raise MemoryError()

    try:
        for i in range(4):
            half[i] = 0
        if k > 0:
            half[(k - 1) // 64] = (<uint64_t> 1) << ((k - 1) % 64)
        for j in range(d):
            v = nums[j] % D
            for i in range(4):
                step[j * 4 + i] = <uint64_t> ((v >> (64 * i)) & 0xFFFFFFFFFFFFFFFF) if i < nl else 0
            v = ((q_min - 1) * (nums[j] % D)) % D
            for i in range(4):
                res[j * 4 + i] = <uint64_t> ((v >> (64 * i)) & 0xFFFFFFFFFFFFFFFF) if i < nl else 0

        dinv = ldexp(1.0, -k)
        for q in range(q_min, X + 1):
            for i in range(4):
                m[i] = 0
            for j in range(d):
                carry = 0
                for i in range(nl):
                    prev = res[j * 4 + i]
                    s = prev + step[j * 4 + i]
                    res[j * 4 + i] = s + carry
                    carry = 1 if (s < prev or (carry and res[j * 4 + i] == 0)) else 0
                res[j * 4 + nl - 1] &= mask_top
                cmp_half = _cmp_limbs(&res[j * 4], half, nl)
                if cmp_half <= 0:
                    for i in range(nl):
                        f[i] = res[j * 4 + i]
                else:
                    # D - r as two's complement of r within k bits; r != 0 here
                    carry = 1
                    for i in range(nl):
                        s = ((~res[j * 4 + i]) & 0xFFFFFFFFFFFFFFFF) + carry
                        carry = 1 if (carry and s == 0) else 0
                        f[i] = s
                    f[nl - 1] &= mask_top
                for i in range(nl, 4):
                    f[i] = 0
                if _cmp_limbs(f, m, 4) > 0:
                    for i in range(4):
                        m[i] = f[i]
            if m[0] == 0 and m[1] == 0 and m[2] == 0 and m[3] == 0:
                return [q], q
            ratio = _limbs_to_double(m, 4) * dinv * cpow(q, alpha)
            if delta != 0.0:
                ratio *= cpow(clog(q), delta)
            ratios[q - q_min] = ratio

        best = ratios[0]
        for i in range(1, <int> n):
            if ratios[i] < best:
                best = ratios[i]
        cut = best * (1.0 + margin)
        out = []
        for i in range(<int> n):
            if ratios[i] <= cut:
                out.append(q_min + i)
        return out, None
    finally:
        free(step)
        free(res)
        free(half)
        free(f)
        free(m)
        free(ratios)


def box_scan_i64(list rows_c, list rows_r, list bounds):
    """Same contract and output order as _pykernels.box_scan."""
    cdef int dims = len(bounds)
    cdef int nrows = len(rows_c)
    cdef int64_t* lo = NULL
    cdef int64_t* hi = NULL
    cdef int64_t* z = NULL
    cdef int64_t* C = NULL
    cdef int64_t* rhs = NULL
    cdef int i, j
    cdef int64_t acc
    cdef bint ok
    if dims == 0:
        return []
    lo = <int64_t*> malloc(dims * sizeof(int64_t))
    hi = <int64_t*> malloc(dims * sizeof(int64_t))
    z = <int64_t*> malloc(dims * sizeof(int64_t))
    C = <int64_t*> malloc(max(nrows * dims, 1) * sizeof(int64_t))
    rhs = <int64_t*> malloc(max(nrows, 1) * sizeof(int64_t))
    if not (lo and hi and z and C and rhs):
        if lo: free(lo)
        if hi: free(hi)
        if z: free(z)
        if C: free(C)
        if rhs: free(rhs)
        raise MemoryError()
    out = []
    try:
        for i in range(dims):
            lo[i] = bounds[i][0]
            hi[i] = bounds[i][1]
            z[i] = lo[i]
            if lo[i] > hi[i]:
                return []
        for i in range(nrows):
            rhs[i] = rows_r[i]
            row = rows_c[i]
            for j in range(dims):
                C[i * dims + j] = row[j]
        while True:
            ok = True
            for i in range(nrows):
                acc = 0
                for j in range(dims):
                    acc += C[i * dims + j] * z[j]
                if acc > rhs[i]:
                    ok = False
                    break
            if ok:
                out.append(tuple(z[j] for j in range(dims)))
            j = dims - 1
            while j >= 0:
                z[j] += 1
                if z[j] <= hi[j]:
                    break
                z[j] = lo[j]
                j -= 1
            if j < 0:
                break
        return out
    finally:
        free(lo)
        free(hi)
        free(z)
        free(C)
        free(rhs)
