"""Bit-packed GF(2) kernels for stabilizer generator sets.

Layout: column-major bit planes. For a set of rows (Pauli generators) over
n_cols qubits, ``xc[c, w]`` holds bit r of word w, i.e. the X component of
row ``64*w + r`` at qubit c; ``zc`` likewise. Phases are kept bit-sliced in
two planes ``p0``/``p1``: phase(row) = p0_bit + 2*p1_bit, counting powers of
i relative to the Hermitian Pauli string (the x&z bit pair denotes Y = iXZ).
Bits at row positions >= n_rows must stay zero everywhere.

All functions are numba-jitted and mutate their arrays in place.
"""

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H0 = np.uint64(0x0101010101010101)
_U1 = np.uint64(1)
_U6 = np.uint64(63)


@njit(cache=True, nogil=True, inline="always")
def popcnt64(x):
    x = x - ((x >> _U1) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H0) >> np.uint64(56))


@njit(cache=True, nogil=True, inline="always")
def ctz64(x):
    # count trailing zeros, x != 0
    return popcnt64((x & (~x + _U1)) - _U1)


@njit(cache=True, nogil=True, inline="always")
def bget(vec, r):
    return np.int64((vec[r >> 6] >> np.uint64(r & 63)) & _U1)


@njit(cache=True, nogil=True, inline="always")
def bset(vec, r):
    vec[r >> 6] |= _U1 << np.uint64(r & 63)


@njit(cache=True, nogil=True, inline="always")
def bclear(vec, r):
    vec[r >> 6] &= ~(_U1 << np.uint64(r & 63))


@njit(cache=True, nogil=True, inline="always")
def bassign(vec, r, v):
    if v:
        bset(vec, r)
    else:
        bclear(vec, r)


@njit(cache=True, nogil=True)
def lowest_set_row(mask, nw):
    for w in range(nw):
        if mask[w] != np.uint64(0):
            return 64 * w + ctz64(mask[w])
    return -1


@njit(cache=True, nogil=True)
def any_set(mask, nw):
    for w in range(nw):
        if mask[w] != np.uint64(0):
            return True
    return False


@njit(cache=True, nogil=True)
def phase_of_row(p0, p1, r):
    return bget(p0, r) + 2 * bget(p1, r)


@njit(cache=True, nogil=True)
def set_row_phase(p0, p1, r, ph):
    bassign(p0, r, ph & 1)
    bassign(p1, r, (ph >> 1) & 1)


@njit(cache=True, nogil=True)
def row_mult_mask(xc, zc, p0, p1, n_cols, nw, mask, src, track_ph):
    """Multiply every row selected by `mask` (right) by row `src`: r <- r*src.

    Phase rule per column (dest bits a=(xa,za), src bits b): contribution to
    the i-exponent is pc(xa&za)+pc(xb&zb)+2*pc(za&xb)-pc((xa^xb)&(za^zb)).
    src must not be inside mask.
    """
    if track_ph:
        c0 = np.zeros(nw, np.uint64)
        c1 = np.zeros(nw, np.uint64)
        for c in range(n_cols):
            xv = xc[c]
            zv = zc[c]
            bx = bget(xv, src)
            bz = bget(zv, src)
            if bx == 0 and bz == 0:
                continue
            if bx == 1 and bz == 0:
                for w in range(nw):
                    a = xv[w]
                    b = zv[w]
                    t0 = b & mask[w]
                    t1 = (b & a) & mask[w]
                    c1[w] ^= t1 ^ (c0[w] & t0)
                    c0[w] ^= t0
                    xv[w] ^= mask[w]
            elif bx == 0 and bz == 1:
                for w in range(nw):
                    a = xv[w]
                    b = zv[w]
                    t0 = a & mask[w]
                    t1 = (a & ~b) & mask[w]
                    c1[w] ^= t1 ^ (c0[w] & t0)
                    c0[w] ^= t0
                    zv[w] ^= mask[w]
            else:
                for w in range(nw):
                    a = xv[w]
                    b = zv[w]
                    t0 = (a ^ b) & mask[w]
                    t1 = (b & ~a) & mask[w]
                    c1[w] ^= t1 ^ (c0[w] & t0)
                    c0[w] ^= t0
                    xv[w] ^= mask[w]
                    zv[w] ^= mask[w]
        for w in range(nw):
            p1[w] ^= c1[w] ^ (p0[w] & c0[w])
            p0[w] ^= c0[w]
        sp = phase_of_row(p0, p1, src)
        if sp & 1:
            for w in range(nw):
                p1[w] ^= p0[w] & mask[w]
                p0[w] ^= mask[w]
        if sp & 2:
            for w in range(nw):
                p1[w] ^= mask[w]
    else:
        for c in range(n_cols):
            xv = xc[c]
            zv = zc[c]
            bx = bget(xv, src)
            bz = bget(zv, src)
            if bx:
                for w in range(nw):
                    xv[w] ^= mask[w]
            if bz:
                for w in range(nw):
                    zv[w] ^= mask[w]


@njit(cache=True, nogil=True)
def copy_row(xc, zc, p0, p1, n_cols, dst, src):
    for c in range(n_cols):
        bassign(xc[c], dst, bget(xc[c], src))
        bassign(zc[c], dst, bget(zc[c], src))
    bassign(p0, dst, bget(p0, src))
    bassign(p1, dst, bget(p1, src))


@njit(cache=True, nogil=True)
def clear_row(xc, zc, p0, p1, n_cols, r):
    for c in range(n_cols):
        bclear(xc[c], r)
        bclear(zc[c], r)
    bclear(p0, r)
    bclear(p1, r)


@njit(cache=True, nogil=True)
def delete_row(xc, zc, p0, p1, n_cols, n_rows, r):
    """Delete row r by moving the last row into its slot. Returns new n_rows."""
    last = n_rows - 1
    if r != last:
        copy_row(xc, zc, p0, p1, n_cols, r, last)
    clear_row(xc, zc, p0, p1, n_cols, last)
    return last


@njit(cache=True, nogil=True)
def append_row(xc, zc, p0, p1, n_cols, n_rows, t_cols, t_bx, t_bz, ph):
    r = n_rows
    for k in range(t_cols.size):
        c = t_cols[k]
        if t_bx[k]:
            bset(xc[c], r)
        if t_bz[k]:
            bset(zc[c], r)
    set_row_phase(p0, p1, r, ph)
    return n_rows + 1


@njit(cache=True, nogil=True)
def row_is_identity_outside(xc, zc, n_cols, r, skip):
    for c in range(n_cols):
        if c == skip:
            continue
        if bget(xc[c], r) or bget(zc[c], r):
            return False
    return True


# ---------------------------------------------------------------------------
# Gate layers

# SIGN_LIN[s] = XOR-mask of linear ANF monomials toggled by sign bits s
# (sign bit i negates image i; the phase picks up 2 whenever exponent bit i is set)
SIGN_LIN = np.array([0], dtype=np.uint16)  # placeholder, replaced below


def _build_sign_lin():
    out = np.zeros(16, dtype=np.uint16)
    for s in range(16):
        m = 0
        for i in range(4):
            if (s >> i) & 1:
                m ^= 1 << (1 << i)  # monomial consisting of variable i alone
        out[s] = m
    return out


SIGN_LIN = _build_sign_lin()


@njit(cache=True, nogil=True)
def apply_gate_layer(xc, zc, p0, p1, nw, qa_arr, qb_arr, cls_arr, sgn_arr,
                     symrows, danf, sign_lin, track_ph):
    """Apply disjoint two-qubit Clifford gates to every row.

    symrows[cls, j] bit i set means output plane j is XORed with input plane i
    (planes ordered x1,z1,x2,z2). danf[cls] is the ANF of the high phase bit of
    the conjugation phase as a function of the four input bits; sign bits add
    linear terms via sign_lin.
    """
    for g in range(qa_arr.size):
        qa = qa_arr[g]
        cls = cls_arr[g]
        if qa < 0 or cls < 0:
            continue
        qb = qb_arr[g]
        d1 = danf[cls] ^ sign_lin[sgn_arr[g]]
        s0 = symrows[cls, 0]
        s1 = symrows[cls, 1]
        s2 = symrows[cls, 2]
        s3 = symrows[cls, 3]
        x1 = xc[qa]
        z1 = zc[qa]
        x2 = xc[qb]
        z2 = zc[qb]
        for w in range(nw):
            v0 = x1[w]
            v1 = z1[w]
            v2 = x2[w]
            v3 = z2[w]
            if track_ph and d1 != 0:
                d = np.uint64(0)
                if d1 & 0x0002:
                    d ^= v0
                if d1 & 0x0004:
                    d ^= v1
                if d1 & 0x0008:
                    d ^= v0 & v1
                if d1 & 0x0010:
                    d ^= v2
                if d1 & 0x0020:
                    d ^= v0 & v2
                if d1 & 0x0040:
                    d ^= v1 & v2
                if d1 & 0x0080:
                    d ^= v0 & v1 & v2
                if d1 & 0x0100:
                    d ^= v3
                if d1 & 0x0200:
                    d ^= v0 & v3
                if d1 & 0x0400:
                    d ^= v1 & v3
                if d1 & 0x0800:
                    d ^= v0 & v1 & v3
                if d1 & 0x1000:
                    d ^= v2 & v3
                if d1 & 0x2000:
                    d ^= v0 & v2 & v3
                if d1 & 0x4000:
                    d ^= v1 & v2 & v3
                if d1 & 0x8000:
                    d ^= v0 & v1 & v2 & v3
                p1[w] ^= d
            n0 = np.uint64(0)
            n1 = np.uint64(0)
            n2 = np.uint64(0)
            n3 = np.uint64(0)
            if s0 & 1:
                n0 ^= v0
            if s0 & 2:
                n0 ^= v1
            if s0 & 4:
                n0 ^= v2
            if s0 & 8:
                n0 ^= v3
            if s1 & 1:
                n1 ^= v0
            if s1 & 2:
                n1 ^= v1
            if s1 & 4:
                n1 ^= v2
            if s1 & 8:
                n1 ^= v3
            if s2 & 1:
                n2 ^= v0
            if s2 & 2:
                n2 ^= v1
            if s2 & 4:
                n2 ^= v2
            if s2 & 8:
                n2 ^= v3
            if s3 & 1:
                n3 ^= v0
            if s3 & 2:
                n3 ^= v1
            if s3 & 4:
                n3 ^= v2
            if s3 & 8:
                n3 ^= v3
            x1[w] = n0
            z1[w] = n1
            x2[w] = n2
            z2[w] = n3


@njit(cache=True, nogil=True)
def apply_table_gate(xc, zc, p0, p1, nw, n_rows, targets, out_mask, delta):
    """Apply a gate given by a per-row lookup table (any arity k <= 2).

    out_mask[idx]/delta[idx]: new target bits and phase increment for input
    bit pattern idx = sum_i (x_i << 2i | z_i << (2i+1)). Row-wise scalar path;
    used by the generic GeneratorSet API, not the hot sweep loop.
    """
    k = targets.size
    for r in range(n_rows):
        idx = 0
        for i in range(k):
            c = targets[i]
            idx |= bget(xc[c], r) << (2 * i)
            idx |= bget(zc[c], r) << (2 * i + 1)
        if idx == 0:
            continue
        m = out_mask[idx]
        for i in range(k):
            c = targets[i]
            bassign(xc[c], r, (m >> (2 * i)) & 1)
            bassign(zc[c], r, (m >> (2 * i + 1)) & 1)
        ph = phase_of_row(p0, p1, r) + delta[idx]
        set_row_phase(p0, p1, r, ph & 3)


# ---------------------------------------------------------------------------
# Elimination / rank / purge

@njit(cache=True, nogil=True)
def rref_planes(xc, zc, p0, p1, n_rows, n_cols, nw, plane_order, track_ph):
    """Full phase-tracked RREF w.r.t. the given plane order (plane = 2c+kind).

    Returns (n_pivots, used) where used[r]=1 iff row r became a pivot. Rows
    not used are identically zero afterwards.
    """
    used = np.zeros(n_rows, np.uint8)
    for k in range(plane_order.size):
        p = plane_order[k]
        c = p >> 1
        vec = zc[c] if (p & 1) else xc[c]
        r = -1
        for w in range(nw):
            v = vec[w]
            while v != np.uint64(0):
                b = 64 * w + ctz64(v)
                if b >= n_rows:
                    break
                if used[b] == 0:
                    r = b
                    break
                v &= v - _U1
            if r >= 0:
                break
        if r < 0:
            continue
        used[r] = 1
        others = np.empty(nw, np.uint64)
        for w in range(nw):
            others[w] = vec[w]
        bclear(others, r)
        if any_set(others, nw):
            row_mult_mask(xc, zc, p0, p1, n_cols, nw, others, r, track_ph)
    n_piv = 0
    for r in range(n_rows):
        n_piv += used[r]
    return n_piv, used


@njit(cache=True, nogil=True)
def compact_rows(xc, zc, p0, p1, n_cols, n_rows, keep):
    """Delete rows with keep[r]==0 (swap-with-last). Returns new n_rows."""
    r = n_rows - 1
    nr = n_rows
    while r >= 0:
        if keep[r] == 0:
            nr = delete_row(xc, zc, p0, p1, n_cols, nr, r)
        r -= 1
    return nr


@njit(cache=True, nogil=True)
def purge_dependent_rows(xc, zc, p0, p1, n_rows, n_cols, nw, track_ph):
    """RREF the whole set (x-block then z-block) and drop zero rows.

    Returns (new_n_rows, n_dropped). Group span over the stored columns is
    unchanged; dropped rows were GF(2)-dependent combinations.
    """
    order = np.empty(2 * n_cols, np.int64)
    for c in range(n_cols):
        order[c] = 2 * c
        order[n_cols + c] = 2 * c + 1
    n_piv, used = rref_planes(xc, zc, p0, p1, n_rows, n_cols, nw, order, track_ph)
    if n_piv == n_rows:
        return n_rows, 0
    nr = compact_rows(xc, zc, p0, p1, n_cols, n_rows, used)
    return nr, n_rows - n_piv


@njit(cache=True, nogil=True)
def masked_rank(xc, zc, n_rows, nw, cols):
    """GF(2) rank of the rows restricted to the given qubit columns."""
    k = cols.size
    planes = np.empty((2 * k, nw), np.uint64)
    for i in range(k):
        c = cols[i]
        for w in range(nw):
            planes[2 * i, w] = xc[c][w]
            planes[2 * i + 1, w] = zc[c][w]
    used = np.zeros(n_rows, np.uint8)
    rank = 0
    for p in range(2 * k):
        vec = planes[p]
        r = -1
        for w in range(nw):
            v = vec[w]
            while v != np.uint64(0):
                b = 64 * w + ctz64(v)
                if b >= n_rows:
                    break
                if used[b] == 0:
                    r = b
                    break
                v &= v - _U1
            if r >= 0:
                break
        if r < 0:
            continue
        used[r] = 1
        rank += 1
        mask = np.empty(nw, np.uint64)
        for w in range(nw):
            mask[w] = vec[w]
        bclear(mask, r)
        if any_set(mask, nw):
            for q in range(p, 2 * k):
                if bget(planes[q], r):
                    for w in range(nw):
                        planes[q][w] ^= mask[w]
    return rank


@njit(cache=True, nogil=True)
def eliminate_column(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph):
    """Reduce column `col` to at most two pivot rows via row products.

    Returns (piv_x, piv_z); -1 when the corresponding sub-column is empty.
    """
    piv_x = -1
    xv = xc[col]
    r = lowest_set_row(xv, nw)
    if r >= 0:
        piv_x = r
        others = np.empty(nw, np.uint64)
        for w in range(nw):
            others[w] = xv[w]
        bclear(others, r)
        if any_set(others, nw):
            row_mult_mask(xc, zc, p0, p1, n_cols, nw, others, r, track_ph)
    piv_z = -1
    zv = zc[col]
    mask = np.empty(nw, np.uint64)
    for w in range(nw):
        mask[w] = zv[w]
    if piv_x >= 0:
        bclear(mask, piv_x)
    r = lowest_set_row(mask, nw)
    if r >= 0:
        piv_z = r
        bclear(mask, r)
        if any_set(mask, nw):
            row_mult_mask(xc, zc, p0, p1, n_cols, nw, mask, r, track_ph)
    return piv_x, piv_z


# ---------------------------------------------------------------------------
# Measurement

@njit(cache=True, nogil=True)
def measure_target(xc, zc, p0, p1, n_rows, n_cols, nw,
                   t_cols, t_bx, t_bz, t_ph,
                   forced, rand_bit, track_ph, strict):
    """Measure the Pauli given by (t_cols, t_bx, t_bz, t_ph) on the stored set.

    forced: -1 to sample (use rand_bit when the outcome is random), else the
    forced outcome bit. Returns (outcome, was_random, status, n_rows) with
    status 0 = ok, 1 = deterministic contradiction (only when strict).
    """
    anti = np.zeros(nw, np.uint64)
    for k in range(t_cols.size):
        c = t_cols[k]
        if t_bz[k]:
            for w in range(nw):
                anti[w] ^= xc[c][w]
        if t_bx[k]:
            for w in range(nw):
                anti[w] ^= zc[c][w]
    piv = lowest_set_row(anti, nw)
    if piv >= 0:
        bclear(anti, piv)
        if any_set(anti, nw):
            row_mult_mask(xc, zc, p0, p1, n_cols, nw, anti, piv, track_ph)
        outcome = forced if forced >= 0 else rand_bit
        for c in range(n_cols):
            bclear(xc[c], piv)
            bclear(zc[c], piv)
        for k in range(t_cols.size):
            c = t_cols[k]
            if t_bx[k]:
                bset(xc[c], piv)
            if t_bz[k]:
                bset(zc[c], piv)
        set_row_phase(p0, p1, piv, (t_ph + 2 * outcome) & 3)
        return outcome, 1, 0, n_rows
    # commutes with every row: reduce against a scratch RREF copy
    sxc = np.zeros((n_cols, nw), np.uint64)
    szc = np.zeros((n_cols, nw), np.uint64)
    sp0 = np.zeros(nw, np.uint64)
    sp1 = np.zeros(nw, np.uint64)
    for c in range(n_cols):
        for w in range(nw):
            sxc[c, w] = xc[c][w]
            szc[c, w] = zc[c][w]
    for w in range(nw):
        sp0[w] = p0[w]
        sp1[w] = p1[w]
    # target rides along as an extra row
    tr = n_rows
    for k in range(t_cols.size):
        c = t_cols[k]
        if t_bx[k]:
            bset(sxc[c], tr)
        if t_bz[k]:
            bset(szc[c], tr)
    set_row_phase(sp0, sp1, tr, t_ph)
    order = np.empty(2 * n_cols, np.int64)
    for c in range(n_cols):
        order[c] = 2 * c
        order[n_cols + c] = 2 * c + 1
    # pivots restricted to real rows: run RREF over rows 0..n_rows-1 while the
    # extra row gets cleaned by every pivot (it is inside the masks).
    used = np.zeros(n_rows, np.uint8)
    for kk in range(order.size):
        p = order[kk]
        c = p >> 1
        vec = szc[c] if (p & 1) else sxc[c]
        r = -1
        for w in range(nw):
            v = vec[w]
            while v != np.uint64(0):
                b = 64 * w + ctz64(v)
                if b >= n_rows:
                    break
                if used[b] == 0:
                    r = b
                    break
                v &= v - _U1
            if r >= 0:
                break
        if r < 0:
            continue
        used[r] = 1
        others = np.empty(nw, np.uint64)
        for w in range(nw):
            others[w] = vec[w]
        bclear(others, r)
        if any_set(others, nw):
            row_mult_mask(sxc, szc, sp0, sp1, n_cols, nw, others, r, track_ph)
    in_group = True
    for c in range(n_cols):
        if bget(sxc[c], tr) or bget(szc[c], tr):
            in_group = False
            break
    if in_group:
        # deterministic: residual phase of the reduced extra row gives the sign
        # (target * product-of-pivots reduced to identity => phase 0 or 2)
        ph = phase_of_row(sp0, sp1, tr) if track_ph else 0
        outcome = 1 if (ph & 2) else 0
        status = 0
        if forced >= 0 and forced != outcome and strict:
            status = 1
        return outcome, 0, status, n_rows
    outcome = forced if forced >= 0 else rand_bit
    nr = append_row(xc, zc, p0, p1, n_cols, n_rows, t_cols, t_bx, t_bz,
                    (t_ph + 2 * outcome) & 3)
    return outcome, 1, 0, nr


@njit(cache=True, nogil=True)
def measure_z(xc, zc, p0, p1, n_rows, n_cols, nw, qubit,
              forced, rand_bit, track_ph, strict):
    t_cols = np.empty(1, np.int64)
    t_cols[0] = qubit
    t_bx = np.zeros(1, np.uint8)
    t_bz = np.ones(1, np.uint8)
    return measure_target(xc, zc, p0, p1, n_rows, n_cols, nw,
                          t_cols, t_bx, t_bz, 0, forced, rand_bit,
                          track_ph, strict)


# ---------------------------------------------------------------------------
# Noise / swap-in ancilla events (column-local channel realizations)

@njit(cache=True, nogil=True)
def apply_reset(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph):
    """Swap with a fresh |0> environment qubit, trace it out: both pivot rows
    leave with the environment; the qubit is re-stabilized by +Z."""
    piv_x, piv_z = eliminate_column(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph)
    if piv_x >= 0 and piv_z >= 0:
        hi = piv_x if piv_x > piv_z else piv_z
        lo = piv_z if piv_x > piv_z else piv_x
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, hi)
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, lo)
    elif piv_x >= 0:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_x)
    elif piv_z >= 0:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_z)
    t_cols = np.empty(1, np.int64)
    t_cols[0] = col
    t_bx = np.zeros(1, np.uint8)
    t_bz = np.ones(1, np.uint8)
    return append_row(xc, zc, p0, p1, n_cols, n_rows, t_cols, t_bx, t_bz, 0)


@njit(cache=True, nogil=True)
def apply_depolarize(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph):
    """Swap with half of a fresh Bell pair, trace both halves: the qubit ends
    maximally mixed (all support on it leaves with the environment)."""
    piv_x, piv_z = eliminate_column(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph)
    if piv_x >= 0 and piv_z >= 0:
        hi = piv_x if piv_x > piv_z else piv_z
        lo = piv_z if piv_x > piv_z else piv_x
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, hi)
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, lo)
    elif piv_x >= 0:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_x)
    elif piv_z >= 0:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_z)
    return n_rows


@njit(cache=True, nogil=True)
def apply_dephase(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph):
    """CNOT onto a fresh |0> environment qubit, trace it: one X-type pivot row
    leaves; rows with X support on the qubit pair up with the pivot."""
    xv = xc[col]
    piv = lowest_set_row(xv, nw)
    if piv < 0:
        return n_rows
    others = np.empty(nw, np.uint64)
    for w in range(nw):
        others[w] = xv[w]
    bclear(others, piv)
    if any_set(others, nw):
        row_mult_mask(xc, zc, p0, p1, n_cols, nw, others, piv, track_ph)
    return delete_row(xc, zc, p0, p1, n_cols, n_rows, piv)


@njit(cache=True, nogil=True)
def apply_qe_compressed(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph):
    """Swap with a fresh ancilla and truncate its column from the stored set.

    Pivot rows whose support is only this column depart whole (discarded,
    counted); mixed pivot rows lose their support on the column. Returns
    (n_rows, n_discarded).
    """
    piv_x, piv_z = eliminate_column(xc, zc, p0, p1, n_rows, n_cols, nw, col, track_ph)
    discarded = 0
    del_x = False
    del_z = False
    if piv_x >= 0:
        if row_is_identity_outside(xc, zc, n_cols, piv_x, col):
            del_x = True
        else:
            bclear(xc[col], piv_x)
            bclear(zc[col], piv_x)
    if piv_z >= 0 and piv_z != piv_x:
        if row_is_identity_outside(xc, zc, n_cols, piv_z, col):
            del_z = True
        else:
            bclear(xc[col], piv_z)
            bclear(zc[col], piv_z)
    if del_x and del_z:
        hi = piv_x if piv_x > piv_z else piv_z
        lo = piv_z if piv_x > piv_z else piv_x
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, hi)
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, lo)
        discarded = 2
    elif del_x:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_x)
        discarded = 1
    elif del_z:
        n_rows = delete_row(xc, zc, p0, p1, n_cols, n_rows, piv_z)
        discarded = 1
    t_cols = np.empty(1, np.int64)
    t_cols[0] = col
    t_bx = np.zeros(1, np.uint8)
    t_bz = np.ones(1, np.uint8)
    n_rows = append_row(xc, zc, p0, p1, n_cols, n_rows, t_cols, t_bx, t_bz, 0)
    return n_rows, discarded


@njit(cache=True, nogil=True)
def apply_qe_full(xc, zc, p0, p1, n_rows, n_cols, nw, col, anc_col):
    """Swap with a fresh |0> ancilla kept as an explicit column."""
    for w in range(nw):
        xc[anc_col][w] = xc[col][w]
        zc[anc_col][w] = zc[col][w]
        xc[col][w] = np.uint64(0)
        zc[col][w] = np.uint64(0)
    t_cols = np.empty(1, np.int64)
    t_cols[0] = col
    t_bx = np.zeros(1, np.uint8)
    t_bz = np.ones(1, np.uint8)
    return append_row(xc, zc, p0, p1, n_cols, n_rows, t_cols, t_bx, t_bz, 0)


# ---------------------------------------------------------------------------
# Trajectory driver

NOISE_RESET = 0
NOISE_DEPOLARIZE = 1
NOISE_DEPHASE = 2

EVENT_NONE = 0
EVENT_NOISE = 1
EVENT_QE = 2

STATUS_OK = 0
STATUS_CONTRADICTION = 1
STATUS_CAPACITY = 2


@njit(cache=True, nogil=True)
def rank_cols_range(xc, zc, n_rows, nw, lo, hi):
    cols = np.empty(hi - lo, np.int64)
    for i in range(hi - lo):
        cols[i] = lo + i
    return masked_rank(xc, zc, n_rows, nw, cols)


@njit(cache=True, nogil=True)
def run_steps(xc, zc, p0, p1, n_rows, L, base_cols, nw, cap_rows,
              full_mode, has_R, with_unitaries, track_ph,
              gate_cls, gate_sgn, meas_mask, meas_bits, event_kind, noise_code,
              replay, forced_out, strict,
              symrows, danf, sign_lin,
              out_outcomes, out_wasrand, want_series, series_out,
              x0, anc0):
    """Run T steps of unitary layer -> measurement layer -> event layer.

    replay=0: sample (meas_bits feed random outcomes). replay=1: forced_out
    supplies every selected outcome; a deterministic contradiction aborts when
    strict, and is ignored otherwise. Returns
    (n_rows, x, anc_count, status, abort_t, n_rand).
    """
    T = gate_cls.shape[0]
    n_pairs = gate_cls.shape[1]
    x = x0
    anc = anc0
    n_rand = 0
    status = STATUS_OK
    abort_t = -1
    n_cols = base_cols + anc if full_mode else base_cols
    qa = np.empty(n_pairs, np.int64)
    qb = np.empty(n_pairs, np.int64)
    if want_series:
        if has_R:
            series_out[0] = rank_cols_range(xc, zc, n_rows, nw, L, 2 * L) - L
        else:
            series_out[0] = 0
    for t in range(T):
        if with_unitaries:
            shift = t & 1
            for g in range(n_pairs):
                a = 2 * g + shift
                if a + 1 < L:
                    qa[g] = a
                    qb[g] = a + 1
                else:
                    qa[g] = -1
                    qb[g] = -1
            apply_gate_layer(xc, zc, p0, p1, nw, qa, qb,
                             gate_cls[t], gate_sgn[t], symrows, danf, sign_lin,
                             track_ph)
        for q in range(L):
            if meas_mask[t, q] == 0:
                continue
            if replay:
                fb = np.int64(forced_out[t, q])
            else:
                fb = np.int64(-1)
            outcome, was_random, st, n_rows = measure_z(
                xc, zc, p0, p1, n_rows, n_cols, nw, q,
                fb, np.int64(meas_bits[t, q]), track_ph, strict)
            out_outcomes[t, q] = outcome
            out_wasrand[t, q] = was_random
            if was_random:
                n_rand += 1
            if st != 0:
                status = STATUS_CONTRADICTION
                abort_t = t
                return n_rows, x, anc, status, abort_t, n_rand
            if n_rows + 2 >= cap_rows:
                n_rows, dropped = purge_dependent_rows(
                    xc, zc, p0, p1, n_rows, n_cols, nw, track_ph)
                x += dropped
                if n_rows + 2 >= cap_rows:
                    return n_rows, x, anc, STATUS_CAPACITY, t, n_rand
        for q in range(L):
            ev = event_kind[t, q]
            if ev == EVENT_NONE:
                continue
            if ev == EVENT_NOISE:
                if noise_code == NOISE_RESET:
                    n_rows = apply_reset(xc, zc, p0, p1, n_rows, n_cols, nw, q, track_ph)
                elif noise_code == NOISE_DEPOLARIZE:
                    n_rows = apply_depolarize(xc, zc, p0, p1, n_rows, n_cols, nw, q, track_ph)
                else:
                    n_rows = apply_dephase(xc, zc, p0, p1, n_rows, n_cols, nw, q, track_ph)
            else:
                if full_mode:
                    anc_col = base_cols + anc
                    n_rows = apply_qe_full(xc, zc, p0, p1, n_rows, n_cols + 1, nw, q, anc_col)
                    anc += 1
                    n_cols = base_cols + anc
                else:
                    n_rows, dropped = apply_qe_compressed(
                        xc, zc, p0, p1, n_rows, n_cols, nw, q, track_ph)
                    x += dropped
                    anc += 1
            if n_rows + 2 >= cap_rows:
                n_rows, dropped = purge_dependent_rows(
                    xc, zc, p0, p1, n_rows, n_cols, nw, track_ph)
                x += dropped
                if n_rows + 2 >= cap_rows:
                    return n_rows, x, anc, STATUS_CAPACITY, t, n_rand
        if want_series:
            if has_R:
                series_out[t + 1] = rank_cols_range(xc, zc, n_rows, nw, L, 2 * L) - L
            else:
                series_out[t + 1] = 0
    return n_rows, x, anc, status, abort_t, n_rand
