"""Compiled kernels for the heavy braid sweeps.

The seven-strand dichotomy cell walks a few billion words, which is out of
reach for interpreted loops, so the word generator and the rewrite screen
live here in nopython style.  Words travel as packed integers, three bits
per letter with the first letter in the highest bits, so that integer
order equals lexicographic order and a rotation is two shifts.

Import never fails: without numba the same functions run as plain Python,
slowly but with identical results.  The screen mirrors the reference
search in ``braid`` move for move; ``enumerator`` cross-checks the two on
samples before trusting a compiled run.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly by every call
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - environment without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


LETTER_BITS = 3
LETTER_MASK = 7

# Screen verdicts.
REDUCIBLE = 1
EXHAUSTED = 0
OVERFLOW = 2

TABLE_BITS = 17
TABLE_SIZE = 1 << TABLE_BITS
FRONTIER_CAP = 1 << 16


@njit(cache=True)
def _min_rotation(x, e, mask):
    best = x
    for k in range(1, e):
        r = ((x << (3 * k)) & mask) | (x >> (3 * (e - k)))
        if r < best:
            best = r
    return best


@njit(cache=True)
def _letter(x, e, pos):
    return (x >> (3 * (e - 1 - pos))) & LETTER_MASK


@njit(cache=True)
def _set_letter(x, e, pos, value):
    shift = 3 * (e - 1 - pos)
    return (x & ~(np.int64(LETTER_MASK) << shift)) | (np.int64(value) << shift)


@njit(cache=True)
def _has_count_one(x, e, n):
    counts = np.zeros(8, np.int64)
    t = x
    for _ in range(e):
        counts[t & LETTER_MASK] += 1
        t >>= 3
    for j in range(1, n):
        if counts[j] == 1:
            return True
    return False


@njit(cache=True)
def _probe(table, stamps, dists, stamp, key, d):
    """Claim or revisit ``key`` at depth ``d``.

    Returns 1 when the state is new or improved and should be expanded,
    0 when an at-least-as-good visit exists, -1 on a full table.
    """
    h = (np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(64 - TABLE_BITS)
    for _ in range(TABLE_SIZE):
        i = np.int64(h)
        if stamps[i] != stamp:
            stamps[i] = stamp
            table[i] = key
            dists[i] = d
            return 1
        if table[i] == key:
            if dists[i] <= d:
                return 0
            dists[i] = d
            return 1
        h = (h + np.uint64(1)) % np.uint64(TABLE_SIZE)
    return -1


@njit(cache=True)
def _screen_one(start, e, n, depth, table, stamps, dists, stamp, cur, nxt):
    """Depth-bounded search for a state with some generator count 1.

    Far commutations and rotations are free, one braid relation costs one
    unit of depth; states are rotation-canonical packed words.  This is
    the compiled twin of the reference breadth-first search.
    """
    mask = (np.int64(1) << (3 * e)) - 1
    root = _min_rotation(start, e, mask)
    if _has_count_one(root, e, n):
        return REDUCIBLE
    if _probe(table, stamps, dists, stamp, root, 0) < 0:
        return OVERFLOW
    cur[0] = root
    cur_len = 1
    d = 0
    while cur_len > 0:
        if d == depth:
            # Free moves keep every count, so the horizon adds no hits.
            return EXHAUSTED
        nxt_len = 0
        i = 0
        while i < cur_len:
            x = cur[i]
            i += 1
            for k in range(e):
                j = k + 1 if k + 1 < e else 0
                a = _letter(x, e, k)
                b = _letter(x, e, j)
                if a - b >= 2 or b - a >= 2:
                    y = _set_letter(_set_letter(x, e, k, b), e, j, a)
                    c = _min_rotation(y, e, mask)
                    got = _probe(table, stamps, dists, stamp, c, d)
                    if got < 0:
                        return OVERFLOW
                    if got == 1:
                        if cur_len >= cur.shape[0]:
                            return OVERFLOW
                        cur[cur_len] = c
                        cur_len += 1
            for k in range(e):
                a = _letter(x, e, k)
                b = _letter(x, e, (k + 1) % e)
                c2 = _letter(x, e, (k + 2) % e)
                if a == c2 and (a - b == 1 or b - a == 1):
                    # Rotate the window to the front, rewrite a b a -> b a b.
                    y = ((x << (3 * k)) & mask) | (x >> (3 * (e - k))) if k else x
                    y = _set_letter(y, e, 0, b)
                    y = _set_letter(y, e, 1, a)
                    y = _set_letter(y, e, 2, b)
                    c = _min_rotation(y, e, mask)
                    got = _probe(table, stamps, dists, stamp, c, d + 1)
                    if got < 0:
                        return OVERFLOW
                    if got == 1:
                        if _has_count_one(c, e, n):
                            return REDUCIBLE
                        if nxt_len >= nxt.shape[0]:
                            return OVERFLOW
                        nxt[nxt_len] = c
                        nxt_len += 1
        for t in range(nxt_len):
            cur[t] = nxt[t]
        cur_len = nxt_len
        d += 1
    return EXHAUSTED


@njit(cache=True)
def _is_necklace(w, e):
    """Is ``w`` the lexicographically least among its rotations?"""
    for j in range(1, e):
        if w[j] == w[0]:
            for k in range(1, e):
                a = w[(j + k) % e]
                b = w[k]
                if a < b:
                    return False
                if a > b:
                    break
    return True


@njit(cache=True)
def _is_knot(w, e, n, perm):
    for i in range(n):
        perm[i] = i
    for t in range(e):
        a = w[t] - 1
        perm[a], perm[a + 1] = perm[a + 1], perm[a]
    # One cycle through strand 0 must cover everything.
    length = 1
    k = perm[0]
    while k != 0:
        k = perm[k]
        length += 1
    return length == n


@njit(cache=True)
def _pack_word(w, e):
    x = np.int64(0)
    for t in range(e):
        x = (x << 3) | np.int64(w[t])
    return x


@njit(cache=True)
def _quick_certificate(w, e, content, n):
    """One-relation reducibility by inspection, no search.

    For a generator ``a`` of count 2 whose occurrences have a cyclic gap
    holding exactly one ``a``-adjacent letter and otherwise only letters
    commuting with ``a``, the gap empties by swaps taken always next to
    a boundary ``a``, leaving a contiguous a b a; that relation drops
    the count of ``a`` to 1.  Sound but deliberately incomplete.
    """
    for a in range(1, n):
        if content[a] != 2:
            continue
        p1 = -1
        p2 = -1
        for t in range(e):
            if w[t] == a:
                if p1 < 0:
                    p1 = t
                else:
                    p2 = t
        # inner gap p1+1..p2-1, outer gap p2+1..p1-1 cyclically
        for which in range(2):
            adjacent = 0
            blocked = False
            if which == 0:
                t = p1 + 1
                stop = p2
            else:
                t = p2 + 1
                stop = p1 + e
            while t < stop:
                x = w[t % e]
                d = x - a if x > a else a - x
                if d == 1:
                    adjacent += 1
                elif d < 1:
                    blocked = True
                t += 1
            if not blocked and adjacent == 1:
                return True
    return False


@njit(cache=True)
def dichotomy_cell(n, e, content, depth, sample_stride, residue, samples, verdicts):
    """Count fixed-content knot necklaces and screen each for reducibility.

    ``content[j]`` is the required count of letter ``j`` (index 1..n-1,
    entry 1 must be positive).  Returns the tuple (necklaces, knots,
    reducible, residue_count, sample_count, overflow_flag); unresolved
    words land packed in ``residue``, every ``sample_stride``-th knot word
    with its verdict in ``samples``/``verdicts``.
    """
    table = np.zeros(TABLE_SIZE, np.int64)
    stamps = np.zeros(TABLE_SIZE, np.int64)
    dists = np.zeros(TABLE_SIZE, np.int8)
    cur = np.zeros(FRONTIER_CAP, np.int64)
    nxt = np.zeros(FRONTIER_CAP, np.int64)
    perm = np.zeros(n, np.int64)
    w = np.zeros(e, np.int64)
    cand = np.zeros(e, np.int64)
    rem = content.copy()

    w[0] = 1
    rem[1] -= 1
    necklaces = np.int64(0)
    knots = np.int64(0)
    reducible = np.int64(0)
    residue_n = np.int64(0)
    sample_n = np.int64(0)
    stamp = np.int64(0)
    overflow = False

    pos = 1
    cand[1] = 0
    while pos >= 1:
        prev = cand[pos]
        if prev > 0:
            rem[prev] += 1
        nxt_letter = prev + 1
        while nxt_letter < n and rem[nxt_letter] == 0:
            nxt_letter += 1
        if nxt_letter >= n:
            cand[pos] = 0
            pos -= 1
            continue
        rem[nxt_letter] -= 1
        cand[pos] = nxt_letter
        w[pos] = nxt_letter
        if pos < e - 1:
            pos += 1
            cand[pos] = 0
            continue
        if not _is_necklace(w, e):
            continue
        necklaces += 1
        if not _is_knot(w, e, n, perm):
            continue
        knots += 1
        packed = _pack_word(w, e)
        if _quick_certificate(w, e, content, n) and depth >= 1:
            verdict = REDUCIBLE
        else:
            stamp += 1
            verdict = _screen_one(
                packed, e, n, depth, table, stamps, dists, stamp, cur, nxt
            )
        if verdict == REDUCIBLE:
            reducible += 1
        else:
            if residue_n < residue.shape[0]:
                residue[residue_n] = packed
                residue_n += 1
            else:
                overflow = True
        if sample_stride > 0 and knots % sample_stride == 0:
            if sample_n < samples.shape[0]:
                samples[sample_n] = packed
                verdicts[sample_n] = verdict
                sample_n += 1
    return necklaces, knots, reducible, residue_n, sample_n, overflow


@njit(cache=True)
def count_words_with_components(n, length, want_knots):
    """All positive words of one exact length: count them and their knots.

    Used as a compiled assist for the word-versus-oracle sweep totals; the
    oracle itself stays in pure Python.
    """
    if length == 0:
        return np.int64(1), np.int64(1 if n == 1 else 0)
    w = np.zeros(length, np.int64)
    perm = np.zeros(n, np.int64)
    total = np.int64(0)
    knots = np.int64(0)
    pos = 0
    w[0] = 0
    while pos >= 0:
        w[pos] += 1
        if w[pos] > n - 1:
            w[pos] = 0
            pos -= 1
            continue
        if pos < length - 1:
            pos += 1
            w[pos] = 0
            continue
        total += 1
        if want_knots and _is_knot(w, length, n, perm):
            knots += 1
    return total, knots


def pack_letters(letters: tuple[int, ...]) -> int:
    """Pure-side packing helper matching the kernel convention."""
    x = 0
    for value in letters:
        x = (x << 3) | value
    return x


def unpack_letters(packed: int, e: int) -> tuple[int, ...]:
    out = []
    for t in range(e):
        out.append((packed >> (3 * (e - 1 - t))) & LETTER_MASK)
    return tuple(out)


def new_residue_buffer(cap: int = 1 << 20) -> np.ndarray:
    return np.zeros(cap, np.int64)


def new_sample_buffers(cap: int = 1 << 16) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(cap, np.int64), np.zeros(cap, np.int8)


# ---------------------------------------------------------------------------
# paired grid search
#
# One flat int32 journal per side records every mutation a placement makes,
# so backtracking is a strict pop.  Faces never exceed slots + arcs ids and
# every undo happens in LIFO order, which pins the split face id to
# next_face - 1 without storing it.


@njit(cache=True)
def _sm_place(succ, face, filled, comp, stubs, darts, slots, n_vertices,
              x, y, next_face, jr, jt, guard):
    """Fill stubs x, y; returns (ok, next_face, jt)."""
    fx = face[x]
    fy = face[y]
    vx = x // slots
    vy = y // slots
    if fx != fy and comp[vx] == comp[vy]:
        return 0, next_face, jt
    tmp = succ[x]
    succ[x] = succ[y]
    succ[y] = tmp
    filled[x] = 1
    filled[y] = 1
    if fx == fy:
        new_id = next_face
        jt0 = jt
        n_cycle = 0
        n_stubs = 0
        n_darts = 0
        pos = x
        while True:
            jr[jt] = pos
            jt += 1
            n_cycle += 1
            face[pos] = new_id
            if filled[pos] == 1:
                n_darts += 1
            else:
                n_stubs += 1
            pos = succ[pos]
            if pos == x:
                break
        old_stubs = stubs[fx]
        old_darts = darts[fx]
        stubs[new_id] = n_stubs
        darts[new_id] = n_darts
        stubs[fx] = old_stubs - 2 - n_stubs
        darts[fx] = old_darts + 2 - n_darts
        if guard == 1 and (
            (stubs[new_id] == 0 and darts[new_id] <= 1)
            or (stubs[fx] == 0 and darts[fx] <= 1)
        ):
            for k in range(jt0, jt0 + n_cycle):
                face[jr[k]] = fx
            stubs[fx] = old_stubs
            darts[fx] = old_darts
            tmp = succ[x]
            succ[x] = succ[y]
            succ[y] = tmp
            filled[x] = 0
            filled[y] = 0
            return 0, next_face, jt0
        jr[jt] = old_darts
        jr[jt + 1] = old_stubs
        jr[jt + 2] = fx
        jr[jt + 3] = y
        jr[jt + 4] = x
        jr[jt + 5] = n_cycle
        jr[jt + 6] = 0
        return 1, next_face + 1, jt + 7
    # distinct components merge; walk the fused face and pull fy over
    n_relabel = 0
    pos = x
    while True:
        if face[pos] == fy:
            jr[jt] = pos
            jt += 1
            n_relabel += 1
            face[pos] = fx
        pos = succ[pos]
        if pos == x:
            break
    old_comp = comp[vy]
    new_comp = comp[vx]
    n_moved = 0
    for t in range(n_vertices):
        if comp[t] == old_comp:
            jr[jt] = t
            jt += 1
            n_moved += 1
            comp[t] = new_comp
    sy = stubs[fy]
    dy = darts[fy]
    old_stubs = stubs[fx]
    old_darts = darts[fx]
    stubs[fx] = old_stubs + sy - 2
    darts[fx] = old_darts + dy + 2
    jr[jt] = old_darts
    jr[jt + 1] = old_stubs
    jr[jt + 2] = dy
    jr[jt + 3] = sy
    jr[jt + 4] = old_comp
    jr[jt + 5] = fy
    jr[jt + 6] = y
    jr[jt + 7] = x
    jr[jt + 8] = n_moved
    jr[jt + 9] = n_relabel
    jr[jt + 10] = 1
    return 1, next_face, jt + 11


@njit(cache=True)
def _sm_undo(succ, face, filled, comp, stubs, darts, next_face, jr, jt):
    """Pop one placement; returns (next_face, jt)."""
    kind = jr[jt - 1]
    if kind == 0:
        n_cycle = jr[jt - 2]
        x = jr[jt - 3]
        y = jr[jt - 4]
        fx = jr[jt - 5]
        old_stubs = jr[jt - 6]
        old_darts = jr[jt - 7]
        base = jt - 7 - n_cycle
        for k in range(base, base + n_cycle):
            face[jr[k]] = fx
        stubs[fx] = old_stubs
        darts[fx] = old_darts
        next_face = next_face - 1
        jt = base
    else:
        n_relabel = jr[jt - 2]
        n_moved = jr[jt - 3]
        x = jr[jt - 4]
        y = jr[jt - 5]
        fy = jr[jt - 6]
        old_comp = jr[jt - 7]
        sy = jr[jt - 8]
        dy = jr[jt - 9]
        old_stubs = jr[jt - 10]
        old_darts = jr[jt - 11]
        mbase = jt - 11 - n_moved
        for k in range(mbase, mbase + n_moved):
            comp[jr[k]] = old_comp
        rbase = mbase - n_relabel
        for k in range(rbase, rbase + n_relabel):
            face[jr[k]] = fy
        stubs[fy] = sy
        darts[fy] = dy
        fx = face[x]
        stubs[fx] = old_stubs
        darts[fx] = old_darts
        jt = rbase
    tmp = succ[x]
    succ[x] = succ[y]
    succ[y] = tmp
    filled[x] = 0
    filled[y] = 0
    return next_face, jt


@njit(cache=True)
def paired_dfs_cell(p, q, q_signs, p_signs, comp_ids, out):
    """All full matchings passing both face engines, row-major DFS order.

    out receives point-index pairs, p*q ints per leaf; returns
    (leaves, out_len, overflow).  comp_ids holds a component id per
    thick-side label, -1 everywhere when components are not tracked.
    """
    T = p * q
    half = T // 2
    # per-point data
    qs = np.empty(T, np.int8)
    ps = np.empty(T, np.int8)
    cv = np.empty(T, np.int8)
    qpos = np.empty(T, np.int32)
    ppos = np.empty(T, np.int32)
    for t in range(T):
        i0 = t // p
        m0 = t % p
        qs[t] = q_signs[i0]
        ps[t] = p_signs[m0]
        cv[t] = comp_ids[m0]
        if q_signs[i0] > 0:
            qpos[t] = i0 * p + m0
        else:
            qpos[t] = i0 * p + p - 1 - m0
        if p_signs[m0] > 0:
            ppos[t] = m0 * q + i0
        else:
            ppos[t] = m0 * q + q - 1 - i0
    # Q side state
    q_succ = np.empty(T, np.int32)
    q_face = np.empty(T, np.int32)
    q_filled = np.zeros(T, np.int8)
    q_comp = np.empty(q, np.int32)
    q_stubs = np.zeros(T + half + 2, np.int32)
    q_darts = np.zeros(T + half + 2, np.int32)
    for i0 in range(q):
        base = i0 * p
        for s in range(p):
            q_succ[base + s] = base + (s + 1) % p
            q_face[base + s] = i0
        q_comp[i0] = i0
        q_stubs[i0] = p
        q_darts[i0] = 0
    nfq = q
    # P side state
    p_succ = np.empty(T, np.int32)
    p_face = np.empty(T, np.int32)
    p_filled = np.zeros(T, np.int8)
    p_comp = np.empty(p, np.int32)
    p_stubs = np.zeros(T + half + 2, np.int32)
    p_darts = np.zeros(T + half + 2, np.int32)
    for m0 in range(p):
        base = m0 * q
        for s in range(q):
            p_succ[base + s] = base + (s + 1) % q
            p_face[base + s] = m0
        p_comp[m0] = m0
        p_stubs[m0] = q
        p_darts[m0] = 0
    nfp = p
    # journals
    jr_cap = (T + q + p + 24) * (half + 2)
    jrq = np.empty(jr_cap, np.int32)
    jrp = np.empty(jr_cap, np.int32)
    jtq = 0
    jtp = 0
    covered = np.zeros(T, np.int8)
    fidx = np.empty(half + 1, np.int32)
    fpart = np.empty(half + 1, np.int32)
    fcand = np.empty(half + 1, np.int32)
    leaves = 0
    out_len = 0
    overflow = 0
    cap = out.shape[0]
    d = 0
    fidx[0] = 0
    fcand[0] = 1
    while True:
        idx = fidx[d]
        j = fcand[d]
        placed = False
        while j < T:
            if covered[j] == 0:
                ok_pair = (qs[idx] == qs[j]) != (ps[idx] == ps[j])
                if ok_pair and cv[idx] >= 0 and cv[idx] != cv[j]:
                    ok_pair = False
                if ok_pair:
                    okq, nfq, jtq = _sm_place(
                        q_succ, q_face, q_filled, q_comp, q_stubs, q_darts,
                        p, q, qpos[idx], qpos[j], nfq, jrq, jtq, 1)
                    if okq == 1:
                        okp, nfp, jtp = _sm_place(
                            p_succ, p_face, p_filled, p_comp, p_stubs, p_darts,
                            q, p, ppos[idx], ppos[j], nfp, jrp, jtp, 1)
                        if okp == 1:
                            placed = True
                            break
                        nfq, jtq = _sm_undo(
                            q_succ, q_face, q_filled, q_comp, q_stubs, q_darts,
                            nfq, jrq, jtq)
            j += 1
        if placed:
            fcand[d] = j + 1
            fpart[d] = j
            covered[idx] = 1
            covered[j] = 1
            nb = idx + 1
            while nb < T and covered[nb] == 1:
                nb += 1
            if nb == T:
                if out_len + T <= cap:
                    for k in range(d + 1):
                        out[out_len] = fidx[k]
                        out[out_len + 1] = fpart[k]
                        out_len += 2
                else:
                    overflow = 1
                leaves += 1
                covered[idx] = 0
                covered[j] = 0
                nfp, jtp = _sm_undo(
                    p_succ, p_face, p_filled, p_comp, p_stubs, p_darts,
                    nfp, jrp, jtp)
                nfq, jtq = _sm_undo(
                    q_succ, q_face, q_filled, q_comp, q_stubs, q_darts,
                    nfq, jrq, jtq)
                continue
            d += 1
            fidx[d] = nb
            fcand[d] = nb + 1
            continue
        if d == 0:
            break
        d -= 1
        covered[fidx[d]] = 0
        covered[fpart[d]] = 0
        nfp, jtp = _sm_undo(
            p_succ, p_face, p_filled, p_comp, p_stubs, p_darts, nfp, jrp, jtp)
        nfq, jtq = _sm_undo(
            q_succ, q_face, q_filled, q_comp, q_stubs, q_darts, nfq, jrq, jtq)
    return leaves, out_len, overflow


@njit(cache=True)
def _webs_feasible(regular, gpl, fpl, quota, ghosts, strict, undecided):
    left = quota - ghosts
    if left < 0:
        return 0
    if strict == 1:
        for lam in range(1, regular.shape[0]):
            if regular[lam] == 1:
                need = 1 - gpl[lam]
                if need < 0 or need > fpl[lam]:
                    return 0
    else:
        room = 0
        for lam in range(1, regular.shape[0]):
            if regular[lam] == 1:
                room += fpl[lam]
        if left > room:
            return 0
    if (undecided - left) % 2 != 0:
        return 0
    return 1


@njit(cache=True)
def _webs_saturated(comp, kind, v, p, members, free):
    for t in range(v):
        members[t] = 0
        free[t] = 0
    for t in range(v):
        c = comp[t]
        members[c] += 1
        base = t * p
        for s in range(base, base + p):
            if kind[s] == 0:
                free[c] += 1
    for t in range(v):
        if members[t] > 0 and free[t] == 0 and members[t] < v:
            return 1
    return 0


@njit(cache=True)
def _webs_canonical(kind, partner, v, p, perms, ka, kb, ga, gb):
    size = v * p
    n_arcs = 0
    n_g = 0
    for pos in range(size):
        if kind[pos] == 1:
            ga[2 * n_g] = pos // p
            ga[2 * n_g + 1] = pos % p + 1
            n_g += 1
        elif kind[pos] == 2 and partner[pos] > pos:
            t1 = pos // p
            l1 = pos % p + 1
            t2 = partner[pos] // p
            l2 = partner[pos] % p + 1
            b = 4 * n_arcs
            if t1 < t2:
                ka[b] = t1
                ka[b + 1] = l1
                ka[b + 2] = t2
                ka[b + 3] = l2
            else:
                ka[b] = t2
                ka[b + 1] = l2
                ka[b + 2] = t1
                ka[b + 3] = l1
            n_arcs += 1
    # insertion sort of 4-wide rows
    for r in range(1, n_arcs):
        k = r
        while k > 0:
            a = 4 * (k - 1)
            b = 4 * k
            bigger = False
            for z in range(4):
                if ka[a + z] != ka[b + z]:
                    bigger = ka[a + z] > ka[b + z]
                    break
            if not bigger:
                break
            for z in range(4):
                tmp = ka[a + z]
                ka[a + z] = ka[b + z]
                ka[b + z] = tmp
            k -= 1
    for r in range(1, n_g):
        k = r
        while k > 0:
            a = 2 * (k - 1)
            b = 2 * k
            if (ga[a], ga[a + 1]) <= (ga[b], ga[b + 1]):
                break
            for z in range(2):
                tmp = ga[a + z]
                ga[a + z] = ga[b + z]
                ga[b + z] = tmp
            k -= 1
    for row in range(perms.shape[0]):
        m = 0
        for pos in range(size):
            if kind[pos] == 2 and partner[pos] > pos:
                t1 = perms[row, pos // p]
                l1 = pos % p + 1
                t2 = perms[row, partner[pos] // p]
                l2 = partner[pos] % p + 1
                b = 4 * m
                if t1 < t2:
                    kb[b] = t1
                    kb[b + 1] = l1
                    kb[b + 2] = t2
                    kb[b + 3] = l2
                else:
                    kb[b] = t2
                    kb[b + 1] = l2
                    kb[b + 2] = t1
                    kb[b + 3] = l1
                m += 1
        for r in range(1, n_arcs):
            k = r
            while k > 0:
                a = 4 * (k - 1)
                b = 4 * k
                bigger = False
                for z in range(4):
                    if kb[a + z] != kb[b + z]:
                        bigger = kb[a + z] > kb[b + z]
                        break
                if not bigger:
                    break
                for z in range(4):
                    tmp = kb[a + z]
                    kb[a + z] = kb[b + z]
                    kb[b + z] = tmp
                k -= 1
        m = 0
        for pos in range(size):
            if kind[pos] == 1:
                gb[2 * m] = perms[row, pos // p]
                gb[2 * m + 1] = pos % p + 1
                m += 1
        for r in range(1, n_g):
            k = r
            while k > 0:
                a = 2 * (k - 1)
                b = 2 * k
                if (gb[a], gb[a + 1]) <= (gb[b], gb[b + 1]):
                    break
                for z in range(2):
                    tmp = gb[a + z]
                    gb[a + z] = gb[b + z]
                    gb[b + z] = tmp
                k -= 1
        verdict = 0  # -1 smaller, 0 equal, 1 bigger
        for z in range(4 * n_arcs):
            if kb[z] != ka[z]:
                verdict = -1 if kb[z] < ka[z] else 1
                break
        if verdict == 0:
            for z in range(2 * n_g):
                if gb[z] != ga[z]:
                    verdict = -1 if gb[z] < ga[z] else 1
                    break
        if verdict == -1:
            return 0
    return 1


@njit(cache=True)
def webs_dfs_cell(v, p, regular, quota, strict, perms, out):
    """All connected canonical fragments, slot-major DFS order.

    regular marks labels eligible for ghosts (index 1..p); quota fixes
    the ghost total; strict additionally pins one ghost per regular
    label.  out receives ``v * p`` ints per leaf: the partner slot of
    each slot, -1 where a ghost sits.  Returns (leaves, out_len,
    overflow).
    """
    size = v * p
    half = size // 2
    succ = np.empty(size, np.int32)
    face = np.empty(size, np.int32)
    filled = np.zeros(size, np.int8)
    comp = np.empty(v, np.int32)
    stubs = np.zeros(size + half + 2, np.int32)
    darts = np.zeros(size + half + 2, np.int32)
    for t in range(v):
        base = t * p
        for s in range(p):
            succ[base + s] = base + (s + 1) % p
            face[base + s] = t
        comp[t] = t
        stubs[t] = p
        darts[t] = 0
    nf = v
    jr = np.empty((size + v + p + 24) * (half + 2), np.int32)
    jt = 0
    kind = np.zeros(size, np.int8)
    partner = np.full(size, -1, np.int32)
    gpl = np.zeros(p + 1, np.int32)
    fpl = np.zeros(p + 1, np.int32)
    for lam in range(1, p + 1):
        if regular[lam] == 1:
            fpl[lam] = v
    ghosts = 0
    undecided = size
    members = np.empty(v, np.int32)
    free = np.empty(v, np.int32)
    ka = np.empty(4 * half, np.int32)
    kb = np.empty(4 * half, np.int32)
    ga = np.empty(2 * size, np.int32)
    gb = np.empty(2 * size, np.int32)
    fpos = np.empty(size + 1, np.int32)
    fcand = np.empty(size + 1, np.int32)
    fmode = np.empty(size + 1, np.int32)
    fpart = np.empty(size + 1, np.int32)
    leaves = 0
    out_len = 0
    overflow = 0
    cap = out.shape[0]
    if _webs_feasible(regular, gpl, fpl, quota, ghosts, strict, undecided) == 0:
        return 0, 0, 0
    d = 0
    fpos[0] = 0
    fcand[0] = 0
    while True:
        pos = fpos[d]
        c = fcand[d]
        lam = pos % p + 1
        vx = pos // p
        placed = False
        while c < size:
            if c == pos:
                ok_ghost = regular[lam] == 1
                if ok_ghost and strict == 1 and gpl[lam] != 0:
                    ok_ghost = False
                if ok_ghost and strict == 0 and ghosts >= quota:
                    ok_ghost = False
                if ok_ghost:
                    kind[pos] = 1
                    gpl[lam] += 1
                    ghosts += 1
                    fpl[lam] -= 1
                    undecided -= 1
                    keep = _webs_feasible(
                        regular, gpl, fpl, quota, ghosts, strict, undecided
                    ) == 1 and _webs_saturated(comp, kind, v, p, members, free) == 0
                    if keep:
                        placed = True
                        fmode[d] = 0
                        fcand[d] = pos + 1
                        break
                    undecided += 1
                    fpl[lam] += 1
                    ghosts -= 1
                    gpl[lam] -= 1
                    kind[pos] = 0
                c = pos + 1
            else:
                lam2 = c % p + 1
                if kind[c] == 0 and c // p != vx and lam2 != lam:
                    ok, nf, jt = _sm_place(
                        succ, face, filled, comp, stubs, darts,
                        p, v, pos, c, nf, jr, jt, 1)
                    if ok == 1:
                        kind[pos] = 2
                        kind[c] = 2
                        partner[pos] = c
                        partner[c] = pos
                        if regular[lam] == 1:
                            fpl[lam] -= 1
                        if regular[lam2] == 1:
                            fpl[lam2] -= 1
                        undecided -= 2
                        keep = _webs_feasible(
                            regular, gpl, fpl, quota, ghosts, strict, undecided
                        ) == 1 and _webs_saturated(
                            comp, kind, v, p, members, free
                        ) == 0
                        if keep:
                            placed = True
                            fmode[d] = 1
                            fpart[d] = c
                            fcand[d] = c + 1
                            break
                        undecided += 2
                        if regular[lam2] == 1:
                            fpl[lam2] += 1
                        if regular[lam] == 1:
                            fpl[lam] += 1
                        partner[pos] = -1
                        partner[c] = -1
                        kind[pos] = 0
                        kind[c] = 0
                        nf, jt = _sm_undo(
                            succ, face, filled, comp, stubs, darts, nf, jr, jt)
                c += 1
        if placed:
            nb = pos + 1
            while nb < size and kind[nb] != 0:
                nb += 1
            if nb < size:
                d += 1
                fpos[d] = nb
                fcand[d] = nb
                continue
            connected = True
            c0 = comp[0]
            for t in range(1, v):
                if comp[t] != c0:
                    connected = False
                    break
            if connected and _webs_canonical(
                kind, partner, v, p, perms, ka, kb, ga, gb
            ) == 1:
                if out_len + size <= cap:
                    for s in range(size):
                        out[out_len + s] = partner[s]
                    out_len += size
                else:
                    overflow = 1
                leaves += 1
            # revert this frame's placement and keep scanning candidates
            if fmode[d] == 0:
                kind[pos] = 0
                gpl[lam] -= 1
                ghosts -= 1
                fpl[lam] += 1
                undecided += 1
            else:
                y = fpart[d]
                lam2 = y % p + 1
                undecided += 2
                if regular[lam2] == 1:
                    fpl[lam2] += 1
                if regular[lam] == 1:
                    fpl[lam] += 1
                partner[pos] = -1
                partner[y] = -1
                kind[pos] = 0
                kind[y] = 0
                nf, jt = _sm_undo(
                    succ, face, filled, comp, stubs, darts, nf, jr, jt)
            continue
        if d == 0:
            break
        d -= 1
        pos = fpos[d]
        lam = pos % p + 1
        if fmode[d] == 0:
            kind[pos] = 0
            gpl[lam] -= 1
            ghosts -= 1
            fpl[lam] += 1
            undecided += 1
        else:
            y = fpart[d]
            lam2 = y % p + 1
            undecided += 2
            if regular[lam2] == 1:
                fpl[lam2] += 1
            if regular[lam] == 1:
                fpl[lam] += 1
            partner[pos] = -1
            partner[y] = -1
            kind[pos] = 0
            kind[y] = 0
            nf, jt = _sm_undo(succ, face, filled, comp, stubs, darts, nf, jr, jt)
    return leaves, out_len, overflow
