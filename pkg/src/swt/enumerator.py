"""Exhaustive streams of web fragments, paired configurations, and
positive braid populations, plus property sweeps with manifests.

Generation works bottom-up: a splice engine tracks the face structure of
each partially built side incrementally, so handle-creating placements
are refused the moment they appear and whole search subtrees vanish.
Streams are deterministic: fixed branching order, canonical-form
deduplication at the leaves, no randomness anywhere.

Braid populations at seven strands run through the compiled kernels in
``_fast``; every word the screen fails to certify is re-examined by the
reference search in ``braid``, which stays the single source of truth.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _fast
from .braid import BraidWord, _search_reduction, default_depth
from .surface import (
    Arc,
    Case,
    FormatError,
    GeneralCase,
    PairedIntersection,
    ThreeSummandCase,
    WebPatch,
    case_from_dict,
    graph_to_dict,
    mirror,
    trace_lambda_path,
    validate,
)
from .webs import GreatWeb, WebError, build_gamma, divisibility_report, find_full_quota, verify_great_web


class EnumerationError(ValueError):
    """Unusable enumeration parameters or an inconsistent sweep setup."""


# ---------------------------------------------------------------------------
# splice engine


class _SideMap:
    """Incremental face tracker for one side of the grid.

    Positions are slots in rotation order around each vertex; every
    position starts as a free stub and an arc placement fills two of
    them.  The boundary successor of a stub is the next rotation slot,
    that of a filled slot the next slot after its partner, so placing an
    arc is one swap of two successor pointers.  Faces of this stub map
    are in bijection with faces of the bare arc map, and each component
    keeps Euler characteristic 2 exactly when no placement ever joins
    two distinct faces of one component.
    """

    def __init__(self, n_vertices: int, slots: int, signs: Sequence[int]):
        self.m = slots
        self.n = n_vertices
        self.signs = tuple(signs)
        size = n_vertices * slots
        self.succ = [0] * size
        for t in range(n_vertices):
            base = t * slots
            for s in range(slots):
                self.succ[base + s] = base + (s + 1) % slots
        self.face = [t for t in range(n_vertices) for _ in range(slots)]
        self.filled = [False] * size
        self.comp = list(range(n_vertices))
        self.face_stubs = {t: slots for t in range(n_vertices)}
        self.face_darts = {t: 0 for t in range(n_vertices)}
        self.next_face = n_vertices

    def position(self, vertex: int, label: int) -> int:
        """Slot position of ``label`` at 0-based ``vertex``.

        Rotation order is label-ascending at positive vertices and
        label-descending at negative ones.
        """
        if self.signs[vertex] > 0:
            s = label - 1
        else:
            s = self.m - label
        return vertex * self.m + s

    def _cycle_from(self, start: int) -> list[int]:
        out = [start]
        pos = self.succ[start]
        while pos != start:
            out.append(pos)
            pos = self.succ[pos]
        return out

    def place(self, x: int, y: int, guard_monogon: bool = False):
        """Fill stubs ``x`` and ``y`` with one arc; None means refused.

        Refusals: the ends sit on distinct faces of one component (the
        arc would add a handle), or with the guard on, a finished face
        (no stubs left) would be a monogon.
        """
        fx, fy = self.face[x], self.face[y]
        vx, vy = x // self.m, y // self.m
        if fx != fy and self.comp[vx] == self.comp[vy]:
            return None
        self.succ[x], self.succ[y] = self.succ[y], self.succ[x]
        self.filled[x] = True
        self.filled[y] = True
        if fx == fy:
            cycle = self._cycle_from(x)
            new_id = self.next_face
            self.next_face += 1
            stubs = 0
            darts = 0
            for pos in cycle:
                self.face[pos] = new_id
                if self.filled[pos]:
                    darts += 1
                else:
                    stubs += 1
            old_stubs = self.face_stubs[fx]
            old_darts = self.face_darts[fx]
            self.face_stubs[new_id] = stubs
            self.face_darts[new_id] = darts
            self.face_stubs[fx] = old_stubs - 2 - stubs
            self.face_darts[fx] = old_darts + 2 - darts
            token = ("split", x, y, fx, new_id, cycle, old_stubs, old_darts)
            if guard_monogon and (
                (self.face_stubs[new_id] == 0 and self.face_darts[new_id] <= 1)
                or (self.face_stubs[fx] == 0 and self.face_darts[fx] <= 1)
            ):
                self.undo(token)
                return None
            return token
        # distinct components: faces and components fuse, spheres stay spheres

        relabel = [pos for pos in self._cycle_from(x) if self.face[pos] == fy]
        for pos in relabel:
            self.face[pos] = fx
        old_comp = self.comp[vy]
        new_comp = self.comp[vx]
        moved = [t for t in range(self.n) if self.comp[t] == old_comp]
        for t in moved:
            self.comp[t] = new_comp
        sy = self.face_stubs.pop(fy)
        dy = self.face_darts.pop(fy)
        old_stubs = self.face_stubs[fx]
        old_darts = self.face_darts[fx]
        self.face_stubs[fx] = old_stubs + sy - 2
        self.face_darts[fx] = old_darts + dy + 2
        return ("merge", x, y, fy, relabel, moved, old_comp, sy, dy, old_stubs, old_darts)

    def undo(self, token) -> None:
        kind = token[0]
        if kind == "split":
            _, x, y, fx, new_id, cycle, old_stubs, old_darts = token
            for pos in cycle:
                self.face[pos] = fx
            del self.face_stubs[new_id]
            del self.face_darts[new_id]
            self.face_stubs[fx] = old_stubs
            self.face_darts[fx] = old_darts
            self.next_face = new_id
        else:
            _, x, y, fy, relabel, moved, old_comp, sy, dy, old_stubs, old_darts = token
            for pos in relabel:
                self.face[pos] = fy
            for t in moved:
                self.comp[t] = old_comp
            self.face_stubs[fy] = sy
            self.face_darts[fy] = dy
            fx = self.face[x]
            self.face_stubs[fx] = old_stubs
            self.face_darts[fx] = old_darts
        self.succ[x], self.succ[y] = self.succ[y], self.succ[x]
        self.filled[x] = False
        self.filled[y] = False


# ---------------------------------------------------------------------------
# canonical keys


def _normalize_pair(a, b):
    return (a, b) if a <= b else (b, a)


def _web_key(arcs, ghosts, perm=None):
    """Order-free key of a fragment: arcs as (vertex, label) end pairs.

    ``perm`` renumbers vertices; labels are never touched, they are
    pinned by the grid.
    """
    if perm is None:
        mapped_arcs = [_normalize_pair(a, b) for a, b in arcs]
        mapped_ghosts = list(ghosts)
    else:
        mapped_arcs = [
            _normalize_pair((perm[a[0]], a[1]), (perm[b[0]], b[1])) for a, b in arcs
        ]
        mapped_ghosts = [(perm[t], lam) for t, lam in ghosts]
    return (tuple(sorted(mapped_arcs)), tuple(sorted(mapped_ghosts)))


def _is_web_canonical(arcs, ghosts, v: int) -> bool:
    base = _web_key(arcs, ghosts)
    for perm in itertools.permutations(range(v)):
        if perm == tuple(range(v)):
            continue
        if _web_key(arcs, ghosts, perm) < base:
            return False
    return True


def patch_canonical_key(patch: WebPatch):
    """Canonical key of a patch under sign normalization and renumbering.

    A negative fragment is flipped first, so a web and its mirror image
    share one key; vertex names are forgotten, labels kept.
    """
    if any(sign < 0 for _, sign in patch.vertices):
        patch = mirror(patch)
    order = sorted((vid for vid, _ in patch.vertices), key=lambda s: int(s[1:]))
    index = {vid: t for t, vid in enumerate(order)}
    arcs = []
    ghosts = []
    for arc in patch.arcs:
        if arc.ghost is not None:
            ghosts.append((index[arc.ghost[0]], arc.ghost[1]))
        else:
            (qa, pa), (qb, pb) = arc.ends
            arcs.append(((index[qa], int(pa[1:])), (index[qb], int(pb[1:]))))
    best = None
    for perm in itertools.permutations(range(len(order))):
        key = _web_key(arcs, ghosts, perm)
        if best is None or key < best:
            best = key
    return best


# ---------------------------------------------------------------------------
# web fragment enumeration


def _check_case(case: Case, p: int) -> None:
    if isinstance(case, GeneralCase):
        if case.l < 2:
            raise EnumerationError(f"cycle length l = {case.l} must be at least 2")
        return
    if case.l1 < 2 or case.l2 < 2:
        raise EnumerationError("both cycle lengths must be at least 2")
    if gcd(case.l1, case.l2) != 1:
        raise EnumerationError(f"gcd({case.l1}, {case.l2}) must be 1")
    if not 4 <= case.x <= p - 2:
        raise EnumerationError(f"x = {case.x} outside 4..{p - 2}")
    if case.p1 + case.p2 != p:
        raise EnumerationError(f"p1 + p2 = {case.p1 + case.p2} does not match p = {p}")
    if case.p1 < 2 or case.p2 < 2:
        raise EnumerationError("each summand component needs at least 2 vertices")


def enumerate_webs(
    v: int, p: int, case: Case, *, ledger: str = "strict"
) -> Iterator[WebPatch]:
    """All connected planar same-sign fragments on ``v`` vertices, up to
    vertex renumbering.

    Every vertex carries one end per label; a slot holds either an arc
    end or a declared ghost.  Arcs never form loops and never join equal
    labels.  The strict ledger puts exactly one ghost on each regular
    label; the free ledger only fixes their total, so single labels may
    go uncovered.  All fragments come out positive; mirrors are a sign
    flip away and never enumerated separately.
    """
    if v < 1:
        raise EnumerationError(f"vertex count v = {v} must be at least 1")
    if p < 2:
        raise EnumerationError(f"p = {p} must be at least 2")
    if ledger not in ("strict", "free"):
        raise EnumerationError(f"ledger must be 'strict' or 'free', got {ledger!r}")
    _check_case(case, p)
    regular = set(case.regular_labels(p))
    quota = case.ghost_count(p)

    size = v * p
    engine = _SideMap(v, p, [1] * v)
    kind = [0] * size  # 0 undecided, 1 ghost, 2 arc end
    partner = [-1] * size
    ghost_per_label = {lam: 0 for lam in regular}
    state = {"ghosts": 0}
    label_of = [s % p + 1 for s in range(size)]
    free_per_label: dict[int, int] = {lam: v for lam in regular}

    def feasible(undecided: int) -> bool:
        left = quota - state["ghosts"]
        if left < 0:
            return False
        if ledger == "strict":
            for lam in regular:
                need = 1 - ghost_per_label[lam]
                if need < 0 or need > free_per_label[lam]:
                    return False
        else:
            room = sum(free_per_label[lam] for lam in regular)
            if left > room:
                return False
        # remaining arc ends must pair up
        return (undecided - left) % 2 == 0

    def saturated_component() -> bool:
        free_in_comp: dict[int, int] = {}
        members: dict[int, int] = {}
        for t in range(v):
            c = engine.comp[t]
            members[c] = members.get(c, 0) + 1
            base = t * p
            free_in_comp[c] = free_in_comp.get(c, 0) + sum(
                1 for s in range(base, base + p) if kind[s] == 0
            )
        for c, free in free_in_comp.items():
            if free == 0 and members[c] < v:
                return True
        return False

    def emit() -> Optional[WebPatch]:
        arcs = []
        ghosts = []
        for pos in range(size):
            if kind[pos] == 1:
                ghosts.append((pos // p, label_of[pos]))
            elif kind[pos] == 2 and partner[pos] > pos:
                arcs.append(
                    _normalize_pair(
                        (pos // p, label_of[pos]),
                        (partner[pos] // p, label_of[partner[pos]]),
                    )
                )
        if not _is_web_canonical(arcs, ghosts, v):
            return None
        records = [
            Arc(ends=((f"v{a[0] + 1}", f"u{a[1]}"), (f"v{b[0] + 1}", f"u{b[1]}")))
            for a, b in sorted(arcs)
        ]
        records.extend(
            Arc(ends=(), ghost=(f"v{t + 1}", lam)) for t, lam in sorted(ghosts)
        )
        return WebPatch(
            p=p,
            case=case,
            vertices=tuple((f"v{t + 1}", 1) for t in range(v)),
            arcs=tuple(records),
        )

    def walk(start: int, undecided: int) -> Iterator[WebPatch]:
        pos = start
        while pos < size and kind[pos] != 0:
            pos += 1
        if pos == size:
            roots = {engine.comp[t] for t in range(v)}
            if len(roots) == 1:
                patch = emit()
                if patch is not None:
                    yield patch
            return
        lam = label_of[pos]
        vertex = pos // p
        # ghost branch
        if lam in regular and (
            (ledger == "strict" and ghost_per_label[lam] == 0)
            or (ledger == "free" and state["ghosts"] < quota)
        ):
            kind[pos] = 1
            ghost_per_label[lam] += 1
            state["ghosts"] += 1
            free_per_label[lam] -= 1
            if feasible(undecided - 1) and not saturated_component():
                yield from walk(pos + 1, undecided - 1)
            free_per_label[lam] += 1
            state["ghosts"] -= 1
            ghost_per_label[lam] -= 1
            kind[pos] = 0
        # arc branches: to any later undecided slot, new vertex, new label
        for pos2 in range(pos + 1, size):
            if kind[pos2] != 0 or pos2 // p == vertex or label_of[pos2] == lam:
                continue
            token = engine.place(pos, pos2)
            if token is None:
                continue
            kind[pos] = 2
            kind[pos2] = 2
            partner[pos] = pos2
            partner[pos2] = pos
            lam2 = label_of[pos2]
            if lam in regular:
                free_per_label[lam] -= 1
            if lam2 in regular:
                free_per_label[lam2] -= 1
            if feasible(undecided - 2) and not saturated_component():
                yield from walk(pos + 1, undecided - 2)
            if lam2 in regular:
                free_per_label[lam2] += 1
            if lam in regular:
                free_per_label[lam] += 1
            partner[pos] = -1
            partner[pos2] = -1
            kind[pos] = 0
            kind[pos2] = 0
            engine.undo(token)

    if feasible(size):
        yield from walk(0, size)


# ---------------------------------------------------------------------------
# paired enumeration


@dataclass
class PairedResult:
    """One valid two-sided configuration with its certified webs."""

    config: PairedIntersection
    webs: list[GreatWeb] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "graph": graph_to_dict(self.config),
            "webs": [
                {
                    "vertices": list(web.vertices),
                    "sign": web.sign,
                    "ok": web.ok,
                }
                for web in self.webs
            ],
        }


def _paired_key(arcs, q_perm=None):
    if q_perm is None:
        return tuple(sorted(_normalize_pair(a, b) for a, b in arcs))
    return tuple(
        sorted(
            _normalize_pair((q_perm[i], m), (q_perm[j], l)) for (i, m), (j, l) in arcs
        )
    )


def _census_stabilizer(q: int):
    """Renumberings preserving the forced sign census: each half permuted."""
    h = q // 2
    for pa in itertools.permutations(range(1, h + 1)):
        for pb in itertools.permutations(range(h + 1, q + 1)):
            perm = {i: pa[i - 1] for i in range(1, h + 1)}
            perm.update({i: pb[i - h - 1] for i in range(h + 1, q + 1)})
            yield perm


def certified_webs(data: PairedIntersection) -> list[GreatWeb]:
    """Certified webs of the maximal same-sign components, in vertex order."""
    sign_of = {vid: sign for vid, sign in data.q_vertices}
    parent = {vid: vid for vid in sign_of}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for arc in data.arcs:
        a, b = arc.ends[0][0], arc.ends[1][0]
        if sign_of[a] == sign_of[b]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: dict[str, list[str]] = {}
    for vid in sign_of:
        groups.setdefault(find(vid), []).append(vid)
    webs = []
    for root in sorted(groups, key=lambda s: int(s[1:])):
        members = sorted(groups[root], key=lambda s: int(s[1:]))
        web = verify_great_web(data, vertices=members)
        if web.ok:
            webs.append(web)
    return webs


def enumerate_paired(p: int, q: int, case: Case) -> Iterator[PairedResult]:
    """All valid paired configurations up to renumbering of the thin side.

    The sign census forces exactly half the thin-side vertices positive,
    so signs are fixed as a sorted vector and only renumberings inside
    each sign class are quotiented out.  Thick-side sign vectors are all
    walked explicitly; in the three-summand case so are the component
    assignments.  Every leaf that survives the face engine is validated
    again from scratch before it is emitted.
    """
    if q < 2 or q % 2 != 0:
        raise EnumerationError(f"q = {q} must be even and at least 2")
    if p < 2:
        raise EnumerationError(f"p = {p} must be at least 2")
    _check_case(case, p)
    three = isinstance(case, ThreeSummandCase)
    h = q // 2
    q_signs = [1] * h + [-1] * h

    if three:
        forced = {1: "P1", 2: "P1", case.x: "P2", case.x + 1: "P2"}
        others = [m for m in range(1, p + 1) if m not in forced]
        assignments = []
        for chosen in itertools.combinations(others, case.p1 - 2):
            comp = dict(forced)
            chosen_set = set(chosen)
            for m in others:
                comp[m] = "P1" if m in chosen_set else "P2"
            assignments.append(comp)
    else:
        assignments = [None]

    for p_sign_bits in range(1 << p):
        p_signs = [1 if p_sign_bits & (1 << (m - 1)) else -1 for m in range(1, p + 1)]
        for comp_of in assignments:
            yield from _paired_dfs(p, q, case, q_signs, p_signs, comp_of)


def _paired_leaf(p, q, case, q_signs, p_signs, comp_of, arcs) -> Optional[PairedResult]:
    """Validate, canonicalize, and wrap one full matching."""

    def build(arc_list) -> PairedIntersection:
        return PairedIntersection(
            p=p,
            q=q,
            case=case,
            q_vertices=tuple((f"v{i}", q_signs[i - 1]) for i in range(1, q + 1)),
            p_vertices=tuple(
                (f"u{m}", p_signs[m - 1], comp_of[m] if comp_of else None)
                for m in range(1, p + 1)
            ),
            arcs=tuple(
                Arc(ends=((f"v{i}", f"u{m}"), (f"v{j}", f"u{l}")))
                for (i, m), (j, l) in sorted(
                    _normalize_pair(a, b) for a, b in arc_list
                )
            ),
        )

    config = build(arcs)
    if validate(config):
        return None
    # Renumbering the thin side permutes rotation slots around every
    # thick-side vertex, so an orbit image need not stay valid.  The
    # representative is the least key among the valid images only;
    # comparing against invalid images would drop whole classes.
    base = _paired_key(arcs)
    for perm in _census_stabilizer(q):
        if all(perm[i] == i for i in perm):
            continue
        key = _paired_key(arcs, perm)
        if key < base and not validate(build(key)):
            return None
    return PairedResult(config=config, webs=certified_webs(config))


def _paired_dfs_fast(p, q, case, q_signs, p_signs, comp_of) -> Iterator[PairedResult]:
    qs = np.asarray(q_signs, dtype=np.int8)
    ps = np.asarray(p_signs, dtype=np.int8)
    comp_ids = np.full(p, -1, dtype=np.int8)
    if comp_of is not None:
        for m in range(1, p + 1):
            comp_ids[m - 1] = 0 if comp_of[m] == "P1" else 1
    T = p * q
    for cap_bits in (22, 25):
        out = np.empty(1 << cap_bits, dtype=np.int32)
        leaves, out_len, overflow = _fast.paired_dfs_cell(p, q, qs, ps, comp_ids, out)
        if not overflow:
            break
    else:
        raise EnumerationError(
            f"leaf buffer overflow at p={p}, q={q}: {leaves} matchings"
        )
    for base in range(0, out_len, T):
        arcs = []
        for k in range(base, base + T, 2):
            a, b = int(out[k]), int(out[k + 1])
            arcs.append(((a // p + 1, a % p + 1), (b // p + 1, b % p + 1)))
        result = _paired_leaf(p, q, case, q_signs, p_signs, comp_of, arcs)
        if result is not None:
            yield result


def _paired_dfs(p, q, case, q_signs, p_signs, comp_of, use_fast=None) -> Iterator[PairedResult]:
    if use_fast is None:
        use_fast = _fast.HAVE_NUMBA
    if use_fast:
        yield from _paired_dfs_fast(p, q, case, q_signs, p_signs, comp_of)
        return
    q_map = _SideMap(q, p, q_signs)
    p_map = _SideMap(p, q, p_signs)
    covered = [[False] * (p + 1) for _ in range(q + 1)]
    arcs: list[tuple[tuple[int, int], tuple[int, int]]] = []
    points = [(i, m) for i in range(1, q + 1) for m in range(1, p + 1)]

    def leaf() -> Optional[PairedResult]:
        return _paired_leaf(p, q, case, q_signs, p_signs, comp_of, arcs)

    def walk(start_index: int) -> Iterator[PairedResult]:
        idx = start_index
        while idx < len(points) and covered[points[idx][0]][points[idx][1]]:
            idx += 1
        if idx == len(points):
            result = leaf()
            if result is not None:
                yield result
            return
        i, m = points[idx]
        for jdx in range(idx + 1, len(points)):
            j, l = points[jdx]
            if covered[j][l]:
                continue
            same_q = q_signs[i - 1] == q_signs[j - 1]
            same_p = p_signs[m - 1] == p_signs[l - 1]
            if same_q == same_p:
                continue
            if comp_of is not None and comp_of[m] != comp_of[l]:
                continue
            qx = q_map.position(i - 1, m)
            qy = q_map.position(j - 1, l)
            q_token = q_map.place(qx, qy, guard_monogon=True)
            if q_token is None:
                continue
            px = p_map.position(m - 1, i)
            py = p_map.position(l - 1, j)
            p_token = p_map.place(px, py, guard_monogon=True)
            if p_token is None:
                q_map.undo(q_token)
                continue
            covered[i][m] = True
            covered[j][l] = True
            arcs.append(((i, m), (j, l)))
            yield from walk(idx + 1)
            arcs.pop()
            covered[j][l] = False
            covered[i][m] = False
            p_map.undo(p_token)
            q_map.undo(q_token)

    yield from walk(0)


# ---------------------------------------------------------------------------
# braid populations


def positive_contents(n: int, e: int, min_each: int = 2) -> list[tuple[int, ...]]:
    """Letter-count vectors over the ``n - 1`` generators summing to ``e``."""
    if n < 2:
        raise EnumerationError(f"strand count n = {n} must be at least 2")
    bins = n - 1
    out = []

    def build(prefix, remaining, left_bins):
        if left_bins == 1:
            if remaining >= min_each:
                out.append(prefix + (remaining,))
            return
        for c in range(min_each, remaining - min_each * (left_bins - 1) + 1):
            build(prefix + (c,), remaining - c, left_bins - 1)

    if e >= min_each * bins:
        build((), e, bins)
    return out


def _content_words(content: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All words with the given letter counts and first letter 1."""
    n = len(content) + 1
    counts = list(content)
    counts[0] -= 1
    word = [1]

    def build() -> Iterator[tuple[int, ...]]:
        if len(word) == sum(content):
            yield tuple(word)
            return
        for letter in range(1, n):
            if counts[letter - 1] > 0:
                counts[letter - 1] -= 1
                word.append(letter)
                yield from build()
                word.pop()
                counts[letter - 1] += 1

    yield from build()


def _is_necklace(word: tuple[int, ...]) -> bool:
    e = len(word)
    doubled = word + word
    for j in range(1, e):
        if word[j] == word[0] and doubled[j : j + e] < word:
            return False
    return True


def _word_object(letters: Sequence[int], n: int) -> BraidWord:
    return BraidWord(n, tuple((x, 1) for x in letters))


def braid_dichotomy_cell(
    n: int,
    e: int,
    depth: Optional[int] = None,
    min_each: int = 2,
    sample_stride: int = 100_000,
    use_fast: Optional[bool] = None,
) -> dict:
    """Screen every knot necklace of one (strands, length) cell.

    Counts words up to rotation, keeps the knot closures, and classifies
    each as reducible within ``depth`` braid relations.  The compiled
    screen is advisory: words it cannot certify, and a stride of words
    it can, are re-run through the reference search, whose verdict is
    final.  Words still unresolved land in ``residue``.
    """
    depth = default_depth() if depth is None else depth
    if min_each < 1:
        raise EnumerationError("dichotomy cells need every generator present")
    if use_fast is None:
        use_fast = _fast.HAVE_NUMBA
    necklaces = 0
    knots = 0
    reducible = 0
    residue_words: list[BraidWord] = []
    samples_checked = 0

    contents = positive_contents(n, e, min_each)
    if use_fast:
        residue_buf = _fast.new_residue_buffer()
        sample_buf, verdict_buf = _fast.new_sample_buffers()
        for content in contents:
            counts = np.zeros(n, np.int64)
            for letter, c in enumerate(content, start=1):
                counts[letter] = c
            got = _fast.dichotomy_cell(
                n, e, counts, depth, sample_stride, residue_buf, sample_buf, verdict_buf
            )
            cell_necklaces, cell_knots, cell_reducible, n_residue, n_samples, overflow = got
            if overflow:
                raise EnumerationError(
                    f"cell ({n}, {e}) content {content}: residue buffer exhausted"
                )
            necklaces += int(cell_necklaces)
            knots += int(cell_knots)
            reducible += int(cell_reducible)
            for k in range(int(n_residue)):
                letters = _fast.unpack_letters(int(residue_buf[k]), e)
                residue_words.append(_word_object(letters, n))
            for k in range(int(n_samples)):
                if int(verdict_buf[k]) != _fast.REDUCIBLE:
                    continue  # non-reducible verdicts are all rechecked below
                letters = _fast.unpack_letters(int(sample_buf[k]), e)
                word = _word_object(letters, n)
                if _search_reduction(word, depth, None, False) is None:
                    raise EnumerationError(
                        f"compiled screen called {word.display()} reducible; "
                        "the reference search disagrees"
                    )
                samples_checked += 1
    else:
        for content in contents:
            for letters in _content_words(content):
                if not _is_necklace(letters):
                    continue
                necklaces += 1
                word = _word_object(letters, n)
                if word.closure_components() != 1:
                    continue
                knots += 1
                if _search_reduction(word, depth, None, False) is not None:
                    reducible += 1
                else:
                    residue_words.append(word)

    final_residue = []
    for word in residue_words:
        if _search_reduction(word, depth, None, False) is not None:
            reducible += 1
        else:
            final_residue.append(word.display())
    final_residue.sort()
    return {
        "n": n,
        "e": e,
        "depth": depth,
        "necklaces": necklaces,
        "knots": knots,
        "reducible": reducible,
        "residue": final_residue,
        "samples_checked": samples_checked,
        "engine": "compiled" if use_fast else "reference",
    }


DICHOTOMY_CELLS = ((6, 10), (6, 11), (6, 12), (7, 12), (7, 13), (7, 14))


def _closure_components_oracle(word: BraidWord) -> int:
    """Independent component count: union strands along each crossing."""
    parent = list(range(word.strands))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    position = list(range(word.strands))
    for index, _ in word.letters:
        a = index - 1
        position[a], position[a + 1] = position[a + 1], position[a]
    # strand starting at k returns to position k's occupant; union those orbits
    for start in range(word.strands):
        ra, rb = find(start), find(position[start])
        if ra != rb:
            parent[ra] = rb
    return len({find(k) for k in range(word.strands)})


# ---------------------------------------------------------------------------
# property sweeps


@dataclass
class SweepSpec:
    """Declarative sweep: a target population, cells, and properties."""

    target: str
    params: dict
    properties: tuple[str, ...]
    canonical: bool = True
    manifest_path: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "params": _jsonable(self.params),
            "properties": list(self.properties),
            "canonical": self.canonical,
        }


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (GeneralCase, ThreeSummandCase)):
        return value.as_dict()
    return value


def _case_of(cell: dict) -> Case:
    case = cell.get("case")
    if isinstance(case, (GeneralCase, ThreeSummandCase)):
        return case
    if isinstance(case, dict):
        return case_from_dict(case)
    raise EnumerationError("every cell needs a case description")


WEB_PROPERTIES = ("scharlemann-bigon", "lambda-dichotomy", "certified")
PAIRED_PROPERTIES = (
    "structural",
    "mirror-invariance",
    "web-divisibility",
    "web-gamma",
    "web-quota",
)
BRAID_PROPERTIES = ("dichotomy", "components-oracle", "moves-preserve-closure")


def _cx(prop: str, cell: dict, reproduction: dict, detail: str) -> dict:
    return {
        "property": prop,
        "cell": _jsonable(cell),
        "reproduction": reproduction,
        "detail": detail,
    }


def _web_property_violations(prop, cell, case, patch) -> list[dict]:
    repro = {"graph": graph_to_dict(patch)}
    cell_desc = {k: _jsonable(v) for k, v in cell.items()}
    out = []
    if prop == "scharlemann-bigon":
        from .surface import _scharlemann_faces

        pair = tuple(cell.get("pair", (1, 2)))
        hits = [f for f, got in _scharlemann_faces(patch) if got == pair]
        if not hits:
            out.append(
                _cx(prop, cell_desc, repro, f"no Scharlemann cycle on pair {pair}")
            )
    elif prop == "lambda-dichotomy":
        v = len(patch.vertices)
        with_ghost = {arc.ghost[1] for arc in patch.arcs if arc.ghost is not None}
        start = min((vid for vid, _ in patch.vertices), key=lambda s: int(s[1:]))
        for lam in case.regular_labels(patch.p):
            try:
                trace = trace_lambda_path(patch, lam, start)
            except FormatError as exc:
                out.append(_cx(prop, cell_desc, repro, f"label {lam}: {exc}"))
                continue
            if lam in with_ghost:
                continue
            if trace["kind"] != "great_cycle":
                out.append(
                    _cx(
                        prop,
                        cell_desc,
                        repro,
                        f"label {lam} has no ghost yet no great cycle",
                    )
                )
            elif trace["steps"] > v:
                out.append(
                    _cx(
                        prop,
                        cell_desc,
                        repro,
                        f"label {lam}: great cycle after {trace['steps']} steps > v = {v}",
                    )
                )
    elif prop == "certified":
        web = verify_great_web(patch)
        if not web.ok:
            checks = sorted({item["check"] for item in web.violations})
            out.append(_cx(prop, cell_desc, repro, f"verification fails: {checks}"))
    else:
        raise EnumerationError(f"unknown webs property {prop!r}")
    return out


def _expected_cycle_lengths(case: Case, p: int) -> tuple[int, ...]:
    return tuple(case.expected_length(pair) for pair in case.scharlemann_pairs(p))


def _paired_property_violations(prop, cell, case, result: PairedResult) -> list[dict]:
    data = result.config
    repro = {"graph": graph_to_dict(data)}
    cell_desc = {k: _jsonable(v) for k, v in cell.items()}
    out = []
    if prop == "structural":
        report = validate(data)
        if report:
            out.append(_cx(prop, cell_desc, repro, f"{len(report)} violations"))
    elif prop == "mirror-invariance":
        flipped = mirror(data)
        report = validate(flipped)
        if report:
            out.append(
                _cx(prop, cell_desc, repro, "mirror image fails validation")
            )
        elif len(certified_webs(flipped)) != len(result.webs):
            out.append(
                _cx(prop, cell_desc, repro, "mirror image certifies different webs")
            )
    elif prop == "web-divisibility":
        for web in result.webs:
            try:
                report = divisibility_report(data, web)
            except WebError as exc:
                out.append(_cx(prop, cell_desc, repro, f"{','.join(web.vertices)}: {exc}"))
                continue
            if not report["ok"]:
                checks = sorted(
                    {
                        item["check"]
                        for anchor in report["anchors"]
                        for item in anchor["violations"]
                    }
                )
                out.append(
                    _cx(
                        prop,
                        cell_desc,
                        repro,
                        f"web {','.join(web.vertices)} fails {checks}",
                    )
                )
    elif prop == "web-gamma":
        for web in result.webs:
            try:
                gamma = build_gamma(data, web)
            except WebError as exc:
                out.append(_cx(prop, cell_desc, repro, str(exc)))
                continue
            if not gamma.bipartite_ok or not gamma.odd_spacing_ok:
                out.append(
                    _cx(
                        prop,
                        cell_desc,
                        repro,
                        f"web {','.join(web.vertices)}: spacing or sign structure off",
                    )
                )
    elif prop == "web-quota":
        lengths = _expected_cycle_lengths(case, data.p)
        for web in result.webs:
            if web.v in lengths and find_full_quota(web) is None:
                out.append(
                    _cx(
                        prop,
                        cell_desc,
                        repro,
                        f"web {','.join(web.vertices)} has v = {web.v} = l "
                        "but no full quota",
                    )
                )
    else:
        raise EnumerationError(f"unknown paired property {prop!r}")
    return out


def _admissible_keys(v: int, p: int, case: Case, cache: dict) -> set:
    key = (v, p, json.dumps(case.as_dict(), sort_keys=True))
    if key not in cache:
        cache[key] = {
            patch_canonical_key(patch) for patch in enumerate_webs(v, p, case)
        }
    return cache[key]


def _run_webs_cell(cell: dict, properties, spec: SweepSpec) -> dict:
    case = _case_of(cell)
    v = int(cell["v"])
    p = int(cell["p"])
    ledger = cell.get("ledger", "strict")
    limit = cell.get("limit")
    count = 0
    counterexamples = []
    for patch in enumerate_webs(v, p, case, ledger=ledger):
        count += 1
        for prop in properties:
            counterexamples.extend(_web_property_violations(prop, cell, case, patch))
        if limit is not None and count >= limit:
            break
    entry = {"cell": _jsonable(cell), "count": count}
    return {"entry": entry, "counterexamples": counterexamples}


def _run_paired_cell(cell: dict, properties, spec: SweepSpec) -> dict:
    case = _case_of(cell)
    p = int(cell["p"])
    q = int(cell["q"])
    limit = cell.get("limit")
    count = 0
    certified = 0
    by_v: dict[int, int] = {}
    outside = 0
    counterexamples = []
    admissible_cache: dict = {}
    for result in enumerate_paired(p, q, case):
        count += 1
        for web in result.webs:
            certified += 1
            by_v[web.v] = by_v.get(web.v, 0) + 1
            admissible = _admissible_keys(web.v, p, case, admissible_cache)
            if patch_canonical_key(web.patch) not in admissible:
                outside += 1
        for prop in properties:
            counterexamples.extend(
                _paired_property_violations(prop, cell, case, result)
            )
        if limit is not None and count >= limit:
            break
    entry = {
        "cell": _jsonable(cell),
        "count": count,
        "webs": {
            "certified": certified,
            "by_v": {str(v): n for v, n in sorted(by_v.items())},
            "realized_outside_admissible": outside,
        },
    }
    return {"entry": entry, "counterexamples": counterexamples}


def _run_braid_cell(cell: dict, properties, spec: SweepSpec) -> dict:
    counterexamples = []
    entry: dict = {"cell": _jsonable(cell)}
    if "dichotomy" in properties:
        n = int(cell["n"])
        e = int(cell["e"])
        depth = cell.get("depth")
        report = braid_dichotomy_cell(
            n,
            e,
            depth=depth,
            min_each=int(cell.get("min_each", 2)),
            use_fast=cell.get("use_fast"),
        )
        entry.update(
            {
                "count": report["necklaces"],
                "knots": report["knots"],
                "reducible": report["reducible"],
                "depth": report["depth"],
            }
        )
        for text in report["residue"]:
            counterexamples.append(
                _cx(
                    "dichotomy",
                    entry["cell"],
                    {"word": text, "strands": n},
                    f"not reducible within depth {report['depth']}",
                )
            )
    if "components-oracle" in properties:
        n = int(cell["n"])
        max_e = int(cell.get("max_e", cell.get("e", 0)))
        from .braid import all_positive_words

        total = 0
        for length in range(max_e + 1):
            for word in all_positive_words(n, length):
                total += 1
                if word.closure_components() != _closure_components_oracle(word):
                    counterexamples.append(
                        _cx(
                            "components-oracle",
                            entry["cell"],
                            {"word": word.display(), "strands": n},
                            "component count disagrees with the union oracle",
                        )
                    )
        entry["count"] = total
    if "moves-preserve-closure" in properties:
        import random

        from .braid import Commute, BraidRelation, Cycle, Stabilize, apply_move, random_word

        rng = random.Random(int(cell.get("seed", 0)))
        rounds = int(cell.get("rounds", 1000))
        entry["count"] = rounds
        for _ in range(rounds):
            word = random_word(rng)
            before = word.closure_components()
            for _ in range(int(cell.get("moves_per_word", 4))):
                moves = [Cycle(), Stabilize()]
                if len(word) >= 2:
                    moves.append(Commute(rng.randrange(len(word) - 1)))
                if len(word) >= 3:
                    moves.append(BraidRelation(rng.randrange(len(word) - 2)))
                move = rng.choice(moves)
                try:
                    word = apply_move(word, move)
                except Exception:
                    continue
            if word.closure_components() != before:
                counterexamples.append(
                    _cx(
                        "moves-preserve-closure",
                        entry["cell"],
                        {"word": word.display(), "strands": word.strands},
                        f"components drifted from {before}",
                    )
                )
    if "count" not in entry:
        raise EnumerationError(
            f"braid cell {cell} matches none of the requested properties"
        )
    return {"entry": entry, "counterexamples": counterexamples}


_RUNNERS = {
    "webs": (_run_webs_cell, WEB_PROPERTIES),
    "paired": (_run_paired_cell, PAIRED_PROPERTIES),
    "braids": (_run_braid_cell, BRAID_PROPERTIES),
}


def run_property_sweep(spec: SweepSpec, workers: int = 1) -> dict:
    """Execute a sweep and return (and possibly write) its manifest.

    Cells run independently, sharded across a thread pool when asked;
    results merge in submission order and counterexamples are re-sorted,
    so worker count never changes the manifest body.
    """
    if not spec.properties:
        raise EnumerationError("a sweep needs at least one property to check")
    if spec.target not in _RUNNERS:
        raise EnumerationError(f"unknown sweep target {spec.target!r}")
    runner, known = _RUNNERS[spec.target]
    for prop in spec.properties:
        if prop not in known:
            raise EnumerationError(
                f"target {spec.target!r} has no property {prop!r}; "
                f"pick from {', '.join(known)}"
            )
    cells = spec.params.get("cells")
    if not cells:
        raise EnumerationError("sweep params need a nonempty 'cells' list")
    start = time.monotonic()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(runner, cell, spec.properties, spec) for cell in cells
            ]
            results = [f.result() for f in futures]
    else:
        results = [runner(cell, spec.properties, spec) for cell in cells]
    total = sum(r["entry"].get("count", 0) for r in results)
    counterexamples = [cx for r in results for cx in r["counterexamples"]]
    counterexamples.sort(key=lambda cx: json.dumps(cx, sort_keys=True))
    manifest = {
        "spec": spec.as_dict(),
        "count": {"total": total, "cells": [r["entry"] for r in results]},
        "counterexamples": counterexamples,
        "elapsed_ms": int((time.monotonic() - start) * 1000),
    }
    if spec.manifest_path:
        with open(spec.manifest_path, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, sort_keys=True, indent=2)
            handle.write("\n")
    return manifest


def manifest_canonical_bytes(manifest: dict) -> bytes:
    """Byte form of everything reproducible in a manifest.

    Wall-clock time is the one field two identical runs may not share,
    so it is stripped before serialization.
    """
    body = {k: v for k, v in manifest.items() if k != "elapsed_ms"}
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
