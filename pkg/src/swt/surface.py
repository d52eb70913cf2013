"""Paired intersection graphs on two surface sides.

The data model is a grid of arcs: side Q has ``q`` fat vertices carrying
``p`` numbered end slots each, side P has ``p`` fat vertices carrying
``q`` slots, and every arc occupies one slot on each of two vertices of
the same side's graph while its endpoints name a grid point (Q vertex,
P vertex).  The label of an end is the index of the opposite-side vertex
it sits on, which forces the rotation system: ends are arranged around a
vertex by ascending label at positive vertices and descending at
negative ones.  Everything else here (faces, Euler counts, Scharlemann
cycles, label paths) is derived from those rotations.

Web patches are fragments of the Q side whose arcs may instead end in a
declared ghost stub: an attachment slot whose far end lies outside the
fragment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

GENERAL = "general"
THREE_SUMMANDS = "three_summands"


class FormatError(ValueError):
    """Structurally malformed graph data (bad ids, shapes, or references)."""


@dataclass(frozen=True)
class GeneralCase:
    l: int

    def as_dict(self) -> dict:
        return {"type": GENERAL, "l": self.l}

    def scharlemann_pairs(self, p: int) -> tuple[tuple[int, int], ...]:
        return ((1, 2),)

    def expected_length(self, pair: tuple[int, int]) -> int:
        return self.l

    def regular_labels(self, p: int) -> tuple[int, ...]:
        return tuple(range(3, p + 1))

    def ghost_count(self, p: int) -> int:
        return p - 2


@dataclass(frozen=True)
class ThreeSummandCase:
    l1: int
    l2: int
    x: int
    p1: int
    p2: int

    def as_dict(self) -> dict:
        return {
            "type": THREE_SUMMANDS,
            "l1": self.l1,
            "l2": self.l2,
            "x": self.x,
            "p1": self.p1,
            "p2": self.p2,
        }

    def scharlemann_pairs(self, p: int) -> tuple[tuple[int, int], ...]:
        return ((1, 2), (self.x, self.x + 1))

    def expected_length(self, pair: tuple[int, int]) -> int:
        return self.l1 if pair == (1, 2) else self.l2

    def regular_labels(self, p: int) -> tuple[int, ...]:
        special = {1, 2, self.x, self.x + 1}
        return tuple(lam for lam in range(1, p + 1) if lam not in special)

    def ghost_count(self, p: int) -> int:
        return p - 4


Case = Union[GeneralCase, ThreeSummandCase]


def case_from_dict(doc: dict) -> Case:
    kind = doc.get("type")
    if kind == GENERAL:
        if "l" not in doc:
            raise FormatError("case: general needs field l")
        return GeneralCase(int(doc["l"]))
    if kind == THREE_SUMMANDS:
        missing = [k for k in ("l1", "l2", "x", "p1", "p2") if k not in doc]
        if missing:
            raise FormatError(f"case: three_summands needs field {missing[0]}")
        return ThreeSummandCase(
            int(doc["l1"]), int(doc["l2"]), int(doc["x"]), int(doc["p1"]), int(doc["p2"])
        )
    raise FormatError(f"case: unknown type {kind!r}")


@dataclass(frozen=True)
class Arc:
    """One arc: two grid-point ends, or a ghost stub at a single slot.

    Ends are ``(q_id, p_id)`` string pairs.  A ghost arc records only its
    attachment ``(vertex_id, label)``; the far end is outside the fragment.
    """

    ends: tuple[tuple[str, str], ...]
    ghost: Optional[tuple[str, int]] = None

    def __post_init__(self) -> None:
        if self.ghost is None and len(self.ends) != 2:
            raise FormatError(f"arc with {len(self.ends)} ends is dangling")
        if self.ghost is not None and len(self.ends) != 0:
            raise FormatError("ghost stub carries its own attachment; drop the ends")


def _parse_id(raw: str, prefix: str, count: int, where: str) -> int:
    """Return the 1-based index behind an id like ``v3`` or ``u12``."""
    if not isinstance(raw, str) or not raw.startswith(prefix):
        raise FormatError(f"{where}: expected {prefix}<k> id, got {raw!r}")
    try:
        k = int(raw[len(prefix) :])
    except ValueError as exc:
        raise FormatError(f"{where}: expected {prefix}<k> id, got {raw!r}") from exc
    if not 1 <= k <= count:
        raise FormatError(f"{where}: {raw} out of range 1..{count}")
    return k


@dataclass(frozen=True)
class PairedIntersection:
    """Full two-sided arc configuration on the p x q grid."""

    p: int
    q: int
    case: Case
    q_vertices: tuple[tuple[str, int], ...]
    p_vertices: tuple[tuple[str, int, Optional[str]], ...]
    arcs: tuple[Arc, ...]

    def q_sign(self, vid: str) -> int:
        return self._q_signs[vid]

    def p_sign(self, uid: str) -> int:
        return self._p_signs[uid]

    def p_component(self, uid: str) -> Optional[str]:
        return self._p_components[uid]

    def __post_init__(self) -> None:
        if self.p < 2 or self.q < 2:
            raise FormatError("p and q must both be at least 2")
        q_signs = {}
        for vid, sign in self.q_vertices:
            _parse_id(vid, "v", self.q, "q_vertices")
            if vid in q_signs:
                raise FormatError(f"q_vertices: duplicate id {vid}")
            if sign not in (-1, 1):
                raise FormatError(f"q_vertices: sign of {vid} must be +1 or -1")
            q_signs[vid] = sign
        if len(q_signs) != self.q:
            raise FormatError(f"q_vertices: need {self.q} entries, got {len(q_signs)}")
        p_signs = {}
        p_components = {}
        for entry in self.p_vertices:
            uid, sign, component = entry
            _parse_id(uid, "u", self.p, "p_vertices")
            if uid in p_signs:
                raise FormatError(f"p_vertices: duplicate id {uid}")
            if sign not in (-1, 1):
                raise FormatError(f"p_vertices: sign of {uid} must be +1 or -1")
            if component not in (None, "P1", "P2"):
                raise FormatError(f"p_vertices: component of {uid} must be P1 or P2")
            p_signs[uid] = sign
            p_components[uid] = component
        if len(p_signs) != self.p:
            raise FormatError(f"p_vertices: need {self.p} entries, got {len(p_signs)}")
        for k, arc in enumerate(self.arcs):
            if arc.ghost is not None:
                raise FormatError(f"arc a{k + 1}: ghost stubs belong to patches only")
            for q_id, p_id in arc.ends:
                _parse_id(q_id, "v", self.q, f"arc a{k + 1}")
                _parse_id(p_id, "u", self.p, f"arc a{k + 1}")
        object.__setattr__(self, "_q_signs", q_signs)
        object.__setattr__(self, "_p_signs", p_signs)
        object.__setattr__(self, "_p_components", p_components)


@dataclass(frozen=True)
class WebPatch:
    """Q-side fragment: vertices with signs, arcs, and declared ghost stubs."""

    p: int
    case: Case
    vertices: tuple[tuple[str, int], ...]
    arcs: tuple[Arc, ...]

    def q_sign(self, vid: str) -> int:
        return self._signs[vid]

    def __post_init__(self) -> None:
        if self.p < 2:
            raise FormatError("p must be at least 2")
        signs = {}
        for vid, sign in self.vertices:
            if not isinstance(vid, str) or not vid.startswith("v"):
                raise FormatError(f"vertices: expected v<k> id, got {vid!r}")
            if vid in signs:
                raise FormatError(f"vertices: duplicate id {vid}")
            if sign not in (-1, 1):
                raise FormatError(f"vertices: sign of {vid} must be +1 or -1")
            signs[vid] = sign
        for k, arc in enumerate(self.arcs):
            for q_id, p_id in arc.ends:
                if q_id not in signs:
                    raise FormatError(f"arc a{k + 1}: unknown vertex {q_id}")
                _parse_id(p_id, "u", self.p, f"arc a{k + 1}")
            if arc.ghost is not None:
                vid, label = arc.ghost
                if vid not in signs:
                    raise FormatError(f"arc a{k + 1}: ghost at unknown vertex {vid}")
                if not 1 <= label <= self.p:
                    raise FormatError(f"arc a{k + 1}: ghost label {label} out of 1..{self.p}")
        object.__setattr__(self, "_signs", signs)


GraphLike = Union[PairedIntersection, WebPatch]


def arc_name(index: int) -> str:
    return f"a{index + 1}"


def end_label(obj: GraphLike, side: str, end: tuple[str, str]) -> int:
    """Label of an arc end on the given side: the opposite vertex's index."""
    q_id, p_id = end
    if side == "Q":
        return int(p_id[1:])
    return int(q_id[1:])


def _side_vertices(obj: GraphLike, side: str) -> list[str]:
    if side == "Q":
        if isinstance(obj, WebPatch):
            return [vid for vid, _ in obj.vertices]
        return [vid for vid, _ in obj.q_vertices]
    if isinstance(obj, WebPatch):
        raise FormatError("patches have no P side")
    return [uid for uid, _, _ in obj.p_vertices]


def _side_sign(obj: GraphLike, side: str, vid: str) -> int:
    return obj.q_sign(vid) if side == "Q" else obj.p_sign(vid)


def _end_vertex(side: str, end: tuple[str, str]) -> str:
    return end[0] if side == "Q" else end[1]


@dataclass(frozen=True)
class EmbeddedSide:
    """Forced rotation system of one side.

    ``rotations`` maps each vertex to its cyclic dart order; a dart is an
    ``(arc_index, end_index)`` pair.  Ghost slots are not darts, but
    ``slots`` remembers every occupied slot per vertex for sector queries.
    """

    side: str
    rotations: dict[str, tuple[tuple[int, int], ...]]
    slots: dict[str, tuple[tuple[int, str, int], ...]]
    # slots entries are (label, kind, ref): kind "arc" with dart ref packed
    # as arc_index * 2 + end_index, or kind "ghost" with the arc index.


def embedded_side(obj: GraphLike, side: str = "Q") -> EmbeddedSide:
    """Derive the forced rotations; duplicate slot use is a format error."""
    vertices = _side_vertices(obj, side)
    per_vertex: dict[str, dict[int, tuple[str, int]]] = {vid: {} for vid in vertices}
    for k, arc in enumerate(obj.arcs):
        for e, end in enumerate(arc.ends):
            vid = _end_vertex(side, end)
            label = end_label(obj, side, end)
            taken = per_vertex[vid]
            if label in taken:
                raise FormatError(
                    f"vertex {vid}: slot {label} used by {arc_name(k)} and "
                    f"{arc_name(taken[label][1] // 2)}"
                )
            taken[label] = ("arc", k * 2 + e)
        if arc.ghost is not None and side == "Q":
            vid, label = arc.ghost
            taken = per_vertex[vid]
            if label in taken:
                raise FormatError(f"vertex {vid}: ghost slot {label} already used")
            taken[label] = ("ghost", k)
    rotations = {}
    slots = {}
    for vid in vertices:
        order = sorted(per_vertex[vid])
        if _side_sign(obj, side, vid) < 0:
            order.reverse()
        slots[vid] = tuple((label,) + per_vertex[vid][label] for label in order)
        rotations[vid] = tuple(
            divmod(per_vertex[vid][label][1], 2)
            for label in order
            if per_vertex[vid][label][0] == "arc"
        )
    return EmbeddedSide(side=side, rotations=rotations, slots=slots)


@dataclass(frozen=True)
class Face:
    """One traced complementary region.

    ``corners[k]`` is ``(vertex, (label_in, label_out))`` and ``edges[k]``
    the arc index traversed right after it; an isolated vertex yields the
    degenerate face ``corners=((vertex, None),), edges=()``.
    """

    side: str
    corners: tuple[tuple[str, Optional[tuple[int, int]]], ...]
    edges: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    def vertices(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.corners)

    def as_dict(self) -> dict:
        return {
            "side": self.side,
            "length": self.length,
            "corners": [
                {"vertex": v, "labels": list(pair) if pair else None}
                for v, pair in self.corners
            ],
            "edges": [arc_name(k) for k in self.edges],
        }


def _canonical_face(
    side: str,
    corners: list[tuple[str, Optional[tuple[int, int]]]],
    edges: list[int],
) -> Face:
    if not edges:
        return Face(side, tuple(corners), ())
    best = None
    for r in range(len(edges)):
        candidate = (tuple(edges[r:] + edges[:r]), tuple(corners[r:] + corners[:r]))
        if best is None or candidate < best:
            best = candidate
    return Face(side, best[1], best[0])


def face_orbits(
    obj: GraphLike, side: str = "Q"
) -> tuple[list[Face], dict[tuple[int, int], int]]:
    """Faces plus a map from each dart to the face whose boundary step
    consumes it (the corner between the dart and its rotation successor).

    Orbits of next-dart-around-the-face over the forced rotations.  Ghost
    stubs are deleted first: a fragment's faces are those of its own map.
    Isolated vertices each contribute one degenerate face.  Face order is
    by smallest contained arc index, with isolated-vertex faces last.
    """
    emb = embedded_side(obj, side)
    position: dict[tuple[int, int], tuple[str, int]] = {}
    for vid, rotation in emb.rotations.items():
        for slot, dart in enumerate(rotation):
            position[dart] = (vid, slot)
    faces = []
    orbit_of: dict[tuple[int, int], int] = {}
    seen = set()
    for start in sorted(position):
        if start in seen:
            continue
        corners: list[tuple[str, Optional[tuple[int, int]]]] = []
        edges: list[int] = []
        dart = start
        while dart not in seen:
            seen.add(dart)
            orbit_of[dart] = len(faces)
            vid, slot = position[dart]
            rotation = emb.rotations[vid]
            succ = rotation[(slot + 1) % len(rotation)]
            label_in = end_label(obj, side, obj.arcs[dart[0]].ends[dart[1]])
            label_out = end_label(obj, side, obj.arcs[succ[0]].ends[succ[1]])
            corners.append((vid, (label_in, label_out)))
            edges.append(succ[0])
            # cross the arc: the companion dart is the other end
            dart = (succ[0], 1 - succ[1])
        faces.append(_canonical_face(side, corners, edges))
    for vid in sorted(emb.rotations):
        if not emb.rotations[vid]:
            faces.append(Face(side, ((vid, None),), ()))
    order = sorted(
        range(len(faces)),
        key=lambda k: ((0, min(faces[k].edges)) if faces[k].edges else (1, 0), faces[k].corners),
    )
    rank = {old: new for new, old in enumerate(order)}
    dart_face = {dart: rank[k] for dart, k in orbit_of.items()}
    return [faces[k] for k in order], dart_face


def trace_faces(obj: GraphLike, side: str = "Q") -> list[Face]:
    """Faces alone; see face_orbits for the dart-to-face view."""
    return face_orbits(obj, side)[0]


def side_components(obj: GraphLike, side: str = "Q") -> list[set[str]]:
    """Connected components of one side's graph (ghost stubs do not join)."""
    vertices = _side_vertices(obj, side)
    parent = {vid: vid for vid in vertices}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for arc in obj.arcs:
        if len(arc.ends) == 2:
            a = find(_end_vertex(side, arc.ends[0]))
            b = find(_end_vertex(side, arc.ends[1]))
            if a != b:
                parent[a] = b
    groups: dict[str, set[str]] = {}
    for vid in vertices:
        groups.setdefault(find(vid), set()).add(vid)
    return [groups[root] for root in sorted(groups)]


def euler_characteristics(obj: GraphLike, side: str = "Q") -> list[dict]:
    """V - E + F per connected component of one side's map."""
    faces = trace_faces(obj, side)
    components = side_components(obj, side)
    where = {vid: k for k, comp in enumerate(components) for vid in comp}
    edge_count = [0] * len(components)
    for arc in obj.arcs:
        if len(arc.ends) == 2:
            edge_count[where[_end_vertex(side, arc.ends[0])]] += 1
    face_count = [0] * len(components)
    for face in faces:
        face_count[where[face.corners[0][0]]] += 1
    out = []
    for k, comp in enumerate(components):
        out.append(
            {
                "side": side,
                "vertices": sorted(comp),
                "V": len(comp),
                "E": edge_count[k],
                "F": face_count[k],
                "euler": len(comp) - edge_count[k] + face_count[k],
            }
        )
    return out


def _violation(check: str, location: str, detail: str) -> dict:
    return {"check": check, "location": location, "detail": detail}


def _grid_violations(data: PairedIntersection) -> list[dict]:
    out = []
    seen: dict[tuple[str, str], int] = {}
    for k, arc in enumerate(data.arcs):
        for end in arc.ends:
            if end in seen:
                out.append(
                    _violation(
                        "grid",
                        f"{end[0]}:{end[1]}",
                        f"grid point covered by both {arc_name(seen[end])} and {arc_name(k)}",
                    )
                )
            else:
                seen[end] = k
    for vid, _ in data.q_vertices:
        for uid, _, _ in data.p_vertices:
            if (vid, uid) not in seen:
                out.append(
                    _violation("grid", f"{vid}:{uid}", "grid point not covered by any arc")
                )
    expected = data.p * data.q
    if 2 * len(data.arcs) != expected:
        out.append(
            _violation(
                "grid",
                "arcs",
                f"{len(data.arcs)} arcs cover {2 * len(data.arcs)} ends; grid has {expected}",
            )
        )
    return out


def _census_violations(data: PairedIntersection) -> list[dict]:
    out = []
    if data.q % 2 != 0:
        out.append(_violation("census", "q_vertices", f"q = {data.q} is odd"))
        return out
    positive = sum(1 for _, sign in data.q_vertices if sign > 0)
    if positive != data.q // 2:
        out.append(
            _violation(
                "census",
                "q_vertices",
                f"{positive} positive vertices; exactly {data.q // 2} required",
            )
        )
    return out


def _case_violations(data: PairedIntersection) -> list[dict]:
    out = []
    case = data.case
    if isinstance(case, GeneralCase):
        if case.l < 2:
            out.append(_violation("case", "l", f"l = {case.l} must be at least 2"))
        return out
    if case.l1 < 2 or case.l2 < 2:
        out.append(_violation("case", "l1,l2", "both cycle lengths must be at least 2"))
    from math import gcd

    if gcd(case.l1, case.l2) != 1:
        out.append(
            _violation("case", "l1,l2", f"gcd({case.l1},{case.l2}) must be 1")
        )
    if not 4 <= case.x <= data.p - 2:
        out.append(
            _violation(
                "case", "x", f"x = {case.x} outside 4..{data.p - 2}; labels x,x+1 must avoid 1,2"
            )
        )
    if case.p1 + case.p2 != data.p:
        out.append(
            _violation("case", "p1,p2", f"{case.p1} + {case.p2} != p = {data.p}")
        )
    tally = {"P1": 0, "P2": 0}
    for uid, _, component in data.p_vertices:
        if component not in tally:
            out.append(
                _violation("case", uid, "three-summand vertices need a P1/P2 component")
            )
        else:
            tally[component] += 1
    if tally["P1"] != case.p1 or tally["P2"] != case.p2:
        out.append(
            _violation(
                "case",
                "p_vertices",
                f"component census {tally} does not match p1={case.p1}, p2={case.p2}",
            )
        )
    expected = {1: "P1", 2: "P1", case.x: "P2", case.x + 1: "P2"}
    for label, component in expected.items():
        uid = f"u{label}"
        actual = data.p_component(uid) if 1 <= label <= data.p else None
        if actual != component:
            out.append(
                _violation(
                    "case",
                    uid,
                    f"Scharlemann vertex {uid} must lie on {component}, got {actual}",
                )
            )
    for k, arc in enumerate(data.arcs):
        ca = data.p_component(arc.ends[0][1])
        cb = data.p_component(arc.ends[1][1])
        if ca is not None and cb is not None and ca != cb:
            out.append(
                _violation(
                    "sphere",
                    arc_name(k),
                    f"arc joins {arc.ends[0][1]} on {ca} to {arc.ends[1][1]} on {cb}",
                )
            )
    return out


def _parity_violations(data: PairedIntersection) -> list[dict]:
    out = []
    for k, arc in enumerate(data.arcs):
        (q1, p1), (q2, p2) = arc.ends
        same_q = data.q_sign(q1) == data.q_sign(q2)
        same_p = data.p_sign(p1) == data.p_sign(p2)
        if same_q == same_p:
            out.append(
                _violation(
                    "parity",
                    arc_name(k),
                    f"ends {q1}:{p1} and {q2}:{p2} are "
                    f"{'same' if same_q else 'opposite'}-sign on both sides",
                )
            )
    return out


def _euler_violations(data: PairedIntersection) -> list[dict]:
    out = []
    for side in ("Q", "P"):
        for record in euler_characteristics(data, side):
            if record["euler"] != 2:
                out.append(
                    _violation(
                        "genus",
                        f"{side}:{','.join(record['vertices'])}",
                        f"V - E + F = {record['V']} - {record['E']} + {record['F']}"
                        f" = {record['euler']}, expected 2",
                    )
                )
    return out


def _monogon_violations(data: PairedIntersection) -> list[dict]:
    out = []
    for side in ("Q", "P"):
        for face in trace_faces(data, side):
            if face.length == 1:
                out.append(
                    _violation(
                        "monogon",
                        f"{side}:{arc_name(face.edges[0])}",
                        f"face at {face.corners[0][0]} is a monogon",
                    )
                )
    return out


def _scharlemann_case_violations(data: PairedIntersection) -> list[dict]:
    """Three-summand extras: cycles stay inside one summand's edge set and
    all cycles on one component share one label pair."""
    case = data.case
    if not isinstance(case, ThreeSummandCase):
        return []
    out = []
    cycles = _scharlemann_faces(data)
    pairs_on: dict[str, set[tuple[int, int]]] = {"P1": set(), "P2": set()}
    for face, pair in cycles:
        component = data.p_component(f"u{pair[0]}")
        if component is None:
            continue
        pairs_on[component].add(pair)
        for k in face.edges:
            arc = data.arcs[k]
            for _, p_id in arc.ends:
                got = data.p_component(p_id)
                if got != component:
                    out.append(
                        _violation(
                            "scharlemann",
                            arc_name(k),
                            f"cycle on pair {pair} ({component}) uses an edge touching "
                            f"{p_id} on {got}",
                        )
                    )
    for component, pairs in sorted(pairs_on.items()):
        if len(pairs) > 1:
            out.append(
                _violation(
                    "scharlemann",
                    component,
                    f"cycles on {component} carry distinct label pairs {sorted(pairs)}",
                )
            )
    return out


def validate(data: PairedIntersection) -> list[dict]:
    """Ordered validation; an empty list means the configuration is valid.

    Face-dependent checks (Euler, monogons, Scharlemann extras) are
    skipped when the grid itself is broken, since rotations are not
    determined then.
    """
    if isinstance(data, WebPatch):
        raise FormatError("validate takes a full paired configuration, not a patch")
    report = []
    grid = _grid_violations(data)
    report.extend(grid)
    report.extend(_census_violations(data))
    report.extend(_case_violations(data))
    report.extend(_parity_violations(data))
    if not grid:
        report.extend(_euler_violations(data))
        report.extend(_monogon_violations(data))
        report.extend(_scharlemann_case_violations(data))
    return report


def adjacent_pair(labels: tuple[int, int], p: int) -> Optional[tuple[int, int]]:
    """Normalize an unordered label pair to (lam, lam+1) mod p, or None.

    Representatives are 1..p, so (p, 1) is the wrapped legal pair.
    """
    a, b = labels
    if a == b:
        return None
    if b == (a % p) + 1:
        return (a, b)
    if a == (b % p) + 1:
        return (b, a)
    return None


def _scharlemann_faces(obj: GraphLike, side: str = "Q") -> list[tuple[Face, tuple[int, int]]]:
    found = []
    for face in trace_faces(obj, side):
        if face.length < 2:
            continue
        signs = {_side_sign(obj, side, v) for v in face.vertices()}
        if len(signs) != 1:
            continue
        modulus = obj.p if side == "Q" else obj.q
        pairs = set()
        for _, corner in face.corners:
            pairs.add(adjacent_pair(tuple(sorted(corner)), modulus))
        if len(pairs) == 1 and None not in pairs:
            found.append((face, pairs.pop()))
    return found


def _patch_violations(patch: WebPatch) -> list[dict]:
    out = []
    for k, arc in enumerate(patch.arcs):
        if len(arc.ends) == 2:
            (q1, _), (q2, _) = arc.ends
            labels = (end_label(patch, "Q", arc.ends[0]), end_label(patch, "Q", arc.ends[1]))
            if labels[0] == labels[1] and patch.q_sign(q1) == patch.q_sign(q2):
                out.append(
                    _violation(
                        "parity",
                        arc_name(k),
                        f"equal labels {labels[0]} on a same-sign arc force a loop "
                        "and sign clash on the far side",
                    )
                )
    if not out:
        for face in trace_faces(patch, "Q"):
            if face.length == 1:
                out.append(
                    _violation(
                        "monogon",
                        f"Q:{arc_name(face.edges[0])}",
                        f"face at {face.corners[0][0]} is a monogon",
                    )
                )
    return out


def find_scharlemann_cycles(obj: GraphLike, side: str = "Q") -> dict:
    """Same-sign faces whose corners all carry one adjacent label pair.

    Upstream violations (validation for full data, the parity corollary
    and monogons for patches) suppress the search and are reported
    instead.  In the three-summand case each cycle is tagged with its
    P component and its length is compared against the declared l_i.
    """
    violations = validate(obj) if isinstance(obj, PairedIntersection) else _patch_violations(obj)
    if violations:
        return {"violations": violations, "cycles": []}
    cycles = []
    for face, pair in _scharlemann_faces(obj, side):
        entry = {
            "pair": list(pair),
            "length": face.length,
            "edges": [arc_name(k) for k in face.edges],
            "vertices": list(face.vertices()),
            "sign": _side_sign(obj, side, face.corners[0][0]),
            "component": None,
            "expected_length": None,
            "length_ok": None,
        }
        if side == "Q":
            case = obj.case
            if isinstance(case, ThreeSummandCase):
                if pair in case.scharlemann_pairs(obj.p):
                    entry["component"] = "P1" if pair == (1, 2) else "P2"
                    entry["expected_length"] = case.expected_length(pair)
                    entry["length_ok"] = face.length == entry["expected_length"]
            else:
                entry["expected_length"] = case.l
                entry["length_ok"] = face.length == case.l
        cycles.append(entry)
    return {"violations": [], "cycles": cycles}


def trace_lambda_path(obj: GraphLike, lam: int, start: str) -> dict:
    """Follow the unique out-edge with tail label ``lam`` until a vertex
    repeats (a great cycle) or a declared ghost stub absorbs the path.

    All visited vertices must share one sign; a missing undeclared slot is
    an error.
    """
    emb = embedded_side(obj, "Q")
    if start not in emb.slots:
        raise FormatError(f"unknown start vertex {start}")
    if isinstance(obj, PairedIntersection) and not 1 <= lam <= obj.p:
        raise FormatError(f"label {lam} out of range 1..{obj.p}")
    sign = _side_sign(obj, "Q", start)
    at = start
    order: list[str] = []
    steps: list[int] = []
    first_index: dict[str, int] = {}
    while True:
        if _side_sign(obj, "Q", at) != sign:
            raise FormatError(f"vertex {at} breaks the same-sign precondition")
        if at in first_index:
            k = first_index[at]
            return {
                "kind": "great_cycle",
                "label": lam,
                "vertices": order[k:],
                "edges": [arc_name(e) for e in steps[k:]],
                "steps": len(steps),
            }
        first_index[at] = len(order)
        order.append(at)
        slot = next((s for s in emb.slots[at] if s[0] == lam), None)
        if slot is None:
            raise FormatError(f"vertex {at} has no end at label {lam} and no ghost there")
        if slot[1] == "ghost":
            return {
                "kind": "ghost_hit",
                "label": lam,
                "vertex": at,
                "steps": len(steps),
            }
        arc_index, end_index = divmod(slot[2], 2)
        other = obj.arcs[arc_index].ends[1 - end_index]
        steps.append(arc_index)
        at = _end_vertex("Q", other)


def mirror(obj: GraphLike) -> GraphLike:
    """Flip every vertex sign; reverses all rotations at once.

    Downstream verdicts are invariant under this global reflection.
    """
    if isinstance(obj, WebPatch):
        return WebPatch(
            p=obj.p,
            case=obj.case,
            vertices=tuple((vid, -sign) for vid, sign in obj.vertices),
            arcs=obj.arcs,
        )
    return PairedIntersection(
        p=obj.p,
        q=obj.q,
        case=obj.case,
        q_vertices=tuple((vid, -sign) for vid, sign in obj.q_vertices),
        p_vertices=tuple((uid, -sign, c) for uid, sign, c in obj.p_vertices),
        arcs=obj.arcs,
    )


def export_dot(obj: GraphLike, side: str = "Q") -> str:
    """Deterministic DOT text: one line per vertex, arc, and ghost stub.

    Edges of Scharlemann cycles are highlighted.
    """
    lines = [f'graph "{side}-side" {{']
    vertices = _side_vertices(obj, side)
    for vid in vertices:
        sign = "+" if _side_sign(obj, side, vid) > 0 else "-"
        extra = ""
        if isinstance(obj, PairedIntersection) and side == "P":
            component = obj.p_component(vid)
            if component:
                extra = f" {component}"
        lines.append(f'  {vid} [label="{vid} ({sign}){extra}"];')
    report = find_scharlemann_cycles(obj, side=side)
    highlighted = set()
    for cycle in report["cycles"]:
        highlighted.update(cycle["edges"])
    for k, arc in enumerate(obj.arcs):
        if len(arc.ends) != 2:
            continue
        va = _end_vertex(side, arc.ends[0])
        vb = _end_vertex(side, arc.ends[1])
        la = end_label(obj, side, arc.ends[0])
        lb = end_label(obj, side, arc.ends[1])
        name = arc_name(k)
        color = ", color=red" if name in highlighted else ""
        lines.append(f'  {va} -- {vb} [label="{name} {la}:{lb}"{color}];')
    for k, arc in enumerate(obj.arcs):
        if arc.ghost is None:
            continue
        vid, label = arc.ghost
        stub = f"ghost_{vid}_{label}"
        lines.append(
            f'  {vid} -- {stub} [style=dashed, label="{arc_name(k)} {label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dict(obj: GraphLike) -> dict:
    """Canonical JSON document for either graph kind."""
    arcs = []
    for arc in obj.arcs:
        record: dict = {"ends": [{"q": q, "p": p} for q, p in arc.ends]}
        if arc.ghost is not None:
            record["ghost"] = {"vertex": arc.ghost[0], "label": arc.ghost[1]}
        arcs.append(record)
    if isinstance(obj, WebPatch):
        return {
            "p": obj.p,
            "case": obj.case.as_dict(),
            "q_vertices": [{"id": vid, "sign": sign} for vid, sign in obj.vertices],
            "arcs": arcs,
        }
    p_vertices = []
    for uid, sign, component in obj.p_vertices:
        entry = {"id": uid, "sign": sign}
        if component is not None:
            entry["component"] = component
        p_vertices.append(entry)
    return {
        "p": obj.p,
        "q": obj.q,
        "case": obj.case.as_dict(),
        "q_vertices": [{"id": vid, "sign": sign} for vid, sign in obj.q_vertices],
        "p_vertices": p_vertices,
        "arcs": arcs,
    }


def _arc_from_record(record, index: int) -> Arc:
    where = arc_name(index)
    if isinstance(record, list):
        record = {"ends": record}
    if not isinstance(record, dict):
        raise FormatError(f"{where}: arc must be an object or endpoint list")
    ends = []
    for end in record.get("ends", []):
        if not isinstance(end, dict) or "q" not in end or "p" not in end:
            raise FormatError(f'{where}: endpoint needs "q" and "p" fields')
        ends.append((end["q"], end["p"]))
    ghost = None
    if "ghost" in record:
        g = record["ghost"]
        if not isinstance(g, dict) or "vertex" not in g or "label" not in g:
            raise FormatError(f'{where}: ghost needs "vertex" and "label" fields')
        ghost = (g["vertex"], int(g["label"]))
        if len(ends) == 1:
            # Tolerated spelling: the attachment slot repeated as an endpoint.
            q_id, p_id = ends[0]
            if q_id != ghost[0] or int(p_id[1:] or 0) != ghost[1]:
                raise FormatError(
                    f"{where}: endpoint {q_id}:{p_id} disagrees with ghost "
                    f"{ghost[0]} label {ghost[1]}"
                )
            ends = []
        elif ends:
            raise FormatError(f"{where}: ghost stubs take at most one endpoint")
    if ghost is None and len(ends) != 2:
        raise FormatError(f"{where}: {len(ends)} endpoints without a ghost declaration")
    return Arc(ends=tuple(ends), ghost=ghost)


def graph_from_dict(doc: dict) -> GraphLike:
    if not isinstance(doc, dict):
        raise FormatError("graph document must be a JSON object")
    for field_name in ("p", "case", "q_vertices", "arcs"):
        if field_name not in doc:
            raise FormatError(f"graph document is missing field {field_name!r}")
    case = case_from_dict(doc["case"])
    arcs = tuple(_arc_from_record(r, k) for k, r in enumerate(doc["arcs"]))

    def vertex_seq(entries, want_component: bool):
        out = []
        for entry in entries:
            if not isinstance(entry, dict) or "id" not in entry or "sign" not in entry:
                raise FormatError('vertex entries need "id" and "sign" fields')
            if want_component:
                out.append((entry["id"], int(entry["sign"]), entry.get("component")))
            else:
                out.append((entry["id"], int(entry["sign"])))
        return tuple(out)

    if "p_vertices" in doc:
        if "q" not in doc:
            raise FormatError("graph document is missing field 'q'")
        return PairedIntersection(
            p=int(doc["p"]),
            q=int(doc["q"]),
            case=case,
            q_vertices=vertex_seq(doc["q_vertices"], False),
            p_vertices=vertex_seq(doc["p_vertices"], True),
            arcs=arcs,
        )
    return WebPatch(
        p=int(doc["p"]),
        case=case,
        vertices=vertex_seq(doc["q_vertices"], False),
        arcs=arcs,
    )


def load_graph(path: str) -> GraphLike:
    """Read a graph JSON file; malformed documents raise FormatError."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return graph_from_dict(doc)
