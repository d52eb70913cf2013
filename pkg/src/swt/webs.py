"""Great-web certification and the region-counting pipeline.

A web is a same-sign connected vertex subset of the Q side whose dangling
ends (ghosts) are few: at most one per regular label.  Certified webs span
a disk, which makes the P-side picture rigid enough to count: the web's
edges form a graph on the P vertices whose valences, regions, and
divisibility constraints are all forced.  This module certifies webs,
builds that P-side graph, cuts out its regions, and runs the counting
identities, plus the parallel-edge quota classification and the slope
feasibility table those counts feed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional

from .surface import (
    Arc,
    Face,
    FormatError,
    GraphLike,
    PairedIntersection,
    ThreeSummandCase,
    WebPatch,
    _scharlemann_faces,
    adjacent_pair,
    arc_name,
    embedded_side,
    end_label,
    euler_characteristics,
    face_orbits,
)


class WebError(ValueError):
    """Analysis cannot proceed: inconsistent web, missing anchor cycle."""


def _violation(check: str, location: str, detail: str) -> dict:
    return {"check": check, "location": location, "detail": detail}


@dataclass
class GreatWeb:
    """Certification result; ``ok`` is true when no invariant failed.

    ``patch`` is the web's own sub-map (in-web arcs plus ghost stubs) and
    ``arc_map`` sends its arc indices back to arcs of ``source``.
    """

    source: GraphLike
    mode: str
    vertices: tuple[str, ...]
    sign: int
    edges: tuple[int, ...]
    ghosts: tuple[tuple[str, int], ...]
    expected_ghosts: int
    regular_labels: tuple[int, ...]
    patch: WebPatch
    arc_map: tuple[int, ...]
    certificate_face: Optional[int]
    faces: list[Face]
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def v(self) -> int:
        return len(self.vertices)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "mode": self.mode,
            "vertices": list(self.vertices),
            "sign": self.sign,
            "v": self.v,
            "edges": [arc_name(k) for k in self.edges],
            "ghosts": [{"vertex": v, "label": lam} for v, lam in self.ghosts],
            "ghost_count": len(self.ghosts),
            "expected_ghosts": self.expected_ghosts,
            "regular_labels": list(self.regular_labels),
            "certificate_face": (
                self.faces[self.certificate_face].as_dict()
                if self.certificate_face is not None
                else None
            ),
            "violations": self.violations,
        }


def _ghost_face(
    patch: WebPatch,
    dart_face: dict,
    faces: list[Face],
    vertex: str,
    label: int,
) -> int:
    """Face holding the ghost germ: the corner sector it sits in.

    The germ lies in the angular gap after the nearest real end walking
    backward in the rotation; a vertex with no real ends keeps its germs
    in its own degenerate face.
    """
    emb = embedded_side(patch, "Q")
    slots = emb.slots[vertex]
    order = [s[0] for s in slots]
    pos = order.index(label)
    for back in range(1, len(slots) + 1):
        entry = slots[(pos - back) % len(slots)]
        if entry[1] == "arc":
            return dart_face[divmod(entry[2], 2)]
    for k, face in enumerate(faces):
        if face.corners == ((vertex, None),) and not face.edges:
            return k
    raise WebError(f"no face found for ghost at {vertex}:{label}")


def _induced_patch(
    data: PairedIntersection, vertices: tuple[str, ...]
) -> tuple[WebPatch, tuple[int, ...], tuple[tuple[str, int], ...]]:
    """Sub-map of the vertex subset: in-web arcs kept, leaving arcs become
    ghost stubs.  Returns the patch, its arc index map, and the far ends
    of the leaving arcs as (outside vertex, inside attachment index)."""
    inside = set(vertices)
    arcs = []
    arc_map = []
    far_ends = []
    for k, arc in enumerate(data.arcs):
        ends_in = [e for e in arc.ends if e[0] in inside]
        if len(ends_in) == 2:
            arcs.append(arc)
            arc_map.append(k)
        elif len(ends_in) == 1:
            vid = ends_in[0][0]
            label = end_label(data, "Q", ends_in[0])
            arcs.append(Arc(ends=(), ghost=(vid, label)))
            arc_map.append(k)
            outside = [e for e in arc.ends if e[0] not in inside][0]
            far_ends.append((outside[0], len(arcs) - 1))
    patch = WebPatch(
        p=data.p,
        case=data.case,
        vertices=tuple((vid, data.q_sign(vid)) for vid in vertices),
        arcs=tuple(arcs),
    )
    return patch, tuple(arc_map), tuple(far_ends)


def verify_great_web(obj: GraphLike, vertices=None) -> GreatWeb:
    """Check every web invariant; violations are collected, not raised.

    Patch mode takes the fragment at face value.  Paired mode induces the
    sub-map from the full configuration and additionally requires every
    outside vertex to sit in the single certificate face.
    """
    if isinstance(obj, WebPatch):
        mode = "patch"
        if vertices is None:
            vertices = tuple(vid for vid, _ in obj.vertices)
        else:
            vertices = tuple(vertices)
            if set(vertices) != {vid for vid, _ in obj.vertices}:
                raise FormatError("patch mode verifies the whole fragment")
        patch = obj
        arc_map = tuple(range(len(obj.arcs)))
        far_ends = ()
    else:
        mode = "paired"
        if not vertices:
            raise FormatError("paired mode needs an explicit vertex subset")
        vertices = tuple(vertices)
        known = {vid for vid, _ in obj.q_vertices}
        for vid in vertices:
            if vid not in known:
                raise FormatError(f"unknown web vertex {vid}")
        patch, arc_map, far_ends = _induced_patch(obj, vertices)

    violations = []
    signs = {patch.q_sign(vid) for vid in vertices}
    if len(signs) > 1:
        violations.append(
            _violation("sign", ",".join(vertices), "web vertices carry both signs")
        )
    sign = patch.q_sign(vertices[0]) if vertices else 1

    in_web = [k for k, arc in enumerate(patch.arcs) if len(arc.ends) == 2]
    ghosts = tuple(
        arc.ghost for arc in patch.arcs if arc.ghost is not None
    )

    # connectivity via in-web arcs
    parent = {vid: vid for vid in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in in_web:
        a, b = (find(e[0]) for e in patch.arcs[k].ends)
        if a != b:
            parent[a] = b
    roots = {find(vid) for vid in vertices}
    if len(roots) > 1:
        violations.append(
            _violation("connected", ",".join(sorted(vertices)), f"{len(roots)} components")
        )

    case = patch.case
    regular = case.regular_labels(patch.p)
    expected = case.ghost_count(patch.p)
    if len(ghosts) != expected:
        violations.append(
            _violation(
                "ghost-count",
                "ghosts",
                f"{len(ghosts)} ghosts, expected {expected}",
            )
        )
    per_label: dict[int, int] = {}
    for _, lam in ghosts:
        per_label[lam] = per_label.get(lam, 0) + 1
    for lam in regular:
        if per_label.get(lam, 0) != 1:
            violations.append(
                _violation(
                    "ghost-ledger",
                    f"label {lam}",
                    f"{per_label.get(lam, 0)} ghosts on regular label {lam}, expected 1",
                )
            )
    for lam, count in sorted(per_label.items()):
        if lam not in regular:
            violations.append(
                _violation(
                    "ghost-ledger",
                    f"label {lam}",
                    f"{count} ghosts on non-regular label {lam}",
                )
            )

    for k in in_web:
        labels = [end_label(patch, "Q", e) for e in patch.arcs[k].ends]
        if labels[0] == labels[1]:
            violations.append(
                _violation(
                    "parity",
                    arc_name(k),
                    f"equal labels {labels[0]} at both ends of a same-sign edge",
                )
            )

    for record in euler_characteristics(patch, "Q"):
        if record["euler"] != 2:
            violations.append(
                _violation(
                    "disk",
                    ",".join(record["vertices"]),
                    f"sub-map component has V - E + F = {record['euler']}, "
                    "but a disk complement needs 2",
                )
            )

    faces, dart_face = face_orbits(patch, "Q")
    certificate = None
    ghost_faces = set()
    for arc in patch.arcs:
        if arc.ghost is not None:
            ghost_faces.add(_ghost_face(patch, dart_face, faces, *arc.ghost))
    if len(ghost_faces) > 1:
        violations.append(
            _violation(
                "certificate",
                "ghosts",
                f"ghost germs spread over {len(ghost_faces)} faces; disk needs one",
            )
        )
    elif ghost_faces:
        certificate = ghost_faces.pop()
    elif len(faces) == 1:
        certificate = 0

    if mode == "paired" and certificate is not None:
        # every outside vertex must live in the certificate face; outside
        # components are anchored by the leaving arcs they attach to
        outside_face: dict[str, set[int]] = {}
        for out_vertex, patch_arc in far_ends:
            ghost = patch.arcs[patch_arc].ghost
            face_idx = _ghost_face(patch, dart_face, faces, *ghost)
            outside_face.setdefault(out_vertex, set()).add(face_idx)
        seen_outside = set(outside_face)
        comp_parent: dict[str, str] = {}

        def cfind(x):
            while comp_parent[x] != x:
                comp_parent[x] = comp_parent[comp_parent[x]]
                x = comp_parent[x]
            return x

        outsiders = [vid for vid, _ in obj.q_vertices if vid not in set(vertices)]
        comp_parent.update({vid: vid for vid in outsiders})
        for arc in obj.arcs:
            a, b = arc.ends[0][0], arc.ends[1][0]
            if a in comp_parent and b in comp_parent:
                ra, rb = cfind(a), cfind(b)
                if ra != rb:
                    comp_parent[ra] = rb
        comp_faces: dict[str, set[int]] = {}
        for vid in outsiders:
            comp_faces.setdefault(cfind(vid), set()).update(
                outside_face.get(vid, set())
            )
        for root, face_set in sorted(comp_faces.items()):
            if not face_set:
                violations.append(
                    _violation(
                        "certificate",
                        root,
                        "outside component attaches to no ghost; position unknown",
                    )
                )
            elif face_set != {certificate}:
                violations.append(
                    _violation(
                        "certificate",
                        root,
                        "outside component sits outside the certificate face",
                    )
                )
    elif mode == "paired" and certificate is None and expected > 0 and not ghosts:
        violations.append(
            _violation("certificate", "ghosts", "no ghosts to anchor a certificate face")
        )

    return GreatWeb(
        source=obj,
        mode=mode,
        vertices=vertices,
        sign=sign,
        edges=tuple(arc_map[k] for k in in_web),
        ghosts=ghosts,
        expected_ghosts=expected,
        regular_labels=regular,
        patch=patch,
        arc_map=arc_map,
        certificate_face=certificate,
        faces=faces,
        violations=violations,
    )


@dataclass
class GammaGraph:
    """The web's edges replanted on the P side, with valence bookkeeping."""

    data: PairedIntersection
    web: GreatWeb
    edges: tuple[int, ...]
    valences: dict[str, int]
    expected_valences: dict[str, int]
    bipartite_ok: bool
    odd_spacing: dict[str, list[int]]
    odd_spacing_ok: bool

    def as_dict(self) -> dict:
        return {
            "edges": [arc_name(k) for k in self.edges],
            "valences": dict(sorted(self.valences.items())),
            "expected_valences": dict(sorted(self.expected_valences.items())),
            "bipartite": self.bipartite_ok,
            "odd_spacing_gaps": {k: v for k, v in sorted(self.odd_spacing.items())},
            "odd_spacing": self.odd_spacing_ok,
        }


def scharlemann_labels(case, p: int) -> tuple[int, ...]:
    out = []
    for pair in case.scharlemann_pairs(p):
        out.extend(pair)
    return tuple(out)


def build_gamma(data: PairedIntersection, web: GreatWeb) -> GammaGraph:
    """Locate the web's edges on the P side and enforce the valences.

    Regular P vertices must reach valence v-1 and Scharlemann vertices v;
    a mismatch means the web contradicts its own ghost ledger, which is a
    hard error.  Bipartiteness (by P sign) and the odd-spacing property
    are evaluated and reported, never enforced.
    """
    if not isinstance(data, PairedIntersection):
        raise FormatError("gamma needs the full paired configuration")
    edges = web.edges
    valences = {uid: 0 for uid, _, _ in data.p_vertices}
    for k in edges:
        for _, p_id in data.arcs[k].ends:
            valences[p_id] += 1
    special = set(scharlemann_labels(data.case, data.p))
    expected = {}
    for uid in valences:
        lam = int(uid[1:])
        expected[uid] = web.v if lam in special else web.v - 1
    bad = {u for u in valences if valences[u] != expected[u]}
    if bad:
        u = sorted(bad)[0]
        raise WebError(
            f"gamma valence at {u}: {valences[u]}, expected {expected[u]} "
            f"(v = {web.v})"
        )
    bipartite_ok = all(
        data.p_sign(data.arcs[k].ends[0][1]) != data.p_sign(data.arcs[k].ends[1][1])
        for k in edges
    )
    emb = embedded_side(data, "P")
    edge_set = set(edges)
    odd_spacing: dict[str, list[int]] = {}
    odd_ok = True
    for uid, rotation in sorted(emb.rotations.items()):
        positions = [i for i, dart in enumerate(rotation) if dart[0] in edge_set]
        gaps = []
        for t, pos in enumerate(positions):
            nxt = positions[(t + 1) % len(positions)]
            gaps.append((nxt - pos - 1) % len(rotation))
        odd_spacing[uid] = gaps
        if any(g % 2 == 0 for g in gaps):
            odd_ok = False
    return GammaGraph(
        data=data,
        web=web,
        edges=edges,
        valences=valences,
        expected_valences=expected,
        bipartite_ok=bipartite_ok,
        odd_spacing=odd_spacing,
        odd_spacing_ok=odd_ok,
    )


@dataclass
class ScharlemannRegion:
    n1: int
    n2: int
    subregions: tuple[int, ...] = ()


@dataclass
class RegionData:
    """Counts from cutting the P sphere at one anchor pair.

    ``subregions`` lists (n1, n2) per cut component of the full between-
    anchor edge set; ``regions`` are the coarser cuts along the chosen
    Scharlemann cycle only; ``shift`` orders region indices so that index
    k maps to k+1 under the handle correspondence.
    """

    anchor: tuple[int, int]
    v: int
    l: int
    sigma: tuple[str, ...]
    subregions: tuple[tuple[int, int], ...]
    regions: tuple[ScharlemannRegion, ...]
    shift: Optional[tuple[int, ...]] = None
    shift_ok: bool = True

    def as_dict(self) -> dict:
        return {
            "anchor": list(self.anchor),
            "v": self.v,
            "l": self.l,
            "sigma": list(self.sigma),
            "subregions": [{"n1": a, "n2": b} for a, b in self.subregions],
            "regions": [
                {"n1": r.n1, "n2": r.n2, "subregions": list(r.subregions)}
                for r in self.regions
            ],
            "shift": list(self.shift) if self.shift is not None else None,
            "shift_ok": self.shift_ok,
        }


def _sector_regions(
    data: PairedIntersection,
    ua: str,
    ub: str,
    cut: set[int],
) -> tuple[list[dict], dict[str, list[tuple[float, int]]]]:
    """Cut the sphere along ua, ub and the given edges; regions are the
    faces of that sub-map.  For each of ua, ub returns the angular sector
    decomposition as (start position, region index) pairs."""
    emb = embedded_side(data, "P")
    rotations = {u: emb.rotations[u] for u in (ua, ub)}
    cut_positions = {
        u: [i for i, dart in enumerate(rotations[u]) if dart[0] in cut]
        for u in (ua, ub)
    }
    # orbit tracing over cut darts only: successor = next cut dart at the
    # vertex, then cross the arc
    index_of = {}
    for u in (ua, ub):
        for t, i in enumerate(cut_positions[u]):
            index_of[rotations[u][i]] = (u, t)
    regions = []
    region_of_dart = {}
    for start in sorted(index_of):
        if start in region_of_dart:
            continue
        rid = len(regions)
        members = []
        dart = start
        while dart not in region_of_dart:
            region_of_dart[dart] = rid
            u, t = index_of[dart]
            order = cut_positions[u]
            succ_pos = order[(t + 1) % len(order)]
            succ = rotations[u][succ_pos]
            members.append((u, t))
            dart = (succ[0], 1 - succ[1])
        regions.append({"id": rid, "members": members})
    sectors = {u: [] for u in (ua, ub)}
    for u in (ua, ub):
        order = cut_positions[u]
        n = len(rotations[u])
        for t, i in enumerate(order):
            dart = rotations[u][i]
            rid = region_of_dart[dart]
            start = i
            end = order[(t + 1) % len(order)]
            sectors[u].append((start, end, rid))
    return regions, sectors


def _position_region(sectors: list[tuple[int, int, int]], n: int, pos: float) -> int:
    """Region owning the angular position (positions are rotation indices;
    a sector runs from just after its start end up to its end end)."""
    for start, end, rid in sectors:
        span = (end - start) % n
        if span == 0:
            span = n  # single cut end: the sector wraps the whole circle
        rel = (pos - start) % n
        if 0 < rel < span:
            return rid
    # positions on a cut end itself belong to no sector; callers avoid this
    raise WebError(f"position {pos} lies on the cut")


def decompose_regions(gamma: GammaGraph, anchor: tuple[int, int] = (1, 2)) -> RegionData:
    """Cut the P sphere at the anchor pair and count interior web ends.

    Subregions come from cutting along every web edge between the anchor
    vertices; Scharlemann regions from the chosen cycle's edges alone.
    The handle correspondence (label λ end at u_a maps to the λ end at
    u_b) yields the cyclic shift ordering.
    """
    data = gamma.data
    web = gamma.web
    case = data.case
    legal = case.scharlemann_pairs(data.p)
    if tuple(anchor) not in legal:
        raise WebError(f"anchor {anchor} not in {legal}")
    a, b = anchor
    ua, ub = f"u{a}", f"u{b}"

    sigma = None
    for face, pair in _scharlemann_faces(web.patch, "Q"):
        if pair == tuple(anchor):
            sigma = face
            break
    if sigma is None:
        raise WebError(f"no Scharlemann cycle on anchor {anchor} inside the web")
    sigma_arcs = {web.arc_map[k] for k in sigma.edges}
    if len(sigma_arcs) != sigma.length:
        raise WebError("anchor cycle traverses an edge twice; cannot cut along it")

    web_edges = set(gamma.edges)
    between = {
        k
        for k in web_edges
        if {data.arcs[k].ends[0][1], data.arcs[k].ends[1][1]} == {ua, ub}
    }
    if not sigma_arcs <= between:
        raise WebError("anchor cycle edges do not all join the anchor vertices")

    emb = embedded_side(data, "P")
    rot = {u: emb.rotations[u] for u in (ua, ub)}
    n_rot = {u: len(rot[u]) for u in (ua, ub)}

    # interior ends at each anchor vertex: web-edge ends not on the cut
    def interior_positions(u: str, cut: set[int]) -> list[tuple[int, int]]:
        out = []
        for i, dart in enumerate(rot[u]):
            if dart[0] in web_edges and dart[0] not in cut:
                arc = data.arcs[dart[0]]
                end = arc.ends[dart[1]]
                out.append((i, end_label(data, "P", end)))
        return out

    def count_regions(cut: set[int]):
        regions, sectors = _sector_regions(data, ua, ub, cut)
        counts = [[0, 0] for _ in regions]
        where = {}
        for side_idx, u in enumerate((ua, ub)):
            for pos, lam in interior_positions(u, cut):
                rid = _position_region(sectors[u], n_rot[u], pos)
                counts[rid][side_idx] += 1
                where[(u, lam)] = rid
        return regions, sectors, counts, where

    _, sub_sectors, sub_counts, _ = count_regions(between)
    regions, sectors, counts, where = count_regions(sigma_arcs)

    # constituent subregions: every sector of a subregion sits inside one
    # Scharlemann region, so membership is keyed off the sector starts
    membership: dict[int, set[int]] = {rid: set() for rid in range(len(regions))}
    for start, _, rid in sub_sectors[ua]:
        host = _position_region(sectors[ua], n_rot[ua], (start + 0.5) % n_rot[ua])
        membership[host].add(rid)

    # handle correspondence: interior end labeled λ at ua pairs with the
    # λ end at ub; both are interior exactly when v_λ avoids the cycle
    shift_map: dict[int, int] = {}
    shift_ok = True
    for (u, lam), rid in sorted(where.items()):
        if u != ua:
            continue
        target = where.get((ub, lam))
        if target is None:
            shift_ok = False
            continue
        if rid in shift_map and shift_map[rid] != target:
            shift_ok = False
        shift_map[rid] = target

    shift = None
    if shift_ok and shift_map:
        if set(shift_map) == set(range(len(regions))) and set(
            shift_map.values()
        ) == set(range(len(regions))):
            order = [0]
            while len(order) < len(regions):
                nxt = shift_map[order[-1]]
                if nxt in order:
                    break
                order.append(nxt)
            if len(order) == len(regions):
                shift = tuple(order)
            else:
                shift_ok = False
        else:
            shift_ok = False
    elif shift_ok and not shift_map:
        shift = tuple(range(len(regions)))  # no interior ends: any order

    return RegionData(
        anchor=tuple(anchor),
        v=web.v,
        l=len(sigma_arcs),
        sigma=tuple(arc_name(k) for k in sorted(sigma_arcs)),
        subregions=tuple((c[0], c[1]) for c in sub_counts),
        regions=tuple(
            ScharlemannRegion(
                n1=counts[rid][0],
                n2=counts[rid][1],
                subregions=tuple(sorted(membership[rid])),
            )
            for rid in range(len(regions))
        ),
        shift=shift,
        shift_ok=shift_ok,
    )


def verify_divisibility(region: RegionData, v: Optional[int] = None, l: Optional[int] = None) -> dict:
    """Assert the counting identities and conclude that l divides v.

    Works on computed or synthetic RegionData; failed equalities name the
    offending region.
    """
    v = region.v if v is None else v
    l = region.l if l is None else l
    violations = []
    for j, (n1, n2) in enumerate(region.subregions):
        if n1 != n2:
            violations.append(
                _violation("subregion", f"D{j + 1}", f"n1 = {n1} differs from n2 = {n2}")
            )
    if len(region.regions) != l:
        violations.append(
            _violation(
                "region-count",
                "regions",
                f"{len(region.regions)} Scharlemann regions, expected l = {l}",
            )
        )
    order = region.shift if region.shift is not None else tuple(range(len(region.regions)))
    if not region.shift_ok:
        violations.append(
            _violation("shift", "regions", "handle correspondence is not a clean cycle")
        )
    elif len(order) == len(region.regions) and region.regions:
        for t in range(len(order)):
            cur = region.regions[order[t]]
            nxt = region.regions[order[(t + 1) % len(order)]]
            if cur.n1 != nxt.n2:
                violations.append(
                    _violation(
                        "shift",
                        f"region {order[t] + 1}",
                        f"n1 = {cur.n1} but next region has n2 = {nxt.n2}",
                    )
                )
    n_values = {r.n1 for r in region.regions} | {r.n2 for r in region.regions}
    n = region.regions[0].n1 if region.regions else 0
    if len(n_values) > 1:
        violations.append(
            _violation("count", "regions", f"interior counts not constant: {sorted(n_values)}")
        )
    if (1 + n) * l != v:
        violations.append(
            _violation(
                "divisibility",
                "v",
                f"no integer n with (1 + n) * {l} = {v}; found n = {n}",
            )
        )
    return {
        "ok": not violations,
        "anchor": list(region.anchor),
        "v": v,
        "l": l,
        "n": n,
        "divides": v % l == 0 if l else False,
        "violations": violations,
        "regions": region.as_dict()["regions"],
    }


def divisibility_report(data: PairedIntersection, web: GreatWeb) -> dict:
    """Run every anchor the case demands and combine the conclusions."""
    case = data.case
    gamma = build_gamma(data, web)
    anchors = case.scharlemann_pairs(data.p)
    reports = []
    ok = True
    for anchor in anchors:
        region = decompose_regions(gamma, anchor)
        expected_l = case.expected_length(anchor)
        rep = verify_divisibility(region, v=web.v, l=expected_l)
        reports.append(rep)
        ok = ok and rep["ok"]
    result = {"ok": ok, "anchors": reports, "v": web.v}
    if isinstance(case, ThreeSummandCase):
        product = case.l1 * case.l2
        result["product"] = product
        result["product_divides"] = web.v % product == 0
        result["ok"] = result["ok"] and result["product_divides"]
    return result


def shared_vertex_identity(k1: int, k2: int, l1: int, l2: int) -> dict:
    """The two ways of counting web labels between a shared vertex pair.

    On a realizable web the counts must agree, yet agreement forces l2 to
    divide k2 with 0 < k2 <= l2 - 2 (and the degenerate k2 = 0 collapses
    the cycle lengths onto each other), so any >= 2-vertex overlap is
    impossible.
    """
    lhs = k1 * l2
    rhs = k2 * l1
    holds = lhs == rhs
    if not holds:
        reason = f"count identity fails: {k1}*{l2} = {lhs} but {k2}*{l1} = {rhs}"
    elif k2 > 0:
        reason = f"identity forces {l2} | {k2}, impossible for 0 < {k2} <= {l2 - 2}"
    else:
        reason = "adjacent shared edges force equal cycle lengths, breaking coprimality"
    return {
        "k1": k1,
        "k2": k2,
        "l1": l1,
        "l2": l2,
        "lhs": lhs,
        "rhs": rhs,
        "identity_holds": holds,
        "verdict": "impossible",
        "reason": reason,
    }


def shared_vertex_analysis(web: GreatWeb) -> dict:
    """Compare the web's two anchor cycles vertex by vertex.

    Sharing zero or one vertex is compliant; two or more trips the
    counting identity, which is always reported as impossible.
    """
    case = web.patch.case
    if not isinstance(case, ThreeSummandCase):
        raise WebError("shared-vertex analysis applies to the three-summand case")
    faces = _scharlemann_faces(web.patch, "Q")
    first = [f for f, pair in faces if pair == (1, 2)]
    second = [f for f, pair in faces if pair == (case.x, case.x + 1)]
    pairs = []
    for c1 in first:
        for c2 in second:
            shared = sorted(
                set(c1.vertices()) & set(c2.vertices()), key=lambda s: int(s[1:])
            )
            entry = {
                "cycle_1": [arc_name(web.arc_map[k]) for k in c1.edges],
                "cycle_2": [arc_name(web.arc_map[k]) for k in c2.edges],
                "shared": shared,
                "count": len(shared),
            }
            if len(shared) <= 1:
                entry["verdict"] = "compliant"
            else:
                a, b = (int(s[1:]) for s in shared[:2])
                lo, hi = min(a, b), max(a, b)

                def between(cycle):
                    indices = {int(s[1:]) for s in cycle.vertices()}
                    return sum(1 for c in indices if lo < c < hi)

                identity = shared_vertex_identity(
                    between(c1), between(c2), case.l1, case.l2
                )
                entry.update(identity)
            pairs.append(entry)
    return {
        "cycles_on_first_anchor": len(first),
        "cycles_on_second_anchor": len(second),
        "pairs": pairs,
        "compliant": all(p.get("verdict") == "compliant" for p in pairs),
    }


def _parallel_links(web: GreatWeb) -> list[dict]:
    """Bigon faces of the web sub-map that join two edges into a
    parallelism family: both corners must be adjacent non-wrapping label
    pairs, and the certificate face never counts."""
    links = []
    p = web.patch.p
    for idx, face in enumerate(web.faces):
        if face.length != 2 or idx == web.certificate_face:
            continue
        good = True
        for _, corner in face.corners:
            pair = adjacent_pair(tuple(sorted(corner)), p)
            if pair is None or pair[0] == p:
                good = False
                break
        if good:
            scharlemann = (
                len(
                    {
                        adjacent_pair(tuple(sorted(c)), p)
                        for _, c in face.corners
                    }
                )
                == 1
            )
            links.append(
                {
                    "face": idx,
                    "edges": tuple(face.edges),
                    "scharlemann": scharlemann,
                }
            )
    return links


def find_full_quota(web: GreatWeb) -> Optional[dict]:
    """Longest clean run in each parallelism family, if long enough.

    Families are chains of linked edges on one vertex pair; a quota is a
    contiguous run of at least p/2 edges none of whose internal links is
    a Scharlemann bigon.
    """
    p = web.patch.p
    need = p // 2
    links = _parallel_links(web)
    neighbors: dict[int, list[tuple[int, bool]]] = {}
    for link in links:
        e1, e2 = link["edges"]
        neighbors.setdefault(e1, []).append((e2, link["scharlemann"]))
        neighbors.setdefault(e2, []).append((e1, link["scharlemann"]))
    edge_ids = [k for k, arc in enumerate(web.patch.arcs) if len(arc.ends) == 2]

    # families: connected components of the link graph
    seen = set()
    best = None
    for start in edge_ids:
        if start in seen:
            continue
        family = [start]
        seen.add(start)
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for nxt, _ in neighbors.get(cur, []):
                if nxt not in seen:
                    seen.add(nxt)
                    family.append(nxt)
                    frontier.append(nxt)
        # a family is a chain; order it end to end
        chain = _order_chain(family, neighbors)
        if chain is None:
            continue
        run = _longest_clean_run(chain, neighbors)
        if len(run) >= need and (best is None or len(run) > len(best)):
            best = run
    if best is None:
        return None
    name = [arc_name(web.arc_map[k]) for k in best]
    pair = sorted({e[0] for k in best for e in web.patch.arcs[k].ends})
    return {
        "edges": name,
        "size": len(best),
        "required": need,
        "vertex_pair": pair,
    }


def _order_chain(family: list[int], neighbors) -> Optional[list[int]]:
    if len(family) == 1:
        return family
    degree = {e: len(neighbors.get(e, [])) for e in family}
    ends = [e for e in family if degree[e] == 1]
    if len(ends) != 2 or any(degree[e] > 2 for e in family):
        # cyclic or branching families do not arise from bigon chains on
        # a disk; skip rather than guess
        return None
    chain = [min(ends)]
    prev = None
    while len(chain) < len(family):
        cur = chain[-1]
        nxt = [e for e, _ in neighbors[cur] if e != prev]
        if not nxt:
            return None
        prev = cur
        chain.append(nxt[0])
    return chain


def _longest_clean_run(chain: list[int], neighbors) -> list[int]:
    def link_clean(a, b):
        for nxt, scharlemann in neighbors.get(a, []):
            if nxt == b:
                return not scharlemann
        return False

    best = [chain[0]]
    start = 0
    for i in range(1, len(chain)):
        if not link_clean(chain[i - 1], chain[i]):
            start = i
        if i - start + 1 > len(best):
            best = chain[start : i + 1]
    return best


def classify_web(web: GreatWeb) -> dict:
    quota = find_full_quota(web)
    return {
        "classification": "small" if quota else "large",
        "quota": quota,
        "required": web.patch.p // 2,
    }


def feasible_slopes(b: int) -> list[tuple[int, int, int]]:
    """All coprime lens-order pairs whose product fits under the bridge
    bound; the product is the only slope magnitude the surgery allows."""
    if b < 1:
        raise ValueError("bridge bound must be at least 1")
    out = []
    for l1 in range(2, b + 1):
        for l2 in range(l1 + 1, b + 1):
            r = l1 * l2
            if r <= b and gcd(l1, l2) == 1:
                out.append((l1, l2, r))
    out.sort(key=lambda t: (t[2], t[0]))
    return out
