"""Streams, the paired face engine, canonical forms, and sweep manifests."""

import json
from itertools import permutations
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swt.enumerator import (
    BRAID_PROPERTIES,
    DICHOTOMY_CELLS,
    EnumerationError,
    SweepSpec,
    braid_dichotomy_cell,
    certified_webs,
    enumerate_paired,
    enumerate_webs,
    manifest_canonical_bytes,
    patch_canonical_key,
    positive_contents,
    run_property_sweep,
    _census_stabilizer,
    _paired_dfs,
    _paired_key,
    _SideMap,
)
from swt.surface import (
    Arc,
    GeneralCase,
    ThreeSummandCase,
    WebPatch,
    euler_characteristics,
    load_graph,
    mirror,
    validate,
)

FIXTURES = Path(__file__).parent / "fixtures"

GENERAL = GeneralCase(l=2)


# ---------------------------------------------------------------------------
# web fragment stream


def naive_web_classes(v, p, case):
    """Generate-and-filter count with no help from the splice engine."""
    regular = case.regular_labels(p)
    slots = [(t, lam) for t in range(v) for lam in range(1, p + 1)]
    found = set()

    def canonical(arcs, ghosts):
        best = None
        for perm in permutations(range(v)):
            a = tuple(
                sorted(
                    tuple(sorted(((perm[x], la), (perm[y], lb))))
                    for (x, la), (y, lb) in arcs
                )
            )
            g = tuple(sorted((perm[t], lam) for t, lam in ghosts))
            if best is None or (a, g) < best:
                best = (a, g)
        return best

    def keeps(arcs, ghosts):
        parent = list(range(v))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (x, _), (y, _) in arcs:
            parent[find(x)] = find(y)
        if len({find(t) for t in range(v)}) != 1:
            return False
        records = [
            Arc(ends=((f"v{x + 1}", f"u{la}"), (f"v{y + 1}", f"u{lb}")))
            for (x, la), (y, lb) in sorted(arcs)
        ]
        records += [Arc(ends=(), ghost=(f"v{t + 1}", lam)) for t, lam in sorted(ghosts)]
        patch = WebPatch(
            p=p,
            case=case,
            vertices=tuple((f"v{t + 1}", 1) for t in range(v)),
            arcs=tuple(records),
        )
        return all(r["V"] - r["E"] + r["F"] == 2 for r in euler_characteristics(patch, "Q"))

    def ghost_choices(idx, ghosts):
        if idx == len(regular):
            yield tuple(ghosts)
            return
        for t in range(v):
            ghosts.append((t, regular[idx]))
            yield from ghost_choices(idx + 1, ghosts)
            ghosts.pop()

    for ghosts in ghost_choices(0, []):
        taken = set(ghosts)
        rest = [s for s in slots if s not in taken]

        def match(remaining, arcs):
            if not remaining:
                if keeps(arcs, ghosts):
                    found.add(canonical(arcs, ghosts))
                return
            a = remaining[0]
            for k in range(1, len(remaining)):
                b = remaining[k]
                if a[0] == b[0] or a[1] == b[1]:
                    continue
                match([s for s in remaining[1:] if s != b], arcs + [(a, b)])

        match(rest, [])
    return found


def test_web_stream_rejects_bad_parameters():
    with pytest.raises(EnumerationError):
        list(enumerate_webs(0, 4, GENERAL))
    with pytest.raises(EnumerationError):
        list(enumerate_webs(2, 1, GENERAL))
    with pytest.raises(EnumerationError):
        list(enumerate_webs(2, 4, GeneralCase(l=1)))
    with pytest.raises(EnumerationError):
        list(enumerate_webs(2, 4, GENERAL, ledger="loose"))
    with pytest.raises(EnumerationError):
        # x must leave labels 1, 2 special: 4 <= x <= p - 2 fails at p = 4
        list(enumerate_webs(2, 4, ThreeSummandCase(l1=2, l2=3, x=4, p1=2, p2=2)))


def test_web_stream_single_vertex_is_empty():
    # one vertex owns p ends but the ledger only admits p - 2 ghosts,
    # and the leftover pair would need a loop or an equal-label arc
    assert list(enumerate_webs(1, 4, GENERAL)) == []
    assert list(enumerate_webs(1, 6, GENERAL)) == []


def test_web_stream_v2_p4_is_exactly_w1():
    stream = list(enumerate_webs(2, 4, GENERAL))
    assert len(stream) == 1
    w1 = load_graph(str(FIXTURES / "w1.json"))
    assert patch_canonical_key(stream[0]) == patch_canonical_key(w1)


def test_web_stream_v2_p4_has_scharlemann_bigon_pair():
    for patch in enumerate_webs(2, 4, GENERAL):
        ends = set()
        for arc in patch.arcs:
            if arc.ghost is None:
                (qa, pa), (qb, pb) = arc.ends
                ends.add(((qa, int(pa[1:])), (qb, int(pb[1:]))))
                ends.add(((qb, int(pb[1:])), (qa, int(pa[1:]))))
        hit = any(
            ((va, 1), (vb, 2)) in ends and ((va, 2), (vb, 1)) in ends
            for va in ("v1", "v2")
            for vb in ("v1", "v2")
            if va != vb
        )
        assert hit


@pytest.mark.parametrize(
    "v,p",
    [(1, 4), (2, 4), (2, 6), (3, 4)],
)
def test_web_stream_matches_naive_oracle(v, p):
    naive = naive_web_classes(v, p, GENERAL)
    stream = list(enumerate_webs(v, p, GENERAL))
    assert len(stream) == len(naive)


def test_web_stream_deterministic():
    first = [patch_canonical_key(w) for w in enumerate_webs(3, 4, GENERAL)]
    second = [patch_canonical_key(w) for w in enumerate_webs(3, 4, GENERAL)]
    assert first == second


def test_web_stream_canonical_soundness():
    keys = [patch_canonical_key(w) for w in enumerate_webs(3, 4, GENERAL)]
    assert len(keys) == len(set(keys))


def test_web_stream_strict_subset_of_free():
    strict = {patch_canonical_key(w) for w in enumerate_webs(2, 4, GENERAL)}
    free = {patch_canonical_key(w) for w in enumerate_webs(2, 4, GENERAL, ledger="free")}
    assert strict <= free
    assert len(free) >= len(strict)


def test_web_stream_three_summand_respects_ledger():
    case = ThreeSummandCase(l1=2, l2=3, x=4, p1=3, p2=3)
    for patch in enumerate_webs(2, 6, case):
        ghosts = [arc.ghost for arc in patch.arcs if arc.ghost is not None]
        assert len(ghosts) == case.ghost_count(6)
        assert sorted(lam for _, lam in ghosts) == sorted(case.regular_labels(6))


# ---------------------------------------------------------------------------
# paired configuration stream


def brute_paired_p4q2():
    """Raw matchings filtered by validate alone; engine kept out of it."""
    p, q = 4, 2
    q_signs = [1, -1]
    keys = set()
    points = [(i, m) for i in range(1, q + 1) for m in range(1, p + 1)]
    for bits in range(1 << p):
        p_signs = [1 if bits & (1 << (m - 1)) else -1 for m in range(1, p + 1)]

        def match(remaining, arcs):
            if not remaining:
                config = build(arcs)
                if not validate(config):
                    keys.add((bits, _paired_key(arcs)))
                return
            a = remaining[0]
            for k in range(1, len(remaining)):
                b = remaining[k]
                same_q = q_signs[a[0] - 1] == q_signs[b[0] - 1]
                same_p = p_signs[a[1] - 1] == p_signs[b[1] - 1]
                if same_q == same_p:
                    continue
                match([s for s in remaining[1:] if s != b], arcs + [(a, b)])

        def build(arcs):
            from swt.surface import PairedIntersection

            return PairedIntersection(
                p=p,
                q=q,
                case=GENERAL,
                q_vertices=tuple((f"v{i}", q_signs[i - 1]) for i in range(1, q + 1)),
                p_vertices=tuple((f"u{m}", p_signs[m - 1], None) for m in range(1, p + 1)),
                arcs=tuple(
                    Arc(ends=((f"v{i}", f"u{m}"), (f"v{j}", f"u{l}")))
                    for (i, m), (j, l) in sorted(
                        tuple(sorted((x, y))) for x, y in arcs
                    )
                ),
            )

        match(points, [])
    return keys


def test_paired_rejects_bad_parameters():
    with pytest.raises(EnumerationError):
        list(enumerate_paired(4, 3, GENERAL))
    with pytest.raises(EnumerationError):
        list(enumerate_paired(4, 0, GENERAL))
    with pytest.raises(EnumerationError):
        list(enumerate_paired(1, 2, GENERAL))


def test_paired_p4q2_matches_brute_force():
    # q = 2 has a trivial renumbering group, so the stream must equal the
    # raw generate-and-filter census exactly
    stream = {}
    for r in enumerate_paired(4, 2, GENERAL):
        bits = 0
        for uid, sign, _ in r.config.p_vertices:
            if sign > 0:
                bits |= 1 << (int(uid[1:]) - 1)
        arcs = [
            ((int(a[0][1:]), int(a[1][1:])), (int(b[0][1:]), int(b[1][1:])))
            for a, b in (arc.ends for arc in r.config.arcs)
        ]
        stream[(bits, _paired_key(arcs))] = r
    assert set(stream) == brute_paired_p4q2()
    assert len(stream) == 8


def test_paired_p4q2_has_one_positive_thin_vertex():
    for r in enumerate_paired(4, 2, GENERAL):
        positives = [vid for vid, sign in r.config.q_vertices if sign > 0]
        assert len(positives) == 1


def test_paired_p4q4_census_frozen():
    # 40 raw valid configurations collapse to 24 classes once each sign
    # pattern's census stabilizer is applied; both numbers came from an
    # engine-free brute force pass
    results = list(enumerate_paired(4, 4, GENERAL))
    assert len(results) == 24
    for r in results:
        assert validate(r.config) == []
        assert validate(mirror(r.config)) == []


def test_paired_fast_and_pure_paths_agree():
    q_signs = [1, 1, -1, -1]
    for bits in (0, 5, 15):
        p_signs = [1 if bits & (1 << (m - 1)) else -1 for m in range(1, 5)]
        fast = [
            tuple(a.ends for a in r.config.arcs)
            for r in _paired_dfs(4, 4, GENERAL, q_signs, p_signs, None, use_fast=True)
        ]
        pure = [
            tuple(a.ends for a in r.config.arcs)
            for r in _paired_dfs(4, 4, GENERAL, q_signs, p_signs, None, use_fast=False)
        ]
        assert fast == pure


def test_paired_census_representative_is_valid_minimum():
    # the lexicographic minimum over renumberings may fail validation
    # (renumbering scrambles thick-side rotations), so the kept
    # representative minimizes over valid images only; at least one
    # emitted class exhibits a smaller invalid image
    smaller_invalid_seen = False
    for r in enumerate_paired(4, 4, GENERAL):
        arcs = [
            ((int(a[0][1:]), int(a[1][1:])), (int(b[0][1:]), int(b[1][1:])))
            for a, b in (arc.ends for arc in r.config.arcs)
        ]
        base = _paired_key(arcs)
        for perm in _census_stabilizer(4):
            if all(perm[i] == i for i in perm):
                continue
            if _paired_key(arcs, perm) < base:
                smaller_invalid_seen = True
    assert smaller_invalid_seen


def test_paired_census_soundness():
    # no two emitted configurations of one cell are renumberings of
    # each other
    seen = {}
    for r in enumerate_paired(4, 4, GENERAL):
        bits = 0
        for uid, sign, _ in r.config.p_vertices:
            if sign > 0:
                bits |= 1 << (int(uid[1:]) - 1)
        arcs = [
            ((int(a[0][1:]), int(a[1][1:])), (int(b[0][1:]), int(b[1][1:])))
            for a, b in (arc.ends for arc in r.config.arcs)
        ]
        for perm in _census_stabilizer(4):
            key = (bits, _paired_key(arcs, perm))
            assert key not in seen
        seen[(bits, _paired_key(arcs))] = True


def test_paired_three_summand_keeps_components_apart():
    case = ThreeSummandCase(l1=2, l2=3, x=4, p1=2, p2=4)
    results = list(enumerate_paired(6, 2, case))
    for r in results:
        comp = {uid: c for uid, _, c in r.config.p_vertices}
        for arc in r.config.arcs:
            (qa, pa), (qb, pb) = arc.ends
            assert comp[pa] == comp[pb]
        assert validate(r.config) == []


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_engine_accepts_valid_configs_in_any_order(data):
    # a sub-map of a union of spheres never needs a handle and never
    # freezes a monogon, so every placement order of a valid final
    # configuration must pass the engine
    results = getattr(test_engine_accepts_valid_configs_in_any_order, "_cache", None)
    if results is None:
        results = list(enumerate_paired(4, 4, GENERAL))
        test_engine_accepts_valid_configs_in_any_order._cache = results
    r = data.draw(st.sampled_from(results))
    arcs = [
        ((int(a[0][1:]), int(a[1][1:])), (int(b[0][1:]), int(b[1][1:])))
        for a, b in (arc.ends for arc in r.config.arcs)
    ]
    order = data.draw(st.permutations(arcs))
    q_signs = [sign for _, sign in r.config.q_vertices]
    p_signs = [sign for _, sign, _ in r.config.p_vertices]
    qm = _SideMap(4, 4, q_signs)
    pm = _SideMap(4, 4, p_signs)
    for (i, m), (j, l) in order:
        qt = qm.place(qm.position(i - 1, m), qm.position(j - 1, l), guard_monogon=True)
        assert qt is not None
        pt = pm.place(pm.position(m - 1, i), pm.position(l - 1, j), guard_monogon=True)
        assert pt is not None


def test_certified_webs_empty_on_small_cells():
    # certification needs each member vertex to keep one outward end per
    # regular label, which no valid configuration this small can afford
    for r in enumerate_paired(4, 4, GENERAL):
        assert certified_webs(r.config) == []


# ---------------------------------------------------------------------------
# braid populations


def test_positive_contents_counts():
    assert positive_contents(2, 4) == [(4,)]
    assert positive_contents(3, 4) == [(2, 2)]
    assert len(positive_contents(3, 6)) == 3  # (2,4), (3,3), (4,2)
    with pytest.raises(EnumerationError):
        positive_contents(1, 4)


def test_dichotomy_cells_cover_slope_band():
    # e - 2n + 2 <= 2 keeps e in {2n-2, 2n-1, 2n}; knots need e - n odd
    for n, e in DICHOTOMY_CELLS:
        assert n in (6, 7)
        assert 2 * n - 2 <= e <= 2 * n
    knot_cells = [(n, e) for n, e in DICHOTOMY_CELLS if (e - n) % 2 == 1]
    assert knot_cells == [(6, 11), (7, 12), (7, 14)]


def test_braid_cell_fast_and_pure_agree_small():
    fast = braid_dichotomy_cell(3, 8, depth=3, use_fast=True)
    pure = braid_dichotomy_cell(3, 8, depth=3, use_fast=False)
    for key in ("necklaces", "knots", "reducible", "residue"):
        assert fast[key] == pure[key], key


def test_braid_cell_four_strands_no_residue():
    report = braid_dichotomy_cell(4, 8, depth=4)
    assert report["knots"] == report["reducible"]
    assert report["residue"] == []


# ---------------------------------------------------------------------------
# property sweeps


def test_sweep_spec_requires_properties():
    spec = SweepSpec(target="webs", params={"cells": [{"v": 2, "p": 4, "case": GENERAL}]}, properties=())
    with pytest.raises(EnumerationError):
        run_property_sweep(spec)


def test_sweep_rejects_unknown_property():
    spec = SweepSpec(
        target="webs",
        params={"cells": [{"v": 2, "p": 4, "case": GENERAL}]},
        properties=("no-such-property",),
    )
    with pytest.raises(EnumerationError):
        run_property_sweep(spec)


def test_sweep_requires_cells():
    spec = SweepSpec(target="webs", params={}, properties=("certified",))
    with pytest.raises(EnumerationError):
        run_property_sweep(spec)


def test_webs_sweep_manifest_shape(tmp_path):
    path = tmp_path / "manifest.json"
    spec = SweepSpec(
        target="webs",
        params={"cells": [{"v": 2, "p": 4, "case": GENERAL}, {"v": 2, "p": 6, "case": GENERAL}]},
        properties=("lambda-dichotomy",),
        manifest_path=str(path),
    )
    manifest = run_property_sweep(spec)
    assert manifest["count"]["total"] == 7
    assert len(manifest["count"]["cells"]) == 2
    assert manifest["counterexamples"] == []
    assert manifest["elapsed_ms"] >= 0
    assert manifest["spec"]["target"] == "webs"
    on_disk = json.loads(path.read_text())
    assert manifest_canonical_bytes(on_disk) == manifest_canonical_bytes(manifest)


def test_webs_sweep_reports_counterexamples():
    # the (1, 2) bigon is universal at p = 4 but not at p = 6; the sweep
    # must record the failures instead of aborting
    spec = SweepSpec(
        target="webs",
        params={"cells": [{"v": 2, "p": 6, "case": GENERAL}]},
        properties=("scharlemann-bigon",),
    )
    manifest = run_property_sweep(spec)
    assert manifest["count"]["total"] == 6
    assert len(manifest["counterexamples"]) == 3
    for cx in manifest["counterexamples"]:
        assert cx["property"] == "scharlemann-bigon"
        assert "graph" in cx["reproduction"]


def test_sweep_deterministic_across_workers():
    spec = SweepSpec(
        target="braids",
        params={
            "cells": [
                {"n": 2, "e": 6},
                {"n": 3, "e": 6},
                {"n": 3, "e": 7},
            ]
        },
        properties=("components-oracle",),
    )
    solo = run_property_sweep(spec, workers=1)
    team = run_property_sweep(spec, workers=3)
    assert manifest_canonical_bytes(solo) == manifest_canonical_bytes(team)


def test_paired_sweep_structural_clean():
    spec = SweepSpec(
        target="paired",
        params={"cells": [{"p": 4, "q": 2, "case": GENERAL}]},
        properties=("structural", "mirror-invariance"),
    )
    manifest = run_property_sweep(spec)
    assert manifest["count"]["total"] == 8
    assert manifest["counterexamples"] == []
