"""Web certification, the P-side counting pipeline, quotas, and slopes."""

import json
from dataclasses import replace
from math import gcd
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swt.surface import (
    FormatError,
    GeneralCase,
    ThreeSummandCase,
    graph_from_dict,
    load_graph,
    mirror,
)
from swt.webs import (
    RegionData,
    ScharlemannRegion,
    WebError,
    build_gamma,
    classify_web,
    decompose_regions,
    divisibility_report,
    feasible_slopes,
    find_full_quota,
    scharlemann_labels,
    shared_vertex_analysis,
    shared_vertex_identity,
    verify_divisibility,
    verify_great_web,
)

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name):
    return load_graph(str(FIXTURES / name))


def checks(web):
    return sorted({v["check"] for v in web.violations})


def patch_doc(arcs, p=4, case=None, signs=(1, 1)):
    return {
        "p": p,
        "case": case or {"type": "general", "l": 2},
        "q_vertices": [
            {"id": f"v{k + 1}", "sign": s} for k, s in enumerate(signs)
        ],
        "arcs": arcs,
    }


def end(q, label):
    return {"q": q, "p": f"u{label}"}


def ghost(q, label):
    return {"ends": [], "ghost": {"vertex": q, "label": label}}


class TestPatchCertification:
    def test_w1_certifies(self):
        web = verify_great_web(fixture("w1.json"))
        assert web.ok
        assert web.mode == "patch"
        assert web.sign == 1
        assert web.v == 2
        assert web.edges == (0, 1, 2)
        assert web.ghosts == (("v1", 4), ("v2", 3))
        assert web.expected_ghosts == 2
        assert web.regular_labels == (3, 4)
        assert web.certificate_face == 0

    def test_w1_as_dict(self):
        doc = verify_great_web(fixture("w1.json")).as_dict()
        assert doc["ok"] is True
        assert doc["edges"] == ["a1", "a2", "a3"]
        assert doc["ghosts"] == [
            {"vertex": "v1", "label": 4},
            {"vertex": "v2", "label": 3},
        ]
        assert doc["certificate_face"]["length"] == 2

    def test_ghost_quota_scales_with_p(self):
        arcs = [
            {"ends": [end("v1", 1), end("v2", 2)]},
            {"ends": [end("v1", 2), end("v2", 1)]},
        ]
        arcs += [ghost("v1", lam) for lam in range(3, 13)]
        web = verify_great_web(graph_from_dict(patch_doc(arcs, p=12)))
        assert web.ok
        assert web.expected_ghosts == 10
        assert len(web.ghosts) == 10

    def test_lone_vertex_all_ghosts(self):
        arcs = [ghost("v1", lam) for lam in range(1, 5)]
        web = verify_great_web(graph_from_dict(patch_doc(arcs, signs=(1,))))
        assert not web.ok
        assert checks(web) == ["ghost-count", "ghost-ledger"]
        count = [v for v in web.violations if v["check"] == "ghost-count"]
        assert count[0]["detail"] == "4 ghosts, expected 2"

    def test_equal_labels_break_parity(self):
        arcs = [
            {"ends": [end("v1", 1), end("v2", 2)]},
            {"ends": [end("v1", 2), end("v2", 1)]},
            {"ends": [end("v1", 3), end("v2", 3)]},
            ghost("v1", 4),
            ghost("v2", 4),
        ]
        web = verify_great_web(graph_from_dict(patch_doc(arcs)))
        assert "parity" in checks(web)
        bad = [v for v in web.violations if v["check"] == "parity"]
        assert "equal labels 3" in bad[0]["detail"]

    def test_toroidal_patch_fails_disk_check(self):
        arcs = [
            {"ends": [end("v1", 1), end("v2", 4)]},
            {"ends": [end("v1", 2), end("v2", 1)]},
            {"ends": [end("v1", 3), end("v2", 2)]},
            ghost("v1", 4),
            ghost("v2", 3),
        ]
        web = verify_great_web(graph_from_dict(patch_doc(arcs)))
        assert checks(web) == ["disk"]
        assert web.violations[0]["detail"] == (
            "sub-map component has V - E + F = 0, but a disk complement needs 2"
        )

    def test_patch_mode_verifies_everything(self):
        with pytest.raises(FormatError, match="whole fragment"):
            verify_great_web(fixture("w1.json"), vertices=("v1",))

    def test_scharlemann_labels(self):
        assert scharlemann_labels(GeneralCase(2), 6) == (1, 2)
        assert scharlemann_labels(ThreeSummandCase(2, 3, 4, 3, 3), 6) == (1, 2, 4, 5)


class TestPairedCertification:
    def test_positive_web(self):
        web = verify_great_web(fixture("p4q6_web.json"), vertices=("v1", "v2"))
        assert web.ok
        assert web.mode == "paired"
        assert web.sign == 1
        assert web.edges == (0, 1, 2)
        assert web.ghosts == (("v1", 4), ("v2", 3))
        assert web.certificate_face == 0

    def test_negative_web(self):
        web = verify_great_web(fixture("p4q6_web.json"), vertices=("v4", "v5"))
        assert web.ok
        assert web.sign == -1
        assert web.edges == (5, 6, 7)
        assert web.ghosts == (("v4", 4), ("v5", 3))

    def test_four_vertex_web(self):
        web = verify_great_web(
            fixture("p4q8_web.json"), vertices=("v1", "v2", "v3", "v4")
        )
        assert web.ok
        assert web.edges == (0, 1, 2, 3, 4, 5, 6)
        assert web.ghosts == (("v3", 3), ("v4", 4))

    def test_mixed_signs_rejected(self):
        web = verify_great_web(fixture("p4q6_web.json"), vertices=("v1", "v4"))
        assert "sign" in checks(web)

    def test_straggler_vertex_breaks_everything_at_once(self):
        web = verify_great_web(
            fixture("p4q6_web.json"), vertices=("v1", "v2", "v3")
        )
        assert checks(web) == [
            "certificate",
            "connected",
            "ghost-count",
            "ghost-ledger",
        ]
        by_check = {v["check"]: v for v in web.violations}
        assert by_check["connected"]["detail"] == "2 components"
        assert by_check["ghost-count"]["detail"] == "6 ghosts, expected 2"
        assert (
            by_check["certificate"]["detail"]
            == "ghost germs spread over 2 faces; disk needs one"
        )

    def test_vertex_subset_required(self):
        with pytest.raises(FormatError, match="explicit vertex subset"):
            verify_great_web(fixture("p4q6_web.json"))

    def test_unknown_vertex(self):
        with pytest.raises(FormatError, match="v9"):
            verify_great_web(fixture("p4q6_web.json"), vertices=("v1", "v9"))

    def test_mirror_preserves_certification(self):
        web = verify_great_web(
            mirror(fixture("p4q6_web.json")), vertices=("v1", "v2")
        )
        assert web.ok
        assert web.sign == -1
        assert web.edges == (0, 1, 2)
        assert web.ghosts == (("v1", 4), ("v2", 3))

    def test_outside_attaches_into_certificate(self):
        web = verify_great_web(
            fixture("ts_shared_paired.json"), vertices=("v1", "v2", "v3")
        )
        assert web.ok
        assert web.certificate_face == 2


class TestGamma:
    def gamma(self, name, vertices):
        data = fixture(name)
        return build_gamma(data, verify_great_web(data, vertices=vertices))

    def test_valences_two_vertex(self):
        gamma = self.gamma("p4q6_web.json", ("v1", "v2"))
        assert dict(sorted(gamma.valences.items())) == {
            "u1": 2,
            "u2": 2,
            "u3": 1,
            "u4": 1,
        }
        assert gamma.valences == gamma.expected_valences
        assert gamma.bipartite_ok

    def test_valences_four_vertex(self):
        gamma = self.gamma("p4q8_web.json", ("v1", "v2", "v3", "v4"))
        assert dict(sorted(gamma.valences.items())) == {
            "u1": 4,
            "u2": 4,
            "u3": 3,
            "u4": 3,
        }
        assert gamma.bipartite_ok

    def test_valences_three_summands(self):
        gamma = self.gamma("ts_shared_paired.json", ("v1", "v2", "v3"))
        assert dict(sorted(gamma.valences.items())) == {
            "u1": 3,
            "u2": 3,
            "u3": 2,
            "u4": 3,
            "u5": 3,
            "u6": 2,
        }
        assert gamma.valences == gamma.expected_valences
        assert gamma.bipartite_ok

    def test_odd_spacing_reported_not_enforced(self):
        gamma = self.gamma("p4q6_web.json", ("v1", "v2"))
        assert gamma.odd_spacing == {
            "u1": [0, 4],
            "u2": [0, 4],
            "u3": [5],
            "u4": [5],
        }
        assert not gamma.odd_spacing_ok

    def test_missing_edges_break_valences(self):
        data = fixture("p4q6_web.json")
        web = verify_great_web(data, vertices=("v1", "v2"))
        truncated = replace(web, edges=web.edges[:2])
        with pytest.raises(WebError, match="gamma valence at"):
            build_gamma(data, truncated)

    def test_patches_have_no_p_side(self):
        patch = fixture("w1.json")
        web = verify_great_web(patch)
        with pytest.raises(FormatError):
            build_gamma(patch, web)


class TestRegions:
    def region(self, name, vertices, anchor=(1, 2)):
        data = fixture(name)
        gamma = build_gamma(data, verify_great_web(data, vertices=vertices))
        return decompose_regions(gamma, anchor)

    def test_two_vertex_regions(self):
        region = self.region("p4q6_web.json", ("v1", "v2"))
        assert region.as_dict() == {
            "anchor": [1, 2],
            "v": 2,
            "l": 2,
            "sigma": ["a1", "a2"],
            "subregions": [{"n1": 0, "n2": 0}, {"n1": 0, "n2": 0}],
            "regions": [
                {"n1": 0, "n2": 0, "subregions": [0]},
                {"n1": 0, "n2": 0, "subregions": [1]},
            ],
            "shift": [0, 1],
            "shift_ok": True,
        }

    def test_four_vertex_regions(self):
        region = self.region("p4q8_web.json", ("v1", "v2", "v3", "v4"))
        assert region.as_dict() == {
            "anchor": [1, 2],
            "v": 4,
            "l": 2,
            "sigma": ["a1", "a2"],
            "subregions": [{"n1": 0, "n2": 0}] * 4,
            "regions": [
                {"n1": 1, "n2": 1, "subregions": [0, 2]},
                {"n1": 1, "n2": 1, "subregions": [1, 3]},
            ],
            "shift": [0, 1],
            "shift_ok": True,
        }

    def test_deterministic(self):
        first = self.region("p4q8_web.json", ("v1", "v2", "v3", "v4"))
        second = self.region("p4q8_web.json", ("v1", "v2", "v3", "v4"))
        assert first.as_dict() == second.as_dict()

    def test_unknown_anchor(self):
        with pytest.raises(WebError, match="anchor"):
            self.region("p4q6_web.json", ("v1", "v2"), anchor=(3, 4))

    def test_missing_anchor_cycle(self):
        with pytest.raises(WebError, match="no Scharlemann cycle"):
            self.region("quota_p6_paired.json", ("v1", "v2"))

    def test_second_anchor_of_three_summands(self):
        region = self.region(
            "ts_shared_paired.json", ("v1", "v2", "v3"), anchor=(4, 5)
        )
        assert region.l == 3
        assert region.sigma == ("a3", "a4", "a5")
        report = verify_divisibility(region)
        assert report["ok"]
        assert report["n"] == 0
        assert report["divides"]

    def test_divisibility_passes(self):
        report = verify_divisibility(self.region("p4q6_web.json", ("v1", "v2")))
        assert report == {
            "ok": True,
            "anchor": [1, 2],
            "v": 2,
            "l": 2,
            "n": 0,
            "divides": True,
            "violations": [],
            "regions": [
                {"n1": 0, "n2": 0, "subregions": [0]},
                {"n1": 0, "n2": 0, "subregions": [1]},
            ],
        }

    def test_divisibility_interior_counts(self):
        report = verify_divisibility(
            self.region("p4q8_web.json", ("v1", "v2", "v3", "v4"))
        )
        assert report["ok"]
        assert report["n"] == 1
        assert report["divides"]

    def test_divisibility_fails_without_integer_fit(self):
        region = RegionData(
            anchor=(1, 2),
            v=5,
            l=3,
            sigma=(),
            subregions=(),
            regions=(
                ScharlemannRegion(0, 0),
                ScharlemannRegion(0, 0),
                ScharlemannRegion(0, 0),
            ),
            shift=(0, 1, 2),
            shift_ok=True,
        )
        report = verify_divisibility(region)
        assert not report["ok"]
        bad = [v for v in report["violations"] if v["check"] == "divisibility"]
        assert bad[0]["detail"] == "no integer n with (1 + n) * 3 = 5; found n = 0"

    def test_report_general(self):
        data = fixture("p4q6_web.json")
        web = verify_great_web(data, vertices=("v1", "v2"))
        report = divisibility_report(data, web)
        assert report["ok"]
        assert report["v"] == 2
        assert len(report["anchors"]) == 1
        assert "product" not in report

    def test_report_three_summands(self):
        data = fixture("ts_shared_paired.json")
        web = verify_great_web(data, vertices=("v1", "v2", "v3"))
        report = divisibility_report(data, web)
        assert not report["ok"]
        assert report["v"] == 3
        assert report["product"] == 6
        assert not report["product_divides"]
        first, second = report["anchors"]
        assert not first["ok"]
        assert {v["check"] for v in first["violations"]} == {
            "shift",
            "count",
            "divisibility",
        }
        by_check = {v["check"]: v for v in first["violations"]}
        assert by_check["count"]["detail"] == "interior counts not constant: [0, 1]"
        assert (
            by_check["divisibility"]["detail"]
            == "no integer n with (1 + n) * 2 = 3; found n = 0"
        )
        assert second["ok"]
        assert second["l"] == 3
        assert second["divides"]


class TestSharedVertices:
    def test_identity_breaks(self):
        report = shared_vertex_identity(2, 1, 2, 3)
        assert report["lhs"] == 6
        assert report["rhs"] == 2
        assert not report["identity_holds"]
        assert report["verdict"] == "impossible"
        assert report["reason"] == "count identity fails: 2*3 = 6 but 1*2 = 2"

    def test_identity_forces_bad_divisor(self):
        report = shared_vertex_identity(2, 3, 4, 6)
        assert report["identity_holds"]
        assert report["verdict"] == "impossible"
        assert report["reason"] == (
            "identity forces 6 | 3, impossible for 0 < 3 <= 4"
        )

    def test_identity_degenerate(self):
        report = shared_vertex_identity(0, 0, 2, 3)
        assert report["identity_holds"]
        assert report["verdict"] == "impossible"
        assert report["reason"] == (
            "adjacent shared edges force equal cycle lengths, breaking coprimality"
        )

    def test_shared_pair_is_impossible(self):
        report = shared_vertex_analysis(
            verify_great_web(fixture("ts_shared_patch.json"))
        )
        assert report["cycles_on_first_anchor"] == 1
        assert report["cycles_on_second_anchor"] == 1
        assert not report["compliant"]
        assert report["pairs"] == [
            {
                "cycle_1": ["a1", "a2"],
                "cycle_2": ["a3", "a5", "a4"],
                "shared": ["v1", "v2"],
                "count": 2,
                "k1": 0,
                "k2": 0,
                "l1": 2,
                "l2": 3,
                "lhs": 0,
                "rhs": 0,
                "identity_holds": True,
                "verdict": "impossible",
                "reason": (
                    "adjacent shared edges force equal cycle lengths, "
                    "breaking coprimality"
                ),
            }
        ]

    def test_single_shared_vertex_is_compliant(self):
        report = shared_vertex_analysis(
            verify_great_web(fixture("ts_compliant_patch.json"))
        )
        assert report["compliant"]
        assert report["pairs"] == [
            {
                "cycle_1": ["a1", "a2"],
                "cycle_2": ["a3", "a5", "a4"],
                "shared": ["v2"],
                "count": 1,
                "verdict": "compliant",
            }
        ]

    def test_needs_three_summands(self):
        with pytest.raises(WebError, match="three-summand"):
            shared_vertex_analysis(verify_great_web(fixture("w1.json")))


def oracle_quota(web):
    """Longest chain of edges joined by clean bigon links, by brute force."""
    p = web.patch.p
    links = {}
    for idx, face in enumerate(web.faces):
        if face.length != 2 or idx == web.certificate_face:
            continue
        pairs = []
        for _, labels in face.corners:
            lo, hi = sorted(labels)
            pairs.append((lo, hi) if hi == lo + 1 else None)
        if None in pairs:
            continue
        if pairs[0] == pairs[1]:
            continue  # matching corner pairs mean a Scharlemann bigon
        a, b = face.edges
        links.setdefault(a, set()).add(b)
        links.setdefault(b, set()).add(a)

    best = 0
    nodes = sorted(links)

    def grow(tail, seen):
        nonlocal best
        best = max(best, len(seen))
        for nxt in sorted(links.get(tail, ())):
            if nxt not in seen:
                grow(nxt, seen | {nxt})

    for start in nodes:
        grow(start, {start})
    if not nodes and web.edges:
        best = 1
    return best >= p // 2


class TestQuota:
    def web(self, name, vertices=None):
        data = fixture(name)
        if vertices is None:
            return verify_great_web(data)
        return verify_great_web(data, vertices=vertices)

    def test_w1_is_large(self):
        web = self.web("w1.json")
        assert find_full_quota(web) is None
        assert classify_web(web) == {
            "classification": "large",
            "quota": None,
            "required": 2,
        }

    def test_parallel_chain_is_small(self):
        web = self.web("quota_p6.json")
        quota = find_full_quota(web)
        assert quota == {
            "edges": ["a1", "a2", "a3"],
            "size": 3,
            "required": 3,
            "vertex_pair": ["v1", "v2"],
        }
        assert classify_web(web)["classification"] == "small"

    def test_quota_survives_pairing(self):
        web = self.web("quota_p6_paired.json", ("v1", "v2"))
        quota = find_full_quota(web)
        assert quota is not None
        assert quota["edges"] == ["a1", "a2", "a3"]

    def test_ambient_webs_are_large(self):
        for name, vertices in [
            ("p4q6_web.json", ("v1", "v2")),
            ("p4q8_web.json", ("v1", "v2", "v3", "v4")),
        ]:
            web = self.web(name, vertices)
            assert find_full_quota(web) is None
            assert classify_web(web)["classification"] == "large"

    def test_against_oracle(self):
        cases = [
            ("w1.json", None),
            ("quota_p6.json", None),
            ("ts_shared_patch.json", None),
            ("p4q6_web.json", ("v1", "v2")),
            ("p4q8_web.json", ("v1", "v2", "v3", "v4")),
            ("quota_p6_paired.json", ("v1", "v2")),
        ]
        for name, vertices in cases:
            web = self.web(name, vertices)
            assert (find_full_quota(web) is not None) == oracle_quota(web), name


class TestSlopes:
    def test_frozen_tables(self):
        assert feasible_slopes(5) == []
        assert feasible_slopes(6) == [(2, 3, 6)]
        assert feasible_slopes(10) == [(2, 3, 6), (2, 5, 10)]

    def test_rejects_empty_bound(self):
        with pytest.raises(ValueError, match="at least 1"):
            feasible_slopes(0)

    @given(st.integers(min_value=1, max_value=80))
    @settings(max_examples=60, deadline=None)
    def test_entries_are_wellformed(self, b):
        rows = feasible_slopes(b)
        assert rows == sorted(rows, key=lambda row: (row[2], row[0]))
        for l1, l2, r in rows:
            assert 2 <= l1 < l2
            assert gcd(l1, l2) == 1
            assert r == l1 * l2
            assert r <= b

    @given(st.integers(min_value=1, max_value=79))
    @settings(max_examples=60, deadline=None)
    def test_prefix_monotone(self, b):
        shorter = feasible_slopes(b)
        longer = feasible_slopes(b + 1)
        assert longer[: len(shorter)] == shorter
