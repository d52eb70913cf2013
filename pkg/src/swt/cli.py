"""Command-line surface: files and flags in, reports and exit codes out.

Exit codes follow one contract everywhere: 0 when the report carries no
violations or counterexamples, 1 when it does, 2 for unusable input.
Reports are data, not prose; ``--json`` prints them canonically (sorted
keys, two-space indent) so that parsing and re-serializing is
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .braid import (
    WordError,
    analyze,
    apply_move,
    default_depth,
    exclude_three_summands,
    parse_moves,
    parse_word,
)
from .enumerator import (
    BRAID_PROPERTIES,
    PAIRED_PROPERTIES,
    WEB_PROPERTIES,
    EnumerationError,
    SweepSpec,
    run_property_sweep,
)
from .surface import (
    FormatError,
    GeneralCase,
    PairedIntersection,
    ThreeSummandCase,
    export_dot,
    find_scharlemann_cycles,
    load_graph,
    trace_faces,
    validate,
    _patch_violations,
)
from .webs import (
    WebError,
    build_gamma,
    classify_web,
    divisibility_report,
    feasible_slopes,
    shared_vertex_analysis,
    verify_great_web,
)

USAGE_ERROR = 2


def _violations_of(obj) -> list[dict]:
    if isinstance(obj, PairedIntersection):
        return validate(obj)
    return _patch_violations(obj)


def _emit(report: dict, as_json: bool, lines) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _vertices_arg(raw: Optional[str]) -> Optional[tuple[str, ...]]:
    if raw is None:
        return None
    parts = tuple(part.strip() for part in raw.split(",") if part.strip())
    if not parts:
        raise FormatError("--vertices needs a comma-separated vertex list")
    return parts


def _web_of(path: str, vertices_raw: Optional[str]):
    obj = load_graph(path)
    return verify_great_web(obj, vertices=_vertices_arg(vertices_raw)), obj


def cmd_validate(args) -> int:
    obj = load_graph(args.file)
    violations = _violations_of(obj)
    report = {"file": args.file, "violations": violations}
    _emit(
        report,
        args.json,
        [f"{v['check']} at {v['location']}: {v['detail']}" for v in violations]
        or ["valid"],
    )
    return 1 if violations else 0


def cmd_faces(args) -> int:
    obj = load_graph(args.file)
    faces = [face.as_dict() for face in trace_faces(obj, args.side)]
    report = {"file": args.file, "side": args.side, "faces": faces}
    _emit(
        report,
        args.json,
        [
            f"face {k}: corners {face['corners']} edges {face['edges']}"
            for k, face in enumerate(faces)
        ]
        or ["no faces"],
    )
    return 0


def cmd_scharlemann(args) -> int:
    obj = load_graph(args.file)
    found = find_scharlemann_cycles(obj, args.side)
    report = {"file": args.file, "side": args.side, **found}
    lines = [f"{v['check']} at {v['location']}: {v['detail']}" for v in found["violations"]]
    lines += [f"cycle on pair {c['pair']}: length {c['length']}" for c in found["cycles"]]
    _emit(report, args.json, lines or ["no Scharlemann cycles"])
    return 1 if found["violations"] else 0


def cmd_web_verify(args) -> int:
    web, _ = _web_of(args.file, args.vertices)
    report = web.as_dict()
    _emit(
        report,
        args.json,
        [f"{v['check']} at {v['location']}: {v['detail']}" for v in web.violations]
        or [f"great web on {len(web.vertices)} vertices"],
    )
    return 1 if web.violations else 0


def cmd_web_gamma(args) -> int:
    web, obj = _web_of(args.file, args.vertices)
    if web.violations:
        _emit(
            web.as_dict(),
            args.json,
            [f"{v['check']} at {v['location']}: {v['detail']}" for v in web.violations],
        )
        return 1
    if not isinstance(obj, PairedIntersection):
        raise FormatError("gamma counting needs a paired configuration file")
    gamma = build_gamma(obj, web)
    report = gamma.as_dict()
    _emit(
        report,
        args.json,
        [f"gamma vertices {len(report['vertices'])}, edges {len(report['edges'])}"],
    )
    return 0


def cmd_web_divisibility(args) -> int:
    web, obj = _web_of(args.file, args.vertices)
    if web.violations:
        _emit(
            web.as_dict(),
            args.json,
            [f"{v['check']} at {v['location']}: {v['detail']}" for v in web.violations],
        )
        return 1
    if not isinstance(obj, PairedIntersection):
        raise FormatError("divisibility needs a paired configuration file")
    report = divisibility_report(obj, web)
    ok = report.get("holds", True)
    _emit(report, args.json, [json.dumps(report, sort_keys=True)])
    return 0 if ok else 1


def cmd_web_quota(args) -> int:
    web, _ = _web_of(args.file, args.vertices)
    if web.violations:
        _emit(
            web.as_dict(),
            args.json,
            [f"{v['check']} at {v['location']}: {v['detail']}" for v in web.violations],
        )
        return 1
    report = classify_web(web)
    lines = [f"classified {report['classification']}"]
    if report["quota"] is not None:
        lines.append(f"quota edges: {report['quota']['edges']}")
    _emit(report, args.json, lines)
    return 0


def cmd_web_shared(args) -> int:
    web, _ = _web_of(args.file, args.vertices)
    if web.violations:
        _emit(
            web.as_dict(),
            args.json,
            [f"{v['check']} at {v['location']}: {v['detail']}" for v in web.violations],
        )
        return 1
    report = shared_vertex_analysis(web)
    _emit(report, args.json, [json.dumps(report, sort_keys=True)])
    return 0


def cmd_slopes(args) -> int:
    slopes = feasible_slopes(args.bridge)
    report = {"bridge": args.bridge, "slopes": [list(s) for s in slopes]}
    _emit(
        report,
        args.json,
        [f"{s[0]} {s[1]} {s[2]}" for s in slopes] or ["none"],
    )
    return 0


def cmd_braid_analyze(args) -> int:
    word = parse_word(args.word, strands=args.strands)
    report = {"word": word.display(), **analyze(word).as_dict()}
    _emit(
        report,
        args.json,
        [
            f"strands {report['strands']}, length {report['e']}, "
            f"components {report['components']}"
            + (
                f", genus {report['genus']}, slope {report['candidate_slope']}"
                if report["is_knot"]
                else ""
            )
        ],
    )
    return 0


def cmd_braid_rewrite(args) -> int:
    word = parse_word(args.word, strands=args.strands)
    steps = [word.display()]
    for move in parse_moves(args.moves):
        word = apply_move(word, move)
        steps.append(word.display())
    summary = analyze(word)
    report = {"steps": steps, "result": {"word": word.display(), **summary.as_dict()}}
    _emit(report, args.json, steps)
    return 0


def cmd_braid_exclude3(args) -> int:
    word = parse_word(args.word, strands=args.strands)
    depth = args.depth if args.depth is not None else default_depth()
    report = exclude_three_summands(word, depth=depth)
    _emit(report, args.json, [f"verdict: {report['verdict']}"])
    return 1 if report["verdict"] == "inconclusive" else 0


def _case_flags(args, p: int):
    if args.three_summand is not None:
        parts = [part.strip() for part in args.three_summand.split(",")]
        if len(parts) != 5:
            raise FormatError("--three-summand needs l1,l2,x,p1,p2")
        try:
            l1, l2, x, p1, p2 = (int(part) for part in parts)
        except ValueError as exc:
            raise FormatError(f"--three-summand: {exc}") from exc
        return ThreeSummandCase(l1=l1, l2=l2, x=x, p1=p1, p2=p2)
    return GeneralCase(l=args.l)


def _properties_flag(raw: Optional[str], known) -> tuple[str, ...]:
    if raw is None:
        return tuple(known)
    parts = tuple(part.strip() for part in raw.split(",") if part.strip())
    if not parts:
        raise EnumerationError("--properties needs a comma-separated list")
    return parts


def cmd_enumerate(args) -> int:
    if args.population == "webs":
        cell = {"v": args.v, "p": args.p, "case": _case_flags(args, args.p), "ledger": args.ledger}
        known = WEB_PROPERTIES
    elif args.population == "paired":
        cell = {"p": args.p, "q": args.q, "case": _case_flags(args, args.p)}
        known = PAIRED_PROPERTIES
    else:
        cell = {"n": args.n, "e": args.e}
        if args.depth is not None:
            cell["depth"] = args.depth
        known = BRAID_PROPERTIES
    if args.limit is not None:
        cell["limit"] = args.limit
    spec = SweepSpec(
        target=args.population,
        params={"cells": [cell]},
        properties=_properties_flag(args.properties, known),
        manifest_path=args.manifest,
    )
    manifest = run_property_sweep(spec, workers=args.workers)
    count = manifest["count"]["total"]
    bad = len(manifest["counterexamples"])
    _emit(
        manifest,
        args.json,
        [f"enumerated {count}, counterexamples {bad}"],
    )
    return 1 if bad else 0


def cmd_export_dot(args) -> int:
    obj = load_graph(args.file)
    print(export_dot(obj, args.side))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swt",
        description="Intersection-grid validation, great-web analysis, braid rewriting, and exhaustive sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_json(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        return sp

    sp = with_json(sub.add_parser("validate", help="check one graph file"))
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = with_json(sub.add_parser("faces", help="trace the faces of one side"))
    sp.add_argument("file")
    sp.add_argument("--side", choices=("Q", "P"), default="Q")
    sp.set_defaults(func=cmd_faces)

    sp = with_json(sub.add_parser("scharlemann", help="find Scharlemann cycles"))
    sp.add_argument("file")
    sp.add_argument("--side", choices=("Q", "P"), default="Q")
    sp.set_defaults(func=cmd_scharlemann)

    web = sub.add_parser("web", help="great-web analysis").add_subparsers(
        dest="web_command", required=True
    )
    for name, func in (
        ("verify", cmd_web_verify),
        ("gamma", cmd_web_gamma),
        ("divisibility", cmd_web_divisibility),
        ("quota", cmd_web_quota),
        ("shared", cmd_web_shared),
    ):
        sp = with_json(web.add_parser(name))
        sp.add_argument("file")
        sp.add_argument("--vertices", help="comma-separated web vertices (paired files)")
        sp.set_defaults(func=func)

    sp = with_json(sub.add_parser("slopes", help="feasible lens orders by bridge bound"))
    sp.add_argument("--bridge", type=int, required=True)
    sp.set_defaults(func=cmd_slopes)

    braid = sub.add_parser("braid", help="braid word analysis").add_subparsers(
        dest="braid_command", required=True
    )
    sp = with_json(braid.add_parser("analyze"))
    sp.add_argument("word")
    sp.add_argument("--strands", type=int)
    sp.set_defaults(func=cmd_braid_analyze)
    sp = with_json(braid.add_parser("rewrite"))
    sp.add_argument("word")
    sp.add_argument("--moves", required=True)
    sp.add_argument("--strands", type=int)
    sp.set_defaults(func=cmd_braid_rewrite)
    sp = with_json(braid.add_parser("exclude3"))
    sp.add_argument("word")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--strands", type=int)
    sp.set_defaults(func=cmd_braid_exclude3)

    sp = with_json(sub.add_parser("enumerate", help="run one sweep cell"))
    sp.add_argument("population", choices=("webs", "paired", "braids"))
    sp.add_argument("--v", type=int, help="webs: vertex count")
    sp.add_argument("--p", type=int, help="thick-side intersection count")
    sp.add_argument("--q", type=int, help="paired: thin-side intersection count")
    sp.add_argument("--n", type=int, help="braids: strand count")
    sp.add_argument("--e", type=int, help="braids: word length")
    sp.add_argument("--l", type=int, default=2, help="general-case cycle length")
    sp.add_argument("--three-summand", help="l1,l2,x,p1,p2")
    sp.add_argument("--ledger", choices=("strict", "free"), default="strict")
    sp.add_argument("--depth", type=int, help="braids: screen depth")
    sp.add_argument("--limit", type=int)
    sp.add_argument("--properties", help="comma-separated property names")
    sp.add_argument("--manifest", help="write the manifest to this path")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_enumerate)

    export = sub.add_parser("export", help="export formats").add_subparsers(
        dest="export_command", required=True
    )
    sp = export.add_parser("dot")
    sp.add_argument("file")
    sp.add_argument("--side", choices=("Q", "P"), default="Q")
    sp.set_defaults(func=cmd_export_dot)

    return parser


def _missing_flags(args) -> Optional[str]:
    if getattr(args, "func", None) is not cmd_enumerate:
        return None
    need = {"webs": ("v", "p"), "paired": ("p", "q"), "braids": ("n", "e")}[args.population]
    for flag in need:
        if getattr(args, flag) is None:
            return f"enumerate {args.population} needs --{flag}"
    return None


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    problem = _missing_flags(args)
    if problem is not None:
        print(problem, file=sys.stderr)
        return USAGE_ERROR
    try:
        return args.func(args)
    except (FormatError, WordError, WebError, EnumerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
