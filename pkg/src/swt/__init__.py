"""Surface-web toolkit: intersection grids, great webs, braid words, sweeps."""

from .braid import (
    BraidAnalysis,
    BraidWord,
    WordError,
    analyze,
    apply_move,
    default_depth,
    eliminate_generator,
    exclude_three_summands,
    parse_moves,
    parse_word,
    split_connected_sum,
)
from .enumerator import (
    BRAID_PROPERTIES,
    DICHOTOMY_CELLS,
    PAIRED_PROPERTIES,
    WEB_PROPERTIES,
    EnumerationError,
    PairedResult,
    SweepSpec,
    braid_dichotomy_cell,
    certified_webs,
    enumerate_paired,
    enumerate_webs,
    manifest_canonical_bytes,
    patch_canonical_key,
    positive_contents,
    run_property_sweep,
)
from .surface import (
    Arc,
    Face,
    FormatError,
    GeneralCase,
    PairedIntersection,
    ThreeSummandCase,
    WebPatch,
    case_from_dict,
    euler_characteristics,
    export_dot,
    find_scharlemann_cycles,
    graph_from_dict,
    graph_to_dict,
    load_graph,
    mirror,
    trace_faces,
    trace_lambda_path,
    validate,
)
from .webs import (
    GammaGraph,
    GreatWeb,
    WebError,
    build_gamma,
    classify_web,
    decompose_regions,
    divisibility_report,
    feasible_slopes,
    find_full_quota,
    shared_vertex_analysis,
    shared_vertex_identity,
    verify_divisibility,
    verify_great_web,
)

__all__ = [name for name in dir() if not name.startswith("_")]
