"""Measured Reeb graphs, circulation functions and freezing invariants
for simple Morse functions on closed oriented surfaces with area."""

from .advect import (
    AreaPreservingMap,
    GridProfile,
    SinProfile,
    apply_map,
    hamiltonian_flow_map,
    map_from_dict,
    shear_x,
    shear_y,
    simplicial_automorphism,
)
from .circulation import (
    AxiomReport,
    CirculationGraph,
    CirculationSpace,
    check_circulation_axioms,
    circulation_function,
    primitive_cochain,
    solve_circulations,
    vorticity_residual,
    whitney_cycle_integral,
)
from .equivalence import (
    Tolerances,
    Verdict,
    compare_cosets,
    compare_functions,
)
from .errors import (
    DegenerateSaddle,
    DifferentMesh,
    DomainMismatch,
    DuplicateCriticalValue,
    GenusTooSmall,
    HitsVertex,
    IllConditionedFit,
    InsufficientSamples,
    InternalSweepError,
    MissingCochain,
    NoCirculation,
    NoLoops,
    NotClosed,
    NotConnected,
    NotHomologous,
    NotOrientable,
    NotSimple,
    NotZeroMean,
    OutOfRange,
    ParseError,
    ReebflowError,
    ZeroArea,
)
from .freezing import (
    FrozenData,
    HomologyBasis,
    PantsColoring,
    ReducedEdge,
    ReducedGraph,
    ReducedVertex,
    chain_area_between,
    cycle_class,
    edge_homology_classes,
    freeze,
    half_twists,
    homology_basis,
    pants_coloring,
    reduced_graph,
    snap_cycle,
)
from .invariants import (
    IsoResult,
    SaddleFit,
    compatible,
    edge_moments,
    fit_saddle,
    global_moments,
    graphs_isomorphic,
    invariants_to_csv,
    period_function,
)
from .mesh import (
    CriticalPoint,
    SurfaceReport,
    TriMeshField,
    classify_vertices,
    dump_mesh_json,
    dump_mesh_off,
    ensure_simple,
    load_mesh,
    validate,
)
from .meshes import (
    flat_torus,
    flat_torus_cochain,
    genus2_pretzel,
    genus2_theta,
    grid_torus,
    half_twist_permutation,
    octasphere,
    quarter_turn_permutation,
    splice_tube,
    torus_test_field,
    translation_permutation,
    two_peak_torus,
)
from .reeb import (
    LevelCycle,
    MeasuredReebGraph,
    ReebEdge,
    ReebVertex,
    build_reeb,
    check_graph,
    graph_to_dict,
    graph_to_dot,
    graph_to_json,
    interior_level_cycle,
    level_cycle,
    measure_at,
)
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "AreaPreservingMap",
    "AxiomReport",
    "CirculationGraph",
    "CirculationSpace",
    "CriticalPoint",
    "DegenerateSaddle",
    "DifferentMesh",
    "DomainMismatch",
    "DuplicateCriticalValue",
    "FrozenData",
    "GenusTooSmall",
    "GridProfile",
    "HitsVertex",
    "HomologyBasis",
    "IllConditionedFit",
    "InsufficientSamples",
    "InternalSweepError",
    "IsoResult",
    "LevelCycle",
    "MeasuredReebGraph",
    "MissingCochain",
    "NoCirculation",
    "NoLoops",
    "NotClosed",
    "NotConnected",
    "NotHomologous",
    "NotOrientable",
    "NotSimple",
    "NotZeroMean",
    "OutOfRange",
    "PantsColoring",
    "ParseError",
    "ReducedGraph",
    "ReebEdge",
    "ReebVertex",
    "ReebflowError",
    "SaddleFit",
    "SinProfile",
    "SurfaceReport",
    "Tolerances",
    "TriMeshField",
    "Verdict",
    "ZeroArea",
    "apply_map",
    "build_reeb",
    "chain_area_between",
    "check_circulation_axioms",
    "check_graph",
    "circulation_function",
    "classify_vertices",
    "compare_cosets",
    "compare_functions",
    "compatible",
    "cycle_class",
    "dump_mesh_json",
    "dump_mesh_off",
    "edge_moments",
    "ensure_simple",
    "fit_saddle",
    "freeze",
    "global_moments",
    "graph_to_dict",
    "graph_to_dot",
    "graph_to_json",
    "graphs_isomorphic",
    "hamiltonian_flow_map",
    "homology_basis",
    "interior_level_cycle",
    "invariants_to_csv",
    "level_cycle",
    "load_mesh",
    "map_from_dict",
    "measure_at",
    "period_function",
    "primitive_cochain",
    "reduce_graph",
    "run_selftest",
    "shear_x",
    "shear_y",
    "simplicial_automorphism",
    "snap_cycle",
    "solve_circulations",
    "validate",
    "vorticity_residual",
    "whitney_cycle_integral",
]
