"""Casorati curvature inequality verification for Riemannian maps and submersions."""

from .jets import Jet2, eval_jet2
from .geometry import (
    MetricChart,
    CurvaturePoint,
    OrthoFrame,
    chart,
    christoffel,
    riemann,
    gram_schmidt,
    scalar_curvature_of_frame,
    normalized_scalar_curvature,
    mixed_scalar,
)
from .quaternionic import (
    QuaternionicStructure,
    QSFOracle,
    JDecomposition,
    check_quaternionic_structure,
    decompose_J,
)
from .maps import (
    SmoothMap,
    SceneSplit,
    FundamentalTensor,
    differential,
    second_fundamental_form,
    oneill_T,
    oneill_A,
    gauss_residual_map,
    gauss_residual_submersion,
)
from .casorati import (
    CasoratiInput,
    HyperplaneExtrema,
    TripathiInstance,
    casorati,
    casorati_subspace,
    hyperplane_extrema,
    delta_casorati,
    tripathi_minimize,
    tripathi_minimize_numeric,
)
from .inequalities import (
    TheoremReport,
    EqualityDiagnostics,
    MapSceneData,
    SubmersionSceneData,
    algebraic_gap,
    check_map_theorem,
    check_vertical_theorem,
    check_horizontal_theorem,
    check_combined_theorem,
    equality_diagnostics,
)
from .scenes import (
    Scenario,
    RunReport,
    load_scenario,
    parse_scenario,
    evaluate_scenario,
    validate_scenario,
    builtin_names,
    builtin_scenario,
)

__all__ = [
    "Jet2",
    "eval_jet2",
    "MetricChart",
    "CurvaturePoint",
    "OrthoFrame",
    "chart",
    "christoffel",
    "riemann",
    "gram_schmidt",
    "scalar_curvature_of_frame",
    "normalized_scalar_curvature",
    "mixed_scalar",
    "QuaternionicStructure",
    "QSFOracle",
    "JDecomposition",
    "check_quaternionic_structure",
    "decompose_J",
    "SmoothMap",
    "SceneSplit",
    "FundamentalTensor",
    "differential",
    "second_fundamental_form",
    "oneill_T",
    "oneill_A",
    "gauss_residual_map",
    "gauss_residual_submersion",
    "CasoratiInput",
    "HyperplaneExtrema",
    "TripathiInstance",
    "casorati",
    "casorati_subspace",
    "hyperplane_extrema",
    "delta_casorati",
    "tripathi_minimize",
    "tripathi_minimize_numeric",
    "TheoremReport",
    "EqualityDiagnostics",
    "MapSceneData",
    "SubmersionSceneData",
    "algebraic_gap",
    "check_map_theorem",
    "check_vertical_theorem",
    "check_horizontal_theorem",
    "check_combined_theorem",
    "equality_diagnostics",
    "Scenario",
    "RunReport",
    "load_scenario",
    "parse_scenario",
    "evaluate_scenario",
    "validate_scenario",
    "builtin_names",
    "builtin_scenario",
]
