"""Scenario model: parsing, validation, builtin registry and point evaluation.

A scenario is a single JSON document (version 1).  Chart scenes declare
source/target charts, the map expressions and evaluation points;
pointwise scenes declare explicit frames, tensors and the structure
matrices.  Unknown keys are rejected, seeds are mandatory for sampled
points, and every numeric knob is echoed into the run report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geometry, maps
from .casorati import CasoratiInput
from .errors import (
    CasoratiqError,
    ConfigurationError,
    SceneValidationError,
)
from .expressions import compile_expression
from .geometry import MetricChart, OrthoFrame
from .inequalities import (
    MapSceneData,
    SubmersionSceneData,
    THEOREM_IDS,
    check_combined_theorem,
    check_horizontal_theorem,
    check_map_theorem,
    check_vertical_theorem,
    space_form_residual_from_tensor,
)
from .quaternionic import (
    QuaternionicStructure,
    QSFOracle,
    check_quaternionic_structure,
    structure as structure_registry,
)

__all__ = [
    "Scenario",
    "PointResult",
    "RunReport",
    "load_scenario",
    "parse_scenario",
    "validate_scenario",
    "evaluate_scenario",
    "builtin_names",
    "builtin_scenario",
    "random_pointwise_submersion",
]

_FAMILIES = {
    "map": ("map_3_2", "lemma_map_3_1"),
    "vertical": ("vertical_5_2", "lemma_vertical_5_1"),
    "horizontal": ("horizontal_6_2", "lemma_horizontal_6_1"),
    "combined": ("combined_7_2", "lemma_combined_7_1"),
}

_TOP_KEYS_COMMON = {
    "version",
    "name",
    "mode",
    "theorems",
    "c",
    "deltaN",
    "tolerances",
    "points",
}
_TOP_KEYS_CHART = _TOP_KEYS_COMMON | {"map", "structure", "fiber_curvature"}
_TOP_KEYS_POINTWISE = (_TOP_KEYS_COMMON - {"points"}) | {
    "dim",
    "kind",
    "structure",
    "metric",
    "frames",
    "tensors",
}


def _reject_unknown(obj: dict, allowed: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise SceneValidationError(
            f"unknown key(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}"
        )


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SceneValidationError(f"missing required key {key!r} in {where}")
    return obj[key]


def _parse_delta_n(raw) -> tuple[str, Optional[float]]:
    if raw is None:
        return "unset", None
    if not isinstance(raw, str):
        raise SceneValidationError('deltaN must be "zero" or "user:<value>"')
    if raw == "zero":
        return raw, 0.0
    if raw.startswith("user:"):
        try:
            return raw, float(raw[5:])
        except ValueError as e:
            raise SceneValidationError(f"bad deltaN value in {raw!r}") from e
    raise SceneValidationError(f'deltaN must be "zero" or "user:<value>", got {raw!r}')


def _chart_from_spec(spec, where: str) -> MetricChart:
    if isinstance(spec, str):
        try:
            return geometry.chart(spec)
        except KeyError as e:
            raise SceneValidationError(str(e)) from e
    if not isinstance(spec, dict):
        raise SceneValidationError(f"{where} must be a chart name or object")
    _reject_unknown(spec, {"dim", "box", "metric", "name"}, where)
    dim = int(_require(spec, "dim", where))
    box = _require(spec, "box", where)
    if len(box) != dim or any(len(iv) != 2 for iv in box):
        raise SceneValidationError(f"{where}.box must be {dim} [lo, hi] pairs")
    rows = _require(spec, "metric", where)
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise SceneValidationError(f"{where}.metric must be a {dim}x{dim} expression matrix")
    compiled = [[compile_expression(e) for e in row] for row in rows]

    def g(coords, _compiled=compiled):
        return [[entry(coords) for entry in row] for row in _compiled]

    return MetricChart(
        dim,
        tuple((float(lo), float(hi)) for lo, hi in box),
        g,
        name=str(spec.get("name", "custom")),
    )


def _structure_from_spec(spec, dim: int, where: str) -> QuaternionicStructure:
    if not isinstance(spec, dict):
        raise SceneValidationError(f"{where} must be an object")
    _reject_unknown(spec, {"on", "name", "matrices"}, where)
    if ("name" in spec) == ("matrices" in spec):
        raise SceneValidationError(f"{where} needs exactly one of name / matrices")
    if "name" in spec:
        try:
            st = structure_registry(spec["name"])
        except KeyError as e:
            raise SceneValidationError(str(e)) from e
    else:
        st = QuaternionicStructure.from_matrices(np.asarray(spec["matrices"], float))
    if st.dim != dim:
        raise SceneValidationError(
            f"{where}: structure dimension {st.dim} does not match space dimension {dim}"
        )
    return st


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario, ready for validation and evaluation."""

    name: str
    mode: str  # "chart" | "pointwise"
    c: float
    delta_n_label: str
    delta_n: Optional[float]
    theorems: tuple[str, ...]
    tolerances: dict
    raw: dict
    # chart mode
    smap: Optional[maps.SmoothMap] = None
    structure: Optional[QuaternionicStructure] = None
    structure_on: str = ""
    fiber_kappa: Optional[Callable] = None
    points: tuple = ()
    sample_spec: Optional[dict] = None
    # pointwise mode
    dim: int = 0
    kind: str = ""
    g: Optional[np.ndarray] = None
    frames: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)

    def evaluation_points(self) -> np.ndarray:
        if self.mode != "chart":
            return np.zeros((1, 0))
        if self.sample_spec is not None:
            rng = np.random.default_rng(int(self.sample_spec["seed"]))
            box = self.sample_spec.get("box")
            if box is None:
                box = self.smap.source.domain
            lo = np.array([b[0] for b in box])
            hi = np.array([b[1] for b in box])
            count = int(self.sample_spec["count"])
            return lo + (hi - lo) * rng.random((count, len(box)))
        return np.asarray(self.points, dtype=float)


def parse_scenario(doc: dict, name_hint: str = "") -> Scenario:
    if not isinstance(doc, dict):
        raise SceneValidationError("scenario document must be a JSON object")
    version = doc.get("version")
    if version != 1:
        raise SceneValidationError(f"unsupported scenario version {version!r}")
    mode = _require(doc, "mode", "scenario")
    if mode not in ("chart", "pointwise"):
        raise SceneValidationError(f"mode must be 'chart' or 'pointwise', got {mode!r}")
    name = str(doc.get("name", name_hint or "unnamed"))
    theorems = tuple(_require(doc, "theorems", "scenario"))
    for t in theorems:
        if t not in THEOREM_IDS:
            raise SceneValidationError(f"unknown theorem id {t!r}; known: {THEOREM_IDS}")
    c = float(_require(doc, "c", "scenario"))
    delta_label, delta_n = _parse_delta_n(doc.get("deltaN"))
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise SceneValidationError("tolerances must be an object")
    _reject_unknown(tolerances, {"equality", "residual"}, "tolerances")

    if mode == "chart":
        _reject_unknown(doc, _TOP_KEYS_CHART, "scenario")
        mspec = _require(doc, "map", "scenario")
        _reject_unknown(
            mspec, {"source", "target", "exprs", "map_mode", "rank"}, "map"
        )
        source = _chart_from_spec(_require(mspec, "source", "map"), "map.source")
        target = _chart_from_spec(_require(mspec, "target", "map"), "map.target")
        exprs = [compile_expression(e) for e in _require(mspec, "exprs", "map")]
        if len(exprs) != target.dim:
            raise SceneValidationError(
                f"map has {len(exprs)} component expressions, target dimension is {target.dim}"
            )

        def F(coords, _exprs=exprs):
            return [e(coords) for e in _exprs]

        smap = maps.SmoothMap(
            source,
            target,
            F,
            str(_require(mspec, "map_mode", "map")),
            int(_require(mspec, "rank", "map")),
            name=name,
        )
        structure = None
        structure_on = ""
        if "structure" in doc:
            structure_on = str(_require(doc["structure"], "on", "structure"))
            if structure_on not in ("source", "target"):
                raise SceneValidationError("structure.on must be 'source' or 'target'")
            sdim = source.dim if structure_on == "source" else target.dim
            structure = _structure_from_spec(doc["structure"], sdim, "structure")
        fiber_kappa = None
        if "fiber_curvature" in doc:
            fspec = doc["fiber_curvature"]
            _reject_unknown(fspec, {"space_form_kappa"}, "fiber_curvature")
            fiber_kappa = compile_expression(_require(fspec, "space_form_kappa", "fiber_curvature"))
        pts = _require(doc, "points", "scenario")
        sample_spec = None
        points = ()
        if isinstance(pts, dict):
            _reject_unknown(pts, {"sample"}, "points")
            sample = _require(pts, "sample", "points")
            _reject_unknown(sample, {"count", "seed", "box"}, "points.sample")
            if "seed" not in sample:
                raise SceneValidationError("sampled points require an explicit seed")
            _require(sample, "count", "points.sample")
            sample_spec = sample
        else:
            points = tuple(tuple(float(v) for v in p) for p in pts)
            if not points:
                raise SceneValidationError("points list is empty")
        return Scenario(
            name=name,
            mode=mode,
            c=c,
            delta_n_label=delta_label,
            delta_n=delta_n,
            theorems=theorems,
            tolerances=dict(tolerances),
            raw=doc,
            smap=smap,
            structure=structure,
            structure_on=structure_on,
            fiber_kappa=fiber_kappa,
            points=points,
            sample_spec=sample_spec,
        )

    _reject_unknown(doc, _TOP_KEYS_POINTWISE, "scenario")
    dim = int(_require(doc, "dim", "scenario"))
    kind = str(_require(doc, "kind", "scenario"))
    if kind not in ("submersion", "map"):
        raise SceneValidationError("pointwise kind must be 'submersion' or 'map'")
    g = np.asarray(doc.get("metric", np.eye(dim)), dtype=float)
    if g.shape != (dim, dim):
        raise SceneValidationError(f"pointwise metric has shape {g.shape}")
    structure = _structure_from_spec(_require(doc, "structure", "scenario"), dim, "structure")
    frames_spec = _require(doc, "frames", "scenario")
    tensors_spec = _require(doc, "tensors", "scenario")
    if kind == "submersion":
        _reject_unknown(frames_spec, {"horizontal", "vertical"}, "frames")
        _reject_unknown(tensors_spec, {"T", "A"}, "tensors")
    else:
        _reject_unknown(frames_spec, {"range", "range_perp"}, "frames")
        _reject_unknown(tensors_spec, {"B"}, "tensors")
    frames = {k: np.asarray(v, dtype=float) for k, v in frames_spec.items()}
    tensors = {k: np.asarray(v, dtype=float) for k, v in tensors_spec.items()}
    return Scenario(
        name=name,
        mode=mode,
        c=c,
        delta_n_label=delta_label,
        delta_n=delta_n,
        theorems=theorems,
        tolerances=dict(tolerances),
        raw=doc,
        dim=dim,
        kind=kind,
        g=g,
        frames=frames,
        tensors=tensors,
        structure=structure,
    )


def load_scenario(path_or_name: str) -> Scenario:
    """Load from a JSON file path, or fall back to the builtin registry."""
    if path_or_name in _BUILTINS:
        return builtin_scenario(path_or_name)
    try:
        with open(path_or_name, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise SceneValidationError(f"cannot read scenario {path_or_name!r}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneValidationError(
            f"JSON parse error at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    return parse_scenario(doc, name_hint=path_or_name)


# -- evaluation --------------------------------------------------------------


@dataclass
class PointResult:
    index: int
    point: list
    map_point: Optional[list]
    validation: dict
    gauss_residuals: Optional[dict]
    reports: list
    errors: list

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "point": self.point,
            "map_point": self.map_point,
            "validation": self.validation,
            "gauss_residuals": self.gauss_residuals,
            "reports": [r.as_dict() for r in self.reports],
            "errors": self.errors,
        }


@dataclass
class RunReport:
    scenario: dict
    points: list  # of PointResult
    aggregate: dict
    elapsed_seconds: float = 0.0  # never serialized: reports are byte-stable

    def as_dict(self) -> dict:
        return {
            "format_version": 1,
            "scenario": self.scenario,
            "points": [p.as_dict() for p in self.points],
            "aggregate": self.aggregate,
        }

    def min_slack(self) -> Optional[float]:
        slacks = [
            r.slack for p in self.points for r in p.reports
        ]
        return min(slacks) if slacks else None

    def has_violation(self) -> bool:
        return any(
            r.equality_verdict == "violated" for p in self.points for r in p.reports
        )


def _requested_families(theorems) -> dict[str, list[str]]:
    out = {}
    for fam, ids in _FAMILIES.items():
        hits = [t for t in theorems if t in ids]
        if hits:
            out[fam] = hits
    return out


def _bracket_residual(smap, x, split, A: maps.FundamentalTensor) -> float:
    br = maps.vertical_bracket(smap, x, split)
    g1 = A.metric
    diff = br - 2.0 * A.vectors
    worst = 0.0
    for i in range(diff.shape[0]):
        for j in range(diff.shape[1]):
            worst = max(worst, float(np.sqrt(max(diff[i, j] @ g1 @ diff[i, j], 0.0))))
    return worst


def _evaluate_chart_point(scn: Scenario, x: np.ndarray):
    smap = scn.smap
    split = maps.differential(smap, x)
    validation = {
        "isometry_residual": split.isometry_residual,
        "kernel_residual": split.kernel_residual(),
    }
    reports = []
    gauss = None
    families = _requested_families(scn.theorems)

    J = None
    if scn.structure is not None:
        g_for_structure = (
            smap.source.metric_at(x)
            if scn.structure_on == "source"
            else smap.target.metric_at(split.y)
        )
        J = scn.structure.at(x if scn.structure_on == "source" else split.y)
        srep = check_quaternionic_structure(J, g_for_structure)
        validation["structure"] = {
            "passed": srep.passed,
            "worst": srep.worst,
            "failed_identities": srep.failed_identities(),
        }
        if not srep.passed:
            raise SceneValidationError(
                "quaternionic structure invalid: " + ", ".join(srep.failed_identities())
            )

    if smap.mode == maps.RIEMANNIAN_SUBMERSION:
        T = maps.oneill_T(smap, x, split)
        A = maps.oneill_A(smap, x, split)
        validation["T_symmetry_residual"] = T.symmetry_residual()
        validation["A_skew_residual"] = A.symmetry_residual()
        kappa = None
        if scn.fiber_kappa is not None:
            kappa = float(scn.fiber_kappa([float(v) for v in x]))
        res = maps.gauss_residual_submersion(smap, x, split, T, A, fiber_kappa=kappa)
        gauss = res.as_dict()
        residual_tol = float(scn.tolerances.get("residual", 1e-6))
        worst_res = max(res.vertical, res.horizontal, res.mixed)
        if worst_res > residual_tol:
            raise SceneValidationError(
                f"Gauss residual {worst_res:.3e} exceeds the scene tolerance "
                f"{residual_tol:.1e}"
            )
        bracket = _bracket_residual(smap, x, split, A)
        validation["bracket_verticality_residual"] = bracket
        if families:
            if J is None or scn.structure_on != "source":
                raise ConfigurationError(
                    "submersion theorems need a quaternionic structure on the source"
                )
            R1 = geometry.riemann(smap.source, x)
            g1 = smap.source.metric_at(x)
            frame = np.vstack([split.horizontal.vectors, split.vertical.vectors])
            sf_res = space_form_residual_from_tensor(
                R1.riemann, QSFOracle(scn.c, J, g1), frame
            )
            data = SubmersionSceneData(
                T=CasoratiInput(T.coeffs, kind="symmetric"),
                A=CasoratiInput(A.coeffs, kind="skew"),
                horizontal=split.horizontal,
                vertical=split.vertical,
                g1=g1,
                J1=J,
                c=scn.c,
                ambient_quad=R1.quad,
                deltaN=scn.delta_n,
                chartlike=True,
                space_form_residual=sf_res,
                equality_tol=scn.tolerances.get("equality"),
                bracket_residual=bracket,
            )
            if "vertical" in families:
                reports += [
                    r for r in check_vertical_theorem(data)
                    if r.theorem_id in families["vertical"]
                ]
            if "horizontal" in families:
                reports += [
                    r for r in check_horizontal_theorem(data)
                    if r.theorem_id in families["horizontal"]
                ]
            if "combined" in families:
                reports += [
                    r for r in check_combined_theorem(data)
                    if r.theorem_id in families["combined"]
                ]
            if "map" in families:
                raise ConfigurationError("map theorems do not apply to a submersion scene")
    else:
        B = maps.second_fundamental_form(smap, x, split)
        validation["B_symmetry_residual"] = B.symmetry_residual()
        gauss = {"map": maps.gauss_residual_map(smap, x, split, B)}
        residual_tol = float(scn.tolerances.get("residual", 1e-6))
        if gauss["map"] > residual_tol:
            raise SceneValidationError(
                f"Gauss residual {gauss['map']:.3e} exceeds the scene tolerance "
                f"{residual_tol:.1e}"
            )
        if families:
            bad = [f for f in families if f != "map"]
            if bad:
                raise ConfigurationError(
                    f"submersion theorems {bad} do not apply to a map scene"
                )
            if J is None or scn.structure_on != "target":
                raise ConfigurationError(
                    "map theorems need a quaternionic structure on the target"
                )
            R2 = geometry.riemann(smap.target, split.y)
            g2 = smap.target.metric_at(split.y)
            frame = np.vstack([split.range.vectors, split.range_perp.vectors])
            sf_res = space_form_residual_from_tensor(
                R2.riemann, QSFOracle(scn.c, J, g2), frame
            )
            data = MapSceneData(
                B=CasoratiInput(B.coeffs, kind="symmetric"),
                range_frame=split.range,
                range_perp_frame=split.range_perp,
                g2=g2,
                J2=J,
                c=scn.c,
                ambient_quad=R2.quad,
                chartlike=True,
                space_form_residual=sf_res,
                equality_tol=scn.tolerances.get("equality"),
            )
            reports += [
                r for r in check_map_theorem(data) if r.theorem_id in families["map"]
            ]
    return split, validation, gauss, reports


def _evaluate_pointwise(scn: Scenario):
    g = scn.g
    J = scn.structure.at()
    srep = check_quaternionic_structure(J, g)
    validation = {
        "structure": {
            "passed": srep.passed,
            "worst": srep.worst,
            "failed_identities": srep.failed_identities(),
        }
    }
    if not srep.passed:
        raise SceneValidationError(
            "quaternionic structure invalid: " + ", ".join(srep.failed_identities())
        )
    oracle = QSFOracle(scn.c, J, g)
    families = _requested_families(scn.theorems)
    reports = []
    if scn.kind == "submersion":
        hor = OrthoFrame(scn.frames["horizontal"], g)
        vert = OrthoFrame(scn.frames["vertical"], g)
        for fr, tag in ((hor, "horizontal"), (vert, "vertical")):
            res = fr.orthonormality_residual()
            validation[f"{tag}_frame_residual"] = res
            if res > 1e-10:
                raise SceneValidationError(f"{tag} frame is not orthonormal ({res:.3e})")
        cross = float(np.abs(hor.vectors @ g @ vert.vectors.T).max()) if vert.k else 0.0
        validation["cross_orthogonality"] = cross
        if cross > 1e-10:
            raise SceneValidationError(f"frames are not mutually orthogonal ({cross:.3e})")
        T = scn.tensors.get("T")
        A = scn.tensors.get("A")
        data = SubmersionSceneData(
            T=CasoratiInput(T, kind="symmetric") if T is not None else None,
            A=CasoratiInput(A, kind="skew") if A is not None else None,
            horizontal=hor,
            vertical=vert,
            g1=g,
            J1=J,
            c=scn.c,
            ambient_quad=oracle.quad,
            deltaN=scn.delta_n,
            equality_tol=scn.tolerances.get("equality"),
        )
        if "map" in families:
            raise ConfigurationError("map theorems do not apply to a submersion scene")
        if "vertical" in families:
            reports += [
                r for r in check_vertical_theorem(data)
                if r.theorem_id in families["vertical"]
            ]
        if "horizontal" in families:
            reports += [
                r for r in check_horizontal_theorem(data)
                if r.theorem_id in families["horizontal"]
            ]
        if "combined" in families:
            reports += [
                r for r in check_combined_theorem(data)
                if r.theorem_id in families["combined"]
            ]
    else:
        rng_frame = OrthoFrame(scn.frames["range"], g)
        perp = OrthoFrame(scn.frames["range_perp"], g)
        for fr, tag in ((rng_frame, "range"), (perp, "range_perp")):
            res = fr.orthonormality_residual()
            validation[f"{tag}_frame_residual"] = res
            if res > 1e-10:
                raise SceneValidationError(f"{tag} frame is not orthonormal ({res:.3e})")
        data = MapSceneData(
            B=CasoratiInput(scn.tensors["B"], kind="symmetric"),
            range_frame=rng_frame,
            range_perp_frame=perp,
            g2=g,
            J2=J,
            c=scn.c,
            ambient_quad=oracle.quad,
            equality_tol=scn.tolerances.get("equality"),
        )
        bad = [f for f in families if f != "map"]
        if bad:
            raise ConfigurationError(f"theorems {bad} do not apply to a map scene")
        if "map" in families:
            reports += [
                r for r in check_map_theorem(data) if r.theorem_id in families["map"]
            ]
    return validation, reports


def validate_scenario(scn: Scenario) -> list[PointResult]:
    """Run all scene invariants without theorem evaluation."""
    import dataclasses

    results = []
    if scn.mode == "pointwise":
        stripped = dataclasses.replace(scn, theorems=())
        try:
            validation, _ = _evaluate_pointwise(stripped)
            errors = []
        except CasoratiqError as e:
            validation, errors = {}, [str(e)]
        results.append(PointResult(0, [], None, validation, None, [], errors))
        return results
    for i, x in enumerate(scn.evaluation_points()):
        try:
            scn.smap.source.metric_at(x)
            split = maps.differential(scn.smap, x)
            scn.smap.target.metric_at(split.y)
            validation = {
                "isometry_residual": split.isometry_residual,
                "kernel_residual": split.kernel_residual(),
            }
            if scn.structure is not None:
                g_for = (
                    scn.smap.source.metric_at(x)
                    if scn.structure_on == "source"
                    else scn.smap.target.metric_at(split.y)
                )
                srep = check_quaternionic_structure(
                    scn.structure.at(x if scn.structure_on == "source" else split.y), g_for
                )
                validation["structure"] = {
                    "passed": srep.passed,
                    "worst": srep.worst,
                    "failed_identities": srep.failed_identities(),
                }
                if not srep.passed:
                    raise SceneValidationError(
                        "quaternionic structure invalid: "
                        + ", ".join(srep.failed_identities())
                    )
            errors = []
            ypt = split.y.tolist()
        except CasoratiqError as e:
            validation, errors, ypt = {}, [str(e)], None
        results.append(
            PointResult(i, [float(v) for v in x], ypt, validation, None, [], errors)
        )
    return results


def evaluate_scenario(scn: Scenario, strict: bool = False) -> RunReport:
    """Evaluate every requested theorem at every point of the scenario."""
    import time

    start = time.perf_counter()
    points: list[PointResult] = []
    if scn.mode == "pointwise":
        try:
            validation, reports = _evaluate_pointwise(scn)
            errors = []
        except CasoratiqError as e:
            if strict:
                raise
            validation, reports, errors = {}, [], [str(e)]
        points.append(PointResult(0, [], None, validation, None, reports, errors))
    else:
        for i, x in enumerate(scn.evaluation_points()):
            try:
                split, validation, gauss, reports = _evaluate_chart_point(scn, x)
                points.append(
                    PointResult(
                        i, [float(v) for v in x], split.y.tolist(), validation, gauss,
                        reports, [],
                    )
                )
            except CasoratiqError as e:
                if strict:
                    raise
                points.append(
                    PointResult(i, [float(v) for v in x], None, {}, None, [], [str(e)])
                )

    aggregate = _aggregate(points)
    scenario_info = {
        "name": scn.name,
        "mode": scn.mode,
        "c": scn.c,
        "deltaN": scn.delta_n_label,
        "theorems": list(scn.theorems),
        "tolerances": scn.tolerances,
    }
    if scn.sample_spec is not None:
        scenario_info["sample"] = {
            "count": int(scn.sample_spec["count"]),
            "seed": int(scn.sample_spec["seed"]),
        }
    return RunReport(
        scenario=scenario_info,
        points=points,
        aggregate=aggregate,
        elapsed_seconds=time.perf_counter() - start,
    )


def _aggregate(points) -> dict:
    min_slack: dict[str, float] = {}
    tally: dict[str, int] = {}
    residual_max: dict[str, float] = {}
    n_errors = 0
    for p in points:
        n_errors += len(p.errors)
        for r in p.reports:
            key = f"{r.theorem_id}/{r.variant}"
            if key not in min_slack or r.slack < min_slack[key]:
                min_slack[key] = r.slack
            tally[r.equality_verdict] = tally.get(r.equality_verdict, 0) + 1
        if p.gauss_residuals:
            for k, v in p.gauss_residuals.items():
                if isinstance(v, bool):
                    continue
                if k not in residual_max or v > residual_max[k]:
                    residual_max[k] = v
    return {
        "min_slack": dict(sorted(min_slack.items())),
        "equality_tally": dict(sorted(tally.items())),
        "gauss_residual_max": dict(sorted(residual_max.items())),
        "point_errors": n_errors,
    }


# -- builtin registry --------------------------------------------------------


def _identity_metric_exprs(n: int) -> list[list[str]]:
    return [["1" if i == j else "0" for j in range(n)] for i in range(n)]


def _builtin_product_projection() -> dict:
    return {
        "version": 1,
        "name": "product-projection:8to4",
        "mode": "chart",
        "map": {
            "source": "flat:8",
            "target": "flat:4",
            "exprs": ["x1", "x2", "x3", "x4"],
            "map_mode": "riemannian_submersion",
            "rank": 4,
        },
        "structure": {"on": "source", "name": "quat-flat:2"},
        "fiber_curvature": {"space_form_kappa": "0"},
        "c": 0.0,
        "deltaN": "zero",
        "points": {"sample": {"count": 4, "seed": 2024, "box": [[-1.0, 1.0]] * 8}},
        "theorems": [
            "vertical_5_2",
            "horizontal_6_2",
            "combined_7_2",
            "lemma_vertical_5_1",
            "lemma_horizontal_6_1",
            "lemma_combined_7_1",
        ],
    }


def _builtin_radial() -> dict:
    return {
        "version": 1,
        "name": "radial:4",
        "mode": "chart",
        "map": {
            "source": {
                "dim": 4,
                "box": [[0.05, 3.0]] * 4,
                "metric": _identity_metric_exprs(4),
                "name": "flat-positive:4",
            },
            "target": {
                "dim": 1,
                "box": [[0.05, 6.0]],
                "metric": [["1"]],
                "name": "flat-line",
            },
            "exprs": ["norm(x)"],
            "map_mode": "riemannian_submersion",
            "rank": 1,
        },
        "structure": {"on": "source", "name": "quat-flat:1"},
        "fiber_curvature": {"space_form_kappa": "1/(norm(x)^2)"},
        "c": 0.0,
        "deltaN": "zero",
        "points": [[0.25, 0.25, 0.25, 0.25], [0.5, 0.5, 0.5, 0.5], [1.0, 1.0, 1.0, 1.0]],
        "theorems": ["vertical_5_2", "lemma_vertical_5_1"],
    }


def _builtin_paraboloid() -> dict:
    return {
        "version": 1,
        "name": "paraboloid-vertex",
        "mode": "chart",
        "map": {
            "source": {
                "dim": 2,
                "box": [[-2.0, 2.0], [-2.0, 2.0]],
                "metric": [["1+x1^2", "x1*x2"], ["x1*x2", "1+x2^2"]],
                "name": "paraboloid-graph",
            },
            "target": "flat:3",
            "exprs": ["x1", "x2", "0.5*(x1^2+x2^2)"],
            "map_mode": "riemannian_map",
            "rank": 2,
        },
        "c": 0.0,
        "points": [[0.0, 0.0], [0.4, -0.3], [1.0, 0.7]],
        "theorems": [],
    }


def _builtin_flat_embedding_2in4() -> dict:
    return {
        "version": 1,
        "name": "flat-embedding:2in4",
        "mode": "chart",
        "map": {
            "source": "flat:2",
            "target": "flat:4",
            "exprs": ["x1", "x2", "0", "0"],
            "map_mode": "riemannian_map",
            "rank": 2,
        },
        "c": 0.0,
        "points": [[0.0, 0.0], [0.7, -0.4], [-1.2, 0.9]],
        "theorems": [],
    }


def _builtin_flat_embedding_4in8() -> dict:
    return {
        "version": 1,
        "name": "flat-embedding:4in8",
        "mode": "chart",
        "map": {
            "source": "flat:4",
            "target": "flat:8",
            "exprs": ["x1", "x2", "x3", "x4", "0", "0", "0", "0"],
            "map_mode": "riemannian_map",
            "rank": 4,
        },
        "structure": {"on": "target", "name": "quat-flat:2"},
        "c": 0.0,
        "points": [[0.1, 0.2, -0.3, 0.4], [0.0, 0.0, 0.0, 0.0]],
        "theorems": ["map_3_2", "lemma_map_3_1"],
    }


def _builtin_hopf() -> dict:
    return {
        "version": 1,
        "name": "hopf-radial:4to3",
        "mode": "chart",
        "map": {
            "source": {
                "dim": 4,
                "box": [[0.1, 1.5]] * 4,
                "metric": _identity_metric_exprs(4),
                "name": "flat-positive:4",
            },
            "target": {
                "dim": 3,
                "box": [[-4.0, 4.0], [0.02, 7.0], [-4.0, 4.0]],
                "metric": [
                    ["1/(4*norm(x))", "0", "0"],
                    ["0", "1/(4*norm(x))", "0"],
                    ["0", "0", "1/(4*norm(x))"],
                ],
                "name": "hopf-base",
            },
            "exprs": [
                "x1^2+x2^2-x3^2-x4^2",
                "2*(x1*x4+x2*x3)",
                "2*(x2*x4-x1*x3)",
            ],
            "map_mode": "riemannian_submersion",
            "rank": 3,
        },
        "structure": {"on": "source", "name": "quat-flat:1"},
        "c": 0.0,
        "deltaN": "zero",
        "points": [[0.5, 0.3, 0.4, 0.2], [0.9, 0.2, 0.6, 0.3], [0.4, 0.4, 0.4, 0.4]],
        "theorems": ["horizontal_6_2", "lemma_horizontal_6_1"],
    }


def _equality_pattern(n: int, lams) -> list:
    out = []
    for lam in lams:
        sl = np.zeros((n, n))
        np.fill_diagonal(sl, lam)
        sl[-1, -1] = 2.0 * lam
        out.append(sl.tolist())
    return out


def _builtin_pw_equality_map() -> dict:
    B = _equality_pattern(4, [1.0, 0.0, 0.0, 0.0])
    return {
        "version": 1,
        "name": "pw-equality-map:s4",
        "mode": "pointwise",
        "dim": 8,
        "kind": "map",
        "structure": {"name": "quat-flat:2"},
        "c": 4.0,
        "frames": {
            "range": np.eye(8)[:4].tolist(),
            "range_perp": np.eye(8)[4:].tolist(),
        },
        "tensors": {"B": B},
        "theorems": ["map_3_2", "lemma_map_3_1"],
    }


def _builtin_pw_equality_combined() -> dict:
    lams = [1.0, 0.5, 0.25, 0.0]
    T = _equality_pattern(4, lams)
    t_norm_sq = 7.0 * sum(l * l for l in lams)
    # c = 0 makes the mixed term vanish; deltaN = |T|^2 / 2 closes the identity
    return {
        "version": 1,
        "name": "pw-equality-combined:s4l4",
        "mode": "pointwise",
        "dim": 8,
        "kind": "submersion",
        "structure": {"name": "quat-flat:2"},
        "c": 0.0,
        "deltaN": f"user:{t_norm_sq / 2.0!r}",
        "frames": {
            "horizontal": np.eye(8)[:4].tolist(),
            "vertical": np.eye(8)[4:].tolist(),
        },
        "tensors": {
            "T": T,
            "A": np.zeros((4, 4, 4)).tolist(),
        },
        "theorems": [
            "vertical_5_2",
            "horizontal_6_2",
            "combined_7_2",
            "lemma_vertical_5_1",
            "lemma_horizontal_6_1",
            "lemma_combined_7_1",
        ],
    }


def random_pointwise_submersion(
    s: int, ell: int, c: float, seed: int, dim: int = 12
) -> dict:
    """Seeded random pointwise submersion scene document."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    T = rng.uniform(-1.0, 1.0, size=(s, ell, ell))
    T = 0.5 * (T + T.transpose(0, 2, 1))
    A = rng.uniform(-1.0, 1.0, size=(ell, s, s))
    A = 0.5 * (A - A.transpose(0, 2, 1))
    return {
        "version": 1,
        "name": f"pw-random:s{s}l{ell}c{c:g}seed{seed}",
        "mode": "pointwise",
        "dim": dim,
        "kind": "submersion",
        "structure": {"name": f"quat-flat:{dim // 4}"},
        "c": float(c),
        "deltaN": "zero",
        "frames": {
            "horizontal": Q[:, :s].T.tolist(),
            "vertical": Q[:, s : s + ell].T.tolist(),
        },
        "tensors": {"T": T.tolist(), "A": A.tolist()},
        "theorems": [
            "vertical_5_2",
            "horizontal_6_2",
            "lemma_vertical_5_1",
            "lemma_horizontal_6_1",
        ],
    }


def _builtin_pw_random() -> dict:
    doc = random_pointwise_submersion(s=4, ell=4, c=-4.0, seed=1331)
    doc["name"] = "pw-random-mix:c-4"
    return doc


_BUILTINS: dict[str, Callable[[], dict]] = {
    "product-projection:8to4": _builtin_product_projection,
    "radial:4": _builtin_radial,
    "paraboloid-vertex": _builtin_paraboloid,
    "flat-embedding:2in4": _builtin_flat_embedding_2in4,
    "flat-embedding:4in8": _builtin_flat_embedding_4in8,
    "hopf-radial:4to3": _builtin_hopf,
    "pw-equality-map:s4": _builtin_pw_equality_map,
    "pw-equality-combined:s4l4": _builtin_pw_equality_combined,
    "pw-random-mix:c-4": _builtin_pw_random,
}


def builtin_names() -> list[str]:
    return list(_BUILTINS)


def builtin_scenario(name: str) -> Scenario:
    if name not in _BUILTINS:
        raise SceneValidationError(f"unknown builtin scenario {name!r}")
    return parse_scenario(_BUILTINS[name](), name_hint=name)
