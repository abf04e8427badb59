"""Pointwise evaluation of the curvature inequalities with equality diagnostics.

The checkers assemble each inequality twice where the source material
provides two routes (generic ambient curvature vs the closed-form
space-form expression) and report the left side, right side, slack and
an equality verdict.  Scalar curvature of the horizontal distribution
is taken as (2 tau_H - 3 |A|^2) / (s (s - 1)), the form under which the
horizontal equality case is exactly "A vanishes".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .casorati import (
    CasoratiInput,
    HyperplaneExtrema,
    casorati,
    delta_casorati,
    hyperplane_extrema,
)
from .errors import ConfigurationError, DimensionError, OracleError
from .geometry import OrthoFrame, mixed_scalar, scalar_curvature_of_frame
from .quaternionic import QSFOracle, decompose_J

__all__ = [
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
    "THEOREM_IDS",
]

ORACLE_EQUALITY_TOL = 1e-8
CHART_EQUALITY_TOL = 1e-5
SPACE_FORM_TOL = 1e-6
A_VANISHING_TOL = 1e-8

THEOREM_IDS = (
    "map_3_2",
    "vertical_5_2",
    "horizontal_6_2",
    "combined_7_2",
    "lemma_map_3_1",
    "lemma_vertical_5_1",
    "lemma_horizontal_6_1",
    "lemma_combined_7_1",
)


@dataclass(frozen=True)
class EqualityDiagnostics:
    """Residuals of the equality-case conditions, all non-negative.

    The distribution frame is rotated so the optimizer's distinguished
    direction (the argmin hyperplane normal) comes last before the
    off-diagonal and eigenvalue-pattern residuals are measured.
    """

    offdiag_max: float
    eigen_pattern_residual: float
    common_eigendirection_residual: float
    commutator_max: float
    A_norm: float
    bracket_verticality_residual: Optional[float] = None
    degenerate_extrema: bool = False

    def as_dict(self) -> dict:
        return {
            "offdiag_max": self.offdiag_max,
            "eigen_pattern_residual": self.eigen_pattern_residual,
            "common_eigendirection_residual": self.common_eigendirection_residual,
            "commutator_max": self.commutator_max,
            "A_norm": self.A_norm,
            "bracket_verticality_residual": self.bracket_verticality_residual,
            "degenerate_extrema": self.degenerate_extrema,
        }


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: str
    variant: str  # "delta" | "delta_hat"
    lhs: float
    rhs: float
    slack: float
    equality_verdict: str  # "equality" | "strict" | "violated"
    diagnostics: Optional[EqualityDiagnostics] = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "variant": self.variant,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "verdict": self.equality_verdict,
            "diagnostics": self.diagnostics.as_dict() if self.diagnostics else None,
            "extras": self.extras,
        }


def _resolve_tol(data) -> float:
    if data.equality_tol is not None:
        return float(data.equality_tol)
    return CHART_EQUALITY_TOL if data.chartlike else ORACLE_EQUALITY_TOL


def _verdict(lhs: float, rhs: float, tol: float, extra_equality: bool = True) -> str:
    slack = rhs - lhs
    normalized = slack / max(1.0, abs(lhs), abs(rhs))
    if normalized < -tol:
        return "violated"
    if abs(normalized) < tol and extra_equality:
        return "equality"
    return "strict"


def _rotation_to_last(u: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose last row is u.

    Householder reflection with the cancellation-free sign choice, so the
    construction stays exact even when u is nearly axis aligned.
    """
    n = u.shape[0]
    e = np.zeros(n)
    e[-1] = 1.0
    sign = 1.0 if u[-1] >= 0 else -1.0
    v = u + sign * e
    v /= np.linalg.norm(v)
    return -sign * (np.eye(n) - 2.0 * np.outer(v, v))


def equality_diagnostics(
    inp: CasoratiInput,
    extrema: HyperplaneExtrema,
    A_norm_sq: float = 0.0,
    bracket_residual: Optional[float] = None,
) -> EqualityDiagnostics:
    """Measure how far a tensor is from the equality-case pattern.

    The pattern is block-diagonal slices diag(lambda_a, ..., lambda_a,
    2 lambda_a) sharing one distinguished direction; the commutator of
    the slice matrices and the norm of A cover the remaining conditions.
    """
    h = inp.coeffs
    n = inp.n
    Q = _rotation_to_last(np.asarray(extrema.argmin_normal, dtype=float))
    rotated = np.einsum("ia,xab,jb->xij", Q, h, Q)
    off = rotated.copy()
    for sl in off:
        np.fill_diagonal(sl, 0.0)
    offdiag_max = float(np.abs(off).max()) if off.size else 0.0

    pattern = 0.0
    common = 0.0
    for sl in rotated:
        d = np.diagonal(sl)
        lam = (d[:-1].sum() + 2.0 * d[-1]) / (n + 3.0)
        target = np.full(n, lam)
        target[-1] = 2.0 * lam
        pattern = max(pattern, float(np.linalg.norm(d - target)))
        common = max(common, float(np.linalg.norm(sl[:-1, -1])))

    comm = 0.0
    for a in range(h.shape[0]):
        for b in range(a + 1, h.shape[0]):
            comm = max(comm, float(np.linalg.norm(h[a] @ h[b] - h[b] @ h[a])))

    return EqualityDiagnostics(
        offdiag_max=offdiag_max,
        eigen_pattern_residual=pattern,
        common_eigendirection_residual=common,
        commutator_max=comm,
        A_norm=float(np.sqrt(max(A_norm_sq, 0.0))),
        bracket_verticality_residual=bracket_residual,
        degenerate_extrema=extrema.degenerate_min,
    )


def algebraic_gap(B: CasoratiInput, certify: bool = False):
    """Purely algebraic core of the map inequality.

    Returns (lhs, rhs_delta, rhs_delta_hat) with
    lhs = (|trace B|^2 - |B|^2) / (s (s - 1)); for every B the lhs is
    bounded by both delta-Casorati right sides.
    """
    s = B.n
    if s < 3:
        raise DimensionError(f"algebraic gap needs s >= 3, got {s}")
    lhs = (B.trace_norm_sq() - B.norm_sq()) / (s * (s - 1))
    C = casorati(B)
    ex = hyperplane_extrema(B, certify=certify)
    delta, delta_hat = delta_casorati(C, ex, s)
    return lhs, delta, delta_hat


# -- scene data bundles ------------------------------------------------------


@dataclass
class MapSceneData:
    """Everything the map-theorem checker needs at one point.

    ``ambient_quad`` evaluates the target curvature on target vectors;
    ``chartlike`` selects the chart-mode tolerance and triggers the
    space-form validation of the target curvature.
    """

    B: CasoratiInput
    range_frame: OrthoFrame
    range_perp_frame: OrthoFrame
    g2: np.ndarray
    J2: np.ndarray
    c: float
    ambient_quad: Callable
    chartlike: bool = False
    space_form_residual: Optional[float] = None  # precomputed by chart scenes
    equality_tol: Optional[float] = None  # scene override of the verdict tolerance
    _extrema: Optional[HyperplaneExtrema] = None

    @property
    def s(self) -> int:
        return self.range_frame.k

    def extrema(self) -> HyperplaneExtrema:
        if self._extrema is None:
            self._extrema = hyperplane_extrema(self.B, certify=False)
        return self._extrema


@dataclass
class SubmersionSceneData:
    """Point data for the vertical / horizontal / combined checkers."""

    T: Optional[CasoratiInput]
    A: Optional[CasoratiInput]
    horizontal: OrthoFrame
    vertical: OrthoFrame
    g1: np.ndarray
    J1: np.ndarray
    c: float
    ambient_quad: Callable
    deltaN: Optional[float] = None
    chartlike: bool = False
    space_form_residual: Optional[float] = None  # precomputed by chart scenes
    equality_tol: Optional[float] = None  # scene override of the verdict tolerance
    bracket_residual: Optional[float] = None
    _extrema_T: Optional[HyperplaneExtrema] = None
    _extrema_A: Optional[HyperplaneExtrema] = None

    @property
    def s(self) -> int:
        return self.horizontal.k

    @property
    def ell(self) -> int:
        return self.vertical.k

    def extrema_T(self) -> HyperplaneExtrema:
        if self._extrema_T is None:
            self._extrema_T = hyperplane_extrema(self.T, certify=False)
        return self._extrema_T

    def extrema_A(self) -> HyperplaneExtrema:
        if self._extrema_A is None:
            self._extrema_A = hyperplane_extrema(self.A, certify=False)
        return self._extrema_A


def _validate_space_form(quad, oracle: QSFOracle, frame_vectors: np.ndarray) -> float:
    """Max deviation of the ambient curvature from the space-form oracle."""
    E = np.atleast_2d(frame_vectors)
    expected = oracle.curvature_tensor(E)
    k = E.shape[0]
    actual = np.empty_like(expected)
    for a in range(k):
        for b in range(k):
            for c in range(k):
                for d in range(k):
                    actual[a, b, c, d] = quad(E[a], E[b], E[c], E[d])
    return float(np.abs(actual - expected).max())


def space_form_residual_from_tensor(
    riemann_tensor: np.ndarray, oracle: QSFOracle, frame_vectors: np.ndarray
) -> float:
    """Vectorized space-form deviation from a full covariant curvature array."""
    E = np.atleast_2d(frame_vectors)
    actual = np.einsum("abcd,ia,jb,kc,ld->ijkl", riemann_tensor, E, E, E, E)
    return float(np.abs(actual - oracle.curvature_tensor(E)).max())


def check_map_theorem(data: MapSceneData) -> list[TheoremReport]:
    """Map-mode inequality (theorem and generic-lemma assemblies)."""
    s = data.s
    if s < 3:
        raise DimensionError(f"map theorem needs rank s >= 3, got {s}")
    tol = _resolve_tol(data)

    sf_residual = None
    if data.chartlike:
        if data.space_form_residual is not None:
            sf_residual = data.space_form_residual
        else:
            oracle = QSFOracle(data.c, data.J2, data.g2)
            frame = np.vstack([data.range_frame.vectors, data.range_perp_frame.vectors])
            sf_residual = _validate_space_form(data.ambient_quad, oracle, frame)
        if sf_residual > SPACE_FORM_TOL:
            raise OracleError(
                f"target curvature deviates from the c={data.c} space form "
                f"by {sf_residual:.3e}"
            )

    two_tau_r = scalar_curvature_of_frame(data.ambient_quad, data.range_frame)
    rho_r = two_tau_r / (s * (s - 1))
    gap = (data.B.trace_norm_sq() - data.B.norm_sq()) / (s * (s - 1))
    lhs = rho_r + gap

    C = casorati(data.B)
    ex = data.extrema()
    delta, delta_hat = delta_casorati(C, ex, s)
    decomp = decompose_J(
        data.J2, data.g2, data.range_frame.vectors, data.range_perp_frame.vectors
    )
    c_term = data.c / 4.0 + (3.0 * data.c / (4.0 * s * (s - 1))) * float(
        decomp.norms_P.sum()
    )
    diag = equality_diagnostics(data.B, ex)

    extras = {
        "c": data.c,
        "equality_tol": tol,
        "rho_range": rho_r,
        "space_form_residual": sf_residual,
        "norms_P_range": decomp.norms_P.tolist(),
        "casorati": C,
        "inf_CL": ex.inf_CL,
        "sup_CL": ex.sup_CL,
        "delta_C": delta,
        "delta_C_hat": delta_hat,
        "optimizer_audit": ex.audit,
    }
    reports = []
    for theorem_id, amb in (("map_3_2", c_term), ("lemma_map_3_1", rho_r)):
        for variant, d in (("delta", delta), ("delta_hat", delta_hat)):
            rhs = d + amb
            reports.append(
                TheoremReport(
                    theorem_id=theorem_id,
                    variant=variant,
                    lhs=lhs,
                    rhs=rhs,
                    slack=rhs - lhs,
                    equality_verdict=_verdict(lhs, rhs, tol),
                    diagnostics=diag,
                    extras=extras,
                )
            )
    return reports


def check_vertical_theorem(data: SubmersionSceneData) -> list[TheoremReport]:
    """Vertical-distribution inequality for submersions."""
    ell = data.ell
    if ell < 3:
        raise DimensionError(f"vertical theorem needs ell >= 3, got {ell}")
    if data.T is None:
        raise ConfigurationError("vertical theorem needs the T tensor")
    tol = _resolve_tol(data)
    sf_residual = _maybe_validate_source(data)

    two_tau_v = scalar_curvature_of_frame(data.ambient_quad, data.vertical)
    rho_v_amb = two_tau_v / (ell * (ell - 1))
    gap = (data.T.trace_norm_sq() - data.T.norm_sq()) / (ell * (ell - 1))
    lhs = rho_v_amb + gap  # fiber curvature through the Gauss relation

    C = casorati(data.T)
    ex = data.extrema_T()
    delta, delta_hat = delta_casorati(C, ex, ell)
    decomp = decompose_J(
        data.J1, data.g1, data.horizontal.vectors, data.vertical.vectors
    )
    c_term = data.c / 4.0 + (3.0 * data.c / (4.0 * ell * (ell - 1))) * float(
        decomp.norms_Q.sum()
    )
    diag = equality_diagnostics(
        data.T,
        ex,
        A_norm_sq=data.A.norm_sq() if data.A is not None else 0.0,
        bracket_residual=data.bracket_residual,
    )
    extras = {
        "c": data.c,
        "equality_tol": tol,
        "rho_vertical_ambient": rho_v_amb,
        "space_form_residual": sf_residual,
        "norms_Q": decomp.norms_Q.tolist(),
        "casorati": C,
        "inf_CL": ex.inf_CL,
        "sup_CL": ex.sup_CL,
        "delta_C": delta,
        "delta_C_hat": delta_hat,
        "optimizer_audit": ex.audit,
    }
    reports = []
    for theorem_id, amb in (("vertical_5_2", c_term), ("lemma_vertical_5_1", rho_v_amb)):
        for variant, d in (("delta", delta), ("delta_hat", delta_hat)):
            rhs = d + amb
            reports.append(
                TheoremReport(
                    theorem_id, variant, lhs, rhs, rhs - lhs,
                    _verdict(lhs, rhs, tol), diag, extras,
                )
            )
    return reports


def check_horizontal_theorem(data: SubmersionSceneData) -> list[TheoremReport]:
    """Horizontal-distribution inequality; equality means A vanishes."""
    s = data.s
    if s < 3:
        raise DimensionError(f"horizontal theorem needs s >= 3, got {s}")
    if data.A is None:
        raise ConfigurationError("horizontal theorem needs the A tensor")
    tol = _resolve_tol(data)
    sf_residual = _maybe_validate_source(data)

    two_tau_h = scalar_curvature_of_frame(data.ambient_quad, data.horizontal)
    rho_h_amb = two_tau_h / (s * (s - 1))
    lhs = rho_h_amb - 3.0 * data.A.norm_sq() / (s * (s - 1))

    C = casorati(data.A)
    ex = data.extrema_A()
    delta, delta_hat = delta_casorati(C, ex, s)
    decomp = decompose_J(
        data.J1, data.g1, data.horizontal.vectors, data.vertical.vectors
    )
    c_term = data.c / 4.0 + (3.0 * data.c / (4.0 * s * (s - 1))) * float(
        decomp.norms_P.sum()
    )
    a_norm = float(np.sqrt(data.A.norm_sq()))
    a_scale = max(1.0, float(np.abs(data.A.coeffs).max()))
    integrable = a_norm / a_scale < A_VANISHING_TOL
    if data.bracket_residual is not None:
        # chart scenes: the bracket cross-check must back the A = 0 reading
        integrable = integrable and data.bracket_residual < 1e-6
    diag = equality_diagnostics(
        data.A, ex, A_norm_sq=data.A.norm_sq(), bracket_residual=data.bracket_residual
    )
    extras = {
        "c": data.c,
        "equality_tol": tol,
        "rho_horizontal_ambient": rho_h_amb,
        "space_form_residual": sf_residual,
        "norms_P": decomp.norms_P.tolist(),
        "A_norm": a_norm,
        "casorati": C,
        "inf_CL": ex.inf_CL,
        "sup_CL": ex.sup_CL,
        "delta_C": delta,
        "delta_C_hat": delta_hat,
        "optimizer_audit": ex.audit,
    }
    reports = []
    for theorem_id, amb in (
        ("horizontal_6_2", c_term),
        ("lemma_horizontal_6_1", rho_h_amb),
    ):
        for variant, d in (("delta", delta), ("delta_hat", delta_hat)):
            rhs = d + amb
            reports.append(
                TheoremReport(
                    theorem_id, variant, lhs, rhs, rhs - lhs,
                    _verdict(lhs, rhs, tol, extra_equality=integrable), diag, extras,
                )
            )
    return reports


def check_combined_theorem(data: SubmersionSceneData) -> list[TheoremReport]:
    """Combined vertical+horizontal inequality with the pluggable deltaN."""
    s, ell = data.s, data.ell
    if s < 3 or ell < 3:
        raise DimensionError(f"combined theorem needs s, ell >= 3, got s={s}, ell={ell}")
    if data.T is None or data.A is None:
        raise ConfigurationError("combined theorem needs both T and A")
    if data.deltaN is None:
        raise ConfigurationError(
            "deltaN is required for the combined theorem and has no default"
        )
    tol = _resolve_tol(data)
    sf_residual = _maybe_validate_source(data)
    D = s * (s - 1) * ell * (ell - 1)

    two_tau_v = scalar_curvature_of_frame(data.ambient_quad, data.vertical)
    two_tau_h = scalar_curvature_of_frame(data.ambient_quad, data.horizontal)
    rho_v_amb = two_tau_v / (ell * (ell - 1))
    rho_h_amb = two_tau_h / (s * (s - 1))
    mixed = mixed_scalar(data.ambient_quad, data.horizontal, data.vertical)

    t_norm = data.T.norm_sq()
    a_norm = data.A.norm_sq()
    rho_v = rho_v_amb + (data.T.trace_norm_sq() - t_norm) / (ell * (ell - 1))
    rho_h = rho_h_amb - 3.0 * a_norm / (s * (s - 1))
    lhs = rho_h / (ell * (ell - 1)) + rho_v / (s * (s - 1))

    ex_t = data.extrema_T()
    ex_a = data.extrema_A()
    delta_v, delta_hat_v = delta_casorati(casorati(data.T), ex_t, ell)
    delta_h, delta_hat_h = delta_casorati(casorati(data.A), ex_a, s)

    decomp = decompose_J(
        data.J1, data.g1, data.horizontal.vectors, data.vertical.vectors
    )
    tail = (2.0 * data.deltaN - t_norm + a_norm) / D
    generic_amb = (
        rho_v_amb / (s * (s - 1)) + rho_h_amb / (ell * (ell - 1)) + 2.0 * mixed / D
    )
    poly = ell * ell + s * s + 2 * s * ell - ell - s
    closed_amb = (data.c / (4.0 * D)) * poly + (3.0 * data.c / (4.0 * D)) * float(
        (decomp.norms_Q + decomp.norms_P + 2.0 * decomp.norms_PV).sum()
    )

    a_scale = max(1.0, float(np.abs(data.A.coeffs).max()))
    integrable = float(np.sqrt(a_norm)) / a_scale < A_VANISHING_TOL
    diag = equality_diagnostics(
        data.T, ex_t, A_norm_sq=a_norm, bracket_residual=data.bracket_residual
    )
    extras = {
        "c": data.c,
        "equality_tol": tol,
        "deltaN": data.deltaN,
        "space_form_residual": sf_residual,
        "mixed_scalar": mixed,
        # full squared norms; the source material labels these |T^V|^2 and
        # |A^H|^2 in one section and |T^H|^2, |A^V|^2 in others
        "T_norm_sq": t_norm,
        "A_norm_sq": a_norm,
        "delta_C_vertical": delta_v,
        "delta_C_hat_vertical": delta_hat_v,
        "delta_C_horizontal": delta_h,
        "delta_C_hat_horizontal": delta_hat_h,
        "assembly_agreement": abs(generic_amb - closed_amb),
        "optimizer_audit": {"T": ex_t.audit, "A": ex_a.audit},
    }
    reports = []
    for theorem_id, amb in (
        ("combined_7_2", closed_amb),
        ("lemma_combined_7_1", generic_amb),
    ):
        for variant, dv, dh in (
            ("delta", delta_v, delta_h),
            ("delta_hat", delta_hat_v, delta_hat_h),
        ):
            rhs = dv / (s * (s - 1)) + dh / (ell * (ell - 1)) + amb + tail
            reports.append(
                TheoremReport(
                    theorem_id, variant, lhs, rhs, rhs - lhs,
                    _verdict(lhs, rhs, tol, extra_equality=integrable), diag, extras,
                )
            )
    return reports


def _maybe_validate_source(data: SubmersionSceneData) -> Optional[float]:
    if not data.chartlike:
        return None
    if data.space_form_residual is not None:
        residual = data.space_form_residual
    else:
        oracle = QSFOracle(data.c, data.J1, data.g1)
        frame = np.vstack([data.horizontal.vectors, data.vertical.vectors])
        residual = _validate_space_form(data.ambient_quad, oracle, frame)
    if residual > SPACE_FORM_TOL:
        raise OracleError(
            f"source curvature deviates from the c={data.c} space form by {residual:.3e}"
        )
    return residual
