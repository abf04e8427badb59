"""Charts, connections, curvature and orthonormal frames.

Conventions used throughout the engine:

* stored curvature is fully covariant, ``R[i, j, k, l]`` meaning the
  quadrilinear form evaluated on coordinate vectors in slot order, so
  ``quad(X, Y, Z, W) = R[ijkl] X^i Y^j Z^k W^l``;
* the sign is fixed so that the round unit 2-sphere has sectional
  curvature +1, i.e. ``quad(X, Y, Y, X) > 0`` on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateMetricError,
    DependencyError,
    DimensionError,
    DomainError,
)
from .jets import Jet2, seed_point

__all__ = [
    "MetricChart",
    "CurvaturePoint",
    "OrthoFrame",
    "christoffel",
    "christoffel_with_grad",
    "riemann",
    "gram_schmidt",
    "complete_frame",
    "scalar_curvature_of_frame",
    "normalized_scalar_curvature",
    "mixed_scalar",
    "chart",
    "builtin_chart_names",
]

_SYM_TOL = 1e-14
_PD_TOL = 1e-10


@dataclass(frozen=True)
class MetricChart:
    """A single coordinate domain with a smooth metric component field.

    ``g`` maps a list of coordinate jets (or floats) to an ``dim x dim``
    nested sequence of jets / numbers.
    """

    dim: int
    domain: tuple[tuple[float, float], ...]
    g: Callable
    name: str = ""

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        return all(lo < xi < hi for xi, (lo, hi) in zip(x, self.domain))

    def require_inside(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(f"point has shape {x.shape}, chart dimension is {self.dim}")
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} outside domain of chart {self.name!r}")
        return x

    def metric_at(self, x) -> np.ndarray:
        """Metric matrix at ``x``, with symmetry and definiteness checks."""
        x = self.require_inside(x)
        rows = self.g([float(v) for v in x])
        g0 = np.empty((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                entry = rows[i][j]
                g0[i, j] = entry.value if isinstance(entry, Jet2) else float(entry)
        scale = max(1.0, np.abs(g0).max())
        if np.abs(g0 - g0.T).max() > _SYM_TOL * scale:
            raise DegenerateMetricError(
                f"metric not symmetric at {x.tolist()} (chart {self.name!r})"
            )
        eigs = np.linalg.eigvalsh(0.5 * (g0 + g0.T))
        if eigs.min() <= _PD_TOL:
            raise DegenerateMetricError(
                f"metric not positive definite at {x.tolist()}: min eigenvalue {eigs.min():.3e}"
            )
        return 0.5 * (g0 + g0.T)

    def metric_jets(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, gradient and Hessian arrays of every metric component.

        Returns ``(G0, G1, G2)`` with ``G1[a, b, c] = d_c g_ab`` and
        ``G2[a, b, c, d] = d_c d_d g_ab``.
        """
        x = self.require_inside(x)
        n = self.dim
        coords = seed_point(x)
        rows = self.g(coords)
        G0 = np.empty((n, n))
        G1 = np.zeros((n, n, n))
        G2 = np.zeros((n, n, n, n))
        for a in range(n):
            for b in range(n):
                entry = rows[a][b]
                if isinstance(entry, Jet2):
                    G0[a, b] = entry.value
                    G1[a, b] = entry.grad
                    G2[a, b] = 0.5 * (entry.hess + entry.hess.T)
                else:
                    G0[a, b] = float(entry)
        G0 = 0.5 * (G0 + G0.T)
        G1 = 0.5 * (G1 + G1.transpose(1, 0, 2))
        G2 = 0.5 * (G2 + G2.transpose(1, 0, 2, 3))
        return G0, G1, G2


@dataclass(frozen=True)
class CurvaturePoint:
    """Christoffel symbols and covariant curvature at one chart point."""

    x: np.ndarray
    gamma: np.ndarray  # gamma[k, i, j] = Gamma^k_ij, symmetric in (i, j)
    riemann: np.ndarray  # R[i, j, k, l] fully covariant
    metric: np.ndarray

    def quad(self, z1, z2, z3, z4) -> float:
        return float(np.einsum("ijkl,i,j,k,l->", self.riemann, z1, z2, z3, z4))

    def sectional(self, u, v) -> float:
        g = self.metric
        uu = u @ g @ u
        vv = v @ g @ v
        uv = u @ g @ v
        area = uu * vv - uv * uv
        if area <= 0:
            raise DimensionError("sectional curvature of a degenerate 2-plane")
        return self.quad(u, v, v, u) / area

    def symmetry_residuals(self) -> dict[str, float]:
        R = self.riemann
        scale = max(1.0, np.abs(R).max())
        bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
        return {
            "antisym_12": np.abs(R + R.transpose(1, 0, 2, 3)).max() / scale,
            "antisym_34": np.abs(R + R.transpose(0, 1, 3, 2)).max() / scale,
            "pair_sym": np.abs(R - R.transpose(2, 3, 0, 1)).max() / scale,
            "bianchi": np.abs(bianchi).max() / scale,
        }


def christoffel(chart: MetricChart, x) -> np.ndarray:
    """Levi-Civita connection coefficients ``Gamma[k, i, j]`` at ``x``."""
    return christoffel_with_grad(chart, x)[0]


def christoffel_with_grad(chart: MetricChart, x) -> tuple[np.ndarray, np.ndarray]:
    """Christoffel symbols and their coordinate gradient.

    Returns ``(Gamma, dGamma)`` with ``dGamma[m, k, i, j] = d_m Gamma^k_ij``,
    assembled exactly from the metric jets (no differencing of Gamma).
    """
    G0, G1, G2 = chart.metric_jets(x)
    try:
        ginv = np.linalg.inv(G0)
    except np.linalg.LinAlgError as e:
        raise DegenerateMetricError(f"singular metric at {np.asarray(x).tolist()}") from e
    # D[i, j, l] = d_i g_jl
    D = np.transpose(G1, (2, 0, 1))
    A = D + D.transpose(1, 0, 2) - np.transpose(D, (1, 2, 0))
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, A)
    # DD[m, i, j, l] = d_m d_i g_jl
    DD = np.transpose(G2, (3, 2, 0, 1))
    Am = DD + DD.transpose(0, 2, 1, 3) - DD.transpose(0, 2, 3, 1)
    dginv = -np.einsum("kp,pqm,ql->mkl", ginv, G1, ginv)
    dgamma = 0.5 * (
        np.einsum("mkl,ijl->mkij", dginv, A) + np.einsum("kl,mijl->mkij", ginv, Am)
    )
    return gamma, dgamma


def riemann(chart: MetricChart, x) -> CurvaturePoint:
    """Fully covariant curvature tensor of ``chart`` at ``x``."""
    x = np.asarray(x, dtype=float)
    G0, _, _ = chart.metric_jets(x)
    gamma, dgamma = christoffel_with_grad(chart, x)
    # Rup[i, j, k, m] = d_i Gamma^m_jk - d_j Gamma^m_ik
    #                 + Gamma^p_jk Gamma^m_ip - Gamma^p_ik Gamma^m_jp
    rup = (
        np.transpose(dgamma, (0, 2, 3, 1))
        - np.transpose(dgamma, (2, 0, 3, 1))
        + np.einsum("pjk,mip->ijkm", gamma, gamma)
        - np.einsum("pik,mjp->ijkm", gamma, gamma)
    )
    R = np.einsum("ijkm,ml->ijkl", rup, G0)
    cp = CurvaturePoint(x=x, gamma=gamma, riemann=R, metric=G0)
    worst = max(cp.symmetry_residuals().values())
    if worst > 1e-6:
        raise DegenerateMetricError(
            f"curvature symmetries violated ({worst:.3e}) at {x.tolist()}; "
            "metric field is likely not smooth enough here"
        )
    return cp


def gram_schmidt(vectors: Sequence, g_at: np.ndarray) -> "OrthoFrame":
    """Metric Gram-Schmidt; preserves span, raises on rank deficiency."""
    g = np.asarray(g_at, dtype=float)
    out: list[np.ndarray] = []
    for v in vectors:
        v = np.asarray(v, dtype=float).copy()
        orig = math.sqrt(max(v @ g @ v, 0.0))
        if orig == 0.0:
            raise DependencyError("zero vector handed to gram_schmidt")
        for _ in range(2):  # second pass for numerical orthogonality
            for e in out:
                v = v - (e @ g @ v) * e
        norm = math.sqrt(max(v @ g @ v, 0.0))
        if norm <= 1e-10 * orig:
            raise DependencyError(
                f"vector numerically dependent on predecessors (residual {norm:.3e})"
            )
        out.append(v / norm)
    return OrthoFrame(np.array(out) if out else np.zeros((0, g.shape[0])), g)


def complete_frame(frame: "OrthoFrame") -> "OrthoFrame":
    """Extend an orthonormal frame to a full frame of the ambient space."""
    g = frame.metric_at
    n = g.shape[0]
    vecs = [v for v in frame.vectors]
    for cand in np.eye(n):
        if len(vecs) == n:
            break
        v = cand.copy()
        for _ in range(2):
            for e in vecs:
                v = v - (e @ g @ v) * e
        norm = math.sqrt(max(v @ g @ v, 0.0))
        if norm > 1e-8:
            vecs.append(v / norm)
    if len(vecs) != n:
        raise DependencyError("could not complete frame to full dimension")
    return OrthoFrame(np.array(vecs), g)


@dataclass(frozen=True)
class OrthoFrame:
    """Rows of ``vectors`` are g-orthonormal chart components."""

    vectors: np.ndarray  # (k, n)
    metric_at: np.ndarray  # (n, n)

    def __post_init__(self):
        object.__setattr__(self, "vectors", np.atleast_2d(np.asarray(self.vectors, float)))
        object.__setattr__(self, "metric_at", np.asarray(self.metric_at, float))
        if self.vectors.size == 0:
            object.__setattr__(
                self, "vectors", self.vectors.reshape(0, self.metric_at.shape[0])
            )

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    def gram(self) -> np.ndarray:
        return self.vectors @ self.metric_at @ self.vectors.T

    def orthonormality_residual(self) -> float:
        if self.k == 0:
            return 0.0
        return float(np.abs(self.gram() - np.eye(self.k)).max())


Quad = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], float]


def scalar_curvature_of_frame(quad: Quad, frame: OrthoFrame) -> float:
    """Twice the scalar-type curvature sum over an orthonormal frame.

    Returns ``sum_{i,j} quad(e_i, e_j, e_j, e_i)``; frames with fewer
    than two vectors give 0.
    """
    vs = frame.vectors
    total = 0.0
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            total += 2.0 * quad(vs[i], vs[j], vs[j], vs[i])
    return total


def normalized_scalar_curvature(quad: Quad, frame: OrthoFrame) -> float:
    k = frame.k
    if k < 2:
        raise DimensionError(f"normalized scalar curvature undefined for a {k}-frame")
    return scalar_curvature_of_frame(quad, frame) / (k * (k - 1))


def mixed_scalar(quad: Quad, hor: OrthoFrame, vert: OrthoFrame) -> float:
    """``sum_i sum_j quad(h_i, v_j, v_j, h_i)`` over the two frames."""
    total = 0.0
    for h in hor.vectors:
        for v in vert.vectors:
            total += quad(h, v, v, h)
    return total


# -- builtin chart registry ----------------------------------------------


def _flat(n: int) -> MetricChart:
    def g(coords):
        m = len(coords)
        return [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]

    return MetricChart(n, tuple((-5.0, 5.0) for _ in range(n)), g, name=f"flat:{n}")


def _sphere(r: float) -> MetricChart:
    from . import jets

    def g(coords):
        theta = coords[0]
        s = jets.sin(theta)
        return [[r * r, 0.0], [0.0, r * r * s * s]]

    return MetricChart(
        2, ((0.15, math.pi - 0.15), (-3.0, 3.0)), g, name=f"sphere:{r:g}"
    )


def _sphere3(r: float) -> MetricChart:
    from . import jets

    def g(coords):
        t1, t2 = coords[0], coords[1]
        s1 = jets.sin(t1)
        s2 = jets.sin(t2)
        return [
            [r * r, 0.0, 0.0],
            [0.0, r * r * s1 * s1, 0.0],
            [0.0, 0.0, r * r * s1 * s1 * s2 * s2],
        ]

    return MetricChart(
        3,
        ((0.2, math.pi - 0.2), (0.2, math.pi - 0.2), (-3.0, 3.0)),
        g,
        name=f"sphere3:{r:g}",
    )


def _half_plane() -> MetricChart:
    def g(coords):
        y = coords[1]
        inv = 1.0 / (y * y)
        return [[inv, 0.0], [0.0, inv]]

    return MetricChart(2, ((-5.0, 5.0), (0.1, 10.0)), g, name="half-plane")


def _polar() -> MetricChart:
    def g(coords):
        r = coords[0]
        return [[1.0, 0.0], [0.0, r * r]]

    return MetricChart(2, ((0.2, 6.0), (-3.0, 3.0)), g, name="polar")


def chart(name: str) -> MetricChart:
    """Look up a builtin chart: flat:n, sphere:r, sphere3:r, half-plane, polar."""
    if name == "half-plane":
        return _half_plane()
    if name == "polar":
        return _polar()
    if ":" in name:
        kind, _, param = name.partition(":")
        if kind == "flat":
            return _flat(int(param))
        if kind == "sphere":
            return _sphere(float(param))
        if kind == "sphere3":
            return _sphere3(float(param))
    raise KeyError(f"unknown chart {name!r}")


def builtin_chart_names() -> list[str]:
    return ["flat:n", "sphere:r", "sphere3:r", "half-plane", "polar"]
