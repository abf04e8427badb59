"""Quaternionic structures, the space-form curvature oracle and J-decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import FrameError, StructureError

__all__ = [
    "QuaternionicStructure",
    "StructureReport",
    "QSFOracle",
    "JDecomposition",
    "quat_units",
    "structure",
    "check_quaternionic_structure",
    "decompose_J",
]

_STRUCT_TOL = 1e-10


def quat_units(m: int) -> np.ndarray:
    """Left multiplication by the quaternion units i, j, k on H^m.

    Coordinates are grouped in quadruples (a, b, c, d) per quaternionic
    line; each J is block diagonal with the same 4 x 4 block.
    """
    ji = np.array(
        [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float
    )
    jj = np.array(
        [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float
    )
    jk = ji @ jj
    n = 4 * m
    out = np.zeros((3, n, n))
    for blk, unit in zip(out, (ji, jj, jk)):
        for q in range(m):
            blk[4 * q : 4 * q + 4, 4 * q : 4 * q + 4] = unit
    return out


@dataclass(frozen=True)
class QuaternionicStructure:
    """Three anti-commuting orthogonal anti-involutions, fixed or as a field."""

    dim: int
    J_const: Optional[np.ndarray] = None  # (3, n, n)
    J_field: Optional[Callable] = None  # x -> (3, n, n)
    name: str = ""

    def __post_init__(self):
        if self.dim % 4 != 0:
            raise StructureError(f"dimension {self.dim} is not a multiple of 4")
        if (self.J_const is None) == (self.J_field is None):
            raise StructureError("exactly one of J_const / J_field must be given")
        if self.J_const is not None:
            J = np.asarray(self.J_const, dtype=float)
            if J.shape != (3, self.dim, self.dim):
                raise StructureError(f"J matrices have shape {J.shape}")
            object.__setattr__(self, "J_const", J)

    @classmethod
    def quat_flat(cls, m: int) -> "QuaternionicStructure":
        return cls(4 * m, J_const=quat_units(m), name=f"quat-flat:{m}")

    @classmethod
    def from_matrices(cls, J) -> "QuaternionicStructure":
        J = np.asarray(J, dtype=float)
        return cls(J.shape[-1], J_const=J, name="explicit")

    def at(self, x=None) -> np.ndarray:
        if self.J_const is not None:
            return self.J_const
        return np.asarray(self.J_field(x), dtype=float)


def structure(name: str) -> QuaternionicStructure:
    """Registry lookup, e.g. ``quat-flat:2``."""
    kind, _, param = name.partition(":")
    if kind == "quat-flat" and param:
        return QuaternionicStructure.quat_flat(int(param))
    raise KeyError(f"unknown quaternionic structure {name!r}")


@dataclass(frozen=True)
class StructureReport:
    """Max violations of the quaternionic-structure identities."""

    square_residual: float  # max over alpha of |J_a^2 + I|
    anticommute_residual: float  # |J1 J2 + J2 J1|
    composition_residual: float  # |J1 J2 - J3|
    hermitian_residual: float  # max over alpha of |J^T g J - g|
    tol: float = _STRUCT_TOL

    @property
    def passed(self) -> bool:
        return self.worst < self.tol

    @property
    def worst(self) -> float:
        return max(
            self.square_residual,
            self.anticommute_residual,
            self.composition_residual,
            self.hermitian_residual,
        )

    def failed_identities(self) -> list[str]:
        out = []
        if self.square_residual >= self.tol:
            out.append("J_alpha^2 = -I")
        if self.anticommute_residual >= self.tol:
            out.append("J1 J2 = -J2 J1")
        if self.composition_residual >= self.tol:
            out.append("J1 J2 = J3")
        if self.hermitian_residual >= self.tol:
            out.append("g(J X, J Y) = g(X, Y)")
        return out


def check_quaternionic_structure(J: np.ndarray, g_at: np.ndarray) -> StructureReport:
    """Diagnostic check of the almost-quaternionic identities at a point."""
    J = np.asarray(J, dtype=float)
    g = np.asarray(g_at, dtype=float)
    n = J.shape[-1]
    eye = np.eye(n)
    square = max(np.abs(J[a] @ J[a] + eye).max() for a in range(3))
    anti = np.abs(J[0] @ J[1] + J[1] @ J[0]).max()
    comp = np.abs(J[0] @ J[1] - J[2]).max()
    herm = max(np.abs(J[a].T @ g @ J[a] - g).max() for a in range(3))
    return StructureReport(float(square), float(anti), float(comp), float(herm))


@dataclass(frozen=True)
class QSFOracle:
    """Curvature of a quaternionic space form with constant c.

    The quadrilinear form is

        (c/4) { g(Z2,Z3) g(Z1,Z4) - g(Z1,Z3) g(Z2,Z4) }
      + (c/4) sum_a { g(Z1, Ja Z3) g(Ja Z2, Z4) - g(Z2, Ja Z3) g(Ja Z1, Z4)
                      + 2 g(Z1, Ja Z2) g(Ja Z3, Z4) }.
    """

    c: float
    J: np.ndarray  # (3, n, n)
    g: np.ndarray  # (n, n)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if J.shape[-1] % 4 != 0:
            raise StructureError(f"dimension {J.shape[-1]} is not a multiple of 4")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "g", g)

    def quad(self, z1, z2, z3, z4) -> float:
        g = self.g
        total = (z2 @ g @ z3) * (z1 @ g @ z4) - (z1 @ g @ z3) * (z2 @ g @ z4)
        for Ja in self.J:
            jz2 = Ja @ z2
            jz3 = Ja @ z3
            total += (
                (z1 @ g @ jz3) * (jz2 @ g @ z4)
                - (z2 @ g @ jz3) * ((Ja @ z1) @ g @ z4)
                + 2.0 * (z1 @ g @ jz2) * (jz3 @ g @ z4)
            )
        return 0.25 * self.c * float(total)

    def sectional(self, u, v) -> float:
        g = self.g
        area = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        return self.quad(u, v, v, u) / area

    def curvature_tensor(self, frame_vectors: np.ndarray) -> np.ndarray:
        """Components over frame rows: R[a,b,c,d] = quad(e_a, e_b, e_c, e_d)."""
        E = np.atleast_2d(np.asarray(frame_vectors, dtype=float))
        g = self.g
        G = E @ g @ E.T
        R = np.einsum("bc,ad->abcd", G, G) - np.einsum("ac,bd->abcd", G, G)
        for Ja in self.J:
            X = E @ g @ Ja @ E.T  # X[a,b] = g(e_a, Ja e_b)
            # g(Ja e_a, e_b) = -X[a, b] by antisymmetry of g(., Ja .)
            Y = -X
            R += (
                np.einsum("ac,bd->abcd", X, Y)
                - np.einsum("bc,ad->abcd", X, Y)
                + 2.0 * np.einsum("ab,cd->abcd", X, Y)
            )
        return 0.25 * self.c * R


@dataclass(frozen=True)
class JDecomposition:
    """Squared norms of the J-component blocks over a split frame.

    ``blocks[alpha]`` is the full skew matrix g(e_a, J_alpha e_b) over the
    combined frame (first the s primary vectors, then the ell secondary
    ones); every norm is a slice of it.
    """

    norms_P: np.ndarray  # (3,)  primary-primary block
    norms_Q: np.ndarray  # (3,)  secondary-secondary block
    norms_PV: np.ndarray  # (3,) cross block
    blocks: np.ndarray  # (3, s+ell, s+ell)
    s: int
    ell: int

    @property
    def totals(self) -> np.ndarray:
        return np.array([float(np.sum(b * b)) for b in self.blocks])


def decompose_J(
    J: np.ndarray,
    g_at: np.ndarray,
    primary: np.ndarray,
    secondary: np.ndarray,
    frame_tol: float = 1e-10,
) -> JDecomposition:
    """Block decomposition of g(., J .) over a split orthonormal frame.

    For submersions ``primary`` is the horizontal frame and ``secondary``
    the vertical one, giving ``|P_a|^2``, ``|Q_a|^2`` and ``|P_a^V|^2``.
    In map mode pass the range frame and the range-perp frame of the
    target space.
    """
    J = np.asarray(J, dtype=float)
    g = np.asarray(g_at, dtype=float)
    P = np.atleast_2d(np.asarray(primary, dtype=float))
    S = np.atleast_2d(np.asarray(secondary, dtype=float))
    if P.size == 0:
        P = P.reshape(0, g.shape[0])
    if S.size == 0:
        S = S.reshape(0, g.shape[0])
    E = np.vstack([P, S])
    s, ell = P.shape[0], S.shape[0]
    if E.shape[0]:
        gram = E @ g @ E.T
        if np.abs(gram - np.eye(E.shape[0])).max() > frame_tol:
            raise FrameError(
                "split frames are not jointly orthonormal "
                f"(residual {np.abs(gram - np.eye(E.shape[0])).max():.3e})"
            )
    blocks = np.einsum("an,xnm,bm->xab", E, np.einsum("nk,xkm->xnm", g, J), E)
    norms_P = np.array([float(np.sum(b[:s, :s] ** 2)) for b in blocks])
    norms_Q = np.array([float(np.sum(b[s:, s:] ** 2)) for b in blocks])
    norms_PV = np.array([float(np.sum(b[:s, s:] ** 2)) for b in blocks])
    return JDecomposition(norms_P, norms_Q, norms_PV, blocks, s, ell)
