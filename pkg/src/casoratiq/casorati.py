"""Casorati curvatures, hyperplane extremization and the constrained quadratic solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import DimensionError, OptimizationError, ProvisoError

__all__ = [
    "CasoratiInput",
    "HyperplaneExtrema",
    "TripathiInstance",
    "casorati",
    "casorati_subspace",
    "hyperplane_extrema",
    "delta_casorati",
    "tripathi_minimize",
    "tripathi_objective",
    "tripathi_minimize_numeric",
]

_SOBOL_SEED = 20240915
_START_COUNT = 64
_POLISH_COUNT = 12
_GRAD_TOL = 1e-10
_MAX_ITERS = 200
_DENSE_COUNT = 1 << 17  # 131072 >= 1e5
_DENSE_LIMIT = 5  # dense certification only up to this many distribution dims
_TIE_VALUE = 1e-10
_TIE_DIRECTION = 1e-3


@dataclass(frozen=True)
class CasoratiInput:
    """Coefficient slices h^alpha_{ij} of a fundamental tensor.

    ``coeffs`` has shape (n_codist, n, n); ``kind`` declares the symmetry
    of each slice ("symmetric" for B and T, "skew" for A).
    """

    coeffs: np.ndarray
    kind: str = "symmetric"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None, :, :]
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise DimensionError(f"coefficient array has shape {c.shape}")
        if c.shape[1] < 1:
            raise DimensionError("empty coefficient array")
        if self.kind not in ("symmetric", "skew"):
            raise ValueError(f"unknown kind {self.kind!r}")
        scale = max(1.0, np.abs(c).max() if c.size else 1.0)
        sign = 1.0 if self.kind == "symmetric" else -1.0
        worst = np.abs(c - sign * c.transpose(0, 2, 1)).max() if c.size else 0.0
        if worst > 1e-9 * scale:
            raise DimensionError(
                f"coefficients violate declared {self.kind} symmetry by {worst:.3e}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_codist(self) -> int:
        return self.coeffs.shape[0]

    def norm_sq(self) -> float:
        return float(np.sum(self.coeffs**2))

    def trace_norm_sq(self) -> float:
        traces = np.trace(self.coeffs, axis1=1, axis2=2)
        return float(np.sum(traces**2))


def casorati(inp: CasoratiInput) -> float:
    """Casorati curvature (1/n) sum of squared coefficients."""
    return inp.norm_sq() / inp.n


def casorati_subspace(inp: CasoratiInput, indices=None, normal=None) -> float:
    """Casorati curvature of a subspace.

    Either restrict to coordinate ``indices`` (k >= 2 of them) or hand a
    unit ``normal`` whose orthogonal hyperplane is meant; the projector
    route reduces to the coordinate one when the normal is a basis vector.
    """
    if (indices is None) == (normal is None):
        raise ValueError("pass exactly one of indices / normal")
    h = inp.coeffs
    if indices is not None:
        idx = np.asarray(indices, dtype=int)
        k = idx.shape[0]
        if k < 2:
            raise DimensionError(f"subspace dimension {k} < 2")
        sub = h[:, idx[:, None], idx[None, :]]
        return float(np.sum(sub**2)) / k
    u = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise DimensionError("hyperplane normal must be a unit vector")
    if inp.n < 2:
        raise DimensionError("hyperplane of a 1-dimensional space")
    P = np.eye(inp.n) - np.outer(u, u)
    proj = np.einsum("ij,ajk,kl->ail", P, h, P)
    return float(np.sum(proj**2)) / (inp.n - 1)


def _phi_batch(h: np.ndarray, U: np.ndarray) -> np.ndarray:
    """sum_a |P h_a P|_F^2 for every row of U (unit normals)."""
    total_sq = float(np.sum(h**2))
    out = np.full(U.shape[0], total_sq)
    for ha in h:
        hu = U @ ha.T
        htu = U @ ha
        quad = np.einsum("mn,mn->m", U, hu)
        out -= np.einsum("mn,mn->m", hu, hu)
        out -= np.einsum("mn,mn->m", htu, htu)
        out += quad * quad
    return out


def _grad_batch(h: np.ndarray, U: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(U)
    for ha in h:
        sym2 = ha.T @ ha + ha @ ha.T
        sym1 = ha + ha.T
        quad = np.einsum("mn,mn->m", U, U @ ha.T)
        grad += -2.0 * U @ sym2.T + 2.0 * quad[:, None] * (U @ sym1.T)
    return grad


def _hess_single(h: np.ndarray, u: np.ndarray) -> np.ndarray:
    H = np.zeros((u.shape[0], u.shape[0]))
    for ha in h:
        sym2 = ha.T @ ha + ha @ ha.T
        sym1 = ha + ha.T
        su = sym1 @ u
        H += -2.0 * sym2 + 2.0 * float(u @ ha @ u) * sym1 + 2.0 * np.outer(su, su)
    return H


def _sphere_starts(n: int, count: int, seed: int) -> np.ndarray:
    sobol = qmc.Sobol(d=n, scramble=True, seed=seed)
    m = int(math.ceil(math.log2(max(count, 2))))
    pts = sobol.random_base2(m=m)[:count]
    z = ndtri(np.clip(pts, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return z / norms


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    """Columns span the tangent space of the sphere at u (Householder)."""
    n = u.shape[0]
    e = np.zeros(n)
    e[0] = 1.0
    v = u + e if u[0] >= 0 else u - e
    v /= np.linalg.norm(v)
    Q = np.eye(n) - 2.0 * np.outer(v, v)
    return Q[:, 1:]


def _newton_polish(h, u, sign, tol, max_iters=60):
    """Riemannian Newton on the sphere, safeguarded by gradient descent.

    Value-gated descent bottoms out at the value rounding floor well
    before the gradient tolerance, so the polish iterates on the
    gradient itself; the analytic Hessian gives quadratic tail
    convergence at nondegenerate extrema.
    """
    for _ in range(max_iters):
        grad = sign * _grad_batch(h, u[None, :])[0]
        rgrad = grad - (grad @ u) * u
        gnorm = np.linalg.norm(rgrad)
        if gnorm < tol:
            return u, True
        Qt = _tangent_basis(u)
        H = sign * _hess_single(h, u)
        Ht = Qt.T @ H @ Qt - (grad @ u) * np.eye(Qt.shape[1])
        gt = Qt.T @ rgrad
        try:
            z = np.linalg.solve(Ht + 1e-14 * np.eye(Ht.shape[0]), -gt)
        except np.linalg.LinAlgError:
            z = -gt
        if z @ gt > 0:  # not a descent direction: fall back to gradient
            z = -gt
        step = 1.0
        improved = False
        for _ in range(30):
            cand = u + step * (Qt @ z)
            cand /= np.linalg.norm(cand)
            cgrad = sign * _grad_batch(h, cand[None, :])[0]
            crg = cgrad - (cgrad @ cand) * cand
            if np.linalg.norm(crg) < gnorm:
                u = cand
                improved = True
                break
            step *= 0.5
        if not improved:
            return u, gnorm < tol
    grad = sign * _grad_batch(h, u[None, :])[0]
    rgrad = grad - (grad @ u) * u
    return u, bool(np.linalg.norm(rgrad) < tol)


def _projected_descent(h, U, sign, tol, max_iters):
    """Batched projected-gradient descent of sign * phi on the sphere.

    Returns (U, values, converged_mask, iterations_used).  Convergence
    here means the value-gated phase stalled or the gradient already
    meets the tolerance; callers polish afterwards.
    """
    vals = sign * _phi_batch(h, U)
    steps = np.full(U.shape[0], 0.1)
    done = np.zeros(U.shape[0], dtype=bool)
    iters = 0
    for iters in range(1, max_iters + 1):
        grad = sign * _grad_batch(h, U)
        rgrad = grad - np.einsum("mn,mn->m", grad, U)[:, None] * U
        gnorm = np.linalg.norm(rgrad, axis=1)
        done |= gnorm < tol
        active = ~done
        if not active.any():
            break
        cand = U - steps[:, None] * rgrad
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        cand_vals = sign * _phi_batch(h, cand)
        accept = active & (cand_vals < vals)
        U[accept] = cand[accept]
        vals[accept] = cand_vals[accept]
        steps[accept] *= 1.2
        steps[active & ~accept] *= 0.5
        done |= steps < 1e-13  # value rounding floor reached
        if done.all():
            break
    grad = sign * _grad_batch(h, U)
    rgrad = grad - np.einsum("mn,mn->m", grad, U)[:, None] * U
    converged = np.linalg.norm(rgrad, axis=1) < tol
    return U, vals, converged, iters


@dataclass(frozen=True)
class HyperplaneExtrema:
    """inf / sup of the hyperplane Casorati curvature with audit data."""

    inf_CL: float
    sup_CL: float
    argmin_normal: np.ndarray
    argmax_normal: np.ndarray
    certified_gap: Optional[float]
    degenerate_min: bool
    degenerate_max: bool
    audit: dict = field(default_factory=dict)


def _run_side(h, n, sign, seed_offset):
    tol = _GRAD_TOL * max(1.0, float(np.sum(h**2)))
    starts = _sphere_starts(n, _START_COUNT, _SOBOL_SEED + seed_offset)
    U, vals, _, iters = _projected_descent(h, starts.copy(), sign, tol, _MAX_ITERS)
    order = np.argsort(vals)
    polished = []  # (phi value, direction, converged, start index)
    for idx in order[:_POLISH_COUNT]:
        u, ok = _newton_polish(h, U[idx].copy(), sign, tol)
        polished.append((float(_phi_batch(h, u[None, :])[0]), u, ok, int(idx)))
    polished.sort(key=lambda rec: sign * rec[0])
    if not any(rec[2] for rec in polished):
        raise OptimizationError(
            f"no start reached gradient tolerance {tol:.1e}",
            best=polished[0][0] / (n - 1),
        )
    best_val, best_u, _, best_idx = polished[0]
    degenerate = False
    scale = max(1.0, float(np.sum(h**2)))
    for val, u, _, _ in polished[1:]:
        if abs(val - best_val) >= _TIE_VALUE * scale:
            break
        if 1.0 - abs(float(u @ best_u)) > _TIE_DIRECTION:
            degenerate = True
            break
    audit = {
        "start_index": best_idx,
        "iterations": int(iters),
        "converged_starts": int(sum(rec[2] for rec in polished)),
    }
    return best_val, best_u, degenerate, audit


def _dense_directions(n: int, count: int) -> np.ndarray:
    sobol = qmc.Sobol(d=n, scramble=True, seed=_SOBOL_SEED + 7 * n)
    m = int(math.ceil(math.log2(count)))
    z = ndtri(np.clip(sobol.random_base2(m=m), 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return z / norms


def hyperplane_extrema(inp: CasoratiInput, certify: bool = True) -> HyperplaneExtrema:
    """Extremize the hyperplane Casorati curvature over all unit normals.

    Deterministic multi-start projected gradient on the sphere; for
    n <= 5 a dense low-discrepancy sweep (with a local polish of the top
    candidates) certifies that no basin was missed.  The dense sweep is
    an independent evaluation path: its candidates never come from the
    multi-start optimizer.  Pass ``certify=False`` to skip it in bulk
    sweeps where only the extrema are needed.
    """
    h = inp.coeffs
    n = inp.n
    if n < 3:
        raise DimensionError(f"hyperplane extremization needs n >= 3, got {n}")
    inf_phi, u_min, deg_min, audit_min = _run_side(h, n, +1.0, 0)
    sup_phi, u_max, deg_max, audit_max = _run_side(h, n, -1.0, 1)
    inf_cl = inf_phi / (n - 1)
    sup_cl = sup_phi / (n - 1)
    audit = {"min": audit_min, "max": audit_max, "starts": _START_COUNT}

    certified_gap = None
    if not certify:
        pass
    elif n <= _DENSE_LIMIT:
        U = _dense_directions(n, _DENSE_COUNT)
        dense_vals = _phi_batch(h, U)
        tol = _GRAD_TOL * max(1.0, float(np.sum(h**2)))
        gaps = []
        for sign, opt_phi in ((+1.0, inf_phi), (-1.0, sup_phi)):
            order = np.argsort(sign * dense_vals)[:8]
            cand, vals, _, _ = _projected_descent(h, U[order].copy(), sign, tol, _MAX_ITERS)
            best = np.inf
            for u in cand:
                u, _ = _newton_polish(h, u.copy(), sign, tol)
                best = min(best, sign * float(_phi_batch(h, u[None, :])[0]))
            gaps.append(abs(sign * best - opt_phi) / (n - 1))
        certified_gap = float(max(gaps))
        audit["dense_count"] = int(U.shape[0])
    else:
        # spot check only: flag (never certify) at higher dimension
        U = _dense_directions(n, 1 << 14)
        dense_vals = _phi_batch(h, U) / (n - 1)
        audit["sampling_flag"] = bool(
            dense_vals.min() < inf_cl - 1e-8 or dense_vals.max() > sup_cl + 1e-8
        )
    return HyperplaneExtrema(
        inf_CL=inf_cl,
        sup_CL=sup_cl,
        argmin_normal=u_min,
        argmax_normal=u_max,
        certified_gap=certified_gap,
        degenerate_min=deg_min,
        degenerate_max=deg_max,
        audit=audit,
    )


def delta_casorati(C: float, extrema: HyperplaneExtrema, n_dist: int) -> tuple[float, float]:
    """Normalized delta-Casorati pair (delta_C, delta_C_hat).

    delta_C(n-1)     = C/2 + (n+1)/(2n) * inf C^L
    delta_C_hat(n-1) = 2C  - (2n-1)/(2n) * sup C^L
    """
    if n_dist < 3:
        raise DimensionError(f"delta-Casorati needs n >= 3, got {n_dist}")
    n = n_dist
    delta = 0.5 * C + (n + 1) / (2.0 * n) * extrema.inf_CL
    delta_hat = 2.0 * C - (2.0 * n - 1) / (2.0 * n) * extrema.sup_CL
    return float(delta), float(delta_hat)


# -- constrained quadratic minimization ------------------------------------


@dataclass(frozen=True)
class TripathiInstance:
    """min of lam1 sum_{i<n} t_i^2 + lam2 t_n^2 - 2 sum_{i<j} t_i t_j on sum t = k."""

    n: int
    k: float
    lam1: float
    lam2: float

    def __post_init__(self):
        if self.n < 3:
            raise DimensionError(f"n must be >= 3, got {self.n}")
        if self.lam1 <= 0 or self.lam2 <= 0:
            raise ProvisoError("lam1 and lam2 must be positive")

    @classmethod
    def from_lam1(cls, n: int, k: float, lam1: float) -> "TripathiInstance":
        if lam1 <= n - 2:
            raise ProvisoError(f"lam1 = {lam1} must exceed n - 2 = {n - 2}")
        return cls(n, k, lam1, (n - 1) / (lam1 - n + 2))

    def proviso_holds(self, rtol: float = 1e-12) -> bool:
        target = (self.n - 1) / (self.lam1 - self.n + 2)
        return abs(self.lam2 - target) <= rtol * max(1.0, abs(target))


def tripathi_objective(inst: TripathiInstance, t: np.ndarray) -> np.ndarray:
    """Objective value(s); accepts a single point or a batch of rows."""
    t = np.asarray(t, dtype=float)
    single = t.ndim == 1
    t = np.atleast_2d(t)
    sq = t**2
    quad = inst.lam1 * sq[:, :-1].sum(axis=1) + inst.lam2 * sq[:, -1]
    s = t.sum(axis=1)
    cross = s * s - sq.sum(axis=1)  # 2 sum_{i<j} t_i t_j
    out = quad - cross
    return float(out[0]) if single else out


def tripathi_minimize(inst: TripathiInstance) -> tuple[np.ndarray, float]:
    """Closed-form global minimizer, valid only under the proviso."""
    if not inst.proviso_holds():
        raise ProvisoError(
            "closed form requires lam2 = (n-1)/(lam1-n+2); "
            f"got lam1={inst.lam1}, lam2={inst.lam2}"
        )
    t = np.full(inst.n, inst.k / (inst.lam1 + 1.0))
    t[-1] = inst.k / (inst.lam2 + 1.0)
    if abs(t.sum() - inst.k) > 1e-12 * max(1.0, abs(inst.k)):
        raise ProvisoError("closed-form point does not satisfy the constraint")
    return t, tripathi_objective(inst, t)


def tripathi_minimize_numeric(
    inst: TripathiInstance, tol: float = 1e-13, max_iters: int = 20000
) -> tuple[np.ndarray, float]:
    """Projected-gradient minimizer on the hyperplane (oracle path).

    Exact line search along the projected gradient; independent of the
    closed form.
    """
    n = inst.n
    t = np.full(n, inst.k / n)
    diag = np.full(n, inst.lam1 + 1.0)
    diag[-1] = inst.lam2 + 1.0
    scale = max(1.0, abs(inst.k))
    for _ in range(max_iters):
        # f = sum diag t^2 - (sum t)^2 on the constraint; grad = 2 diag t - 2k
        grad = 2.0 * diag * t - 2.0 * inst.k
        d = grad - grad.mean()
        gnorm = np.linalg.norm(d)
        if gnorm < tol * scale:
            break
        # exact step for the quadratic: alpha = (d.g) / (2 d^T H d / 2)
        hd = 2.0 * diag * d - 2.0 * d.sum()  # H d with H = 2 diag - 2 ones
        denom = float(d @ hd)
        if denom <= 0:
            raise OptimizationError("quadratic not convex along descent direction")
        t = t - (float(d @ grad) / denom) * d
    return t, tripathi_objective(inst, t)
