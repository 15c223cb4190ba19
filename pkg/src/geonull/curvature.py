"""Curvature tensors and the kernel of the curvature operator.

Conventions (all index placement follows these throughout the package):

* ``dg[i, j, k] = d g_ij / d x^k`` and ``d2g[i, j, k, l]`` adds ``d/d x^l``.
* Christoffel symbols ``Gamma[l, j, k]`` mean Gamma^l_jk with
  Gamma^l_jk = 1/2 g^{lm} (d_j g_km + d_k g_jm - d_m g_jk).
* ``rup[l, i, j, k]`` is R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
  + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik.
* ``rdown[i, j, k, l]`` is R_ijkl = g_lm R^m_ijk, so the sectional curvature
  of span{X, Y} has numerator R_ijkl X^i Y^j Y^k X^l and the unit round
  sphere comes out at +1.
* The scalar curvature is the double trace g^{il} g^{jk} R_ijkl, which is
  +2 on the unit sphere.

``nullity`` computes the kernel of v -> R(v, ., ., .) by flattening the
lowered tensor to an n^3 x n matrix and calling the rank-revealing kernel
from :mod:`geonull.numcore`; the returned basis is orthonormalized in the
metric inner product.  The relative rank tolerance defaults off the metric's
provenance: analytic jets use a much tighter cutoff than finite-difference
jets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .metricspace import MetricField
from .numcore import (
    REL_TOL_ANALYTIC,
    REL_TOL_FINITE_DIFFERENCE,
    invert,
    kernel,
)

__all__ = [
    "DegeneratePlaneError",
    "NullityResult",
    "CurvatureData",
    "christoffel",
    "riemann",
    "sectional",
    "scalar_curvature",
    "nullity",
    "curvature_data",
    "bianchi2_residual",
]


class DegeneratePlaneError(ValueError):
    def __init__(self, gram_det: float):
        super().__init__(
            f"plane spanned by the given vectors is degenerate (Gram determinant {gram_det:.3e})"
        )
        self.gram_det = gram_det


def _christoffel_from_jet(gi: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma[l, j, k] from the inverse metric and first metric derivatives."""
    s = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
    return 0.5 * np.einsum("lm,jkm->ljk", gi, s)


def christoffel(metric: MetricField, x) -> np.ndarray:
    """Christoffel symbols Gamma[l, j, k] = Gamma^l_jk at x."""
    g, dg = metric.jet(x, order=1)
    return _christoffel_from_jet(invert(g), dg)


def _riemann_from_jet(g, dg, d2g):
    gi = invert(g)
    gamma = _christoffel_from_jet(gi, dg)
    s = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
    # ds[j, k, m, i] = d_i s[j, k, m]
    ds = d2g.transpose(2, 0, 1, 3) + d2g.transpose(0, 2, 1, 3) - d2g
    dgi = -np.einsum("ap,pqd,qb->abd", gi, dg, gi)
    dgamma = 0.5 * (
        np.einsum("lmi,jkm->iljk", dgi, s) + np.einsum("lm,jkmi->iljk", gi, ds)
    )
    rup = (
        dgamma.transpose(1, 0, 2, 3)
        - dgamma.transpose(1, 2, 0, 3)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    rdown = np.einsum("lm,mijk->ijkl", g, rup)
    return gamma, rup, rdown


def riemann(metric: MetricField, x):
    """Curvature tensors ``(rup, rdown)`` at x (see module conventions)."""
    g, dg, d2g = metric.jet(x)
    _, rup, rdown = _riemann_from_jet(g, dg, d2g)
    return rup, rdown


def sectional(metric: MetricField, x, X, Y) -> float:
    """Sectional curvature of span{X, Y} at x.

    Raises :class:`DegeneratePlaneError` when the plane's Gram determinant is
    below 1e-12 relative to the product of the squared lengths.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    g, dg, d2g = metric.jet(x)
    _, _, rdown = _riemann_from_jet(g, dg, d2g)
    gxx = float(X @ g @ X)
    gyy = float(Y @ g @ Y)
    gxy = float(X @ g @ Y)
    gram = gxx * gyy - gxy * gxy
    scale = gxx * gyy
    if scale <= 0.0 or gram <= 1e-12 * scale:
        raise DegeneratePlaneError(gram)
    num = float(np.einsum("ijkl,i,j,k,l->", rdown, X, Y, Y, X))
    return num / gram


def scalar_curvature(metric: MetricField, x) -> float:
    """Double-trace scalar curvature g^{il} g^{jk} R_ijkl (unit sphere: +2)."""
    g, dg, d2g = metric.jet(x)
    _, _, rdown = _riemann_from_jet(g, dg, d2g)
    gi = invert(g)
    return float(np.einsum("il,jk,ijkl->", gi, gi, rdown))


@dataclass(frozen=True)
class NullityResult:
    """Kernel of the curvature operator at one point.

    ``basis`` has the kernel vectors as rows, orthonormal in the metric inner
    product; ``residuals[i]`` is max |R(basis[i], ., ., .)| and should sit at
    numerical-noise level; ``singular_values`` are those of the flattened
    n^3 x n curvature map, ``tolerance_used`` the absolute rank cutoff.
    """

    nullity: int
    conullity: int
    basis: np.ndarray
    residuals: np.ndarray
    singular_values: np.ndarray
    tolerance_used: float


def _default_rel_tol(metric: MetricField) -> float:
    if metric.provenance.kind == "finite-difference":
        return REL_TOL_FINITE_DIFFERENCE
    return REL_TOL_ANALYTIC


def _g_orthonormalize(vectors: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt in the g inner product; rows in, rows out."""
    out = []
    for v in np.array(vectors, dtype=float):
        for u in out:
            v = v - float(u @ g @ v) * u
        nrm = float(np.sqrt(v @ g @ v))
        if nrm < 1e-10:
            continue
        v = v / nrm
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        out.append(v)
    return np.array(out) if out else np.zeros((0, g.shape[0]))


def nullity(metric: MetricField, x, rel_tol: Optional[float] = None) -> NullityResult:
    """Kernel of v -> R(v, ., ., .) at x via SVD of the flattened tensor."""
    if rel_tol is None:
        rel_tol = _default_rel_tol(metric)
    g, dg, d2g = metric.jet(x)
    _, _, rdown = _riemann_from_jet(g, dg, d2g)
    n = metric.dim
    flat = rdown.reshape(n, n ** 3).T
    kr = kernel(flat, rel_tol=rel_tol)
    basis = _g_orthonormalize(kr.basis.T, g)
    k = basis.shape[0]
    residuals = np.array(
        [float(np.max(np.abs(np.einsum("ijkl,i->jkl", rdown, v)))) for v in basis]
    )
    return NullityResult(
        nullity=k,
        conullity=n - k,
        basis=basis,
        residuals=residuals,
        singular_values=kr.singular_values,
        tolerance_used=kr.tolerance_used,
    )


@dataclass(frozen=True)
class CurvatureData:
    """One-stop curvature summary at a point.

    ``scalar_trace`` is the double-trace scalar curvature and ``half_trace``
    is half of it; when the conullity is exactly 2 the complement of the
    kernel is a single plane and ``nonflat_plane_curvature`` holds its
    sectional curvature (None otherwise).
    """

    point: np.ndarray
    g: np.ndarray
    christoffel: np.ndarray
    rup: np.ndarray
    rdown: np.ndarray
    scalar_trace: float
    half_trace: float
    nullity: NullityResult
    nonflat_plane_curvature: Optional[float]


def _kernel_complement(basis: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g-orthonormal rows spanning the complement of the kernel rows."""
    n = g.shape[0]
    out = [v for v in basis]
    comp = []
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        for u in out:
            v = v - float(u @ g @ v) * u
        nrm = float(np.sqrt(max(v @ g @ v, 0.0)))
        if nrm < 1e-6:
            continue
        v = v / nrm
        out.append(v)
        comp.append(v)
    return np.array(comp) if comp else np.zeros((0, n))


def curvature_data(metric: MetricField, x, rel_tol: Optional[float] = None) -> CurvatureData:
    if rel_tol is None:
        rel_tol = _default_rel_tol(metric)
    pt = np.asarray(x, dtype=float)
    g, dg, d2g = metric.jet(pt)
    gamma, rup, rdown = _riemann_from_jet(g, dg, d2g)
    gi = invert(g)
    scal = float(np.einsum("il,jk,ijkl->", gi, gi, rdown))
    n = metric.dim
    flat = rdown.reshape(n, n ** 3).T
    kr = kernel(flat, rel_tol=rel_tol)
    basis = _g_orthonormalize(kr.basis.T, g)
    k = basis.shape[0]
    residuals = np.array(
        [float(np.max(np.abs(np.einsum("ijkl,i->jkl", rdown, v)))) for v in basis]
    )
    nres = NullityResult(k, n - k, basis, residuals, kr.singular_values, kr.tolerance_used)
    plane_curv = None
    if nres.conullity == 2:
        comp = _kernel_complement(basis, g)
        if comp.shape[0] == 2:
            X, Y = comp
            num = float(np.einsum("ijkl,i,j,k,l->", rdown, X, Y, Y, X))
            gxx = float(X @ g @ X)
            gyy = float(Y @ g @ Y)
            gxy = float(X @ g @ Y)
            plane_curv = num / (gxx * gyy - gxy * gxy)
    return CurvatureData(
        point=pt,
        g=g,
        christoffel=gamma,
        rup=rup,
        rdown=rdown,
        scalar_trace=scal,
        half_trace=0.5 * scal,
        nullity=nres,
        nonflat_plane_curvature=plane_curv,
    )


def bianchi2_residual(metric: MetricField, x, h: float = 1e-4) -> float:
    """Max-abs residual of the differential Bianchi identity at x.

    The covariant derivative of the lowered curvature tensor is formed with a
    central difference for the partial term plus the four Christoffel
    corrections, then summed cyclically over the first three slots.  For an
    exact curvature tensor the result is O(h^2) plus rounding noise.
    """
    pt = np.asarray(x, dtype=float)
    n = metric.dim
    g, dg, d2g = metric.jet(pt)
    gamma, _, r0 = _riemann_from_jet(g, dg, d2g)

    def rdown_at(q):
        gq, dgq, d2gq = metric.jet(q, check=False)
        return _riemann_from_jet(gq, dgq, d2gq)[2]

    dr = np.empty((n, n, n, n, n))
    eye = np.eye(n)
    for m in range(n):
        dr[m] = (rdown_at(pt + h * eye[m]) - rdown_at(pt - h * eye[m])) / (2.0 * h)
    cov = (
        dr
        - np.einsum("pmi,pjkl->mijkl", gamma, r0)
        - np.einsum("pmj,ipkl->mijkl", gamma, r0)
        - np.einsum("pmk,ijpl->mijkl", gamma, r0)
        - np.einsum("pml,ijkp->mijkl", gamma, r0)
    )
    cyc = cov + cov.transpose(1, 2, 0, 3, 4) + cov.transpose(2, 0, 1, 3, 4)
    return float(np.max(np.abs(cyc)))
