"""Metric charts with 2-jet access, plus the example-metric catalog.

A :class:`MetricField` is a single coordinate chart: a map from points to
symmetric positive-definite matrices, together with first and second
derivative access (the 2-jet of g) and a domain predicate.  Charts are
immutable after construction and evaluation is pure, so fields can be shared
freely across threads.

The catalog contains flat space, the round sphere, a polar-coordinate flat
plane, block products, and two warped families driven by a user-supplied
positive function p:

* ``catalog_sekigawa``: 3-dim chart (x,u,v) with coframe
  p dx,  du - v dx,  dv + u dx.
* ``catalog_conullity3``: 4-dim chart (x,u,v,w) with coframe
  p dx,  du - (v+w) dx,  dv + (u+w) dx,  dw - (v-u) dx.

For both families the coframe 1-forms are the ground truth: the metric, its
jets, and any orthonormal frame are derived from them rather than hard-coded,
and the 2-jet of g is assembled exactly from the 2-jet of p by the product
rule (analytic provenance, no finite differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .exprcalc import Expression, parse

__all__ = [
    "ChartDomainError",
    "Provenance",
    "MetricField",
    "CatalogEntry",
    "CATALOG",
    "catalog_euclidean",
    "catalog_sphere",
    "catalog_polar",
    "catalog_product",
    "catalog_sekigawa",
    "catalog_conullity3",
    "fd_jet",
    "finite_difference_field",
    "DEFAULT_BOX",
    "P_FLOOR",
]

DEFAULT_BOX = 3.0
# warped charts keep clear of the p -> 0 metric degeneracy except when the
# incompleteness probe deliberately drives toward it
P_FLOOR = 1e-3


class ChartDomainError(ValueError):
    def __init__(self, message: str, point):
        pt = np.asarray(point, dtype=float)
        super().__init__(f"{message}: point {np.array2string(pt, precision=6)}")
        self.point = pt


@dataclass(frozen=True)
class Provenance:
    kind: str  # "analytic" or "finite-difference"
    step: Optional[float] = None


class MetricField:
    """A Riemannian metric on one coordinate chart with 2-jet access.

    Parameters
    ----------
    dim : int
        Chart dimension n (at most 6).
    coordinates : sequence of str
        Ordered coordinate names; fixes the meaning of point components.
    jet : callable
        ``jet(x, order)`` returning ``(g, dg)`` for order 1 and
        ``(g, dg, d2g)`` for order 2, with ``dg[i, j, k] = d g_ij / d x^k``
        and ``d2g[i, j, k, l] = d^2 g_ij / d x^k d x^l``.
    domain : callable, optional
        Predicate on points; defaults to all of R^n.
    provenance : Provenance
        Whether derivatives are analytic or finite-difference; downstream
        rank tolerances key off this.
    annotations : dict, optional
        Machine-checkable expected facts used by the verify suites.
    preferred_frame : callable, optional
        ``x -> (k, n)`` array of g-orthonormal rows spanning the complement
        of the expected kernel, used as the default splitting-tensor basis.
    """

    def __init__(
        self,
        dim: int,
        coordinates: Sequence[str],
        jet: Callable,
        domain: Optional[Callable] = None,
        provenance: Provenance = Provenance("analytic"),
        name: str = "",
        annotations: Optional[dict] = None,
        preferred_frame: Optional[Callable] = None,
    ):
        if not 1 <= dim <= 6:
            raise ValueError(f"dimension {dim} outside supported range 1..6")
        if len(coordinates) != dim:
            raise ValueError(f"{len(coordinates)} coordinate names for dimension {dim}")
        self.dim = dim
        self.coordinates = tuple(coordinates)
        self._jet = jet
        self._domain = domain if domain is not None else (lambda x: True)
        self.provenance = provenance
        self.name = name or "metric"
        self.annotations = dict(annotations or {})
        self.preferred_frame = preferred_frame

    def __repr__(self) -> str:
        return f"MetricField({self.name!r}, dim={self.dim}, coords={self.coordinates})"

    def _point(self, x) -> np.ndarray:
        pt = np.asarray(x, dtype=float)
        if pt.shape != (self.dim,):
            raise ValueError(f"point shape {pt.shape} does not match dimension {self.dim}")
        return pt

    def contains(self, x) -> bool:
        return bool(self._domain(self._point(x)))

    def g(self, x, check: bool = True) -> np.ndarray:
        pt = self._point(x)
        if check and not self._domain(pt):
            raise ChartDomainError(f"point outside domain of {self.name}", pt)
        return self._jet(pt, 1)[0]

    def jet(self, x, order: int = 2, check: bool = True):
        """2-jet of g at x: ``(g, dg, d2g)``; ``order=1`` skips d2g."""
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        pt = self._point(x)
        if check and not self._domain(pt):
            raise ChartDomainError(f"point outside domain of {self.name}", pt)
        return self._jet(pt, order)

    def smallest_metric_eigenvalue(self, x, check: bool = True) -> float:
        return float(np.linalg.eigvalsh(self.g(x, check=check))[0])


# ---------------------------------------------------------------------------
# coframe-driven analytic jets


class _AffineEntry:
    """Coframe coefficient c0 + coeffs . x (gradient constant, Hessian zero)."""

    def __init__(self, n: int, c0: float = 0.0, coeffs: Optional[dict] = None):
        self.c0 = float(c0)
        self.grad = np.zeros(n)
        for index, value in (coeffs or {}).items():
            self.grad[index] = value

    def jet(self, x: np.ndarray, order: int):
        return self.c0 + float(self.grad @ x), self.grad, None


class _ExprEntry:
    """Coframe coefficient given by an expression over a subset of coordinates."""

    def __init__(self, n: int, expr: Expression, chart_indices: Sequence[int]):
        self.n = n
        self.expr = expr
        self.chart_indices = np.asarray(chart_indices, dtype=int)

    def jet(self, x: np.ndarray, order: int):
        j = self.expr.jet2(x[self.chart_indices])
        grad = np.zeros(self.n)
        grad[self.chart_indices] = j.gradient
        hess = np.zeros((self.n, self.n))
        hess[np.ix_(self.chart_indices, self.chart_indices)] = j.hessian
        return j.value, grad, hess


class _CoframeJet:
    """Assemble (g, dg, d2g) for g = B^T B from jets of the coframe matrix B.

    ``base`` holds the constant entries of B; ``dynamic`` lists the varying
    ones.  All products are einsum contractions, so a chart evaluation costs
    one expression jet plus a handful of dense contractions.
    """

    def __init__(self, n: int, base: np.ndarray, dynamic: list):
        self.n = n
        self.base = base
        self.dynamic = dynamic  # list of (row, col, entry)

    def __call__(self, x: np.ndarray, order: int):
        n = self.n
        B = self.base.copy()
        dB = np.zeros((n, n, n))
        d2B = np.zeros((n, n, n, n)) if order == 2 else None
        for row, col, entry in self.dynamic:
            value, grad, hess = entry.jet(x, order)
            B[row, col] = value
            dB[row, col] = grad
            if order == 2 and hess is not None:
                d2B[row, col] = hess
        g = B.T @ B
        half = np.einsum("aik,aj->ijk", dB, B)
        dg = half + half.transpose(1, 0, 2)
        if order == 1:
            return g, dg
        s = np.einsum("aikl,aj->ijkl", d2B, B)
        d2g = s + s.transpose(1, 0, 2, 3)
        cross = np.einsum("aik,ajl->ijkl", dB, dB)
        d2g = d2g + cross + cross.transpose(0, 1, 3, 2)
        return g, dg, d2g


def _box_domain(box: float, extra: Optional[Callable] = None) -> Callable:
    def inside(x: np.ndarray) -> bool:
        if np.max(np.abs(x)) > box:
            return False
        return True if extra is None else bool(extra(x))

    return inside


# ---------------------------------------------------------------------------
# catalog


def catalog_euclidean(n: int) -> MetricField:
    """Flat R^n with the identity metric; the zero-curvature baseline."""
    if not 1 <= n <= 6:
        raise ValueError(f"dimension {n} outside supported range 1..6")
    eye = np.eye(n)
    zero3 = np.zeros((n, n, n))
    zero4 = np.zeros((n, n, n, n))

    def jet(x, order):
        return (eye, zero3) if order == 1 else (eye, zero3, zero4)

    coords = tuple(f"x{i}" for i in range(n))
    return MetricField(n, coords, jet, name=f"euclidean({n})",
                       annotations={"expected_nullity": n, "expected_conullity": 0})


def catalog_sphere(radius: float) -> MetricField:
    """Round 2-sphere of the given radius in polar-angle coordinates.

    Chart (theta, phi) with g = diag(r^2, r^2 sin^2 theta); theta is kept in
    (0.1, pi - 0.1) away from the coordinate degeneracy at the poles.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r2 = radius * radius

    def jet(x, order):
        theta = x[0]
        g = np.diag([r2, r2 * math.sin(theta) ** 2])
        dg = np.zeros((2, 2, 2))
        dg[1, 1, 0] = r2 * math.sin(2.0 * theta)
        if order == 1:
            return g, dg
        d2g = np.zeros((2, 2, 2, 2))
        d2g[1, 1, 0, 0] = 2.0 * r2 * math.cos(2.0 * theta)
        return g, dg, d2g

    def domain(x):
        return 0.1 < x[0] < math.pi - 0.1

    return MetricField(
        2,
        ("theta", "phi"),
        jet,
        domain=domain,
        name=f"sphere({radius:g})",
        annotations={"expected_sectional": 1.0 / r2, "expected_scalar_trace": 2.0 / r2},
    )


def catalog_polar() -> MetricField:
    """Flat plane in polar coordinates (r, phi): g = diag(1, r^2).

    A curvature-free chart with nonzero Christoffel symbols, used as an
    integration and connection oracle.
    """

    def jet(x, order):
        r = x[0]
        g = np.diag([1.0, r * r])
        dg = np.zeros((2, 2, 2))
        dg[1, 1, 0] = 2.0 * r
        if order == 1:
            return g, dg
        d2g = np.zeros((2, 2, 2, 2))
        d2g[1, 1, 0, 0] = 2.0
        return g, dg, d2g

    def domain(x):
        return x[0] > 0.05

    return MetricField(2, ("r", "phi"), jet, domain=domain, name="polar",
                       annotations={"expected_scalar_trace": 0.0})


def catalog_product(a: MetricField, b: MetricField) -> MetricField:
    """Block-diagonal product metric; jets assembled blockwise."""
    n = a.dim + b.dim
    if n > 6:
        raise ValueError(f"product dimension {n} exceeds 6")
    na = a.dim
    coords_b = tuple(c if c not in a.coordinates else c + "_b" for c in b.coordinates)

    def jet(x, order):
        ja = a.jet(x[:na], order=order, check=False)
        jb = b.jet(x[na:], order=order, check=False)
        g = np.zeros((n, n))
        g[:na, :na] = ja[0]
        g[na:, na:] = jb[0]
        dg = np.zeros((n, n, n))
        dg[:na, :na, :na] = ja[1]
        dg[na:, na:, na:] = jb[1]
        if order == 1:
            return g, dg
        d2g = np.zeros((n, n, n, n))
        d2g[:na, :na, :na, :na] = ja[2]
        d2g[na:, na:, na:, na:] = jb[2]
        return g, dg, d2g

    def domain(x):
        return a.contains(x[:na]) and b.contains(x[na:])

    kinds = {a.provenance.kind, b.provenance.kind}
    steps = [p.step for p in (a.provenance, b.provenance) if p.step is not None]
    provenance = (
        Provenance("analytic")
        if kinds == {"analytic"}
        else Provenance("finite-difference", max(steps) if steps else None)
    )
    return MetricField(
        n,
        a.coordinates + coords_b,
        jet,
        domain=domain,
        provenance=provenance,
        name=f"product({a.name}, {b.name})",
        annotations={"factor_dims": (a.dim, b.dim)},
    )


def _as_expression(p, variables: tuple) -> Expression:
    if isinstance(p, Expression):
        if tuple(p.variables) != variables:
            raise ValueError(f"expression variables {p.variables} must be {variables}")
        return p
    return parse(str(p), variables)


def catalog_sekigawa(p, box: float = DEFAULT_BOX) -> MetricField:
    """Warped 3-dim family on chart (x,u,v) driven by p(x,u) > 0.

    Coframe: p dx, du - v dx, dv + u dx.  Expanding the sum of squares,
    g_xx = p^2 + u^2 + v^2, g_xu = -v, g_xv = u, and the (u,v) block is the
    identity.  Wherever its scalar curvature is nonzero the family has a
    2-dim curved plane and a 1-dim curvature kernel; the curved plane's
    sectional curvature is -(1/p) d^2p/du^2 (equal to half the double-trace
    scalar curvature).
    """
    expr = _as_expression(p, ("x", "u"))
    n = 3
    base = np.eye(n)
    base[0, 0] = 0.0
    dynamic = [
        (0, 0, _ExprEntry(n, expr, (0, 1))),       # p dx
        (1, 0, _AffineEntry(n, 0.0, {2: -1.0})),   # du - v dx
        (2, 0, _AffineEntry(n, 0.0, {1: 1.0})),    # dv + u dx
    ]
    jet = _CoframeJet(n, base, dynamic)

    def p_positive(x):
        return expr.value(x[:2]) > P_FLOOR

    def plane_scal(x):
        j = expr.jet2(np.asarray(x, dtype=float)[:2])
        return -j.hessian[1, 1] / j.value

    annotations = {
        "p_expression": expr,
        "p_chart_indices": (0, 1),
        "expected_conullity": 2,
        "scal_formula": plane_scal,
        "scal_formula_convention": "half_trace",
    }
    return MetricField(
        n,
        ("x", "u", "v"),
        jet,
        domain=_box_domain(box, p_positive),
        name=f"sekigawa(p={expr.source})",
        annotations=annotations,
    )


def catalog_conullity3(p, box: float = DEFAULT_BOX) -> MetricField:
    """Warped 4-dim family on chart (x,u,v,w) driven by p(x,u,w) > 0.

    Coframe: p dx, du - (v+w) dx, dv + (u+w) dx, dw - (v-u) dx.  Wherever
    the scalar curvature is nonzero the curvature kernel is the single
    direction d/dv and the conullity is 3.  The double-trace scalar
    curvature equals -(2/p)(d^2p/du^2 + d^2p/dw^2).

    The chart's preferred orthonormal frame for the kernel complement is
    derived as the dual frame of the coframe (no frame components are
    hard-coded): with F_a the dual of the a-th coframe form, the rows are
    (F_1 + F_3)/sqrt(2), F_0, (F_1 - F_3)/sqrt(2).
    """
    expr = _as_expression(p, ("x", "u", "w"))
    n = 4
    base = np.eye(n)
    base[0, 0] = 0.0
    dynamic = [
        (0, 0, _ExprEntry(n, expr, (0, 1, 3))),                 # p dx
        (1, 0, _AffineEntry(n, 0.0, {2: -1.0, 3: -1.0})),       # du - (v+w) dx
        (2, 0, _AffineEntry(n, 0.0, {1: 1.0, 3: 1.0})),         # dv + (u+w) dx
        (3, 0, _AffineEntry(n, 0.0, {2: -1.0, 1: 1.0})),        # dw - (v-u) dx
    ]
    jet = _CoframeJet(n, base, dynamic)

    def p_positive(x):
        return expr.value(x[[0, 1, 3]]) > P_FLOOR

    def trace_scal(x):
        j = expr.jet2(np.asarray(x, dtype=float)[[0, 1, 3]])
        return -2.0 * (j.hessian[1, 1] + j.hessian[2, 2]) / j.value

    def preferred_frame(x):
        pt = np.asarray(x, dtype=float)
        pval = expr.value(pt[[0, 1, 3]])
        u, v, w = pt[1], pt[2], pt[3]
        f0 = np.array([1.0, v + w, -(u + w), v - u]) / pval
        s = 1.0 / math.sqrt(2.0)
        e1 = np.array([0.0, s, 0.0, s])
        e3 = np.array([0.0, s, 0.0, -s])
        return np.vstack([e1, f0, e3])

    annotations = {
        "p_expression": expr,
        "p_chart_indices": (0, 1, 3),
        "expected_conullity": 3,
        "kernel_coordinate": "v",
        "scal_formula": trace_scal,
        "scal_formula_convention": "scalar_trace",
    }
    return MetricField(
        n,
        ("x", "u", "v", "w"),
        jet,
        domain=_box_domain(box, p_positive),
        name=f"conullity3(p={expr.source})",
        annotations=annotations,
        preferred_frame=preferred_frame,
    )


# ---------------------------------------------------------------------------
# finite-difference jets


def fd_jet(field: MetricField, x, h: float = 2e-4):
    """Second-order central-difference 2-jet of g; fallback derivative provider.

    Raises :class:`ChartDomainError` if a stencil point leaves the domain,
    so the base point should be interior by a margin of 2h.
    """
    pt = np.asarray(x, dtype=float)
    n = field.dim
    g0 = field.g(pt)
    eye = np.eye(n)
    gp = [field.g(pt + h * eye[k]) for k in range(n)]
    gm = [field.g(pt - h * eye[k]) for k in range(n)]
    dg = np.stack([(gp[k] - gm[k]) / (2.0 * h) for k in range(n)], axis=2)
    d2g = np.zeros((n, n, n, n))
    for k in range(n):
        d2g[:, :, k, k] = (gp[k] - 2.0 * g0 + gm[k]) / (h * h)
        for l in range(k + 1, n):
            gpp = field.g(pt + h * eye[k] + h * eye[l])
            gpm = field.g(pt + h * eye[k] - h * eye[l])
            gmp = field.g(pt - h * eye[k] + h * eye[l])
            gmm = field.g(pt - h * eye[k] - h * eye[l])
            mixed = (gpp - gpm - gmp + gmm) / (4.0 * h * h)
            d2g[:, :, k, l] = mixed
            d2g[:, :, l, k] = mixed
    return g0, dg, d2g


def finite_difference_field(field: MetricField, h: float = 2e-4) -> MetricField:
    """Wrap ``field`` so its jets come from :func:`fd_jet` (value access only)."""

    def jet(x, order):
        g, dg, d2g = fd_jet(field, x, h)
        return (g, dg) if order == 1 else (g, dg, d2g)

    return MetricField(
        field.dim,
        field.coordinates,
        jet,
        domain=field._domain,
        provenance=Provenance("finite-difference", h),
        name=f"fd({field.name})",
        annotations=field.annotations,
        preferred_frame=field.preferred_frame,
    )


# ---------------------------------------------------------------------------
# registry for the CLI


@dataclass(frozen=True)
class CatalogEntry:
    """A named metric family with its checkable expected facts."""

    name: str
    summary: str
    parameters: tuple
    build: Callable
    expectations: tuple  # (fact, operation that checks it) pairs


CATALOG = {
    "euclidean": CatalogEntry(
        "euclidean",
        "flat R^n, identity metric",
        ("dim",),
        lambda dim=4, **_: catalog_euclidean(int(dim)),
        (
            ("Riemann tensor vanishes identically", "curvature.riemann"),
            ("nullity n, conullity 0", "curvature.nullity"),
        ),
    ),
    "sphere": CatalogEntry(
        "sphere",
        "round 2-sphere of radius r, chart (theta, phi)",
        ("radius",),
        lambda radius=1.0, **_: catalog_sphere(float(radius)),
        (
            ("sectional curvature 1/r^2", "curvature.sectional"),
            ("double-trace scalar curvature 2/r^2", "curvature.scalar_curvature"),
        ),
    ),
    "polar": CatalogEntry(
        "polar",
        "flat plane in polar coordinates (r, phi)",
        (),
        lambda **_: catalog_polar(),
        (
            ("curvature vanishes; straight lines solve the geodesic equation", "flows.geodesic"),
        ),
    ),
    "product": CatalogEntry(
        "product",
        "sphere(radius) x euclidean(dim-2), block-diagonal",
        ("radius", "dim"),
        lambda radius=1.0, dim=4, **_: catalog_product(
            catalog_sphere(float(radius)), catalog_euclidean(int(dim) - 2)
        ),
        (
            ("kernel of curvature = flat factor, conullity 2", "curvature.nullity"),
            ("splitting tensor vanishes", "splitting.splitting_tensor"),
        ),
    ),
    "sekigawa": CatalogEntry(
        "sekigawa",
        "warped 3-dim family on (x,u,v) driven by p(x,u)",
        ("p",),
        lambda p="2+u*u", box=DEFAULT_BOX, **_: catalog_sekigawa(p, box=float(box)),
        (
            ("conullity 2 wherever scalar curvature is nonzero", "curvature.nullity"),
            ("curved-plane curvature equals -(1/p) d2p/du2", "curvature.scalar_curvature (half_trace)"),
        ),
    ),
    "conullity3": CatalogEntry(
        "conullity3",
        "warped 4-dim family on (x,u,v,w) driven by p(x,u,w)",
        ("p",),
        lambda p="3+cos(u)+cos(w)", box=DEFAULT_BOX, **_: catalog_conullity3(p, box=float(box)),
        (
            ("kernel of curvature = span{d/dv}, conullity 3", "curvature.nullity"),
            ("double-trace scalar curvature equals -(2/p)(d2p/du2 + d2p/dw2)", "curvature.scalar_curvature"),
            ("splitting tensor strictly upper triangular with entry sqrt(2)/p", "splitting.splitting_tensor"),
            ("span{du,dv,dw} flat and totally geodesic", "flows.flatness_probe"),
        ),
    ),
}
