"""The splitting tensor of the curvature kernel and its Riccati evolution.

For a unit vector field T spanning (a line inside) the curvature kernel, the
splitting tensor is the endomorphism of the orthogonal complement

    C_T(X) = -(nabla_X T)^perp.

Matrices here always act on columns: entry ``C[i, j]`` is the metric inner
product of C_T(e_j) with e_i for the chosen g-orthonormal complement basis
(e_1, ..., e_k).  Along a geodesic with velocity T the tensor, expressed in
a parallel frame, satisfies the matrix Riccati equation C' = C^2, whose
solution through C0 is C(t) = C0 (I - t C0)^{-1}.  ``riccati_closed_form``,
``riccati_ode`` and ``trace_det_evolution`` implement that law three ways,
and ``evolve_along_nullity_geodesic`` checks the freshly measured tensor
against it at sample points.

T is obtained by finite differences of the pointwise curvature kernel, so
classification tolerances must absorb FD noise: a nilpotent matrix perturbed
by eps shows spurious eigenvalues of size about eps^(1/2), which is why
``classify`` takes an explicit tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .curvature import christoffel, nullity
from .flows import GeodesicPath, geodesic, parallel_transport
from .metricspace import MetricField
from .numcore import eigenvalues, invert

__all__ = [
    "AlignmentError",
    "KernelDimensionError",
    "NonUnitFieldError",
    "RiccatiBlowupError",
    "SplittingTensor",
    "BlockInvariants",
    "EvolutionReport",
    "nullity_field",
    "kernel_section",
    "splitting_tensor",
    "classify",
    "riccati_closed_form",
    "riccati_ode",
    "trace_det_evolution",
    "evolve_along_nullity_geodesic",
]

BLOWUP_LIMIT = 1e8


class KernelDimensionError(ValueError):
    def __init__(self, expected: int, found: int, point):
        super().__init__(
            f"curvature kernel has dimension {found}, expected {expected}, "
            f"at point {np.array2string(np.asarray(point, dtype=float), precision=6)}"
        )
        self.expected = expected
        self.found = found


class AlignmentError(ValueError):
    pass


class NonUnitFieldError(ValueError):
    def __init__(self, norm: float):
        super().__init__(
            f"field is not unit length (|T|_g = {norm:.6g}); "
            "pass allow_non_unit=True to accept it"
        )
        self.norm = norm


class RiccatiBlowupError(ArithmeticError):
    def __init__(self, t: float, detail: str):
        super().__init__(f"Riccati evolution blew up at t = {t:.6g}: {detail}")
        self.t = t


def nullity_field(
    metric: MetricField,
    x,
    reference=None,
    rel_tol: Optional[float] = None,
) -> np.ndarray:
    """Unit curvature-kernel vector at x, with a deterministic sign.

    Requires a 1-dimensional kernel (:class:`KernelDimensionError` otherwise;
    use :func:`kernel_section` when the kernel is larger).  The sign makes
    the largest-magnitude component positive, or, when ``reference`` is
    given, makes the metric inner product with it positive; a reference
    nearly orthogonal to the kernel raises :class:`AlignmentError`.
    """
    pt = np.asarray(x, dtype=float)
    res = nullity(metric, pt, rel_tol=rel_tol)
    if res.nullity != 1:
        raise KernelDimensionError(1, res.nullity, pt)
    t_vec = res.basis[0]
    if reference is None:
        return t_vec
    g = metric.jet(pt, order=1, check=False)[0]
    align = float(np.asarray(reference, dtype=float) @ g @ t_vec)
    if abs(align) < 1e-8:
        raise AlignmentError(
            f"reference vector is orthogonal to the curvature kernel at "
            f"{np.array2string(pt, precision=6)} (inner product {align:.3e})"
        )
    return t_vec if align > 0 else -t_vec


def kernel_section(
    metric: MetricField,
    x,
    reference=None,
    rel_tol: Optional[float] = None,
):
    """Kernel basis plus a unit section of it chosen by a reference vector.

    Returns ``(section, basis)`` where ``basis`` rows are the g-orthonormal
    kernel vectors and ``section`` is the normalized projection of
    ``reference`` onto the kernel (the first basis vector when no reference
    is given).  Raises :class:`KernelDimensionError` for a trivial kernel.
    """
    pt = np.asarray(x, dtype=float)
    res = nullity(metric, pt, rel_tol=rel_tol)
    if res.nullity == 0:
        raise KernelDimensionError(1, 0, pt)
    if reference is None:
        return res.basis[0], res.basis
    g = metric.jet(pt, order=1, check=False)[0]
    ref = np.asarray(reference, dtype=float)
    section = sum(float(b @ g @ ref) * b for b in res.basis)
    nrm = float(np.sqrt(section @ g @ section))
    if nrm < 1e-8:
        raise AlignmentError(
            "reference vector is orthogonal to the curvature kernel at "
            + np.array2string(pt, precision=6)
        )
    return section / nrm, res.basis


@dataclass(frozen=True)
class SplittingTensor:
    """Splitting tensor at a point.

    ``matrix[i, j] = -<nabla_{basis[j]} T, basis[i]>_g`` for the
    g-orthonormal complement ``basis`` (rows); ``normal_form_entries`` holds
    (a, b, c) = (C[0,1], C[1,2], C[0,2]) when the matrix is 3x3 and strictly
    upper triangular to within ``triangular_residual`` (None otherwise).
    """

    point: np.ndarray
    matrix: np.ndarray
    basis: np.ndarray
    field_value: np.ndarray
    step: float
    triangular_residual: float
    normal_form_entries: Optional[tuple]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def det_block(self) -> float:
        m = self.matrix
        return 0.5 * (np.trace(m) ** 2 - np.trace(m @ m))


def _default_field(metric: MetricField, x: np.ndarray, rel_tol) -> Callable:
    t0 = nullity_field(metric, x, rel_tol=rel_tol)

    def field(q):
        return nullity_field(metric, q, reference=t0, rel_tol=rel_tol)

    return field


def _complement_basis(metric: MetricField, x: np.ndarray, t_vec: np.ndarray) -> np.ndarray:
    """g-orthonormal complement of T from coordinate directions.

    Dropping the coordinate carrying T's largest component keeps the
    remaining directions independent of T; candidates are tried in order of
    decreasing component size in case the leading choice degenerates.
    """
    g = metric.jet(x, order=1, check=False)[0]
    n = metric.dim
    tn = t_vec / float(np.sqrt(t_vec @ g @ t_vec))
    for drop in np.argsort(-np.abs(tn)):
        rows = [tn]
        comp = []
        for i in range(n):
            if i == drop:
                continue
            v = np.zeros(n)
            v[i] = 1.0
            for u in rows:
                v = v - float(u @ g @ v) * u
            nrm = float(np.sqrt(max(v @ g @ v, 0.0)))
            if nrm < 1e-8:
                break
            v = v / nrm
            rows.append(v)
            comp.append(v)
        if len(comp) == n - 1:
            return np.array(comp)
    raise AlignmentError(
        f"could not build a complement basis at {np.array2string(x, precision=6)}"
    )


def splitting_tensor(
    metric: MetricField,
    x,
    basis=None,
    field: Optional[Callable] = None,
    h: float = 1e-4,
    rel_tol: Optional[float] = None,
    allow_non_unit: bool = False,
) -> SplittingTensor:
    """Measure C_T at x by Richardson-extrapolated central differences of T.

    ``field`` maps points to kernel vectors (default: the curvature kernel
    with sign aligned to its value at x); ``basis`` gives the complement
    rows (default: the chart's preferred frame, else a coordinate-built
    complement).  A non-unit field raises :class:`NonUnitFieldError` unless
    ``allow_non_unit`` is set, since the splitting tensor is defined through
    a unit T.
    """
    pt = np.asarray(x, dtype=float)
    n = metric.dim
    g = metric.jet(pt, order=1, check=False)[0]
    if field is None:
        field = _default_field(metric, pt, rel_tol)
    t0 = np.asarray(field(pt), dtype=float)
    t_norm = float(np.sqrt(t0 @ g @ t0))
    if abs(t_norm - 1.0) > 1e-6 and not allow_non_unit:
        raise NonUnitFieldError(t_norm)
    if basis is None:
        if metric.preferred_frame is not None:
            basis = metric.preferred_frame(pt)
        else:
            basis = _complement_basis(metric, pt, t0)
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] != n:
        raise ValueError("basis must be rows of chart-dimension vectors")

    # dT[k, j] ~ d T^k / d x^j, one Richardson level on the central difference
    eye = np.eye(n)
    dT = np.empty((n, n))
    for j in range(n):
        def central(step):
            fp = np.asarray(field(pt + step * eye[j]), dtype=float)
            fm = np.asarray(field(pt - step * eye[j]), dtype=float)
            return (fp - fm) / (2.0 * step)

        d1 = central(h)
        d2 = central(2.0 * h)
        dT[:, j] = (4.0 * d1 - d2) / 3.0
    gamma = christoffel(metric, pt)
    # nabla_{e_j} T = e_j^m (dT[., m] + Gamma[., m, a] T^a)
    full = dT + np.einsum("kma,a->km", gamma, t0)
    cov = np.einsum("km,jm->kj", full, basis)  # column j: nabla_{basis[j]} T
    matrix = -np.einsum("ik,kj->ij", basis @ g, cov)
    k = basis.shape[0]
    strict_upper = np.triu(matrix, k=1)
    residual = float(np.max(np.abs(matrix - strict_upper)))
    normal_form = None
    if k == 3 and residual < 50.0 * h * h + 1e-8:
        normal_form = (
            float(strict_upper[0, 1]),
            float(strict_upper[1, 2]),
            float(strict_upper[0, 2]),
        )
    return SplittingTensor(
        point=pt,
        matrix=matrix,
        basis=basis,
        field_value=t0,
        step=h,
        triangular_residual=residual,
        normal_form_entries=normal_form,
    )


@dataclass(frozen=True)
class BlockInvariants:
    """Spectral classification of a splitting-tensor matrix.

    ``kind`` is one of ``zero``, ``nilpotent``, ``real``, ``complex_pair``;
    ``det_block`` is the second elementary symmetric function of the
    eigenvalues, i.e. the determinant of the nontrivial 2x2 block when the
    matrix is a plane rotation-dilation plus a zero block.
    """

    kind: str
    eigenvalues: np.ndarray
    trace: float
    det_block: float
    nilpotency_index: Optional[int]


def classify(matrix, tol: float = 1e-8) -> BlockInvariants:
    """Classify a square matrix by its spectrum at the given tolerance."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    eig = eigenvalues(m)
    tr = float(np.trace(m))
    det_block = 0.5 * (tr * tr - float(np.trace(m @ m)))
    scale = max(1.0, float(np.max(np.abs(m))))
    if float(np.max(np.abs(m))) <= tol:
        return BlockInvariants("zero", eig, tr, det_block, 1)
    if np.max(np.abs(eig.imag)) > tol * scale:
        return BlockInvariants("complex_pair", eig, tr, det_block, None)
    if np.max(np.abs(eig)) <= tol * scale:
        power = m.copy()
        index = 1
        while np.max(np.abs(power)) > tol * scale and index <= m.shape[0]:
            power = power @ m
            index += 1
        return BlockInvariants("nilpotent", eig, tr, det_block, index)
    return BlockInvariants("real", eig, tr, det_block, None)


def riccati_closed_form(c0, t: float) -> np.ndarray:
    """C(t) = C0 (I - t C0)^{-1}; raises :class:`RiccatiBlowupError` at poles."""
    c0 = np.asarray(c0, dtype=float)
    k = c0.shape[0]
    denom = np.eye(k) - t * c0
    sv = np.linalg.svd(denom, compute_uv=False)
    if sv[-1] < 1e-12 * max(sv[0], 1.0):
        raise RiccatiBlowupError(t, f"I - t C0 is singular (sigma_min = {sv[-1]:.3e})")
    return c0 @ invert(denom)


def riccati_ode(c0, tmax: float, steps: int = 200) -> np.ndarray:
    """RK4 integration of C' = C^2 from C(0) = c0 up to tmax."""
    c = np.asarray(c0, dtype=float).copy()
    if steps < 1:
        raise ValueError("steps must be positive")
    h = tmax / steps
    for i in range(steps):
        k1 = c @ c
        c2 = c + 0.5 * h * k1
        k2 = c2 @ c2
        c3 = c + 0.5 * h * k2
        k3 = c3 @ c3
        c4 = c + h * k3
        k4 = c4 @ c4
        c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(c)) or np.max(np.abs(c)) > BLOWUP_LIMIT:
            raise RiccatiBlowupError((i + 1) * h, "matrix norm exceeded the blowup limit")
    return c


def trace_det_evolution(trace0: float, det0: float, t: float):
    """Evolved (trace, det) of a 2x2 block under the Riccati flow.

    For a 2x2 C0 the characteristic data evolve rationally:
    denom = 1 - t tr0 + t^2 det0, tr(t) = (tr0 - 2 t det0)/denom,
    det(t) = det0/denom.  The denominator vanishing is the blowup time.
    """
    denom = 1.0 - t * trace0 + t * t * det0
    if abs(denom) < 1e-12:
        raise RiccatiBlowupError(t, "det(I - t C0) vanished")
    return (trace0 - 2.0 * t * det0) / denom, det0 / denom


@dataclass(frozen=True)
class EvolutionReport:
    """Measured-versus-predicted splitting tensor along a kernel geodesic.

    The geodesic starts with velocity T; the complement basis is parallel
    transported; at each sample time the tensor is re-measured in the
    transported basis and compared with the closed-form Riccati solution
    seeded at t = 0.  ``divergence_residual`` is the worst over the samples
    of |div T + tr C|, with div T from an independent finite-difference
    divergence of the kernel field.
    """

    path: GeodesicPath
    sample_times: np.ndarray
    measured: tuple
    predicted: tuple
    max_error: float
    divergence_residual: float
    basis_gram_drift: float


def _fd_divergence(metric: MetricField, x: np.ndarray, field: Callable, h: float) -> float:
    """(1/sqrt(det g)) d_k (sqrt(det g) T^k) by central differences."""
    n = metric.dim
    eye = np.eye(n)

    def weighted(q):
        g = metric.jet(q, order=1, check=False)[0]
        return math.sqrt(float(np.linalg.det(g))) * np.asarray(field(q), dtype=float)

    total = 0.0
    for k in range(n):
        d1 = (weighted(x + h * eye[k])[k] - weighted(x - h * eye[k])[k]) / (2.0 * h)
        d2 = (weighted(x + 2 * h * eye[k])[k] - weighted(x - 2 * h * eye[k])[k]) / (4.0 * h)
        total += (4.0 * d1 - d2) / 3.0
    g0 = metric.jet(x, order=1, check=False)[0]
    return total / math.sqrt(float(np.linalg.det(g0)))


def evolve_along_nullity_geodesic(
    metric: MetricField,
    x0,
    tmax: float = 0.4,
    steps: int = 256,
    samples: int = 9,
    h: float = 1e-4,
    rel_tol: Optional[float] = None,
) -> EvolutionReport:
    """Ride a kernel geodesic and compare C against the Riccati closed form."""
    pt = np.asarray(x0, dtype=float)
    t0 = nullity_field(metric, pt, rel_tol=rel_tol)
    start = splitting_tensor(metric, pt, h=h, rel_tol=rel_tol)
    path = geodesic(metric, pt, t0, tmax, steps=steps)
    frame = parallel_transport(metric, path, start.basis)
    m = path.times.size
    if samples >= 2 and m >= 2:
        idx = np.unique(np.linspace(0, m - 1, samples).round().astype(int))
    else:
        idx = np.array([0])
    times = path.times[idx]
    measured = []
    predicted = []
    max_err = 0.0
    divergence_residual = 0.0
    for j in range(idx.size):
        ti, q, w = times[j], path.points[idx[j]], path.velocities[idx[j]]
        transported = frame.vectors[idx[j]]

        def field(y, _w=w):
            return nullity_field(metric, y, reference=_w, rel_tol=rel_tol)

        st = splitting_tensor(
            metric, q, basis=transported, field=field, h=h, rel_tol=rel_tol
        )
        pred = riccati_closed_form(start.matrix, float(ti))
        measured.append(st.matrix)
        predicted.append(pred)
        max_err = max(max_err, float(np.max(np.abs(st.matrix - pred))))
        div_fd = _fd_divergence(metric, q, field, h)
        divergence_residual = max(divergence_residual, abs(div_fd + st.trace))
    return EvolutionReport(
        path=path,
        sample_times=times,
        measured=tuple(measured),
        predicted=tuple(predicted),
        max_error=max_err,
        divergence_residual=divergence_residual,
        basis_gram_drift=frame.gram_drift,
    )
