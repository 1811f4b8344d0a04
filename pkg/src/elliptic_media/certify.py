"""Ellipticity certificates and Theta-sets of material fields.

For a tensor xi and a direction theta, the sharp ellipticity constant is the
smallest eigenvalue of the Hermitian part of e^{i theta} xi; over a field it
is the minimum over samples. Certification is a statement about the sample
set only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional

import numpy as np

from .arcset import ANGLE_TOL, TWO_PI, Arc, ArcSet, canonicalize
from .fieldmodel import FieldError, MaterialField, sup_norm
from .tensorlin import (
    StructuralClass,
    _eigvalsh_closed,
    eig_general,
    eig_hermitian,
    min_eig_hermitian,
    structure_flags_batch,
)

DEFAULT_GRID = 4096
BISECTION_TOL = 1e-9
ELL_REL = 1e-12
HALFPLANE_TOL = 1e-9
_CHUNK = 1 << 16


class Method(enum.Enum):
    SCALAR = "ClosedFormScalar"
    NORMAL = "ClosedFormNormal"
    HERMITIAN = "ClosedFormHermitian"
    NUMERIC = "NumericScan"


def ellipticity_threshold(xi_plus: float) -> float:
    return ELL_REL * max(1.0, xi_plus)


def uniform_grid(n: int) -> np.ndarray:
    """n uniform angles in [-pi, pi)."""
    return -math.pi + TWO_PI * np.arange(n) / n


# -- xi_minus -------------------------------------------------------------------


def _lambda_min_grid(A: np.ndarray, B: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """(T, S) array of lambda_min(cos t A_s + sin t B_s)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    S, d = A.shape[0], A.shape[-1]
    c = np.cos(thetas)
    s = np.sin(thetas)
    if d == 1:
        return c[:, None] * A[None, :, 0, 0].real + s[:, None] * B[None, :, 0, 0].real
    off = ~np.eye(d, dtype=bool)
    if not np.any(A[:, off]) and not np.any(B[:, off]):
        da = np.diagonal(A, axis1=-2, axis2=-1).real
        db = np.diagonal(B, axis1=-2, axis2=-1).real
        return (c[:, None, None] * da[None] + s[:, None, None] * db[None]).min(axis=-1)
    out = np.empty((len(thetas), S))
    step = max(1, _CHUNK // max(S, 1))
    for k in range(0, len(thetas), step):
        cc = c[k : k + step, None, None, None]
        ss = s[k : k + step, None, None, None]
        h = cc * A[None] + ss * B[None]
        out[k : k + step] = _eigvalsh_closed(h)[..., 0]
    return out


def xi_minus_samples(f: MaterialField, thetas) -> np.ndarray:
    """Per-sample sharp constants, shape (T, S)."""
    A, B = f.hermitian_split
    return _lambda_min_grid(A, B, thetas)


def xi_minus_curve(f: MaterialField, thetas) -> np.ndarray:
    """min over samples of lambda_min(H(theta)) for each theta."""
    return xi_minus_samples(f, thetas).min(axis=1)


def xi_minus(f: MaterialField, theta: float) -> float:
    """Largest c with Re{e^{i theta} (xi z).conj(z)} >= c |z|^2 on every sample."""
    if len(f) == 0:
        raise FieldError("empty sample set")
    A, B = f.hermitian_split
    return float(np.min(min_eig_hermitian(math.cos(theta) * A + math.sin(theta) * B)))


# -- Theta-sets -------------------------------------------------------------------


def _arcs_from_mask(grid: np.ndarray, pos: np.ndarray, predicate) -> ArcSet:
    """Open arcs from a cyclic sign mask, boundaries refined by bisection."""
    n = len(grid)
    if pos.all():
        return ArcSet.full_circle()
    if not pos.any():
        return ArcSet.empty()
    nxt = np.roll(pos, -1)
    idx = np.nonzero(pos != nxt)[0]
    lo = grid[idx].copy()
    hi = lo + TWO_PI / n
    lo_pos = pos[idx]
    while np.max(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        pm = predicate(mid)
        same = pm == lo_pos
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    bnd = 0.5 * (lo + hi)
    rising = ~lo_pos
    # boundaries alternate around the circle; pair each start with the next end
    order = np.argsort(idx)
    bnd, rising = bnd[order], rising[order]
    k0 = int(np.argmax(rising))
    arcs = []
    m = len(bnd)
    for j in range(m):
        i = (k0 + j) % m
        if not rising[i]:
            continue
        e = (i + 1) % m
        width = (bnd[e] - bnd[i]) % TWO_PI
        arcs.append(Arc(bnd[i], width))
    return ArcSet.from_arcs(arcs)


def theta_set_numeric(f: MaterialField, n: int = DEFAULT_GRID, eps_ell: float | None = None) -> ArcSet:
    """Scan n uniform directions and refine every sign change to 1e-9 rad.

    Features narrower than 2 pi / n can be missed.
    """
    if n < 16:
        raise ValueError("scan resolution must be at least 16")
    if eps_ell is None:
        eps_ell = ellipticity_threshold(sup_norm(f))
    A, B = f.hermitian_split
    grid = uniform_grid(n)
    pos = _lambda_min_grid(A, B, grid).min(axis=1) > eps_ell
    return _arcs_from_mask(grid, pos, lambda t: _lambda_min_grid(A, B, t).min(axis=1) > eps_ell)


def phase_hull(phases) -> tuple[float, float]:
    """Smallest circle arc covering the phases, as (lo, hi) with lo in [-pi, pi].

    ``hi - lo`` is the hull width; among equal candidates the first largest
    gap in sorted order wins.
    """
    p = np.sort(np.mod(np.asarray(phases, dtype=float).ravel(), TWO_PI))
    if p.size == 0:
        raise ValueError("no phases")
    gaps = np.diff(np.concatenate([p, [p[0] + TWO_PI]]))
    j = int(np.argmax(gaps))
    lo = p[(j + 1) % len(p)]
    width = TWO_PI - gaps[j]
    lo_c = canonicalize(lo)
    return lo_c, float(lo_c + max(width, 0.0))


def theta_set_scalar(phi_minus: float, phi_plus: float, attained: bool = True) -> tuple[ArcSet, bool]:
    """Arc ]-pi/2 - phi_minus, pi/2 - phi_plus[ for phases in [phi_minus, phi_plus]."""
    if phi_plus < phi_minus:
        raise ValueError(f"phase range reversed: phi_plus={phi_plus} < phi_minus={phi_minus}")
    if phi_plus - phi_minus >= math.pi:
        return ArcSet.empty(), False
    return ArcSet.interval(-0.5 * math.pi - phi_minus, 0.5 * math.pi - phi_plus), bool(attained)


def theta_set_normal(beta_minus: float, beta_plus: float, attained: bool = True) -> tuple[ArcSet, bool]:
    """Same arc as the scalar case, for the eigenvalue phase range of a normal field."""
    return theta_set_scalar(beta_minus, beta_plus, attained)


HERMITIAN_POSITIVE = ArcSet.interval(-0.5 * math.pi, 0.5 * math.pi)
HERMITIAN_NEGATIVE = ArcSet.interval(0.5 * math.pi, 1.5 * math.pi)


# -- certificates -------------------------------------------------------------------


@dataclass(frozen=True)
class CertifyOptions:
    grid: int = DEFAULT_GRID
    eps_ell: Optional[float] = None
    # declared (lo, hi) phase bounds enclosing the sample phases; sharp only if they match the hull
    phase_bounds: Optional[tuple[float, float]] = None
    force_numeric: bool = False


@dataclass(frozen=True, eq=False)
class EllipticityCertificate:
    field_name: str
    structural_class: StructuralClass
    xi_plus: float
    theta_set: ArcSet
    sharp: bool
    method: Method
    grid_resolution: Optional[int] = None
    phase_range: Optional[tuple[float, float]] = None
    n_samples: int = 0
    witness: Optional[dict] = None
    xi_plus_bracket: Optional[tuple[float, float]] = None
    transform: Optional[str] = None
    source: Optional[MaterialField] = field(default=None, repr=False)
    parent: Optional["EllipticityCertificate"] = field(default=None, repr=False)
    scan_grid: int = DEFAULT_GRID

    @property
    def elliptic(self) -> bool:
        return not self.theta_set.is_empty

    def xi_minus_bound(self, theta: float) -> float:
        """Certified lower constant at ``theta``.

        Direct on the source field; through the inverse and scaling bounds
        for derived certificates.
        """
        if self.source is not None:
            return xi_minus(self.source, theta)
        if self.parent is None:
            raise ValueError("certificate has neither source field nor parent")
        kind, value = self._transform_data
        if kind == "inverse":
            return self.parent.xi_minus_bound(-theta) / self.parent.xi_plus**2
        return abs(value) * self.parent.xi_minus_bound(theta + float(np.angle(value)))

    @cached_property
    def _transform_data(self):
        kind, _, rest = (self.transform or "").partition(":")
        return kind, (complex(rest) if rest else None)

    @cached_property
    def _best(self) -> tuple[float, float]:
        if self.source is not None:
            grid = uniform_grid(self.scan_grid)
            curve = xi_minus_curve(self.source, grid)
            k = int(np.argmax(curve))
            return float(curve[k]), float(grid[k])
        kind, value = self._transform_data
        m, t = self.parent._best
        if kind == "inverse":
            return m / self.parent.xi_plus**2, canonicalize(-t)
        return abs(value) * m, canonicalize(t - float(np.angle(value)))

    @property
    def xi_minus_max(self) -> float:
        """Largest sampled constant over the scan grid (a lower estimate of the supremum)."""
        return self._best[0]

    @property
    def theta_best(self) -> float:
        return self._best[1]

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "field": self.field_name,
            "class": self.structural_class.value,
            "elliptic": self.elliptic,
            "xi_plus": self.xi_plus,
            "sharp": self.sharp,
            "method": self.method.value,
            "theta_set": self.theta_set.to_json(),
            "theta_measure": self.theta_set.measure(),
            "n_samples": self.n_samples,
            "note": "certified over the finite sample set only",
        }
        if self.grid_resolution is not None:
            out["grid_resolution"] = self.grid_resolution
        if self.phase_range is not None:
            out["phase_range"] = list(self.phase_range)
        if self.xi_plus_bracket is not None:
            out["xi_plus_bracket"] = list(self.xi_plus_bracket)
        if self.transform is not None:
            out["transform"] = self.transform
        if self.witness is not None:
            out["witnesses"] = [self.witness]
        return out


def _field_class(f: MaterialField) -> StructuralClass:
    scalar, herm, normal = structure_flags_batch(f.tensors)
    if scalar.all():
        return StructuralClass.SCALAR
    if herm.all():
        return StructuralClass.HERMITIAN
    if normal.all():
        return StructuralClass.NORMAL
    return StructuralClass.GENERAL


def _witness(f: MaterialField, n: int) -> dict:
    grid = uniform_grid(n)
    vals = xi_minus_samples(f, grid)
    best_t = np.argmax(vals, axis=0)
    best = vals[best_t, np.arange(vals.shape[1])]
    s = int(np.argmin(best))
    p = f.points[s]
    out = {
        "sample_id": p.id,
        "theta": float(grid[best_t[s]]),
        "max_xi_minus": float(best[s]),
        "grid_resolution": n,
    }
    if p.coords is not None:
        out["coords"] = list(p.coords)
    return out


def _resolve_bounds(hull: tuple[float, float], declared) -> tuple[tuple[float, float], bool]:
    if declared is None:
        return hull, True
    lo, hi = float(declared[0]), float(declared[1])
    # align the declared range with the hull representative
    k = round((hull[0] - lo) / TWO_PI)
    lo, hi = lo + k * TWO_PI, hi + k * TWO_PI
    if lo > hull[0] + ANGLE_TOL or hi < hull[1] - ANGLE_TOL:
        raise ValueError(f"declared phase bounds {declared} do not enclose the sample phases {hull}")
    attained = abs(lo - hull[0]) <= ANGLE_TOL and abs(hi - hull[1]) <= ANGLE_TOL
    return (lo, hi), attained


def certify(f: MaterialField, options: CertifyOptions | None = None, **kw) -> EllipticityCertificate:
    """Classify the field and compute its Theta-set by the sharpest applicable route."""
    opts = options or CertifyOptions(**kw)
    if len(f) == 0:
        raise FieldError("empty sample set")
    T = f.tensors
    xi_plus = sup_norm(f)
    eps = opts.eps_ell if opts.eps_ell is not None else ellipticity_threshold(xi_plus)
    cls = _field_class(f)
    base = dict(
        field_name=f.name,
        structural_class=cls,
        xi_plus=xi_plus,
        n_samples=len(f),
        source=f,
        scan_grid=opts.grid,
    )
    theta: ArcSet | None = None
    sharp = False
    method = Method.NUMERIC
    phase_range = None

    if not opts.force_numeric:
        if cls is StructuralClass.SCALAR:
            c = np.trace(T, axis1=-2, axis2=-1) / T.shape[-1]
            method = Method.SCALAR
            if np.any(np.abs(c) <= eps):
                theta, sharp = ArcSet.empty(), True
            else:
                phase_range, attained = _resolve_bounds(phase_hull(np.angle(c)), opts.phase_bounds)
                if phase_range[1] - phase_range[0] < math.pi:
                    theta, sharp = theta_set_scalar(*phase_range, attained)
        elif cls is StructuralClass.HERMITIAN:
            lam = eig_hermitian(T, check=False)
            method = Method.HERMITIAN
            sharp = True
            if np.all(lam > eps):
                theta = HERMITIAN_POSITIVE
            elif np.all(lam < -eps):
                theta = HERMITIAN_NEGATIVE
            else:
                theta = ArcSet.empty()
        elif cls is StructuralClass.NORMAL:
            lam = eig_general(T)
            method = Method.NORMAL
            if np.any(np.abs(lam) <= eps):
                theta, sharp = ArcSet.empty(), True
            else:
                phase_range, attained = _resolve_bounds(phase_hull(np.angle(lam)), opts.phase_bounds)
                if phase_range[1] - phase_range[0] < math.pi:
                    theta, sharp = theta_set_normal(*phase_range, attained)

    grid_resolution = None
    if theta is None:
        # general class, or a phase hull of width >= pi: the closed form abstains
        theta = theta_set_numeric(f, opts.grid, eps)
        method, sharp, grid_resolution = Method.NUMERIC, False, opts.grid
    witness = None if not theta.is_empty else _witness(f, opts.grid)
    return EllipticityCertificate(
        theta_set=theta,
        sharp=sharp,
        method=method,
        grid_resolution=grid_resolution,
        phase_range=phase_range,
        witness=witness,
        **base,
    )


def inverse_certificate(c: EllipticityCertificate) -> EllipticityCertificate:
    """Certificate of the pointwise inverse: Theta negated, constant xi_-(-theta) / xi_+^2."""
    if not c.elliptic:
        raise ValueError("inverse certificate needs a nonempty Theta-set")
    lo = 1.0 / c.xi_plus
    m = c.xi_minus_max
    hi = 1.0 / m if m > 0 else math.inf
    return EllipticityCertificate(
        field_name=f"inv({c.field_name})",
        structural_class=c.structural_class,
        xi_plus=hi,
        theta_set=c.theta_set.negate(),
        sharp=c.sharp,
        method=c.method,
        grid_resolution=c.grid_resolution,
        phase_range=None if c.phase_range is None else (-c.phase_range[1], -c.phase_range[0]),
        n_samples=c.n_samples,
        xi_plus_bracket=(lo, hi),
        transform="inverse",
        parent=c,
        scan_grid=c.scan_grid,
    )


def scale_certificate(c: EllipticityCertificate, alpha: complex) -> EllipticityCertificate:
    """Certificate of alpha * xi: Theta shifted by arg(alpha), constants scaled by |alpha|."""
    alpha = complex(alpha)
    if alpha == 0:
        raise ValueError("scaling factor must be nonzero")
    beta = float(np.angle(alpha))
    mod = abs(alpha)
    cls = c.structural_class
    if cls is StructuralClass.HERMITIAN and abs(math.sin(beta)) > 0:
        cls = StructuralClass.NORMAL
    return EllipticityCertificate(
        field_name=f"({alpha})*{c.field_name}",
        structural_class=cls,
        xi_plus=mod * c.xi_plus,
        theta_set=c.theta_set.shift(beta),
        sharp=c.sharp,
        method=c.method,
        grid_resolution=c.grid_resolution,
        phase_range=None if c.phase_range is None else (c.phase_range[0] + beta, c.phase_range[1] + beta),
        n_samples=c.n_samples,
        xi_plus_bracket=None if c.xi_plus_bracket is None else (mod * c.xi_plus_bracket[0], mod * c.xi_plus_bracket[1]),
        transform=f"scale:{alpha!r}",
        parent=c,
        scan_grid=c.scan_grid,
    )


def arc_interior_angles(s: ArcSet, per_arc: int = 9) -> np.ndarray:
    """Evenly spaced interior angles of every arc (endpoints excluded)."""
    out = []
    for a in s.arcs:
        k = np.arange(1, per_arc + 1)
        out.extend(canonicalize(a.start + a.width * j / (per_arc + 1)) for j in k)
    return np.array(out)


@dataclass
class HalfplaneReport:
    passed: bool
    n_checks: int
    violations: list = field(default_factory=list)


def eigenvalue_halfplane_check(f: MaterialField, c: EllipticityCertificate, per_arc: int = 9) -> HalfplaneReport:
    """Check Re{e^{i theta} lam} >= xi_-(theta) and xi_- <= |lam| <= xi_+ for every eigenvalue."""
    if not c.elliptic:
        raise ValueError("half-plane check needs an elliptic certificate")
    lam = eig_general(f.tensors)
    mod = np.abs(lam)
    tol = HALFPLANE_TOL * max(1.0, c.xi_plus)
    thetas = arc_interior_angles(c.theta_set, per_arc)
    curve = xi_minus_curve(f, thetas)
    violations = []
    n = 0
    for t, xm in zip(thetas, curve):
        proj = (np.exp(1j * t) * lam).real
        n += lam.size
        bad = (proj < xm - tol) | (mod < xm - tol) | (mod > c.xi_plus + tol)
        for s, j in zip(*np.nonzero(bad)):
            violations.append(
                {"theta": float(t), "sample_id": f.points[s].id, "eigenvalue": [lam[s, j].real, lam[s, j].imag], "xi_minus": float(xm)}
            )
    return HalfplaneReport(not violations, n, violations)


def quadratic_form_chain(f: MaterialField, theta: float, v: np.ndarray) -> tuple[float, float, float, float]:
    """(xi_- |v|^2, Re{e^{i theta} (xi v, v)}, |(xi v, v)|, xi_+ |v|^2) for one vector per sample."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (len(f), f.dim):
        raise ValueError(f"expected v of shape {(len(f), f.dim)}")
    form = complex(np.sum(np.einsum("sij,sj->si", f.tensors, v) * np.conj(v)))
    nv2 = float(np.sum(np.abs(v) ** 2))
    return xi_minus(f, theta) * nv2, (np.exp(1j * theta) * form).real, abs(form), sup_norm(f) * nv2
