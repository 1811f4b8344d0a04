"""Medium hypotheses, common Theta-sets and coercivity constants.

For a direction theta in the common Theta-set of eps, -mu^-1 (and alpha for
the Robin problem), the coercivity constant is the minimum of the curl,
mass and boundary ellipticity constants at theta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .arcset import ANGLE_TOL, ArcSet, intersect_all
from .certify import (
    CertifyOptions,
    EllipticityCertificate,
    certify,
    inverse_certificate,
    scale_certificate,
    uniform_grid,
    xi_minus_curve,
)
from .fieldmodel import MaterialField, negated_inverse_field

COARSE_POINTS = 33
REFINE_TOL = 1e-10
PLATEAU_REL = 1e-12

VERDICT_COERCIVE = "coercive => Hadamard well-posed with C = C_coe^-1"
VERDICT_FREDHOLM = "Fredholm-sense per paper, not certified coercive"
VERDICT_NONE = "medium hypotheses fail: no well-posedness statement"


class BoundaryCondition(enum.Enum):
    DIRICHLET = "Dirichlet"
    NEUMANN = "Neumann"
    ROBIN = "Robin"


class CoercivityError(ValueError):
    """Direction outside the common Theta-set, or an ill-posed problem spec."""

    def __init__(self, message: str, margins: dict | None = None):
        super().__init__(message)
        self.margins = margins or {}


@dataclass(frozen=True)
class UserAssertions:
    geometry_I: bool = False
    geometry_II: bool = False
    alpha_regularity: bool = False


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    bc: BoundaryCondition
    omega: float
    eps: MaterialField
    mu: MaterialField
    alpha: Optional[MaterialField] = None
    user_asserted: UserAssertions = UserAssertions()

    def __post_init__(self):
        if isinstance(self.bc, str):
            object.__setattr__(self, "bc", BoundaryCondition(self.bc))
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise CoercivityError("omega must be a strictly positive real")
        if self.eps.dim != 3 or self.mu.dim != 3:
            raise CoercivityError("eps and mu must be 3x3 tensor fields")
        if self.bc is BoundaryCondition.ROBIN:
            if self.alpha is None:
                raise CoercivityError("Robin problem requires an alpha field")
            if self.alpha.dim != 2:
                raise CoercivityError("alpha must be a 2x2 tensor field")
        elif self.alpha is not None:
            raise CoercivityError("alpha is only meaningful for the Robin problem")

    @property
    def robin(self) -> bool:
        return self.bc is BoundaryCondition.ROBIN

    @cached_property
    def neg_inv_mu(self) -> MaterialField:
        return negated_inverse_field(self.mu)


@dataclass(frozen=True)
class Breakdown:
    theta: float
    curl_term: float
    mass_term: float
    boundary_term: Optional[float]
    c: float
    paper_bound: float

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "curl_term": self.curl_term,
            "mass_term": self.mass_term,
            "boundary_term": self.boundary_term,
            "c": self.c,
            "paper_bound": self.paper_bound,
        }


@dataclass(eq=False)
class Analysis:
    problem: ProblemSpec
    cert_eps: EllipticityCertificate
    cert_mu: EllipticityCertificate
    cert_alpha: Optional[EllipticityCertificate]
    cert_neg_inv_mu: Optional[EllipticityCertificate]
    checklist: dict
    warnings: list

    @property
    def medium_I(self) -> bool:
        return self.checklist["medium_I"] == "pass"

    @property
    def fields_elliptic(self) -> bool:
        ok = self.medium_I
        if self.problem.robin:
            ok = ok and self.cert_alpha is not None and self.cert_alpha.elliptic
        return ok

    @cached_property
    def theta_common(self) -> ArcSet:
        if not self.fields_elliptic:
            return ArcSet.empty()
        sets = [self.cert_eps.theta_set, self.cert_neg_inv_mu.theta_set]
        if self.problem.robin:
            sets.append(self.cert_alpha.theta_set)
        return intersect_all(sets)


def analyze(p: ProblemSpec, options: CertifyOptions | None = None) -> Analysis:
    """Certify eps, mu (and alpha) and evaluate the medium hypotheses."""
    opts = options or CertifyOptions()
    ce = certify(p.eps, opts)
    cm = certify(p.mu, opts)
    ca = certify(p.alpha, opts) if p.robin else None
    cnm = scale_certificate(inverse_certificate(cm), -1.0) if cm.elliptic else None

    checklist: dict[str, str] = {}
    warnings: list[str] = []
    checklist["medium_I"] = "pass" if ce.elliptic and cm.elliptic else "fail"
    if p.robin:
        checklist["medium_II"] = "pass" if ca.elliptic else "fail"
        checklist["alpha_regularity"] = "user-asserted" if p.user_asserted.alpha_regularity else "fail"
        if not p.user_asserted.alpha_regularity:
            warnings.append("alpha regularity cannot be checked from samples and was not asserted")
        checklist["medium_III"] = "pass" if cnm is not None and ca.elliptic and not (cnm.theta_set & ca.theta_set).is_empty else "fail"
    checklist["medium_IV"] = "pass" if cnm is not None and not (ce.theta_set & cnm.theta_set).is_empty else "fail"
    for key, flag in (("geometry_I", p.user_asserted.geometry_I), ("geometry_II", p.user_asserted.geometry_II)):
        checklist[key] = "user-asserted" if flag else "fail"
        if not flag:
            warnings.append(f"{key} (boundary regularity) cannot be checked from samples and was not asserted")
    return Analysis(p, ce, cm, ca, cnm, checklist, warnings)


def check_hypotheses(p: ProblemSpec, options: CertifyOptions | None = None) -> dict:
    return analyze(p, options).checklist


def theta_common(p: ProblemSpec, options: CertifyOptions | None = None) -> ArcSet:
    a = analyze(p, options)
    if not a.fields_elliptic:
        bad = [c.field_name for c in (a.cert_eps, a.cert_mu, a.cert_alpha) if c is not None and not c.elliptic]
        raise CoercivityError(f"non-elliptic field(s): {', '.join(bad)}")
    return a.theta_common


def term_curves(p: ProblemSpec, thetas) -> dict[str, np.ndarray]:
    """Curl, mass and boundary terms and their minimum on a set of directions."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    curl = xi_minus_curve(p.neg_inv_mu, thetas)
    mass = p.omega**2 * xi_minus_curve(p.eps, thetas)
    out = {"theta": thetas, "curl_term": curl, "mass_term": mass}
    c = np.minimum(curl, mass)
    if p.robin:
        bnd = xi_minus_curve(p.alpha, thetas)
        out["boundary_term"] = bnd
        c = np.minimum(c, bnd)
    out["c"] = c
    return out


def _inverse_bound_curl(a: Analysis, theta: float) -> float:
    # mu_-(.) mu_+^-2 through the inverse and scaling bounds
    return a.cert_neg_inv_mu.xi_minus_bound(theta)


def breakdown(a: Analysis, theta: float) -> Breakdown:
    """Per-term constants at ``theta`` with no membership check."""
    p = a.problem
    t = term_curves(p, [theta])
    bnd = float(t["boundary_term"][0]) if p.robin else None
    curl, mass = float(t["curl_term"][0]), float(t["mass_term"][0])
    bound = min(_inverse_bound_curl(a, theta), mass) if a.cert_neg_inv_mu is not None else -math.inf
    if bnd is not None:
        bound = min(bound, bnd)
    return Breakdown(float(theta), curl, mass, bnd, float(t["c"][0]), bound)


def coercivity_constant(p: ProblemSpec | Analysis, theta: float) -> Breakdown:
    """Breakdown at ``theta``; refuses directions outside the common Theta-set."""
    a = p if isinstance(p, Analysis) else analyze(p)
    common = a.theta_common
    b = breakdown(a, theta)
    terms = {"curl_term": b.curl_term, "mass_term": b.mass_term}
    if b.boundary_term is not None:
        terms["boundary_term"] = b.boundary_term
    if not common.contains(theta) or b.c <= 0:
        margins = dict(terms)
        margins["distance_to_common_set"] = _distance(common, theta)
        raise CoercivityError(f"theta = {theta!r} is not in the common Theta-set {common}", margins)
    return b


def _distance(s: ArcSet, theta: float) -> float:
    if s.full:
        return 0.0
    if s.is_empty:
        return math.inf
    if s.contains(theta):
        return 0.0
    d = math.inf
    for arc in s.arcs:
        for e in (arc.start, arc.start + arc.width):
            d = min(d, abs(math.remainder(theta - e, 2 * math.pi)))
    return d


@dataclass(frozen=True)
class Optimum:
    theta_star: float
    c_star: float
    plateau_width: float = 0.0


def maximize_coercivity(p: ProblemSpec | Analysis) -> Optimum:
    """Per-arc coarse scan followed by bounded Brent refinement to 1e-10 rad."""
    a = p if isinstance(p, Analysis) else analyze(p)
    common = a.theta_common
    if common.is_empty:
        raise CoercivityError("common Theta-set is empty")
    prob = a.problem
    arcs = common.arcs
    if common.full:
        from .arcset import Arc

        arcs = (Arc(-math.pi, 2 * math.pi),)

    def c_of(t: float) -> float:
        return float(term_curves(prob, [t])["c"][0])

    best: Optimum | None = None
    for arc in arcs:
        k = np.arange(COARSE_POINTS)
        step = arc.width / (COARSE_POINTS - 1)
        ts = arc.start + step * k
        cs = term_curves(prob, ts)["c"]
        top = float(cs.max())
        tied = np.nonzero(cs >= top - PLATEAU_REL * max(abs(top), 1e-300))[0]
        j = int(tied[0])
        plateau = float(step * (tied[-1] - tied[0])) if len(tied) > 1 else 0.0
        lo = ts[max(j - 1, 0)]
        hi = ts[min(j + 1, COARSE_POINTS - 1)]
        res = minimize_scalar(lambda t: -c_of(t), bounds=(lo, hi), method="bounded", options={"xatol": REFINE_TOL})
        t_star, c_star = float(ts[j]), top
        if -res.fun > c_star:
            t_star, c_star = float(res.x), float(-res.fun)
        t_star = math.remainder(t_star, 2 * math.pi)
        if t_star == -math.pi:
            t_star = math.pi
        cand = Optimum(t_star, c_star, plateau)
        if best is None or cand.c_star > best.c_star + PLATEAU_REL * abs(best.c_star):
            best = cand
        elif abs(cand.c_star - best.c_star) <= PLATEAU_REL * abs(best.c_star) and cand.theta_star < best.theta_star:
            best = cand
    return best


@dataclass(eq=False)
class CoercivityReport:
    hypothesis_checklist: dict
    warnings: list
    theta_common: ArcSet
    theta_star: Optional[float]
    c_star: Optional[float]
    breakdown: Optional[Breakdown]
    paper_bound_at_theta_star: Optional[float]
    plateau_width: Optional[float]
    verdict: str
    certificates: dict = field(default_factory=dict)
    bc: str = ""
    omega: float = 0.0

    @property
    def coercive(self) -> bool:
        return self.verdict == VERDICT_COERCIVE

    def to_dict(self) -> dict:
        return {
            "bc": self.bc,
            "omega": self.omega,
            "hypothesis_checklist": self.hypothesis_checklist,
            "warnings": self.warnings,
            "theta_common": self.theta_common.to_json(),
            "theta_star": self.theta_star,
            "c_star": self.c_star,
            "breakdown": None if self.breakdown is None else self.breakdown.to_dict(),
            "paper_bound_at_theta_star": self.paper_bound_at_theta_star,
            "plateau_width": self.plateau_width,
            "verdict": self.verdict,
            "hadamard_constant": (1.0 / self.c_star) if self.coercive else None,
            "certificates": self.certificates,
            "note": "certified over the finite sample set only",
        }


def coercivity_report(p: ProblemSpec, options: CertifyOptions | None = None) -> CoercivityReport:
    a = analyze(p, options)
    certs = {"eps": a.cert_eps.to_dict(), "mu": a.cert_mu.to_dict()}
    if a.cert_neg_inv_mu is not None:
        certs["neg_inv_mu"] = a.cert_neg_inv_mu.to_dict()
    if a.cert_alpha is not None:
        certs["alpha"] = a.cert_alpha.to_dict()
    common = a.theta_common
    ts = cs = b = paper = plateau = None
    if not common.is_empty:
        opt = maximize_coercivity(a)
        b = breakdown(a, opt.theta_star)
        ts, cs, paper, plateau = opt.theta_star, b.c, b.paper_bound, opt.plateau_width
        verdict = VERDICT_COERCIVE
    elif a.medium_I:
        verdict = VERDICT_FREDHOLM
    else:
        verdict = VERDICT_NONE
    return CoercivityReport(
        a.checklist, a.warnings, common, ts, cs, b, paper, plateau, verdict, certs, p.bc.value, p.omega
    )


def problem_from_dict(data: dict, assertions: UserAssertions | None = None) -> ProblemSpec:
    from .fieldmodel import field_from_dict

    try:
        bc = BoundaryCondition(data.get("bc", "Dirichlet"))
        omega = float(data["omega"])
        eps = field_from_dict(data["eps"])
        mu = field_from_dict(data["mu"])
    except KeyError as exc:
        raise CoercivityError(f"problem definition missing key: {exc}") from None
    except ValueError as exc:
        raise CoercivityError(str(exc)) from None
    alpha = field_from_dict(data["alpha"]) if data.get("alpha") is not None else None
    ua = data.get("user_asserted", {})
    base = UserAssertions(
        bool(ua.get("geometry_I", False)), bool(ua.get("geometry_II", False)), bool(ua.get("alpha_regularity", False))
    )
    if assertions is not None:
        base = UserAssertions(
            base.geometry_I or assertions.geometry_I,
            base.geometry_II or assertions.geometry_II,
            base.alpha_regularity or assertions.alpha_regularity,
        )
    return ProblemSpec(bc, omega, eps, mu, alpha, base)
