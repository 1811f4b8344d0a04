"""Seeded oracle suite: closed forms against numeric scans, algebra identities
and medium formulas.

``perturb=True`` flips the sign of one phase in the scalar closed form and of
one frequency in the ferrite formula, so a healthy suite must report failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arcset import TWO_PI, Arc, ArcSet
from .certify import (
    DEFAULT_GRID,
    certify,
    eigenvalue_halfplane_check,
    inverse_certificate,
    theta_set_numeric,
    theta_set_scalar,
)
from .coercivity import ProblemSpec, analyze, breakdown, maximize_coercivity
from .fieldmodel import field_from_tensors, inverse_field, scaled_field, scalar_field
from .media import (
    FerriteParams,
    SphericalLayerParams,
    catalog_field,
    ferrite_eigenvalues,
    ferrite_mu,
    pml_phase_diagnostics,
)
from .tensorlin import eig_hermitian, operator_norm


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def endpoint_rule(n: int) -> float:
    return 2.0 * TWO_PI / n + 1e-8


def random_unitary(rng: np.random.Generator, d: int = 3) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_normal_tensor(rng: np.random.Generator, center: float, spread: float) -> np.ndarray:
    phases = center + spread * np.concatenate([[0.0, 1.0], rng.uniform(0, 1, 1)])
    lam = rng.uniform(0.5, 2.0, 3) * np.exp(1j * phases)
    u = random_unitary(rng)
    return u @ np.diag(lam) @ u.conj().T


def random_elliptic_tensor(rng: np.random.Generator, d: int = 3) -> np.ndarray:
    while True:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        xi = np.exp(1j * rng.uniform(-math.pi, math.pi)) * (1.5 * np.eye(d) + 0.4 * g)
        if certify(field_from_tensors("x", xi[None]), grid=512).elliptic:
            return xi


def random_arcset(rng: np.random.Generator) -> tuple[ArcSet, list[Arc]]:
    raw = [
        Arc(rng.uniform(-math.pi, math.pi), rng.uniform(0.05, 3.0), bool(rng.integers(2)), bool(rng.integers(2)))
        for _ in range(int(rng.integers(1, 4)))
    ]
    return ArcSet.from_arcs(raw), raw


def raw_member(raw: list[Arc], theta: np.ndarray) -> np.ndarray:
    """Membership by unwrapping theta - start into [0, 2pi)."""
    out = np.zeros(theta.shape, dtype=bool)
    for a in raw:
        u = np.mod(theta - a.start, TWO_PI)
        out |= (u > 0) & (u < a.width)
        if a.start_closed:
            out |= u == 0
    return out


# -- individual checks ------------------------------------------------------------


def _scalar_closed_vs_numeric(rng, n, perturb, count=20) -> Check:
    worst = 0.0
    for _ in range(count):
        lo = rng.uniform(-math.pi, math.pi)
        hi = lo + rng.uniform(0.0, math.pi - 0.05)
        closed, _ = theta_set_scalar(lo, hi, True)
        if perturb:
            width = math.pi - (hi - lo)
            closed = ArcSet.interval(-0.5 * math.pi + lo, -0.5 * math.pi + lo + width)
        f = scalar_field("s", np.exp(1j * np.array([lo, hi])))
        worst = max(worst, closed.endpoint_distance(theta_set_numeric(f, n)))
    return Check("scalar_closed_form_vs_scan", worst <= endpoint_rule(n), {"max_endpoint_error": worst, "tolerance": endpoint_rule(n)})


def _canonical_sets(n) -> Check:
    cases = {
        "positive_real": (1.0, ArcSet.interval(-math.pi / 2, math.pi / 2)),
        "negative_real": (-1.0, ArcSet.interval(math.pi / 2, 3 * math.pi / 2)),
        "positive_imaginary": (1j, ArcSet.interval(-math.pi, 0.0)),
    }
    errs = {}
    for name, (v, expect) in cases.items():
        errs[name] = certify(scalar_field(name, [v])).theta_set.endpoint_distance(expect)
    quarter = certify(scalar_field("q", [1.0, 1j])).theta_set
    errs["first_quadrant"] = quarter.endpoint_distance(ArcSet.interval(-math.pi / 2, 0.0))
    return Check("canonical_theta_sets", max(errs.values()) <= 1e-8, errs)


def _normal_closed_vs_numeric(rng, n, count=10) -> Check:
    worst = 0.0
    for _ in range(count):
        xi = random_normal_tensor(rng, rng.uniform(-math.pi, math.pi), rng.uniform(0.0, math.pi - 0.1))
        f = field_from_tensors("n", xi[None])
        c = certify(f, grid=n)
        worst = max(worst, c.theta_set.endpoint_distance(theta_set_numeric(f, n)))
    return Check("normal_closed_form_vs_scan", worst <= endpoint_rule(n), {"max_endpoint_error": worst})


def _hermitian_dichotomy(rng) -> Check:
    ok = True
    for sign in (1.0, -1.0, 0.0):
        for _ in range(5):
            lam = rng.uniform(0.1, 3.0, 3) * (sign if sign else np.array([1.0, -1.0, 1.0]))
            u = random_unitary(rng)
            xi = u @ np.diag(lam) @ u.conj().T
            s = certify(field_from_tensors("h", xi[None])).theta_set
            if sign > 0:
                ok &= s.endpoint_distance(ArcSet.interval(-math.pi / 2, math.pi / 2)) == 0.0
            elif sign < 0:
                ok &= s.endpoint_distance(ArcSet.interval(math.pi / 2, 3 * math.pi / 2)) == 0.0
            else:
                ok &= s.is_empty
    return Check("hermitian_sign_dichotomy", bool(ok))


def _inverse_and_scaling(rng, n, count=5) -> Check:
    worst_inv = worst_scale = 0.0
    bracket_ok = True
    for _ in range(count):
        xi = random_elliptic_tensor(rng)
        f = field_from_tensors("x", xi[None])
        base = theta_set_numeric(f, n)
        worst_inv = max(worst_inv, theta_set_numeric(inverse_field(f), n).endpoint_distance(base.negate()))
        alpha = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        shifted = base.shift(float(np.angle(alpha)))
        worst_scale = max(worst_scale, theta_set_numeric(scaled_field(f, alpha), n).endpoint_distance(shifted))
        c = certify(f, grid=n)
        inv_norm = operator_norm(np.linalg.inv(xi))
        bracket_ok &= 1.0 / c.xi_plus <= inv_norm * (1 + 1e-12) and inv_norm <= (1.0 / c.xi_minus_max) * (1 + 1e-12)
        ci = inverse_certificate(c)
        bracket_ok &= ci.xi_plus_bracket[0] <= ci.xi_plus_bracket[1]
    tol = 2.0 * TWO_PI / n
    return Check(
        "inverse_and_scaling",
        worst_inv <= tol and worst_scale <= tol and bool(bracket_ok),
        {"inverse_error": worst_inv, "scale_error": worst_scale, "norm_bracket": bool(bracket_ok)},
    )


def catalog_instances() -> dict:
    return {
        "lossy": catalog_field("lossy", "lossy_isotropic", {"eps_r": 2.0, "sigma": 1.0, "omega": 1.0}),
        "cloak_clamped": catalog_field("cloak", "spherical_cloak", {"R1": 1.0, "R2": 2.0}, r=(1.0, 2.0, 65)),
        "pml_quadratic": catalog_field("pml", "spherical_pml", {"R1": 1.0, "R2": 2.0, "sigma0": 2.0, "profile": "quadratic"}, r=(1.0, 2.0, 65)),
        "gyrotropic": catalog_field("gyro", "gyrotropic", {"c1": [1.0, 0.5], "c2": [0.0, 0.2], "c3": 2.0}),
        "ferrite": catalog_field("ferrite", "ferrite", {"omega0": 2.0, "omegaM": 1.0, "omega": 1.0}),
        "cold_plasma": catalog_field("plasma", "cold_plasma", {"species": [{"omega_p": 1.0, "omega_c": -0.5}], "nu": 0.1, "omega": 1.0}),
    }


def _halfplane(rng, n) -> Check:
    detail = {}
    ok = True
    for name, f in catalog_instances().items():
        r = eigenvalue_halfplane_check(f, certify(f, grid=n))
        detail[name] = r.passed
        ok &= r.passed
    for k in range(5):
        f = field_from_tensors("g", random_elliptic_tensor(rng)[None])
        r = eigenvalue_halfplane_check(f, certify(f, grid=n))
        ok &= r.passed
    detail["random"] = bool(ok)
    return Check("eigenvalue_halfplane", bool(ok), detail)


def _lossy_coercivity(rng, count=20) -> Check:
    worst = 0.0
    for _ in range(count):
        phi = rng.uniform(0.05, math.pi / 2 - 0.05)
        mod = rng.uniform(0.5, 3.0)
        mu = rng.uniform(0.5, 3.0)
        omega = rng.uniform(0.5, 3.0)
        p = ProblemSpec("Dirichlet", omega, scalar_field("eps", [mod * np.exp(1j * phi)], 3), scalar_field("mu", [mu], 3))
        a = analyze(p)
        theta = -math.pi / 2 - phi * rng.uniform(0.05, 0.95)
        closed = min(-math.cos(theta) / mu, omega**2 * mod * math.cos(theta + phi))
        worst = max(worst, abs(breakdown(a, theta).c - closed))
    p = ProblemSpec("Dirichlet", 1.0, scalar_field("eps", [1 + 1j], 3), scalar_field("mu", [1.0], 3))
    opt = maximize_coercivity(p)
    err_t = abs(opt.theta_star - (-math.pi + math.atan(2.0)))
    err_c = abs(opt.c_star - 5 ** -0.5)
    return Check(
        "lossy_coercivity_closed_form",
        worst <= 1e-12 and err_t <= 1e-6 and err_c <= 1e-6,
        {"max_constant_error": worst, "theta_star_error": err_t, "c_star_error": err_c},
    )


def _intersection_formulas(rng, n, count=10) -> Check:
    worst = 0.0
    for _ in range(count):
        lo = rng.uniform(0.05, 1.2)
        hi = rng.uniform(lo, math.pi / 2 - 0.05)
        eps = scalar_field("eps", np.exp(1j * np.array([lo, hi])), 3)
        mu = scalar_field("mu", [1.0], 3)
        common = analyze(ProblemSpec("Dirichlet", 1.0, eps, mu)).theta_common
        worst = max(worst, common.endpoint_distance(ArcSet.interval(-math.pi / 2 - lo, -math.pi / 2)))
        alo = rng.uniform(0.05, math.pi + lo - 0.1)
        ahi = rng.uniform(alo, min(alo + math.pi - 0.1, math.pi + lo - 0.05))
        alpha = scalar_field("alpha", np.exp(1j * np.array([alo, ahi])), 2)
        common_r = analyze(ProblemSpec("Robin", 1.0, eps, mu, alpha)).theta_common
        expect = ArcSet.interval(-math.pi / 2 - min(lo, alo), -math.pi / 2 - max(0.0, ahi - math.pi))
        worst = max(worst, common_r.endpoint_distance(expect))
    return Check("lossy_intersection_formulas", worst <= endpoint_rule(n), {"max_endpoint_error": worst})


def _media_diagnostics(rng, perturb) -> Check:
    detail = {}
    err = 0.0
    pd_ok = True
    for _ in range(20):
        w0 = rng.uniform(0.5, 3.0)
        w = rng.uniform(0.5, 3.0)
        if abs(w - w0) < 0.05:
            continue
        p = FerriteParams(w0, rng.uniform(0.0, 3.0), w)
        ref = ferrite_eigenvalues(p)
        if perturb:
            ref = np.array([1 + p.omegaM / (p.omega0 - p.omega), 1 + p.omegaM / (p.omega0 + p.omega) * -1, 1.0])
        lam = eig_hermitian(ferrite_mu(p))
        err = max(err, float(np.max(np.abs(np.sort(lam) - np.sort(ref)) / np.max(np.abs(ref)))))
        pd = bool(np.all(lam > 0))
        pd_ok &= pd == (1 + p.omegaM / (w0 + w) > 0 and 1 + p.omegaM / (w0 - w) > 0)
    detail["ferrite_rel_error"] = err
    detail["ferrite_positivity"] = bool(pd_ok)
    pml_ok = True
    for profile in ("constant", "linear", "quadratic"):
        for sigma0 in (0.5, 2.0, 10.0):
            lp = SphericalLayerParams(1.0, 2.0, profile=profile, sigma0=sigma0)
            pml_ok &= pml_phase_diagnostics(np.linspace(1.0, 2.0, 65), lp)["spread_below_pi"]
    detail["pml_phase_bound"] = bool(pml_ok)
    unclamped = certify(catalog_field("c", "spherical_cloak", {"R1": 1.0, "R2": 2.0, "clamp": False}, r=(1.0, 2.0, 65)), grid=512)
    detail["unclamped_cloak_witness"] = None if unclamped.witness is None else unclamped.witness["sample_id"]
    clamped = certify(catalog_field("c", "spherical_cloak", {"R1": 1.0, "R2": 2.0}, r=(1.0, 2.0, 65)))
    cl_ok = clamped.theta_set.endpoint_distance(ArcSet.interval(-math.pi / 2, math.pi / 2)) <= 1e-12
    passed = err <= 1e-12 and pd_ok and pml_ok and not unclamped.elliptic and detail["unclamped_cloak_witness"] == "r=1.0" and cl_ok
    return Check("media_diagnostics", bool(passed), detail)


def _arc_algebra(rng, pairs=50, samples=2000) -> Check:
    bad = 0
    for _ in range(pairs):
        a, ra = random_arcset(rng)
        b, rb = random_arcset(rng)
        th = rng.uniform(-math.pi, math.pi, samples)
        ma, mb = raw_member(ra, th), raw_member(rb, th)
        beta = rng.uniform(-10, 10)
        got = {
            "union": a.union(b).contains_many(th),
            "intersect": a.intersect(b).contains_many(th),
            "negate": a.negate().contains_many(th),
            "shift": a.shift(beta).contains_many(th),
        }
        want = {"union": ma | mb, "intersect": ma & mb, "negate": raw_member(ra, -th), "shift": raw_member(ra, th + beta)}
        bad += sum(int(np.sum(got[k] != want[k])) for k in got)
        bad += int(not a.negate().negate().isclose(a)) + int(not a.shift(beta).shift(-beta).isclose(a))
    return Check("arc_algebra_membership", bad == 0, {"mismatches": bad})


def run_suite(seed: int = 42, n: int = DEFAULT_GRID, perturb: bool = False) -> dict:
    rng = np.random.default_rng(seed)
    checks = [
        _scalar_closed_vs_numeric(rng, n, perturb),
        _canonical_sets(n),
        _normal_closed_vs_numeric(rng, n),
        _hermitian_dichotomy(rng),
        _inverse_and_scaling(rng, n),
        _halfplane(rng, n),
        _lossy_coercivity(rng),
        _intersection_formulas(rng, n),
        _media_diagnostics(rng, perturb),
        _arc_algebra(rng),
    ]
    return {
        "seed": seed,
        "grid": n,
        "perturb": perturb,
        "endpoint_tolerance": endpoint_rule(n),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
        "passed": sum(c.passed for c in checks),
        "failed": sum(not c.passed for c in checks),
    }
