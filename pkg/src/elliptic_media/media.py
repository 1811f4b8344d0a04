"""Catalog of concrete media: lossy isotropic, spherical cloak and PML,
gyrotropic, magnetized ferrite and cold plasma.

Radial tensors are emitted in the diagonal radial frame (radial direction
last). Ellipticity and Theta-sets are invariant under unitary conjugation,
so no 3-D geometry is carried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy import constants
from scipy.integrate import cumulative_trapezoid

from .fieldmodel import (
    DEFAULT_NODES,
    Axis,
    FieldError,
    MaterialField,
    Parametric,
    SamplePoint,
    SamplingSpec,
    _parse_complex,
    field_from_tensors,
)

PML_PROFILES = ("constant", "linear", "quadratic")
DEFAULT_CLAMP = 1e-3


def vacuum_constants(units: str = "nondimensional") -> tuple[float, float]:
    """(eps0, mu0): 1 in nondimensional mode, CODATA values with ``units='si'``."""
    if units == "nondimensional":
        return 1.0, 1.0
    if units == "si":
        return constants.epsilon_0, constants.mu_0
    raise FieldError(f"unknown units {units!r}")


# -- isotropic lossy media ----------------------------------------------------


@dataclass(frozen=True)
class LossyIsotropicParams:
    eps_r: float | Sequence[float] = 1.0
    sigma: float | Sequence[float] = 0.0
    mu_r: float | Sequence[float] = 1.0
    omega: float = 1.0
    units: str = "nondimensional"

    def profiles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        eps = np.atleast_1d(np.asarray(self.eps_r, dtype=float))
        sig = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu_r, dtype=float))
        n = max(len(eps), len(sig), len(mu))
        out = []
        for name, arr in (("eps_r", eps), ("sigma", sig), ("mu_r", mu)):
            if len(arr) not in (1, n):
                raise FieldError(f"profile {name} has {len(arr)} values, expected 1 or {n}")
            out.append(np.broadcast_to(arr, (n,)).copy())
        return tuple(out)


def complex_permittivity(eps_r, sigma, omega: float, units: str = "nondimensional"):
    """eps_c = eps + i sigma / omega."""
    if omega <= 0:
        raise FieldError("omega must be strictly positive")
    eps0, _ = vacuum_constants(units)
    return eps0 * np.asarray(eps_r, dtype=float) + 1j * np.asarray(sigma, dtype=float) / omega


def lossy_fields(p: LossyIsotropicParams) -> tuple[MaterialField, MaterialField]:
    """(eps, mu) as scalar-class 3x3 fields, one sample per profile entry."""
    eps_r, sigma, mu_r = p.profiles()
    if np.any(eps_r <= 0) or np.any(mu_r <= 0):
        raise FieldError("eps_r and mu_r must be strictly positive")
    if np.any(sigma < 0):
        raise FieldError("conductivity must be non-negative")
    _, mu0 = vacuum_constants(p.units)
    eps_c = complex_permittivity(eps_r, sigma, p.omega, p.units)
    ids = [f"x{k}" for k in range(len(eps_c))]
    eye = np.eye(3)
    eps = field_from_tensors("eps", eps_c[:, None, None] * eye, ids)
    mu = field_from_tensors("mu", (mu0 * mu_r)[:, None, None] * eye, ids)
    return eps, mu


# -- spherical layers ------------------------------------------------------------


@dataclass(frozen=True)
class SphericalLayerParams:
    R1: float
    R2: float
    clamp_eps: float = DEFAULT_CLAMP
    profile: str = "constant"
    sigma0: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not 0 < self.R1 < self.R2:
            raise FieldError("spherical layer needs 0 < R1 < R2")
        if self.clamp_eps <= 0:
            raise FieldError("clamp_eps must be strictly positive")
        if self.kappa <= 0:
            raise FieldError("kappa must be strictly positive")
        if self.profile not in PML_PROFILES:
            raise FieldError(
                f"absorbing profile {self.profile!r} is not supported; shipped bounded profiles are "
                f"{', '.join(PML_PROFILES)}. Unbounded absorbing functions give unbounded "
                "coefficients and fall outside the L-infinity ellipticity framework."
            )
        if self.sigma0 < 0:
            raise FieldError("absorbing amplitude sigma0 must be non-negative")

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        tol = 1e-12 * self.R2
        if np.any(r < self.R1 - tol) or np.any(r > self.R2 + tol):
            raise FieldError(f"radius outside the layer [{self.R1}, {self.R2}]")
        return np.clip(r, self.R1, self.R2)


def _radial_tensor(s1, s2) -> np.ndarray:
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    out = np.zeros(s1.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = s1
    out[..., 1, 1] = s1
    out[..., 2, 2] = s2 * s2 / s1
    return out


def cloak_coefficients(r, p: SphericalLayerParams, clamp: bool = True):
    """(s1, s2) of the spherical cloak; ``s2`` is clamped from below when asked."""
    r = p._check_r(r)
    denom = 1.0 - p.R1 / p.R2
    s1 = np.full_like(r, 1.0 / denom)
    s2 = (1.0 - p.R1 / r) / denom
    if clamp:
        s2 = np.maximum(s2, p.clamp_eps)
    return s1, s2


def cloak_tensor(r, p: SphericalLayerParams, clamp: bool = True) -> np.ndarray:
    s1, s2 = cloak_coefficients(r, p, clamp)
    return _radial_tensor(s1, s2).real.astype(complex)


def sigma_profile(r, p: SphericalLayerParams) -> np.ndarray:
    x = (np.asarray(r, dtype=float) - p.R1) / (p.R2 - p.R1)
    if p.profile == "constant":
        return np.full_like(x, p.sigma0)
    if p.profile == "linear":
        return p.sigma0 * x
    return p.sigma0 * x * x


def sigma_integral_exact(r, p: SphericalLayerParams) -> np.ndarray:
    """Closed-form integral of the absorbing profile from R1 to r."""
    L = p.R2 - p.R1
    x = (np.asarray(r, dtype=float) - p.R1) / L
    power = PML_PROFILES.index(p.profile)
    return p.sigma0 * L * x ** (power + 1) / (power + 1)


def pml_coefficients(rs, p: SphericalLayerParams):
    """(s1, s2) on an increasing radial grid; the integral uses the trapezoid rule.

    When the grid does not start at R1, R1 is prepended as the first
    quadrature node.
    """
    rs = p._check_r(rs)
    if rs.ndim != 1 or np.any(np.diff(rs) <= 0):
        raise FieldError("PML radial grid must be strictly increasing")
    grid = rs if rs[0] == p.R1 else np.concatenate([[p.R1], rs])
    integral = cumulative_trapezoid(sigma_profile(grid, p), grid, initial=0.0)
    if grid is not rs:
        integral = integral[1:]
    s1 = 1.0 + 1j * sigma_profile(rs, p) / p.kappa
    s2 = 1.0 + 1j * integral / (p.kappa * rs)
    return s1, s2


def pml_tensor(r: float, p: SphericalLayerParams, nodes: int = DEFAULT_NODES) -> np.ndarray:
    r = float(p._check_r(r))
    if r == p.R1:
        grid = np.array([p.R1])
    else:
        grid = np.linspace(p.R1, r, nodes)
    s1, s2 = pml_coefficients(grid, p)
    return _radial_tensor(s1[-1], s2[-1])


def pml_phase_diagnostics(rs, p: SphericalLayerParams) -> dict:
    """Phases of s1, s2 and the eigenphase spread 2|phi2 - phi1| per node."""
    s1, s2 = pml_coefficients(rs, p)
    phi1 = np.angle(s1)
    phi2 = np.angle(s2)
    spread = 2.0 * np.abs(phi2 - phi1)
    return {
        "phi1": phi1,
        "phi2": phi2,
        "spread": spread,
        "phases_in_range": bool(np.all((phi1 >= 0) & (phi1 < math.pi / 2) & (phi2 >= 0) & (phi2 < math.pi / 2))),
        "spread_below_pi": bool(np.all(spread < math.pi)),
    }


# -- gyrotropic media ------------------------------------------------------------


@dataclass(frozen=True)
class GyrotropicParams:
    c1: complex
    c2: complex
    c3: complex
    scale: float = 1.0


def gyrotropic_tensor(p: GyrotropicParams) -> np.ndarray:
    c1, c2, c3 = complex(p.c1), complex(p.c2), complex(p.c3)
    return p.scale * np.array(
        [[c1, 1j * c2, 0.0], [-1j * c2, c1, 0.0], [0.0, 0.0, c3]], dtype=complex
    )


def gyrotropic_eigenvalues(p: GyrotropicParams) -> np.ndarray:
    c1, c2, c3 = complex(p.c1), complex(p.c2), complex(p.c3)
    return p.scale * np.array([c1 + c2, c1 - c2, c3])


@dataclass(frozen=True)
class FerriteParams:
    omega0: float
    omegaM: float
    omega: float
    mu0_scale: float = 1.0

    def __post_init__(self):
        if self.omega <= 0 or self.omega0 <= 0 or self.omegaM < 0:
            raise FieldError("ferrite frequencies must be positive")
        if abs(self.omega**2 - self.omega0**2) <= 1e-12 * max(self.omega**2, self.omega0**2):
            raise FieldError("ferrite at gyromagnetic resonance (omega == omega0)")


def ferrite_coefficients(p: FerriteParams) -> tuple[float, float, float]:
    d = p.omega**2 - p.omega0**2
    return 1.0 - p.omega0 * p.omegaM / d, p.omega * p.omegaM / d, 1.0


def ferrite_mu(p: FerriteParams) -> np.ndarray:
    m1, m2, m3 = ferrite_coefficients(p)
    return gyrotropic_tensor(GyrotropicParams(m1, m2, m3, p.mu0_scale))


def ferrite_eigenvalues(p: FerriteParams) -> np.ndarray:
    """{mu0 + mu0 wM/(w0 + w), mu0 + mu0 wM/(w0 - w), mu0}."""
    m0 = p.mu0_scale
    return np.array(
        [m0 + m0 * p.omegaM / (p.omega0 + p.omega), m0 + m0 * p.omegaM / (p.omega0 - p.omega), m0]
    )


def ferrite_positive_definite(p: FerriteParams) -> bool:
    return 1.0 + p.omegaM / (p.omega0 + p.omega) > 0 and 1.0 + p.omegaM / (p.omega0 - p.omega) > 0


@dataclass(frozen=True)
class Species:
    omega_p: float
    omega_c: float


@dataclass(frozen=True)
class ColdPlasmaParams:
    species: tuple[Species, ...] = ()
    nu: float = 0.1
    omega: float = 1.0
    eps0_scale: float = 1.0

    def __post_init__(self):
        if self.nu <= 0:
            raise FieldError("collision frequency nu must be strictly positive")
        if self.omega <= 0:
            raise FieldError("omega must be strictly positive")
        object.__setattr__(self, "species", tuple(self.species))


def cold_plasma_coefficients(p: ColdPlasmaParams) -> tuple[complex, complex, complex]:
    a = p.omega + 1j * p.nu
    e1, e2, e3 = 1.0 + 0j, 0j, 1.0 + 0j
    for s in p.species:
        den = s.omega_c**2 - a * a
        if abs(den) == 0:
            raise FieldError("cold plasma resonance: omega_c^2 == alpha^2")
        e1 += (a / p.omega) * s.omega_p**2 / den
        e2 += (s.omega_c / p.omega) * s.omega_p**2 / den
        e3 -= s.omega_p**2 / (p.omega * a)
    return e1, e2, e3


def cold_plasma_eps(p: ColdPlasmaParams) -> np.ndarray:
    e1, e2, e3 = cold_plasma_coefficients(p)
    return gyrotropic_tensor(GyrotropicParams(e1, e2, e3, p.eps0_scale))


# -- catalog ------------------------------------------------------------------------

CATALOG_SCHEMAS: dict[str, dict] = {
    "lossy_isotropic": {
        "description": "eps = (eps0 eps_r + i sigma/omega) I3 or mu = mu0 mu_r I3",
        "params": {
            "quantity": {"type": "string", "enum": ["eps", "mu"], "default": "eps"},
            "eps_r": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
            "sigma": {"type": "number", "minimum": 0, "default": 0.0},
            "mu_r": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
            "omega": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
            "units": {"type": "string", "enum": ["nondimensional", "si"], "default": "nondimensional"},
        },
        "axes": "any numeric parameter",
        "dim": 3,
    },
    "spherical_cloak": {
        "description": "Lambda = diag(s1, s1, s2~^2/s1) in the radial frame, scaled by eps0 or mu0",
        "params": {
            "quantity": {"type": "string", "enum": ["eps", "mu"], "default": "eps"},
            "R1": {"type": "number", "exclusiveMinimum": 0},
            "R2": {"type": "number"},
            "clamp": {"type": "boolean", "default": True},
            "clamp_eps": {"type": "number", "exclusiveMinimum": 0, "default": DEFAULT_CLAMP},
            "units": {"type": "string", "default": "nondimensional"},
        },
        "axes": "r (default [R1, R2], 257 nodes)",
        "dim": 3,
    },
    "spherical_pml": {
        "description": "Lambda = diag(s1, s1, s2^2/s1), s1 = 1 + i sigma/kappa, s2 = 1 + i/(kappa r) int sigma",
        "params": {
            "quantity": {"type": "string", "enum": ["eps", "mu"], "default": "eps"},
            "R1": {"type": "number", "exclusiveMinimum": 0},
            "R2": {"type": "number"},
            "profile": {"type": "string", "enum": list(PML_PROFILES), "default": "constant"},
            "sigma0": {"type": "number", "minimum": 0, "default": 0.0},
            "kappa": {"type": "number", "exclusiveMinimum": 0, "default": "sqrt(eps0 mu0) omega"},
            "omega": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
            "units": {"type": "string", "default": "nondimensional"},
        },
        "axes": "r (default [R1, R2], 257 nodes)",
        "dim": 3,
    },
    "gyrotropic": {
        "description": "scale * [[c1, i c2, 0], [-i c2, c1, 0], [0, 0, c3]]",
        "params": {
            "c1": {"type": "complex"},
            "c2": {"type": "complex"},
            "c3": {"type": "complex"},
            "scale": {"type": "number", "default": 1.0},
        },
        "axes": "none",
        "dim": 3,
    },
    "ferrite": {
        "description": "gyromagnetic mu with mu1 = 1 - w0 wM/(w^2 - w0^2), mu2 = w wM/(w^2 - w0^2), mu3 = 1",
        "params": {
            "omega0": {"type": "number", "exclusiveMinimum": 0},
            "omegaM": {"type": "number", "minimum": 0},
            "omega": {"type": "number", "exclusiveMinimum": 0},
            "mu0_scale": {"type": "number", "default": 1.0},
        },
        "axes": "any numeric parameter",
        "dim": 3,
    },
    "cold_plasma": {
        "description": "gyroelectric eps of a collisional cold plasma, alpha = omega + i nu",
        "params": {
            "species": {"type": "array", "items": {"omega_p": "number", "omega_c": "number"}},
            "nu": {"type": "number", "exclusiveMinimum": 0},
            "omega": {"type": "number", "exclusiveMinimum": 0},
            "eps0_scale": {"type": "number", "default": 1.0},
        },
        "axes": "nu, omega",
        "dim": 3,
    },
}


def _sample_id(values: Mapping[str, float]) -> str:
    if not values:
        return "x0"
    return ",".join(f"{k}={float(v)!r}" for k, v in values.items())


def _coords(values: Mapping[str, float]):
    if "r" in values:
        return (0.0, 0.0, float(values["r"]))
    return None


def _layer_params(params: Mapping[str, Any]) -> SphericalLayerParams:
    units = params.get("units", "nondimensional")
    eps0, mu0 = vacuum_constants(units)
    kappa = params.get("kappa")
    if kappa is None:
        kappa = math.sqrt(eps0 * mu0) * float(params.get("omega", 1.0))
    return SphericalLayerParams(
        R1=float(params["R1"]),
        R2=float(params["R2"]),
        clamp_eps=float(params.get("clamp_eps", DEFAULT_CLAMP)),
        profile=str(params.get("profile", "constant")),
        sigma0=float(params.get("sigma0", 0.0)),
        kappa=float(kappa),
    )


def _quantity_scale(params: Mapping[str, Any]) -> float:
    eps0, mu0 = vacuum_constants(params.get("units", "nondimensional"))
    q = params.get("quantity", "eps")
    if q not in ("eps", "mu"):
        raise FieldError(f"quantity must be 'eps' or 'mu', got {q!r}")
    return eps0 if q == "eps" else mu0


def _eval_point(model: str, params: Mapping[str, Any]) -> np.ndarray:
    if model == "lossy_isotropic":
        eps_r = float(params.get("eps_r", 1.0))
        sigma = float(params.get("sigma", 0.0))
        mu_r = float(params.get("mu_r", 1.0))
        if eps_r <= 0 or mu_r <= 0:
            raise FieldError("eps_r and mu_r must be strictly positive")
        if sigma < 0:
            raise FieldError("conductivity must be non-negative")
        units = params.get("units", "nondimensional")
        if params.get("quantity", "eps") == "mu":
            return vacuum_constants(units)[1] * mu_r * np.eye(3, dtype=complex)
        return complex_permittivity(eps_r, sigma, float(params.get("omega", 1.0)), units) * np.eye(3, dtype=complex)
    if model == "spherical_cloak":
        lp = _layer_params(params)
        return _quantity_scale(params) * cloak_tensor(float(params["r"]), lp, bool(params.get("clamp", True)))
    if model == "gyrotropic":
        return gyrotropic_tensor(
            GyrotropicParams(
                _parse_complex(params.get("c1", params.get("eps1", params.get("mu1", 1.0)))),
                _parse_complex(params.get("c2", params.get("eps2", params.get("mu2", 0.0)))),
                _parse_complex(params.get("c3", params.get("eps3", params.get("mu3", 1.0)))),
                float(params.get("scale", 1.0)),
            )
        )
    if model == "ferrite":
        return ferrite_mu(
            FerriteParams(
                float(params["omega0"]),
                float(params["omegaM"]),
                float(params["omega"]),
                float(params.get("mu0_scale", 1.0)),
            )
        )
    if model == "cold_plasma":
        species = tuple(Species(float(s["omega_p"]), float(s["omega_c"])) for s in params.get("species", []))
        return cold_plasma_eps(
            ColdPlasmaParams(species, float(params.get("nu", 0.1)), float(params.get("omega", 1.0)), float(params.get("eps0_scale", 1.0)))
        )
    raise FieldError(f"unknown catalog model {model!r}; known: {', '.join(CATALOG_SCHEMAS)}")


def evaluate_model(model: str, params: Mapping[str, Any], sampling: SamplingSpec) -> list[tuple[SamplePoint, np.ndarray]]:
    """Evaluate a catalog model on its sampling grid in deterministic order."""
    if model not in CATALOG_SCHEMAS:
        raise FieldError(f"unknown catalog model {model!r}; known: {', '.join(CATALOG_SCHEMAS)}")
    params = dict(params)
    if model in ("spherical_cloak", "spherical_pml") and sampling.axis("r") is None:
        lp = _layer_params(params)
        sampling = SamplingSpec(sampling.axes + (Axis("r", lp.R1, lp.R2, DEFAULT_NODES),))

    if model == "spherical_pml":
        return _evaluate_pml(params, sampling)

    out = []
    for node in sampling.grid():
        out.append((SamplePoint(_sample_id(node), _coords(node)), _eval_point(model, {**params, **node})))
    return out


def _evaluate_pml(params: Mapping[str, Any], sampling: SamplingSpec) -> list[tuple[SamplePoint, np.ndarray]]:
    r_axis = sampling.axis("r")
    others = SamplingSpec(tuple(a for a in sampling.axes if a.name != "r"))
    rs = r_axis.nodes()
    out = []
    for node in others.grid():
        merged = {**params, **node}
        lp = _layer_params(merged)
        s1, s2 = pml_coefficients(rs, lp)
        tensors = _quantity_scale(merged) * _radial_tensor(s1, s2)
        for r, t in zip(rs, tensors):
            values = {**node, "r": float(r)}
            out.append((SamplePoint(_sample_id(values), _coords(values)), t))
    return out


def catalog_field(name: str, model: str, params: Mapping[str, Any] | None = None, dim: int | None = None, **axes) -> MaterialField:
    """Parametric field from the catalog; axes as ``r=(lo, hi[, count])``."""
    if model not in CATALOG_SCHEMAS:
        raise FieldError(f"unknown catalog model {model!r}")
    return MaterialField(name, dim or CATALOG_SCHEMAS[model]["dim"], Parametric(model, dict(params or {}), SamplingSpec.of(**axes)))
