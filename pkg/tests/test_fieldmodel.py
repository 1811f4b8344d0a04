import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_media.fieldmodel import (
    Axis,
    ExplicitSamples,
    FieldError,
    MaterialField,
    Parametric,
    SamplePoint,
    SamplingSpec,
    constant_field,
    field_from_dict,
    field_from_tensors,
    field_to_dict,
    inf_modulus,
    inverse_field,
    load_field,
    materialize,
    negated_inverse_field,
    scalar_field,
    scaled_field,
    sup_norm,
)
from elliptic_media.media import SphericalLayerParams, catalog_field, cloak_coefficients, ferrite_eigenvalues, FerriteParams
from tests.oracles import random_complex


def test_explicit_passthrough():
    t = [np.eye(2, dtype=complex), 2j * np.eye(2)]
    f = field_from_tensors("f", t, ids=["a", "b"])
    out = materialize(f)
    assert [p.id for p, _ in out] == ["a", "b"]
    assert np.array_equal(out[1][1], t[1])


def test_cloak_three_radii_hand_evaluated():
    # R1 = 1, R2 = 2: s1 = 1/(1 - 1/2) = 2, s2 = 2(1 - 1/r) -> {0, 2/3, 1}, clamped at 1e-3
    f = catalog_field("eps", "spherical_cloak", {"R1": 1.0, "R2": 2.0}, r=(1.0, 2.0, 3))
    out = materialize(f)
    assert [p.id for p, _ in out] == ["r=1.0", "r=1.5", "r=2.0"]
    expected = [(2.0, 1e-6 / 2), (2.0, (4 / 9) / 2), (2.0, 0.5)]
    for (_, t), (s1, zz) in zip(out, expected):
        assert np.allclose(t, np.diag([s1, s1, zz]), rtol=1e-14, atol=0)
    assert out[0][0].coords == (0.0, 0.0, 1.0)


def test_constant_lossy_parametric_samples_equal():
    f = catalog_field("eps", "lossy_isotropic", {"eps_r": 2.0, "sigma": 1.0}, x=(0.0, 1.0, 5))
    ts = f.tensors
    assert len(f) == 5
    assert all(np.array_equal(ts[0], t) for t in ts)
    assert np.allclose(ts[0], (2 + 1j) * np.eye(3))


def test_materialize_errors():
    with pytest.raises(FieldError):
        materialize(MaterialField("x", 3, Parametric("nope", {}, SamplingSpec())))
    with pytest.raises(FieldError):
        catalog_field("pml", "spherical_pml", {"R1": 1.0, "R2": 2.0, "sigma0": -1.0}).samples
    with pytest.raises(FieldError):
        MaterialField("x", 4, ExplicitSamples(()))
    with pytest.raises(FieldError):
        materialize(MaterialField("x", 1, ExplicitSamples(())))
    dup = ExplicitSamples(((SamplePoint("a"), np.eye(1)), (SamplePoint("a"), np.eye(1))))
    with pytest.raises(FieldError):
        materialize(MaterialField("x", 1, dup))
    wrong = ExplicitSamples(((SamplePoint("a"), np.eye(2)),))
    with pytest.raises(FieldError):
        materialize(MaterialField("x", 3, wrong))


def test_axis_validation():
    with pytest.raises(FieldError):
        Axis("r", 0.0, 1.0, 1)
    with pytest.raises(FieldError):
        Axis("r", 1.0, 0.0, 3)
    assert Axis("r", 1.0, 1.0, 5).count == 1
    assert SamplingSpec.of(r=(1.0, 2.0)).resolution == {"r": 257}


def test_materialize_deterministic():
    f = catalog_field("pml", "spherical_pml", {"R1": 1.0, "R2": 2.0, "sigma0": 1.0, "profile": "quadratic"}, r=(1.0, 2.0, 33))
    a = materialize(f)
    b = materialize(f)
    assert [p for p, _ in a] == [p for p, _ in b]
    assert all(np.array_equal(x, y) for (_, x), (_, y) in zip(a, b))


# -- sup_norm and inf_modulus ------------------------------------------------------------------


def test_sup_norm_examples():
    assert sup_norm(constant_field("c", (3 - 4j) * np.eye(3))) == pytest.approx(5.0)
    lossy = scalar_field("eps", [1 + 0.5j, 1 + 1j], dim=3)
    assert sup_norm(lossy) == pytest.approx(math.sqrt(2), rel=1e-15)
    p = FerriteParams(2.0, 1.0, 1.0)
    f = catalog_field("mu", "ferrite", {"omega0": 2.0, "omegaM": 1.0, "omega": 1.0})
    assert sup_norm(f) == pytest.approx(np.max(np.abs(ferrite_eigenvalues(p))), rel=1e-14)


def test_inf_modulus_examples():
    assert inf_modulus(scalar_field("x", [1 + 1j])) == pytest.approx(math.sqrt(2))
    lp = SphericalLayerParams(1.0, 2.0)
    rs = np.linspace(1.0, 2.0, 17)
    _, s2 = cloak_coefficients(rs, lp, clamp=False)
    assert inf_modulus(scalar_field("s2", s2)) == 0.0
    _, s2c = cloak_coefficients(rs, lp, clamp=True)
    assert inf_modulus(scalar_field("s2", s2c)) >= 1e-3
    with pytest.raises(FieldError):
        inf_modulus(constant_field("x", np.eye(2)))


def _nested(model, params, level):
    coarse = catalog_field("c", model, params, r=(1.0, 2.0, 2**level + 1))
    fine = catalog_field("f", model, params, r=(1.0, 2.0, 2 ** (level + 1) + 1))
    zz = lambda f: float(np.min(np.abs(f.tensors[:, 2, 2])))  # noqa: E731
    return sup_norm(fine) - sup_norm(coarse), zz(fine) - zz(coarse)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.sampled_from([("spherical_cloak", "constant"), ("spherical_pml", "constant")]))
def test_nested_grid_monotonicity_exact_nodes(level, case):
    model, profile = case
    params = {"R1": 1.0, "R2": 2.0, "sigma0": 0.7, "profile": profile, "clamp": False}
    d_sup, d_inf = _nested(model, params, level)
    assert d_sup >= 0.0
    assert d_inf <= 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.sampled_from(["linear", "quadratic"]))
def test_nested_grid_monotonicity_pml_up_to_quadrature(level, profile):
    # the layer integral is a trapezoid sum on the field grid, so nodal values move by O(h^2)
    params = {"R1": 1.0, "R2": 2.0, "sigma0": 0.7, "profile": profile}
    d_sup, d_inf = _nested("spherical_pml", params, level)
    h = 1.0 / 2**level
    assert d_sup >= -0.7 * h * h
    assert d_inf <= 0.7 * h * h


def test_transforms():
    rng = np.random.default_rng(0)
    t = random_complex(rng) + 4 * np.eye(3)
    f = constant_field("f", t)
    assert np.allclose(inverse_field(f).tensors[0] @ t, np.eye(3))
    assert np.allclose(negated_inverse_field(f).tensors[0] @ t, -np.eye(3))
    assert np.allclose(scaled_field(f, 2j).tensors[0], 2j * t)
    assert inverse_field(f).points == f.points


# -- JSON ---------------------------------------------------------------------------


def test_json_roundtrip_explicit(tmp_path):
    rng = np.random.default_rng(1)
    f = field_from_tensors("f", [random_complex(rng) for _ in range(3)], coords=[(0, 0, 1.0), None, None])
    path = tmp_path / "f.json"
    path.write_text(json.dumps(field_to_dict(f)))
    g = load_field(path)
    assert g.name == "f" and g.dim == 3
    assert np.array_equal(g.tensors, f.tensors)
    assert g.points[0].coords == (0.0, 0.0, 1.0)


def test_json_roundtrip_parametric():
    f = catalog_field("eps", "spherical_cloak", {"R1": 1.0, "R2": 2.0}, r=(1.0, 2.0, 9))
    g = field_from_dict(field_to_dict(f))
    assert np.array_equal(g.tensors, f.tensors)


def test_json_scalar_forms():
    data = {
        "name": "s",
        "dim": 1,
        "source": {"type": "explicit", "samples": [{"tensor": [1, 2]}, {"tensor": 3.0}, {"tensor": [[[0, 1]]]}]},
    }
    f = field_from_dict(data)
    assert list(f.tensors[:, 0, 0]) == [1 + 2j, 3, 1j]


@pytest.mark.parametrize(
    "data",
    [
        {"dim": 1, "source": {"type": "explicit"}},
        {"name": "x", "dim": 1, "source": {"type": "weird"}},
        {"name": "x", "dim": 1, "source": {"type": "explicit", "samples": []}},
        {"name": "x", "dim": 2, "source": {"type": "explicit", "samples": [{"tensor": [[[1, 0]]]}]}},
    ],
)
def test_json_errors(data):
    with pytest.raises(FieldError):
        field_from_dict(data).samples
