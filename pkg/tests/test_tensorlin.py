import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_media.tensorlin import (
    StructuralClass,
    StructureError,
    as_tensor,
    charpoly,
    classify,
    eig_general,
    eig_hermitian,
    hermitian_part,
    inverse,
    min_eig_hermitian,
    operator_norm,
    split_hermitian,
    structure_flags,
    structure_flags_batch,
)
from tests.oracles import random_complex, random_hermitian, random_unitary, rayleigh_min

seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([1, 2, 3])


def test_as_tensor_validation():
    assert as_tensor(2.0).shape == (1, 1)
    with pytest.raises(ValueError):
        as_tensor(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        as_tensor([[np.nan]])


# -- Hermitian part ---------------------------------------------------------------------


def test_hermitian_part_examples():
    assert np.allclose(hermitian_part(np.eye(3), 0.0), np.eye(3))
    assert np.allclose(hermitian_part(1j * np.eye(3), -math.pi / 2), np.eye(3))


def test_split_matches_hermitian_part():
    rng = np.random.default_rng(0)
    xi = random_complex(rng)
    A, B = split_hermitian(xi)
    for t in rng.uniform(-4, 4, 5):
        assert np.allclose(math.cos(t) * A + math.sin(t) * B, hermitian_part(xi, t), atol=1e-14)


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_hermitian_part_quadratic_form_identity(seed, d):
    rng = np.random.default_rng(seed)
    xi = random_complex(rng, d)
    theta = rng.uniform(-math.pi, math.pi)
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    h = hermitian_part(xi, theta)
    lhs = np.vdot(z, h @ z)
    rhs = (np.exp(1j * theta) * np.dot(xi @ z, np.conj(z))).real
    assert abs(lhs.imag) <= 1e-13 * np.linalg.norm(xi, 2) * np.vdot(z, z).real
    assert abs(lhs.real - rhs) <= 1e-13 * np.linalg.norm(xi, 2) * np.vdot(z, z).real


# -- Hermitian eigenvalues --------------------------------------------------------------------


def test_eig_hermitian_examples():
    assert np.allclose(eig_hermitian(np.diag([1.0, 2.0, 3.0])), [1, 2, 3], atol=1e-14)
    assert np.allclose(eig_hermitian([[5, 2j], [-2j, 5]]), [3, 7], atol=1e-14)
    assert np.allclose(eig_hermitian([[4.0]]), [4.0])


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(StructureError):
        eig_hermitian([[1, 1], [0, 1]])


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_eig_hermitian_residual(seed, d):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    lam = eig_hermitian(h)
    assert np.all(np.diff(lam) >= 0)
    nrm = np.linalg.norm(h, 2)
    for lk in lam:
        # smallest singular value of H - lambda I is the best residual |Hv - lambda v|
        res = np.linalg.svd(h - lk * np.eye(d), compute_uv=False)[-1]
        assert res <= 1e-12 * nrm


def test_eig_hermitian_degenerate_cases():
    u = random_unitary(np.random.default_rng(3))
    for lam in ([2.0, 2.0, 2.0], [1.0, 1.0, 5.0], [0.0, 0.0, 1e-9], [-1.0, 3.0, 3.0]):
        h = u @ np.diag(lam) @ u.conj().T
        assert np.allclose(eig_hermitian(h), lam, atol=1e-12, rtol=0)


@settings(max_examples=200, deadline=None)
@given(seeds, st.sampled_from([0.0, 1e-10, 1e-7, 1e-4]), st.booleans())
def test_eig_hermitian_near_double_roots(seed, split, low_pair):
    rng = np.random.default_rng(seed)
    a, b = np.sort(rng.normal(size=2) * 3)
    if b - a < 0.1:
        b = a + 0.1
    lam = [a, a + split, b] if low_pair else [a, b, b + split]
    u = random_unitary(rng)
    h = u @ np.diag(lam) @ u.conj().T
    assert np.allclose(eig_hermitian(h), np.sort(lam), atol=1e-12 * max(1.0, abs(a), abs(b)), rtol=0)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_min_eig_matches_rayleigh_sampling(seed):
    rng = np.random.default_rng(seed)
    xi = random_complex(rng)
    theta = rng.uniform(-math.pi, math.pi)
    lmin = float(min_eig_hermitian(hermitian_part(xi, theta)))
    sampled = rayleigh_min(xi, theta, rng)
    assert sampled >= lmin - 1e-9
    assert sampled <= lmin + 0.25 * np.linalg.norm(xi, 2)  # coarse: sampling approaches from above


# -- general eigenvalues --------------------------------------------------------------------


def test_eig_general_examples():
    got = eig_general(np.diag([1 + 1j, 2, -3j]))
    assert np.allclose(np.sort_complex(got), np.sort_complex([1 + 1j, 2, -3j]), atol=1e-14)
    gyro = np.array([[1 + 0.5j, 1j * 0.2j, 0], [-1j * 0.2j, 1 + 0.5j, 0], [0, 0, 2]])
    assert np.allclose(np.sort_complex(eig_general(gyro)), np.sort_complex([1 + 0.7j, 1 + 0.3j, 2]), atol=1e-14)


def test_eig_general_ordering_is_lexicographic():
    got = eig_general(np.diag([2 + 0j, 1 + 1j, 1 - 1j]))
    assert list(got) == [1 - 1j, 1 + 1j, 2]


def test_eig_general_jordan_block():
    j = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=complex)
    assert np.allclose(eig_general(j), [1, 1, 1], atol=1e-12)
    coupled = np.array([[1, 1, 0], [0, 1, 1], [0, 0, 1]], dtype=complex)
    u = random_unitary(np.random.default_rng(0))
    # a similarity-transformed Jordan block keeps the cube-root sensitivity of a triple root
    assert np.allclose(eig_general(u @ coupled @ u.conj().T), [1, 1, 1], atol=1e-4)


@settings(max_examples=200, deadline=None)
@given(seeds, dims)
def test_eig_general_charpoly_residual(seed, d):
    rng = np.random.default_rng(seed)
    xi = random_complex(rng, d)
    lam = eig_general(xi)
    c = charpoly(xi)
    scale = max(1.0, np.linalg.norm(xi, 2)) ** d
    for lk in lam:
        assert abs(np.polyval(c, lk)) <= 1e-10 * scale
    assert np.allclose(np.sort_complex(lam), np.sort_complex(np.linalg.eigvals(xi)), atol=1e-8 * scale)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_eig_general_unitary_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    xi = random_complex(rng)
    u = random_unitary(rng)
    a = np.sort_complex(eig_general(xi))
    b = np.sort_complex(eig_general(u @ xi @ u.conj().T))
    gaps = np.abs(a[:, None] - a[None, :]) + np.eye(3)
    if gaps.min() < 1e-3:
        return  # clustered roots are ill-conditioned through the characteristic polynomial
    assert np.allclose(a, b, atol=1e-9)


# -- norms and inverse --------------------------------------------------------------------


def test_operator_norm_examples():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0)
    assert operator_norm(np.diag([3, -4j, 0])) == pytest.approx(4.0)
    assert operator_norm(np.stack([np.eye(2), 2 * np.eye(2)])) == pytest.approx([1.0, 2.0])


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_operator_norm_sampling_bound(seed):
    rng = np.random.default_rng(seed)
    xi = random_complex(rng)
    z = rng.normal(size=(10_000, 3)) + 1j * rng.normal(size=(10_000, 3))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    sampled = np.max(np.linalg.norm(z @ xi.T, axis=1))
    nrm = operator_norm(xi)
    assert sampled <= nrm + 1e-12
    assert nrm <= sampled + 0.5  # sampling approaches the norm from below
    assert nrm == pytest.approx(np.linalg.norm(xi, 2), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_operator_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    a, b = random_complex(rng), random_complex(rng)
    assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) * (1 + 1e-12)


def test_inverse():
    xi = np.array([[2, 1j], [0, 1]])
    assert np.allclose(inverse(xi) @ xi, np.eye(2))


# -- classification --------------------------------------------------------------------


@pytest.mark.parametrize(
    "xi, expected",
    [
        ([[1 + 0.5j, 1j * 0.3j], [-1j * 0.3j, 1 + 0.5j]], StructuralClass.NORMAL),
        (np.diag([1.0, 2.0, 3.0]), StructuralClass.HERMITIAN),
        ([[1, 1], [0, 1]], StructuralClass.GENERAL),
        ((1 + 1j) * np.eye(3), StructuralClass.SCALAR),
        ([[3.0]], StructuralClass.SCALAR),
    ],
)
def test_classify_examples(xi, expected):
    assert classify(xi) is expected


def test_gyrotropic_block_is_normal_for_complex_entries():
    rng = np.random.default_rng(1)
    for _ in range(20):
        e1, e2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        xi = np.array([[e1, 1j * e2, 0], [-1j * e2, e1, 0], [0, 0, 1.0]])
        assert classify(xi) in (StructuralClass.NORMAL, StructuralClass.HERMITIAN)
        xh = xi.conj().T
        assert np.allclose(xi @ xh, xh @ xi)


def test_structure_flags_batch_agrees_with_single():
    rng = np.random.default_rng(2)
    u = random_unitary(rng)
    stack = np.stack(
        [
            np.eye(3) * (1 + 1j),
            random_hermitian(rng),
            u @ np.diag([1, 1j, -1]) @ u.conj().T,
            random_complex(rng),
        ]
    )
    s, h, n = structure_flags_batch(stack)
    for k in range(4):
        assert (s[k], h[k], n[k]) == structure_flags(stack[k])
    assert list(s) == [True, False, False, False]
    assert list(n) == [True, True, True, False]
