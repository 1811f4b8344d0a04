"""Closed-form linear algebra for small complex tensors (d = 1, 2, 3).

Every routine accepts a single ``(d, d)`` array or a batch ``(..., d, d)``
and works along the trailing two axes.
"""

from __future__ import annotations

import enum

import numpy as np

TAU_STRUCT = 1e-12


class StructuralClass(enum.Enum):
    SCALAR = "Scalar"
    HERMITIAN = "HermitianT"
    NORMAL = "NormalT"
    GENERAL = "General"


class StructureError(ValueError):
    """Raised when a tensor lacks the structure an operation requires."""


def as_tensor(xi) -> np.ndarray:
    a = np.asarray(xi, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.shape[-1] != a.shape[-2] or a.shape[-1] not in (1, 2, 3):
        raise ValueError(f"expected (..., d, d) with d in 1..3, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("tensor entries must be finite")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(xi, theta) -> np.ndarray:
    """H(theta) = (e^{i theta} xi + (e^{i theta} xi)^H) / 2.

    ``theta`` may be an array; it broadcasts against the batch shape of
    ``xi``. For every z, ``z^H H z == Re{e^{i theta} (xi z) . conj(z)}``.
    """
    xi = as_tensor(xi)
    rot = np.exp(1j * np.asarray(theta, dtype=float))[..., None, None]
    m = rot * xi
    return 0.5 * (m + dagger(m))


def split_hermitian(xi) -> tuple[np.ndarray, np.ndarray]:
    """Return (A, B) with H(theta) = cos(theta) A + sin(theta) B."""
    xi = as_tensor(xi)
    xh = dagger(xi)
    return 0.5 * (xi + xh), 0.5j * (xi - xh)


def _frob(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def _hermitian_residual(h: np.ndarray) -> np.ndarray:
    return _frob(h - dagger(h))


def _eigvalsh_closed(h: np.ndarray) -> np.ndarray:
    d = h.shape[-1]
    if d == 1:
        return h[..., 0, 0].real[..., None].copy()
    if d == 2:
        a = h[..., 0, 0].real
        c = h[..., 1, 1].real
        b = h[..., 0, 1]
        mean = 0.5 * (a + c)
        rad = np.hypot(0.5 * (a - c), np.abs(b))
        return np.stack([mean - rad, mean + rad], axis=-1)

    # trigonometric solution of the depressed characteristic cubic
    q = np.trace(h, axis1=-2, axis2=-1).real / 3.0
    eye = np.eye(3)
    b = h - q[..., None, None] * eye
    p2 = np.sum(np.abs(b) ** 2, axis=(-2, -1)) / 6.0
    p = np.sqrt(p2)
    safe = np.where(p > 0, p, 1.0)
    bn = b / safe[..., None, None]
    r = np.clip(np.linalg.det(bn).real / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    l1 = q + 2.0 * p * np.cos(phi)
    l3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    l2 = 3.0 * q - l1 - l3
    return np.sort(np.stack([l1, l2, l3], axis=-1), axis=-1)


def _rayleigh_polish(h: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Refine closed-form roots (d = 3) by deflating the most isolated one.

    The root with the largest adjugate column has a gap of at least half the
    spread; its cross-product eigenvector is accurate, the remaining pair is
    solved as the 2x2 block on its orthogonal complement.
    """
    # work on the trace-free part so that rank tests see the spread of the spectrum, not its offset
    q = np.trace(h, axis1=-2, axis2=-1).real / 3.0
    eye = np.eye(3)
    h = h - q[..., None, None] * eye
    lam = lam - q[..., None]
    scale = np.maximum(_frob(h), np.finfo(float).tiny)
    best_v = None
    best_n = None
    for k in range(3):
        m = h - lam[..., k, None, None] * eye
        rows = (m[..., 0, :], m[..., 1, :], m[..., 2, :])
        for c in (np.cross(rows[0], rows[1]), np.cross(rows[0], rows[2]), np.cross(rows[1], rows[2])):
            n = np.sum(np.abs(c) ** 2, axis=-1)
            if best_n is None:
                best_v, best_n = c, n
            else:
                take = n > best_n
                best_v = np.where(take[..., None], c, best_v)
                best_n = np.where(take, n, best_n)
    # triple cluster: every shifted matrix is numerically rank <= 1
    ok = best_n > 1e-24 * scale**4
    v = np.where(ok[..., None], best_v, np.array([1.0, 0.0, 0.0]))
    v = v / np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))[..., None]
    simple = np.sum(np.conj(v) * np.einsum("...ij,...j->...i", h, v), axis=-1).real
    e = np.zeros_like(v)
    np.put_along_axis(e, np.argmin(np.abs(v), axis=-1)[..., None], 1.0, axis=-1)
    u1 = e - np.sum(np.conj(v) * e, axis=-1)[..., None] * v
    u1 = u1 / np.sqrt(np.sum(np.abs(u1) ** 2, axis=-1))[..., None]
    u2 = np.conj(np.cross(v, u1))
    u = np.stack([u1, u2], axis=-1)
    block = np.einsum("...ji,...jk,...kl->...il", np.conj(u), h, u)
    pair = _eigvalsh_closed(0.5 * (block + dagger(block)))
    fixed = np.concatenate([simple[..., None], pair], axis=-1)
    out = np.where(ok[..., None], fixed, lam)
    return np.sort(out + q[..., None], axis=-1)


def eig_hermitian(h, check: bool = True) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian tensor (closed form)."""
    h = as_tensor(h)
    if check:
        res = _hermitian_residual(h)
        if np.any(res > TAU_STRUCT * np.maximum(_frob(h), 1.0) * 10):
            raise StructureError("matrix is not Hermitian within tolerance")
    h = 0.5 * (h + dagger(h))
    lam = _eigvalsh_closed(h)
    if h.shape[-1] == 3:
        lam = _rayleigh_polish(h, lam)
    return lam


def min_eig_hermitian(h) -> np.ndarray:
    return eig_hermitian(h, check=False)[..., 0]


def charpoly(xi) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first."""
    xi = as_tensor(xi)
    d = xi.shape[-1]
    tr = np.trace(xi, axis1=-2, axis2=-1)
    one = np.ones_like(tr)
    if d == 1:
        return np.stack([one, -tr], axis=-1)
    det = np.linalg.det(xi)
    if d == 2:
        return np.stack([one, -tr, det], axis=-1)
    m2 = (
        xi[..., 0, 0] * xi[..., 1, 1] - xi[..., 0, 1] * xi[..., 1, 0]
        + xi[..., 0, 0] * xi[..., 2, 2] - xi[..., 0, 2] * xi[..., 2, 0]
        + xi[..., 1, 1] * xi[..., 2, 2] - xi[..., 1, 2] * xi[..., 2, 1]
    )
    return np.stack([one, -tr, m2, -det], axis=-1)


def _polyval(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x) + c[..., 0:1]
    for k in range(1, c.shape[-1]):
        out = out * x + c[..., k : k + 1]
    return out


def _polyder(c: np.ndarray) -> np.ndarray:
    n = c.shape[-1] - 1
    powers = np.arange(n, 0, -1)
    return c[..., :-1] * powers


def _sort_complex(z: np.ndarray) -> np.ndarray:
    # lexicographic on (re, im)
    order = np.lexsort((z.imag, z.real), axis=-1)
    return np.take_along_axis(z, order, axis=-1)


def eig_general(xi) -> np.ndarray:
    """Complex eigenvalues with multiplicity, sorted by (re, im).

    d = 3 uses Cardano's formula on the depressed cubic; every root then
    receives one Newton step on det(xi - lambda I), kept only if it lowers
    the polynomial residual.
    """
    xi = as_tensor(xi)
    d = xi.shape[-1]
    if d == 1:
        return xi[..., 0, 0][..., None].copy()
    c = charpoly(xi)
    if d == 2:
        # stable sign choice, second root by Vieta
        roots = _quadratic_roots(-c[..., 1], c[..., 2])
    else:
        a, b, cc = c[..., 1], c[..., 2], c[..., 3]
        shift = a / 3.0
        p = b - a * a / 3.0
        q = 2.0 * a**3 / 27.0 - a * b / 3.0 + cc
        disc = np.sqrt(q * q / 4.0 + p**3 / 27.0)
        w1 = -q / 2.0 + disc
        w2 = -q / 2.0 - disc
        w = np.where(np.abs(w1) >= np.abs(w2), w1, w2)
        u = np.where(w != 0, w ** (1.0 / 3.0), 0.0)
        safe_u = np.where(u != 0, u, 1.0)
        v = np.where(u != 0, -p / (3.0 * safe_u), 0.0)
        omega = np.exp(2j * np.pi / 3.0)
        t = np.stack([u + v, u * omega + v / omega, u / omega + v * omega], axis=-1)
        roots = t - shift[..., None]
    roots = _newton_polish(c, roots)
    if d == 3:
        roots = _deflate_decoupled(xi, roots)
    return _sort_complex(roots)


def _quadratic_roots(tr: np.ndarray, det: np.ndarray) -> np.ndarray:
    half = -0.5 * tr
    disc = np.sqrt(half * half - det)
    s = np.where(np.real(np.conj(half) * disc) >= 0, 1.0, -1.0)
    r1 = -half - s * disc
    r2 = np.where(r1 != 0, det / np.where(r1 != 0, r1, 1.0), -half + s * disc)
    return np.stack([r1, r2], axis=-1)


def _deflate_decoupled(xi: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Exact factorization for triangular tensors and tensors with a decoupled axis.

    The characteristic polynomial of such tensors splits exactly, which
    avoids the sqrt(eps) sensitivity of Cardano at repeated roots.
    """
    out = roots.copy()
    lower = (xi[..., 1, 0] == 0) & (xi[..., 2, 0] == 0) & (xi[..., 2, 1] == 0)
    upper = (xi[..., 0, 1] == 0) & (xi[..., 0, 2] == 0) & (xi[..., 1, 2] == 0)
    tri = lower | upper
    diag = np.diagonal(xi, axis1=-2, axis2=-1)
    out = np.where(tri[..., None], diag, out)
    done = tri
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        iso = (xi[..., k, i] == 0) & (xi[..., k, j] == 0) & (xi[..., i, k] == 0) & (xi[..., j, k] == 0) & ~done
        if not np.any(iso):
            continue
        tr = xi[..., i, i] + xi[..., j, j]
        det = xi[..., i, i] * xi[..., j, j] - xi[..., i, j] * xi[..., j, i]
        q = _quadratic_roots(tr, det)
        cand = np.concatenate([q, xi[..., k, k][..., None]], axis=-1)
        out = np.where(iso[..., None], cand, out)
        done = done | iso
    return out


def _newton_polish(c: np.ndarray, roots: np.ndarray) -> np.ndarray:
    f = _polyval(c, roots)
    df = _polyval(_polyder(c), roots)
    good = np.abs(df) > 1e-8 * np.maximum(1.0, np.max(np.abs(c), axis=-1, keepdims=True))
    step = np.where(good, f / np.where(good, df, 1.0), 0.0)
    cand = roots - step
    better = np.abs(_polyval(c, cand)) <= np.abs(f)
    return np.where(better, cand, roots)


def operator_norm(xi) -> np.ndarray | float:
    """Spectral norm: sqrt of the largest eigenvalue of xi^H xi."""
    xi = as_tensor(xi)
    g = dagger(xi) @ xi
    lam = eig_hermitian(g, check=False)[..., -1]
    out = np.sqrt(np.maximum(lam, 0.0))
    return float(out) if out.ndim == 0 else out


def inverse(xi) -> np.ndarray:
    return np.linalg.inv(as_tensor(xi))


def classify(xi, tol: float = TAU_STRUCT) -> StructuralClass:
    """Structural class of a single tensor."""
    xi = as_tensor(xi)
    if xi.ndim != 2:
        raise ValueError("classify expects a single tensor")
    d = xi.shape[0]
    nrm = float(_frob(xi))
    if d == 1:
        return StructuralClass.SCALAR
    c = np.trace(xi) / d
    if float(_frob(xi - c * np.eye(d))) <= tol * nrm:
        return StructuralClass.SCALAR
    if float(_hermitian_residual(xi)) <= tol * nrm:
        return StructuralClass.HERMITIAN
    xh = dagger(xi)
    if float(_frob(xi @ xh - xh @ xi)) <= tol * nrm * nrm:
        return StructuralClass.NORMAL
    return StructuralClass.GENERAL


def structure_flags(xi, tol: float = TAU_STRUCT) -> tuple[bool, bool, bool]:
    """(is_scalar, is_hermitian, is_normal) for a single tensor, tested independently."""
    xi = as_tensor(xi)
    d = xi.shape[0]
    nrm = float(_frob(xi))
    herm = float(_hermitian_residual(xi)) <= tol * nrm
    if d == 1:
        return True, herm, True
    c = np.trace(xi) / d
    scalar = float(_frob(xi - c * np.eye(d))) <= tol * nrm
    xh = dagger(xi)
    normal = scalar or herm or float(_frob(xi @ xh - xh @ xi)) <= tol * nrm * nrm
    return scalar, herm, normal


def structure_flags_batch(xi, tol: float = TAU_STRUCT) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`structure_flags` over a stack of shape (S, d, d)."""
    xi = as_tensor(xi)
    if xi.ndim == 2:
        xi = xi[None]
    d = xi.shape[-1]
    nrm = _frob(xi)
    herm = _hermitian_residual(xi) <= tol * nrm
    if d == 1:
        ones = np.ones(xi.shape[0], dtype=bool)
        return ones, herm, ones
    c = np.trace(xi, axis1=-2, axis2=-1) / d
    scalar = _frob(xi - c[:, None, None] * np.eye(d)) <= tol * nrm
    xh = dagger(xi)
    normal = scalar | herm | (_frob(xi @ xh - xh @ xi) <= tol * nrm * nrm)
    return scalar, herm, normal
