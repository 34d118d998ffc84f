"""Random matrix ensembles and product measures on density matrices.

Every sampler takes an explicit :class:`numpy.random.Generator`.  Streams
for independent tasks are derived with :func:`stream`, which maps
``(seed, key...)`` to ``SeedSequence(seed, spawn_key=key)``.  That mapping
is the stable seed contract of the package: the child ``stream(s, k)`` is
the ``k``-th child of ``SeedSequence(s).spawn(...)``, so a task's output
depends only on the seed and its own key, never on scheduling.

Haar unitaries and orthogonals come from the QR decomposition of a
Ginibre matrix with the phases of ``diag(R)`` moved into ``Q``.  Dirichlet
spectra are drawn as normalized Gamma(lambda, 1) variates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, InvalidParameter

__all__ = [
    "MeasureSpec",
    "parse_measure",
    "stream",
    "sample_haar_unitary",
    "sample_haar_orthogonal",
    "sample_gue",
    "sample_goe",
    "sample_simplex",
    "sample_density_matrix",
    "sample_density_matrices",
    "sample_pure_states",
]

SIMPLEX_ATOL = 1e-12


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for task ``key`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass(frozen=True)
class MeasureSpec:
    """Law of the spectrum; the eigenbasis is always Haar on U(N).

    ``kind`` is one of ``"dirichlet"`` (parameter ``lam``), ``"pure"``
    (the lambda -> 0 limit) or ``"fixed"`` (a stored ``spectrum``).
    """

    kind: str
    lam: float | None = None
    spectrum: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "dirichlet":
            if self.lam is None or not self.lam > 0:
                raise InvalidParameter(f"Dirichlet parameter must be > 0, got {self.lam}")
        elif self.kind == "fixed":
            if self.spectrum is None or len(self.spectrum) == 0:
                raise InvalidParameter("fixed-spectrum measure needs a spectrum")
            d = np.asarray(self.spectrum, dtype=float)
            if np.any(d < 0) or abs(d.sum() - 1.0) > SIMPLEX_ATOL:
                raise InvalidParameter("fixed spectrum must be nonnegative and sum to 1")
        elif self.kind != "pure":
            raise InvalidParameter(f"unknown measure kind {self.kind!r}")

    @classmethod
    def dirichlet(cls, lam: float) -> MeasureSpec:
        return cls("dirichlet", lam=float(lam))

    @classmethod
    def unitary(cls) -> MeasureSpec:
        return cls("dirichlet", lam=1.0)

    @classmethod
    def orthogonal(cls) -> MeasureSpec:
        return cls("dirichlet", lam=0.5)

    @classmethod
    def pure(cls) -> MeasureSpec:
        return cls("pure")

    @classmethod
    def fixed(cls, spectrum) -> MeasureSpec:
        return cls("fixed", spectrum=tuple(float(x) for x in spectrum))

    @property
    def label(self) -> str:
        if self.kind == "dirichlet":
            if self.lam == 1.0:
                return "unitary"
            if self.lam == 0.5:
                return "orthogonal"
            return f"dirichlet:{self.lam:.17g}"
        if self.kind == "pure":
            return "pure"
        return "spectrum:" + ",".join(f"{x:.17g}" for x in self.spectrum)


def parse_measure(text: str) -> MeasureSpec:
    """Parse ``unitary``, ``orthogonal``, ``dirichlet:<lam>``, ``pure`` or
    ``spectrum:<d1,...,dN>``."""
    text = text.strip()
    if text == "unitary":
        return MeasureSpec.unitary()
    if text == "orthogonal":
        return MeasureSpec.orthogonal()
    if text == "pure":
        return MeasureSpec.pure()
    head, _, tail = text.partition(":")
    try:
        if head == "dirichlet" and tail:
            return MeasureSpec.dirichlet(float(tail))
        if head == "spectrum" and tail:
            return MeasureSpec.fixed([float(x) for x in tail.split(",")])
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse measure {text!r}: {exc}") from None
    raise InvalidParameter(f"cannot parse measure {text!r}")


def _check_dim(n: int) -> int:
    if int(n) != n or n < 1:
        raise InvalidDimension(f"dimension must be a positive integer, got {n}")
    return int(n)


def _ginibre(shape, rng, complex_=True):
    if complex_:
        z = rng.standard_normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    return rng.standard_normal(shape)


def _qr_haar(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return q * phase[..., None, :]


def sample_haar_unitary(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random unitary of shape ``(n, n)``, or ``(size, n, n)`` if ``size`` is given."""
    n = _check_dim(n)
    shape = (n, n) if size is None else (int(size), n, n)
    return _qr_haar(_ginibre(shape, rng))


def sample_haar_orthogonal(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random real orthogonal matrix (or a stack of ``size`` of them)."""
    n = _check_dim(n)
    shape = (n, n) if size is None else (int(size), n, n)
    return _qr_haar(_ginibre(shape, rng, complex_=False))


def sample_gue(m: int, rng: np.random.Generator) -> np.ndarray:
    """GUE matrix whose real parts have variance (1 + delta)/m and imaginary
    parts (1 - delta)/m."""
    m = _check_dim(m)
    a = rng.standard_normal((m, m))
    b = rng.standard_normal((m, m))
    upper = np.triu((a + 1j * b) / np.sqrt(m), 1)
    diag = np.sqrt(2.0 / m) * np.diagonal(a)
    return upper + upper.conj().T + np.diag(diag).astype(complex)


def sample_goe(m: int, rng: np.random.Generator) -> np.ndarray:
    """Real symmetric counterpart of :func:`sample_gue` (off-diagonal variance 1/m)."""
    m = _check_dim(m)
    a = rng.standard_normal((m, m))
    upper = np.triu(a / np.sqrt(m), 1)
    return upper + upper.T + np.diag(np.sqrt(2.0 / m) * np.diagonal(a))


def _dirichlet(n: int, lam: float, rng: np.random.Generator, count: int) -> np.ndarray:
    g = rng.standard_gamma(lam, size=(count, n))
    s = g.sum(axis=1)
    # very small lam can underflow a whole row; redraw those rows
    bad = s <= 0.0
    while np.any(bad):
        g[bad] = rng.standard_gamma(lam, size=(int(bad.sum()), n))
        s = g.sum(axis=1)
        bad = s <= 0.0
    return g / s[:, None]


def _simplex_batch(n: int, measure: MeasureSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    if measure.kind == "dirichlet":
        return _dirichlet(n, measure.lam, rng, count)
    if measure.kind == "pure":
        out = np.zeros((count, n))
        out[np.arange(count), rng.integers(0, n, size=count)] = 1.0
        return out
    d = np.asarray(measure.spectrum, dtype=float)
    if d.size != n:
        raise InvalidDimension(f"fixed spectrum has length {d.size}, expected {n}")
    return np.broadcast_to(d, (count, n)).copy()


def sample_simplex(n: int, measure: MeasureSpec, rng: np.random.Generator) -> np.ndarray:
    """Point of the (n-1)-simplex drawn from ``measure``.

    Entries are not reordered, so the coordinates stay exchangeable.  A
    fixed-spectrum measure returns its stored vector.
    """
    n = _check_dim(n)
    return _simplex_batch(n, measure, rng, 1)[0]


def sample_density_matrices(n: int, measure: MeasureSpec, count: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` states ``U diag(d) U^dagger`` with shape ``(count, n, n)``."""
    n = _check_dim(n)
    d = _simplex_batch(n, measure, rng, int(count))
    u = sample_haar_unitary(n, rng, size=int(count))
    rho = (u * d[:, None, :]) @ np.conj(np.swapaxes(u, -1, -2))
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def sample_density_matrix(n: int, measure: MeasureSpec, rng: np.random.Generator) -> np.ndarray:
    """One random state from the product measure ``measure`` x Haar."""
    return sample_density_matrices(n, measure, 1, rng)[0]


def sample_pure_states(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vectors, shape ``(count, n)``."""
    n = _check_dim(n)
    z = _ginibre((int(count), n), rng)
    return z / np.linalg.norm(z, axis=1, keepdims=True)
