"""Analysis of single bipartite density matrices.

Composite index convention: basis vector ``|j> (x) |l>`` of subsystems A
and B sits at position ``j * n_B + l`` (row-major over A, then B).  The
partial transpose acts on subsystem B.  All functions accept a single
``(N, N)`` matrix; the ``*_batch`` helpers accept stacks ``(k, N, N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension, InvalidParameter, InvalidSplit, InvalidState, ZeroNorm

__all__ = [
    "BipartiteSplit",
    "AnalysisRecord",
    "validate_density_matrix",
    "partial_transpose",
    "pt_spectrum_and_negativity",
    "participation_ratio",
    "renyi_entropy",
    "von_neumann_entropy",
    "spectrum_entropy",
    "reduce_to_B",
    "pure_state_entanglement",
    "pure_state_entanglement_batch",
    "analyze",
    "analyze_batch",
    "PPT_TOL",
]

PPT_TOL = 1e-10
ENTROPY_FLOOR = 1e-15


@dataclass(frozen=True)
class BipartiteSplit:
    n_a: int
    n_b: int

    def __post_init__(self):
        if int(self.n_a) != self.n_a or int(self.n_b) != self.n_b or self.n_a < 2 or self.n_b < 2:
            raise InvalidSplit(f"subsystem dimensions must be integers >= 2, got {self.n_a}x{self.n_b}")

    @property
    def n(self) -> int:
        return self.n_a * self.n_b

    def check(self, dim: int) -> None:
        if dim != self.n:
            raise InvalidSplit(f"matrix dimension {dim} does not match split {self.n_a}x{self.n_b}")

    def __str__(self):
        return f"{self.n_a}x{self.n_b}"


@dataclass
class AnalysisRecord:
    negativity: float
    participation: float
    von_neumann: float
    ppt: bool
    pt_spectrum: np.ndarray
    renyi: dict[float, float] = field(default_factory=dict)


def validate_density_matrix(rho, atol: float = 1e-12) -> np.ndarray:
    """Return ``rho`` as a complex array after checking Hermiticity, unit
    trace and positivity; raise :class:`InvalidState` otherwise."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
        raise InvalidDimension(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise InvalidState("matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise InvalidState(f"trace is {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -PPT_TOL:
        raise InvalidState("matrix has a negative eigenvalue")
    return rho


def partial_transpose(rho, split: BipartiteSplit) -> np.ndarray:
    """Transpose on subsystem B: ``out[jl, j'l'] = rho[jl', j'l]``.

    Works on a single matrix or on a stack of matrices.
    """
    rho = np.asarray(rho)
    split.check(rho.shape[-1])
    lead = rho.shape[:-2]
    a, b = split.n_a, split.n_b
    t = rho.reshape(lead + (a, b, a, b))
    k = len(lead)
    t = np.swapaxes(t, k + 1, k + 3)
    return t.reshape(lead + (a * b, a * b))


def _negativity_from_spectrum(ev: np.ndarray):
    ppt = ev[..., -1] >= -PPT_TOL
    t = np.sum(np.abs(ev), axis=-1) - 1.0
    t = np.where(ppt, 0.0, np.maximum(t, 0.0))
    return t, ppt


def pt_spectrum_and_negativity(rho, split: BipartiteSplit):
    """Descending spectrum of the partial transpose and the negativity
    ``t = sum |d'_i| - 1``.

    Returns ``(spectrum, t, ppt)``.  A state counts as PPT when its
    smallest PT eigenvalue is >= -1e-10; ``t`` is then reported as 0.
    """
    ev = np.linalg.eigvalsh(partial_transpose(rho, split))[..., ::-1]
    t, ppt = _negativity_from_spectrum(ev)
    if ev.ndim == 1:
        return ev, float(t), bool(ppt)
    return ev, t, ppt


def participation_ratio(rho) -> float:
    """``1 / Tr(rho^2)``; for Hermitian input Tr(rho^2) is the squared Frobenius norm."""
    rho = np.asarray(rho)
    purity = np.sum(np.abs(rho) ** 2, axis=(-2, -1))
    r = 1.0 / purity
    return float(r) if np.ndim(r) == 0 else r


def _spectrum(rho) -> np.ndarray:
    ev = np.linalg.eigvalsh(np.asarray(rho))
    return np.clip(ev, 0.0, None)


def spectrum_entropy(p, q: float = 1.0) -> float:
    """Entropy (nats) of a probability vector; order ``q`` Renyi, ``q = 1``
    Shannon.  Entries below 1e-15 are dropped."""
    p = np.asarray(p, dtype=float)
    p = p[p > ENTROPY_FLOOR]
    if q == 1.0:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p ** q)) / (1.0 - q))


def renyi_entropy(rho, q: float) -> float:
    """``ln(Tr rho^q) / (1 - q)`` in nats."""
    if not q > 0:
        raise InvalidParameter(f"Renyi order must be positive, got {q}")
    if q == 1:
        raise InvalidParameter("q = 1 is the von Neumann entropy; use von_neumann_entropy")
    if q == 2:
        # exact route: H_2 = ln R
        return float(np.log(participation_ratio(rho)))
    return max(spectrum_entropy(_spectrum(rho), q), 0.0)


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho ln rho)`` in nats, with 0 ln 0 = 0."""
    return max(spectrum_entropy(_spectrum(rho), 1.0), 0.0)


def reduce_to_B(psi, split: BipartiteSplit):
    """Reduction of an unnormalized pure state onto subsystem B.

    ``psi`` is reshaped to the ``n_A x n_B`` coefficient matrix ``A`` and
    ``(A^dagger A, <psi|psi>)`` is returned.  ``A^dagger A`` has the
    spectrum of the reduced state scaled by the squared norm.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    split.check(psi.size)
    p = float(np.vdot(psi, psi).real)
    if p <= 0.0:
        raise ZeroNorm("cannot reduce the zero vector")
    a = psi.reshape(split.n_a, split.n_b)
    return a.conj().T @ a, p


def pure_state_entanglement(psi, split: BipartiteSplit, q: float = 1.0) -> float:
    """Entropy of the reduced state of a pure state (normalization of
    ``psi`` is irrelevant)."""
    b, p = reduce_to_B(psi, split)
    return max(spectrum_entropy(np.linalg.eigvalsh(b) / p, q), 0.0)


def pure_state_entanglement_batch(psis: np.ndarray, split: BipartiteSplit) -> np.ndarray:
    """Von Neumann entanglement of a stack of unit vectors ``(k, N)``."""
    psis = np.asarray(psis)
    split.check(psis.shape[-1])
    a = psis.reshape(-1, split.n_a, split.n_b)
    if split.n_a > split.n_b:
        a = np.swapaxes(a, 1, 2)
    red = a @ np.conj(np.swapaxes(a, 1, 2))
    b = np.clip(np.linalg.eigvalsh(red), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(b > ENTROPY_FLOOR, -b * np.log(np.where(b > 0, b, 1.0)), 0.0)
    return np.maximum(terms.sum(axis=1), 0.0)


def analyze(rho, split: BipartiteSplit, renyi_orders=(2.0,)) -> AnalysisRecord:
    rho = validate_density_matrix(rho)
    ev, t, ppt = pt_spectrum_and_negativity(rho, split)
    return AnalysisRecord(
        negativity=t,
        participation=participation_ratio(rho),
        von_neumann=von_neumann_entropy(rho),
        ppt=ppt,
        pt_spectrum=ev,
        renyi={float(q): renyi_entropy(rho, q) for q in renyi_orders},
    )


def analyze_batch(rhos: np.ndarray, split: BipartiteSplit) -> dict[str, np.ndarray]:
    """Vectorized negativity, PPT flag and participation ratio of a stack."""
    ev, t, ppt = pt_spectrum_and_negativity(rhos, split)
    return {
        "t": np.atleast_1d(t),
        "ppt": np.atleast_1d(ppt),
        "R": np.atleast_1d(participation_ratio(rhos)),
        "pt_min": np.atleast_1d(ev[..., -1]),
    }
