"""Closed-form two-qubit entanglement of formation via the concurrence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, InvalidParameter

__all__ = [
    "ConcurrenceResult",
    "FLIP",
    "flipped_state",
    "concurrence",
    "concurrence_batch",
    "binary_entropy",
    "eof_from_concurrence",
]

# antidiagonal (1, -1, -1, 1): sigma_y (x) sigma_y up to a sign
FLIP = np.array(
    [[0, 0, 0, 1],
     [0, 0, -1, 0],
     [0, -1, 0, 0],
     [1, 0, 0, 0]],
    dtype=float,
)
MODULUS_FLOOR = 1e-14


@dataclass(frozen=True)
class ConcurrenceResult:
    alphas: tuple[float, float, float, float]
    concurrence: float
    eof: float


def _check4(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise InvalidDimension(f"two-qubit routines need 4x4 matrices, got {rho.shape}")
    return rho


def flipped_state(rho) -> np.ndarray:
    """``O rho* O^T`` with the antidiagonal flip ``O``."""
    rho = _check4(rho)
    return FLIP @ rho.conj() @ FLIP.T


def binary_entropy(x):
    """``-x ln x - (1-x) ln(1-x)`` with 0 ln 0 = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, -x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, -(1 - x) * np.log1p(-np.where(x < 1, x, 0.0)), 0.0)
    h = a + b
    return float(h) if h.ndim == 0 else h


def _eof(c):
    c = np.asarray(c, dtype=float)
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    # 1 - x computed without cancellation for small c
    small = c * c / (2.0 * (1.0 + s))
    x = 1.0 - small
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.where(small > 0, -x * np.log1p(-small) - small * np.log(np.where(small > 0, small, 1.0)), 0.0)
    return e


def eof_from_concurrence(c):
    """Entanglement of formation (nats) of a two-qubit state with concurrence ``c``."""
    arr = np.asarray(c, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise InvalidParameter(f"concurrence must lie in [0, 1], got {c}")
    e = _eof(np.clip(arr, 0.0, 1.0))
    return float(e) if e.ndim == 0 else e


def concurrence_batch(rhos: np.ndarray):
    """Concurrence and EoF for a stack of 4x4 states.

    Returns ``(alphas, C, E)`` with ``alphas`` sorted descending per state.
    """
    rhos = _check4(rhos)
    tilde = FLIP @ rhos.conj() @ FLIP.T
    mods = np.abs(np.linalg.eigvals(rhos @ tilde))
    mods = np.where(mods < MODULUS_FLOOR, 0.0, mods)
    alphas = -np.sort(-np.sqrt(mods), axis=-1)
    c = alphas[..., 0] - alphas[..., 1] - alphas[..., 2] - alphas[..., 3]
    c = np.clip(c, 0.0, 1.0)
    return alphas, c, _eof(c)


def concurrence(rho) -> ConcurrenceResult:
    """Concurrence from the square roots of the moduli of the eigenvalues of
    ``rho @ flipped_state(rho)``."""
    rho = _check4(rho)
    if rho.ndim != 2:
        raise InvalidDimension("concurrence expects a single 4x4 matrix; use concurrence_batch")
    alphas, c, e = concurrence_batch(rho)
    return ConcurrenceResult(tuple(float(a) for a in alphas), float(c), float(e))
