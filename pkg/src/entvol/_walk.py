"""Compiled inner loop of the decomposition search.

Kept free of Python objects so one walk runs entirely in numba.  The
public, validated entry points live in :mod:`entvol.estimator`.
"""

from __future__ import annotations

import numba as nb
import numpy as np

WEIGHT_FLOOR = 1e-14
ENTROPY_FLOOR = 1e-15

RULE_CONSECUTIVE = 0
RULE_FAILURES = 1
RULE_ATTEMPTS = 2
# a move must lower E by more than this; round-off alone never counts as progress
ACCEPT_TOL = 1e-14


@nb.njit(cache=True)
def _entropy(ev, p, q):
    s = 0.0
    if q == 1.0:
        for x in ev:
            b = x / p
            if b > ENTROPY_FLOOR:
                s -= b * np.log(b)
        return s
    for x in ev:
        b = x / p
        if b > ENTROPY_FLOOR:
            s += b ** q
    return np.log(s) / (1.0 - q)


@nb.njit(cache=True)
def decomposition_entropy(v, psi, na, nb_, q):
    """Average reduced entropy of the decomposition ``phi = v[:, :N] @ psi``.

    ``psi`` holds the eigen-decomposition vectors as rows.  The reduced
    matrix is formed on the smaller subsystem; its nonzero spectrum is the
    same on either side.
    """
    m = v.shape[0]
    n = psi.shape[0]
    small = min(na, nb_)
    red = np.empty((small, small), np.complex128)
    phi = np.empty(n, np.complex128)
    total = 0.0
    for i in range(m):
        for k in range(n):
            acc = 0j
            for j in range(n):
                acc += v[i, j] * psi[j, k]
            phi[k] = acc
        p = 0.0
        for k in range(n):
            p += phi[k].real * phi[k].real + phi[k].imag * phi[k].imag
        if p <= WEIGHT_FLOOR:
            continue
        if na <= nb_:
            for r in range(na):
                for c in range(r, na):
                    acc = 0j
                    for l in range(nb_):
                        acc += phi[r * nb_ + l] * np.conj(phi[c * nb_ + l])
                    red[r, c] = acc
                    red[c, r] = np.conj(acc)
        else:
            for r in range(nb_):
                for c in range(r, nb_):
                    acc = 0j
                    for a in range(na):
                        acc += np.conj(phi[a * nb_ + r]) * phi[a * nb_ + c]
                    red[r, c] = acc
                    red[c, r] = np.conj(acc)
        if small == 2:
            x = red[0, 0].real
            y = red[1, 1].real
            mid = 0.5 * (x + y)
            disc = np.sqrt(0.25 * (x - y) ** 2 + abs(red[0, 1]) ** 2)
            ev = np.array([mid + disc, mid - disc])
        else:
            ev = np.linalg.eigvalsh(red)
        total += p * _entropy(ev, p, q)
    return total


@nb.njit(cache=True)
def gue(m, rng):
    a = rng.standard_normal((m, m))
    b = rng.standard_normal((m, m))
    h = np.empty((m, m), np.complex128)
    s = 1.0 / np.sqrt(m)
    d = np.sqrt(2.0 / m)
    for i in range(m):
        h[i, i] = a[i, i] * d
        for j in range(i + 1, m):
            z = (a[i, j] + 1j * b[i, j]) * s
            h[i, j] = z
            h[j, i] = np.conj(z)
    return h


@nb.njit(cache=True)
def exp_i(h, chi):
    """``exp(i chi h)`` for Hermitian ``h`` through its eigendecomposition."""
    w, q = np.linalg.eigh(h)
    ph = np.exp(1j * chi * w)
    return (q * ph) @ np.ascontiguousarray(q.conj().T)


@nb.njit(cache=True)
def walk(v, psi, na, nb_, q, chi0, chi_end, alpha, ichange, rule, max_iter, rng):
    """Zero-temperature descent from mixer ``v``.

    ``rule`` selects when an angle level ends: ``RULE_CONSECUTIVE`` after
    ``ichange`` failures in a row, ``RULE_FAILURES`` after ``ichange``
    failures in total, ``RULE_ATTEMPTS`` after ``ichange`` attempts.

    Returns ``(v, E, iterations, trace_iter, trace_E, exhausted)``.  The
    trace holds the iteration index and value of every accepted move,
    starting with the initial evaluation at iteration 1.
    """
    m = v.shape[0]
    e = decomposition_entropy(v, psi, na, nb_, q)
    it = 1
    trace_i = [1]
    trace_e = [e]
    exhausted = False
    chi = chi0
    while chi >= chi_end and not exhausted:
        count = 0
        while count < ichange:
            if max_iter > 0 and it >= max_iter:
                exhausted = True
                break
            v2 = v @ exp_i(gue(m, rng), chi)
            e2 = decomposition_entropy(v2, psi, na, nb_, q)
            it += 1
            if e2 < e - ACCEPT_TOL:
                v = v2
                e = e2
                trace_i.append(it)
                trace_e.append(e)
                if rule == RULE_CONSECUTIVE:
                    count = 0
                elif rule == RULE_ATTEMPTS:
                    count += 1
            else:
                count += 1
        chi *= alpha
    return v, e, it, np.array(trace_i), np.array(trace_e), exhausted
