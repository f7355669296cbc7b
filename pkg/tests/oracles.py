"""Brute-force reference computations shared by the tests."""

import numpy as np

from steerscope.matcore import PAULIS


def pauli_dot(v):
    return sum(c * p for c, p in zip(v, PAULIS))


def brute_expectation(rho, u, w):
    """Tr(rho (u.sigma) (x) (w.sigma)) straight from the density matrix."""
    return float(np.trace(rho @ np.kron(pauli_dot(u), pauli_dot(w))).real)


def brute_cffw(rho, a, a2, b, b2, direction="BtoA"):
    """CFFW left-hand side from operator traces only (no correlation matrix)."""
    e = lambda u, w: brute_expectation(rho, u, w)  # noqa: E731
    if direction == "BtoA":
        plus = np.hypot(e(a, b) + e(a, b2), e(a2, b) + e(a2, b2))
        minus = np.hypot(e(a, b) - e(a, b2), e(a2, b) - e(a2, b2))
    else:
        plus = np.hypot(e(a, b) + e(a2, b), e(a, b2) + e(a2, b2))
        minus = np.hypot(e(a, b) - e(a2, b), e(a, b2) - e(a2, b2))
    return plus + minus


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_orthonormal_pair(rng):
    u = random_unit(rng)
    w = rng.normal(size=3)
    w -= w.dot(u) * u
    return u, w / np.linalg.norm(w)
