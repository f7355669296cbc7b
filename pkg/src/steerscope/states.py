"""Validated density matrices, Bloch decomposition and random ensembles.

Pauli basis convention: sigma_1 = X, sigma_2 = Y, sigma_3 = Z in the
computational basis. In the correlation matrix ``T`` the row index belongs to
Alice (qubit 0) and the column index to Bob (qubit 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .matcore import PAULIS, I2, LinalgError, as_matrix, hermitian_eigensystem, kron

STATE_TOL = 1e-10
BLOCH_SLACK = 1e-9

ENSEMBLE_KINDS = ("haar_pure_2q", "ginibre_mixed_2q", "haar_pure_3q", "ginibre_mixed_3q")


class StateValidationError(ValueError):
    """A matrix failed one of the density-matrix invariants.

    ``invariant`` is one of ``"dimension"``, ``"hermitian"``, ``"trace"``,
    ``"positive_semidefinite"``; ``magnitude`` is the size of the violation.
    """

    def __init__(self, invariant: str, magnitude: float, message: str):
        super().__init__(message)
        self.invariant = invariant
        self.magnitude = magnitude


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class _State:
    matrix: np.ndarray
    n_qubits = 0

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


class TwoQubitState(_State):
    n_qubits = 2


class ThreeQubitState(_State):
    n_qubits = 3


State = Union[TwoQubitState, ThreeQubitState]


@dataclass(frozen=True, eq=False)
class BlochDecomposition:
    """Local Bloch vectors ``r`` (Alice), ``s`` (Bob) and correlation matrix ``T``."""

    r: np.ndarray
    s: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        for name, shape in (("r", (3,)), ("s", (3,)), ("T", (3, 3))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("r", "s"):
            norm = float(np.linalg.norm(getattr(self, name)))
            if norm > 1.0 + BLOCH_SLACK:
                raise ValueError(f"|{name}| = {norm:.12g} exceeds 1")
        tmax = float(np.max(np.abs(self.T)))
        if tmax > 1.0 + BLOCH_SLACK:
            raise ValueError(f"correlation entry of magnitude {tmax:.12g} exceeds 1")


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    count: int
    seed: int

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        if int(self.count) < 1:
            raise ValueError("count must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def n_qubits(self) -> int:
        return int(self.kind[-2])


def validate(matrix, tol: float = STATE_TOL, repair: bool = False) -> State:
    """Check that ``matrix`` is a 2- or 3-qubit density matrix and wrap it.

    With ``repair=True`` negative eigenvalues are clipped to zero (and the
    result renormalised) instead of raising; Hermiticity and trace are never
    repaired.
    """
    try:
        m = as_matrix(matrix)
    except LinalgError as exc:
        raise StateValidationError("dimension", float("nan"), str(exc)) from exc
    dim = m.shape[0]
    if dim not in (4, 8):
        raise StateValidationError("dimension", dim, f"expected dimension 4 or 8, got {dim}")

    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > tol:
        raise StateValidationError("hermitian", asym, f"not Hermitian: max |rho - rho^dagger| = {asym:.3e}")
    tr_err = abs(np.trace(m) - 1.0)
    if tr_err > tol:
        raise StateValidationError("trace", tr_err, f"trace differs from 1 by {tr_err:.3e}")

    w, v = hermitian_eigensystem(m, tol)
    if w[-1] < -tol:
        if not repair:
            raise StateValidationError(
                "positive_semidefinite", -w[-1], f"negative eigenvalue {w[-1]:.3e}"
            )
        w = np.clip(w, 0.0, None)
        m = (v * w) @ v.conj().T
        m = m / np.trace(m).real
    m = 0.5 * (m + m.conj().T)
    return TwoQubitState(m) if dim == 4 else ThreeQubitState(m)


def _local_ops():
    alice = [kron(p, I2) for p in PAULIS]
    bob = [kron(I2, p) for p in PAULIS]
    joint = [[kron(pa, pb) for pb in PAULIS] for pa in PAULIS]
    return alice, bob, joint


_ALICE_OPS, _BOB_OPS, _JOINT_OPS = _local_ops()


def decompose(state: TwoQubitState) -> BlochDecomposition:
    rho = state.matrix

    def expect(op):
        val = np.trace(rho @ op)
        if abs(val.imag) > STATE_TOL:
            raise StateValidationError("hermitian", abs(val.imag), "Pauli expectation has an imaginary part")
        return val.real

    r = [expect(op) for op in _ALICE_OPS]
    s = [expect(op) for op in _BOB_OPS]
    T = [[expect(op) for op in row] for row in _JOINT_OPS]
    return BlochDecomposition(r, s, T)


def bloch_matrix(d: BlochDecomposition) -> np.ndarray:
    """The (unvalidated) operator built from a Bloch decomposition."""
    rho = np.eye(4, dtype=complex)
    for i in range(3):
        rho = rho + d.r[i] * _ALICE_OPS[i] + d.s[i] * _BOB_OPS[i]
        for j in range(3):
            rho = rho + d.T[i, j] * _JOINT_OPS[i][j]
    return rho / 4.0


def compose(d: BlochDecomposition, tol: float = STATE_TOL) -> TwoQubitState:
    return validate(bloch_matrix(d), tol)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def _ket(*amplitudes: tuple[str, complex]) -> np.ndarray:
    n = len(amplitudes[0][0])
    psi = np.zeros(2**n, dtype=complex)
    for bits, amp in amplitudes:
        psi[int(bits, 2)] = amp
    return psi


_H = 1 / np.sqrt(2)
_T = 1 / np.sqrt(3)
NAMED_KETS = {
    "bell_phi_plus": _ket(("00", _H), ("11", _H)),
    "bell_phi_minus": _ket(("00", _H), ("11", -_H)),
    "bell_psi_plus": _ket(("01", _H), ("10", _H)),
    "bell_psi_minus": _ket(("01", _H), ("10", -_H)),
    "ghz": _ket(("000", _H), ("111", _H)),
    "w": _ket(("001", _T), ("010", _T), ("100", _T)),
}


def named_state(name: str) -> State:
    try:
        psi = NAMED_KETS[name]
    except KeyError:
        raise ValueError(f"unknown state {name!r}; expected one of {sorted(NAMED_KETS)}") from None
    return validate(np.outer(psi, psi.conj()))


def werner(p: float) -> TwoQubitState:
    """p |Phi+><Phi+| + (1 - p) I/4."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight must lie in [0, 1], got {p}")
    phi = NAMED_KETS["bell_phi_plus"]
    return validate(p * np.outer(phi, phi.conj()) + (1 - p) * np.eye(4) / 4)


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for stream ``index`` of the master ``seed``.

    Stream k is the k-th child of ``SeedSequence(seed)`` (same as
    ``SeedSequence(seed).spawn(k + 1)[k]``), so any sample can be regenerated
    on its own, in any order.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sample_state(kind: str, seed: int, index: int) -> State:
    """Draw sample ``index`` of the ensemble ``kind`` with master ``seed``."""
    if kind not in ENSEMBLE_KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    dim = 2 ** int(kind[-2])
    rng = substream(seed, index)
    if kind.startswith("haar_pure"):
        rho = projector(_complex_gaussian(rng, dim))
    else:
        g = _complex_gaussian(rng, (dim, dim))
        rho = g @ g.conj().T
        rho = rho / np.trace(rho).real
    return validate(rho)


def iter_ensemble(spec: EnsembleSpec) -> Iterator[State]:
    for k in range(spec.count):
        yield sample_state(spec.kind, spec.seed, k)


def sample_ensemble(spec: EnsembleSpec) -> list[State]:
    return list(iter_ensemble(spec))


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix with phase fix."""
    q, r = np.linalg.qr(_complex_gaussian(rng, (dim, dim)))
    d = np.diag(r)
    return q * (d / np.abs(d))
