"""CFFW steering functional, closed-form criterion and optimal settings.

Direction ``BtoA`` means Bob steers Alice: Alice (the steered party) uses two
orthogonal Bloch directions ``a_hat, a_prime_hat`` while Bob's two directions
are free. ``AtoB`` swaps the roles.

Internally both directions reduce to one kernel. With ``K = T`` for BtoA and
``K = T^t`` for AtoB, every correlator reads ``<X (x) Y> = x . K y`` where
``x`` is a steered-party direction and ``y`` a steering-party direction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .matcore import sym3_eigensystem
from .states import BlochDecomposition, TwoQubitState, decompose

UNIT_TOL = 1e-9
# below this norm a steering eigen-direction carries no correlation
_NULL_NORM = 1e-12

X_HAT = np.array([1.0, 0.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])


class Direction(str, enum.Enum):
    BtoA = "BtoA"
    AtoB = "AtoB"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, cls):
            return value
        for member in cls:
            if str(value).lower() == member.value.lower():
                return member
        raise ValueError(f"unknown steering direction {value!r}; use 'btoa' or 'atob'")


def _unit(v, name: str) -> np.ndarray:
    v = np.array(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be a finite 3-vector")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} is not a unit vector (norm {norm:.12g})")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class MeasurementConfiguration:
    """Four Bloch directions: Alice's ``a_hat, a_prime_hat`` and Bob's ``b_hat, b_prime_hat``.

    All four must be unit vectors. Orthogonality is required only of the
    steered party's pair, which depends on the direction; see :meth:`check`.
    """

    a_hat: np.ndarray
    a_prime_hat: np.ndarray
    b_hat: np.ndarray
    b_prime_hat: np.ndarray

    def __post_init__(self):
        for name in ("a_hat", "a_prime_hat", "b_hat", "b_prime_hat"):
            object.__setattr__(self, name, _unit(getattr(self, name), name))

    def steered_pair(self, direction: Direction) -> tuple[np.ndarray, np.ndarray]:
        if Direction.parse(direction) is Direction.BtoA:
            return self.a_hat, self.a_prime_hat
        return self.b_hat, self.b_prime_hat

    def steering_pair(self, direction: Direction) -> tuple[np.ndarray, np.ndarray]:
        if Direction.parse(direction) is Direction.BtoA:
            return self.b_hat, self.b_prime_hat
        return self.a_hat, self.a_prime_hat

    def check(self, direction: Direction) -> None:
        """Raise ``ValueError`` unless the steered pair is orthogonal."""
        x, x_prime = self.steered_pair(direction)
        overlap = float(np.dot(x, x_prime))
        if abs(overlap) > UNIT_TOL:
            raise ValueError(
                f"steered settings for {Direction.parse(direction).value} must be orthogonal "
                f"(dot product {overlap:.3e})"
            )

    @classmethod
    def from_roles(cls, direction, steered, steering) -> "MeasurementConfiguration":
        if Direction.parse(direction) is Direction.BtoA:
            return cls(*steered, *steering)
        return cls(*steering, *steered)

    def as_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("a_hat", "a_prime_hat", "b_hat", "b_prime_hat")}


@dataclass(frozen=True, eq=False)
class CffwFrame:
    """Orthonormal pair with ``y + y' = 2 cos(theta) c`` and ``y - y' = 2 sin(theta) c'``."""

    c_hat: np.ndarray
    c_prime_hat: np.ndarray
    theta: float

    def __post_init__(self):
        _unit(self.c_hat, "c_hat")
        _unit(self.c_prime_hat, "c_prime_hat")
        if abs(float(np.dot(self.c_hat, self.c_prime_hat))) > UNIT_TOL:
            raise ValueError("c_hat and c_prime_hat must be orthogonal")
        if not -UNIT_TOL <= self.theta <= math.pi / 2 + UNIT_TOL:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    def settings(self) -> tuple[np.ndarray, np.ndarray]:
        c, s = math.cos(self.theta), math.sin(self.theta)
        y = c * self.c_hat + s * self.c_prime_hat
        y_prime = c * self.c_hat - s * self.c_prime_hat
        return y / np.linalg.norm(y), y_prime / np.linalg.norm(y_prime)


@dataclass(frozen=True)
class SteeringCriterionResult:
    v: float
    v_tilde: float
    s_rho: float
    max_cffw: float
    violates: bool


def _decomposition(state) -> BlochDecomposition:
    if isinstance(state, BlochDecomposition):
        return state
    if isinstance(state, TwoQubitState):
        return decompose(state)
    raise TypeError(f"expected a TwoQubitState or BlochDecomposition, got {type(state).__name__}")


def _kernel(d: BlochDecomposition, direction: Direction) -> np.ndarray:
    return d.T if Direction.parse(direction) is Direction.BtoA else d.T.T


def correlation_expectation(d: BlochDecomposition, u_hat, w_hat) -> float:
    """``<(u.sigma) (x) (w.sigma)>`` with ``u_hat`` on Alice and ``w_hat`` on Bob."""
    return float(np.asarray(u_hat) @ d.T @ np.asarray(w_hat))


def cffw_value(state, config: MeasurementConfiguration, direction=Direction.BtoA) -> float:
    """Left-hand side of the CFFW inequality for the given settings.

    ``state`` may be a :class:`TwoQubitState` or its :class:`BlochDecomposition`.
    Each correlator is expanded by linearity, e.g.
    ``<(B + B') A> = <A B> + <A B'>``.
    """
    direction = Direction.parse(direction)
    config.check(direction)
    d = _decomposition(state)
    x, x_prime = config.steered_pair(direction)
    y, y_prime = config.steering_pair(direction)

    if direction is Direction.BtoA:
        def corr(steered, steering):
            return correlation_expectation(d, steered, steering)
    else:
        def corr(steered, steering):
            return correlation_expectation(d, steering, steered)

    plus = math.hypot(corr(x, y) + corr(x, y_prime), corr(x_prime, y) + corr(x_prime, y_prime))
    minus = math.hypot(corr(x, y) - corr(x, y_prime), corr(x_prime, y) - corr(x_prime, y_prime))
    return plus + minus


def correlation_spectrum(state) -> np.ndarray:
    """Descending eigenvalues of ``V = T T^t``, clipped at zero."""
    d = _decomposition(state)
    w, _ = sym3_eigensystem(d.T @ d.T.T)
    return np.clip(w, 0.0, None)


def steering_criterion(state) -> SteeringCriterionResult:
    w = correlation_spectrum(state)
    v, v_tilde = float(w[0]), float(w[1])
    s_rho = math.sqrt(v + v_tilde)
    return SteeringCriterionResult(v, v_tilde, s_rho, 2.0 * s_rho, s_rho > 1.0)


def horodecki_M(state) -> float:
    """Horodecki CHSH function: sum of the two largest eigenvalues of ``T T^t``."""
    w = correlation_spectrum(state)
    return float(w[0] + w[1])


def _orthogonal_to(u: np.ndarray) -> np.ndarray:
    # cross with the coordinate axis least aligned with u
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(u)))] = 1.0
    w = np.cross(u, axis)
    return w / np.linalg.norm(w)


def optimal_measurements(state, direction=Direction.BtoA) -> tuple[MeasurementConfiguration, CffwFrame]:
    """Settings attaining ``2 sqrt(v + v_tilde)`` for the chosen direction.

    The steering party's frame ``c, c'`` spans the top two eigenvectors of
    ``K^t K``; the steered party measures along ``K c`` and ``K c'`` (these
    are orthogonal because ``c, c'`` are eigenvectors), and the mixing angle
    is ``theta = atan2(|K c'|, |K c|)``.
    """
    direction = Direction.parse(direction)
    d = _decomposition(state)
    k = _kernel(d, direction)
    _, vecs = sym3_eigensystem(k.T @ k)
    c, c_prime = vecs[:, 0], vecs[:, 1]
    kc, kc_prime = k @ c, k @ c_prime
    n1, n2 = float(np.linalg.norm(kc)), float(np.linalg.norm(kc_prime))

    if n1 <= _NULL_NORM:
        # T == 0: nothing to gain, fixed canonical answer
        frame = CffwFrame(Z_HAT, X_HAT, 0.0)
        steered = (X_HAT, Z_HAT)
        steering = (Z_HAT, Z_HAT)
        return MeasurementConfiguration.from_roles(direction, steered, steering), frame

    x = kc / n1
    if n2 <= _NULL_NORM:
        theta = 0.0
        x_prime = _orthogonal_to(x)
    else:
        theta = math.atan2(n2, n1)
        # re-orthogonalise: K c' is orthogonal to K c only up to rounding
        x_prime = kc_prime - np.dot(kc_prime, x) * x
        x_prime = x_prime / np.linalg.norm(x_prime)
    frame = CffwFrame(c, c_prime, theta)
    config = MeasurementConfiguration.from_roles(direction, (x, x_prime), frame.settings())
    return config, frame


def is_two_way_symmetric(state, tol: float = 1e-9) -> bool:
    d = _decomposition(state)
    values = []
    for direction in Direction:
        config, _ = optimal_measurements(d, direction)
        values.append(cffw_value(d, config, direction))
    return abs(values[0] - values[1]) <= tol
