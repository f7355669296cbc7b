"""Derivative-free numerical maximisation of the CFFW functional.

This is an oracle for the closed form in :mod:`steerscope.steering`: it only
evaluates the raw functional on measurement settings and never touches the
spectrum of ``T T^t``.

Search space is a 7-angle chart. The steered party's orthogonal pair is
``x = n(theta, phi)`` and ``x' = cos(psi) e_theta + sin(psi) e_phi`` (the two
tangent vectors at ``x``), so orthogonality holds by construction; the
steering party's two directions are free sphere points.
"""

from __future__ import annotations

import math
from operator import sub
from dataclasses import dataclass

import numpy as np

from .states import BlochDecomposition, TwoQubitState, decompose, substream
from .steering import Direction, MeasurementConfiguration, cffw_value

N_ANGLES = 7
INITIAL_STEP = 0.3


@dataclass(frozen=True)
class OptimizationSettings:
    restarts: int = 24
    max_iterations: int = 2000
    tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class AngleParametrization:
    """Chart point: steering directions ``(theta_y, phi_y)``, ``(theta_y2, phi_y2)``;
    steered direction ``(theta_x, phi_x)`` and in-plane rotation ``psi_x``."""

    theta_y: float
    phi_y: float
    theta_y2: float
    phi_y2: float
    theta_x: float
    phi_x: float
    psi_x: float

    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(x, x', y, y'): steered pair then steering pair."""
        y = _sphere(self.theta_y, self.phi_y)
        y2 = _sphere(self.theta_y2, self.phi_y2)
        x, x2 = _steered_pair(self.theta_x, self.phi_x, self.psi_x)
        return x, x2, y, y2

    def configuration(self, direction) -> MeasurementConfiguration:
        x, x2, y, y2 = self.vectors()
        return MeasurementConfiguration.from_roles(direction, (x, x2), (y, y2))


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    config: MeasurementConfiguration
    converged: bool
    restart_values: tuple[float, ...]

    def __iter__(self):
        # allows ``value, config = maximize_cffw_numeric(...)``
        return iter((self.value, self.config))


def _sphere(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def _steered_pair(theta: float, phi: float, psi: float) -> tuple[np.ndarray, np.ndarray]:
    st, ct, sp, cp = math.sin(theta), math.cos(theta), math.sin(phi), math.cos(phi)
    x = np.array([st * cp, st * sp, ct])
    e_theta = np.array([ct * cp, ct * sp, -st])
    e_phi = np.array([-sp, cp, 0.0])
    return x, math.cos(psi) * e_theta + math.sin(psi) * e_phi


def _kernel(state, direction: Direction) -> tuple[float, ...]:
    d = state if isinstance(state, BlochDecomposition) else decompose(state)
    k = d.T if direction is Direction.BtoA else d.T.T
    return tuple(float(t) for t in k.ravel())


def _objective(k: tuple[float, ...]):
    """Raw CFFW value on the chart, written out in scalar arithmetic for speed.

    Correlators are ``x . K y``; the two square roots take the sums and
    differences of the steering directions.
    """
    k00, k01, k02, k10, k11, k12, k20, k21, k22 = k
    sin, cos, hypot = math.sin, math.cos, math.hypot

    def f(angles) -> float:
        ty, py, ty2, py2, tx, px, psi = angles
        s = sin(ty)
        y0, y1, y2 = s * cos(py), s * sin(py), cos(ty)
        s = sin(ty2)
        z0, z1, z2 = s * cos(py2), s * sin(py2), cos(ty2)
        st, ct, sp, cp = sin(tx), cos(tx), sin(px), cos(px)
        cs, ss = cos(psi), sin(psi)
        x0, x1, x2 = st * cp, st * sp, ct
        w0, w1, w2 = cs * ct * cp - ss * sp, cs * ct * sp + ss * cp, -cs * st

        u0, u1, u2 = y0 + z0, y1 + z1, y2 + z2
        ku0 = k00 * u0 + k01 * u1 + k02 * u2
        ku1 = k10 * u0 + k11 * u1 + k12 * u2
        ku2 = k20 * u0 + k21 * u1 + k22 * u2
        u0, u1, u2 = y0 - z0, y1 - z1, y2 - z2
        kv0 = k00 * u0 + k01 * u1 + k02 * u2
        kv1 = k10 * u0 + k11 * u1 + k12 * u2
        kv2 = k20 * u0 + k21 * u1 + k22 * u2
        return hypot(x0 * ku0 + x1 * ku1 + x2 * ku2, w0 * ku0 + w1 * ku1 + w2 * ku2) + hypot(
            x0 * kv0 + x1 * kv1 + x2 * kv2, w0 * kv0 + w1 * kv1 + w2 * kv2
        )

    return f


def nelder_mead_max(f, x0, step: float, tolerance: float, max_iterations: int):
    """Maximise ``f`` from ``x0`` with the standard Nelder-Mead simplex.

    Coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
    Stops when the simplex diameter (max vertex distance from the best
    vertex) drops below ``tolerance`` or after ``max_iterations``.
    Returns ``(best_point, best_value, converged)``.
    """
    n = len(x0)
    simplex = [list(x0)]
    for i in range(n):
        v = list(x0)
        v[i] += step
        simplex.append(v)
    values = [f(v) for v in simplex]

    for _ in range(max_iterations):
        order = sorted(range(n + 1), key=values.__getitem__, reverse=True)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        best = simplex[0]
        diameter = max([max(map(abs, map(sub, v, best))) for v in simplex[1:]])
        if diameter < tolerance:
            return best, values[0], True

        centroid = [sum(col) / n for col in zip(*simplex[:-1])]
        worst = simplex[-1]
        reflected = [c + (c - w) for c, w in zip(centroid, worst)]
        f_r = f(reflected)
        if f_r > values[0]:
            expanded = [c + 2.0 * (c - w) for c, w in zip(centroid, worst)]
            f_e = f(expanded)
            if f_e > f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        elif f_r > values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        else:
            if f_r > values[-1]:
                contracted = [c + 0.5 * (r - c) for c, r in zip(centroid, reflected)]
            else:
                contracted = [c + 0.5 * (w - c) for c, w in zip(centroid, worst)]
            f_c = f(contracted)
            if f_c > max(f_r, values[-1]):
                simplex[-1], values[-1] = contracted, f_c
            else:
                simplex = [best] + [[b + 0.5 * (v_i - b) for b, v_i in zip(best, v)] for v in simplex[1:]]
                values = [values[0]] + [f(v) for v in simplex[1:]]

    i = max(range(n + 1), key=values.__getitem__)
    return simplex[i], values[i], False


def restart_points(settings: OptimizationSettings, count: int | None = None) -> np.ndarray:
    """Starting chart points; restart ``j`` is drawn from substream ``j`` of the seed."""
    count = settings.restarts if count is None else count
    scale = np.array([math.pi, 2 * math.pi] * 3 + [2 * math.pi])
    return np.array([substream(settings.seed, j).random(N_ANGLES) * scale for j in range(count)])


def maximize_cffw_numeric(
    state, direction=Direction.BtoA, settings: OptimizationSettings | None = None
) -> OptimizationResult:
    """Multi-start Nelder-Mead maximum of the CFFW functional.

    The reported value is re-evaluated with :func:`cffw_value` at the returned
    settings, so it is exactly the functional at a valid configuration.
    """
    settings = settings or OptimizationSettings()
    direction = Direction.parse(direction)
    d = state if isinstance(state, BlochDecomposition) else decompose(state)
    f = _objective(_kernel(d, direction))

    best_point, best_value, all_converged = None, -math.inf, True
    per_restart = []
    for x0 in restart_points(settings):
        point, value, converged = nelder_mead_max(
            f, x0.tolist(), INITIAL_STEP, settings.tolerance, settings.max_iterations
        )
        per_restart.append(value)
        all_converged &= converged
        if value > best_value:
            best_point, best_value = point, value

    config = AngleParametrization(*best_point).configuration(direction)
    value = cffw_value(d, config, direction)
    return OptimizationResult(value, config, all_converged, tuple(per_restart))


def _batch_values(k: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Vectorised CFFW functional for an ``(m, 7)`` array of chart points."""
    ty, py, ty2, py2, tx, px, psi = angles.T

    def sphere(t, p):
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=1)

    y, y2, x = sphere(ty, py), sphere(ty2, py2), sphere(tx, px)
    e_theta = np.stack([np.cos(tx) * np.cos(px), np.cos(tx) * np.sin(px), -np.sin(tx)], axis=1)
    e_phi = np.stack([-np.sin(px), np.cos(px), np.zeros_like(px)], axis=1)
    x2 = np.cos(psi)[:, None] * e_theta + np.sin(psi)[:, None] * e_phi
    ku = (y + y2) @ k.T
    kv = (y - y2) @ k.T
    plus = np.hypot(np.sum(x * ku, axis=1), np.sum(x2 * ku, axis=1))
    minus = np.hypot(np.sum(x * kv, axis=1), np.sum(x2 * kv, axis=1))
    return plus + minus


# polar angles sweep [0, pi], azimuths and psi sweep [0, 2 pi)
_PERIODS = np.array([math.pi, 2 * math.pi] * 3 + [2 * math.pi])
_POLAR = np.array([True, False] * 3 + [False])
_COARSE_POINTS = 5
_LOCAL_POINTS = 3
_CHUNK = 1 << 15


def _best_on_grid(k: np.ndarray, axes: list[np.ndarray]) -> tuple[float, np.ndarray]:
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N_ANGLES)
    best_value, best_point = -math.inf, mesh[0]
    for start in range(0, len(mesh), _CHUNK):
        chunk = mesh[start : start + _CHUNK]
        vals = _batch_values(k, chunk)
        i = int(np.argmax(vals))
        if vals[i] > best_value:
            best_value, best_point = float(vals[i]), chunk[i]
    return best_value, best_point


def grid_refine(state, direction=Direction.BtoA, resolution: int = 32) -> float:
    """Exhaustive grid sweep with local zooming; a lower bound on the maximum.

    A 7-d lattice at full ``resolution`` per axis is far too large, so the
    sweep starts from a coarse regular lattice over the whole chart and then
    repeatedly lays a 3-point-per-axis lattice around the incumbent, halving
    the box each level, until the lattice spacing is below
    ``pi / resolution**2``. Every evaluated point is an admissible setting,
    so the result never exceeds the true maximum.
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    direction = Direction.parse(direction)
    d = state if isinstance(state, BlochDecomposition) else decompose(state)
    k = d.T if direction is Direction.BtoA else d.T.T

    axes = []
    for period, polar in zip(_PERIODS, _POLAR):
        if polar:
            axes.append(np.linspace(0.0, period, _COARSE_POINTS))
        else:
            axes.append(np.linspace(0.0, period, _COARSE_POINTS, endpoint=False))
    best_value, centre = _best_on_grid(k, axes)

    spacing = _PERIODS / _COARSE_POINTS
    target = math.pi / resolution**2
    while spacing.max() > target:
        axes = [np.linspace(c - h, c + h, _LOCAL_POINTS) for c, h in zip(centre, spacing)]
        value, point = _best_on_grid(k, axes)
        if value > best_value:
            best_value, centre = value, point
        spacing = spacing / 2.0
    return best_value
