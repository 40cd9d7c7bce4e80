"""Interpolating dynamics between wave-like and classical transport regimes.

The state is a density/phase pair (rho, S) on a 1-D periodic grid.  The
continuum system is the continuity equation coupled to a Hamilton-Jacobi
equation whose curvature pressure term Q = -(hbar^2/2m) lap(sqrt(rho))/sqrt(rho)
enters scaled by lambda in [0, 1]: lambda = 1 is standard unitary wave
mechanics, lambda = 0 the classical pair.

Rather than integrating (rho, S) directly, each step evolves the complex
field psi = sqrt(rho) exp(iS/hbar) by Strang splitting with the effective
potential V + (lambda - 1) Q[|psi|^2].  This is algebraically the same
system, is unconditionally norm-conserving, reduces exactly to the linear
split-step solver at lambda = 1, and the potential substep sees the
midpoint density automatically (|psi| is invariant under a pure phase
rotation), keeping the scheme second order.

The diffusion scale sigma ties to hbar through hbar = mass * sigma, and the
default sigma -> lambda map is the clamp of m sigma / hbar to [0, 1]; both
are overridable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DensityCollapse, NonMonotoneMap, StabilityViolation

#: Density floor applied before computing the curvature term Q.
RHO_FLOOR = 1e-14
#: Clamp used when computing fringe visibility, so sub-floor densities read flat.
VISIBILITY_FLOOR = 1e-12
#: Default safety factor in the time-step bound dt <= c * dx^2 * m / hbar.
STABILITY_FACTOR = 0.2


@dataclass(frozen=True)
class Grid:
    """Periodic 1-D grid centered on zero; n_points a power of two >= 64."""

    n_points: int
    length: float

    def __post_init__(self) -> None:
        n = self.n_points
        if n < 64 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 64, got {n}")
        if self.length <= 0:
            raise ValueError("grid length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


@dataclass(frozen=True)
class PhysicalParams:
    """Constants and the sampled external potential for one run."""

    hbar: float
    mass: float
    lam: float
    sigma: float | None
    potential: np.ndarray
    q_method: str = "spectral"
    rho_floor: float = RHO_FLOOR
    stability_factor: float = STABILITY_FACTOR
    collapse_fraction: float = 0.10


def physical_params(
    grid: Grid,
    mass: float = 1.0,
    hbar: float | None = None,
    sigma: float | None = None,
    lam: float = 1.0,
    potential: np.ndarray | None = None,
    q_method: str = "spectral",
    rho_floor: float = RHO_FLOOR,
    stability_factor: float = STABILITY_FACTOR,
    collapse_fraction: float = 0.10,
) -> PhysicalParams:
    """Validated constructor enforcing hbar = mass * sigma when both appear."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    if sigma is not None and sigma < 0:
        raise ValueError("sigma must be >= 0")
    if hbar is None:
        hbar = mass * sigma if sigma is not None else 1.0
    elif sigma is not None and abs(hbar - mass * sigma) > 1e-12 * max(1.0, abs(hbar)):
        raise ValueError(
            f"hbar={hbar} conflicts with mass*sigma={mass * sigma}; they must agree"
        )
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if q_method not in ("spectral", "fd"):
        raise ValueError(f"unknown q_method {q_method!r}")
    if potential is None:
        potential = np.zeros(grid.n_points)
    else:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (grid.n_points,):
            raise ValueError("potential must be sampled on the grid")
    return PhysicalParams(
        hbar, mass, lam, sigma, potential, q_method, rho_floor, stability_factor,
        collapse_fraction,
    )


@dataclass(frozen=True)
class LambdaState:
    """Density and phase on the grid at one instant."""

    rho: np.ndarray
    s: np.ndarray
    time: float = 0.0


def normalize_density(rho: np.ndarray, grid: Grid) -> np.ndarray:
    rho = np.clip(np.asarray(rho, dtype=float), 0.0, None)
    total = rho.sum() * grid.dx
    if total <= 0:
        raise ValueError("density must have positive mass")
    return rho / total


# ---------------------------------------------------------------------------
# Polar form.


def polar_decompose(rho: np.ndarray, s: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Complex field sqrt(rho) * exp(i S / hbar)."""
    return np.sqrt(np.clip(rho, 0.0, None)) * np.exp(1j * np.asarray(s) / params.hbar)


def polar_compose(psi: np.ndarray, params: PhysicalParams) -> tuple[np.ndarray, np.ndarray]:
    """Recover (rho, S) from the field.

    S is defined modulo 2*pi*hbar; it is unwrapped continuously across cells
    whose density clears the floor and filled by linear interpolation where
    the phase is undefined.
    """
    rho = np.abs(psi) ** 2
    phase = np.angle(psi)
    good = rho > params.rho_floor
    if good.any():
        idx = np.flatnonzero(good)
        unwrapped = np.unwrap(phase[idx])
        phase = np.interp(np.arange(len(psi)), idx, unwrapped)
    return rho, params.hbar * phase


def phase_defined_mask(rho: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Cells where the phase of the polar form is meaningful."""
    return np.asarray(rho) > params.rho_floor


# ---------------------------------------------------------------------------
# Quantum potential.


def quantum_potential(
    rho: np.ndarray,
    grid: Grid,
    params: PhysicalParams,
    method: str | None = None,
) -> np.ndarray:
    """Q = -(hbar^2 / 2m) * lap(sqrt(rho)) / sqrt(rho), regularized at nodes.

    ``method`` is "spectral" (default via params) or "fd" (centered second
    differences, second order).  The density floor keeps the quotient finite
    where rho vanishes; there Q decays to zero on flat stretches.
    """
    method = method or params.q_method
    rho = np.asarray(rho, dtype=float)
    # Additive regularization: a hard max(rho, floor) clamp puts a kink in
    # sqrt(rho) and a step in the effective potential right at the floor
    # boundary, which pumps amplitude into the sub-floor region; sqrt(rho +
    # floor) is smooth, agrees with sqrt(rho) to O(floor/rho) in the bulk,
    # and sends Q to zero in flat sub-floor regions.
    sq = np.sqrt(np.clip(rho, 0.0, None) + params.rho_floor)
    if method == "spectral":
        lap = np.fft.ifft(-(grid.k**2) * np.fft.fft(sq)).real
    elif method == "fd":
        lap = (np.roll(sq, -1) - 2.0 * sq + np.roll(sq, 1)) / grid.dx**2
    else:
        raise ValueError(f"unknown method {method!r}")
    return -(params.hbar**2 / (2.0 * params.mass)) * lap / sq


# ---------------------------------------------------------------------------
# Time stepping.


def _advance_field(psi: np.ndarray, dt: float, params: PhysicalParams, grid: Grid) -> np.ndarray:
    kinetic_half = np.exp(-1j * params.hbar * grid.k**2 * dt / (4.0 * params.mass))
    psi = np.fft.ifft(kinetic_half * np.fft.fft(psi))
    v_eff = params.potential
    if params.lam != 1.0:
        q = quantum_potential(np.abs(psi) ** 2, grid, params)
        v_eff = v_eff + (params.lam - 1.0) * q
    psi = psi * np.exp(-1j * v_eff * dt / params.hbar)
    return np.fft.ifft(kinetic_half * np.fft.fft(psi))


def check_timestep(dt: float, grid: Grid, params: PhysicalParams) -> None:
    bound = params.stability_factor * grid.dx**2 * params.mass / params.hbar
    if dt > bound:
        raise StabilityViolation(f"dt={dt} exceeds stability bound {bound:.3e}")


def _coarse_subfloor(rho: np.ndarray, floor: float) -> float:
    # 5-cell periodic box filter: isolated fringe minima disappear, genuine
    # voids survive, so the collapse guard does not trip on interference.
    kernel = np.full(5, 0.2)
    padded = np.concatenate([rho[-2:], rho, rho[:2]])
    return float(np.mean(np.convolve(padded, kernel, mode="valid") <= floor))


def _collapse_guard(baseline: float, rho: np.ndarray, floor: float, fraction: float) -> None:
    # Collapse means voids growing beyond what the reference state already
    # had; interference minima oscillating through the floor do not count.
    newly = _coarse_subfloor(rho, floor) - baseline
    if newly > fraction:
        raise DensityCollapse(
            f"density floor newly activated over {newly:.0%} of the grid"
        )


def _check_state(state: LambdaState, grid: Grid) -> None:
    total = float(np.asarray(state.rho).sum() * grid.dx)
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"state density integrates to {total!r}, not 1")
    if np.any(np.asarray(state.rho) < 0):
        raise ValueError("state density must be non-negative")


def step(state: LambdaState, dt: float, params: PhysicalParams, grid: Grid) -> LambdaState:
    """Advance (rho, S) by one dt."""
    check_timestep(dt, grid, params)
    _check_state(state, grid)
    psi = polar_decompose(state.rho, state.s, params)
    baseline = _coarse_subfloor(state.rho, params.rho_floor)
    psi = _advance_field(psi, dt, params, grid)
    rho, s = polar_compose(psi, params)
    _collapse_guard(baseline, rho, params.rho_floor, params.collapse_fraction)
    return LambdaState(rho, s, state.time + dt)


@dataclass(frozen=True)
class Observables:
    """Diagnostics recorded along an evolution."""

    time: float
    norm: float
    mean_x: float
    width: float
    visibility: float


def compute_observables(
    rho: np.ndarray,
    grid: Grid,
    time: float = 0.0,
    window: tuple[float, float] | None = None,
    visibility_floor: float = VISIBILITY_FLOOR,
    visibility_rel_floor: float = 0.0,
) -> Observables:
    """Norm, centroid, packet width, and windowed fringe visibility.

    Visibility is (max - min) / (max + min) of the density over the window
    (whole domain when None).  Values are clamped from below at
    ``visibility_floor``, or at ``visibility_rel_floor`` times the global
    density maximum if that is larger, so structure too faint to resolve
    reads as flat.
    """
    x = grid.x
    norm = float(rho.sum() * grid.dx)
    mean = float((x * rho).sum() * grid.dx / norm)
    var = float(((x - mean) ** 2 * rho).sum() * grid.dx / norm)
    width = float(np.sqrt(max(var, 0.0)))
    if window is None:
        sel = np.ones_like(rho, dtype=bool)
    else:
        lo, hi = window
        sel = (x >= lo) & (x <= hi)
        if not sel.any():
            raise ValueError(f"visibility window {window} contains no grid points")
    clamp = max(visibility_floor, visibility_rel_floor * float(rho.max()))
    clamped = np.maximum(rho[sel], clamp)
    hi_v, lo_v = float(clamped.max()), float(clamped.min())
    visibility = (hi_v - lo_v) / (hi_v + lo_v)
    return Observables(time, norm, mean, width, visibility)


def evolve(
    initial: LambdaState,
    params: PhysicalParams,
    grid: Grid,
    t_final: float,
    dt: float,
    record_every: int = 1,
    window: tuple[float, float] | None = None,
    visibility_floor: float = VISIBILITY_FLOOR,
    visibility_rel_floor: float = 0.0,
    collect_frames: bool = False,
) -> tuple[list[Observables], list[np.ndarray]]:
    """Run round(t_final / dt) steps, recording observables periodically.

    The field is kept in complex form across steps (no per-step polar
    round-trip), so runs are deterministic given inputs.  Returns the
    records and, when ``collect_frames``, the density frames alongside.
    """
    check_timestep(dt, grid, params)
    _check_state(initial, grid)
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_steps = int(round(t_final / dt))
    psi = polar_decompose(initial.rho, initial.s, params)
    rho = np.abs(psi) ** 2
    records = [
        compute_observables(
            rho, grid, initial.time, window, visibility_floor, visibility_rel_floor
        )
    ]
    frames = [rho.copy()] if collect_frames else []
    baseline = _coarse_subfloor(rho, params.rho_floor)
    for i in range(1, n_steps + 1):
        psi = _advance_field(psi, dt, params, grid)
        rho = np.abs(psi) ** 2
        _collapse_guard(baseline, rho, params.rho_floor, params.collapse_fraction)
        if i % record_every == 0 or i == n_steps:
            records.append(
                compute_observables(
                    rho,
                    grid,
                    initial.time + i * dt,
                    window,
                    visibility_floor,
                    visibility_rel_floor,
                )
            )
            if collect_frames:
                frames.append(rho.copy())
    return records, frames


def energy(state: LambdaState, params: PhysicalParams, grid: Grid) -> float:
    """Mean of kinetic plus external potential energy (diagnostic only)."""
    psi = polar_decompose(state.rho, state.s, params)
    psi_k = np.fft.fft(psi)
    kinetic = (
        params.hbar**2
        / (2.0 * params.mass)
        * np.sum(grid.k**2 * np.abs(psi_k) ** 2)
        / len(psi)
        * grid.dx
    )
    potential = np.sum(params.potential * state.rho) * grid.dx
    return float(kinetic + potential)


# ---------------------------------------------------------------------------
# Initial data and potentials.


def gaussian_density(grid: Grid, mu: float, sigma0: float) -> np.ndarray:
    if sigma0 <= 0:
        raise ValueError("packet width must be positive")
    rho = np.exp(-((grid.x - mu) ** 2) / (2.0 * sigma0**2))
    return normalize_density(rho, grid)


def gaussian_state(
    grid: Grid, params: PhysicalParams, mu: float, sigma0: float, momentum: float = 0.0
) -> LambdaState:
    """Gaussian packet of width sigma0 at mu, with uniform momentum."""
    rho = gaussian_density(grid, mu, sigma0)
    return LambdaState(rho, momentum * grid.x, 0.0)


def two_gaussian_state(
    grid: Grid,
    params: PhysicalParams,
    separation: float,
    sigma0: float,
    momentum: float = 0.0,
) -> LambdaState:
    """Two packets at +-separation/2; momenta (if any) point at each other."""
    if sigma0 <= 0:
        raise ValueError("packet width must be positive")
    x = grid.x
    a = separation / 2.0
    left = np.exp(-((x + a) ** 2) / (4.0 * sigma0**2)) * np.exp(1j * momentum * x / params.hbar)
    right = np.exp(-((x - a) ** 2) / (4.0 * sigma0**2)) * np.exp(-1j * momentum * x / params.hbar)
    psi = left + right
    rho = np.abs(psi) ** 2
    rho /= rho.sum() * grid.dx
    psi = psi / np.sqrt((np.abs(psi) ** 2).sum() * grid.dx)
    _, s = polar_compose(psi, params)
    return LambdaState(rho, s, 0.0)


def harmonic_potential(grid: Grid, k: float) -> np.ndarray:
    return 0.5 * k * grid.x**2


# ---------------------------------------------------------------------------
# sigma -> lambda maps.


def lambda_from_sigma(
    sigma: float,
    params: PhysicalParams,
    map_spec: Sequence[tuple[float, float]] | None = None,
) -> float:
    """Strength of the curvature term as a function of the diffusion scale.

    The default map is clamp(mass * sigma / hbar, 0, 1): sigma = hbar/mass
    is the fully wave-like regime, sigma = 0 the classical one.  A custom
    map is a monotone piecewise-linear table of (sigma, lambda) pairs,
    clamped to its end values outside the table range.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if map_spec is None:
        return min(max(params.mass * sigma / params.hbar, 0.0), 1.0)
    points = [(float(s), float(l)) for s, l in map_spec]
    if len(points) < 2:
        raise NonMonotoneMap("a lambda map needs at least two points")
    sigmas = [p[0] for p in points]
    lams = [p[1] for p in points]
    if any(b <= a for a, b in zip(sigmas, sigmas[1:])):
        raise NonMonotoneMap("map sigmas must be strictly increasing")
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise NonMonotoneMap("map lambdas must be non-decreasing")
    if lams[0] < 0.0 or lams[-1] > 1.0:
        raise NonMonotoneMap("map lambdas must lie in [0, 1]")
    return float(np.interp(sigma, sigmas, lams))
