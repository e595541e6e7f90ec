"""One-dimensional solvers: forced alpha/beta/gamma family, exact advection,
Kuramoto-Sivashinsky, variable-BC heat (FEM), and the reflecting wave equation.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from ..numkit import fft as nkfft
from .etdrk import BlowUpError, Etdrk2, check_state
from .types import (Boundary, Family, FieldSample, ForcingParams, Grid,
                    KDV_FAMILY, PdeSpec, eval_delta)


def _kdv_coefficients(spec: PdeSpec) -> tuple[float, float, float]:
    c = spec.coefficients
    if spec.family == Family.HEAT_1D:
        return 0.0, float(c["nu"]), 0.0
    return float(c.get("alpha", 0.0)), float(c.get("beta", 0.0)), float(c.get("gamma", 0.0))


def solve_kdv_burgers(spec: PdeSpec, grid: Grid, substeps: int = 10) -> FieldSample:
    """Pseudo-spectral solution of u_t + alpha*u*u_x - beta*u_xx + gamma*u_xxx = delta.

    The linear part is integrated exactly per mode; the advection term is
    handled in conservative form with 2/3-rule dealiasing.  The initial
    condition is the forcing evaluated at t = 0.
    """
    if spec.family not in KDV_FAMILY:
        raise ValueError("spec family is not in the alpha/beta/gamma equation family")
    if spec.bc != Boundary.PERIODIC or not grid.periodic:
        raise ValueError("periodic boundary conditions required")
    has_ic_override = spec.ic is not None and "u0_modes" in spec.ic
    if spec.forcing is None and not has_ic_override:
        raise ValueError("forcing parameters or an explicit initial condition required")
    alpha, beta, gamma = _kdv_coefficients(spec)
    forcing = spec.forcing

    x = grid.x_coords
    n = grid.nx
    k = nkfft.wavenumbers(n, grid.length_x)
    mask = nkfft.dealias_mask(n)
    lin = -beta * k ** 2 + 1j * gamma * k ** 3

    forcing_off = forcing is None or (
        spec.ic is not None and spec.ic.get("forcing_off", False))

    def nonlinear(u_hat: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(u_hat)
        if alpha != 0.0:
            u = np.fft.irfft(u_hat, n=n)
            sq_hat = np.fft.rfft(0.5 * u * u)
            out -= alpha * 1j * k * np.where(mask, sq_hat, 0.0)
        if not forcing_off:
            out += np.fft.rfft(eval_delta(forcing, t, x))
        return out

    if has_ic_override:
        # diagnostic override: explicit initial condition as a sinusoid sum
        series = ForcingParams.from_dict(spec.ic["u0_modes"])
        u0 = eval_delta(series, 0.0, x)
    else:
        u0 = eval_delta(forcing, 0.0, x)

    dt_internal = grid.dt / substeps
    stepper = Etdrk2(lin, nonlinear, dt_internal)
    u_hat = np.fft.rfft(u0)
    values = np.empty(grid.shape)
    values[0] = u0
    step_count = 0
    for i in range(1, grid.nt):
        t = grid.t0 + (i - 1) * grid.dt
        for s in range(substeps):
            u_hat = stepper.step(u_hat, t + s * dt_internal)
            step_count += 1
            check_state(u_hat, step_count)
        values[i] = np.fft.irfft(u_hat, n=n)
    return FieldSample(values, grid, spec)


def solve_advection_1d(spec: PdeSpec, grid: Grid) -> FieldSample:
    """Exact spectral transport: every snapshot is the IC phase-shifted by c*t."""
    if spec.bc != Boundary.PERIODIC or not grid.periodic:
        raise ValueError("periodic boundary conditions required")
    c = float(spec.coefficients["c"])
    series = ForcingParams.from_dict(spec.ic["series"])
    u0 = eval_delta(series, 0.0, grid.x_coords)
    u0_hat = np.fft.rfft(u0)
    values = np.empty(grid.shape)
    for i, t in enumerate(grid.t_coords):
        phases = nkfft.shift_phases(grid.nx, grid.length_x, c * t)
        values[i] = np.fft.irfft(u0_hat * phases, n=grid.nx)
    return FieldSample(values, grid, spec)


def solve_ks(spec: PdeSpec, grid: Grid, substeps: int = 10) -> FieldSample:
    """Stiff pseudo-spectral integration of u_t + u*u_x + nu*u_xx + u_xxxx = 0."""
    if spec.bc != Boundary.PERIODIC or not grid.periodic:
        raise ValueError("periodic boundary conditions required")
    nu = float(spec.coefficients["nu"])
    n = grid.nx
    k = nkfft.wavenumbers(n, grid.length_x)
    mask = nkfft.dealias_mask(n)
    lin = nu * k ** 2 - k ** 4

    def nonlinear(u_hat: np.ndarray, t: float) -> np.ndarray:
        u = np.fft.irfft(u_hat, n=n)
        sq_hat = np.fft.rfft(0.5 * u * u)
        return -1j * k * np.where(mask, sq_hat, 0.0)

    if spec.ic is not None and "series" in spec.ic:
        series = ForcingParams.from_dict(spec.ic["series"])
        u0 = eval_delta(series, 0.0, grid.x_coords)
    else:
        u0 = np.zeros(n)

    dt_internal = grid.dt / substeps
    stepper = Etdrk2(lin, nonlinear, dt_internal)
    u_hat = np.fft.rfft(u0)
    values = np.empty(grid.shape)
    values[0] = u0
    step_count = 0
    for i in range(1, grid.nt):
        t = grid.t0 + (i - 1) * grid.dt
        for s in range(substeps):
            u_hat = stepper.step(u_hat, t + s * dt_internal)
            step_count += 1
            check_state(u_hat, step_count)
        values[i] = np.fft.irfft(u_hat, n=n)
    return FieldSample(values, grid, spec)


# ---------------------------------------------------------------------------
# heat equation with Dirichlet/Neumann boundaries, linear finite elements


def _fem_matrices(n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Banded (3, n) mass and stiffness matrices for P1 elements on a uniform mesh."""
    mass = np.zeros((3, n))
    stiff = np.zeros((3, n))
    mass[1, :] = 4.0 * h / 6.0
    mass[1, 0] = mass[1, -1] = 2.0 * h / 6.0
    mass[0, 1:] = h / 6.0
    mass[2, :-1] = h / 6.0
    stiff[1, :] = 2.0 / h
    stiff[1, 0] = stiff[1, -1] = 1.0 / h
    stiff[0, 1:] = -1.0 / h
    stiff[2, :-1] = -1.0 / h
    return mass, stiff


def _banded_matvec(band: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = band[1] * u
    out[:-1] += band[0, 1:] * u[1:]
    out[1:] += band[2, :-1] * u[:-1]
    return out


def solve_heat_varbc(spec: PdeSpec, grid: Grid, refine: int = 1) -> FieldSample:
    """Implicit-Euler / linear-FEM heat solver with Dirichlet or Neumann ends.

    Zero forcing; the initial condition is the boundary-respecting sinusoid
    series stored in the spec (sines for Dirichlet, cosines for Neumann with
    phases in {0, pi} making the sine series even).
    """
    if spec.bc not in (Boundary.DIRICHLET, Boundary.NEUMANN):
        raise ValueError("variable-BC solver requires Dirichlet or Neumann")
    if grid.periodic:
        raise ValueError("grid must include both endpoints (non-periodic)")
    nu = float(spec.coefficients["nu"])
    n = grid.nx
    h = grid.dx
    x = grid.x_coords
    series = ForcingParams.from_dict(spec.ic["series"])
    if spec.bc == Boundary.DIRICHLET:
        u0 = eval_delta(series, 0.0, x)          # sin series vanishes at both ends
    else:
        u0 = np.zeros(n)
        for j in range(series.n_terms):
            u0 += series.amplitudes[j] * np.cos(
                2.0 * np.pi * series.modes[j] * x / series.length + series.phases[j])

    mass, stiff = _fem_matrices(n, h)
    dt = grid.dt / refine
    system = mass + dt * nu * stiff
    if spec.bc == Boundary.DIRICHLET:
        # pin the end nodes: identity rows, zero coupling
        for band_idx, col in ((1, 0), (1, n - 1)):
            system[band_idx, col] = 1.0
        system[0, 1] = 0.0
        system[2, n - 2] = 0.0
        u0[0] = 0.0
        u0[-1] = 0.0

    values = np.empty(grid.shape)
    values[0] = u0
    u = u0.copy()
    for i in range(1, grid.nt):
        for _ in range(refine):
            rhs = _banded_matvec(mass, u)
            if spec.bc == Boundary.DIRICHLET:
                rhs[0] = 0.0
                rhs[-1] = 0.0
            u = solve_banded((1, 1), system, rhs)
        if not np.all(np.isfinite(u)):
            raise BlowUpError(f"solver blow-up: non-finite state at output step {i}")
        values[i] = u
    return FieldSample(values, grid, spec)


# ---------------------------------------------------------------------------
# wave equation, leapfrog with ghost-point boundaries


class CflError(ValueError):
    """Requested time step violates the explicit stability limit."""


def wave_energy(u_new: np.ndarray, u_old: np.ndarray, dt: float, dx: float, c: float) -> float:
    """Discrete leapfrog energy at the half step between two snapshots."""
    kinetic = 0.5 * dx * np.sum(((u_new - u_old) / dt) ** 2)
    elastic = 0.5 * (c ** 2 / dx) * np.sum(np.diff(u_new) * np.diff(u_old))
    return float(kinetic + elastic)


def solve_wave(spec: PdeSpec, grid: Grid, cfl: float = 0.5,
               substeps: int | None = None, with_energy: bool = False):
    """Leapfrog integration of u_tt = c^2 u_xx with reflecting boundaries.

    Dirichlet ends stay pinned at zero; Neumann ends use mirror ghost points.
    Internal substepping holds the Courant number at ``cfl`` unless an explicit
    substep count is given; a Courant number above 1 refuses to run.
    """
    if spec.bc not in (Boundary.DIRICHLET, Boundary.NEUMANN):
        raise ValueError("wave solver requires Dirichlet or Neumann ends")
    if grid.periodic:
        raise ValueError("grid must include both endpoints (non-periodic)")
    c = float(spec.coefficients.get("c", 2.0))
    dx = grid.dx
    dt_out = grid.dt
    if substeps is None:
        substeps = max(1, int(np.ceil(c * dt_out / (cfl * dx))))
    dt = dt_out / substeps
    courant = c * dt / dx
    if courant > 1.0:
        raise CflError(f"Courant number {courant:.3f} > 1; increase substeps")
    lam2 = courant ** 2

    x = grid.x_coords
    center = float(spec.ic["center"])
    width = float(spec.ic.get("width", 0.8))
    u = np.exp(-((x - center) ** 2) / (2.0 * width ** 2))

    def laplacian(v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
        if spec.bc == Boundary.NEUMANN:
            out[0] = 2.0 * (v[1] - v[0])
            out[-1] = 2.0 * (v[-2] - v[-1])
        else:
            out[0] = 0.0
            out[-1] = 0.0
        return out

    values = np.empty(grid.shape)
    values[0] = u
    # zero initial velocity: Taylor start with half-weighted curvature
    u_prev = u.copy()
    u_curr = u + 0.5 * lam2 * laplacian(u)
    if spec.bc == Boundary.DIRICHLET:
        u_curr[0] = 0.0
        u_curr[-1] = 0.0
    energies = [wave_energy(u_curr, u_prev, dt, dx, c)]
    steps_done = 1
    for i in range(1, grid.nt):
        while steps_done < i * substeps:
            u_next = 2.0 * u_curr - u_prev + lam2 * laplacian(u_curr)
            if spec.bc == Boundary.DIRICHLET:
                u_next[0] = 0.0
                u_next[-1] = 0.0
            u_prev, u_curr = u_curr, u_next
            steps_done += 1
            if not np.all(np.isfinite(u_curr)):
                raise BlowUpError(f"solver blow-up: non-finite state at internal step {steps_done}")
        values[i] = u_curr
        energies.append(wave_energy(u_curr, u_prev, dt, dx, c))
    sample = FieldSample(values, grid, spec)
    if with_energy:
        return sample, np.asarray(energies)
    return sample
