"""Two-dimensional periodic solvers: heat/advection (exact spectral), scalar
Burgers (exponential integrator), Navier-Stokes vorticity, and random-field ICs.
"""

from __future__ import annotations

import numpy as np

from .etdrk import BlowUpError, Etdrk2, check_state
from .types import (Boundary, Family, FieldSample, ForcingParams, Grid,
                    PdeSpec, eval_delta)


def _wavegrids(grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(kx, ky, dealias) for an rfft2 layout: kx full along axis 0, ky half along axis 1."""
    kx = 2.0 * np.pi * np.fft.fftfreq(grid.nx, d=grid.dx)[:, None]
    ky = 2.0 * np.pi * np.fft.rfftfreq(grid.ny, d=grid.dy)[None, :]
    mx = np.abs(np.fft.fftfreq(grid.nx, d=1.0 / grid.nx))[:, None]
    my = np.fft.rfftfreq(grid.ny, d=1.0 / grid.ny)[None, :]
    dealias = (mx <= grid.nx // 3) & (my <= grid.ny // 3)
    return kx, ky, dealias


def _deriv_wavenumbers(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    # First-derivative factors. The signed Nyquist mode is dropped: an odd
    # derivative of the real Nyquist component is not representable on the
    # grid, and keeping it breaks discrete div(u) = 0 for the velocity.
    kx, ky, _ = _wavegrids(grid)
    kx = kx.copy()
    ky = ky.copy()
    if grid.nx % 2 == 0:
        kx[grid.nx // 2, 0] = 0.0
    if grid.ny % 2 == 0:
        ky[0, -1] = 0.0
    return kx, ky


def _series_ic(spec: PdeSpec, grid: Grid) -> np.ndarray:
    series = ForcingParams.from_dict(spec.ic["series"])
    x = grid.x_coords[:, None]
    y = grid.y_coords[None, :]
    return eval_delta(series, 0.0, x, y)


def solve_2d(spec: PdeSpec, grid: Grid, substeps: int = 10) -> FieldSample:
    """Heat, advection, or scalar Burgers on a periodic 2D grid.

    Heat and advection are diagonal in Fourier space and use the exact
    per-mode propagator; Burgers integrates its conservative advection term
    with the exponential scheme and 2/3 dealiasing.
    """
    if spec.bc != Boundary.PERIODIC or not grid.periodic:
        raise ValueError("periodic boundary conditions required")
    kx, ky, dealias = _wavegrids(grid)
    u0 = _series_ic(spec, grid)
    values = np.empty(grid.shape)
    values[0] = u0

    if spec.family == Family.HEAT_2D:
        nu = float(spec.coefficients["nu"])
        u0_hat = np.fft.rfft2(u0)
        for i, t in enumerate(grid.t_coords[1:], start=1):
            decay = np.exp(-nu * (kx ** 2 + ky ** 2) * (t - grid.t0))
            values[i] = np.fft.irfft2(u0_hat * decay, s=(grid.nx, grid.ny))
        return FieldSample(values, grid, spec)

    if spec.family == Family.ADVECTION_2D:
        cx, cy = float(spec.coefficients["cx"]), float(spec.coefficients["cy"])
        u0_hat = np.fft.rfft2(u0)
        for i, t in enumerate(grid.t_coords[1:], start=1):
            phase = np.exp(-1j * (kx * cx + ky * cy) * (t - grid.t0))
            values[i] = np.fft.irfft2(u0_hat * phase, s=(grid.nx, grid.ny))
        return FieldSample(values, grid, spec)

    if spec.family != Family.BURGERS_2D:
        raise ValueError(f"unsupported 2D family {spec.family}")

    nu = float(spec.coefficients["nu"])
    cx, cy = float(spec.coefficients["cx"]), float(spec.coefficients["cy"])
    lin = -nu * (kx ** 2 + ky ** 2)

    def nonlinear(u_hat: np.ndarray, t: float) -> np.ndarray:
        u = np.fft.irfft2(u_hat, s=(grid.nx, grid.ny))
        sq_hat = np.fft.rfft2(0.5 * u * u)
        return -1j * (cx * kx + cy * ky) * np.where(dealias, sq_hat, 0.0)

    dt_internal = grid.dt / substeps
    stepper = Etdrk2(lin, nonlinear, dt_internal)
    u_hat = np.fft.rfft2(u0)
    step_count = 0
    for i in range(1, grid.nt):
        t = grid.t0 + (i - 1) * grid.dt
        for s in range(substeps):
            u_hat = stepper.step(u_hat, t + s * dt_internal)
            step_count += 1
            check_state(u_hat, step_count)
        values[i] = np.fft.irfft2(u_hat, s=(grid.nx, grid.ny))
    return FieldSample(values, grid, spec)


def ns_forcing_field(amp: float, grid: Grid) -> np.ndarray:
    """f(x, y) = A*(sin(2 pi (x+y)) + cos(2 pi (x+y))); mean-free by construction."""
    x = grid.x_coords[:, None]
    y = grid.y_coords[None, :]
    s = 2.0 * np.pi * (x + y)
    return amp * (np.sin(s) + np.cos(s))


def velocity_from_vorticity(w_hat: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Divergence-free velocity via the streamfunction: u = (psi_y, -psi_x)."""
    kx, ky, _ = _wavegrids(grid)
    k2 = kx ** 2 + ky ** 2
    k2_safe = np.where(k2 == 0.0, 1.0, k2)
    psi_hat = w_hat / k2_safe
    psi_hat = np.where(k2 == 0.0, 0.0, psi_hat)
    kxd, kyd = _deriv_wavenumbers(grid)
    ux = np.fft.irfft2(1j * kyd * psi_hat, s=(grid.nx, grid.ny))
    uy = np.fft.irfft2(-1j * kxd * psi_hat, s=(grid.nx, grid.ny))
    return ux, uy


def solve_ns_vorticity(spec: PdeSpec, grid: Grid, omega0: np.ndarray | None = None,
                       cfl: float = 0.4, substeps: int | None = None) -> FieldSample:
    """Pseudo-spectral 2D Navier-Stokes in scalar vorticity form.

    d/dt w + u . grad w = nu Lap w + f, with u recovered from the
    streamfunction.  Internal substepping is advective-CFL-limited per output
    interval unless a fixed substep count is supplied.
    """
    if spec.bc != Boundary.PERIODIC or not grid.periodic:
        raise ValueError("periodic boundary conditions required")
    nu = float(spec.coefficients["nu"])
    amp = float(spec.coefficients.get("amp", 0.0))
    if omega0 is None:
        ic = spec.ic or {}
        rng = np.random.default_rng(ic.get("grf_seed", 0))
        omega0 = grf_ic(rng, grid, {"alpha": ic.get("alpha", 2.5),
                                    "tau": ic.get("tau", 7.0)})
    kx, ky, dealias = _wavegrids(grid)
    kxd, kyd = _deriv_wavenumbers(grid)
    k2 = kx ** 2 + ky ** 2
    lin = -nu * k2
    f_hat = np.fft.rfft2(ns_forcing_field(amp, grid)) if amp else 0.0

    def nonlinear(w_hat: np.ndarray, t: float) -> np.ndarray:
        ux, uy = velocity_from_vorticity(w_hat, grid)
        wx = np.fft.irfft2(1j * kxd * w_hat, s=(grid.nx, grid.ny))
        wy = np.fft.irfft2(1j * kyd * w_hat, s=(grid.nx, grid.ny))
        adv_hat = np.fft.rfft2(ux * wx + uy * wy)
        return -np.where(dealias, adv_hat, 0.0) + f_hat

    values = np.empty(grid.shape)
    values[0] = omega0
    w_hat = np.fft.rfft2(np.asarray(omega0, dtype=np.float64))
    step_count = 0
    min_h = min(grid.dx, grid.dy)
    for i in range(1, grid.nt):
        if substeps is None:
            ux, uy = velocity_from_vorticity(w_hat, grid)
            umax = max(np.max(np.abs(ux)), np.max(np.abs(uy)), 1e-8)
            n_sub = max(1, int(np.ceil(grid.dt / (cfl * min_h / umax))))
        else:
            n_sub = substeps
        dt_internal = grid.dt / n_sub
        stepper = Etdrk2(lin, nonlinear, dt_internal)
        t = grid.t0 + (i - 1) * grid.dt
        for s in range(n_sub):
            w_hat = stepper.step(w_hat, t + s * dt_internal)
            step_count += 1
            check_state(w_hat, step_count)
        values[i] = np.fft.irfft2(w_hat, s=(grid.nx, grid.ny))
    return FieldSample(values, grid, spec)


def grf_ic(rng: np.random.Generator, grid: Grid, params: dict | None = None) -> np.ndarray:
    """Periodic Gaussian random field with power-law spectral decay, zero mean.

    Per-mode amplitude a_m = sqrt(2) * sigma * (4 pi^2 |m|^2 + tau^2)^(-alpha/2)
    over integer mode numbers m; defaults follow the usual random-vorticity
    setup (alpha = 2.5, tau = 7, sigma = tau^(alpha-1)).
    """
    params = params or {}
    alpha = float(params.get("alpha", 2.5))
    tau = float(params.get("tau", 7.0))
    sigma = float(params.get("sigma", tau ** (alpha - 1.0)))
    nx, ny = grid.nx, grid.ny
    mx = np.fft.fftfreq(nx, d=1.0 / nx)[:, None]
    my = np.fft.fftfreq(ny, d=1.0 / ny)[None, :]
    amp = np.sqrt(2.0) * sigma * (4.0 * np.pi ** 2 * (mx ** 2 + my ** 2) + tau ** 2) ** (-alpha / 2.0)
    amp[0, 0] = 0.0
    white = rng.standard_normal((nx, ny))
    coeff = amp * np.fft.fft2(white)
    field = np.sqrt(nx * ny) * np.fft.ifft2(coeff).real
    return field - field.mean()  # DC already zero; subtract roundoff residue
