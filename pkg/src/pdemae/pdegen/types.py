"""Equation families, coefficient sampling, grids, and solved-field containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Family(str, Enum):
    KDV_BURGERS = "kdv_burgers"
    HEAT_1D = "heat_1d"
    BURGERS_INVISCID_1D = "burgers_inviscid_1d"
    ADVECTION_1D = "advection_1d"
    WAVE_1D = "wave_1d"
    KS_1D = "ks_1d"
    HEAT_2D = "heat_2d"
    ADVECTION_2D = "advection_2d"
    BURGERS_2D = "burgers_2d"
    NS_2D = "ns_2d"


class Boundary(str, Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


ONE_D_FAMILIES = {Family.KDV_BURGERS, Family.HEAT_1D, Family.BURGERS_INVISCID_1D,
                  Family.ADVECTION_1D, Family.WAVE_1D, Family.KS_1D}
# families governed by the alpha/beta/gamma equation (heat and inviscid Burgers
# are its corner cases)
KDV_FAMILY = {Family.KDV_BURGERS, Family.HEAT_1D, Family.BURGERS_INVISCID_1D}


@dataclass
class ForcingParams:
    """Superposition of traveling sinusoids: sum_j A_j sin(w_j t + 2 pi l_j x / L + phi_j).

    ``modes`` is (J,) for 1D or (J, 2) for 2D, where each row holds
    (l_x, l_y) and the temporal frequencies are unused.
    """

    amplitudes: np.ndarray
    omegas: np.ndarray
    modes: np.ndarray
    phases: np.ndarray
    length: float = 16.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.float64)
        self.omegas = np.asarray(self.omegas, dtype=np.float64)
        self.modes = np.asarray(self.modes, dtype=np.int64)
        self.phases = np.asarray(self.phases, dtype=np.float64)

    @property
    def n_terms(self) -> int:
        return len(self.amplitudes)

    @classmethod
    def sample(cls, rng: np.random.Generator, n_terms: int = 5, length: float = 16.0) -> "ForcingParams":
        return cls(
            amplitudes=rng.uniform(-0.5, 0.5, n_terms),
            omegas=rng.uniform(-0.4, 0.4, n_terms),
            modes=rng.integers(1, 4, n_terms),
            phases=rng.uniform(0.0, 2.0 * np.pi, n_terms),
            length=length,
        )

    @classmethod
    def sample_2d(cls, rng: np.random.Generator, n_terms: int = 5, length: float = 2.0) -> "ForcingParams":
        return cls(
            amplitudes=rng.uniform(-0.5, 0.5, n_terms),
            omegas=rng.uniform(-0.4, 0.4, n_terms),
            modes=rng.integers(1, 4, (n_terms, 2)),
            phases=rng.uniform(0.0, 2.0 * np.pi, n_terms),
            length=length,
        )

    @classmethod
    def sample_bc_series(cls, rng: np.random.Generator, n_terms: int = 5,
                         length: float = 16.0) -> "ForcingParams":
        # boundary-respecting series: phases restricted to {0, pi}, no time dependence
        return cls(
            amplitudes=rng.uniform(-0.5, 0.5, n_terms),
            omegas=np.zeros(n_terms),
            modes=rng.integers(1, 4, n_terms),
            phases=rng.choice([0.0, np.pi], n_terms),
            length=length,
        )

    def to_dict(self) -> dict:
        return {"amplitudes": self.amplitudes.tolist(), "omegas": self.omegas.tolist(),
                "modes": self.modes.tolist(), "phases": self.phases.tolist(),
                "length": self.length}

    @classmethod
    def from_dict(cls, d: dict) -> "ForcingParams":
        return cls(np.array(d["amplitudes"]), np.array(d["omegas"]),
                   np.array(d["modes"]), np.array(d["phases"]), float(d["length"]))


def eval_delta(forcing: ForcingParams, t, x, y=None) -> np.ndarray:
    """Evaluate the sinusoid superposition at time(s) t and position(s) x[, y]."""
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros(np.broadcast_shapes(t.shape, x.shape) if y is None
                     else np.broadcast_shapes(t.shape, x.shape, np.shape(y)))
    for j in range(forcing.n_terms):
        if y is None:
            phase = (forcing.omegas[j] * t
                     + 2.0 * np.pi * forcing.modes[j] * x / forcing.length
                     + forcing.phases[j])
        else:
            lx, ly = forcing.modes[j]
            phase = (2.0 * np.pi * lx * x / forcing.length
                     + 2.0 * np.pi * ly * np.asarray(y) / forcing.length
                     + forcing.phases[j])
        total = total + forcing.amplitudes[j] * np.sin(phase)
    return total


@dataclass(frozen=True)
class Grid:
    nt: int
    nx: int
    ny: int | None = None
    x0: float = 0.0
    x1: float = 16.0
    y0: float | None = None
    y1: float | None = None
    t0: float = 0.0
    t1: float = 2.0
    periodic: bool = True

    @property
    def is_2d(self) -> bool:
        return self.ny is not None

    @property
    def length_x(self) -> float:
        return self.x1 - self.x0

    @property
    def length_y(self) -> float:
        return float(self.y1 - self.y0)

    @property
    def dx(self) -> float:
        # periodic grids exclude the duplicate endpoint
        return self.length_x / self.nx if self.periodic else self.length_x / (self.nx - 1)

    @property
    def dy(self) -> float:
        return self.length_y / self.ny if self.periodic else self.length_y / (self.ny - 1)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.nt - 1)

    @property
    def x_coords(self) -> np.ndarray:
        if self.periodic:
            return self.x0 + self.dx * np.arange(self.nx)
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def y_coords(self) -> np.ndarray:
        if self.periodic:
            return self.y0 + self.dy * np.arange(self.ny)
        return np.linspace(self.y0, self.y1, self.ny)

    @property
    def t_coords(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nt, self.nx) if not self.is_2d else (self.nt, self.nx, self.ny)

    def with_resolution(self, nx: int, ny: int | None = None) -> "Grid":
        return Grid(self.nt, nx, ny if self.is_2d else None, self.x0, self.x1,
                    self.y0, self.y1, self.t0, self.t1, self.periodic)

    def to_dict(self) -> dict:
        return {"nt": self.nt, "nx": self.nx, "ny": self.ny, "x0": self.x0,
                "x1": self.x1, "y0": self.y0, "y1": self.y1, "t0": self.t0,
                "t1": self.t1, "periodic": self.periodic}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(**d)


def default_grid(family: Family, bc: Boundary = Boundary.PERIODIC) -> Grid:
    periodic = bc == Boundary.PERIODIC
    if family in KDV_FAMILY or family == Family.ADVECTION_1D:
        return Grid(250, 100, None, 0.0, 16.0, periodic=periodic)
    if family == Family.WAVE_1D:
        return Grid(250, 100, None, -8.0, 8.0, t1=100.0, periodic=False)
    if family == Family.KS_1D:
        return Grid(100, 100, None, 0.0, 64.0, t1=100.0)
    if family == Family.NS_2D:
        return Grid(100, 64, 64, 0.0, 1.0, 0.0, 1.0, t1=25.0)
    if family in (Family.HEAT_2D, Family.ADVECTION_2D, Family.BURGERS_2D):
        return Grid(100, 64, 64, -1.0, 1.0, -1.0, 1.0, t1=2.0)
    raise ValueError(f"unknown family {family}")


@dataclass
class PdeSpec:
    family: Family
    coefficients: dict[str, float]
    bc: Boundary = Boundary.PERIODIC
    forcing: ForcingParams | None = None
    ic: dict | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "coefficients": {k: float(v) for k, v in self.coefficients.items()},
            "bc": self.bc.value,
            "forcing": self.forcing.to_dict() if self.forcing is not None else None,
            "ic": self.ic,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PdeSpec":
        return cls(
            family=Family(d["family"]),
            coefficients=dict(d["coefficients"]),
            bc=Boundary(d["bc"]),
            forcing=ForcingParams.from_dict(d["forcing"]) if d.get("forcing") else None,
            ic=d.get("ic"),
            seed=d.get("seed"),
        )


@dataclass
class FieldSample:
    values: np.ndarray          # (nt, nx) or (nt, nx, ny)
    grid: Grid
    spec: PdeSpec

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field sample contains non-finite values")


def sample_spec(family: Family, rng: np.random.Generator,
                bc: Boundary | None = None) -> PdeSpec:
    """Draw coefficients, boundary condition, and IC/forcing parameters for a family."""
    if family == Family.KDV_BURGERS:
        return PdeSpec(family, {"alpha": rng.uniform(0.0, 3.0),
                                "beta": rng.uniform(0.0, 0.4),
                                "gamma": rng.uniform(0.0, 1.0)},
                       Boundary.PERIODIC, ForcingParams.sample(rng))
    if family == Family.HEAT_1D:
        bc = bc or Boundary.PERIODIC
        nu = rng.uniform(0.1, 0.8)
        if bc == Boundary.PERIODIC:
            return PdeSpec(family, {"nu": nu}, bc, ForcingParams.sample(rng))
        series = ForcingParams.sample_bc_series(rng)
        return PdeSpec(family, {"nu": nu}, bc, None, {"series": series.to_dict()})
    if family == Family.BURGERS_INVISCID_1D:
        return PdeSpec(family, {"alpha": 0.5, "beta": 0.0, "gamma": 0.0},
                       Boundary.PERIODIC, ForcingParams.sample(rng))
    if family == Family.ADVECTION_1D:
        series = ForcingParams.sample(rng)
        return PdeSpec(family, {"c": rng.uniform(0.1, 5.0)}, Boundary.PERIODIC,
                       None, {"series": series.to_dict()})
    if family == Family.WAVE_1D:
        bc = bc or Boundary(rng.choice([Boundary.DIRICHLET.value, Boundary.NEUMANN.value]))
        grid = default_grid(family)
        return PdeSpec(family, {"c": 2.0}, bc, None,
                       {"center": float(rng.uniform(grid.x0, grid.x1)), "width": 0.8})
    if family == Family.KS_1D:
        series = ForcingParams.sample(rng, length=64.0)
        return PdeSpec(family, {"nu": rng.uniform(0.75, 1.25)}, Boundary.PERIODIC,
                       None, {"series": series.to_dict()})
    if family == Family.HEAT_2D:
        return PdeSpec(family, {"nu": rng.uniform(2e-3, 2e-2)}, Boundary.PERIODIC,
                       None, {"series": ForcingParams.sample_2d(rng).to_dict()})
    if family == Family.ADVECTION_2D:
        return PdeSpec(family, {"cx": rng.uniform(0.1, 2.5), "cy": rng.uniform(0.1, 2.5)},
                       Boundary.PERIODIC, None,
                       {"series": ForcingParams.sample_2d(rng).to_dict()})
    if family == Family.BURGERS_2D:
        return PdeSpec(family, {"nu": rng.uniform(7.5e-3, 1.5e-2),
                                "cx": rng.uniform(0.5, 1.0), "cy": rng.uniform(0.5, 1.0)},
                       Boundary.PERIODIC, None,
                       {"series": ForcingParams.sample_2d(rng).to_dict()})
    if family == Family.NS_2D:
        nu = float(rng.integers(1, 10)) * 10.0 ** -float(rng.integers(6, 10))
        amp = float(rng.integers(1, 11)) * 1e-3
        return PdeSpec(family, {"nu": nu, "amp": amp}, Boundary.PERIODIC, None,
                       {"grf_seed": int(rng.integers(0, 2 ** 31)),
                        "alpha": 2.5, "tau": 7.0})
    raise ValueError(f"unknown family {family}")


def downsample(sample: FieldSample, target_nx: int, target_ny: int | None = None) -> FieldSample:
    """Strided spatial subsampling; index i maps to source index floor(i*src/target)."""
    src_nx = sample.grid.nx
    if target_nx > src_nx:
        raise ValueError("target resolution exceeds source")
    ix = (np.arange(target_nx) * src_nx) // target_nx
    if sample.grid.is_2d:
        target_ny = target_ny or target_nx
        if target_ny > sample.grid.ny:
            raise ValueError("target resolution exceeds source")
        iy = (np.arange(target_ny) * sample.grid.ny) // target_ny
        values = sample.values[:, ix][:, :, iy]
        grid = sample.grid.with_resolution(target_nx, target_ny)
    else:
        values = sample.values[:, ix]
        grid = sample.grid.with_resolution(target_nx)
    return FieldSample(values.copy(), grid, sample.spec)
