"""PDE dataset generation: families, samplers, solvers, and downsampling."""

from .etdrk import BlowUpError, Etdrk2, phi_coefficients
from .generate import generate_dataset, solve, worker_count
from .solve1d import (CflError, solve_advection_1d, solve_heat_varbc,
                      solve_kdv_burgers, solve_ks, solve_wave, wave_energy)
from .solve2d import (grf_ic, ns_forcing_field, solve_2d, solve_ns_vorticity,
                      velocity_from_vorticity)
from .types import (Boundary, Family, FieldSample, ForcingParams, Grid,
                    KDV_FAMILY, ONE_D_FAMILIES, PdeSpec, default_grid,
                    downsample, eval_delta, sample_spec)

__all__ = [name for name in dir() if not name.startswith("_")]
