"""Dataset assembly: solver dispatch and seeded, optionally parallel generation."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .solve1d import (solve_advection_1d, solve_heat_varbc, solve_kdv_burgers,
                      solve_ks, solve_wave)
from .solve2d import solve_2d, solve_ns_vorticity
from .types import (Boundary, Family, FieldSample, Grid, KDV_FAMILY, PdeSpec,
                    default_grid, downsample, sample_spec)

WORKER_ENV_VAR = "PDEMAE_WORKERS"


def solve(spec: PdeSpec, grid: Grid | None = None) -> FieldSample:
    """Route a spec to its family's solver on the given (or default) grid."""
    grid = grid or default_grid(spec.family, spec.bc)
    if spec.family in KDV_FAMILY:
        if spec.bc == Boundary.PERIODIC:
            return solve_kdv_burgers(spec, grid)
        return solve_heat_varbc(spec, grid)
    if spec.family == Family.ADVECTION_1D:
        return solve_advection_1d(spec, grid)
    if spec.family == Family.WAVE_1D:
        return solve_wave(spec, grid)
    if spec.family == Family.KS_1D:
        return solve_ks(spec, grid)
    if spec.family in (Family.HEAT_2D, Family.ADVECTION_2D, Family.BURGERS_2D):
        return solve_2d(spec, grid)
    if spec.family == Family.NS_2D:
        return solve_ns_vorticity(spec, grid)
    raise ValueError(f"no solver for family {spec.family}")


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get(WORKER_ENV_VAR)
    return max(1, int(env)) if env else 1


def _generate_one(args) -> FieldSample:
    family, bc, seed_entropy, index, grid_dict, target_nx = args
    rng = np.random.default_rng(np.random.SeedSequence(seed_entropy, spawn_key=(index,)))
    fam = Family(family)
    spec = sample_spec(fam, rng, Boundary(bc) if bc else None)
    spec.seed = index
    grid = Grid.from_dict(grid_dict) if grid_dict else default_grid(fam, spec.bc)
    sample = solve(spec, grid)
    if target_nx is not None:
        sample = downsample(sample, target_nx, target_nx if grid.is_2d else None)
    return sample


def generate_dataset(families: Family | list[Family], count: int, master_seed: int,
                     grid: Grid | None = None, bc: Boundary | None = None,
                     target_nx: int | None = None,
                     workers: int | None = None) -> list[FieldSample]:
    """Generate ``count`` solved trajectories, cycling through ``families``.

    Each sample draws from an independent rng stream spawned off the master
    seed by sample index, so results are identical regardless of worker count.
    """
    if isinstance(families, Family):
        families = [families]
    jobs = [(families[i % len(families)].value, bc.value if bc else None,
             master_seed, i, grid.to_dict() if grid else None, target_nx)
            for i in range(count)]
    n_workers = worker_count(workers)
    if n_workers == 1:
        return [_generate_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_generate_one, jobs, chunksize=max(1, count // (4 * n_workers))))
