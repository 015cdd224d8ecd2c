"""Benchmark harness: synthetic scenarios x noise levels x seeds x solvers.

Parameters for each solver are picked per (scenario, noise) by a small grid
search on dedicated tuning datasets, scored by correlation error against
the ground truth with frequency MAPE breaking statistical ties, and then
frozen for the evaluation datasets.
"""

import itertools
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import VlmdConfig, vlmd_decompose
from .metrics import freq_mape, im_correlation_error
from .mvmd import MvmdConfig, mvmd_decompose
from .synth import generate, scenario

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "scenario", "dataset_id", "seed", "noise", "solver", "K",
    "corr_error", "freq_mape", "wall_ms", "iters", "converged", "failed", "params",
]

THREADS_ENV = "VLMD_NUM_THREADS"

# Bandwidth is set through the filter sharpness 4 alpha / rho (latent solver)
# and 2 alpha (baseline), so both grids cover the same filter widths.
VLMD_GRID = [
    dict(alpha=sharp * rho / 4.0, rho=rho, lam=lam)
    for sharp, rho, lam in itertools.product((100.0, 300.0, 1000.0, 3000.0, 10000.0), (0.6, 5.0), (1.0, 100.0, 1000.0))
]
MVMD_GRID = [dict(alpha=sharp / 2.0) for sharp in (100.0, 300.0, 1000.0, 3000.0, 10000.0, 30000.0)]
DEFAULT_GRIDS = {"vlmd": VLMD_GRID, "mvmd": MVMD_GRID}

TUNING_OFFSET = 10_000


@dataclass(frozen=True)
class Case:
    scenario: str
    dataset_id: int
    noise: float
    seed: int
    n_modes: int


def case_spec(case, base_seed=0, **overrides):
    return scenario(case.scenario, seed=base_seed + case.dataset_id,
                    noise_sigma=case.noise, noise_seed=case.seed, **overrides)


def run_solver(solver, X, spec, n_modes, params, tol=1e-9, max_iter=500):
    if solver not in DEFAULT_GRIDS:
        raise ValueError(f"unknown solver {solver!r}")
    fs = spec.sample_rate_hz
    if solver == "vlmd":
        cfg = VlmdConfig(n_latents=spec.n_latents, n_modes=n_modes, tol=tol, max_iter=max_iter, **params)
        return vlmd_decompose(X, cfg, sample_rate_hz=fs)
    cfg = MvmdConfig(n_modes=n_modes, tol=tol, max_iter=max_iter, **params)
    return mvmd_decompose(X, cfg, sample_rate_hz=fs)


def score(result, truth):
    error, assignment = im_correlation_error(result.intrinsic_modes, truth.intrinsic_modes_true)
    return error, freq_mape(result.central_freqs_hz, truth.freqs_hz, assignment), assignment


def evaluate_case(case, solver, params, base_seed=0, tol=1e-9, max_iter=500, spec_overrides=None):
    """One result row. Solver failures are recorded, not raised."""
    row = dict(scenario=case.scenario, dataset_id=case.dataset_id, seed=case.seed,
               noise=case.noise, solver=solver, K=case.n_modes, params=dict(params))
    try:
        spec = case_spec(case, base_seed, **(spec_overrides or {}))
        X, truth = generate(spec)
        start = time.perf_counter()
        result = run_solver(solver, X, spec, case.n_modes, params, tol=tol, max_iter=max_iter)
        wall = time.perf_counter() - start
        error, mape, _ = score(result, truth)
        row.update(corr_error=error, freq_mape=mape, wall_ms=1000.0 * wall,
                   iters=result.n_iterations, converged=bool(result.converged), failed=False)
    except Exception as exc:  # noqa: BLE001 - any solver failure becomes a flagged row
        logger.warning("case %s with %s failed: %s", case, solver, exc)
        row.update(corr_error=np.nan, freq_mape=np.nan, wall_ms=np.nan,
                   iters=0, converged=False, failed=True)
    return row


def tune(scenario_name, solver, noise, n_modes=None, grid=None, n_datasets=10,
         base_seed=0, tol=1e-9, max_iter=500, spec_overrides=None):
    """Pick a grid point by correlation error on tuning datasets.

    One-standard-error rule: every grid point whose mean correlation error is
    within one standard error of the best is considered tied, and the tie is
    broken by the lowest mean frequency MAPE. Tuning datasets use ids from
    ``TUNING_OFFSET`` upwards, so they never coincide with evaluation
    datasets.
    """
    grid = DEFAULT_GRIDS[solver] if grid is None else grid
    n_modes = n_modes or scenario(scenario_name).n_modes
    errs = np.empty((len(grid), n_datasets))
    mapes = np.empty_like(errs)
    for i, params in enumerate(grid):
        for d in range(n_datasets):
            case = Case(scenario_name, TUNING_OFFSET + d, noise, 0, n_modes)
            row = evaluate_case(case, solver, params, base_seed, tol, max_iter, spec_overrides)
            failed = row["failed"] or not np.isfinite(row["corr_error"])
            errs[i, d] = np.inf if failed else row["corr_error"]
            mapes[i, d] = np.inf if failed else row.get("freq_mape", 0.0)
    mean = errs.mean(axis=1)
    best = int(np.argmin(mean))
    if not np.isfinite(mean[best]):
        return dict(grid[0])
    se = errs[best].std(ddof=1) / np.sqrt(n_datasets) if n_datasets > 1 else 0.0
    tied = np.flatnonzero(mean <= mean[best] + se)
    choice = int(tied[np.argmin(mapes[tied].mean(axis=1))])
    logger.info("tuned %s on %s noise=%g K=%d: %s (err %.4f, %d tied)",
                solver, scenario_name, noise, n_modes, grid[choice], mean[choice], tied.size)
    return dict(grid[choice])


def n_jobs_from_env(default=1):
    value = os.environ.get(THREADS_ENV)
    try:
        return max(1, int(value)) if value else default
    except ValueError:
        return default


def benchmark_run(scenarios, solvers, noise_grid, seeds, n_datasets=10, k_values=None,
                  params=None, tune_grid=None, n_tune=10, base_seed=0, tol=1e-9,
                  max_iter=500, n_jobs=None, spec_overrides=None):
    """Run every (scenario, dataset, noise, seed, solver, K) cell.

    Parameters
    ----------
    scenarios : list of str
    solvers : list of str
        Any of ``"vlmd"``, ``"mvmd"``.
    noise_grid : list of float
    seeds : list of int
        Noise seeds; each dataset is re-noised once per seed.
    n_datasets : int
        Distinct mixing/modulation draws per scenario.
    k_values : list of int, optional
        Numbers of modes to fit; defaults to the scenario's true K.
    params : dict, optional
        ``{solver: params}`` to use instead of tuning.
    tune_grid : dict, optional
        ``{solver: grid}`` overriding :data:`DEFAULT_GRIDS`.

    Returns
    -------
    list of dict
        One row per cell with the keys in :data:`RESULT_COLUMNS`, in a
        deterministic order.
    """
    n_jobs = n_jobs or n_jobs_from_env()
    tasks = []
    for name, noise in itertools.product(scenarios, noise_grid):
        ks = k_values or [scenario(name).n_modes]
        for solver, K in itertools.product(solvers, ks):
            if params and solver in params:
                chosen = dict(params[solver])
            else:
                grid = (tune_grid or {}).get(solver)
                chosen = tune(name, solver, noise, K, grid, n_tune, base_seed, tol,
                              max_iter, spec_overrides)
            for d, s in itertools.product(range(n_datasets), seeds):
                tasks.append((Case(name, d, noise, s, K), solver, chosen))

    def args(task):
        case, solver, chosen = task
        return case, solver, chosen, base_seed, tol, max_iter, spec_overrides

    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(evaluate_case, *zip(*map(args, tasks))))
    else:
        rows = [evaluate_case(*args(t)) for t in tasks]
    return rows


def summarize(rows):
    """Mean metrics per (scenario, noise, solver, K)."""
    groups = {}
    for row in rows:
        key = (row["scenario"], row["noise"], row["solver"], row["K"])
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        rs = [r for r in groups[key] if not r["failed"]]
        mean = lambda f: float(np.mean([r[f] for r in rs])) if rs else float("nan")  # noqa: E731
        out.append(dict(scenario=key[0], noise=key[1], solver=key[2], K=key[3],
                        n=len(groups[key]), failed=len(groups[key]) - len(rs),
                        corr_error=mean("corr_error"), freq_mape=mean("freq_mape"),
                        wall_ms=mean("wall_ms"), iters=mean("iters")))
    return out
