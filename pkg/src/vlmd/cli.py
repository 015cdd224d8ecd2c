"""Command-line entry point: ``vlmd {decompose,filter-clients,synth,bench,cluster}``.

Exit codes are 0 on success, 2 on usage errors and 1 on runtime failures.
Errors are reported on stderr as one line::

    vlmd: error: <usage|runtime>: <ExceptionName>: <message>
"""

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import LINKAGES, METRICS, channel_distances, cluster_distances
from .benchmark import RESULT_COLUMNS, benchmark_run, n_jobs_from_env, summarize
from .core import VlmdConfig, vlmd_decompose
from .exceptions import ConfigError, ExplicitEmptyOutput, SpecError, VlmdError
from .io import (
    MANIFEST_NAME,
    RunManifest,
    atomic_write_text,
    file_sha256,
    read_config,
    read_csv,
    write_config,
    write_csv,
    write_table,
)
from .mvmd import MvmdConfig, mvmd_decompose
from .synth import NOISE_GRID, SCENARIOS, SynthSpec, generate, scenario

logger = logging.getLogger("vlmd")


class UsageError(VlmdError):
    pass


DECOMPOSE_DEFAULTS = dict(solver="vlmd", latents=1, modes=3, alpha=1000.0, rho=0.6, lam=0.04,
                          tau=None, tol=1e-7, max_iter=500, init_freqs="zeros", mirror=True,
                          demean=False, zscore=False, sample_rate=1.0)

SUMMARY_COLUMNS = ["scenario", "noise", "solver", "K", "n", "failed",
                   "corr_error", "freq_mape", "wall_ms", "iters"]


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _k_range(text):
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            values = list(range(lo, hi + 1))
        else:
            values = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI or a comma list, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"empty or non-positive K range {text!r}")
    return values


def _nonneg(text):
    value = float(text)
    if not np.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _init_freqs(text):
    if text in ("zeros", "uniform"):
        return text
    return _float_list(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="vlmd", description="Sparse multichannel mode decomposition with latent components.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a multichannel CSV into modes")
    p.add_argument("input")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--solver", choices=["vlmd", "mvmd"])
    p.add_argument("--latents", type=int)
    p.add_argument("--modes", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--init-freqs", type=_init_freqs, help="zeros, uniform or a comma list")
    p.add_argument("--mirror", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--demean", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--zscore", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--sample-rate", type=float, help="samples per native time unit")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("filter-clients", help="trim rows and drop mostly-zero columns")
    p.add_argument("input")
    p.add_argument("--drop-head-rows", type=int, default=0)
    p.add_argument("--drop-tail-rows", type=int, default=0)
    p.add_argument("--max-zero-frac", type=_fraction, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter_clients)

    p = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", choices=sorted(SCENARIOS))
    src.add_argument("--spec", help="key = value file with SynthSpec fields")
    p.add_argument("--noise", type=_nonneg)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="benchmark both solvers on synthetic scenarios")
    p.add_argument("--scenarios", type=lambda s: [v.strip().upper() for v in s.split(",")], default=["A"])
    p.add_argument("--solvers", type=lambda s: [v.strip().lower() for v in s.split(",")],
                   default=["vlmd", "mvmd"])
    p.add_argument("--noise-grid", type=_float_list, default=list(NOISE_GRID))
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--datasets", type=int, default=10)
    p.add_argument("--k-sweep", type=_k_range)
    p.add_argument("--no-tune", action="store_true", help="use solver defaults instead of tuning")
    p.add_argument("--tune-datasets", type=int, default=10)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--jobs", type=int, help="worker processes; default from VLMD_NUM_THREADS")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cluster", help="cluster channels of a decomposition run")
    p.add_argument("run_dir")
    p.add_argument("--target", default="coefficients", help="coefficients or mode:K (1-based)")
    p.add_argument("--linkage", choices=LINKAGES, default="average")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--max-leaves", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)
    return parser


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    return path


def _resolve_decompose(args):
    settings = dict(DECOMPOSE_DEFAULTS)
    if args.config:
        from_file = read_config(args.config)
        if "lambda" in from_file:
            from_file["lam"] = from_file.pop("lambda")
        unknown = set(from_file) - set(settings)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(from_file)
    for key in settings:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["demean"] and settings["zscore"]:
        logger.info("--zscore implies --demean")
    return settings


def preprocess(X, demean=False, zscore=False):
    if demean or zscore:
        X = X - X.mean(axis=0)
    if zscore:
        std = X.std(axis=0)
        X = X / np.where(std > 0, std, 1.0)
    return X


def cmd_decompose(args):
    start = time.perf_counter()
    s = _resolve_decompose(args)
    X, header = read_csv(args.input)
    X = preprocess(X, s["demean"], s["zscore"])
    T, C = X.shape
    if s["solver"] == "vlmd" and s["latents"] > C:
        raise UsageError(f"--latents {s['latents']} exceeds the {C} channels in {args.input}")
    out = _prepare_out(args.out)
    K = s["modes"]
    if s["solver"] == "vlmd":
        config = VlmdConfig(n_latents=s["latents"], n_modes=K, alpha=s["alpha"], rho=s["rho"],
                            lam=s["lam"], tau=0.9 if s["tau"] is None else s["tau"], tol=s["tol"],
                            max_iter=s["max_iter"], init_freqs=s["init_freqs"], mirror=s["mirror"])
        result = vlmd_decompose(X, config, sample_rate_hz=s["sample_rate"])
    else:
        config = MvmdConfig(n_modes=K, alpha=s["alpha"], tau=0.0 if s["tau"] is None else s["tau"],
                            tol=s["tol"], max_iter=s["max_iter"], init_freqs=s["init_freqs"],
                            mirror=s["mirror"])
        result = mvmd_decompose(X, config, sample_rate_hz=s["sample_rate"])

    # files are numbered by ascending central frequency
    order = np.argsort(result.central_freqs, kind="stable")
    outputs = []

    def emit(name, data, cols):
        write_csv(os.path.join(out, name), data, cols)
        outputs.append(name)

    for rank, k in enumerate(order, start=1):
        emit(f"modes_k{rank}.csv", result.intrinsic_modes[k].T, header)
    if s["solver"] == "vlmd":
        latent_names = [f"latent_{l + 1}" for l in range(config.n_latents)]
        emit("latents.csv", result.latent_components, latent_names)
        emit("coefficients.csv", result.coefficients, header)
    w = result.central_freqs[order]
    hz = w * s["sample_rate"]
    with np.errstate(divide="ignore"):
        period = np.where(hz > 0, 1.0 / np.where(hz > 0, hz, 1.0), np.inf)
    emit("frequencies.csv", np.column_stack([np.arange(1, K + 1), hz, w, period]),
         ["mode", "freq_hz", "freq_normalized", "period"])
    trace = result.freq_trace[:, order]
    emit("trace.csv", np.column_stack([np.arange(1, len(trace) + 1), trace]),
         ["iteration"] + [f"omega_{k}" for k in range(1, K + 1)])

    snapshot = dict(config.as_dict(), solver=s["solver"], demean=bool(s["demean"]),
                    zscore=bool(s["zscore"]), sample_rate=s["sample_rate"], channels=header,
                    n_iterations=result.n_iterations, converged=bool(result.converged))
    RunManifest("decompose", snapshot, input_hash=file_sha256(args.input),
                wall_time_s=time.perf_counter() - start, outputs=outputs).write(out)
    print(f"{s['solver']}: {K} modes, {result.n_iterations} iterations, "
          f"converged={result.converged}, wrote {out}")
    return 0


def cmd_filter_clients(args):
    start = time.perf_counter()
    X, header = read_csv(args.input)
    head, tail = args.drop_head_rows, args.drop_tail_rows
    if head < 0 or tail < 0:
        raise UsageError("row counts must be >= 0")
    X = X[head:X.shape[0] - tail]
    if X.shape[0] == 0:
        raise ExplicitEmptyOutput("no rows left after trimming head and tail")
    zero_frac = np.mean(X == 0, axis=0)
    keep = zero_frac <= args.max_zero_frac
    if not np.any(keep):
        raise ExplicitEmptyOutput(f"all {len(header)} columns exceed max zero fraction {args.max_zero_frac}")
    kept = [h for h, k in zip(header, keep) if k]
    write_csv(args.out, X[:, keep], kept)
    directory = os.path.dirname(os.path.abspath(args.out))
    RunManifest("filter-clients", dict(drop_head_rows=head, drop_tail_rows=tail,
                                       max_zero_frac=args.max_zero_frac, retained=kept),
                input_hash=file_sha256(args.input), wall_time_s=time.perf_counter() - start,
                outputs=[os.path.basename(args.out)]).write(directory)
    print(f"retained {len(kept)} of {len(header)} columns, {X.shape[0]} rows")
    return 0


def _synth_spec(args):
    overrides = {}
    if args.noise is not None:
        overrides["noise_sigma"] = args.noise
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.noise_seed is not None:
        overrides["noise_seed"] = args.noise_seed
    if args.scenario:
        return scenario(args.scenario, **overrides)
    values = read_config(args.spec)
    for key in ("freqs_hz", "am_params", "fm_params"):
        if key in values and not isinstance(values[key], list):
            values[key] = [values[key]]
    values.update(overrides)
    try:
        return SynthSpec(**values)
    except TypeError as exc:
        raise SpecError(f"bad spec file {args.spec}: {exc}") from None


def cmd_synth(args):
    start = time.perf_counter()
    spec = _synth_spec(args)
    X, truth = generate(spec)
    out = _prepare_out(args.out)
    channels = [f"ch{c + 1}" for c in range(spec.n_channels)]
    latents = [f"latent_{l + 1}" for l in range(spec.n_latents)]
    outputs = []

    def emit(name, data, cols):
        write_csv(os.path.join(out, name), data, cols)
        outputs.append(name)

    emit("data.csv", X, channels)
    emit("clean.csv", truth.clean_X, channels)
    emit("coefficients_true.csv", truth.A_true, channels)
    emit("freqs_true.csv", np.column_stack([np.arange(1, spec.n_modes + 1), truth.freqs_hz]),
         ["mode", "freq_hz"])
    for k in range(spec.n_modes):
        emit(f"modes_true_k{k + 1}.csv", truth.intrinsic_modes_true[k].T, channels)
        emit(f"latent_modes_true_k{k + 1}.csv", truth.latent_modes_true[k].T, latents)
    spec_dict = {k: v for k, v in spec.to_dict().items() if v is not None}
    write_config(os.path.join(out, "spec.txt"), spec_dict)
    outputs.append("spec.txt")
    RunManifest("synth", spec.to_dict(), seed=spec.seed,
                wall_time_s=time.perf_counter() - start, outputs=outputs).write(out)
    print(f"wrote {spec.n_samples} x {spec.n_channels} dataset to {out}")
    return 0


def cmd_bench(args):
    start = time.perf_counter()
    for name in args.scenarios:
        if name not in SCENARIOS:
            raise UsageError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    for solver in args.solvers:
        if solver not in ("vlmd", "mvmd"):
            raise UsageError(f"unknown solver {solver!r}")
    if args.datasets < 1 or not args.seeds or not args.noise_grid:
        raise UsageError("need at least one dataset, seed and noise level")
    params = {solver: {} for solver in args.solvers} if args.no_tune else None
    jobs = args.jobs or n_jobs_from_env()
    rows = benchmark_run(args.scenarios, args.solvers, args.noise_grid, args.seeds,
                         n_datasets=args.datasets, k_values=args.k_sweep, params=params,
                         n_tune=args.tune_datasets, base_seed=args.base_seed, tol=args.tol,
                         max_iter=args.max_iter, n_jobs=jobs)
    out = _prepare_out(args.out)
    write_table(os.path.join(out, "results.csv"), rows, RESULT_COLUMNS)
    summary = summarize(rows)
    write_table(os.path.join(out, "summary.csv"), summary, SUMMARY_COLUMNS)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "verbose")}
    RunManifest("bench", config, seed=args.base_seed, wall_time_s=time.perf_counter() - start,
                outputs=["results.csv", "summary.csv"]).write(out)
    for row in summary:
        print(f"{row['scenario']} noise={row['noise']:g} {row['solver']} K={row['K']}: "
              f"corr_error={row['corr_error']:.4f} freq_mape={row['freq_mape']:.3f}% "
              f"wall_ms={row['wall_ms']:.1f} failed={row['failed']}")
    return 0


def _parse_target(text):
    if text == "coefficients":
        return "coefficients", None
    if text.startswith("mode:"):
        try:
            k = int(text[5:])
        except ValueError:
            k = 0
        if k >= 1:
            return "mode", k
    raise UsageError(f"--target must be 'coefficients' or 'mode:K' with K >= 1, got {text!r}")


def cmd_cluster(args):
    kind, k = _parse_target(args.target)
    run = args.run_dir
    if not os.path.isdir(run):
        raise VlmdError(f"run directory {run} not found; create it with 'vlmd decompose'")
    if kind == "coefficients":
        path = os.path.join(run, "coefficients.csv")
        if not os.path.exists(path):
            raise VlmdError(f"{path} missing; run 'vlmd decompose --solver vlmd' first")
        A, labels = read_csv(path)
        features = A.T
        metric = args.metric or "euclidean"
        name = "coefficients"
    else:
        path = os.path.join(run, f"modes_k{k}.csv")
        if not os.path.exists(path):
            raise VlmdError(f"{path} missing; run 'vlmd decompose' with at least {k} modes first")
        U, labels = read_csv(path)
        features = U.T
        metric = args.metric or "correlation"
        name = f"mode{k}"
    if len(labels) < 2:
        raise UsageError("clustering needs at least 2 channels")
    D, flagged = channel_distances(features, metric)
    dendro = cluster_distances(D, labels, args.linkage, flagged=[labels[i] for i in flagged])
    out = _prepare_out(args.out or run)
    atomic_write_text(os.path.join(out, f"dendrogram_{name}.json"), dendro.to_json(args.max_leaves) + "\n")
    atomic_write_text(os.path.join(out, f"dendrogram_{name}.nwk"), dendro.to_newick() + "\n")
    if not os.path.exists(os.path.join(out, MANIFEST_NAME)):
        RunManifest("cluster", dict(run_dir=run, target=args.target, linkage=args.linkage,
                                    metric=metric, max_leaves=args.max_leaves),
                    input_hash=file_sha256(path),
                    outputs=[f"dendrogram_{name}.json", f"dendrogram_{name}.nwk"]).write(out)
    if flagged:
        print(f"zero-variance channels placed at distance 1: {', '.join(labels[i] for i in flagged)}",
              file=sys.stderr)
    print(f"{len(labels)} leaves, {len(dendro.merges)} merges, wrote {out}")
    return 0


def _error(kind, exc):
    message = str(exc).replace("\n", " ")
    print(f"vlmd: error: {kind}: {type(exc).__name__}: {message}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, SpecError) as exc:
        _error("usage", exc)
        return 2
    except (VlmdError, ValueError, OSError) as exc:
        _error("runtime", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
