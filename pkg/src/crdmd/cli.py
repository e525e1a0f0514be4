"""Command-line pipeline orchestration.

Subcommands: generate | corrupt | denoise | extract | reduce | evaluate |
pipeline.  Every run is a pure function of its config and seed: identical
settings produce byte-identical output files.  Exit codes: 0 success, 1
numerical failure (divergence, or non-convergence under ``strict``), 2
configuration or file-format error.
"""

from __future__ import annotations

import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import field as field_io
from .config import KEYS, load_config, require
from .denoise import DenoiseConfig, solve_preprocessing
from .dimred import DimredConfig, solve_dimred
from .dmd import (
    Amplitudes,
    energy_rank,
    export_modes_csv,
    extract_modes,
    fit_amplitudes_ls,
    load_modes,
    mode_importance,
    save_modes,
    score_amplitudes,
)
from .exceptions import ConfigError, CrdmdError, FormatError, NumericalError
from .metrics import (
    TrialSet,
    eig_mse,
    eig_std,
    frame_psnr,
    frame_ssim,
    match_eigenvalues,
    mpsnr,
    mssim,
)
from .synthetic import (
    MISSING,
    SALT_PEPPER,
    NoiseSpec,
    SyntheticSpec,
    corrupt,
    default_mode_bank,
    generate_synthetic,
    radius_eps,
    radius_eta_missing,
    radius_eta_saltpepper,
)

COMMANDS = ("generate", "corrupt", "denoise", "extract", "reduce", "evaluate", "pipeline")

USAGE = """usage: crdmd <command> [--config PATH] [--key=value ...]

commands:
  generate   render a synthetic ground-truth field and its mode table
  corrupt    add mixed noise to a field
  denoise    remove mixed noise (preprocessing solver)
  extract    extract modes and least-squares amplitudes from a field
  reduce     re-estimate sparse amplitudes against a noisy observation
  evaluate   compare an estimate against a truth field (MPSNR/MSSIM)
  pipeline   run all stages over seeded trials and aggregate metrics

Any configuration key (see the config module) can be set as --key=value.
"""


def _parse_argv(argv):
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        raise SystemExit(0)
    command = argv[0]
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    config_path = None
    overrides = {}
    args = list(argv[1:])
    while args:
        arg = args.pop(0)
        if arg == "--config":
            if not args:
                raise ConfigError("--config needs a path")
            config_path = args.pop(0)
        elif arg.startswith("--config="):
            config_path = arg.split("=", 1)[1]
        elif arg.startswith("--") and "=" in arg:
            key, value = arg[2:].split("=", 1)
            overrides[key] = value
        elif arg.startswith("--") and arg[2:] in KEYS:
            if not args:
                raise ConfigError(f"option {arg} needs a value")
            overrides[arg[2:]] = args.pop(0)
        else:
            raise ConfigError(f"unrecognized argument {arg!r}")
    return command, config_path, overrides


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


def _noise_spec(config, seed):
    return NoiseSpec(
        sigma=config["noise.sigma"],
        ps=config["noise.ps"],
        kind=config["noise.kind"],
        seed=seed,
    )


def _radii(config, observed):
    """Explicit radii when set, else calibrated from the noise statistics."""
    eps, eta = config["eps"], config["eta"]
    total = observed.n * observed.m
    if eps is None:
        eps = radius_eps(config["noise.sigma"], config["noise.ps"], total, config["alpha"])
    if eta is None:
        kind = config["noise.kind"]
        if kind == SALT_PEPPER:
            eta = radius_eta_saltpepper(config["noise.ps"], total, config["alpha"])
        elif kind == MISSING:
            eta = radius_eta_missing(observed, config["noise.ps"], config["alpha"])
        else:
            raise ConfigError(f"unknown noise kind {kind!r}")
    return float(eps), float(eta)


def _rank(config, data):
    r = config["rank.r"]
    return r if r is not None else energy_rank(data, config["rank.energy"])


def _check_converged(report, config, what):
    if config["strict"] and not report.converged:
        raise NumericalError(
            f"{what} did not converge within {report.iterations} iterations"
        )


def _synthetic_spec(config) -> SyntheticSpec:
    return SyntheticSpec(
        n1=config["synth.n1"],
        n2=config["synth.n2"],
        m=config["synth.m"],
        modes=default_mode_bank(config["synth.pairs"], config["synth.real_modes"]),
        target_range=(config["synth.range_lo"], config["synth.range_hi"]),
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_generate(config):
    out = require(config, "io.output", "generate")
    truth, gt = generate_synthetic(_synthetic_spec(config))
    field_io.save(truth, out)
    modes_path = config["io.modes"]
    if modes_path is not None:
        gt_modes = gt.as_modes()
        amps = score_amplitudes(gt_modes, gt.xi)
        save_modes(modes_path, gt_modes, amps)
        csv_path = config["io.modes_csv"] or str(modes_path) + ".csv"
        export_modes_csv(csv_path, gt_modes, amps)
    return 0


def cmd_corrupt(config):
    src = require(config, "io.input", "corrupt")
    out = require(config, "io.output", "corrupt")
    clean = field_io.load(src)
    observed = corrupt(clean, _noise_spec(config, config["seed"]))
    field_io.save(observed, out)
    return 0


def cmd_denoise(config):
    src = require(config, "io.input", "denoise")
    out = require(config, "io.output", "denoise")
    observed = field_io.load(src)
    eps, eta = _radii(config, observed)
    result = solve_preprocessing(
        observed,
        DenoiseConfig(
            eps=eps, eta=eta, w=config["w"],
            tol=config["tol"], max_iter=config["max_iter"],
        ),
    )
    _check_converged(result.report, config, "denoise")
    field_io.save(result.x, out)
    if config["io.sparse"] is not None:
        field_io.save(result.s, config["io.sparse"])
    print(
        f"denoise: iterations={result.report.iterations} "
        f"converged={result.report.converged}"
    )
    return 0


def cmd_extract(config):
    src = require(config, "io.input", "extract")
    modes_path = require(config, "io.modes", "extract")
    data = field_io.load(src)
    modes = extract_modes(data, _rank(config, data))
    fitted = fit_amplitudes_ls(modes, data)
    amps = score_amplitudes(modes, fitted.xi)
    save_modes(modes_path, modes, amps)
    csv_path = config["io.modes_csv"] or str(modes_path) + ".csv"
    export_modes_csv(csv_path, modes, amps)
    print(f"extract: rank={modes.r} residual={fitted.residual:.6g}")
    return 0


def cmd_reduce(config):
    src = require(config, "io.input", "reduce")
    modes_path = require(config, "io.modes", "reduce")
    out = require(config, "io.output", "reduce")
    observed = field_io.load(src)
    modes, stored = load_modes(modes_path)
    eps, eta = _radii(config, observed)
    result = solve_dimred(
        observed,
        modes,
        stored.weights,
        DimredConfig(
            eps=eps, eta=eta, w=config["w"], mu=config["mu"],
            tol=config["tol"], max_iter=config["max_iter"],
        ),
        xi0=stored.xi,
    )
    _check_converged(result.report, config, "reduce")
    field_io.save(result.reconstruction, out)
    if config["io.sparse"] is not None:
        field_io.save(result.s, config["io.sparse"])
    amps_csv = config["io.amps_csv"] or str(out) + ".csv"
    export_modes_csv(
        amps_csv,
        modes,
        Amplitudes(xi=result.xi, importance=stored.importance, weights=stored.weights),
        active=result.active_groups,
    )
    print(
        f"reduce: active={result.active_groups.size}/{modes.r} "
        f"iterations={result.report.iterations} converged={result.report.converged}"
    )
    return 0


def cmd_evaluate(config):
    truth_path = require(config, "io.truth", "evaluate")
    estimate_path = require(config, "io.estimate", "evaluate")
    out = require(config, "io.output", "evaluate")
    truth = field_io.load(truth_path)
    estimate = field_io.load(estimate_path)
    rows = [
        ["mpsnr", "all", _fmt(mpsnr(truth, estimate))],
        ["mssim", "all", _fmt(mssim(truth, estimate))],
    ]
    psnr = frame_psnr(truth, estimate)
    ssim = frame_ssim(truth, estimate)
    for t in range(truth.m):
        rows.append(["psnr", f"frame_{t}", _fmt(psnr[t])])
        rows.append(["ssim", f"frame_{t}", _fmt(ssim[t])])
    _write_csv(out, ["metric", "target", "value"], rows)
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _run_trial(outdir: str, config: dict, trial: int) -> None:
    """One seeded trial: corrupt, denoise, extract (both arms), reduce.

    Writes every stage's artifact into the trial directory; all coupling
    between stages goes through these files.
    """
    trial_dir = Path(outdir) / f"trial_{trial:03d}"
    trial_dir.mkdir(parents=True, exist_ok=True)
    truth = field_io.load(Path(outdir) / "truth.fld")

    observed = corrupt(truth, _noise_spec(config, config["seed"] + trial))
    field_io.save(observed, trial_dir / "observed.fld")

    eps, eta = _radii(config, observed)
    denoise_result = solve_preprocessing(
        observed,
        DenoiseConfig(
            eps=eps, eta=eta, w=config["w"],
            tol=config["tol"], max_iter=config["max_iter"],
        ),
    )
    _check_converged(denoise_result.report, config, f"trial {trial} denoise")
    field_io.save(denoise_result.x, trial_dir / "denoised.fld")
    field_io.save(denoise_result.s, trial_dir / "sparse.fld")

    rank = _rank(config, denoise_result.x)
    for name, data in (("modes", denoise_result.x), ("naive_modes", observed)):
        modes = extract_modes(data, rank)
        fitted = fit_amplitudes_ls(modes, data)
        amps = score_amplitudes(modes, fitted.xi)
        save_modes(trial_dir / f"{name}.mds", modes, amps)
        export_modes_csv(trial_dir / f"{name}.csv", modes, amps)

    modes, stored = load_modes(trial_dir / "modes.mds")
    dimred_result = solve_dimred(
        observed,
        modes,
        stored.weights,
        DimredConfig(
            eps=eps, eta=eta, w=config["w"], mu=config["mu"],
            tol=config["tol"], max_iter=config["max_iter"],
        ),
        xi0=stored.xi,
    )
    _check_converged(dimred_result.report, config, f"trial {trial} reduce")
    field_io.save(dimred_result.reconstruction, trial_dir / "reconstruction.fld")
    export_modes_csv(
        trial_dir / "reconstruction.csv",
        modes,
        Amplitudes(
            xi=dimred_result.xi,
            importance=stored.importance,
            weights=stored.weights,
        ),
        active=dimred_result.active_groups,
    )


def _worker_count(trials: int) -> int:
    env = os.environ.get("CRDMD_THREADS", "").strip()
    if not env:
        return 1
    cap = int(env)
    if cap < 0:
        raise ConfigError("CRDMD_THREADS must be nonnegative")
    auto = os.cpu_count() or 1
    return min(trials, auto if cap == 0 else cap)


def cmd_pipeline(config):
    outdir = Path(require(config, "io.outdir", "pipeline"))
    outdir.mkdir(parents=True, exist_ok=True)
    trials = config["trials.k"]
    if trials < 1:
        raise ConfigError("trials.k must be at least 1")

    truth, gt = generate_synthetic(_synthetic_spec(config))
    field_io.save(truth, outdir / "truth.fld")
    gt_modes = gt.as_modes()
    gt_amps = score_amplitudes(gt_modes, gt.xi)
    save_modes(outdir / "truth_modes.mds", gt_modes, gt_amps)
    export_modes_csv(outdir / "truth_modes.csv", gt_modes, gt_amps)

    workers = _worker_count(trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_trial, str(outdir), config, t)
                for t in range(trials)
            ]
            for future in futures:
                future.result()
    else:
        for t in range(trials):
            _run_trial(str(outdir), config, t)

    _aggregate(outdir, config, gt_modes, gt_amps, trials)
    print(f"pipeline: {trials} trial(s) in {outdir}")
    return 0


def _aggregate(outdir: Path, config, gt_modes, gt_amps, trials: int) -> None:
    """Collect per-trial outputs into the scatter table and the metrics table."""
    leaders = gt_modes.leaders()
    order = np.argsort(-gt_amps.importance[leaders], kind="stable")
    targets = gt_modes.lam[leaders][order]

    truth = field_io.load(outdir / "truth.fld")
    scatter_rows = []
    matched = {"crdmd": [], "naive": []}
    quality = []
    for t in range(trials):
        trial_dir = outdir / f"trial_{t:03d}"
        for method, name in (("crdmd", "modes.mds"), ("naive", "naive_modes.mds")):
            modes, _ = load_modes(trial_dir / name)
            estimates = modes.lam[modes.leaders()]
            match = match_eigenvalues(estimates, targets)
            matched[method].append(match)
            for k in range(targets.size):
                scatter_rows.append(
                    [
                        t, method, k,
                        _fmt(match[k].real), _fmt(match[k].imag),
                        _fmt(targets[k].real), _fmt(targets[k].imag),
                    ]
                )
        denoised = field_io.load(trial_dir / "denoised.fld")
        observed = field_io.load(trial_dir / "observed.fld")
        recon = field_io.load(trial_dir / "reconstruction.fld")
        quality.append(
            (
                mpsnr(truth, observed), mpsnr(truth, denoised), mpsnr(truth, recon),
                mssim(truth, denoised), mssim(truth, recon),
            )
        )
    _write_csv(
        outdir / "eigen_scatter.csv",
        ["trial", "method", "target", "re_est", "im_est", "re_gt", "im_gt"],
        scatter_rows,
    )

    metric_rows = []
    for method in ("crdmd", "naive"):
        trial_set = TrialSet(matched=np.stack(matched[method]), gt=targets)
        for k in range(targets.size):
            metric_rows.append(
                [f"eig_mse_{method}", f"target_{k}", _fmt(eig_mse(trial_set, k))]
            )
            metric_rows.append(
                [f"eig_std_{method}", f"target_{k}", _fmt(eig_std(trial_set, k))]
            )
    quality_arr = np.asarray(quality)
    for idx, name in enumerate(
        ("mpsnr_observed", "mpsnr_denoised", "mpsnr_reconstruction",
         "mssim_denoised", "mssim_reconstruction")
    ):
        metric_rows.append([name, "mean", _fmt(np.mean(quality_arr[:, idx]))])
    _write_csv(outdir / "metrics.csv", ["metric", "target", "value"], metric_rows)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, config_path, overrides = _parse_argv(argv)
        config = load_config(config_path, overrides)
        handler = {
            "generate": cmd_generate,
            "corrupt": cmd_corrupt,
            "denoise": cmd_denoise,
            "extract": cmd_extract,
            "reduce": cmd_reduce,
            "evaluate": cmd_evaluate,
            "pipeline": cmd_pipeline,
        }[command]
        return handler(config)
    except (ConfigError, FormatError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1
    except CrdmdError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
