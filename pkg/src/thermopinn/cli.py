"""Command-line interface.

Subcommands: train, evaluate, convergence-study, architecture-study,
transfer, sample, verify. Exit codes: 0 success, 1 usage or configuration
problem, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluation, net, physics, plots, reports, sampling, studies, training
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import (
    ExperimentConfig,
    apply_overrides,
    load_config,
    paper_scale_preset,
    preset_config,
    save_config,
)
from .errors import (
    ArchitectureError,
    CheckpointError,
    ConfigurationError,
    NumericalOverflowError,
    ThermopinnError,
)
from .net import MLPArchitecture
from .training import STATUS_DIVERGED
from .verification import run_all_checks

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this CLI reserves 2 for
    numerical failures, so remap usage problems to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="KEY=VALUE",
        help="override a configuration entry by dotted path (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="experiment seed")
    parser.add_argument("--augmented", choices=("true", "false"), help="toggle the augmented loss")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--plots", action="store_true", help="also render SVG figures")
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="start from the full-size preset (expect tens of CPU-hours)",
    )


def _resolve_config(args, default_preset: str = "desk") -> ExperimentConfig:
    if args.paper_scale and args.config:
        raise ConfigurationError("--paper-scale and --config are mutually exclusive")
    if args.config:
        cfg = load_config(args.config)
    elif args.paper_scale:
        cfg = paper_scale_preset()
        print(
            "warning: paper-scale settings train to 1e-4 on 1536 points; "
            "expect roughly a CPU-day per run",
            file=sys.stderr,
        )
    else:
        cfg = preset_config(getattr(args, "preset", None) or default_preset)
    cfg = apply_overrides(cfg, args.overrides)
    if args.seed is not None:
        cfg = apply_overrides(cfg, [f"seed={args.seed}"])
    if args.augmented is not None:
        cfg = apply_overrides(cfg, [f"train.augmented={args.augmented}"])
    if args.out is not None:
        cfg = apply_overrides(cfg, [f'out_dir="{args.out}"'])
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset(cfg: ExperimentConfig) -> sampling.CollocationSet:
    ladder = sampling.hierarchical_datasets(cfg.dataset.levels, cfg.domain, cfg.seed)
    return ladder[cfg.dataset.level]


def _write_evaluation(cfg: ExperimentConfig, arch, params, out: Path, do_plots: bool, history=None):
    report = evaluation.evaluate_errors(arch, params, cfg.domain, cfg.eval_grid_n)
    grid = sampling.test_grid(cfg.domain, cfg.eval_grid_n)
    bgrid = sampling.boundary_grid(cfg.domain, cfg.eval_grid_n)
    gen_error = evaluation.estimate_generalization_error(
        arch, params, grid, bgrid, cfg.flow, augmented=cfg.train.augmented
    )
    err_fields = evaluation.error_field(arch, params, grid)
    reports.write_error_report_json(
        out / "error_report.json", report, cfg.to_dict(), generalization_error=gen_error
    )
    reports.write_error_field_csv(out / "error_fields.csv", grid, err_fields, cfg.to_json())
    if do_plots:
        plots.plot_error_fields(
            grid, err_fields, cfg.domain, cfg.eval_grid_n, out / "error_fields.svg"
        )
        if history is not None:
            plots.plot_training_history(history, out / "training_history.svg")
    return report, gen_error


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    arch = MLPArchitecture.from_string(cfg.architecture)
    cset = _dataset(cfg)
    params0 = net.init_parameters(arch, cfg.seed)
    params, history = training.train(
        arch, params0, cset, cfg.flow, physics.beltrami_forcing_arrays, cfg.resolved_train()
    )
    save_config(cfg, out / "config.json")
    reports.write_metrics_csv(out / "metrics.csv", history, cfg.to_json())
    save_checkpoint(
        Checkpoint(
            architecture=cfg.architecture,
            seed=cfg.seed,
            parameters=params,
            status=history.status,
            config=cfg.to_dict(),
        ),
        out / "checkpoint.json",
    )
    _write_evaluation(cfg, arch, params, out, args.plots, history)
    print(
        f"train: status={history.status} epochs={history.epochs_used} "
        f"final_total={history.final_total:.6e} -> {out}"
    )
    if history.status == STATUS_DIVERGED:
        print("train: loss diverged", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = ExperimentConfig.from_dict(ckpt.config) if ckpt.config else preset_config("desk")
    cfg = apply_overrides(cfg, args.overrides)
    if args.out is not None:
        cfg = apply_overrides(cfg, [f'out_dir="{args.out}"'])
    out = _out_dir(cfg)
    arch = MLPArchitecture.from_string(ckpt.architecture)
    report, gen_error = _write_evaluation(cfg, arch, ckpt.parameters, out, args.plots)
    worst = max(fe.w0_inf for fe in report.fields.values())
    print(f"evaluate: max W0-inf error {worst:.6e}, generalization {gen_error:.6e} -> {out}")
    return EXIT_OK


def cmd_convergence_study(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    save_config(cfg, out / "config.json")

    def progress(cell):
        print(
            f"cell level={cell.level} points={cell.total_points} "
            f"threshold={cell.threshold:g} status={cell.status} epochs={cell.epochs}"
        )

    cells = studies.run_convergence_study(cfg, progress=progress)
    fits = studies.fit_study_cells(cells)
    reports.write_study_csv(out / "convergence_table.csv", cells, cfg.to_json())
    reports.write_fits_json(out / "convergence_fits.json", fits, cfg.to_dict())
    if args.plots:
        for norm in studies.NORM_KEYS:
            plots.plot_convergence(cells, norm, "training_error", out / f"convergence_{norm}_vs_error.svg")
            plots.plot_convergence(cells, norm, "collocation_count", out / f"convergence_{norm}_vs_points.svg")
    n_nc = sum(1 for c in cells if c.status != training.STATUS_CONVERGED)
    print(f"convergence-study: {len(cells)} cells ({n_nc} N.C.) -> {out}")
    return EXIT_OK


def cmd_architecture_study(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    save_config(cfg, out / "config.json")

    def progress(cell):
        print(
            f"cell arch={cell.architecture} points={cell.total_points} "
            f"status={cell.status} epochs={cell.epochs}"
        )

    cells = studies.run_architecture_study(cfg, progress=progress)
    arch_rows = studies.architecture_grid(cfg.architecture_study)
    level_totals = sorted({c.total_points for c in cells})
    table = studies.heatmap_cells(cells)
    reports.write_heatmap_csv(out / "architecture_heatmap.csv", arch_rows, level_totals, table, cfg.to_json())
    if args.plots:
        plots.plot_architecture_heatmap(arch_rows, level_totals, table, out / "architecture_heatmap.svg")
    print(f"architecture-study: {len(cells)} cells -> {out}")
    return EXIT_OK


def cmd_transfer(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = _resolve_config(args, default_preset=args.preset or "transfer-half-domain")
    if cfg.architecture != ckpt.architecture:
        raise CheckpointError(
            f"checkpoint architecture {ckpt.architecture} does not match "
            f"target architecture {cfg.architecture}"
        )
    out = _out_dir(cfg)
    save_config(cfg, out / "config.json")
    arch = MLPArchitecture.from_string(cfg.architecture)
    cset = _dataset(cfg)
    train_cfg = cfg.resolved_train()

    params, history = training.transfer_learn(
        arch, ckpt.parameters, cset, cfg.flow, physics.beltrami_forcing_arrays, train_cfg
    )
    reports.write_metrics_csv(out / "transfer_metrics.csv", history, cfg.to_json())
    save_checkpoint(
        Checkpoint(
            architecture=cfg.architecture,
            seed=cfg.seed,
            parameters=params,
            status=history.status,
            config=cfg.to_dict(),
        ),
        out / "transfer_checkpoint.json",
    )
    _write_evaluation(cfg, arch, params, out, args.plots, history)
    print(
        f"transfer: warm status={history.status} epochs={history.epochs_used} "
        f"final_total={history.final_total:.6e}"
    )

    if args.cold_baseline:
        cold0 = net.init_parameters(arch, cfg.seed)
        cold_params, cold_history = training.train(
            arch, cold0, cset, cfg.flow, physics.beltrami_forcing_arrays, train_cfg
        )
        reports.write_metrics_csv(out / "cold_metrics.csv", cold_history, cfg.to_json())
        comparison = {
            "config": cfg.to_dict(),
            "warm": {
                "status": history.status,
                "epochs": history.epochs_used,
                "final_total": history.final_total,
            },
            "cold": {
                "status": cold_history.status,
                "epochs": cold_history.epochs_used,
                "final_total": cold_history.final_total,
            },
        }
        with open(out / "comparison.json", "w", encoding="utf-8") as fh:
            fh.write(json.dumps(comparison, sort_keys=True, indent=2) + "\n")
        print(
            f"transfer: cold status={cold_history.status} epochs={cold_history.epochs_used} "
            f"(warm/cold = {history.epochs_used}/{cold_history.epochs_used})"
        )
    if history.status == STATUS_DIVERGED:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    save_config(cfg, out / "config.json")
    ladder = sampling.hierarchical_datasets(cfg.dataset.levels, cfg.domain, cfg.seed)
    for cset in ladder:
        path = out / f"collocation_level_{cset.level}.csv"
        sampling.collocation_to_csv(cset, path)
        if args.plots:
            plots.plot_collocation(cset, cfg.domain, out / f"collocation_level_{cset.level}.svg")
    print(f"sample: wrote {len(ladder)} levels -> {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all_checks()
    for result in results:
        marker = "PASS" if result.passed else "FAIL"
        print(f"{marker} {result.name}: {result.detail}")
    if all(r.passed for r in results):
        print("verify: all checks passed")
        return EXIT_OK
    print("verify: checks failed", file=sys.stderr)
    return EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermopinn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network and write metrics, checkpoint, and errors")
    _add_common_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint against the analytical solution")
    p.add_argument("--checkpoint", required=True)
    _add_common_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("convergence-study", help="sweep thresholds and dataset sizes, fit rates")
    _add_common_options(p)
    p.set_defaults(func=cmd_convergence_study)

    p = sub.add_parser("architecture-study", help="sweep network sizes against dataset sizes")
    _add_common_options(p)
    p.set_defaults(func=cmd_architecture_study)

    p = sub.add_parser("transfer", help="warm-start training from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument(
        "--preset",
        choices=("transfer-half-domain", "transfer-re10"),
        help="built-in target configuration",
    )
    p.add_argument("--cold-baseline", action="store_true", help="also train from scratch and compare")
    _add_common_options(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("sample", help="generate and export the collocation point ladder")
    _add_common_options(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run the manufactured-solution and derivative oracles")
    _add_common_options(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalOverflowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, CheckpointError, ArchitectureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ThermopinnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
