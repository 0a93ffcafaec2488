"""Command-line harness for data generation, training, sweeps, and reports.

Every subcommand resolves its configuration from (in increasing priority)
a manifest given via --from-manifest, a --config file, and explicit
flags; writes its delimited outputs and figures under --out-dir; and
finishes with a manifest.txt recording config, arguments, seeds, and
output digests so any run can be regenerated byte-for-byte.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 criterion
never met within the budget, 4 I/O or numerical failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .configfile import RunSettings, load_settings
from .data import dataset_statistics, load_dataset, sample_measurements, save_dataset
from .errors import CapacityError, ConfigError, CriterionError, NumericalError
from .estimator import estimate_energy, relative_error_bound
from .manifest import MANIFEST_NAME, RunManifest, read_manifest, write_csv
from .pruning import prune_loop
from .rbm import init_params, load_checkpoint, save_checkpoint
from .sweeps import (
    derive_seed,
    linear_fit,
    sweep_hidden_units,
    sweep_sample_complexity,
    train_until_criterion,
    weight_spectrum,
)
from .symmetry import bias_ratios, full_symmetry_report
from .tfim import MAX_EXACT_QUBITS, TfimSpec, solve_ground_state

EVAL_HEADER = "N,h_over_J,N_hidden,M,epoch,U_exact,U_mean,sigma,n,epsilon,converged,seed"
RECORD_HEADER = "N,h_over_J,N_hidden,M,seed,epochs_used,epsilon,converged"
PRUNE_HEADER = "iteration,delta,weights_remaining,finetune_epochs,epsilon,passed"

# subcommand argument schemas: name -> (converter, required, default)
_ARG_SPECS = {
    "gen-data": {
        "n_qubits": (int, True, None),
        "shots": (int, True, None),
        "field_ratio": (float, False, 1.0),
        "coupling": (float, False, 1.0),
        "sector": (str, False, "both"),
    },
    "train": {
        "data": (str, True, None),
        "hidden": (int, True, None),
        "field_ratio": (float, False, 1.0),
        "coupling": (float, False, 1.0),
    },
    "estimate": {
        "checkpoint": (str, True, None),
        "field_ratio": (float, False, 1.0),
        "coupling": (float, False, 1.0),
    },
    "sweep-nh": {},
    "sweep-m": {},
    "prune": {
        "checkpoint": (str, True, None),
        "data": (str, True, None),
        "field_ratio": (float, False, 1.0),
        "coupling": (float, False, 1.0),
    },
    "spectrum": {"checkpoint": (str, True, None)},
    "symmetry": {"checkpoint": (str, True, None)},
    "fit": {"input": (str, True, None)},
}


def _eval_rows(evals):
    for e in evals:
        yield (
            e.n_qubits, e.field_ratio, e.n_hidden, e.m, e.epoch, e.exact_energy,
            e.mean, e.sigma, e.n_samples, e.epsilon, e.converged, e.seed,
        )


def _record_rows(records):
    for r in records:
        yield (
            r.n_qubits, r.field_ratio, r.n_hidden, r.m, r.seed, r.epochs_used,
            r.epsilon, r.converged,
        )


def _ratio_tag(ratio: float) -> str:
    return f"{ratio:g}".replace(".", "p")


class _Run:
    """Resolved context for one subcommand invocation."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        manifest_cfg, manifest_args = {}, {}
        if args.from_manifest:
            stored = read_manifest(args.from_manifest)
            manifest_cfg = stored["config"]
            manifest_args = stored["args"]

        overrides = dict(manifest_cfg)
        if args.config:
            overrides = {}  # config file replaces manifest config wholesale
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.config:
            base = load_settings(args.config, overrides)
        else:
            base = load_settings(None, {**manifest_cfg, **overrides})
        self.settings: RunSettings = base

        spec = _ARG_SPECS[command]
        self.params = {}
        for key, (convert, required, default) in spec.items():
            given = getattr(args, key, None)
            if given is None and key in manifest_args:
                given = manifest_args[key]
            if given is None:
                if required:
                    raise ConfigError(f"{command}: missing required --{key.replace('_', '-')}")
                given = default
            self.params[key] = convert(given) if given is not None else None

        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.figures = not args.no_figures
        self.manifest = RunManifest(
            command,
            __version__,
            self.settings.seed,
            self.settings.as_items(),
            sorted((k, str(v)) for k, v in self.params.items() if v is not None),
        )

    def emit(self, path) -> Path:
        self.manifest.add_output(path)
        return Path(path)

    def close(self) -> None:
        self.manifest.finalize()
        self.manifest.write(self.out_dir)


def _spec_for(run: _Run, n_qubits: int) -> TfimSpec:
    coupling = run.params["coupling"]
    return TfimSpec(n_qubits, coupling, coupling * run.params["field_ratio"])


def _cmd_gen_data(run: _Run) -> int:
    spec = _spec_for(run, run.params["n_qubits"])
    gs = solve_ground_state(spec)
    ds = sample_measurements(
        gs, run.params["shots"], derive_seed(run.settings.seed, 10), run.params["sector"]
    )
    path = run.out_dir / "dataset.txt"
    save_dataset(ds, path)
    run.emit(path)
    run.emit(write_csv(
        run.out_dir / "energies.csv",
        "N,J,h,energy",
        [(spec.n_qubits, spec.coupling, spec.field, gs.energy)],
    ))
    stats = dataset_statistics(ds)
    print(f"wrote {ds.n_shots} shots at N={spec.n_qubits}, h/J={run.params['field_ratio']:g}")
    print(f"exact ground energy: {gs.energy:.10f}")
    print(f"mean magnetization (spin units): {stats.magnetization_mean:+.4f}")
    return 0


def _cmd_train(run: _Run) -> int:
    ds = load_dataset(run.params["data"])
    spec = _spec_for(run, ds.n_qubits)
    gs = solve_ground_state(spec)
    s = run.settings
    init = init_params(
        ds.n_qubits, run.params["hidden"], derive_seed(s.seed, 20), s.train.init_scale
    )
    outcome = train_until_criterion(
        init, ds.shots, spec, gs.energy, s.sweep.epoch_budget, s.sweep.check_every,
        s.sweep.threshold, s.estimator, s.train, derive_seed(s.seed, 21),
    )
    ckpt = run.out_dir / "checkpoint.txt"
    save_checkpoint(outcome.params, ckpt)
    run.emit(ckpt)
    rows = [
        (ds.n_qubits, run.params["field_ratio"], run.params["hidden"], ds.n_shots,
         epoch, gs.energy, est.mean, est.std_dev, est.n_samples, eps, conv,
         derive_seed(s.seed, 21))
        for epoch, est, eps, conv in outcome.evals
    ]
    run.emit(write_csv(run.out_dir / "evals.csv", EVAL_HEADER, rows))
    status = "converged" if outcome.converged else "did not converge"
    print(
        f"{status} after {outcome.epochs_used} epochs "
        f"(best epsilon {outcome.epsilon:.3e}, threshold {s.sweep.threshold:g})"
    )
    if not outcome.converged:
        raise CriterionError(
            f"criterion not met within {s.sweep.epoch_budget} epochs"
        )
    return 0


def _cmd_estimate(run: _Run) -> int:
    params, _ = load_checkpoint(run.params["checkpoint"])
    spec = _spec_for(run, params.n_visible)
    exact_u = solve_ground_state(spec).energy
    s = run.settings
    est = estimate_energy(
        params, spec, replace(s.estimator, seed=derive_seed(s.seed, 30))
    )
    bound = relative_error_bound(
        est, exact_u, s.sweep.threshold, s.estimator.confidence_c
    )
    row = (
        params.n_visible, run.params["field_ratio"], params.n_hidden, 0, 0,
        exact_u, est.mean, est.std_dev, est.n_samples, bound.epsilon,
        bound.converged, derive_seed(s.seed, 30),
    )
    run.emit(write_csv(run.out_dir / "evals.csv", EVAL_HEADER, [row]))
    print(f"exact energy:     {exact_u:.10f}")
    print(f"estimated energy: {est.mean:.10f} +- {est.std_error:.2e} (1 sigma)")
    print(f"epsilon: {bound.epsilon:.3e}  converged: {bound.converged}")
    return 0


def _write_sweep_outputs(run: _Run, result, prefix: str, minima_header: str) -> None:
    run.emit(write_csv(
        run.out_dir / f"{prefix}_records.csv", RECORD_HEADER, _record_rows(result.records)
    ))
    run.emit(write_csv(
        run.out_dir / f"{prefix}_evals.csv", EVAL_HEADER, _eval_rows(result.evals)
    ))
    minima_rows = [
        (n, ratio, float("nan") if val is None else val)
        for (n, ratio), val in sorted(result.minima.items())
    ]
    run.emit(write_csv(run.out_dir / f"{prefix}_minima.csv", minima_header, minima_rows))


def _cmd_sweep_nh(run: _Run) -> int:
    s = run.settings
    result = sweep_hidden_units(s.sweep, s.train, s.estimator, s.seed, s.workers)
    _write_sweep_outputs(run, result, "nh", "N,h_over_J,minimal_N_hidden")
    for (n, ratio), params in sorted(result.trained.items()):
        path = run.out_dir / f"model_N{n}_r{_ratio_tag(ratio)}.txt"
        save_checkpoint(params, path)
        run.emit(path)
    fits = {}
    for ratio in s.sweep.field_ratios:
        pts = [
            (n, val) for (n, r), val in result.minima.items()
            if r == ratio and val is not None
        ]
        if len({p[0] for p in pts}) >= 2:
            fits[ratio] = linear_fit(pts)
    if fits:
        run.emit(write_csv(
            run.out_dir / "nh_fit.csv",
            "h_over_J,slope,intercept,residual_norm",
            [(r, f.slope, f.intercept, f.residual_norm) for r, f in sorted(fits.items())],
        ))
    if run.figures:
        from .figures import plot_minimal_hidden_units

        run.emit(plot_minimal_hidden_units(
            result.minima, fits, run.out_dir / "minimal_hidden_units.png"
        ))
    for (n, ratio), val in sorted(result.minima.items()):
        shown = "grid exhausted" if val is None else str(val)
        print(f"N={n:3d}  h/J={ratio:g}  minimal hidden units: {shown}")
    if all(v is None for v in result.minima.values()):
        raise CriterionError("no grid point met the criterion")
    return 0


def _cmd_sweep_m(run: _Run) -> int:
    s = run.settings
    result = sweep_sample_complexity(s.sweep, s.train, s.estimator, s.seed, s.workers)
    _write_sweep_outputs(run, result, "m", "N,h_over_J,minimal_M")
    if run.figures:
        from .figures import plot_sample_complexity

        run.emit(plot_sample_complexity(
            result.minima, run.out_dir / "sample_complexity.png"
        ))
    for (n, ratio), val in sorted(result.minima.items()):
        shown = "cap reached" if val is None else f"{val:g}"
        print(f"N={n:3d}  h/J={ratio:g}  minimal training samples: {shown}")
    if all(v is None for v in result.minima.values()):
        raise CriterionError("no grid point met the criterion")
    return 0


def _cmd_prune(run: _Run) -> int:
    params, mask = load_checkpoint(run.params["checkpoint"])
    ds = load_dataset(run.params["data"])
    spec = _spec_for(run, params.n_visible)
    s = run.settings
    report = prune_loop(
        params, ds.shots, spec, s.prune,
        replace(s.estimator, seed=derive_seed(s.seed, 40)), s.train, mask,
    )
    rows = [
        (it.iteration, it.delta, it.weights_remaining, it.finetune_epochs,
         it.epsilon, it.passed)
        for it in report.iterations
    ]
    run.emit(write_csv(run.out_dir / "prune.csv", PRUNE_HEADER, rows))
    ckpt = run.out_dir / "pruned_checkpoint.txt"
    save_checkpoint(report.final_model, ckpt, report.final_mask)
    run.emit(ckpt)
    if run.figures and report.iterations:
        from .figures import plot_prune_history

        run.emit(plot_prune_history(report.iterations, run.out_dir / "prune_history.png"))
    total = report.final_model.weights.size
    print(
        f"kept {report.final_nonzero_weights}/{total} weights over "
        f"{len(report.iterations)} iterations (initial epsilon {report.initial_epsilon:.3e})"
    )
    return 0


def _cmd_spectrum(run: _Run) -> int:
    params, _ = load_checkpoint(run.params["checkpoint"])
    mags = weight_spectrum(params)
    run.emit(write_csv(
        run.out_dir / "spectrum.csv",
        "rank,magnitude",
        ((i + 1, m) for i, m in enumerate(mags)),
    ))
    if run.figures:
        from .figures import plot_weight_spectrum

        run.emit(plot_weight_spectrum(mags, run.out_dir / "weight_spectrum.png"))
    top = max(1, int(round(0.2 * mags.size)))
    total = mags.sum()
    share = mags[:top].sum() / total if total > 0 else float("nan")
    print(f"{mags.size} weights; top 20% carry {100 * share:.1f}% of total magnitude")
    return 0


def _cmd_symmetry(run: _Run) -> int:
    params, _ = load_checkpoint(run.params["checkpoint"])
    if params.n_visible <= MAX_EXACT_QUBITS:
        report = full_symmetry_report(params)
    else:
        report = bias_ratios(params)
    rows = [("alpha", i, v) for i, v in enumerate(report.alpha)]
    rows += [("beta", j, v) for j, v in enumerate(report.beta)]
    rows.append(("z2_deviation", "", report.z2_deviation))
    run.emit(write_csv(run.out_dir / "symmetry.csv", "kind,index,value", rows))
    if run.figures:
        from .figures import plot_bias_ratios

        run.emit(plot_bias_ratios(
            report.alpha, report.beta, run.out_dir / "bias_ratios.png"
        ))
    defined = report.alpha[~np.isnan(report.alpha)]
    if defined.size:
        print(f"median defined visible ratio: {np.median(defined):+.3f} (identity: -2)")
    print(f"max |p(v) - p(v-bar)|: {report.z2_deviation:.3e}")
    return 0


def _cmd_fit(run: _Run) -> int:
    path = Path(run.params["input"])
    lines = path.read_text().splitlines()
    if len(lines) < 2:
        raise ConfigError(f"{path}: no data rows")
    groups: dict = {}
    for line in lines[1:]:
        n_text, ratio_text, value_text = line.split(",")
        value = float(value_text)
        if np.isnan(value):
            continue
        groups.setdefault(float(ratio_text), []).append((float(n_text), value))
    fits = {
        ratio: linear_fit(pts)
        for ratio, pts in sorted(groups.items())
        if len({p[0] for p in pts}) >= 2
    }
    if not fits:
        raise ConfigError(f"{path}: fewer than two fittable points per series")
    run.emit(write_csv(
        run.out_dir / "fit.csv",
        "h_over_J,slope,intercept,residual_norm",
        [(r, f.slope, f.intercept, f.residual_norm) for r, f in sorted(fits.items())],
    ))
    if run.figures:
        from .figures import plot_minimal_hidden_units

        minima = {
            (n, ratio): val for ratio, pts in groups.items() for n, val in pts
        }
        run.emit(plot_minimal_hidden_units(minima, fits, run.out_dir / "scaling_fit.png"))
    for ratio, f in sorted(fits.items()):
        print(
            f"h/J={ratio:g}: slope {f.slope:+.4f}, intercept {f.intercept:+.4f}, "
            f"residual {f.residual_norm:.3e}"
        )
    return 0


_HANDLERS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "estimate": _cmd_estimate,
    "sweep-nh": _cmd_sweep_nh,
    "sweep-m": _cmd_sweep_m,
    "prune": _cmd_prune,
    "spectrum": _cmd_spectrum,
    "symmetry": _cmd_symmetry,
    "fit": _cmd_fit,
}

_HELP = {
    "gen-data": "sample measurement shots from an exact ground state",
    "train": "train a machine on a dataset until the criterion holds",
    "estimate": "evaluate a checkpoint's energy and criterion",
    "sweep-nh": "minimal hidden-unit sweep over the configured grid",
    "sweep-m": "minimal training-set-size sweep over the configured grid",
    "prune": "iterative magnitude pruning with fine-tuning",
    "spectrum": "sorted weight-magnitude report for a checkpoint",
    "symmetry": "bias-ratio and flip-invariance report for a checkpoint",
    "fit": "least-squares line through a minima table",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value settings file")
    common.add_argument("--seed", type=int, help="root RNG seed (default 0)")
    common.add_argument("--out-dir", default="runs", help="output directory")
    common.add_argument("--workers", type=int, help="parallel grid workers (default 1)")
    common.add_argument(
        "--no-figures", action="store_true", help="skip rendering PNG figures"
    )
    common.add_argument(
        "--from-manifest", metavar="FILE",
        help="re-run with the config and arguments recorded in a manifest",
    )

    parser = argparse.ArgumentParser(
        prog="rbmtomo",
        description="Measure hidden-unit and sample requirements for "
        "energy-based reconstruction of Ising ground states.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, spec in _ARG_SPECS.items():
        p = sub.add_parser(command, parents=[common], help=_HELP[command])
        for key, (convert, _required, default) in spec.items():
            flag = "--" + key.replace("_", "-")
            if key == "sector":
                p.add_argument(flag, choices=["both", "positive"], default=None)
            else:
                p.add_argument(flag, type=convert, default=None,
                               help=f"(default {default})" if default is not None else None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _Run(args.command, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    try:
        code = _HANDLERS[args.command](run)
    except (ConfigError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    except CriterionError as exc:
        print(f"criterion failure: {exc}", file=sys.stderr)
        code = 3
    except (OSError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 4
    finally:
        try:
            run.close()
        except OSError as exc:
            print(f"error writing manifest: {exc}", file=sys.stderr)
            code = 4
    return code


if __name__ == "__main__":
    sys.exit(main())
