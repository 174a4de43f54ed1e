"""Command-line entry point: ``fcpipe {simulate,extract,classify,report}``.

Exit status is 0 on success, 1 for data/pipeline errors and 2 for usage or
filesystem errors. Diagnostics go to stderr; results go to files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .classify import KINDS, CvReport, loocv, tpr_table
from .errors import ClassUnderpopulated, MalformedReport, PipelineError
from .features import read_dataset, write_dataset
from .ingest import load_manifest
from .pipeline import (
    check_manifest_cohort,
    extract_dataset,
    load_pipeline_config,
    run_meta,
)
from .simulate import load_spec, simulate_cohort, spec_to_dict, write_cohort

log = logging.getLogger("fcpipe")


class UsageFailure(Exception):
    """Raised for problems that map to exit status 2."""


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_writable_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".fcpipe-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageFailure(f"cannot write to {path}: {exc.strerror or exc}") from None


def _overrides(args) -> dict:
    kv = {}
    if getattr(args, "detrend_order", None) is not None:
        kv["detrend_order"] = args.detrend_order
    if getattr(args, "bandpass", None) is not None:
        kv["bandpass"] = args.bandpass
    if getattr(args, "global_signal", None) is not None:
        kv["global_signal"] = "true" if args.global_signal else "false"
    if getattr(args, "threshold", None) is not None:
        kv["threshold"] = args.threshold
    if getattr(args, "classifier", None) is not None:
        kv["classifier"] = args.classifier
    if getattr(args, "seed", None) is not None:
        kv["seed"] = str(args.seed)
    if getattr(args, "fpr_targets", None) is not None:
        kv["fpr_targets"] = args.fpr_targets
    return kv


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, rng_seed=args.seed)
    out_dir = Path(args.out_dir)
    _ensure_writable_dir(out_dir)
    cohort = simulate_cohort(spec, jobs=args.jobs)
    try:
        manifest_path = write_cohort(cohort, out_dir)
        spec_lines = [f"{k}={v!r}" for k, v in sorted(spec_to_dict(spec).items())]
        _write_json(out_dir / "run_meta.json", run_meta(spec_lines, seed=int(spec.rng_seed)))
    except OSError as exc:
        raise UsageFailure(f"cannot write cohort to {out_dir}: {exc}") from None
    print(
        f"simulated {len(cohort.series)} subjects ({spec.n_per_group} per group), "
        f"R={spec.regions}, T={spec.timepoints}, tr={spec.tr_seconds}s -> {manifest_path}"
    )
    if cohort.ground_truth["psd_repaired"]:
        log.warning("group 1 covariance was projected back to PSD; planted deltas are perturbed")
    return 0


def cmd_extract(args) -> int:
    cfg = load_pipeline_config(args.config, _overrides(args))
    manifest = load_manifest(args.manifest)
    check_manifest_cohort(manifest)
    ds, results = extract_dataset(manifest, cfg, jobs=args.jobs, keep_going=args.keep_going)
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_dataset(ds, out)
        meta = run_meta(cfg.extraction_lines())
        meta["densities"] = {r.subject_id: r.density for r in results if r.error is None}
        meta["failed"] = {r.subject_id: r.error for r in results if r.error is not None}
        _write_json(out.with_name(out.name + ".meta.json"), meta)
    except OSError as exc:
        raise UsageFailure(f"cannot write {out}: {exc}") from None
    log.info("wrote %d x %d dataset to %s", ds.n_subjects, len(ds.feature_names), out)
    return 0


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_classify(args) -> int:
    cfg = load_pipeline_config(args.config, _overrides(args))
    ds = read_dataset(args.dataset)
    report = loocv(ds, cfg.classifier, cfg.fpr_targets, jobs=args.jobs)
    report.name = args.name or Path(args.dataset).stem
    report.run_meta = run_meta(cfg.to_lines(), seed=int(cfg.classifier.rng_seed))
    out = Path(args.report)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.to_json(), encoding="utf-8")
        _sidecar(out, ".tpr.txt").write_text(tpr_table([report]), encoding="utf-8")
        if not args.no_figures:
            from .plotting import plot_roc

            plot_roc([report], _sidecar(out, ".roc.png"))
    except OSError as exc:
        raise UsageFailure(f"cannot write {out}: {exc}") from None
    log.info("%s: LOOCV accuracy %.3f +/- %.3f (binomial SE)", report.name, report.accuracy,
             report.accuracy_dispersion)
    return 0


def load_report(path) -> CvReport:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageFailure(f"report not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise MalformedReport(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise MalformedReport(f"{path}: expected a JSON object")
    rep = CvReport.from_dict(data, source=str(path))
    rep.name = rep.name or path.stem
    return rep


def cmd_report(args) -> int:
    reports = [load_report(p) for p in args.reports]
    names = args.names.split(",") if args.names else None
    if names is not None and len(names) != len(reports):
        raise UsageFailure("--names must list one name per report")
    table = tpr_table(reports, names)
    if args.out:
        out = Path(args.out)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(table, encoding="utf-8")
            if not args.no_figures:
                from .plotting import plot_accuracy, plot_roc

                plot_roc(reports, _sidecar(out, ".roc.png"), names)
                plot_accuracy(reports, _sidecar(out, ".accuracy.png"), names)
        except OSError as exc:
            raise UsageFailure(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(table)
    return 0


def _add_denoise_flags(p):
    g = p.add_argument_group("pipeline overrides (win over --config)")
    g.add_argument("--detrend-order", metavar="K", help="polynomial detrend order, or 'none'")
    g.add_argument("--bandpass", metavar="LOW,HIGH", help="band-pass limits in Hz, or 'none'")
    g.add_argument("--global-signal", dest="global_signal", action="store_true", default=None,
                   help="regress out the global signal")
    g.add_argument("--no-global-signal", dest="global_signal", action="store_false")
    g.add_argument("--threshold", metavar="MODE:VALUE",
                   help="tau:<r> (edge iff correlation > r) or density:<d>")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="parallel workers")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the RNG seed")
    common.add_argument("--config", default=argparse.SUPPRESS, help="pipeline key=value config file")

    parser = argparse.ArgumentParser(prog="fcpipe", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"fcpipe {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic two-group cohort")
    p.add_argument("spec", help="simulation spec (key=value file)")
    p.add_argument("out_dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="time series -> graph feature dataset")
    p.add_argument("manifest")
    p.add_argument("out", help="dataset CSV to write")
    p.add_argument("--keep-going", action="store_true", help="skip failing subjects instead of stopping")
    _add_denoise_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("classify", parents=[common], help="leave-one-out evaluation of a dataset")
    p.add_argument("dataset")
    p.add_argument("report", help="report JSON to write (a .tpr.txt table and .roc.png go alongside)")
    p.add_argument("--classifier", choices=KINDS)
    p.add_argument("--fpr-targets", metavar="F1,F2,...")
    p.add_argument("--name", help="arm name recorded in the report")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", parents=[common], help="side-by-side table of several reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", help="write the table here (figures alongside) instead of stdout")
    p.add_argument("--names", help="comma-separated column names")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("jobs", 1), ("seed", None), ("config", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")

    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.setLevel(logging.WARNING if args.quiet else logging.INFO)
    try:
        return args.func(args)
    except UsageFailure as exc:
        print(f"fcpipe: error: {exc}", file=sys.stderr)
        return 2
    except ClassUnderpopulated as exc:
        print(f"fcpipe: error: ClassUnderpopulated: {exc}\n"
              "hint: leave-one-out needs at least 4 subjects with 2 or more in each class",
              file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"fcpipe: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
