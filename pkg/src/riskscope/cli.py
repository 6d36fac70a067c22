"""Command-line entry point: ``riskscope {synth,run,embed,report}``.

Settings come from an optional ``key = value`` config file (``--config``);
command-line flags override it.
"""

import argparse
import logging
import sys
from pathlib import Path

from .dataset import generate_synthetic, write_csv
from .exceptions import RiskscopeError
from .pipeline import PipelineConfig, load_report, render_text, run_embedding, run_pipeline

LIST_KEYS = {
    "models": str,
    "rfe_models": str,
    "knn_candidates": int,
    "alphas": float,
    "tsne_perplexities": float,
    "tsne_learning_rates": float,
    "tsne_iterations": int,
}
SCALAR_KEYS = {
    "input": str,
    "synthetic_n": int,
    "seed": int,
    "test_fraction": float,
    "rfe_target": int,
    "k_min": int,
    "k_max": int,
    "hist_bins": int,
    "out_dir": str,
}


def _split_list(text, cast):
    return [cast(v.strip()) for v in str(text).split(",") if v.strip()]


def _parse_hparam(value):
    if value.lower() in ("none", "null"):
        return None
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    try:
        return int(value)
    except ValueError:
        return float(value)


def read_config_file(path):
    """Parse ``key = value`` lines (``#`` comments) into PipelineConfig keyword arguments.

    ``k_range = MIN:MAX`` sets both bounds and ``hp.<name> = value`` sets an
    estimator hyperparameter.
    """
    settings, hparams = {}, {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key.startswith("hp."):
            hparams[key[3:]] = _parse_hparam(value)
        elif key == "k_range":
            lo, hi = value.split(":")
            settings["k_min"], settings["k_max"] = int(lo), int(hi)
        elif key == "synthetic":
            settings["synthetic_n"] = int(value)
        elif key in LIST_KEYS:
            settings[key] = _split_list(value, LIST_KEYS[key])
        elif key in SCALAR_KEYS:
            settings[key] = SCALAR_KEYS[key](value)
        else:
            raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
    if hparams:
        settings["hyperparams"] = hparams
    return settings


def _add_data_flags(p):
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--input", help="CSV file with id columns, 28 features and risk_factor")
    p.add_argument("--synthetic", type=int, metavar="N", help="use N synthetic rows (default 991)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--tsne-perplexities", metavar="LIST")
    p.add_argument("--tsne-learning-rates", metavar="LIST")
    p.add_argument("--tsne-iterations", metavar="LIST")
    p.add_argument("--k-range", metavar="MIN:MAX")


def build_parser():
    parser = argparse.ArgumentParser(prog="riskscope", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p.add_argument("--n", type=int, default=991)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--output", "-o", required=True)

    p = sub.add_parser("run", help="full pipeline")
    _add_data_flags(p)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--models", metavar="LIST", help="comma-separated model kinds")
    p.add_argument("--rfe-models", metavar="LIST")
    p.add_argument("--hp", action="append", default=[], metavar="NAME=VALUE",
                   help="estimator hyperparameter override (repeatable)")

    p = sub.add_parser("embed", help="PCA, k sweep and t-SNE grid only")
    _add_data_flags(p)

    p = sub.add_parser("report", help="re-render a saved report.json as text")
    p.add_argument("report_json")
    p.add_argument("--output", "-o", help="write text here instead of stdout")
    return parser


def config_from_args(args):
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    flag_map = {
        "input": ("input", str),
        "synthetic": ("synthetic_n", int),
        "seed": ("seed", int),
        "out": ("out_dir", str),
        "test_fraction": ("test_fraction", float),
    }
    for attr, (key, cast) in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            settings[key] = cast(v)
    if getattr(args, "synthetic", None) is not None:
        settings.pop("input", None)
    for attr in ("models", "rfe_models", "tsne_perplexities", "tsne_learning_rates",
                 "tsne_iterations"):
        v = getattr(args, attr, None)
        if v is not None:
            settings[attr] = _split_list(v, LIST_KEYS[attr])
    if getattr(args, "k_range", None):
        lo, hi = args.k_range.split(":")
        settings["k_min"], settings["k_max"] = int(lo), int(hi)
    hp = dict(settings.get("hyperparams", {"forest_n_trees": 50}))
    for item in getattr(args, "hp", []) or []:
        name, _, value = item.partition("=")
        hp[name.strip()] = _parse_hparam(value.strip())
    settings["hyperparams"] = hp
    return PipelineConfig(**settings)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "synth":
            d, ids = generate_synthetic(args.n, args.seed, return_ids=True)
            write_csv(d, args.output, ids)
            print(f"wrote {len(d)} rows to {args.output}")
        elif args.command == "run":
            cfg = config_from_args(args)
            report = run_pipeline(cfg)
            print(render_text(report))
            print(f"artifacts in {cfg.out_dir}")
        elif args.command == "embed":
            cfg = config_from_args(args)
            summary = run_embedding(cfg)
            best = summary["tsne_grid"][0]
            print(f"best k = {summary['k_sweep']['best_k']}; best t-SNE cell "
                  f"perplexity={best['Perplexity']:g} learning rate={best['Learning Rate']:g} "
                  f"iterations={best['Iterations']} silhouette={best['Silhouette']:.5f}")
            print(f"artifacts in {cfg.out_dir}")
        elif args.command == "report":
            text = render_text(load_report(args.report_json))
            if args.output:
                Path(args.output).write_text(text, encoding="utf-8")
            else:
                print(text)
    except (RiskscopeError, ValueError, OSError) as exc:
        print(f"riskscope: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
