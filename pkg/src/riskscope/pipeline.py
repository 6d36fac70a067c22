"""End-to-end analysis: data -> models -> feature selection -> embeddings -> report."""

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


from . import regress
from .cluster import select_k
from .dataset import generate_synthetic, load_csv, standardize, train_test_split
from .embed import (
    DEFAULT_ITERATIONS,
    DEFAULT_LEARNING_RATES,
    DEFAULT_PERPLEXITIES,
    grid_search_tsne,
    pca_fit,
    pca_transform,
    score_embedding,
)
from .exceptions import PipelineError
from .metrics import evaluate
from .select import rank_by_coefficients, rfe
from .svg import emit_histogram_svg, emit_scatter_svg

log = logging.getLogger(__name__)

REPORT_FORMAT = "riskscope.report"
REPORT_VERSION = 1

# Reference results measured on a proprietary retailer dataset; kept for side-by-side
# reading only, never used as targets.
REFERENCE_RESULTS = {
    "note": "reference values from a proprietary retailer dataset; not expected on synthetic data",
    "regression": {
        "KNN": {"MAE": 0.8455, "MSE": 1.173, "R2": 0.458},
        "Linear Regression": {"MAE": 0.8407, "MSE": 1.68, "R2": 0.2239},
        "Lasso Regression": {"MAE": 0.8567, "MSE": 1.26, "R2": 0.4178},
        "Ridge Regression": {"MAE": 0.8218, "MSE": 1.462, "R2": 0.3243},
        "SVR (Linear Kernel)": {"MAE": 0.8239, "MSE": 1.78, "R2": 0.1776},
        "SVR (RBF Kernel)": {"MAE": 0.6816, "MSE": 0.7948, "R2": 0.6328},
        "Decision Tree": {"MAE": 0.9744, "MSE": 1.68, "R2": 0.2239},
        "Random Forest": {"MAE": 0.7398, "MSE": 0.9143, "R2": 0.5776},
    },
    "best_k": 2,
    "tsne_top3": [
        {"Perplexity": 5, "Learning Rate": 10, "Iterations": 250, "Silhouette": 0.14943},
        {"Perplexity": 30, "Learning Rate": 10, "Iterations": 1000, "Silhouette": 0.13992},
        {"Perplexity": 30, "Learning Rate": 1000, "Iterations": 500, "Silhouette": 0.13929},
    ],
    "pca_silhouette": 0.06615,
    "rfe_silhouettes": {
        "Linear Regression": 0.06615,
        "SVR (Linear Kernel)": 0.12499,
        "Random Forest": 0.12209,
    },
}


@dataclass
class PipelineConfig:
    input: str | None = None
    synthetic_n: int = 991
    seed: int = 7
    test_fraction: float = 0.1
    models: tuple = regress.KINDS
    hyperparams: dict = field(default_factory=lambda: {"forest_n_trees": 50})
    knn_candidates: tuple = regress.DEFAULT_KNN_CANDIDATES
    alphas: tuple = regress.DEFAULT_ALPHAS
    rfe_models: tuple = ("ols", "svr_linear", "forest")
    rfe_target: int = 2
    tsne_perplexities: tuple = DEFAULT_PERPLEXITIES
    tsne_learning_rates: tuple = DEFAULT_LEARNING_RATES
    tsne_iterations: tuple = DEFAULT_ITERATIONS
    k_min: int = 2
    k_max: int = 10
    hist_bins: int = 12
    out_dir: str = "riskscope_out"

    def __post_init__(self):
        self.models = tuple(self.models)
        self.rfe_models = tuple(self.rfe_models)
        self.knn_candidates = tuple(int(k) for k in self.knn_candidates)
        self.alphas = tuple(float(a) for a in self.alphas)
        self.tsne_perplexities = tuple(float(v) for v in self.tsne_perplexities)
        self.tsne_learning_rates = tuple(float(v) for v in self.tsne_learning_rates)
        self.tsne_iterations = tuple(int(v) for v in self.tsne_iterations)
        self.validate()

    def validate(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        unknown = [m for m in self.models if m not in regress.KINDS]
        if unknown:
            raise ValueError(f"unknown model kind(s): {unknown}")
        if len(set(self.models)) != len(self.models):
            raise ValueError("models must not repeat")
        if not (self.tsne_perplexities and self.tsne_learning_rates and self.tsne_iterations):
            raise ValueError("t-SNE grids must be non-empty")
        if not 2 <= self.k_min <= self.k_max:
            raise ValueError("need 2 <= k_min <= k_max")
        if self.rfe_target < 1:
            raise ValueError("rfe_target must be >= 1")
        regress.Hyperparams.from_dict(self.hyperparams)

    def base_hyperparams(self):
        return regress.Hyperparams.from_dict({"forest_seed": self.seed, **self.hyperparams})

    def to_dict(self, include_output=True):
        d = asdict(self)
        if not include_output:
            d.pop("out_dir")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class PipelineReport:
    config: dict
    dataset: dict
    metrics: list
    coefficient_rankings: dict
    rfe_rankings: dict
    k_sweep: dict
    visualization: list
    tsne_grid: list
    plots: list
    files: list
    reference: dict = field(default_factory=lambda: REFERENCE_RESULTS)

    def to_dict(self):
        return {"format": REPORT_FORMAT, "version": REPORT_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != REPORT_FORMAT:
            raise ValueError("not a riskscope report")
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def metric_row(self, kind):
        for row in self.metrics:
            if row["model"] == kind:
                return row
        raise KeyError(kind)


class _Stage:
    """Context manager that tags any exception with the stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage: %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    return Path(path)


def _write_embedding_csv(path, points, risk, labels):
    return _write_rows(
        path,
        ["x", "y", "risk_factor", "cluster_label"],
        [[repr(float(p[0])), repr(float(p[1])), repr(float(r)), int(c)]
         for p, r, c in zip(points, risk, labels)],
    )


def _fmt_params(h, kind):
    keys = {
        "knn": ("knn_k",),
        "ols": (),
        "lasso": ("alpha",),
        "ridge": ("alpha",),
        "svr_linear": ("svr_c", "svr_epsilon"),
        "svr_rbf": ("svr_c", "svr_epsilon", "rbf_gamma"),
        "tree": ("tree_max_depth", "tree_min_leaf"),
        "forest": ("forest_n_trees", "tree_max_depth", "tree_min_leaf", "forest_seed"),
    }[kind]
    return {k: getattr(h, k) for k in keys}


def run_pipeline(config):
    """Execute the full analysis and write every artifact into ``config.out_dir``.

    On failure, files created by this run are removed and a
    :class:`PipelineError` naming the failed stage is raised.
    """
    out = Path(config.out_dir)
    created = []
    made_dir = not out.exists()
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = _run(config, out, created)
        created.extend(emit_report(report, out / "report.json"))
        return report
    except Exception as exc:
        for p in created:
            Path(p).unlink(missing_ok=True)
        if made_dir and out.exists() and not any(out.iterdir()):
            out.rmdir()
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError("report", exc) from exc


def _run(config, out, created):
    seed = config.seed
    base = config.base_hyperparams()

    def keep(path):
        created.append(Path(path))
        return Path(path).name

    with _Stage("load"):
        if config.input:
            raw = load_csv(config.input)
            source = str(config.input)
        else:
            raw = generate_synthetic(config.synthetic_n, seed)
            source = f"synthetic(n={config.synthetic_n}, seed={seed})"

    with _Stage("standardize"):
        data, _ = standardize(raw)
    with _Stage("split"):
        split = train_test_split(data, config.test_fraction, seed)
    train, test = split.train, split.test
    names = data.feature_names
    plots = []
    plots.append(keep(emit_histogram_svg(
        raw.y, config.hist_bins, out / "fig_histogram.svg",
        title="Distribution of risk factor", xlabel="risk factor", ylabel="employees",
    )))

    metrics, fitted = [], {}
    with _Stage("regression"):
        for kind in config.models:
            h = base
            if kind == "knn":
                cands = [k for k in config.knn_candidates if k <= len(train)]
                h = regress.tune_knn(train.x, train.y, cands, seed, base)
            elif kind in ("lasso", "ridge"):
                h = regress.tune_alpha(train.x, train.y, kind, config.alphas, seed, base)
            m = regress.fit(kind, train.x, train.y, h)
            fitted[kind] = m
            ev = evaluate(m, test)
            metrics.append({
                "model": kind,
                "label": regress.MODEL_LABELS[kind],
                "MAE": ev.mae,
                "MSE": ev.mse,
                "R2": ev.r2,
                "n_test": ev.n,
                "hyperparams": _fmt_params(h, kind),
                "converged": bool(m.diagnostics.get("converged", True)),
            })

    coef_rankings = {}
    with _Stage("coefficients"):
        for kind in config.models:
            if kind in regress.LINEAR_KINDS:
                r = rank_by_coefficients(fitted[kind], names)
                coef_rankings[kind] = r.to_rows()
                keep(r.write_csv(out / f"coef_{kind}.csv"))

    rfe_rankings, visualization = {}, []
    with _Stage("rfe"):
        target = min(config.rfe_target, len(names))
        for kind in config.rfe_models:
            if kind not in fitted:
                continue
            r = rfe(kind, fitted[kind].hyperparams, train, target)
            rfe_rankings[kind] = r.to_rows()
            keep(r.write_csv(out / f"rfe_{kind}.csv"))
            if target == 2:
                cols = r.top_indices(2)
                pts = data.x[:, cols]
                score, cl = score_embedding(pts, 2, seed)
                visualization.append({
                    "method": f"Top 2 RFE Features for {regress.MODEL_LABELS[kind]}",
                    "silhouette": score,
                })
                plots.append(keep(emit_scatter_svg(
                    pts, data.y, out / f"fig_rfe_{kind}.svg",
                    title=f"Top 2 RFE features: {regress.MODEL_LABELS[kind]}",
                    xlabel=names[cols[0]], ylabel=names[cols[1]],
                )))

    best_k, scores, grid_rows = _embedding_stages(config, data, out, keep, visualization, plots)

    files = sorted(p.name for p in created)
    return PipelineReport(
        config=config.to_dict(include_output=False),
        dataset={
            "source": source,
            "n": len(data),
            "n_features": len(names),
            "n_train": len(train),
            "n_test": len(test),
            "split_seed": seed,
            "risk_min": float(raw.y.min()),
            "risk_max": float(raw.y.max()),
        },
        metrics=metrics,
        coefficient_rankings=coef_rankings,
        rfe_rankings=rfe_rankings,
        k_sweep={"best_k": best_k, "scores": [{"k": k, "silhouette": s} for k, s in scores]},
        visualization=visualization,
        tsne_grid=grid_rows,
        plots=plots,
        files=files + ["report.json", "report.txt"],
    )


def _embedding_stages(config, data, out, keep, visualization, plots):
    """k sweep, PCA and the t-SNE grid; appends to ``visualization``/``plots``."""
    seed = config.seed
    with _Stage("k_sweep"):
        k_max = min(config.k_max, len(data) - 1)
        best_k, scores = select_k(data.x, config.k_min, k_max, seed)
        keep(_write_rows(out / "k_sweep.csv", ["k", "silhouette"],
                         [[k, repr(s)] for k, s in scores]))

    with _Stage("pca"):
        pca = pca_fit(data.x)
        emb = pca_transform(pca, data.x)
        score, cl = score_embedding(emb.points, best_k, seed)
        visualization.append({"method": "Principal Component Analysis", "silhouette": score})
        plots.append(keep(emit_scatter_svg(
            emb.points, data.y, out / "fig_pca.svg", centroids=cl.centroids,
            title="PCA projection", xlabel="principal component 1",
            ylabel="principal component 2",
        )))
        keep(_write_embedding_csv(out / "embedding_pca.csv", emb.points, data.y, cl.labels))

    with _Stage("tsne"):
        cells = grid_search_tsne(
            data.x, config.tsne_perplexities, config.tsne_learning_rates,
            config.tsne_iterations, seed, best_k,
        )
        if not cells:
            raise RuntimeError("every t-SNE grid cell failed")
        grid_rows = [dict(c.as_row(), final_kl=c.embedding.final_kl) for c in cells]
        keep(_write_rows(
            out / "tsne_grid.csv",
            ["Perplexity", "Learning Rate", "Iterations", "Silhouette"],
            [[repr(r["Perplexity"]), repr(r["Learning Rate"]), r["Iterations"],
              repr(r["Silhouette"])] for r in grid_rows],
        ))
        for rank, c in enumerate(cells[:3], start=1):
            p = c.params
            visualization.append({
                "method": f"t-SNE (perplexity={p.perplexity:g}, learning rate={p.learning_rate:g}, "
                          f"iterations={p.iterations})",
                "silhouette": c.silhouette,
            })
            plots.append(keep(emit_scatter_svg(
                c.embedding.points, data.y, out / f"fig_tsne_{rank}.svg",
                centroids=c.clustering.centroids,
                title=f"t-SNE #{rank}: perplexity {p.perplexity:g}, "
                      f"learning rate {p.learning_rate:g}, {p.iterations} iterations",
                xlabel="t-SNE 1", ylabel="t-SNE 2",
            )))
            keep(_write_embedding_csv(out / f"embedding_tsne_{rank}.csv",
                                      c.embedding.points, data.y, c.clustering.labels))

    return best_k, scores, grid_rows


def run_embedding(config):
    """PCA, k sweep and t-SNE grid only (no regression); returns the embedding summary dict."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    created, visualization, plots = [], [], []

    def keep(path):
        created.append(Path(path))
        return Path(path).name

    try:
        with _Stage("load"):
            raw = load_csv(config.input) if config.input else generate_synthetic(
                config.synthetic_n, config.seed)
        with _Stage("standardize"):
            data, _ = standardize(raw)
        best_k, scores, grid_rows = _embedding_stages(
            config, data, out, keep, visualization, plots)
    except Exception as exc:
        for p in created:
            Path(p).unlink(missing_ok=True)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError("embed", exc) from exc
    summary = {
        "k_sweep": {"best_k": best_k, "scores": [{"k": k, "silhouette": v} for k, v in scores]},
        "visualization": visualization,
        "tsne_grid": grid_rows,
        "plots": plots,
    }
    (out / "embedding_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


# -- report rendering --------------------------------------------------------------

def _by_model(table):
    # JSON round-trips sort keys, so render in the canonical model order
    return [(k, table[k]) for k in regress.KINDS if k in table]


def render_text(report):
    """Plain-text tables: regression metrics, rankings, k sweep, visualization scores."""
    lines = ["riskscope analysis report", "=" * 25, ""]
    ds = report.dataset
    lines.append(
        f"data: {ds['source']}  rows={ds['n']} features={ds['n_features']} "
        f"train={ds['n_train']} test={ds['n_test']}"
    )
    lines += ["", "Regression models (test set)", "-" * 28]
    lines.append(f"{'Models':<22}{'MAE':>10}{'MSE':>10}{'R2':>10}")
    for row in report.metrics:
        lines.append(f"{row['label']:<22}{row['MAE']:>10.4f}{row['MSE']:>10.4f}{row['R2']:>10.4f}")

    if report.coefficient_rankings:
        lines += ["", "Top 2 features by |coefficient|", "-" * 31]
        for kind, rows in _by_model(report.coefficient_rankings):
            top = ", ".join(r["feature"] for r in rows[:2])
            lines.append(f"{regress.MODEL_LABELS[kind]:<22}{top}")
    if report.rfe_rankings:
        lines += ["", "Recursive feature elimination survivors", "-" * 39]
        for kind, rows in _by_model(report.rfe_rankings):
            top = ", ".join(r["feature"] for r in rows if r["rank"] <= 2)
            lines.append(f"{regress.MODEL_LABELS[kind]:<22}{top}")

    lines += ["", "k-Means silhouette sweep", "-" * 24]
    for s in report.k_sweep["scores"]:
        mark = "  <- best" if s["k"] == report.k_sweep["best_k"] else ""
        lines.append(f"k={s['k']:<4}{s['silhouette']:>10.5f}{mark}")

    lines += ["", "Visualization methods by silhouette", "-" * 35]
    lines.append(f"{'Visualization Method':<70}{'Silhouette Score':>18}")
    for v in report.visualization:
        lines.append(f"{v['method']:<70}{v['silhouette']:>18.5f}")

    lines += ["", "t-SNE grid search", "-" * 17]
    lines.append(f"{'Perplexity':>12}{'Learning Rate':>16}{'Iterations':>12}{'Silhouette':>12}")
    for r in report.tsne_grid:
        lines.append(
            f"{r['Perplexity']:>12g}{r['Learning Rate']:>16g}{r['Iterations']:>12d}"
            f"{r['Silhouette']:>12.5f}"
        )

    ref = report.reference
    if ref:
        lines += ["", "Reference results (proprietary data, for comparison only)", "-" * 57]
        lines.append(f"{'Models':<22}{'MAE':>10}{'MSE':>10}{'R2':>10}")
        table = ref["regression"]
        for label in [l for l in regress.MODEL_LABELS.values() if l in table]:
            row = table[label]
            lines.append(f"{label:<22}{row['MAE']:>10.4f}{row['MSE']:>10.4f}{row['R2']:>10.4f}")
    lines += ["", "Plots: " + ", ".join(report.plots), ""]
    return "\n".join(lines)


def emit_report(report, path):
    """Write ``report.json`` at ``path`` and the text rendering next to it; returns both paths."""
    path = Path(path)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    txt = path.with_suffix(".txt")
    txt.write_text(render_text(report), encoding="utf-8")
    return [path, txt]


def load_report(path):
    return PipelineReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
