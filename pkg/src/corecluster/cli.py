"""Command-line front end.

Subcommands: simulate, preprocess, cluster, sweep, evaluate, enrich, bench.
Exit codes: 0 success, 1 runtime/data error, 2 usage error. All commands are
deterministic given --seed; the only wall-clock-dependent output is the
timing fields of the run manifest.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import (
    cut_dendrogram,
    select_k_by_dunn,
    spectral_clustering,
    wgcna_lite,
    write_dendrogram,
    write_fit_report,
)
from .core import (
    Partition,
    csd,
    read_partition,
    sweep,
    sweep_summary,
    write_cores,
    write_partition,
)
from .expression import (
    ExpressionMatrix,
    filter_variables,
    knn_impute,
    load_expression,
    save_expression,
    similarity_matrix,
)
from .graph import SimilarityMatrix, load_similarity
from .ioutils import fmt_float, read_tsv_rows, sha256_file, write_text_atomic
from .metrics import (
    AnnotationSet,
    adjusted_rand,
    dissimilarity_from_similarity,
    dunn,
    fom,
    hypergeom_enrich,
    modularity,
    silhouette,
)
from .simulate import SCENARIOS, ScenarioConfig, _build, write_labels

JOBS_ENV = "CORECLUSTER_JOBS"


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _parse_range(text: str, name: str, minimum: int) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"{name} must look like A:B, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"{name} must contain integers, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"{name} must be ascending, got {text!r}")
    if lo < minimum:
        raise UsageError(f"{name} lower bound must be >= {minimum}")
    return lo, hi


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated integer list") from None
    if not vals:
        raise UsageError(f"{name} is empty")
    return vals


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated number list") from None
    if not vals:
        raise UsageError(f"{name} is empty")
    return vals


class _Manifest:
    def __init__(self, argv: list[str]):
        self.rows: list[tuple[str, str]] = [
            ("command", "corecluster " + " ".join(argv)),
            ("version", __version__),
            ("created_utc", datetime.now(timezone.utc).isoformat()),
        ]
        self._t0 = time.perf_counter()
        self._stage_start = self._t0

    def add(self, key: str, value) -> None:
        self.rows.append((key, str(value)))

    def add_input(self, path) -> None:
        self.rows.append((f"input:{Path(path).name}", sha256_file(path)))

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.rows.append((f"wall_time_{name}", fmt_float(now - self._stage_start)))
        self._stage_start = now

    def write(self, out_dir) -> None:
        self.rows.append(
            ("wall_time_total", fmt_float(time.perf_counter() - self._t0))
        )
        text = "\n".join(f"{k}\t{v}" for k, v in self.rows) + "\n"
        write_text_atomic(Path(out_dir) / "manifest.tsv", text)


def _ensure_out(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- simulate


def cmd_simulate(args, argv) -> int:
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    manifest.add("seed", args.seed)
    sizes = tuple(_parse_int_list(args.sizes, "--sizes"))
    cfg = ScenarioConfig(
        scenario=args.scenario,
        seed=args.seed,
        n_samples=args.samples,
        n_communities=args.communities,
        size_choices=sizes,
        replicate_count=args.replicates,
    )
    width = len(str(max(0, args.replicates - 1)))
    width = max(width, 3)
    for rep in range(args.replicates):
        ds = _build(cfg, rep)
        stem = f"{args.scenario}_rep{rep:0{width}d}"
        save_expression(ds.x, out / f"{stem}_expression.tsv")
        write_labels(ds, out / f"{stem}_labels.tsv")
    manifest.stage("generate")
    manifest.add("scenario", args.scenario)
    manifest.add("replicates", args.replicates)
    manifest.write(out)
    print(f"wrote {args.replicates} dataset pair(s) to {out}")
    return 0


# -------------------------------------------------------------- preprocess


def cmd_preprocess(args, argv) -> int:
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    manifest.add_input(args.input)
    x = load_expression(args.input)
    manifest.stage("load")
    x, filter_report = filter_variables(x, args.max_missing_frac, args.min_sd)
    manifest.stage("filter")
    x, impute_report = knn_impute(x, args.knn_k)
    manifest.stage("impute")
    save_expression(x, out / "expression.tsv")
    report_text = (
        filter_report.to_text()
        + f"imputed_cells\t{impute_report.imputed_cells}\n"
        + f"variables_kept\t{x.p}\n"
    )
    write_text_atomic(out / "preprocess_report.txt", report_text)
    manifest.add("variables_kept", x.p)
    manifest.write(out)
    print(f"kept {x.p} variables; wrote {out / 'expression.tsv'}")
    return 0


# ----------------------------------------------------------------- cluster


def _load_similarity_input(args, manifest: _Manifest) -> SimilarityMatrix:
    manifest.add_input(args.input)
    if args.similarity == "precomputed":
        w = load_similarity(args.input)
    else:
        x = load_expression(args.input)
        w = similarity_matrix(x, method=args.similarity)
    manifest.stage("similarity")
    return w


def cmd_cluster(args, argv) -> int:
    if args.algo == "csd" and args.min_core_size is None:
        raise UsageError("--algo csd requires --min-core-size")
    if args.algo == "spectral":
        if (args.k is None) == (args.k_range is None):
            raise UsageError(
                "--algo spectral requires exactly one of --k or --k-range"
            )
        if args.restarts is None:
            raise UsageError("--algo spectral requires --restarts")
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    w = _load_similarity_input(args, manifest)
    labels = w.node_labels()
    if args.algo == "csd":
        partition, family = csd(w, args.min_core_size)
        write_partition(partition, labels, out / "partition.tsv", family)
        write_cores(family, labels, out / "cores.tsv")
        manifest.add("min_core_size", args.min_core_size)
        manifest.add("clusters", partition.k)
        manifest.add("core_nodes", family.p - len(family.outer))
    elif args.algo == "spectral":
        manifest.add("seed", args.seed)
        if args.k is not None:
            partition = spectral_clustering(w, args.k, args.restarts, args.seed)
            manifest.add("k", args.k)
        else:
            k_lo, k_hi = _parse_range(args.k_range, "--k-range", 2)
            k_sel, partition = select_k_by_dunn(
                w, k_lo, k_hi, args.restarts, args.seed
            )
            manifest.add("k_range", f"{k_lo}:{k_hi}")
            manifest.add("k_selected", k_sel)
        write_partition(partition, labels, out / "partition.tsv")
        manifest.add("clusters", partition.k)
    else:  # wgcna
        grid = _parse_float_list(args.beta_grid, "--beta-grid")
        result = wgcna_lite(w, grid, args.cut_height, args.min_size)
        write_partition(result.partition, labels, out / "partition.tsv")
        write_dendrogram(result.dendrogram, out / "dendrogram.tsv")
        write_fit_report(result.fit_report, out / "soft_threshold.tsv")
        manifest.add("beta", result.beta)
        manifest.add("cut_height", args.cut_height)
        manifest.add("min_size", args.min_size)
        manifest.add("clusters", result.partition.k)
        manifest.add("unclustered", result.partition.n_unclustered())
    manifest.stage("cluster")
    manifest.write(out)
    print(f"wrote partition to {out / 'partition.tsv'}")
    return 0


# ------------------------------------------------------------------- sweep


def _write_sweep_table(rows: list[tuple], header: list[str], out: Path) -> None:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append(
            "\t".join("" if v is None else (fmt_float(v) if isinstance(v, float) else str(v)) for v in row)
        )
    write_text_atomic(out / "sweep.tsv", "\n".join(lines) + "\n")


def cmd_sweep(args, argv) -> int:
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    w = _load_similarity_input(args, manifest)
    labels = w.node_labels()
    if args.algo == "csd":
        if args.n_range is None:
            raise UsageError("--algo csd requires --n-range")
        lo, hi = _parse_range(args.n_range, "--n-range", 1)
        entries = sweep(w, list(range(lo, hi + 1)))
        rows = sweep_summary(entries)
        for e in entries:
            write_partition(
                e.partition, labels, out / f"partition_n{e.n}.tsv", e.cores
            )
        _write_sweep_table(
            rows, ["n", "clusters", "core_nodes", "ari_consecutive"], out
        )
    elif args.algo == "spectral":
        if args.k_range is None:
            raise UsageError("--algo spectral requires --k-range")
        if args.restarts is None:
            raise UsageError("--algo spectral requires --restarts")
        lo, hi = _parse_range(args.k_range, "--k-range", 2)
        rows = []
        prev = None
        for k in range(lo, hi + 1):
            part = spectral_clustering(w, k, args.restarts, args.seed)
            write_partition(part, labels, out / f"partition_k{k}.tsv")
            ari = None if prev is None else adjusted_rand(prev, part)
            rows.append((k, part.k, ari))
            prev = part
        _write_sweep_table(rows, ["k", "clusters", "ari_consecutive"], out)
    else:  # wgcna
        if args.min_size_range is None:
            raise UsageError("--algo wgcna requires --min-size-range")
        lo, hi = _parse_range(args.min_size_range, "--min-size-range", 1)
        grid = _parse_float_list(args.beta_grid, "--beta-grid")
        base = wgcna_lite(w, grid, args.cut_height, lo)
        write_dendrogram(base.dendrogram, out / "dendrogram.tsv")
        rows = []
        prev = None
        for size in range(lo, hi + 1):
            part = cut_dendrogram(base.dendrogram, args.cut_height, size)
            write_partition(part, labels, out / f"partition_m{size}.tsv")
            ari = None if prev is None else adjusted_rand(prev, part)
            rows.append((size, part.k, part.n_unclustered(), ari))
            prev = part
        _write_sweep_table(
            rows, ["min_size", "clusters", "unclustered", "ari_consecutive"], out
        )
        manifest.add("beta", base.beta)
    manifest.stage("sweep")
    manifest.write(out)
    print(f"wrote sweep table to {out / 'sweep.tsv'}")
    return 0


# ---------------------------------------------------------------- evaluate


def _partition_from_file(path) -> tuple[list[str], Partition]:
    ids, raw = read_partition(path)
    positive = np.unique(raw[raw > 0])
    remap = {0: 0}
    remap.update({int(v): i + 1 for i, v in enumerate(positive)})
    labels = np.array([remap[int(v)] for v in raw], dtype=np.int64)
    return ids, Partition(labels, len(positive))


def _align_to(ids: list[str], other_ids: list[str], what: str) -> np.ndarray:
    index = {v: i for i, v in enumerate(other_ids)}
    missing = [v for v in ids if v not in index]
    extra = [v for v in other_ids if v not in set(ids)]
    if missing or extra:
        raise ValueError(
            f"{what}: node sets differ from the partition "
            f"({len(missing)} missing, e.g. {missing[:3]}; "
            f"{len(extra)} extra, e.g. {extra[:3]})"
        )
    return np.array([index[v] for v in ids], dtype=np.int64)


def cmd_evaluate(args, argv) -> int:
    if args.truth is None and args.similarity is None and args.expression is None:
        raise UsageError(
            "no computable metric: supply --truth (adjusted Rand), --similarity "
            "(Dunn, silhouette, modularity), and/or --expression (figure of merit)"
        )
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    manifest.add_input(args.partition)
    ids, partition = _partition_from_file(args.partition)
    results: list[tuple[str, float]] = []
    if args.truth is not None:
        manifest.add_input(args.truth)
        t_ids, truth = _partition_from_file(args.truth)
        order = _align_to(ids, t_ids, "truth labels")
        truth_aligned = Partition(truth.labels[order], truth.k)
        results.append(
            ("adjusted_rand", adjusted_rand(partition, truth_aligned, args.ari_unclustered))
        )
    if args.similarity is not None:
        manifest.add_input(args.similarity)
        w = load_similarity(args.similarity)
        if w.p != partition.p:
            raise ValueError(
                f"similarity matrix is {w.p}x{w.p} but the partition has "
                f"{partition.p} nodes"
            )
        if w.labels is not None:
            order = _align_to(ids, list(w.labels), "similarity matrix")
            entries = w.entries[np.ix_(order, order)]
            w = SimilarityMatrix(entries, tuple(ids))
        d = dissimilarity_from_similarity(w)
        results.append(("dunn", dunn(d, partition)))
        results.append(("silhouette", silhouette(d, partition)[1]))
        results.append(("modularity", modularity(w, partition)))
    if args.expression is not None:
        manifest.add_input(args.expression)
        x = load_expression(args.expression)
        order = _align_to(ids, list(x.variable_ids), "expression matrix")
        x = ExpressionMatrix(
            x.values[:, order],
            x.mask[:, order],
            tuple(ids),
            x.sample_ids,
        )
        results.append(("fom", fom(x, partition)))
    manifest.stage("evaluate")
    tsv = "metric\tvalue\n" + "".join(
        f"{k}\t{fmt_float(v)}\n" for k, v in results
    )
    write_text_atomic(out / "metrics.tsv", tsv)
    summary = "".join(f"{k}: {fmt_float(v)}\n" for k, v in results)
    write_text_atomic(out / "summary.txt", summary)
    manifest.write(out)
    sys.stdout.write(summary)
    return 0


# ------------------------------------------------------------------ enrich


def _load_annotations(path) -> AnnotationSet:
    rows = read_tsv_rows(path)
    if len(rows) < 2:
        raise ValueError(f"{path}: annotation file has no data rows")
    universe: set[str] = set()
    terms: dict[str, set[str]] = {}
    names: dict[str, str] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ValueError(f"{path}: line {lineno} has fewer than 2 columns")
        vid, term = row[0], row[1]
        universe.add(vid)
        if term != "":
            terms.setdefault(term, set()).add(vid)
            if len(row) >= 3 and row[2]:
                names[term] = row[2]
    return AnnotationSet(
        frozenset(universe),
        {t: frozenset(v) for t, v in terms.items()},
        names or None,
    )


def cmd_enrich(args, argv) -> int:
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    manifest.add_input(args.partition)
    manifest.add_input(args.annotations)
    ids, partition = _partition_from_file(args.partition)
    annotations = _load_annotations(args.annotations)
    rows = hypergeom_enrich(partition, ids, annotations, args.alpha)
    manifest.stage("enrich")
    header = (
        "cluster_id\tterm_id\toverlap\tcluster_size\tterm_size\t"
        "universe_size\tp_raw\tp_adjusted\tsignificant"
    )
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.cluster_id}\t{r.term_id}\t{r.overlap}\t{r.cluster_size}\t"
            f"{r.term_size}\t{r.universe_size}\t{fmt_float(r.p_raw)}\t"
            f"{fmt_float(r.p_adjusted)}\t{1 if r.significant else 0}"
        )
    write_text_atomic(out / "enrichment.tsv", "\n".join(lines) + "\n")
    summary_lines = []
    for k in range(1, partition.k + 1):
        top = [r for r in rows if r.cluster_id == k and r.significant][: args.top]
        for r in top:
            summary_lines.append(
                f"cluster {k}: {r.term_id} overlap={r.overlap}/{r.cluster_size} "
                f"adjusted_p={fmt_float(r.p_adjusted)}"
            )
    write_text_atomic(out / "summary.txt", "\n".join(summary_lines) + "\n")
    manifest.write(out)
    print(f"wrote {len(rows)} enrichment rows to {out / 'enrichment.tsv'}")
    return 0


# ------------------------------------------------------------------- bench


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _compress_labels(raw: np.ndarray) -> np.ndarray:
    positive = np.unique(raw[raw > 0])
    remap = {int(v): i + 1 for i, v in enumerate(positive)}
    return np.array([remap.get(int(v), 0) for v in raw], dtype=np.int64)


def _ari_class_on(pred: np.ndarray, truth: np.ndarray, keep: np.ndarray) -> float:
    """ARI restricted to ``keep`` nodes, label 0 treated as a class."""
    a = _compress_labels(pred[keep])
    b = _compress_labels(truth[keep])
    pa = Partition(a, int(a.max()) if a.size else 0)
    pb = Partition(b, int(b.max()) if b.size else 0)
    return adjusted_rand(pa, pb, unclustered="class")


def _bench_replicate(task: tuple) -> dict:
    (scenario, seed, rep, n_samples, n_comm, sizes, min_core, restarts,
     k_lo, k_hi, beta_grid, cut_height, wgcna_min_size) = task
    cfg = ScenarioConfig(
        scenario=scenario,
        seed=seed,
        n_samples=n_samples,
        n_communities=n_comm,
        size_choices=sizes,
        replicate_count=1,
    )
    ds = _build(cfg, rep)
    truth = np.asarray(ds.labels)
    relevant = truth > 0
    w = similarity_matrix(ds.x, method="pearson")
    row: dict[str, object] = {"replicate": rep, "n_vars": ds.x.p, "error": ""}

    partition, family = csd(w, min_core)
    core_labels = np.zeros(ds.x.p, dtype=np.int64)
    for k, core in enumerate(family.cores, start=1):
        for u in core:
            core_labels[u] = k
    row["csd_clusters"] = partition.k
    row["csd_core_nodes"] = family.p - len(family.outer)
    row["ari_csd"] = _ari_class_on(np.asarray(partition.labels), truth, relevant)
    row["ari_csd_cores"] = _ari_class_on(core_labels, truth, relevant)

    seed_known = _derived_seed(seed, rep, 101)
    part_known = spectral_clustering(w, n_comm, restarts, seed_known)
    row["ari_spectral_known"] = _ari_class_on(
        np.asarray(part_known.labels), truth, relevant
    )
    seed_dunn = _derived_seed(seed, rep, 102)
    k_sel, part_dunn = select_k_by_dunn(w, k_lo, k_hi, restarts, seed_dunn)
    row["spectral_k_selected"] = k_sel
    row["ari_spectral_dunn"] = _ari_class_on(
        np.asarray(part_dunn.labels), truth, relevant
    )

    height = 0.999 if scenario == "S4" else cut_height
    wg = wgcna_lite(w, list(beta_grid), height, wgcna_min_size)
    row["wgcna_beta"] = wg.beta
    row["wgcna_clusters"] = wg.partition.k
    row["ari_wgcna"] = _ari_class_on(
        np.asarray(wg.partition.labels), truth, relevant
    )

    if scenario in ("S5", "S6"):
        everything = np.ones(ds.x.p, dtype=bool)
        row["ari_cores_vs_irrelevant"] = _ari_class_on(core_labels, truth, everything)
        row["ari_wgcna_vs_irrelevant"] = _ari_class_on(
            np.asarray(wg.partition.labels), truth, everything
        )
        n_irr = int((~relevant).sum())
        outside = sum(1 for j in np.nonzero(~relevant)[0] if core_labels[j] == 0)
        row["frac_irrelevant_outside_cores"] = outside / n_irr
    return row


_BENCH_COLUMNS = [
    "replicate", "n_vars", "csd_clusters", "csd_core_nodes", "ari_csd",
    "ari_csd_cores", "spectral_k_selected", "ari_spectral_known",
    "ari_spectral_dunn", "wgcna_beta", "wgcna_clusters", "ari_wgcna",
    "ari_cores_vs_irrelevant", "ari_wgcna_vs_irrelevant",
    "frac_irrelevant_outside_cores", "error",
]


def cmd_bench(args, argv) -> int:
    scenarios = [s.strip() for s in args.scenarios.split(",") if s.strip()]
    if not scenarios:
        raise UsageError("--scenarios is empty")
    for s in scenarios:
        if s not in SCENARIOS:
            raise UsageError(f"unknown scenario {s!r}; expected one of {SCENARIOS}")
    k_lo, k_hi = _parse_range(args.k_range, "--k-range", 2)
    beta_grid = tuple(_parse_float_list(args.beta_grid, "--beta-grid"))
    out = _ensure_out(args.out)
    manifest = _Manifest(argv)
    manifest.add("seed", args.seed)
    manifest.add("wgcna_cut_height", args.wgcna_cut_height)
    manifest.add("wgcna_cut_height_S4", 0.999)
    manifest.add("spectral_restarts", args.spectral_restarts)
    manifest.add("min_core_size", args.min_core_size)
    jobs = args.jobs
    failures = 0
    summary_rows: list[tuple[str, str, float]] = []
    for scenario in scenarios:
        tasks = [
            (
                scenario, args.seed, rep, args.samples, args.communities,
                tuple(_parse_int_list(args.sizes, "--sizes")), args.min_core_size,
                args.spectral_restarts, k_lo, k_hi, beta_grid,
                args.wgcna_cut_height, args.wgcna_min_size,
            )
            for rep in range(args.replicates)
        ]
        rows: list[dict] = []
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for rep, result in enumerate(pool.map(_safe_bench_replicate, tasks)):
                    rows.append(result)
        else:
            for task in tasks:
                rows.append(_safe_bench_replicate(task))
        lines = ["\t".join(_BENCH_COLUMNS)]
        for row in rows:
            if row["error"]:
                failures += 1
            cells = []
            for col in _BENCH_COLUMNS:
                v = row.get(col)
                if v is None:
                    cells.append("")
                elif isinstance(v, float):
                    cells.append(fmt_float(v))
                else:
                    cells.append(str(v))
            lines.append("\t".join(cells))
        write_text_atomic(out / f"bench_{scenario}.tsv", "\n".join(lines) + "\n")
        for col in _BENCH_COLUMNS:
            vals = [row[col] for row in rows if isinstance(row.get(col), (int, float))]
            if vals and col not in ("replicate", "error"):
                summary_rows.append((scenario, col, float(np.median(vals))))
        manifest.stage(scenario)
    lines = ["scenario\tmetric\tmedian"]
    for scenario, metric, med in summary_rows:
        lines.append(f"{scenario}\t{metric}\t{fmt_float(med)}")
    write_text_atomic(out / "summary.tsv", "\n".join(lines) + "\n")
    manifest.write(out)
    print(f"wrote benchmark tables for {len(scenarios)} scenario(s) to {out}")
    if failures:
        print(f"{failures} replicate(s) failed; see the error column", file=sys.stderr)
        return 1
    return 0


def _safe_bench_replicate(task: tuple) -> dict:
    rep = task[2]
    try:
        return _bench_replicate(task)
    except Exception as exc:  # noqa: BLE001 - keep partial results
        return {"replicate": rep, "error": f"{type(exc).__name__}: {exc}"}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corecluster",
        description="Core-structure network clustering toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate benchmark datasets")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--communities", type=int, default=5)
    p.add_argument("--sizes", default="50,100")

    p = sub.add_parser("preprocess", help="filter and impute an expression matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-missing-frac", type=float, default=0.2)
    p.add_argument("--min-sd", type=float, default=0.4)
    p.add_argument("--knn-k", type=int, default=10)

    p = sub.add_parser("cluster", help="cluster a similarity or expression matrix")
    p.add_argument("--algo", required=True, choices=["csd", "spectral", "wgcna"])
    p.add_argument("--input", required=True)
    p.add_argument(
        "--similarity",
        default="pearson",
        choices=["pearson", "spearman", "precomputed"],
    )
    p.add_argument("--out", required=True)
    p.add_argument("--min-core-size", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--k-range")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta-grid", default="1,2,3,4,5,6,7,8,9,10,12,14,16,18,20")
    p.add_argument("--cut-height", type=float, default=0.99)
    p.add_argument("--min-size", type=int, default=40)

    p = sub.add_parser("sweep", help="scan a tuning parameter")
    p.add_argument("--algo", required=True, choices=["csd", "spectral", "wgcna"])
    p.add_argument("--input", required=True)
    p.add_argument(
        "--similarity",
        default="pearson",
        choices=["pearson", "spearman", "precomputed"],
    )
    p.add_argument("--out", required=True)
    p.add_argument("--n-range")
    p.add_argument("--k-range")
    p.add_argument("--min-size-range")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta-grid", default="1,2,3,4,5,6,7,8,9,10,12,14,16,18,20")
    p.add_argument("--cut-height", type=float, default=0.99)

    p = sub.add_parser("evaluate", help="score a partition")
    p.add_argument("--partition", required=True)
    p.add_argument("--truth")
    p.add_argument("--similarity")
    p.add_argument("--expression")
    p.add_argument("--ari-unclustered", default="drop", choices=["drop", "class"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("enrich", help="term over-representation per cluster")
    p.add_argument("--partition", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--top", type=int, default=3)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="run the full simulation benchmark")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--communities", type=int, default=5)
    p.add_argument("--sizes", default="50,100")
    p.add_argument("--min-core-size", type=int, default=10)
    p.add_argument("--spectral-restarts", type=int, default=50)
    p.add_argument("--k-range", default="2:10")
    p.add_argument("--beta-grid", default="1,2,3,4,5,6,7,8,9,10,12,14,16,18,20")
    p.add_argument("--wgcna-cut-height", type=float, default=0.99)
    p.add_argument("--wgcna-min-size", type=int, default=40)

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "preprocess": cmd_preprocess,
    "cluster": cmd_cluster,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
    "enrich": cmd_enrich,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ZeroDivisionError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
