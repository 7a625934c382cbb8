"""Command-line entry point: ``citerank {validate,rank,eval,stats,gen}``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import cocitation, metrics, ranking, synth
from .errors import CiterankError
from .evaluation import agreement, parse_judgments
from .ingest import load_graph

logger = logging.getLogger("citerank")

MANIFEST_SUFFIX = ".manifest"


class Manifest:
    """Ordered ``key=value`` run record, written next to a run's outputs."""

    def __init__(self, subcommand: str):
        self.entries: dict[str, str] = {"subcommand": subcommand}
        self.timings: dict[str, float] = {}

    def set(self, **kwargs) -> None:
        for k, v in kwargs.items():
            self.entries[k] = "" if v is None else str(v)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        yield
        self.timings[name] = time.perf_counter() - t0
        logger.info("%s: %.3fs", name, self.timings[name])

    def render(self) -> str:
        lines = [f"{k}={v}" for k, v in self.entries.items()]
        lines += [f"time.{k}={v:.6f}" for k, v in self.timings.items()]
        lines.append(f"time.total={sum(self.timings.values()):.6f}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.render(), encoding="utf-8")
        return path


def read_manifest(path) -> dict[str, str]:
    entries = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CiterankError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
    for line in text.splitlines():
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            entries[k] = v
    return entries


def _gib(value: str) -> int:
    return int(float(value) * 1024**3)


def _metric_params(args) -> metrics.MetricParams:
    return metrics.MetricParams(
        as_of_year=args.as_of_year,
        alpha=args.alpha,
        damping=args.damping,
        pagerank_tolerance=args.tolerance,
        pagerank_max_iterations=args.max_iterations,
    )


# keys a rank manifest carries, mapped to argparse destinations and parsers
_RANK_KEYS = {
    "papers": ("papers", Path),
    "references": ("references", Path),
    "metric": ("metric", str),
    "as_of_year": ("as_of_year", int),
    "alpha": ("alpha", float),
    "damping": ("damping", float),
    "pagerank_tolerance": ("tolerance", float),
    "pagerank_max_iterations": ("max_iterations", int),
    "mode": ("mode", str),
    "memory_budget_bytes": ("memory_budget", int),
}


def _apply_manifest(args) -> None:
    entries = read_manifest(args.from_manifest)
    if entries.get("subcommand") != "rank":
        raise CiterankError(f"{args.from_manifest} is not a rank manifest")
    for key, (dest, conv) in _RANK_KEYS.items():
        if entries.get(key):
            setattr(args, dest, conv(entries[key]))
    if args.out is None:
        args.out = Path(entries["out"])


def cmd_rank(args) -> int:
    if args.from_manifest:
        _apply_manifest(args)
    if args.papers is None or args.references is None or args.out is None:
        raise CiterankError("rank needs --papers, --references and --out (or --from-manifest)")
    params = _metric_params(args)
    man = Manifest("rank")

    with man.stage("ingest"):
        graph = load_graph(args.papers, args.references)
    as_of = metrics.resolve_as_of_year(graph.papers, params)
    man.set(
        papers=args.papers,
        references=args.references,
        out=args.out,
        metric=args.metric,
        as_of_year=as_of,
        alpha=params.alpha,
        damping=params.damping,
        pagerank_tolerance=params.pagerank_tolerance,
        pagerank_max_iterations=params.pagerank_max_iterations,
        mode=args.mode,
        memory_budget_bytes=args.memory_budget,
        threads=args.threads,
        ingest_summary=graph.report.to_line(),
    )

    if args.metric == "srcr":
        with man.stage("acr"):
            acr_table = metrics.acr(graph, graph.papers, params)
        with man.stage("cocitation"):
            index = None
            if args.mode == cocitation.EXACT:
                index = cocitation.build_neighborhoods(
                    graph, memory_budget=args.memory_budget, threads=args.threads
                )
            acc = cocitation.accumulate_neighbor_acr(graph, acr_table, mode=args.mode, index=index)
        with man.stage("metric"):
            scores = metrics.srcr(acr_table, acc, params)
    else:
        with man.stage("metric"):
            scores = metrics.compute(args.metric, graph, params)
    if scores.converged is not None:
        man.set(converged=scores.converged, iterations=scores.iterations)
    if args.scores_out:
        with man.stage("write_scores"):
            metrics.write_scores(scores, args.scores_out)
    with man.stage("normalize"):
        probs = ranking.normalize(scores)
    with man.stage("rank"):
        ranked = ranking.rank(probs)
    with man.stage("write"):
        ranking.write_submission(ranked, args.out)
    man.write(Path(str(args.out) + MANIFEST_SUFFIX))
    print(f"wrote {len(ranked)} papers to {args.out} (top {ranked.ids[0]})")
    return 0


def cmd_eval(args) -> int:
    probs = ranking.read_submission(args.submission)
    report = agreement(probs, parse_judgments(args.judgments))
    print(report.to_line())
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return 0


def cmd_stats(args) -> int:
    man = Manifest("stats")
    with man.stage("ingest"):
        graph = load_graph(args.papers, args.references)
    with man.stage("cocitation"):
        index = cocitation.build_neighborhoods(graph, memory_budget=args.memory_budget, threads=args.threads)
    summary = cocitation.neighborhood_stats(index, citation_info_only=not args.include_zero_degree)
    with_info = int(index.has_citation_info.sum())
    print(f"papers_total={graph.paper_count}")
    print(f"papers_with_citation_info={with_info}")
    print(f"papers_without_citation_info={graph.paper_count - with_info}")
    print(f"average_neighborhood_size={summary.mean!r}")
    print(f"max_neighborhood_size={summary.max}")
    cited = graph.in_degree > 0
    print(f"papers_cited={int(cited.sum())}")
    cited_mean = float(index.sizes[cited].mean()) if cited.any() else 0.0
    print(f"average_neighborhood_size_cited={cited_mean!r}")
    if args.histogram:
        summary.write_csv(args.histogram)
        man.set(
            papers=args.papers,
            references=args.references,
            histogram=args.histogram,
            include_zero_degree=args.include_zero_degree,
        )
        man.write(Path(str(args.histogram) + MANIFEST_SUFFIX))
    return 0


def cmd_gen(args) -> int:
    params = synth.SynthParams(
        paper_count=args.paper_count,
        year_range=(args.year_min, args.year_max),
        attachment_exponent=args.exponent,
        mean_out_degree=args.mean_out_degree,
        zero_info_fraction=args.zero_info_fraction,
        seed=args.seed,
    )
    man = Manifest("gen")
    with man.stage("generate"):
        out = synth.generate(params)
    judgments = None
    if args.judgments:
        gap = args.min_gap if args.min_gap is not None else max(1, params.paper_count // 10)
        with man.stage("judgments"):
            judgments = synth.sample_judgments(out, args.judgments, gap, seed=args.seed)
        man.set(judgments=args.judgments, min_gap=gap)
    with man.stage("write"):
        paths = synth.write_output(out, args.out_dir, judgments)
    man.set(
        paper_count=params.paper_count,
        year_min=args.year_min,
        year_max=args.year_max,
        attachment_exponent=params.attachment_exponent,
        mean_out_degree=params.mean_out_degree,
        zero_info_fraction=params.zero_info_fraction,
        seed=params.seed,
        edges=len(out.edges),
    )
    man.write(Path(args.out_dir) / "gen.manifest")
    print(" ".join(f"{k}={v}" for k, v in paths.items()))
    return 0


def cmd_validate(args) -> int:
    graph = load_graph(args.papers, args.references, max_year=args.max_year)
    print(graph.report.to_line())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="citerank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p, required=True):
        p.add_argument("--papers", type=Path, required=required, help="paper_id<TAB>year file")
        p.add_argument("--references", type=Path, required=required, help="citing<TAB>cited file")

    def neighborhood_opts(p):
        p.add_argument("--memory-budget", type=_gib, default=cocitation.DEFAULT_MEMORY_BUDGET, metavar="GIB")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("validate", help="ingest files and print the anomaly summary")
    inputs(p)
    p.add_argument("--max-year", type=int, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("rank", help="compute a metric and write a submission")
    inputs(p, required=False)
    p.add_argument("--metric", choices=metrics.METRICS, default="srcr")
    p.add_argument("--out", type=Path)
    p.add_argument("--scores-out", type=Path, help="also write raw scores")
    p.add_argument("--as-of-year", type=int, default=None, help="default: latest publication year")
    p.add_argument("--alpha", type=float, default=1.0, help="additive smoothing constant")
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--mode", choices=(cocitation.EXACT, cocitation.STREAMING), default=cocitation.EXACT)
    p.add_argument("--from-manifest", type=Path, help="re-run with the parameters of a rank manifest")
    neighborhood_opts(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="score a submission against pairwise judgments")
    p.add_argument("--submission", type=Path, required=True)
    p.add_argument("--judgments", type=Path, required=True)
    p.add_argument("--csv", type=Path)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset and neighborhood-size statistics")
    inputs(p)
    p.add_argument("--histogram", type=Path, help="write the size histogram CSV here")
    p.add_argument("--include-zero-degree", action="store_true")
    neighborhood_opts(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--paper-count", type=int, default=100_000)
    p.add_argument("--year-min", type=int, default=1980)
    p.add_argument("--year-max", type=int, default=2015)
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--mean-out-degree", type=float, default=10.0)
    p.add_argument("--zero-info-fraction", type=float, default=0.59)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--judgments", type=int, default=0, help="number of judgment pairs to sample")
    p.add_argument("--min-gap", type=int, default=None, help="default: paper_count // 10")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except CiterankError as exc:
        print(f"citerank {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
