"""Command-line interface.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .corpus import dedup, load_corpus, write_corpus
from .evaluation import load_annotations, majority_vote, pr_curve, read_curve_csv, select_threshold, write_curve_csv
from .exceptions import ConfigError, PlaceHarvestError
from .extractors import CandidateExtractor
from .footprint import dump_geojson
from .gazetteer import compare, load_exclusions, load_gazetteer, write_match_report
from .geocluster import NormalizationMode, ScaleSet, rank_candidates, read_ranked_csv, write_ranked_csv
from .synth import SynthSpec, synth

logger = logging.getLogger("placeharvest")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="pipeline config JSON; flags override its values")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads for per-term work")
    parser.add_argument("--mode", choices=[m.value for m in NormalizationMode], help="entropy-sum normalization")
    parser.add_argument("--alpha", type=float, help="scale base in meters")
    parser.add_argument("--min-points", type=int, help="minimum points per term after filtering")
    parser.add_argument("--threshold", type=float, help="cut on the normalized score")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="placeharvest", description="Harvest local place names from geotagged ads.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic corpus and ground truth")
    _common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-place", type=int, default=20)
    p.add_argument("--n-noise", type=int, default=20)
    p.add_argument("--mentions", type=int, default=15)
    p.add_argument("--mentions-max", type=int, help="draw per-term mention counts from [--mentions, this]")
    p.add_argument("--sigma", type=float, default=300.0, help="cluster sigma in meters")
    p.add_argument("--box-km", type=float, default=40.0)
    p.add_argument("--region", default="synthetic")

    p = sub.add_parser("ingest", help="load and de-duplicate an ads CSV")
    _common(p)
    p.add_argument("ads", nargs="?")
    p.add_argument("--region")

    p = sub.add_parser("extract", help="extract candidates from an ads CSV")
    _common(p)
    p.add_argument("ads", nargs="?")
    p.add_argument("--region")
    p.add_argument("--annotations", action="append", help="external NER annotations JSONL (repeatable)")
    p.add_argument("--no-capitalized", action="store_true")
    p.add_argument("--no-cue", action="store_true")

    p = sub.add_parser("rank", help="rank candidates by geo-indicativeness")
    _common(p)
    p.add_argument("candidates")

    p = sub.add_parser("curve", help="precision-recall sweep over a ranked CSV")
    _common(p)
    p.add_argument("ranked")
    p.add_argument("--ground-truth")

    p = sub.add_parser("select-threshold", help="pick the operating threshold from a curve CSV")
    _common(p)
    p.add_argument("curve")
    p.add_argument("--top-n", type=int, default=10)

    p = sub.add_parser("footprint", help="GeoJSON footprints for selected terms")
    _common(p)
    p.add_argument("candidates")
    p.add_argument("--ranked", required=True)
    p.add_argument("--method", choices=["hull", "kde"])

    p = sub.add_parser("compare", help="match a term list against gazetteers")
    _common(p)
    p.add_argument("terms", help="places/ranked CSV or one term per line")
    p.add_argument("--gazetteer", action="append", default=[], metavar="PATH[:SOURCE]")
    p.add_argument("--exclusions")

    p = sub.add_parser("run", help="run the full pipeline")
    _common(p)
    p.add_argument("--ads")
    p.add_argument("--ground-truth")
    p.add_argument("--region")
    return parser


def _config(args, **extra) -> pl.PipelineConfig:
    return pl.PipelineConfig.load(
        args.config,
        out_dir=args.out,
        threads=args.threads,
        mode=args.mode,
        alpha_m=args.alpha,
        min_points=args.min_points,
        threshold=args.threshold,
        **extra,
    )


def _out(config: pl.PipelineConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _gazetteer_spec(value: str) -> dict:
    path, _, source = value.partition(":")
    return {"path": path, "source": source or Path(path).stem}


def cmd_synth(args):
    config = _config(args)
    spec = SynthSpec(
        n_place_terms=args.n_place,
        n_noise_terms=args.n_noise,
        mentions_per_term=args.mentions,
        mentions_max=args.mentions_max,
        cluster_sigma_m=args.sigma,
        region_box_km=args.box_km,
        seed=args.seed,
        region_id=args.region,
    )
    for name, path in synth(spec, _out(config)).items():
        print(f"{name}: {path}")


def cmd_ingest(args):
    config = _config(args, ads=args.ads, region_id=args.region)
    if not config.ads:
        raise ConfigError("no ads file given")
    with pl._Stage("ingest"):
        raw = load_corpus(config.ads, config.region_id)
        corpus = dedup(raw)
        path = _out(config) / "ads.dedup.csv"
        write_corpus(corpus, path)
    print(f"loaded {len(raw)} ads ({len(raw.skipped)} rows skipped), kept {len(corpus)} after dedup -> {path}")


def cmd_extract(args):
    config = _config(args, ads=args.ads, region_id=args.region, annotations=args.annotations)
    if not config.ads:
        raise ConfigError("no ads file given")
    names = [n for n in config.extractors if not (n == "capitalized" and args.no_capitalized or n == "cue" and args.no_cue)]
    with pl._Stage("extract"):
        corpus = load_corpus(config.ads, config.region_id)
        extractor = CandidateExtractor(
            extractors=tuple(names), annotations=tuple(config.annotations),
            cues=config.cues, stopwords=config.stopwords, labels=config.labels,
        )
        candidates = extractor.fit_transform(corpus)
        path = _out(config) / "candidates.json"
        pl.write_json(pl.candidates_to_json(candidates, config.region_id), path)
    print(f"{len(candidates)} candidate terms -> {path}")


def cmd_rank(args):
    config = _config(args)
    with pl._Stage("rank"):
        candidates = pl.read_candidates(args.candidates)
        ranked = rank_candidates(candidates, ScaleSet(float(config.alpha_m)), config.mode, int(config.min_points), threads=int(config.threads))
        path = _out(config) / "ranked.csv"
        write_ranked_csv(ranked, path)
    print(f"{len(ranked)} ranked terms -> {path}")


def cmd_curve(args):
    config = _config(args, ground_truth=args.ground_truth)
    if not config.ground_truth:
        raise ConfigError("--ground-truth is required")
    with pl._Stage("curve"):
        truth = majority_vote(load_annotations(config.ground_truth), config.quorum)
        curve = pr_curve(read_ranked_csv(args.ranked), truth)
        path = _out(config) / "curve.csv"
        write_curve_csv(curve, path)
    print(f"curve ({len(curve)} thresholds) -> {path}")


def cmd_select_threshold(args):
    with pl._Stage("select-threshold"):
        curve = read_curve_csv(args.curve)
        t = select_threshold(curve, args.top_n)
    m = dict(curve.points)[t]
    print(json.dumps({"threshold": t, "precision": m.precision, "recall": m.recall, "f_score": m.f_score}, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        pl.write_json({"threshold": t, "source": "curve", "precision": m.precision, "recall": m.recall, "f_score": m.f_score}, out / "threshold.json")


def cmd_footprint(args):
    config = _config(args, footprint=args.method)
    if config.threshold is None:
        raise ConfigError("--threshold is required")
    with pl._Stage("footprint"):
        candidates = pl.read_candidates(args.candidates)
        terms = [r.term for r in read_ranked_csv(args.ranked) if r.normalized_score <= config.threshold]
        path = _out(config) / "footprints.geojson"
        dump_geojson(pl.build_footprints(candidates, terms, config), path)
    print(f"{len(terms)} footprints -> {path}")


def cmd_compare(args):
    config = _config(args, exclusions=args.exclusions)
    gazetteers = [_gazetteer_spec(g) for g in args.gazetteer] or config.gazetteers
    if not gazetteers:
        raise ConfigError("at least one --gazetteer is required")
    with pl._Stage("compare"):
        terms = pl.read_terms(args.terms)
        exclude = load_exclusions(config.exclusions) if config.exclusions else set()
        out = _out(config)
        for g in gazetteers:
            source = g.get("source") or Path(g["path"]).stem
            report = compare(terms, load_gazetteer(g["path"], source), exclude=exclude)
            path = out / f"matches_{source}.csv"
            write_match_report(report, path)
            print(f"{source}: {report.counts} -> {path}")


def cmd_run(args):
    config = _config(args, ads=args.ads, ground_truth=args.ground_truth, region_id=args.region)
    paths = pl.run_pipeline(config)
    for name, path in paths.items():
        print(f"{name}: {path}")


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "rank": cmd_rank,
    "curve": cmd_curve,
    "select-threshold": cmd_select_threshold,
    "footprint": cmd_footprint,
    "compare": cmd_compare,
    "run": cmd_run,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except PlaceHarvestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
