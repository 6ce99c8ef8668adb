"""Command-line entry points: generate, evaluate, sweep, oracle.

generate writes one JSONL record per corpus instance; evaluate turns a
generation file into a JSON report, a per-instance CSV, and a PNG figure;
sweep writes one JSONL record per trial plus a summary JSON and a figure;
oracle writes the exhaustive single-edit baseline per instance.

Exit status 0 means the command ran to completion (per-instance failures
are recorded in the output, not fatal); 2 means bad input: malformed
config, unreadable or empty corpus, id mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .backends import build_suite
from .corpus import load_corpus
from .errors import InputError, TextcfError
from .importance import make_provider
from .metrics import (InstanceOutcome, aggregate, write_report_csv,
                      write_report_json)
from .objective import SearchConfig
from .oracle import brute_force_depth1
from .plots import render_report_figure, render_sweep_figure
from .search import export_trace, run_search
from .sweep import SweepSpace, run_sweep

_KNOWN_SUFFIXES = {".json", ".jsonl", ".csv", ".png"}


def _load_config(path):
    """Config file -> (SearchConfig, models section, diversity lambda)."""
    if path is None:
        return SearchConfig(), None, 1.0
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as error:
        raise InputError(f"cannot read config {path}: {error}") from error
    except json.JSONDecodeError as error:
        raise InputError(f"config {path} is not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    models = data.pop("models", None)
    if models is not None and not isinstance(models, dict):
        raise InputError("config key 'models' must be an object")
    lam = data.pop("lambda", 1.0)
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or lam <= 0:
        raise InputError("config key 'lambda' must be a positive number")
    return SearchConfig.from_dict(data), models, float(lam)


def _load_space(path):
    """Space file -> (SweepSpace, overrides). Bare dicts are the space
    itself; {"space": ..., "overrides": ...} pins p/early_stop too."""
    if path is None:
        return SweepSpace(), None
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as error:
        raise InputError(f"cannot read sweep space {path}: {error}") from error
    except json.JSONDecodeError as error:
        raise InputError(f"sweep space {path} is not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise InputError("sweep space must be a JSON object")
    if "space" in data or "overrides" in data:
        space = SweepSpace.from_dict(data.pop("space", {}))
        overrides = data.pop("overrides", None)
        if data:
            raise InputError(f"unknown sweep file keys: {sorted(data)}")
        return space, overrides
    return SweepSpace.from_dict(data), None


def _out_base(out: str) -> str:
    path = Path(out)
    return str(path.with_suffix("")) if path.suffix in _KNOWN_SUFFIXES else out


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _read_generation(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as error:
        raise InputError(f"cannot read generation output {path}: {error}") from error
    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as error:
            raise InputError(f"{path}:{number}: invalid JSON ({error})") from error
        if not isinstance(record, dict) or "id" not in record:
            raise InputError(f"{path}:{number}: expected an object with an id")
        records.append(record)
    if not records:
        raise InputError(f"generation output {path} is empty")
    return records


def _prepare_run(args):
    config, models, lam = _load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    instances = load_corpus(args.corpus)
    suite = build_suite(models, [instance.text for instance in instances])
    config.validate_for(suite.classifier.num_classes)
    return config, instances, suite, lam


def _cmd_generate(args) -> int:
    config, instances, suite, _ = _prepare_run(args)
    filler = suite.filler_for(config)
    provider = make_provider(config.importance_provider,
                             mask_token=filler.mask_token)
    source = suite.similarity_source_for(config)
    if args.trace:
        os.makedirs(args.trace, exist_ok=True)

    def run_one(instance):
        try:
            result = run_search(instance.text, suite.classifier, filler,
                                provider, config, source,
                                target=instance.target,
                                record_trace=args.trace is not None)
            return instance, result, None
        except TextcfError as error:
            return instance, None, str(error)

    workers = max(1, args.workers)
    if workers == 1:
        outcomes = [run_one(instance) for instance in instances]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, instances))

    records = []
    for instance, result, error in outcomes:
        if error is not None:
            records.append({"id": instance.id, "error": error})
            continue
        records.append({
            "id": instance.id,
            "counterfactuals": [c.text for c in result.counterfactuals],
            "costs": [c.cost for c in result.counterfactuals],
            "evaluations_used": result.evaluations_used,
            "terminated_by": result.terminated_by,
        })
        if args.trace:
            name = urllib.parse.quote(instance.id, safe="") + ".trace.jsonl"
            export_trace(result, os.path.join(args.trace, name))
    _write_jsonl(args.out, records)
    return 0


def _cmd_evaluate(args) -> int:
    _, models, lam = _load_config(args.config)
    instances = load_corpus(args.corpus)
    by_id = {instance.id: instance for instance in instances}
    records = _read_generation(args.generation)
    generation_ids = [str(record["id"]) for record in records]
    if (len(generation_ids) != len(set(generation_ids))
            or set(generation_ids) != set(by_id)):
        raise InputError("id mismatch between generation output and corpus")

    suite = build_suite(models, [instance.text for instance in instances])
    outcomes = []
    for record in records:
        instance_id = str(record["id"])
        failed = "error" in record
        texts = [] if failed else list(record.get("counterfactuals", ()))
        outcomes.append(InstanceOutcome(
            id=instance_id, origin=by_id[instance_id].text,
            counterfactuals=texts,
            evaluations_used=int(record.get("evaluations_used", 0)),
            terminated_by=record.get("terminated_by",
                                     "error" if failed else "")))
    report = aggregate(outcomes, suite.embedder, suite.fluency, lam=lam)
    base = _out_base(args.out)
    write_report_json(report, base + ".json")
    write_report_csv(report, base + ".csv")
    render_report_figure(report, base + ".png")
    return 0


def _cmd_sweep(args) -> int:
    if args.trials < 1:
        raise InputError(f"trials must be >= 1, got {args.trials}")
    _, models, lam = _load_config(args.config)
    space, overrides = _load_space(args.space)
    instances = load_corpus(args.corpus)
    suite = build_suite(models, [instance.text for instance in instances])
    result = run_sweep(instances, suite, space, args.trials, args.seed,
                       lam=lam, overrides=overrides)
    base = _out_base(args.out)
    _write_jsonl(base + ".jsonl", result["trials"])
    best = result["best_trial"]
    summary = {"trials": len(result["trials"]), "seed": args.seed,
               "best_trial": best,
               "best_config": result["trials"][best]["config"],
               "best_metrics": result["trials"][best]["metrics"],
               "rank_sums": result["rank_sums"]}
    with open(base + ".json", "w", encoding="utf-8") as handle:
        json.dump(summary, handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    render_sweep_figure(result, base + ".png")
    return 0


def _cmd_oracle(args) -> int:
    config, instances, suite, _ = _prepare_run(args)
    filler = suite.filler_for(config)
    source = suite.similarity_source_for(config)
    records = []
    for instance in instances:
        try:
            best = brute_force_depth1(instance.text, suite.classifier, filler,
                                      config, source, target=instance.target)
        except TextcfError as error:
            records.append({"id": instance.id, "error": str(error)})
            continue
        records.append({
            "id": instance.id,
            "counterfactual": best.text if best else None,
            "cost": best.cost if best else None,
        })
    _write_jsonl(args.out, records)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textcf",
        description="counterfactual text generation, evaluation, and sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate",
                              help="search counterfactuals for each instance")
    generate.add_argument("--corpus", required=True, help="JSONL or plain-text corpus")
    generate.add_argument("--config", help="JSON run config")
    generate.add_argument("--out", required=True, help="output JSONL path")
    generate.add_argument("--seed", type=int, help="override the config seed")
    generate.add_argument("--workers", type=int, default=1,
                          help="concurrent instances (output order is fixed)")
    generate.add_argument("--trace", help="directory for per-instance trace JSONL")
    generate.set_defaults(func=_cmd_generate)

    evaluate = sub.add_parser("evaluate",
                              help="score a generation output against its corpus")
    evaluate.add_argument("--generation", required=True, help="generate output JSONL")
    evaluate.add_argument("--corpus", required=True)
    evaluate.add_argument("--config", help="JSON run config (models, lambda)")
    evaluate.add_argument("--out", required=True,
                          help="report base path (.json/.csv/.png are added)")
    evaluate.set_defaults(func=_cmd_evaluate)

    sweep = sub.add_parser("sweep", help="random search over hyperparameters")
    sweep.add_argument("--corpus", required=True)
    sweep.add_argument("--space", help="JSON sweep space")
    sweep.add_argument("--config", help="JSON run config (models, lambda)")
    sweep.add_argument("--trials", type=int, default=20)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--out", required=True,
                       help="output base path (.jsonl/.json/.png are added)")
    sweep.set_defaults(func=_cmd_sweep)

    oracle = sub.add_parser("oracle",
                            help="exhaustive single-edit baseline per instance")
    oracle.add_argument("--corpus", required=True)
    oracle.add_argument("--config", help="JSON run config")
    oracle.add_argument("--out", required=True, help="output JSONL path")
    oracle.add_argument("--seed", type=int, help="override the config seed")
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TextcfError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
