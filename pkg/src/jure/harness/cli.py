"""Command-line surface.

    jure run --manifest PATH --backend policy|llm --experts CONFIG --out DIR
             [--parallelism N] [--max-iters K] [--seed S]
    jure agree --ratings CSV --out DIR
    jure stats --traces DIR --out DIR
    jure classify --manifest PATH
    jure serve-experts --bind ADDR

Exit codes: 0 success, 1 usage or input error, 2 batch finished but some
instances failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from jure.core.classify import classify_instruction
from jure.core.errors import JureError
from jure.core.trace import replay_journal
from jure.core.types import SubTask
from jure.experts.reference import reference_registry
from jure.harness.batch import BatchSummary, RunConfig, run_batch
from jure.harness.manifest import load_manifest
from jure.metrics.kappa import RatingVector, agreement_heatmap
from jure.metrics.stats import invocation_frequency
from jure.orchestrator.llm import HttpLlmClient, LlmBackend, LlmConfig
from jure.orchestrator.loop import LoopLimits
from jure.orchestrator.policy import PolicyBackend
from jure.transport.client import remote_registry
from jure.transport.server import serve_experts

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our contract reserves 2 for partial
    batch failures, so usage problems exit 1 instead."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jure", description="Expert-routing judge for image edits")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="evaluate a manifest", parents=[])
    run.add_argument("--manifest", required=True)
    run.add_argument("--backend", required=True, choices=["policy", "llm"])
    run.add_argument("--experts", required=True, help='"local" or an endpoints JSON file')
    run.add_argument("--out", required=True)
    run.add_argument("--parallelism", type=int, default=1)
    run.add_argument("--max-iters", type=int, default=LoopLimits().max_iterations)
    run.add_argument("--seed", type=int, default=0)

    agree = commands.add_parser("agree", help="pairwise rater agreement")
    agree.add_argument("--ratings", required=True)
    agree.add_argument("--out", required=True)

    stats = commands.add_parser("stats", help="expert invocation frequency")
    stats.add_argument("--traces", required=True)
    stats.add_argument("--out", required=True)

    classify = commands.add_parser("classify", help="dry-run sub-task labels")
    classify.add_argument("--manifest", required=True)

    serve = commands.add_parser("serve-experts", help="serve the reference experts")
    serve.add_argument("--bind", required=True, help="host:port")
    return parser


def _registry_for(experts: str):
    if experts == "local":
        return reference_registry()
    endpoints = json.loads(Path(experts).read_text("utf-8"))
    if not isinstance(endpoints, dict):
        raise JureError("endpoints file must map expert names to URLs")
    return remote_registry(endpoints)


def _backend_factory(name: str):
    if name == "policy":
        return PolicyBackend
    endpoint = os.environ.get("JURE_LLM_ENDPOINT")
    model = os.environ.get("JURE_LLM_MODEL", "default")
    if not endpoint:
        raise JureError("llm backend needs JURE_LLM_ENDPOINT in the environment")
    config = LlmConfig(endpoint_url=endpoint, model_name=model)
    return lambda: LlmBackend(client=HttpLlmClient(config))


def _cmd_run(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
        registry = _registry_for(args.experts)
        config = RunConfig(
            backend=args.backend,
            out_dir=Path(args.out),
            experts=args.experts,
            limits=LoopLimits(max_iterations=args.max_iters),
            parallelism=args.parallelism,
            seed=args.seed,
        )
        factory = _backend_factory(args.backend)
    except (JureError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"jure run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary: BatchSummary = run_batch(manifest, config, registry, factory)
    print(
        f"completed={summary.completed} limit_tripped={summary.limit_tripped} "
        f"errored={summary.errored} excluded={len(manifest.excluded)}"
    )
    return EXIT_PARTIAL if summary.errored else EXIT_OK


def _read_ratings(path: Path) -> dict[str, dict[tuple[str, str], int]]:
    by_rater: dict[str, dict[tuple[str, str], int]] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"instance_id", "rater_id", "model_name", "score"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise JureError(f"ratings CSV must have columns {sorted(expected)}")
        for row in reader:
            score = int(row["score"])
            by_rater.setdefault(row["rater_id"], {})[(row["instance_id"], row["model_name"])] = score
    return by_rater


def _cmd_agree(args) -> int:
    try:
        by_rater = _read_ratings(Path(args.ratings))
        if len(by_rater) < 2:
            raise JureError("need at least two raters")
        rater_ids = sorted(by_rater)
        shared = set.intersection(*(set(items) for items in by_rater.values()))
        if not shared:
            raise JureError("raters share no (instance, model) items")
        ordered = sorted(shared)
        vectors = [
            RatingVector(rid, tuple(by_rater[rid][item] for item in ordered))
            for rid in rater_ids
        ]
        grid = agreement_heatmap(vectors)
    except (JureError, OSError, ValueError) as exc:
        print(f"jure agree: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rid, line in zip(rater_ids, grid):
        rows.append([rid] + ["" if v is None else f"{v:.6f}" for v in line])
    csv_text = ",".join(["rater_id"] + rater_ids) + "\n"
    csv_text += "\n".join(",".join(str(c) for c in row) for row in rows) + "\n"
    (out / "heatmap.csv").write_text(csv_text, "utf-8")
    (out / "heatmap.json").write_text(
        json.dumps({"raters": rater_ids, "kappa": grid, "items": len(ordered)}, indent=2)
        + "\n",
        "utf-8",
    )
    print(f"wrote heatmap for {len(rater_ids)} raters over {len(ordered)} items")
    return EXIT_OK


def _cmd_stats(args) -> int:
    traces_dir = Path(args.traces)
    try:
        labels_file = traces_dir / "labels.json"
        if not labels_file.exists():
            labels_file = traces_dir.parent / "labels.json"
        raw_labels = json.loads(labels_file.read_text("utf-8"))
        labels = {iid: SubTask.from_name(name) for iid, name in raw_labels.items()}
        pairs = []
        for path in sorted(traces_dir.glob("*.jsonl")):
            header, trace = replay_journal(path)
            pairs.append((header["instance_id"], trace))
        rows = invocation_frequency(pairs, labels)
    except (JureError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"jure stats: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["subtask,expert,count,percentage"]
    for row in rows:
        lines.append(f"{row.sub_task.value},{row.expert},{row.count},{row.percentage:.2f}")
    (out / "invocations.csv").write_text("\n".join(lines) + "\n", "utf-8")
    print(f"wrote invocation stats over {len(pairs)} traces")
    return EXIT_OK


def _cmd_classify(args) -> int:
    try:
        manifest = load_manifest(args.manifest, write_sidecar=False)
    except (JureError, OSError) as exc:
        print(f"jure classify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for instance in manifest.instances:
        print(f"{instance.id}\t{manifest.labels[instance.id].value}")
    for record in manifest.excluded:
        print(f"{record['id']}\tunclassified")
    return EXIT_OK


def _cmd_serve(args) -> int:
    token = os.environ.get("JURE_EXPERT_TOKEN")
    try:
        handle = serve_experts(reference_registry(), args.bind, token=token)
    except JureError as exc:
        print(f"jure serve-experts: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"serving reference experts at {handle.base_url} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "agree": _cmd_agree,
        "stats": _cmd_stats,
        "classify": _cmd_classify,
        "serve-experts": _cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
