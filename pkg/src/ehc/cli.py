"""Operator command line: ingest, serve, export, validate.

All mutation happens here; the HTTP API stays read-only. `ingest` runs the
full publish pipeline, `serve` runs the API (and the webapp's static assets
when present), `export` emits stored canonical JSON to stdout, and
`validate` dry-runs a configuration with a per-row reject report.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .canonical import canonical_bytes
from .config import AppConfig, load_config
from .errors import AllSourcesFailed, EhcError
from .pipeline import build_aggregates, load_registry, run_pipeline
from .service import color_regions, create_app, find_descriptor
from .geo import build_feature_collection
from .ingest import run_sync
from .store import read_latest, snapshot_document

DEFAULT_PORT = 8080

logger = logging.getLogger(__name__)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except EhcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehc",
        description="Community air-quality and health data platform.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="fetch sources and publish a snapshot")
    ingest.add_argument("--config", required=True, help="path to the JSON configuration file")
    ingest.set_defaults(handler=cmd_ingest)

    serve = sub.add_parser("serve", help="run the read-only HTTP API")
    serve.add_argument("--config", required=True, help="path to the JSON configuration file")
    serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument(
        "--static",
        default=None,
        help="directory of webapp assets (default: 'webapp' beside the config, if present)",
    )
    serve.set_defaults(handler=cmd_serve)

    export = sub.add_parser("export", help="write stored canonical JSON to stdout")
    export.add_argument("--config", required=True, help="path to the JSON configuration file")
    export.add_argument("--format", choices=("geojson", "json"), default="json")
    export.add_argument("--dataset", choices=("air", "health"), default="air")
    export.add_argument("--metric", default="", help="metric id (geojson format only)")
    export.set_defaults(handler=cmd_export)

    validate = sub.add_parser("validate", help="dry-run a configuration with a reject report")
    validate.add_argument("--config", required=True, help="path to the JSON configuration file")
    validate.set_defaults(handler=cmd_validate)
    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    try:
        report = run_pipeline(config)
    except AllSourcesFailed as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return 1
    print(f"snapshot {report.snapshot.snapshot_id}")
    print(
        f"regions published: {len(report.snapshot.region_summaries)} air, "
        f"{len(report.snapshot.health_summaries)} health; "
        f"stories: {len(report.snapshot.stories)}"
    )
    _print_drops(report)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = load_config(args.config)
    registry = load_registry(config)
    static_dir = args.static
    if static_dir is None:
        candidate = Path(args.config).parent / "webapp"
        static_dir = candidate if candidate.is_dir() else None
    app = create_app(
        config.storage_root, registry, config.color_scale, static_dir=static_dir
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    snapshot = read_latest(config.storage_root)
    if args.format == "json":
        payload = canonical_bytes(snapshot_document(snapshot))
    else:
        registry = load_registry(config)
        descriptor = find_descriptor(snapshot, args.dataset, args.metric)
        if descriptor is None:
            print(
                f"error: no metric {args.metric!r} in dataset {args.dataset}", file=sys.stderr
            )
            return 2
        summaries = (
            snapshot.region_summaries if args.dataset == "air" else snapshot.health_summaries
        )
        zscores, colors = color_regions(snapshot, descriptor, config.color_scale)
        document = build_feature_collection(
            registry, summaries, args.metric, zscores, colors
        )
        document["snapshot_id"] = snapshot.snapshot_id
        document["dataset"] = args.dataset
        payload = canonical_bytes(document)
    sys.stdout.buffer.write(payload)
    sys.stdout.buffer.write(b"\n")
    sys.stdout.buffer.flush()
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    registry = load_registry(config)
    try:
        batch = run_sync(list(config.sources))
    except AllSourcesFailed as exc:
        print(f"validate failed: {exc}", file=sys.stderr)
        return 1
    total_rejects = 0
    for source_id in sorted(batch.rejects):
        for reject in batch.rejects[source_id]:
            print(f"reject {source_id} line {reject.line}: {reject.reason}")
            total_rejects += 1
    for error in batch.errors:
        print(f"source error {error.source_id} ({error.stage}): {error.message}")
    snapshot, _ = build_aggregates(config, registry, batch)
    print(
        f"ok: {len(batch.deployments)} deployments, {len(batch.surveys)} surveys, "
        f"{len(batch.stories)} stories, {total_rejects} rejected rows"
    )
    print(f"would publish snapshot {snapshot.snapshot_id}")
    return 0


def _print_drops(report) -> None:
    if report.rejected_rows:
        print(f"rejected rows: {report.rejected_rows}")
    if report.dropped_outside_regions:
        print(f"records outside all regions: {report.dropped_outside_regions}")
    if report.skipped_deployments:
        print(f"deployments below coverage floor: {', '.join(report.skipped_deployments)}")
    if report.dropped_stories:
        print(f"stories for unknown regions: {', '.join(report.dropped_stories)}")
    for line in report.source_errors:
        print(f"source error: {line}")


if __name__ == "__main__":
    raise SystemExit(main())
