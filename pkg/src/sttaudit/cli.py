"""Command-line interface driving the audit pipeline and review service."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .backends import MockConfig
from .pipeline import PipelineError, load_config, run_pipeline


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--output", help="override the configured output directory")
    parser.add_argument("--seed", type=int, help="override the configured seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sttaudit",
        description="Detect, adjudicate, and analyze speech-to-text hallucinations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ingest", "load and validate the corpus manifest"),
        ("detect", "flag hallucination candidates from paired runs"),
        ("analyze", "fit disparity statistics over confirmed candidates"),
        ("report", "write the JSON and Markdown report"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("vad", help="compute non-vocal profiles for every segment")
    _add_common(p)
    p.add_argument("--dump-frames", action="store_true",
                   help="also write per-frame decisions as CSV under vad/frames/")

    p = sub.add_parser("transcribe", help="run configured backends over the corpus")
    _add_common(p)
    p.add_argument("--backend", help="only this backend id")
    p.add_argument("--run-tag", help="only this run tag")

    p = sub.add_parser("simulate", help="full pipeline against the mock backend")
    _add_common(p)
    p.add_argument("--mock-config", help="JSON file overriding the mock settings")

    p = sub.add_parser("serve", help="start the adjudication HTTP service")
    _add_common(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui", help="directory holding the built review UI (index.html + dist/)")

    return parser


_STAGES_FOR = {
    "ingest": ("ingest",),
    "vad": ("ingest", "vad"),
    "transcribe": ("ingest", "vad", "transcribe"),
    "detect": ("ingest", "vad", "transcribe", "detect"),
    "analyze": ("ingest", "vad", "transcribe", "detect", "autolabel", "analyze"),
    "report": ("ingest", "vad", "transcribe", "detect", "autolabel", "analyze", "report"),
    "simulate": None,  # all stages
}


def _dump_vad_frames(config) -> None:
    """Write per-frame VAD decisions as one CSV per segment."""
    import csv

    from .audio import read_wav
    from .corpus import load_manifest
    from .pipeline import corpus_path
    from .vad import frame_decisions, profile_for_name

    output_dir = Path(config.output_dir)
    corpus = load_manifest(corpus_path(output_dir), check_audio=False)
    cfg = profile_for_name(config.vad_profile)
    frames_dir = output_dir / "vad" / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for segment_id in corpus.segment_ids():
        samples, rate = read_wav(corpus.segments[segment_id].audio_path)
        with (frames_dir / f"{segment_id}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "start_s", "energy_db", "vocal"])
            for frame in frame_decisions(samples, rate, cfg):
                writer.writerow(
                    [frame.index, f"{frame.start_s:.3f}", f"{frame.energy_db:.2f}",
                     int(frame.vocal)]
                )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    config = load_config(args.config)
    if args.output:
        config = replace(config, output_dir=args.output)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
        if config.mock is not None:
            config = replace(config, mock=replace(config.mock, base_seed=args.seed))

    if args.command == "serve":
        from .service import serve

        if args.host:
            config = replace(config, host=args.host)
        if args.port:
            config = replace(config, port=args.port)
        serve(config, ui_dir=args.ui)
        return 0

    if args.command == "simulate":
        if args.mock_config:
            overrides = json.loads(Path(args.mock_config).read_text())
            base = config.mock or MockConfig(base_seed=config.seed)
            config = replace(config, mock=replace(base, **overrides))
        config = replace(config, auto_label=True)
        if "simulator" not in config.reviewers:
            config.reviewers.append("simulator")

    if args.command == "transcribe":
        if args.backend:
            keep = [b for b in config.backends if b.backend_id == args.backend]
            if not keep:
                print(f"error: unknown backend '{args.backend}'", file=sys.stderr)
                return 2
            config = replace(config, backends=keep)
        if args.run_tag:
            if args.run_tag not in config.run_tags:
                print(f"error: run tag '{args.run_tag}' not in config", file=sys.stderr)
                return 2
            config = replace(config, transcribe_tags=[args.run_tag])

    try:
        result = run_pipeline(config, stages=_STAGES_FOR.get(args.command))
        if args.command == "vad" and args.dump_frames:
            _dump_vad_frames(config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"output: {result.output_dir}")
    if result.ran:
        print("ran stages: " + ", ".join(result.ran))
    if result.skipped:
        print("skipped (inputs unchanged): " + ", ".join(result.skipped))
    return 0


if __name__ == "__main__":
    sys.exit(main())
