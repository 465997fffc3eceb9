"""Command-line entry point: preprocess, synth, train, eval, predict, gradcheck.

Exit codes: 0 success, 1 usage, 2 I/O, 3 validation/config, 4 numeric failure.
Results go to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

from .data import IMAGE_SUFFIXES, LABELS, generate_synthetic_glyphs, scan_dataset, stratified_split
from .diagnostics import gradcheck_suite
from .errors import CheckpointError, ConfigError, DatasetError, NumericError, ShapeError
from .imaging.pipeline import PipelineConfig, pipeline_stages
from .imaging.pnm import load_image, save_image
from .model import IslCnnConfig, build_isl_cnn, load_checkpoint, save_checkpoint
from .train import (
    METRICS_HEADER, TrainConfig, evaluate, format_metrics_csv, iter_epochs, predict_image,
)

log = logging.getLogger("islr")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class DataConfig:
    root: str | None = None
    val_ratio: float = 0.2

    def __post_init__(self):
        if not 0 < self.val_ratio < 1:
            raise ConfigError(f"val_ratio must be in (0, 1), got {self.val_ratio}")


@dataclass(frozen=True)
class OutputConfig:
    checkpoint: str | None = None
    metrics: str | None = None


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    model: IslCnnConfig = field(default_factory=IslCnnConfig)
    data: DataConfig = field(default_factory=DataConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        if self.model.input_size != self.pipeline.model_input_size:
            raise ConfigError(f"model.input_size {self.model.input_size} differs from "
                              f"pipeline.model_input_size {self.pipeline.model_input_size}")
        if self.model.input_channels != 1:
            raise ConfigError("the pipeline produces one channel; model.input_channels must be 1")
        if self.model.num_classes > len(LABELS):
            raise ConfigError(f"at most {len(LABELS)} classes are defined, "
                              f"got num_classes={self.model.num_classes}")


def _section(cls, d, name):
    if not isinstance(d, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    unknown = set(d) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"bad {name} section: {exc}") from exc


def parse_run_config(doc: dict) -> RunConfig:
    """Build a RunConfig from a JSON object; absent keys take their defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    sections = {f.name: f.default_factory for f in fields(RunConfig)}
    unknown = set(doc) - set(sections)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {}
    for name, factory in sections.items():
        parts[name] = _section(type(factory()), doc.get(name, {}), name)
    return RunConfig(**parts)


def load_run_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_run_config(doc)


def best_checkpoint_path(path) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.best{p.suffix}")


# ------------------------------------------------------------ subcommands

def cmd_preprocess(args, out) -> int:
    cfg = load_run_config(args.config).pipeline
    src, dst = Path(args.input), Path(args.output)
    if not src.exists():
        raise FileNotFoundError(f"input not found: {src}")
    if src.is_dir():
        files = sorted(p for p in src.rglob("*")
                       if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    else:
        files, src = [src], src.parent
    for path in files:
        rel = path.relative_to(src)
        target_dir = dst / rel.parent
        target_dir.mkdir(parents=True, exist_ok=True)
        stages = pipeline_stages(load_image(path), cfg)
        if args.stage_dump:
            for k, (name, img) in enumerate(stages):
                target = target_dir / f"{rel.stem}.{k:02d}_{name}.pgm"
                save_image(img, target)
                print(target, file=out)
        else:
            target = target_dir / f"{rel.stem}.pgm"
            save_image(stages[-1][1], target)
            print(target, file=out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    index = generate_synthetic_glyphs(args.count, args.seed, args.out)
    print(json.dumps({"root": str(args.out), "images": len(index), "classes": len(index.counts)}),
          file=out)
    return EXIT_OK


def cmd_train(args, out) -> int:
    cfg = load_run_config(args.config)
    train_cfg = cfg.train if args.seed is None else replace(cfg.train, seed=args.seed)
    root = args.data or cfg.data.root
    ckpt = args.out or cfg.outputs.checkpoint
    metrics_path = args.metrics or cfg.outputs.metrics
    if root is None or ckpt is None:
        raise UsageError("train needs --data and --out (or data.root / outputs.checkpoint)")

    index = scan_dataset(root)
    split = stratified_split(index, cfg.data.val_ratio, train_cfg.seed)
    log.info("dataset %s: %d train / %d val images", root, len(split.train), len(split.val))
    model = build_isl_cnn(cfg.model, seed=train_cfg.seed)
    label_map = list(LABELS[:cfg.model.num_classes])
    best_path = best_checkpoint_path(ckpt)
    Path(ckpt).parent.mkdir(parents=True, exist_ok=True)

    history, best = [], -1.0
    print(",".join(METRICS_HEADER), file=out)
    for m in iter_epochs(model, split, cfg.pipeline, train_cfg):
        history.append(m)
        print(format_metrics_csv([m]).splitlines()[1], file=out, flush=True)
        if m.val_accuracy > best:
            best = m.val_accuracy
            save_checkpoint(model, label_map, best_path)
        if metrics_path:
            Path(metrics_path).write_text(format_metrics_csv(history), encoding="utf-8")
    save_checkpoint(model, label_map, ckpt)
    log.info("final checkpoint %s, best (val_acc=%.4f) %s", ckpt, best, best_path)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    cfg = load_run_config(args.config)
    model, labels = load_checkpoint(args.model)
    index = scan_dataset(args.data)
    if any(e.label >= len(labels) for e in index.entries):
        raise ShapeError(f"dataset has classes beyond the checkpoint's {len(labels)} labels")
    acc, loss = evaluate(model, index.entries, cfg.pipeline)
    print(json.dumps({"accuracy": acc, "loss": loss, "samples": len(index)}), file=out)
    return EXIT_OK


def cmd_predict(args, out) -> int:
    cfg = load_run_config(args.config)
    model, labels = load_checkpoint(args.model)
    label, conf = predict_image(model, labels, args.image, cfg.pipeline)
    print(f"{label} {conf:.6f}", file=out)
    return EXIT_OK


def cmd_gradcheck(args, out) -> int:
    rows = gradcheck_suite(args.tolerance, args.model_tolerance, args.seed)
    print(f"{'layer':<24}{'max_rel_error':>16}{'tolerance':>12}  status", file=out)
    for name, r in rows:
        status = "ok" if r.passed else "FAIL"
        print(f"{name:<24}{r.max_rel_error:>16.3e}{r.tolerance:>12.1e}  {status}", file=out)
    failed = [name for name, r in rows if not r.passed]
    if failed:
        raise NumericError(f"gradient check failed for: {', '.join(failed)}")
    return EXIT_OK


# ----------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="islr", description="Hand-sign character recognition toolkit.")
    p.add_argument("--log-level", default="INFO",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("preprocess", help="run the preprocessing pipeline over images")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--config")
    s.add_argument("--stage-dump", action="store_true")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("synth", help="generate the synthetic glyph dataset")
    s.add_argument("--out", required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="train the classifier")
    s.add_argument("--data")
    s.add_argument("--out")
    s.add_argument("--config")
    s.add_argument("--metrics")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="evaluate a checkpoint on a dataset tree")
    s.add_argument("--data", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("predict", help="classify one image")
    s.add_argument("--image", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("gradcheck", help="finite-difference check of every layer")
    s.add_argument("--tolerance", type=float, default=1e-6)
    s.add_argument("--model-tolerance", type=float, default=1e-4)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_gradcheck)
    return p


def run_cli(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args, out)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    except NumericError as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (ConfigError, ShapeError, DatasetError) as exc:
        return _fail(exc, EXIT_CONFIG)
    except (OSError, CheckpointError) as exc:
        return _fail(exc, EXIT_IO)


def _fail(exc: Exception, code: int) -> int:
    print(f"islr: error: {exc}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run_cli())
