"""Command-line entry points: gen, train, eval, predict, serve, bench.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Diagnostics go to
stderr and are controlled by GESTUREKIT_LOG (error | info | debug); data
outputs (JSON reports, predictions) go to stdout or the named files. The
train/eval/bench report paths also render matplotlib figures next to their
delimited outputs unless figures are switched off.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from gesturekit import __version__
from gesturekit.dataset import load_dataset, save_dataset
from gesturekit.model import ModelConfig, init_model
from gesturekit.rng import mix64
from gesturekit.stream import bench, parse_addr, serve
from gesturekit.synth import CLASS_NAMES, GenConfig, generate_dataset
from gesturekit.training import TrainConfig, evaluate, split, train, write_metrics
from gesturekit.weights_io import load_weights, save_weights
from gesturekit import model as model_mod
from gesturekit import plots

log = logging.getLogger("gesturekit")

_MODEL_INIT_TAG = 0x494E4954  # model init stream, derived from the run seed

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging() -> None:
    name = os.environ.get("GESTUREKIT_LOG", "error").lower()
    level = _LOG_LEVELS.get(name, logging.ERROR)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # runtime failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gesturekit",
        description="Synthetic gesture corpus, CNN+LSTM recognizer, and "
        "streaming inference service.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic gesture corpus")
    p.add_argument("--per-class", type=int, required=True, help="sequences per class")
    p.add_argument("--frames", type=int, default=30, help="frames per sequence")
    p.add_argument("--interval-ms", type=int, default=33, help="frame interval (ms)")
    p.add_argument("--noise", type=float, default=0.02, help="joint noise std")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a recognizer on a JSONL corpus")
    p.add_argument("--data", required=True, help="training corpus (JSONL)")
    p.add_argument("--config", help="training config JSON file")
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out-model", required=True, help="weight file to write")
    p.add_argument("--metrics", help="metrics JSONL path")
    p.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering figures next to the metrics file",
    )
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--figures", help="directory for report figures")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="classify sequences from a JSONL file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="sequences to classify (JSONL)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("serve", help="run the streaming recognition service")
    p.add_argument("--model", required=True)
    p.add_argument("--addr", default="127.0.0.1:8765", help="host:port to bind")
    p.add_argument(
        "--transport", choices=("websocket", "stdio"), default="websocket"
    )
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("bench", help="replay a corpus and report latencies")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--figures", help="directory for the latency figure")
    p.set_defaults(func=_cmd_bench)

    return parser


def _cmd_gen(args) -> int:
    config = GenConfig(
        frames_per_sequence=args.frames,
        frame_interval_ms=args.interval_ms,
        noise_std=args.noise,
        seed=args.seed,
    )
    dataset = generate_dataset(args.per_class, config)
    save_dataset(dataset, args.out)
    log.info("wrote %d sequences to %s", len(dataset), args.out)
    return 0


def _load_train_config(args) -> TrainConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = TrainConfig.from_dict(json.load(fh))
    else:
        config = TrainConfig()
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    return config


def _cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    config = _load_train_config(args)
    train_set, val_set = split(dataset, args.val_fraction, config.seed)
    model = init_model(ModelConfig(), mix64(config.seed, _MODEL_INIT_TAG))
    log.info(
        "training on %d sequences (%d validation), %d epochs",
        len(train_set),
        len(val_set),
        config.epochs,
    )
    trained, metrics = train(model, train_set, val_set, config)
    save_weights(trained, args.out_model)
    log.info("wrote model to %s", args.out_model)
    if metrics.final is not None:
        print(
            json.dumps(
                {"val_accuracy": metrics.final.accuracy}, separators=(",", ":")
            )
        )
    if args.metrics:
        write_metrics(metrics, args.metrics)
        if not args.no_figures:
            stem = Path(args.metrics)
            curves = stem.with_name(stem.stem + "_curves.png")
            confusion = stem.with_name(stem.stem + "_confusion.png")
            plots.training_curves(metrics, curves)
            plots.confusion_matrix_figure(
                metrics.final.confusion, CLASS_NAMES, confusion
            )
            log.info("wrote figures %s, %s", curves, confusion)
    return 0


def _cmd_eval(args) -> int:
    model = load_weights(args.model)
    dataset = load_dataset(args.data)
    result = evaluate(model, dataset)
    print(
        json.dumps(
            {
                "accuracy": result.accuracy,
                "precision": result.precision.tolist(),
                "recall": result.recall.tolist(),
                "confusion": result.confusion.tolist(),
            },
            separators=(",", ":"),
        )
    )
    if args.figures:
        out_dir = Path(args.figures)
        out_dir.mkdir(parents=True, exist_ok=True)
        plots.confusion_matrix_figure(
            result.confusion, CLASS_NAMES, out_dir / "confusion.png"
        )
    return 0


def _cmd_predict(args) -> int:
    model = load_weights(args.model)
    for index, seq in enumerate(load_dataset(args.input)):
        pred = model_mod.predict(model, seq)
        print(
            json.dumps(
                {
                    "index": index,
                    "label": pred.label.label,
                    "confidence": pred.confidence,
                    "true_label": seq.label.label,
                },
                separators=(",", ":"),
            )
        )
    return 0


def _cmd_serve(args) -> int:
    parse_addr(args.addr)  # usage-style validation before binding
    serve(args.model, args.addr, args.transport)
    return 0


def _cmd_bench(args) -> int:
    report, latencies = bench(
        args.model, args.data, args.reps, return_latencies=True
    )
    print(json.dumps(report, separators=(",", ":")))
    if args.figures:
        out_dir = Path(args.figures)
        out_dir.mkdir(parents=True, exist_ok=True)
        plots.latency_figure(latencies, report, out_dir / "latency.png")
    return 0


def main(argv: list[str] | None = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 0
    except BrokenPipeError:
        return 0
    except Exception as exc:  # runtime failure: bad files, busy ports, ...
        log.debug("failure detail", exc_info=True)
        sys.stderr.write(f"gesturekit: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
