"""Command-line entry point: label, train, eval, predict, introspect, serve.

Exit codes: 0 ok, 2 usage, 3 data error, 4 training divergence, 5 I/O.
Errors print one machine-parsable line to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import corpus, model_io, recurrent, training
from .baselines import ConfigError as BaselineConfigError
from .embeddings import EmbeddingError
from .text import EmptyTitleError, encode

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4
EXIT_IO = 5

_TRAIN_FLAGS = {
    "model_kind": str, "hidden_size": int, "embed_dim": int, "embedding_mode": str,
    "glove_path": str, "max_seq_len": int, "min_count": int, "max_vocab": int,
    "batch_size": int, "max_epochs": int, "learning_rate": float,
    "plateau_patience": int, "plateau_factor": float, "early_stop_patience": int,
    "min_delta": float, "seed": int, "validation_fraction": float,
    "svm_lambda": float, "svm_epochs": int, "embeddings_label": str,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="headliner",
                                     description="Headline popularity prediction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_label = sub.add_parser("label", help="assign popularity labels by per-group median split")
    p_label.add_argument("--input", required=True)
    p_label.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p_label.add_argument("--output", required=True)

    p_train = sub.add_parser("train", help="train a model on labeled data")
    p_train.add_argument("--data", required=True, help="labeled JSONL (output of `label`)")
    p_train.add_argument("--model-out")
    p_train.add_argument("--report-out")
    p_train.add_argument("--config", help="JSON file of training settings; flags override")
    p_train.add_argument("--kfold", type=int, default=None,
                         help="run k-fold evaluation instead of a single 80/20 split")
    for name, typ in _TRAIN_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        p_train.add_argument(flag, type=typ, default=None, dest=f"cfg_{name}")

    p_eval = sub.add_parser("eval", help="evaluate a saved model on labeled data")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)

    p_predict = sub.add_parser("predict", help="score one title")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--title", required=True)

    p_intro = sub.add_parser("introspect", help="per-word contribution scores for one title")
    p_intro.add_argument("--model", required=True)
    p_intro.add_argument("--title", required=True)

    p_serve = sub.add_parser("serve", help="start the HTTP scoring service")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8010)
    p_serve.add_argument("--cors-origin", action="append", default=None,
                         help="allowed CORS origin, repeatable (default: *)")
    return parser


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _train_config(args) -> training.TrainConfig:
    values: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise training.ConfigError("config file must hold a JSON object")
        values.update(loaded)
    for name in _TRAIN_FLAGS:
        flag_value = getattr(args, f"cfg_{name}")
        if flag_value is not None:
            values[name] = flag_value
    return training.TrainConfig.from_dict(values)


def cmd_label(args) -> int:
    data = corpus.load_dataset(args.input, format=args.format)
    labeled = corpus.label_by_group_median(data)
    corpus.save_labeled(labeled, args.output)
    print(f"labeled {len(labeled)} headlines -> {args.output}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _train_config(args)
    data = corpus.load_labeled(args.data)
    if args.kfold is not None:
        result = training.run_kfold(data, config, k=args.kfold)
        table = training.format_results_table([result.table_row])
        print(table, end="")
        print(f"mean accuracy {result.mean_accuracy:.4f} +- {result.std_accuracy:.4f} "
              f"over {args.kfold} folds")
        if args.report_out:
            _atomic_write(args.report_out, json.dumps(result.to_dict(), sort_keys=True) + "\n")
        return EXIT_OK
    if not args.model_out:
        print("error: usage: --model-out is required unless --kfold is given", file=sys.stderr)
        return EXIT_USAGE
    train_part, test_part = training.stratified_split(data, 0.2, config.seed)
    def log_epoch(stats):
        print(f"epoch {stats.epoch}: train_loss={stats.train_loss:.4f} "
              f"val_loss={stats.val_loss:.4f} val_acc={stats.val_accuracy:.4f} "
              f"lr={stats.learning_rate:.6g}", file=sys.stderr)
    model, report = training.fit(train_part, config, on_epoch=log_epoch)
    test_eval = training.evaluate(model, test_part)
    model_io.save_model(model, args.model_out)
    payload = {"fit": report.to_dict(), "test_eval": test_eval.to_dict(),
               "config": config.to_dict()}
    if args.report_out:
        _atomic_write(args.report_out, json.dumps(payload, sort_keys=True) + "\n")
    print(f"model -> {args.model_out}")
    print(f"test accuracy {test_eval.accuracy:.4f} on {test_eval.n} held-out examples")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = model_io.load_model(args.model)
    data = corpus.load_labeled(args.data)
    report = training.evaluate(model, data)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = model_io.load_model(args.model)
    seq = encode(args.title, model.vocab, model.max_seq_len)
    p = model.score_seq(seq)
    label = "popular" if p > 0.5 else "unpopular"
    print(json.dumps({"probability": p, "label": label}))
    return EXIT_OK


def cmd_introspect(args) -> int:
    model = model_io.load_model(args.model)
    if model.kind not in ("bilstm", "lstm"):
        raise corpus.DataError(f"introspection needs a recurrent model, got {model.kind!r}")
    seq = encode(args.title, model.vocab, model.max_seq_len)
    result = recurrent.introspect(model, seq)
    width = max(len(w.token) for w in result.words)
    for w in result.words:
        print(f"{w.token.ljust(width)}  {w.score:.4f}")
    print()
    print(json.dumps({"tokens": [{"token": w.token, "contribution": w.score}
                                 for w in result.words],
                      "probability": result.fused_score}))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model = model_io.load_model(args.model)
    if model.kind not in ("bilstm", "lstm"):
        raise corpus.DataError(f"the scoring service needs a recurrent model, got {model.kind!r}")
    origins = args.cors_origin if args.cors_origin else ["*"]
    app = create_app(model=model, cors_origins=origins)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "label": cmd_label,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "introspect": cmd_introspect,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (corpus.DataError, EmptyTitleError, EmbeddingError, model_io.ModelIOError,
            training.ConfigError, BaselineConfigError, json.JSONDecodeError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except training.TrainingDivergedError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
