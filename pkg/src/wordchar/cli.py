"""Command-line entry point: train, eval, predict, ensemble-train, compare.

Exit codes: 0 success, 2 usage or data error, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import RunConfig, build_run_config, read_config_file
from .ensemble import load_ensemble, save_ensemble, train_ensemble
from .errors import NumericDivergenceError, WordCharError
from .experiments import compare_configurations, format_comparison
from .metrics import report
from .serialize import load_model, save_model
from .text import load_dataset, load_lexicon
from .training import evaluate, train

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 2, 3


def _emit(**fields) -> None:
    print(" ".join(f"{k}={_fmt(v)}" for k, v in fields.items()), flush=True)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _epoch_line(record, member=None) -> None:
    fields = {} if member is None else {"member": member}
    _emit(**fields, epoch=record.epoch, loss=record.loss, train_accuracy=record.train_accuracy,
          val_macro_f1=record.val_macro_f1, elapsed=record.elapsed)


def _parse_set(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise WordCharError(f"--set expects KEY=VALUE, got {pair!r}")
        k, v = pair.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _run_config(args) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = _parse_set(args.set)
    for key in ("seed", "epochs", "word_embeddings", "lexicon", "validation", "members", "jobs"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "baseline_word_only", False):
        overrides["word_char"] = False
    return build_run_config(file_values, overrides)


def _training_inputs(args, run: RunConfig):
    examples = load_dataset(args.train)
    validation = load_dataset(run.validation) if run.validation else None
    lexicon = load_lexicon(run.lexicon) if run.lexicon else None
    return examples, validation, lexicon


def cmd_train(args) -> int:
    run = _run_config(args)
    examples, validation, lexicon = _training_inputs(args, run)
    model, _ = train(examples, run.train, validation=validation, word_vectors=run.word_embeddings,
                     lexicon=lexicon, on_epoch=_epoch_line)
    save_model(model, args.model_out)
    _emit(model=args.model_out, architecture="word-char" if model.config.word_char else "word-only",
          validation_f1=model.validation_f1)
    return EXIT_OK


def cmd_ensemble_train(args) -> int:
    run = _run_config(args)
    if run.members < 1:
        raise WordCharError(f"--members must be >= 1, got {run.members}")
    examples, validation, lexicon = _training_inputs(args, run)
    ensemble, _ = train_ensemble(examples, run.train, run.members, validation=validation,
                                 word_vectors=run.word_embeddings, lexicon=lexicon, jobs=run.jobs,
                                 on_epoch=lambda i, rec: _epoch_line(rec, member=i))
    manifest = save_ensemble(ensemble, args.out_dir)
    for i, (seed, f1) in enumerate(zip(ensemble.seeds, ensemble.validation_f1)):
        _emit(member=i, seed=seed, validation_f1=f1)
    _emit(manifest=manifest)
    return EXIT_OK


def cmd_eval(args) -> int:
    data = load_dataset(args.data)
    if args.ensemble:
        ens = load_ensemble(args.ensemble)
        unseen = sorted({ex.label for ex in data} - set(ens.labels))
        if unseen:
            raise WordCharError(f"labels not known to the model: {', '.join(unseen)}")
        if not data:
            raise WordCharError("cannot evaluate on an empty data set")
        batch = ens.members[0].encode(data)
        ids, _ = ens.predict_ids(batch)
        result = report(batch.labels, ids, ens.labels)
    else:
        result = evaluate(load_model(args.model), data)
    print(result.format_table())
    return EXIT_OK


def cmd_predict(args) -> int:
    lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    if args.ensemble:
        ens = load_ensemble(args.ensemble)
        if lines:
            ids, agree = ens.predict_ids(lines)
            for i, frac in zip(ids, agree):
                print(f"{ens.labels[int(i)]}\t{frac:.6f}")
        return EXIT_OK
    model = load_model(args.model)
    if lines:
        probs = model.predict_proba(lines)
        for row in probs:
            k = int(row.argmax())
            print(f"{model.labels[k]}\t{row[k]:.6f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    run = _run_config(args)
    train_set = load_dataset(args.train)
    test_set = load_dataset(args.test)
    lexicon = load_lexicon(run.lexicon) if run.lexicon else None
    singles, ensembles = compare_configurations(train_set, test_set, run.train, word_vectors=run.word_embeddings,
                                                members=run.members, lexicon=lexicon, log=print)
    print(format_comparison(singles, ensembles))
    return EXIT_OK


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train", required=True, help="training TSV (label<TAB>text)")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--validation", help="validation TSV; replaces the random eval_split hold-out")
    p.add_argument("--word-embeddings", dest="word_embeddings", help="pre-trained word vectors, 'token v1 ... vd'")
    p.add_argument("--lexicon", help="word list for the dictionary-greedy tokenizer")
    p.add_argument("--baseline-word-only", action="store_true", help="disable the char conv path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordchar", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model")
    _add_training_flags(p)
    p.add_argument("--model-out", default="model.bin")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ensemble-train", help="train E seed-varied models and a manifest")
    _add_training_flags(p)
    p.add_argument("--members", type=int)
    p.add_argument("--jobs", type=int, help="members trained in parallel")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ensemble_train)

    p = sub.add_parser("eval", help="print per-class scores and macro F1")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--ensemble", help="manifest file or ensemble directory")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="label one query per input line")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--ensemble", help="manifest file or ensemble directory")
    p.add_argument("--input", required=True, help="UTF-8 text file, one query per line")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="train all embedding settings and ensembles, print score tables")
    _add_training_flags(p)
    p.add_argument("--test", required=True)
    p.add_argument("--members", type=int)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except NumericDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (WordCharError, OSError, UnicodeDecodeError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
