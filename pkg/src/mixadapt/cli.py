"""Command line interface.

Subcommands: synth, train, predict, eval, cv, curve, compare, introspect.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Output files are written atomically (temp file + rename). MIXADAPT_THREADS
sets the default worker count; computation is deterministic regardless.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from typing import Callable, TextIO

import numpy as np

from . import baselines, chain, corpus, evaluate, mega, modelio, synth, systems
from .baselines import BaselineConfig
from .chain import ChainModel
from .corpus import Dataset, ParseError
from .mega import MegaHyperparams, MegaModel
from .optim import NumericError

THREADS_ENV = "MIXADAPT_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def atomic_write(path: str, writer: Callable[[TextIO], None]) -> None:
    """Write via a sibling temp file and rename, so readers never observe a
    partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".mixadapt-", dir=directory)
    try:
        with os.fdopen(fd, "w") as stream:
            writer(stream)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _resolve_threads(value: int | None) -> int:
    if value is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None:
            return 1
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("thread count must be at least 1")
    return value


_CONFIG_KEYS = {
    "sigma2": float,
    "beta_a": float,
    "beta_b": float,
    "max_cem_iterations": int,
    "psi_sweeps": int,
    "seed": int,
    "threads": int,
}


def _read_config_file(path: str) -> dict:
    values: dict = {}
    with open(path) as stream:
        for lineno, line in enumerate(stream, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ParseError("expected key=value", lineno)
            key, _, raw = text.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ParseError(f"unknown config key {key!r}", lineno)
            try:
                values[key] = _CONFIG_KEYS[key](raw.strip())
            except ValueError:
                raise ParseError(f"bad value for {key}: {raw.strip()!r}", lineno) from None
    return values


def _merged_option(args, config: dict, name: str, default):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    return config.get(name, default)


def _hyper_from(args, config: dict) -> MegaHyperparams:
    return MegaHyperparams(
        sigma2=_merged_option(args, config, "sigma2", 1.0),
        beta_a=_merged_option(args, config, "beta_a", 2.0),
        beta_b=_merged_option(args, config, "beta_b", 2.0),
        max_cem_iterations=_merged_option(args, config, "max_cem_iterations", 5),
        psi_sweeps=_merged_option(args, config, "psi_sweeps", 20),
    )


def _baseline_config_from(args, config: dict) -> BaselineConfig:
    return BaselineConfig(
        sigma2=_merged_option(args, config, "sigma2", 1.0),
        dev_seed=int(_merged_option(args, config, "seed", 13)),
    )


def _load_dataset(path: str) -> Dataset:
    with open(path) as stream:
        return corpus.parse_classification(stream)


def _load_model(path: str):
    with open(path) as stream:
        return modelio.load_model(stream)


def _load_frozen(path: str, predictor) -> Dataset:
    with open(path) as stream:
        return corpus.parse_classification(
            stream, predictor.feature_alphabet, predictor.label_alphabet
        )


def cmd_synth(args) -> int:
    with open(args.spec) as stream:
        spec = synth.parse_synth_spec(stream)
    if args.seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=args.seed)
    result = synth.generate_synthetic(spec)
    os.makedirs(args.out, exist_ok=True)
    atomic_write(os.path.join(args.out, "train.tsv"),
                 lambda s: corpus.serialize_classification(result.train, s))
    atomic_write(os.path.join(args.out, "test.tsv"),
                 lambda s: corpus.serialize_classification(result.test, s))
    atomic_write(os.path.join(args.out, "truth.model"),
                 lambda s: modelio.save_model(result.truth, s))
    return EXIT_OK


def cmd_train(args) -> int:
    config = _read_config_file(args.config) if args.config else {}
    _resolve_threads(_merged_option(args, config, "threads", None))
    system = args.system
    trace = None
    if system in systems.SEQUENCE_SYSTEMS:
        with open(args.data) as stream:
            seqdata = corpus.parse_sequences(stream)
        mode = chain.MODE_MEGA if system == "mega-memm" else chain.MODE_PLAIN
        cfg = _hyper_from(args, config) if mode == chain.MODE_MEGA else None
        model, trace = chain.train_memm(seqdata, cfg, mode)
    else:
        dataset = _load_dataset(args.data)
        if system == systems.MEGA_SYSTEM:
            model, trace = mega.train_cem(dataset, _hyper_from(args, config))
        else:
            model = baselines.train_baseline(
                baselines.BaselineKind(system), dataset, _baseline_config_from(args, config)
            )
    atomic_write(args.model, lambda s: modelio.save_model(model, s))
    if args.trace:
        if trace is None:
            raise ValueError(f"system {system!r} produces no training trace")
        atomic_write(args.trace, trace.to_tsv)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    if isinstance(model, ChainModel):
        with open(args.data) as stream:
            seqdata = corpus.parse_sequences(stream)
        decoded = chain.decode_dataset(model, seqdata)
        atomic_write(args.out, lambda s: corpus.serialize_sequences(decoded, s))
        return EXIT_OK
    dataset = _load_frozen(args.data, model)

    def write(stream: TextIO):
        for ins in dataset.instances:
            gold = dataset.label_alphabet.name(ins.label)
            pred = dataset.label_alphabet.name(model.predict(ins.features))
            stream.write(f"{gold}\t{pred}\n")

    atomic_write(args.out, write)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load_model(args.model)
    if isinstance(model, ChainModel):
        with open(args.data) as stream:
            seqdata = corpus.parse_sequences(stream)
        decoded = chain.decode_dataset(model, seqdata)
        gold_tags = [[t.tag for t in seq.tokens] for seq in seqdata.sequences]
        pred_tags = [[t.tag for t in seq.tokens] for seq in decoded.sequences]
        flat_gold = [t for seq in gold_tags for t in seq]
        flat_pred = [t for seq in pred_tags for t in seq]
        acc = evaluate.accuracy(flat_gold, flat_pred)
        score = evaluate.chunk_f1(gold_tags, pred_tags)

        def write(stream: TextIO):
            stream.write(f"token_accuracy\t{100.0 * acc:.3f}\n")
            stream.write(f"chunk_precision\t{100.0 * score.precision:.3f}\n")
            stream.write(f"chunk_recall\t{100.0 * score.recall:.3f}\n")
            stream.write(f"chunk_f1\t{100.0 * score.f1:.3f}\n")

        atomic_write(args.out, write)
        return EXIT_OK
    dataset = _load_frozen(args.data, model)
    report = evaluate.evaluate_classifier(model, dataset)
    atomic_write(args.out, lambda s: s.write(f"accuracy\t{100.0 * report.accuracy:.3f}\n"))
    return EXIT_OK


def cmd_cv(args) -> int:
    config = _read_config_file(args.config) if args.config else {}
    dataset = _load_dataset(args.data)
    trainer = systems.make_trainer(
        args.system, _hyper_from(args, config), _baseline_config_from(args, config)
    )
    result = evaluate.cross_validate(trainer, dataset, args.k, args.seed)

    def write(stream: TextIO):
        stream.write("fold\taccuracy\n")
        for i, rep in enumerate(result.fold_reports):
            stream.write(f"{i}\t{100.0 * rep.accuracy:.3f}\n")
        stream.write(f"mean\t{100.0 * result.mean_accuracy:.3f}\n")

    atomic_write(args.out, write)
    return EXIT_OK


def cmd_curve(args) -> int:
    config = _read_config_file(args.config) if args.config else {}
    dataset = _load_dataset(args.data)
    names = [s.strip() for s in args.systems.split(",") if s.strip()]
    for name in names:
        if name not in systems.CLASSIFICATION_SYSTEMS:
            raise UsageError(f"unknown system {name!r}")
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad sizes list {args.sizes!r}") from None
    test_set = _load_test_for_curve(args.test, dataset)
    trainers = {
        name: systems.make_trainer(name, _hyper_from(args, config), _baseline_config_from(args, config))
        for name in names
    }
    results = evaluate.learning_curve(trainers, dataset, test_set, sizes, args.seed)

    def write(stream: TextIO):
        stream.write("system\tsize\taccuracy\n")
        for name in names:
            for size, acc in results[name]:
                stream.write(f"{name}\t{size}\t{100.0 * acc:.3f}\n")

    atomic_write(args.out, write)
    return EXIT_OK


def _load_test_for_curve(path: str, train_set: Dataset) -> Dataset:
    with open(path) as stream:
        return corpus.parse_classification(
            stream, train_set.feature_alphabet, train_set.label_alphabet
        )


def _read_predictions(path: str) -> tuple[list[str], list[str]]:
    gold, pred = [], []
    with open(path) as stream:
        for lineno, line in enumerate(stream, start=1):
            text = line.rstrip("\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            fields = text.split("\t")
            if len(fields) != 2:
                raise ParseError("expected `<gold>\\t<predicted>`", lineno)
            gold.append(fields[0])
            pred.append(fields[1])
    return gold, pred


def cmd_compare(args) -> int:
    gold_a, pred_a = _read_predictions(args.a)
    gold_b, pred_b = _read_predictions(args.b)
    if len(gold_a) != len(gold_b):
        raise ValueError("prediction files differ in length")
    if gold_a != gold_b:
        raise ValueError("prediction files disagree on gold labels")
    if not gold_a:
        raise ValueError("empty prediction files")
    correct_a = [g == p for g, p in zip(gold_a, pred_a)]
    correct_b = [g == p for g, p in zip(gold_b, pred_b)]
    acc_a = 100.0 * sum(correct_a) / len(correct_a)
    acc_b = 100.0 * sum(correct_b) / len(correct_b)
    statistic, p_value = evaluate.mcnemar(correct_a, correct_b)
    name_a, name_b = args.name_a, args.name_b

    def write(stream: TextIO):
        stream.write(evaluate.format_report({name_a: acc_a, name_b: acc_b}, target=name_b))
        stream.write("mcnemar\n")
        b = sum(1 for x, y in zip(correct_a, correct_b) if x and not y)
        c = sum(1 for x, y in zip(correct_a, correct_b) if y and not x)
        stream.write(f"  b\t{b}\n  c\t{c}\n")
        stream.write(f"  statistic\t{statistic:.6g}\n")
        stream.write(f"  p_value\t{p_value:.6g}\n")

    atomic_write(args.out, write)
    return EXIT_OK


def cmd_introspect(args) -> int:
    model = _load_model(args.model)
    if not isinstance(model, MegaModel):
        raise ValueError("introspect needs an adaptation mixture model")
    dataset = _load_frozen(args.data, model)

    def write(stream: TextIO):
        stream.write("p_specific\tp_general\tpredicted\tgold\n")
        for ins in dataset.instances:
            out = mega.predict_mixture(model, ins.features)
            stream.write(
                f"{1.0 - out.shared_weight!r}\t{out.shared_weight!r}"
                f"\t{dataset.label_alphabet.name(out.label)}"
                f"\t{dataset.label_alphabet.name(ins.label)}\n"
            )

    atomic_write(args.out, write)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="mixadapt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus from a key=value spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.set_defaults(run=cmd_synth)

    p = sub.add_parser("train", help="train a system and save the model")
    p.add_argument("--data", required=True)
    p.add_argument("--system", required=True, choices=systems.ALL_SYSTEMS)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--trace", help="TSV training trace (mixture systems)")
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--beta-a", dest="beta_a", type=float)
    p.add_argument("--beta-b", dest="beta_b", type=float)
    p.add_argument("--max-cem-iterations", dest="max_cem_iterations", type=int)
    p.add_argument("--psi-sweeps", dest="psi_sweeps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(run=cmd_train)

    p = sub.add_parser("predict", help="write predictions for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("cv", help="k-fold cross-validation of a system")
    p.add_argument("--data", required=True)
    p.add_argument("--system", required=True, choices=systems.CLASSIFICATION_SYSTEMS)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--beta-a", dest="beta_a", type=float)
    p.add_argument("--beta-b", dest="beta_b", type=float)
    p.add_argument("--max-cem-iterations", dest="max_cem_iterations", type=int)
    p.add_argument("--psi-sweeps", dest="psi_sweeps", type=int)
    p.set_defaults(run=cmd_cv)

    p = sub.add_parser("curve", help="learning curve over in-domain sizes")
    p.add_argument("--data", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--systems", required=True, help="comma-separated system names")
    p.add_argument("--sizes", required=True, help="comma-separated in-domain sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--beta-a", dest="beta_a", type=float)
    p.add_argument("--beta-b", dest="beta_b", type=float)
    p.add_argument("--max-cem-iterations", dest="max_cem_iterations", type=int)
    p.add_argument("--psi-sweeps", dest="psi_sweeps", type=int)
    p.set_defaults(run=cmd_curve)

    p = sub.add_parser("compare", help="paired comparison of two prediction files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--name-a", dest="name_a", default="system_a")
    p.add_argument("--name-b", dest="name_b", default="system_b")
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_compare)

    p = sub.add_parser("introspect", help="per-example latent component posteriors")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=cmd_introspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
