"""Command line entry point: ``taxo split|predict|evaluate|leaderboard``.

Every long flag can also be set through an environment variable named
``TAXO_`` plus the flag in upper snake case (``--seed`` -> ``TAXO_SEED``).
Explicit flags win over the environment.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import gold as goldlib
from .embeddings import load_function_words, load_vectors
from .predictors import PREDICTORS, ClassifierModel, coerce_params, frequency_prior, make_predictor
from .predictors.common import Prediction
from .scorer import evaluate
from .taxonomy import PARTS_OF_SPEECH, load_taxonomy

log = logging.getLogger("taxoenrich")


class CliError(Exception):
    pass


@contextlib.contextmanager
def atomic_write(path: Path | str):
    """Write through a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _open(path):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _option(parser, flag, required=False, **kw):
    env = os.environ.get("TAXO_" + flag.lstrip("-").replace("-", "_").upper())
    if env is not None:
        kw["default"] = env
        required = False
    parser.add_argument(flag, required=required, **kw)


def _parse_ratio(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad ratio {text!r}") from None


def _parse_param(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


# subcommands

def cmd_split(args) -> None:
    with _open(args.taxonomy) as fh:
        g = load_taxonomy(fh)
    holdout = goldlib.sample_holdout(g, args.pos, args.holdout_fraction, args.seed)
    pruned, gold = goldlib.synthesize_gold(g, args.pos, holdout)

    if args.frequencies:
        with _open(args.frequencies) as fh:
            freq = goldlib.read_frequencies(fh)
        rules = goldlib.FilterConfig()
        base = None
        if args.filter_config:
            with _open(args.filter_config) as fh:
                rules = goldlib.FilterConfig.parse(fh)
            base = Path(args.filter_config).parent
        result = goldlib.filter_orphans(
            list(gold.entries), freq, pruned, rules,
            hypernyms={o: e.synsets() for o, e in gold.entries.items()},
            exclusions=rules.load_exclusions(base),
        )
        log.info("filter rejected %d of %d orphans", len(result.rejected), len(gold.entries))
        gold = gold.subset(result.accepted)

    train = goldlib.build_train_set(pruned, args.pos, args.min_depth)
    public, private = goldlib.split_public_private(gold, args.ratio, args.seed)

    out = Path(args.out)
    with atomic_write(out / "taxonomy.tsv") as fh:
        pruned.dump(fh)
    with atomic_write(out / "train.tsv") as fh:
        goldlib.write_train(train, fh)
    for name, part in (("public", public), ("private", private)):
        with atomic_write(out / f"{name}.tsv") as fh:
            goldlib.write_gold(part, fh)
        with atomic_write(out / f"{name}_orphans.txt") as fh:
            fh.writelines(o + "\n" for o in part.entries)

    rows = [
        ("Total in taxonomy", len(g.ids(args.pos))),
        ("Train set", len(train)),
        ("Private test set", len(private)),
        ("Public test set", len(public)),
    ]
    print(f"{'':<20}{args.pos}")
    for label, value in rows:
        print(f"{label:<20}{value}")


def cmd_predict(args) -> None:
    if args.predictor not in PREDICTORS:
        raise CliError(f"unknown predictor {args.predictor!r}; choose from {', '.join(PREDICTORS)}")
    if not 1 <= args.k <= goldlib.MAX_CANDIDATES:
        raise CliError(f"--k must be between 1 and {goldlib.MAX_CANDIDATES}")
    with _open(args.taxonomy) as fh:
        g = load_taxonomy(fh)
    with _open(args.vectors) as fh:
        store = load_vectors(fh)
    with _open(args.orphans) as fh:
        orphans = list(dict.fromkeys(line.strip() for line in fh if line.strip()))
    function_words = frozenset()
    if args.function_words:
        with _open(args.function_words) as fh:
            function_words = load_function_words(fh)
    train = model = None
    if args.model:
        model = ClassifierModel.load(args.model)
    elif args.train:
        with _open(args.train) as fh:
            train = goldlib.read_train(fh)

    predict = make_predictor(
        args.predictor, g, store, args.pos, coerce_params(dict(args.param)),
        k=args.k, train=train, model=model, seed=args.seed, function_words=function_words,
    )
    if args.save_model and args.predictor == "classifier":
        predict.model.save(args.save_model)
    prior = frequency_prior(g, args.pos, args.k)

    submission = {}
    for orphan in orphans:
        try:
            pred = predict(orphan)
        except Exception as exc:
            raise CliError(f"predicting {orphan!r}: {exc}") from exc
        if not pred.candidates:
            pred = Prediction(orphan, prior, fallback=True)
        submission[orphan] = list(pred.candidates)
    with atomic_write(args.out) as fh:
        goldlib.write_submission(submission, fh)


def _read_gold(path):
    with _open(path) as fh:
        return goldlib.read_gold(fh)


def _read_submission(path, strict):
    with _open(path) as fh:
        return goldlib.read_submission(fh, strict=strict)


def cmd_evaluate(args) -> None:
    gold = _read_gold(args.gold)
    report = evaluate(gold, _read_submission(args.submission, args.strict), args.k, strict=args.strict)
    if report.missing_orphans:
        log.warning("%d gold orphans have no prediction", len(report.missing_orphans))
    summary = report.summary()
    if args.phase:
        summary = f"PHASE\t{args.phase}\n" + summary
    if args.out:
        with atomic_write(args.out) as fh:
            report.write_tsv(fh)
    sys.stdout.write(summary)


def leaderboard(gold, submissions: dict, k: int = 10) -> list[tuple[str, float, float]]:
    """Rows of (name, MAP, MRR) sorted by MAP, then MRR, then name."""
    rows = []
    for name, sub in submissions.items():
        report = evaluate(gold, sub, k)
        rows.append((name, report.map_score, report.mrr_score))
    rows.sort(key=lambda r: (-round(r[1], 12), -round(r[2], 12), r[0]))
    return rows


def cmd_leaderboard(args) -> None:
    gold = _read_gold(args.gold)
    subs = {}
    for path in args.submissions:
        name = Path(path).stem
        if name in subs:
            name = str(path)
        subs[name] = _read_submission(path, False)
    lines = ["Rank\tSubmission\tMAP\tMRR"]
    for rank, (name, map_score, mrr) in enumerate(leaderboard(gold, subs, args.k), 1):
        lines.append(f"{rank}\t{name}\t{map_score:.4f}\t{mrr:.4f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with atomic_write(args.out) as fh:
            fh.write(text)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taxo", description="Taxonomy enrichment toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="synthesize train and public/private gold data by leaf hold-out")
    _option(p, "--taxonomy", required=True)
    _option(p, "--pos", default="noun", choices=PARTS_OF_SPEECH)
    _option(p, "--min-depth", type=int, default=5)
    _option(p, "--holdout-fraction", type=float, default=0.1)
    _option(p, "--ratio", type=_parse_ratio, default=Fraction(1, 3))
    _option(p, "--seed", type=int, default=0)
    _option(p, "--frequencies")
    _option(p, "--filter-config")
    _option(p, "--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("predict", help="write a ranked hypernym submission for a list of orphans")
    _option(p, "--taxonomy", required=True)
    _option(p, "--vectors", required=True)
    _option(p, "--orphans", required=True)
    _option(p, "--predictor", default="baseline")
    _option(p, "--pos", default="noun", choices=PARTS_OF_SPEECH)
    _option(p, "--k", type=int, default=10)
    _option(p, "--seed", type=int, default=0)
    _option(p, "--function-words")
    _option(p, "--train", help="train TSV for the classifier")
    _option(p, "--model", help="saved classifier checkpoint")
    _option(p, "--save-model")
    p.add_argument("--param", action="append", type=_parse_param, default=[], metavar="KEY=VALUE")
    _option(p, "--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a submission against gold (MAP and MRR)")
    _option(p, "--gold", required=True)
    _option(p, "--submission", required=True)
    _option(p, "--k", type=int, default=10)
    _option(p, "--phase")
    _option(p, "--out")
    p.add_argument("--strict", action="store_true", help="turn warnings into errors")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("leaderboard", help="rank several submissions by MAP, MRR tie-break")
    _option(p, "--gold", required=True)
    _option(p, "--k", type=int, default=10)
    _option(p, "--out")
    p.add_argument("submissions", nargs="+")
    p.set_defaults(func=cmd_leaderboard)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if args.command == "predict" and args.predictor not in PREDICTORS:
        parser.error(f"unknown predictor {args.predictor!r}; choose from {', '.join(PREDICTORS)}")
    try:
        args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
