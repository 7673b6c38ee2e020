"""Command-line interface.

Subcommands:
  expand        split one MIDI file at a boundary bar and infill a gap
  evaluate      score a (past, new, future) triple of MIDI files
  run           batch experiment driven by a JSON config file
  train-markov  fit a Markov model on a MIDI corpus and save it

Exit codes: 0 success, 1 usage error, 2 data error, 3 partial batch
failure (some pieces produced error rows).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import expansion, harness, metrics, midi_io, tokenizer

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the documented code is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_sequence(path: Path, q: int) -> list[tokenizer.Token]:
    score = midi_io.parse_midi(path.read_bytes())
    return tokenizer.encode(midi_io.quantize(score, q))


def _make_infiller(name: str, q: int, model_path: str | None):
    if name == "copy-past":
        return expansion.CopyPastInfiller()
    if name == "copy-future":
        return expansion.CopyFutureInfiller()
    if name == "random":
        return expansion.RandomInfiller(positions_per_bar=q)
    if model_path is None:
        raise ValueError("infiller 'markov' needs --markov-model (see train-markov)")
    return expansion.MarkovInfiller(expansion.load_markov_model(model_path))


def cmd_expand(args) -> int:
    ts = _load_sequence(Path(args.file), args.q)
    infiller = _make_infiller(args.infiller, args.q, args.markov_model)
    expanded = expansion.expand(ts, args.boundary, args.gap, infiller, args.seed)
    qs = tokenizer.decode(expanded, args.q)
    Path(args.out).write_bytes(midi_io.write_midi(midi_io.to_score(qs)))
    print(f"{args.file}: {tokenizer.bar_count(ts)} bars -> "
          f"{tokenizer.bar_count(expanded)} bars ({args.out})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    past, new, future = (_load_sequence(Path(p), args.q)
                         for p in (args.past, args.new, args.future))
    analysis = metrics.boundary_analysis(past, new, future, args.q)
    print(json.dumps(analysis.as_dict(), indent=1))
    return EXIT_OK


def cmd_run(args) -> int:
    overrides = {
        "gap_bars": args.gap,
        "infiller": args.infiller,
        "markov_model": args.markov_model,
        "seed": args.seed,
        "positions_per_bar": args.q,
        "output_dir": args.out_dir,
    }
    config = harness.load_config(args.config, overrides)
    results = harness.run_experiment(config)
    paths = harness.emit_results(results, config.output_dir)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"error: {r.piece_id}: {r.error}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} pieces expanded; "
          f"results in {paths['results_csv'].parent}")
    if len(failed) == len(results):
        return EXIT_DATA
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_train_markov(args) -> int:
    corpus_dir = Path(args.corpus)
    names = sorted(p for p in corpus_dir.iterdir()
                   if p.suffix.lower() in (".mid", ".midi"))
    sequences = []
    for path in names:
        try:
            sequences.append(_load_sequence(path, args.q))
        except midi_io.ParseError as exc:
            print(f"skipping {path.name}: {exc}", file=sys.stderr)
    model = expansion.train_markov(sequences, order=args.order)
    expansion.save_markov_model(model, args.out)
    print(f"trained order-{model.order} model on {len(sequences)} pieces "
          f"({len(model.vocabulary())} tokens) -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scorexpand",
                     description="Expand symbolic scores at musical boundaries "
                                 "and measure boundary preservation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_q(p):
        p.add_argument("--q", type=int, default=midi_io.DEFAULT_POSITIONS_PER_BAR,
                       help="grid positions per bar (default 16)")

    p = sub.add_parser("expand", help="expand one MIDI file")
    p.add_argument("file")
    p.add_argument("--boundary", type=int, required=True, help="boundary bar index")
    p.add_argument("--gap", type=int, default=4, help="bars of new content (default 4)")
    p.add_argument("--infiller", choices=harness.INFILLER_NAMES, default="copy-future")
    p.add_argument("--markov-model", help="model file for --infiller markov")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output MIDI path")
    add_q(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("evaluate", help="score a past/new/future MIDI triple")
    p.add_argument("past")
    p.add_argument("new")
    p.add_argument("future")
    add_q(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="run a batch experiment from a config file")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--gap", type=int, help="override gap_bars")
    p.add_argument("--infiller", choices=harness.INFILLER_NAMES, help="override infiller")
    p.add_argument("--markov-model", help="override markov model path")
    p.add_argument("--seed", type=int, help="override seed")
    p.add_argument("--q", type=int, dest="q", help="override positions per bar")
    p.add_argument("--out-dir", help="override output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train-markov", help="train a Markov model on a MIDI corpus")
    p.add_argument("--corpus", required=True, help="directory of MIDI files")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--out", required=True, help="output model path")
    add_q(p)
    p.set_defaults(func=cmd_train_markov)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, expansion.InfillError, tokenizer.RangeError) as exc:
        print(f"scorexpand: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
