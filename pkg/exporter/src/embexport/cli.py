"""Command-line interface for the embedding exporters."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .contextual import export_contextual
from .static import ModelFormatError, export_static, read_vocab
from .textnorm import load_stopwords


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embexport", description=__doc__)
    parser.add_argument("--version", action="version", version=f"embexport {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("export-static", help="word2vec model -> word-vector text table")
    ps.add_argument("--model", required=True, help="word2vec .bin or word-vector text file")
    ps.add_argument("--input", required=True,
                    help="vocabulary: token list file or cluster-json unit")
    ps.add_argument("--output", required=True)
    ps.add_argument("--log", default=None, help="sidecar log of skipped tokens")
    ps.add_argument("--stopwords", default=None)
    ps.set_defaults(func=cmd_static)

    pc = sub.add_parser("export-contextual",
                        help="transformer checkpoint -> per-sentence token-matrix JSONL")
    pc.add_argument("--model", required=True, help="local model directory or name")
    pc.add_argument("--input", required=True, help="cluster-json unit")
    pc.add_argument("--output", required=True)
    pc.add_argument("--layer", type=int, default=-1,
                    help="hidden-states index; -1 = final layer (default)")
    pc.add_argument("--log", default=None, help="sidecar log of alignment warnings")
    pc.add_argument("--stopwords", default=None)
    pc.set_defaults(func=cmd_contextual)
    return parser


def cmd_static(args) -> int:
    stops = load_stopwords(args.stopwords) if args.stopwords else None
    vocab = read_vocab(args.input, stops)
    written, missing = export_static(args.model, vocab, args.output, args.log)
    print(f"wrote {written} vectors to {args.output}"
          + (f" ({len(missing)} tokens skipped)" if missing else ""))
    return 0


def cmd_contextual(args) -> int:
    stops = load_stopwords(args.stopwords) if args.stopwords else None
    rows, warnings = export_contextual(
        args.model, args.input, args.output,
        layer=args.layer, stopwords=stops, log_path=args.log,
    )
    print(f"wrote {rows} sentence rows to {args.output}"
          + (f" ({len(warnings)} alignment warnings)" if warnings else ""))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv if argv is not None else sys.argv[1:])
    try:
        return args.func(args)
    except (ModelFormatError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
