#!/usr/bin/env python3

"""Train attention models, export attention and compare it with word alignments."""

import os
import sys
import logging
from argparse import ArgumentParser
from common.errors import ConfigError
from nmt.config import ATTENTION_VARIANTS, GRADIENT_NORMALIZATIONS, PRESETS
from report.commands import COMMANDS, EXIT_USAGE, execute
from report.runconfig import PATH_KEYS, build_run_config

_log = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARN', 'ERROR')
_MODEL_OPTIONS = (
    ('dim', int), ('layers', int), ('dropout', float), ('batch_size', int), ('epochs', int),
    ('learning_rate', float), ('clip_norm', float), ('decay', float), ('decay_start', int),
    ('max_vocab', int), ('max_length', int),
)


def _flag(name: str) -> str:
    return '--' + name.replace('_', '-')


def create_parser() -> ArgumentParser:
    parser = ArgumentParser(description=__doc__)
    parser.add_argument("command", choices=tuple(COMMANDS), help="subcommand")
    parser.add_argument("-l", "--log-level", metavar="LEVEL", type=str.upper, choices=LOG_LEVELS,
                        default=(os.getenv('ATTNALIGN_LOG_LEVEL') or 'INFO').upper(), help="set log level")
    parser.add_argument("-v", "--verbose", action='store_true', help="same as --log-level DEBUG")
    parser.add_argument("--config", metavar="FILE", help="JSON run configuration")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="model preset (default desk)")
    parser.add_argument("--seed", type=int, help="random seed for initialization, batching and toy data")
    parser.add_argument("--attention", choices=ATTENTION_VARIANTS, help="attention variant")
    parser.add_argument("--normalize-by", choices=GRADIENT_NORMALIZATIONS, help="divide each batch gradient by its sentence or token count")
    for name, kind in _MODEL_OPTIONS:
        parser.add_argument(_flag(name), type=kind, metavar="N", help="model setting " + name)
    for key in PATH_KEYS:
        parser.add_argument(_flag(key), metavar="PATH", dest='path_' + key)
    parser.add_argument("-o", dest='path_output_dir', metavar="DIR", help="output directory")
    parser.add_argument("--sure-only", dest='include_possible', action='store_const', const=False,
                        help="leave possible links out of the soft alignments")
    parser.add_argument("--min-class-count", type=int, metavar="N", help="smallest POS class that gets a correlation")
    parser.add_argument("--sentence", dest='sentences', type=int, action='append', metavar="ID",
                        help="sentence id to draw (repeatable; default all)")
    parser.add_argument("--max-output-length", dest='max_output_length', type=int, metavar="N",
                        help="maximum length of a greedy translation")
    parser.add_argument("--smoothing", type=float, help="add-epsilon smoothing of BLEU precisions")
    parser.add_argument("--toy-sentences", type=int, metavar="N", help="training pairs generated by make-toy")
    parser.add_argument("--toy-test", type=int, metavar="N", help="test pairs generated by make-toy")
    parser.add_argument("--backward-reversed", action='store_const', const=True,
                        help="backward alignment file lists target-source links")
    return parser


def configure_logging(args):
    level = 'DEBUG' if args.verbose else args.log_level
    if level not in LOG_LEVELS:
        level = 'INFO'
    logging.basicConfig(level=logging.getLevelName('WARNING' if level == 'WARN' else level))


def main(argv=None):
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    model_overrides = {name: getattr(args, name) for name, _ in _MODEL_OPTIONS}
    model_overrides['attention'] = args.attention
    model_overrides['normalize_by'] = args.normalize_by
    model_overrides['seed'] = args.seed
    paths = {key: getattr(args, 'path_' + key) for key in PATH_KEYS}
    try:
        config = build_run_config(args.command, args.config, args.preset, model_overrides, paths,
                                  include_possible=args.include_possible,
                                  min_class_count=args.min_class_count,
                                  sentences=args.sentences,
                                  max_length=args.max_output_length,
                                  smoothing=args.smoothing,
                                  toy_sentences=args.toy_sentences,
                                  toy_test=args.toy_test,
                                  backward_reversed=args.backward_reversed)
    except ConfigError as e:
        print("{}: {}".format(args.command, e), file=sys.stderr)
        return EXIT_USAGE
    return execute(config)


if __name__ == '__main__':
    exit(main())
