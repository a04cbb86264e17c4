#!/usr/bin/env python3

"""Compare non-recurrent and input-feeding attention on the synthetic toy task."""

import os
import sys
import json
import logging
from argparse import ArgumentParser
from collections import OrderedDict
from common.errors import ConfigError
from nmt.config import ATTENTION_VARIANTS, PRESETS, preset
from report.experiment import compare_variants, summarize_results

_log = logging.getLogger(__name__)


def main(argv=None):
    parser = ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, nargs='+', default=[1, 2, 3], metavar="SEED")
    parser.add_argument("--sentences", type=int, default=2000, metavar="N", help="training sentence pairs")
    parser.add_argument("--test", type=int, default=200, metavar="N", help="held-out sentence pairs")
    parser.add_argument("--preset", choices=sorted(PRESETS), default='desk')
    parser.add_argument("--epochs", type=int, metavar="N")
    parser.add_argument("--variant", dest='variants', choices=ATTENTION_VARIANTS, action='append')
    parser.add_argument("-o", "--output", metavar="FILE", help="write results as JSON")
    parser.add_argument("-l", "--log-level", metavar="LEVEL", type=str.upper, choices=('DEBUG', 'INFO', 'WARN', 'ERROR'),
                        default=(os.getenv('ATTNALIGN_LOG_LEVEL') or 'INFO').upper(), help="set log level")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.__dict__['WARNING' if args.log_level == 'WARN' else args.log_level])
    try:
        config = preset(args.preset)
        if args.epochs is not None:
            config = config.replace(epochs=args.epochs)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return 2
    results = compare_variants(args.seeds, args.sentences, args.test, config, args.variants or ATTENTION_VARIANTS)
    summary = summarize_results(results)
    print("variant\truns\taer\tuniform_aer\tattention_loss\tword_prediction_loss")
    for variant, values in summary.items():
        print("{}\t{}\t{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}".format(variant, values['runs'], values['aer'], values['uniform_aer'],
                                                             values['attention_loss'], values['word_prediction_loss']))
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as ofile:
            json.dump(OrderedDict([('runs', [r.to_dict() for r in results]), ('summary', summary)]), ofile, indent=2)
            ofile.write('\n')
    return 0


if __name__ == '__main__':
    exit(main())
