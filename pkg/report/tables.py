"""Writers for the analysis report: one JSON document plus flat CSV tables.

Floats are written with ``repr`` so a rerun on identical inputs produces
identical bytes.
"""

import csv
import json
import os
import logging
from typing import Dict, List
from metrics.analysis import AnalysisReport
from metrics.records import CSV_HEADER

_log = logging.getLogger(__name__)

REPORT_JSON = 'analysis.json'
POS_MEANS_CSV = 'pos_means.csv'
CORRELATIONS_CSV = 'correlations.csv'
MASS_CSV = 'mass.csv'
ROLES_CSV = 'roles.csv'
TOKENS_CSV = 'tokens.csv'
FLAGGED_CSV = 'flagged.csv'


def _fmt(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(pathname: str, header: List[str], rows: List[list]):
    with open(pathname, 'w', encoding='utf-8', newline='') as ofile:
        writer = csv.writer(ofile, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def pos_means_rows(report: AnalysisReport) -> List[list]:
    return [[pos, s.count, s.attention_loss, s.word_prediction_loss, s.attention_entropy,
             s.aligned_count, s.mean_aligned_sources] for pos, s in report.by_pos.items()]


def correlation_rows(report: AnalysisReport) -> List[list]:
    rows = []
    for table in report.correlations:
        for pos, c in table.reported.items():
            rows.append([table.measure_x, table.measure_y, pos, c.count, c.rho, ''])
        for pos, reason in table.flagged.items():
            rows.append([table.measure_x, table.measure_y, pos, '', None, reason])
    return rows


def mass_rows(report: AnalysisReport) -> List[list]:
    rows = [[pos, row.count, row.to_alignment, row.to_other, report.mass.unaligned.get(pos, 0)]
            for pos, row in report.mass.rows.items()]
    for pos, count in report.mass.unaligned.items():
        if pos not in report.mass.rows:
            rows.append([pos, 0, None, None, count])
    if report.mass.overall is not None:
        overall = report.mass.overall
        rows.append(['Overall', overall.count, overall.to_alignment, overall.to_other, sum(report.mass.unaligned.values())])
    return rows


def role_rows(report: AnalysisReport) -> List[list]:
    rows = []
    for pos, shares in report.roles.shares.items():
        for role, share in shares.items():
            rows.append([pos, role, share, 100.0 * share])
    return rows


def write_report(report: AnalysisReport, directory: str) -> Dict[str, str]:
    """Write every table of ``report`` into ``directory``; returns name to path."""
    written = {}

    def _path(name):
        written[name] = os.path.join(directory, name)
        return written[name]

    with open(_path(REPORT_JSON), 'w', encoding='utf-8') as ofile:
        json.dump(report.to_dict(), ofile, indent=2, ensure_ascii=False, allow_nan=False)
        ofile.write('\n')
    _write_csv(_path(POS_MEANS_CSV), ['pos', 'count', 'attention_loss', 'word_prediction_loss', 'attention_entropy',
                                      'aligned_count', 'mean_aligned_sources'], pos_means_rows(report))
    _write_csv(_path(CORRELATIONS_CSV), ['measure_x', 'measure_y', 'pos', 'count', 'rho', 'note'], correlation_rows(report))
    _write_csv(_path(MASS_CSV), ['pos', 'count', 'to_alignment_percent', 'to_other_percent', 'unaligned'], mass_rows(report))
    if report.roles is not None:
        _write_csv(_path(ROLES_CSV), ['pos', 'role', 'share', 'percent'], role_rows(report))
    _write_csv(_path(TOKENS_CSV), CSV_HEADER, [r.csv_row() for r in report.records])
    _log.info("wrote %d report files to %s", len(written), directory)
    return written


def write_flags(flags, directory: str) -> str:
    """Annotation entries kept despite an unknown tag or a token differing from the corpus."""
    pathname = os.path.join(directory, FLAGGED_CSV)
    _write_csv(pathname, ['sentence_id', 'position', 'kind', 'value'],
               [[f.sentence_id, f.position, f.kind, f.value] for f in flags])
    return pathname
