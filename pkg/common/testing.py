import os
import shutil
import logging
import tempfile
import numpy as np

_log = logging.getLogger(__name__)
_logging_configured = False


def configure_logging():
    global _logging_configured
    if not _logging_configured:
        level_str = (os.getenv('UNIT_TEST_LOG_LEVEL') or 'INFO').upper()
        level = logging.getLevelName(level_str)
        if not isinstance(level, int):
            level = logging.INFO
        logging.basicConfig(level=level)
        _log.debug("logging configured at level %s (%s)", level, level_str)
        _logging_configured = True


def slow_tests_enabled():
    return os.getenv('ATTNALIGN_SLOW_TESTS', '') not in ('', '0', 'false', 'no')


class TemporaryDirectory(object):
    """Context manager yielding a scratch directory that is removed afterwards."""

    def __init__(self, prefix='attnalign-test-'):
        self.prefix = prefix
        self.path = None

    def __enter__(self):
        self.path = tempfile.mkdtemp(prefix=self.prefix)
        return self.path

    def __exit__(self, exc_type, exc_value, tb):
        shutil.rmtree(self.path, ignore_errors=True)
        return False


def write_text(directory, name, content):
    pathname = os.path.join(directory, name)
    with open(pathname, 'w', encoding='utf-8') as ofile:
        ofile.write(content)
    return pathname


def assert_distribution(testcase, row, mask=None, places_tol=1e-9):
    row = np.asarray(row, dtype=np.float64)
    testcase.assertTrue(np.all(row >= 0.0), "negative entries in {}".format(row))
    testcase.assertLess(abs(row.sum() - 1.0), places_tol, "row sums to {}".format(row.sum()))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        testcase.assertTrue(np.all(row[~mask] == 0.0), "nonzero mass on padding: {}".format(row))


ANALYSIS_FIXTURE = {
    'export.jsonl': (
        '{"id": 1, "source": ["der", "Hund", "bellt"], "target": ["the", "dog", "barks"], '
        '"attention": [[0.6, 0.3, 0.1], [0.2, 0.7, 0.1], [0.1, 0.1, 0.8]], "losses": [0.5, 1.0, 0.25], "unk": []}\n'
        '{"id": 2, "source": ["er", "schl\\u00e4ft", "."], "target": ["he", "sleeps", "well", "."], '
        '"attention": [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.2, 0.4, 0.4], [0.1, 0.1, 0.8]], '
        '"losses": [0.2, 0.4, 2.0, 0.1], "unk": []}\n'),
    'gold.align': "0-0 S 1-1 S 2-2 S\n0-0 S 1-1 S 2-3 P\n",
    'source.ann': ("der\tART\tdet\t2\nHund\tNN\tsubj\t3\nbellt\tVVFIN\troot\t0\n\n"
                   "er\tPPER\tsubj\t2\nschläft\tVVFIN\troot\t0\n.\t$.\troot\t0\n\n"),
    'target.ann': ("the\tDET\ndog\tNOUN\nbarks\tVERB\n\n"
                   "he\tPRON\nsleeps\tVERB\nwell\tADV\n.\tPUNC\n\n"),
}


def write_analysis_fixture(directory):
    """Two hand-built sentences: export, gold alignments (one possible link, one unaligned target) and annotations."""
    return {name: write_text(directory, name, content) for name, content in ANALYSIS_FIXTURE.items()}
