import logging
import unittest
import common.testing
from common.errors import ConsistencyError, ParseError
from corpus import annotations

_log = logging.getLogger(__name__)
common.testing.configure_logging()

_FIVE = "Das\tDET\tdet\t2\nHaus\tNOUN\tsubj\t3\nist\tVERB\troot\t0\ngroß\tADJ\tpred\t3\n.\tPUNC\troot\t0\n\n"


class TestLoadAnnotations(unittest.TestCase):

    def test_accepted(self):
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'src.ann', _FIVE)
            loaded = annotations.load_annotations(pathname, [(7, ['Das', 'Haus', 'ist', 'groß', '.'])])
        self.assertEqual(1, len(loaded))
        ann = loaded[0]
        self.assertEqual(7, ann.sentence_id)
        self.assertEqual(5, ann.length)
        self.assertTupleEqual(('det', 'subj', 'root', 'pred', 'root'), ann.roles)
        self.assertTupleEqual((2, 3, 0, 3, 0), ann.heads)

    def test_count_mismatch(self):
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'src.ann', _FIVE.replace("groß\tADJ\tpred\t3\n", ""))
            with self.assertRaises(ConsistencyError) as cm:
                annotations.load_annotations(pathname, [(7, ['Das', 'Haus', 'ist', 'groß', '.'])])
        self.assertIn('7', str(cm.exception))
        self.assertTupleEqual((7,), cm.exception.ids)

    def test_unknown_tag_flagged(self):
        flagged = []
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'tgt.ann', "the\tDET\nhouse\tXYZ\n\n")
            loaded = annotations.load_annotations(pathname, [(1, ['the', 'house'])], flagged=flagged)
        self.assertEqual('XYZ', loaded[0].pos[1])
        self.assertListEqual([annotations.Flag(1, 1, 'pos', 'XYZ')], flagged)
        self.assertTupleEqual(('_', '_'), loaded[0].roles)
        self.assertTupleEqual((None, None), loaded[0].heads)

    def test_token_mismatch_folds_diacritics(self):
        flagged = []
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'src.ann', "Grosse\tADJ\nHaus\tNOUN\n\n")
            annotations.load_annotations(pathname, [(1, ['große', 'Maus'])], flagged=flagged)
        self.assertListEqual([annotations.Flag(1, 1, 'token', 'Haus')], flagged)

    def test_malformed_row(self):
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'bad.ann', "word\tNOUN\tsubj\tx\n\n")
            with self.assertRaises(ParseError):
                annotations.load_annotations(pathname)

    def test_round_trip(self):
        with common.testing.TemporaryDirectory() as tmp:
            pathname = common.testing.write_text(tmp, 'src.ann', _FIVE)
            loaded = annotations.load_annotations(pathname)
            copy = common.testing.write_text(tmp, 'copy.ann', '')
            annotations.write_annotations(copy, loaded)
            with open(copy, 'r', encoding='utf-8') as ifile:
                self.assertEqual(_FIVE, ifile.read())


class TestCanonicalToken(unittest.TestCase):

    def test_fold(self):
        self.assertEqual('malaga', annotations.canonical_token('Málaga'))
        self.assertEqual(annotations.canonical_token('Grosse'), annotations.canonical_token('große'))


if __name__ == '__main__':
    unittest.main()
