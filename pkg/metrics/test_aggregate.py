import logging
import unittest
from collections import defaultdict
import numpy as np
import common.testing
from common.errors import ConfigError
from corpus.annotations import TokenAnnotation
from metrics.aggregate import (aggregate_by_pos, correlate_by_pos, mass_by_pos, role_distribution,
                               RoleMerge, MEASURES)
from metrics.measures import spearman
from metrics.records import TokenRecord

_log = logging.getLogger(__name__)
common.testing.configure_logging()


def _record(pos, attention_loss=0.0, word_prediction_loss=0.0, attention_entropy=0.0, sentence_id=1,
            position=0, attention=(1.0,), aligned=(0,)):
    attention = np.asarray(attention, dtype=np.float64)
    mass = float(sum(attention[i] for i in aligned)) if aligned else None
    return TokenRecord(sentence_id, position, 'w', pos, attention, attention_loss, attention_entropy,
                       word_prediction_loss, tuple(aligned), mass)


def _annotation(sentence_id, roles, pos=None):
    n = len(roles)
    return TokenAnnotation(sentence_id, tuple('s{}'.format(i) for i in range(n)),
                           tuple(pos or ['NN'] * n), tuple(roles), tuple([None] * n))


class TestAggregateByPos(unittest.TestCase):

    def test_means(self):
        summary = aggregate_by_pos([_record('NOUN', 0.2), _record('NOUN', 0.4), _record('VERB', 0.3)])
        self.assertListEqual(['NOUN', 'VERB'], list(summary))
        self.assertAlmostEqual(0.3, summary['NOUN'].attention_loss, delta=1e-12)
        self.assertAlmostEqual(0.3, summary['VERB'].attention_loss, delta=1e-12)
        self.assertEqual(2, summary['NOUN'].count)

    def test_single_record(self):
        summary = aggregate_by_pos([_record('ADJ', 0.7, 1.5, 0.2)])
        self.assertEqual(0.7, summary['ADJ'].attention_loss)
        self.assertEqual(1.5, summary['ADJ'].word_prediction_loss)
        self.assertEqual(0.2, summary['ADJ'].attention_entropy)

    def test_group_by_oracle(self):
        rng = np.random.default_rng(41)
        tags = ['ADJ', 'NOUN', 'VERB', 'DET', 'PUNC']
        records = [_record(tags[int(rng.integers(len(tags)))], *rng.random(3)) for _ in range(400)]
        groups = defaultdict(list)
        for r in records:
            groups[r.pos].append(r)
        summary = aggregate_by_pos(records)
        self.assertSetEqual(set(groups), set(summary))
        self.assertEqual(len(records), sum(s.count for s in summary.values()))
        for pos, members in groups.items():
            for measure in MEASURES:
                expected = sum(getattr(r, measure) for r in members) / len(members)
                self.assertAlmostEqual(expected, getattr(summary[pos], measure), delta=1e-12)

    def test_mean_aligned_sources(self):
        records = [_record('NOUN', attention=(0.5, 0.5), aligned=(0, 1)),
                   _record('NOUN', attention=(0.5, 0.5), aligned=(1,)),
                   _record('NOUN', attention=(0.5, 0.5), aligned=())]
        summary = aggregate_by_pos(records)['NOUN']
        self.assertEqual(2, summary.aligned_count)
        self.assertAlmostEqual(1.5, summary.mean_aligned_sources, delta=1e-12)


class TestCorrelateByPos(unittest.TestCase):

    def test_monotone_class(self):
        records = [_record('NOUN', attention_loss=x, word_prediction_loss=2 * x + 1) for x in (0.1, 0.5, 0.3, 0.9)]
        table = correlate_by_pos(records, 'word_prediction_loss', 'attention_loss')
        self.assertAlmostEqual(1.0, table.reported['NOUN'].rho, delta=1e-12)
        self.assertEqual(4, table.reported['NOUN'].count)

    def test_single_record_flagged(self):
        records = [_record('NOUN', 0.1, 0.2), _record('NOUN', 0.3, 0.1), _record('VERB', 0.2, 0.2)]
        table = correlate_by_pos(records, 'word_prediction_loss', 'attention_loss')
        self.assertNotIn('VERB', table.reported)
        self.assertIn('VERB', table.flagged)
        self.assertAlmostEqual(-1.0, table.reported['NOUN'].rho, delta=1e-12)

    def test_constant_class_flagged(self):
        records = [_record('DET', 0.1, 0.5), _record('DET', 0.3, 0.5)]
        table = correlate_by_pos(records, 'word_prediction_loss', 'attention_loss')
        self.assertIn('DET', table.flagged)

    def test_min_count(self):
        records = [_record('NOUN', x, 1 - x) for x in (0.1, 0.2, 0.3)]
        table = correlate_by_pos(records, 'word_prediction_loss', 'attention_loss', min_count=4)
        self.assertDictEqual({}, dict(table.reported))

    def test_mixed_class(self):
        rng = np.random.default_rng(43)
        records = [_record('NOUN', *rng.random(3)) for _ in range(25)]
        table = correlate_by_pos(records, 'attention_entropy', 'attention_loss')
        expected = spearman([r.attention_entropy for r in records], [r.attention_loss for r in records])
        self.assertAlmostEqual(expected, table.reported['NOUN'].rho, delta=1e-12)


class TestMassByPos(unittest.TestCase):

    def test_rows_sum_to_100(self):
        rng = np.random.default_rng(47)
        records = []
        for k in range(200):
            row = rng.dirichlet(np.ones(4))
            aligned = tuple(sorted({int(i) for i in rng.choice(4, size=int(rng.integers(0, 3)), replace=False)}))
            records.append(_record(['NOUN', 'VERB', 'ADJ'][k % 3], attention=row, aligned=aligned))
        table = mass_by_pos(records)
        for row in table.rows.values():
            self.assertLess(abs(row.to_alignment + row.to_other - 100.0), 0.1)
        unaligned = sum(1 for r in records if not r.aligned)
        self.assertEqual(unaligned, sum(table.unaligned.values()))
        self.assertEqual(len(records) - unaligned, table.overall.count)

    def test_overall_token_weighted(self):
        records = [_record('NOUN', attention=(0.9, 0.1)), _record('NOUN', attention=(0.7, 0.3)),
                   _record('VERB', attention=(0.2, 0.8))]
        table = mass_by_pos(records)
        self.assertAlmostEqual(80.0, table.rows['NOUN'].to_alignment, delta=1e-9)
        self.assertAlmostEqual(20.0, table.rows['VERB'].to_alignment, delta=1e-9)
        self.assertAlmostEqual(60.0, table.overall.to_alignment, delta=1e-9)

    def test_unaligned_only(self):
        table = mass_by_pos([_record('ADV', attention=(0.5, 0.5), aligned=())])
        self.assertDictEqual({}, dict(table.rows))
        self.assertIsNone(table.overall)
        self.assertEqual(1, table.unaligned['ADV'])


class TestRoleDistribution(unittest.TestCase):

    def test_single_role(self):
        records = [_record('NOUN', attention=(0.6, 0.4), aligned=(0,))]
        table = role_distribution(records, {1: _annotation(1, ['subj', 'det'])})
        self.assertDictEqual({'det': 1.0}, dict(table.shares['NOUN']))

    def test_same_role_merged(self):
        records = [_record('NOUN', attention=(0.6, 0.1, 0.3), aligned=(0,))]
        table = role_distribution(records, {1: _annotation(1, ['subj', 'adv', 'adv'])})
        self.assertEqual(['adv'], list(table.shares['NOUN']))
        self.assertAlmostEqual(1.0, table.shares['NOUN']['adv'], delta=1e-12)

    def test_three_roles(self):
        records = [_record('VERB', attention=(0.5, 0.2, 0.2, 0.1), aligned=(0,))]
        table = role_distribution(records, {1: _annotation(1, ['root', 'subj', 'adv', 'det'])})
        shares = table.shares['VERB']
        self.assertAlmostEqual(0.4, shares['subj'], delta=1e-4)
        self.assertAlmostEqual(0.4, shares['adv'], delta=1e-4)
        self.assertAlmostEqual(0.2, shares['det'], delta=1e-4)
        self.assertAlmostEqual(1.0, sum(shares.values()), delta=1e-9)

    def test_default_merges(self):
        records = [_record('VERB', attention=(0.4, 0.1, 0.2, 0.2, 0.1), aligned=(0,))]
        annotation = _annotation(1, ['root', 'obja', 'objd', 'kon', 'root'], pos=['VVFIN', 'NN', 'NN', 'NN', '$.'])
        shares = role_distribution(records, {1: annotation}).shares['VERB']
        self.assertListEqual(['obj', 'conj', 'punc'], list(shares))
        self.assertAlmostEqual(0.5, shares['obj'], delta=1e-12)
        self.assertAlmostEqual(1.0 / 6.0, shares['punc'], delta=1e-12)

    def test_custom_merge(self):
        merge = RoleMerge.from_dict({'punc_tags': [], 'groups': {'adv': 'modifier', 'attr': 'modifier'}})
        records = [_record('NOUN', attention=(0.5, 0.25, 0.25), aligned=(0,))]
        annotation = _annotation(1, ['subj', 'adv', 'attr'], pos=['NN', '$.', 'ADJA'])
        shares = role_distribution(records, {1: annotation}, merge).shares['NOUN']
        self.assertDictEqual({'modifier': 1.0}, dict(shares))

    def test_unknown_merge_key(self):
        with self.assertRaises(ConfigError):
            RoleMerge.from_dict({'group': {}})

    def test_missing_annotation_excluded(self):
        records = [_record('NOUN', attention=(0.6, 0.4), aligned=(0,), sentence_id=1),
                   _record('NOUN', attention=(0.6, 0.4), aligned=(0,), sentence_id=2)]
        table = role_distribution(records, {1: _annotation(1, ['subj', 'det'])})
        self.assertTupleEqual((2,), table.excluded_sentences)
        self.assertAlmostEqual(0.4, table.mass['NOUN'], delta=1e-12)

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(53)
        roles = ['subj', 'obja', 'det', 'adv', 'attr', 'pp']
        records, annotations = [], {}
        for sentence_id in range(1, 40):
            n = int(rng.integers(2, 8))
            annotations[sentence_id] = _annotation(sentence_id, [roles[int(i)] for i in rng.integers(len(roles), size=n)])
            for t in range(int(rng.integers(1, 6))):
                records.append(_record(['NOUN', 'VERB'][t % 2], attention=rng.dirichlet(np.ones(n)),
                                       aligned=(int(rng.integers(n)),), sentence_id=sentence_id, position=t))
        table = role_distribution(records, annotations)
        for shares in table.shares.values():
            self.assertLess(abs(sum(shares.values()) - 1.0), 1e-9)


if __name__ == '__main__':
    unittest.main()
