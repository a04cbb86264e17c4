import math
import logging
import unittest
import numpy as np
import common.testing
from common.errors import ContractError
from corpus.batching import make_batch
from corpus.parallel import SentencePair
from corpus.vocab import Vocabulary, UNK
from nmt.config import ModelConfig, NON_RECURRENT, INPUT_FEEDING
from nmt.decoding import force_decode, force_decode_corpus, translate_greedy
from nmt.model import AttentionModel
from nmt.training import sequence_loss
from tensorgrad.gradcheck import check_gradients

_log = logging.getLogger(__name__)
common.testing.configure_logging()


def _vocabs():
    src = Vocabulary.build([['das', 'Haus', 'ist', 'klein']], 10)
    tgt = Vocabulary.build([['the', 'house', 'is', 'small']], 10)
    return src, tgt


class TestForceDecode(unittest.TestCase):

    def test_untrained_loss_is_log_vocab_size(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=4, layers=2, dropout=0.0), src, tgt, zero=True)
        result = force_decode(model, ['das', 'Haus', 'ist', 'klein'], ['the', 'house', 'is', 'small'], sentence_id=3)
        self.assertEqual(4, len(result.losses))
        for loss in result.losses:
            self.assertAlmostEqual(math.log(len(tgt)), loss, delta=1e-12)
        for row in result.attention:
            common.testing.assert_distribution(self, row)
        self.assertEqual((4, 4), result.attention.shape)
        self.assertEqual((4, len(tgt)), result.distributions.shape)

    def test_rows_are_distributions(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=5, layers=2, dropout=0.3, seed=4), src, tgt)
        result = force_decode(model, ['klein', 'das', 'Haus'], ['small', 'the'])
        self.assertEqual((2, 3), result.attention.shape)
        for attention, loss, dist in result.steps():
            common.testing.assert_distribution(self, attention)
            common.testing.assert_distribution(self, dist)
            self.assertGreater(loss, 0.0)

    def test_evaluation_mode_is_deterministic(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=5, layers=2, dropout=0.3, seed=4), src, tgt)
        first = force_decode(model, ['das', 'Haus'], ['the', 'house'])
        second = force_decode(model, ['das', 'Haus'], ['the', 'house'])
        self.assertEqual(first.attention.tobytes(), second.attention.tobytes())
        self.assertTupleEqual(first.losses, second.losses)

    def test_unknown_reference_flagged(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=3, layers=1, dropout=0.0), src, tgt)
        result = force_decode(model, ['das', 'Haus'], ['the', 'mansion'], sentence_id=9)
        self.assertTupleEqual((1,), result.unk)
        record = result.to_record()
        self.assertEqual(9, record.sentence_id)
        self.assertTupleEqual(('the', 'mansion'), record.target)
        self.assertTupleEqual((1,), record.unk)
        self.assertNotIn('mansion', tgt)
        self.assertIn(UNK, tgt)

    def test_empty_reference(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=3, layers=1), src, tgt)
        with self.assertRaises(ContractError):
            force_decode(model, ['das'], [])

    def test_corpus(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=3, layers=1), src, tgt)
        pairs = [SentencePair(k, ('das', 'Haus'), ('the', 'house')) for k in (1, 2, 3)]
        self.assertListEqual([1, 2, 3], [r.sentence_id for r in force_decode_corpus(model, pairs)])


class TestTranslateGreedy(unittest.TestCase):

    def test_max_length_flagged(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=3, layers=1), src, tgt, zero=True)
        result = translate_greedy(model, ['das', 'Haus'], max_len=5)
        self.assertEqual(5, len(result.tokens))
        self.assertTrue(result.hit_max_length)
        self.assertEqual((5, 2), result.attention.shape)

    def test_length_and_rows(self):
        src, tgt = _vocabs()
        model = AttentionModel.create(ModelConfig(dim=6, layers=2, seed=8), src, tgt)
        for max_len in (1, 3, 7):
            result = translate_greedy(model, ['das', 'Haus', 'ist'], max_len=max_len)
            self.assertLessEqual(len(result.tokens), max_len)
            self.assertEqual(len(result.tokens), result.attention.shape[0])
            for row in result.attention:
                common.testing.assert_distribution(self, row)


class TestEndToEndGradient(unittest.TestCase):

    def _check(self, variant):
        src, tgt = _vocabs()
        config = ModelConfig(dim=2, layers=2, dropout=0.0, attention=variant, seed=5)
        model = AttentionModel.create(config, src, tgt)
        for p in model.params.values():
            p.data *= 6.0
        batch = make_batch([SentencePair(1, ('das', 'Haus', 'klein'), ('house',))], src, tgt)

        def loss():
            total, ntokens = sequence_loss(model, batch)
            self.assertEqual(2, ntokens)
            return total

        worst = check_gradients(loss, list(model.params.values()))
        _log.debug("%s end-to-end worst relative error %.3e", variant, worst)
        self.assertLess(worst, 1e-4)

    def test_two_step_forced_decode_non_recurrent(self):
        self._check(NON_RECURRENT)

    def test_two_step_forced_decode_input_feeding(self):
        self._check(INPUT_FEEDING)


if __name__ == '__main__':
    unittest.main()
