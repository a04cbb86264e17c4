import os
import math
import logging
import unittest
import numpy as np
import common.testing
from common.errors import ContractError, TrainingDiverged
from corpus.batching import make_batch
from corpus.parallel import SentencePair
from corpus.vocab import Vocabulary
from nmt.config import preset
from nmt.decoding import force_decode, translate_greedy
from nmt.model import AttentionModel
from nmt.training import decoder_io, train, evaluate_loss, checkpoint_name
from tensorgrad.checkpoint import checkpoint_digest

_log = logging.getLogger(__name__)
common.testing.configure_logging()

_PAIR = SentencePair(1, ('das', 'kleine', 'Haus', 'steht', 'dort'), ('the', 'small', 'house', 'stands', 'there'))


def _vocabs(pairs):
    return Vocabulary.build([p.source for p in pairs], 100), Vocabulary.build([p.target for p in pairs], 100)


class TestDecoderIO(unittest.TestCase):

    def test_shift_and_mask(self):
        pairs = [SentencePair(1, ('a',), ('x', 'y')), SentencePair(2, ('b',), ('z',))]
        src, tgt = _vocabs(pairs)
        batch = make_batch(pairs, src, tgt)
        inputs, outputs, mask = decoder_io(batch, tgt.bos_id, tgt.eos_id, tgt.pad_id)
        x, y, z = tgt.encode(['x', 'y', 'z'])
        np.testing.assert_array_equal([[tgt.bos_id, x, y], [tgt.bos_id, z, tgt.pad_id]], inputs)
        np.testing.assert_array_equal([[x, y, tgt.eos_id], [z, tgt.eos_id, tgt.pad_id]], outputs)
        np.testing.assert_array_equal([[1, 1, 1], [1, 1, 0]], mask.astype(int))


class TestOverfit(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        src, tgt = _vocabs([_PAIR])
        config = preset('desk')
        cls.model = AttentionModel.create(config, src, tgt)
        cls.history = train(cls.model, [_PAIR], epochs=200)

    def test_loss_log(self):
        self.assertEqual(200, len(self.history))
        self.assertListEqual(list(range(1, 201)), [e.epoch for e in self.history])
        self.assertTrue(all(math.isfinite(e.mean_loss) for e in self.history))
        self.assertLess(self.history[-1].mean_loss, 0.1)
        self.assertLess(self.history[-1].mean_loss, self.history[0].mean_loss)

    def test_forced_decode_losses(self):
        result = force_decode(self.model, _PAIR.source, _PAIR.target)
        self.assertTrue(all(loss < 0.1 for loss in result.losses), result.losses)

    def test_greedy_reproduces_target(self):
        result = translate_greedy(self.model, _PAIR.source, max_len=20)
        self.assertTupleEqual(_PAIR.target, result.tokens)
        self.assertFalse(result.hit_max_length)

    def test_shuffled_target_scores_worse(self):
        shuffled = SentencePair(1, _PAIR.source, ('house', 'there', 'the', 'stands', 'small'))
        self.assertLess(evaluate_loss(self.model, [_PAIR]), evaluate_loss(self.model, [shuffled]))


class TestTrainingRuns(unittest.TestCase):

    def _pairs(self):
        return [_PAIR,
                SentencePair(2, ('das', 'Haus'), ('the', 'house')),
                SentencePair(3, ('dort', 'steht', 'das', 'kleine', 'Haus'), ('there', 'stands', 'the', 'small', 'house'))]

    def _run(self, checkpoint_dir, seed):
        pairs = self._pairs()
        src, tgt = _vocabs(pairs)
        config = preset('desk').replace(dim=8, batch_size=2, seed=seed)
        model = AttentionModel.create(config, src, tgt)
        return train(model, pairs, epochs=3, checkpoint_dir=checkpoint_dir)

    def test_equal_seeds_identical_checkpoints(self):
        with common.testing.TemporaryDirectory() as tmp:
            first = self._run(os.path.join(tmp, 'a'), 11)
            second = self._run(os.path.join(tmp, 'b'), 11)
            other = self._run(os.path.join(tmp, 'c'), 12)
            self.assertListEqual([e.mean_loss for e in first], [e.mean_loss for e in second])
            for epoch in (1, 2, 3):
                self.assertTrue(os.path.isfile(checkpoint_name(os.path.join(tmp, 'a'), epoch)))
            self.assertEqual(checkpoint_digest(first[-1].checkpoint), checkpoint_digest(second[-1].checkpoint))
            self.assertNotEqual(checkpoint_digest(first[-1].checkpoint), checkpoint_digest(other[-1].checkpoint))

    def test_gradient_normalization(self):
        pairs = self._pairs()
        src, tgt = _vocabs(pairs)
        steps = {}
        for normalize_by in ('sentences', 'tokens'):
            config = preset('desk').replace(dim=6, batch_size=3, dropout=0.0, learning_rate=0.001,
                                            clip_norm=1e6, normalize_by=normalize_by)
            model = AttentionModel.create(config, src, tgt)
            before = {name: p.data.copy() for name, p in model.params.items()}
            history = train(model, pairs, epochs=1)
            steps[normalize_by] = (history[0], {name: p.data - before[name] for name, p in model.params.items()})
        by_sentence, by_token = steps['sentences'], steps['tokens']
        self.assertEqual(15, by_token[0].tokens)
        self.assertEqual(by_sentence[0].mean_loss, by_token[0].mean_loss)
        for name, delta in by_sentence[1].items():
            np.testing.assert_allclose(delta, 5.0 * by_token[1][name], rtol=1e-7, atol=1e-15, err_msg=name)

    def test_divergence_names_batch(self):
        pairs = self._pairs()
        src, tgt = _vocabs(pairs)
        model = AttentionModel.create(preset('desk').replace(dim=4, batch_size=2), src, tgt)
        model.params['W_o'].data[0, 0] = np.nan
        with self.assertRaises(TrainingDiverged) as cm:
            train(model, pairs, epochs=1)
        self.assertEqual(1, cm.exception.epoch)
        self.assertEqual(0, cm.exception.batch_index)

    def test_no_pairs(self):
        src, tgt = _vocabs([_PAIR])
        model = AttentionModel.create(preset('desk').replace(dim=4), src, tgt)
        with self.assertRaises(ContractError):
            train(model, [], epochs=1)


if __name__ == '__main__':
    unittest.main()
