import os
import math
import logging
import unittest
import numpy as np
import common.testing
from common.errors import ConfigError, ContractError, ShapeError
from corpus.vocab import Vocabulary
from nmt import model as nmt_model
from nmt.config import ModelConfig, NON_RECURRENT, INPUT_FEEDING
from nmt.model import (AttentionModel, EncoderStates, init_parameters, encode, attend, decoder_state,
                       input_feeding_state, attentional_output, predict, initial_state, decode_step, layer_weights)
from tensorgrad import ops
from tensorgrad.checkpoint import save_checkpoint
from tensorgrad.lstm import lstm_cell
from tensorgrad.tape import Tape, Tensor

_log = logging.getLogger(__name__)
common.testing.configure_logging()


def _config(**kwargs):
    values = dict(dim=3, layers=2, dropout=0.0, src_vocab_size=7, tgt_vocab_size=6)
    values.update(kwargs)
    return ModelConfig().replace(**values)


def _sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


class TestEncode(unittest.TestCase):

    def test_length_one(self):
        config = _config()
        params = init_parameters(config, np.random.default_rng(1))
        enc = encode([[4]], [[True]], params, config)
        self.assertEqual((1, 1, 3), enc.states.shape)
        self.assertEqual(2, len(enc.final))

    def test_zero_weights(self):
        config = _config()
        enc = encode([[4, 5, 6]], [[True] * 3], init_parameters(config), config)
        np.testing.assert_array_equal(np.zeros((1, 3, 3)), enc.states.data)

    def test_composition(self):
        config = _config()
        params = init_parameters(config, np.random.default_rng(2))
        ids = [5, 4, 6]
        enc = encode([ids], [[True] * 3], params, config)
        weights = layer_weights(params, 'enc', 2)
        zero = Tensor(np.zeros((1, 3)))
        (h0, c0), (h1, c1) = (zero, zero), (zero, zero)
        for s, i in enumerate(ids):
            x = Tensor(params['src_embed'].data[[i]])
            h0, c0 = lstm_cell(x, h0, c0, weights[0])
            h1, c1 = lstm_cell(h0, h1, c1, weights[1])
            np.testing.assert_allclose(h1.data[0], enc.states.data[0, s], rtol=0, atol=1e-12)
        np.testing.assert_allclose(c1.data, enc.final[1][1].data, rtol=0, atol=1e-12)

    def test_padding_freezes_final_state(self):
        config = _config()
        params = init_parameters(config, np.random.default_rng(3))
        alone = encode([[5, 4]], [[True, True]], params, config)
        padded = encode([[5, 4, 0], [6, 6, 6]], [[True, True, False], [True, True, True]], params, config)
        for (h, c), (hp, cp) in zip(alone.final, padded.final):
            np.testing.assert_allclose(h.data[0], hp.data[0], rtol=0, atol=1e-12)
            np.testing.assert_allclose(c.data[0], cp.data[0], rtol=0, atol=1e-12)
        np.testing.assert_array_equal([2, 3], padded.lengths)

    def test_id_out_of_range(self):
        config = _config()
        with self.assertRaises(ContractError):
            encode([[7]], [[True]], init_parameters(config), config)


class TestAttend(unittest.TestCase):

    def test_identical_states_uniform(self):
        shared = np.array([0.2, -0.5, 0.9])
        enc = EncoderStates(Tensor(np.tile(shared, (1, 4, 1))), np.array([[True, True, True, False]]), [])
        alpha, context = attend(Tensor([[1.0, 2.0, -3.0]]), enc)
        np.testing.assert_allclose([[1 / 3, 1 / 3, 1 / 3, 0.0]], alpha.data, rtol=0, atol=1e-12)
        self.assertEqual(0.0, alpha.data[0, 3])
        np.testing.assert_allclose([shared], context.data, rtol=0, atol=1e-12)

    def test_saturation(self):
        states = np.zeros((1, 3, 3))
        states[0, 2] = [1.0, 0.5, 0.0]
        enc = EncoderStates(Tensor(states), np.ones((1, 3), dtype=bool), [])
        alpha, context = attend(Tensor([[25.0, 0.0, 0.0]]), enc)
        self.assertGreaterEqual(alpha.data[0, 2], 1.0 - 1e-8)
        np.testing.assert_allclose(states[0, 2], context.data[0], atol=1e-8)

    def test_formula_oracle(self):
        rng = np.random.default_rng(11)
        states = rng.normal(size=(1, 4, 3))
        query = rng.normal(size=(1, 3))
        enc = EncoderStates(Tensor(states), np.ones((1, 4), dtype=bool), [])
        alpha, context = attend(Tensor(query), enc)
        scores = [float(states[0, i] @ query[0]) for i in range(4)]
        exps = [math.exp(e) for e in scores]
        expected = [v / sum(exps) for v in exps]
        np.testing.assert_allclose([expected], alpha.data, rtol=0, atol=1e-12)
        expected_context = sum(w * states[0, i] for i, w in enumerate(expected))
        np.testing.assert_allclose([expected_context], context.data, rtol=0, atol=1e-12)

    def test_dimension_mismatch(self):
        enc = EncoderStates(Tensor(np.zeros((1, 2, 3))), np.ones((1, 2), dtype=bool), [])
        with self.assertRaises(ShapeError):
            attend(Tensor(np.zeros((1, 4))), enc)


class TestInputFeeding(unittest.TestCase):

    def test_zero_state(self):
        config = _config(attention=INPUT_FEEDING)
        params = init_parameters(config)
        zero = Tensor(np.zeros((1, 3)))
        h, layers = input_feeding_state(zero, zero, [(zero, zero)] * 2, params, config)
        np.testing.assert_array_equal(np.zeros((1, 3)), h.data)

    def test_single_unit_hand_case(self):
        config = _config(dim=1, layers=1, attention=INPUT_FEEDING)
        params = init_parameters(config)
        params['dec.0.W_x'].data[:] = [[0.3, -0.2, 0.5, 1.1], [0.7, 0.1, -0.4, 0.6]]
        params['dec.0.W_h'].data[:] = [[0.2, 0.3, 0.1, -0.5]]
        params['dec.0.b'].data[:] = [0.0, 1.0, 0.2, -0.1]
        prev_att, emb, h0, c0 = 0.4, -0.9, 0.25, -0.3

        def pre(k):
            return prev_att * params['dec.0.W_x'].data[0, k] + emb * params['dec.0.W_x'].data[1, k] \
                + h0 * params['dec.0.W_h'].data[0, k] + params['dec.0.b'].data[k]

        i, f, o, g = _sigmoid(pre(0)), _sigmoid(pre(1)), _sigmoid(pre(2)), math.tanh(pre(3))
        c = f * c0 + i * g
        expected = o * math.tanh(c)
        h, layers = input_feeding_state(Tensor([[prev_att]]), Tensor([[emb]]), [(Tensor([[h0]]), Tensor([[c0]]))], params, config)
        self.assertAlmostEqual(expected, h.item(), delta=1e-12)
        self.assertAlmostEqual(c, layers[0][1].item(), delta=1e-12)

    def test_gradient_reaches_previous_attentional_state(self):
        config = _config(attention=INPUT_FEEDING)
        params = init_parameters(config, np.random.default_rng(5))
        prev = Tensor(np.random.default_rng(6).normal(size=(1, 3)))
        zero = Tensor(np.zeros((1, 3)))
        with Tape() as tape:
            h, _ = input_feeding_state(prev, Tensor(np.ones((1, 3))), [(zero, zero)] * 2, params, config)
            loss = ops.total(h)
        tape.backward(loss)
        self.assertGreater(float(np.abs(prev.grad).sum()), 0.0)

    def test_earlier_attentional_output_trained_only_with_feeding(self):
        rng = np.random.default_rng(8)
        weights = Tensor(rng.normal(size=(1, 4)))
        grads = {}
        for variant in (NON_RECURRENT, INPUT_FEEDING):
            config = _config(attention=variant)
            params = init_parameters(config, np.random.default_rng(7))
            with Tape() as tape:
                enc = encode([[4, 5, 6, 4]], [[True] * 4], params, config)
                state = decode_step([2], initial_state(enc, config), enc, params, config)
                state = decode_step([4], state, enc, params, config)
                loss = ops.total(ops.mul(state.attention, weights))
            tape.backward(loss)
            grads[variant] = float(np.abs(params['W_c'].grad).sum())
        self.assertEqual(0.0, grads[NON_RECURRENT])
        self.assertGreater(grads[INPUT_FEEDING], 0.0)

    def test_wrong_variant(self):
        zero = Tensor(np.zeros((1, 3)))
        plain = _config(attention=NON_RECURRENT)
        with self.assertRaises(ContractError):
            input_feeding_state(zero, zero, [(zero, zero)] * 2, init_parameters(plain), plain)
        feeding = _config(attention=INPUT_FEEDING)
        with self.assertRaises(ContractError):
            decoder_state(zero, [(zero, zero)] * 2, init_parameters(feeding), feeding)


class TestVariantEquivalence(unittest.TestCase):

    def test_injected_query_gives_identical_attention(self):
        plain_config = _config(attention=NON_RECURRENT)
        feeding_config = _config(attention=INPUT_FEEDING)
        plain = init_parameters(plain_config, np.random.default_rng(21))
        feeding = init_parameters(feeding_config, np.random.default_rng(22))
        for name, p in plain.items():
            if feeding[name].shape == p.shape:
                feeding[name].data[...] = p.data
        ids, mask = [[4, 6, 5]], [[True] * 3]
        plain_enc = encode(ids, mask, plain, plain_config)
        feeding_enc = encode(ids, mask, feeding, feeding_config)
        np.testing.assert_array_equal(plain_enc.states.data, feeding_enc.states.data)
        plain_step = decode_step([2], initial_state(plain_enc, plain_config), plain_enc, plain, plain_config)
        self.assertIsNone(plain_step.feeding_hidden)
        feeding_step = decode_step([2], initial_state(feeding_enc, feeding_config), feeding_enc, feeding, feeding_config,
                                   query=plain_step.hidden)
        self.assertIsNone(feeding_step.hidden)
        self.assertEqual(plain_step.attention.data.tobytes(), feeding_step.attention.data.tobytes())
        self.assertEqual(plain_step.attentional.data.tobytes(), feeding_step.attentional.data.tobytes())


class TestAttentionalOutput(unittest.TestCase):

    def test_zero_weights(self):
        params = init_parameters(_config())
        out = attentional_output(Tensor([[1.0, 2.0, 3.0]]), Tensor([[-1.0, 0.5, 2.0]]), params)
        np.testing.assert_array_equal(np.zeros((1, 3)), out.data)

    def test_range_and_oracle(self):
        rng = np.random.default_rng(13)
        params = init_parameters(_config(), rng)
        params['W_c'].data *= 10.0
        context, hidden = rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
        out = attentional_output(Tensor(context), Tensor(hidden), params)
        self.assertTrue(np.all(np.abs(out.data) < 1.0))
        expected = np.tanh(np.concatenate([context, hidden], axis=1) @ params['W_c'].data)
        np.testing.assert_allclose(expected, out.data, rtol=0, atol=1e-12)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            attentional_output(Tensor(np.zeros((1, 3))), Tensor(np.zeros((1, 2))), init_parameters(_config()))


class TestPredict(unittest.TestCase):

    def test_zero_output_weights_uniform(self):
        params = init_parameters(_config())
        probs = predict(Tensor([[0.3, -0.7, 0.1]]), params)
        np.testing.assert_allclose(np.full((1, 6), 1.0 / 6), probs.data, rtol=0, atol=1e-15)

    def test_oracle(self):
        rng = np.random.default_rng(17)
        params = init_parameters(_config(), rng)
        params['W_o'].data *= 10.0
        h = rng.uniform(-1, 1, size=(1, 3))
        probs = predict(Tensor(h), params)
        logits = [float(h[0] @ params['W_o'].data[:, v]) for v in range(6)]
        exps = [math.exp(z) for z in logits]
        np.testing.assert_allclose([[e / sum(exps) for e in exps]], probs.data, rtol=0, atol=1e-12)
        common.testing.assert_distribution(self, probs.data[0])


class TestAttentionModel(unittest.TestCase):

    def setUp(self):
        self.src = Vocabulary.build([['ein', 'Haus']], 10)
        self.tgt = Vocabulary.build([['a', 'house']], 10)

    def test_create_sets_vocab_sizes(self):
        model = AttentionModel.create(_config(), self.src, self.tgt)
        self.assertEqual(6, model.config.src_vocab_size)
        self.assertEqual((3, 6), model.params['W_o'].shape)
        self.assertEqual((6, 12), model.params['dec.0.W_x'].shape)

    def test_save_load(self):
        model = AttentionModel.create(_config(), self.src, self.tgt)
        with common.testing.TemporaryDirectory() as tmp:
            pathname = model.save(os.path.join(tmp, 'm.ckpt'), epoch=3)
            loaded = AttentionModel.load(pathname)
        self.assertEqual(model.config, loaded.config)
        self.assertEqual(self.tgt, loaded.target_vocab)
        for name, p in model.params.items():
            self.assertEqual(p.data.tobytes(), loaded.params[name].data.tobytes())

    def test_load_rejects_shape_disagreement(self):
        model = AttentionModel.create(_config(), self.src, self.tgt)
        metadata = model.checkpoint_metadata()
        metadata['config']['dim'] = 4
        with common.testing.TemporaryDirectory() as tmp:
            pathname = save_checkpoint(os.path.join(tmp, 'bad.ckpt'), model.params, metadata)
            with self.assertRaises(ConfigError):
                AttentionModel.load(pathname)

    def test_expected_shapes_follow_variant(self):
        plain = nmt_model.expected_shapes(_config(attention=NON_RECURRENT))
        feeding = nmt_model.expected_shapes(_config(attention=INPUT_FEEDING))
        self.assertEqual((3, 12), plain['dec.0.W_x'])
        self.assertEqual((6, 12), feeding['dec.0.W_x'])
        self.assertEqual((3, 12), feeding['dec.1.W_x'])


if __name__ == '__main__':
    unittest.main()
