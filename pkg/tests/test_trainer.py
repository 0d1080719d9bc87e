import numpy as np
import pytest

from src.core.classes import ops
from src.core.classes.encoder_model import forward_logits, init_model
from src.core.classes.lora import wrap_with_lora
from src.core.classes.optimizer import AdamW, AdamWState, adamw_step
from src.core.classes.tensor import Tensor
from src.core.classes.trainer import (
    EncodedDataset,
    batch_loss_and_grads,
    encode_records,
    evaluate_epoch,
    fit,
    train_epoch,
)
from src.core.errors import TrainingDivergedError, UsageError
from src.core.helpers.dataset_io import split_train_val
from src.core.helpers.tokenizer import build_vocab, encode_batch
from src.core.schemas.LoraConfig import LoraConfig
from src.core.schemas.ModelConfig import ModelConfig
from src.core.schemas.TrainConfig import TrainConfig

TOY_QUESTIONS = [
    ("is it fever", 0),
    ("fever again today", 0),
    ("bad fever now", 0),
    ("what about fever", 0),
    ("is it cough", 1),
    ("cough again today", 1),
    ("bad cough now", 1),
    ("what about cough", 1),
]


@pytest.fixture
def toy():
    """Eight questions, two labels, separable by a single word."""
    questions = [q for q, _ in TOY_QUESTIONS]
    vocab = build_vocab(questions)
    ids, mask = encode_batch(questions, vocab, max_len=6)
    dataset = EncodedDataset(ids, mask, np.array([label for _, label in TOY_QUESTIONS]))
    config = ModelConfig(
        num_layers=1, num_heads=2, d_model=16, d_ff=32, vocab_size=vocab.size, max_len=6, num_labels=2, dropout=0.0
    )
    return config, dataset


def scalar_param(value):
    return {"p": Tensor(np.array([value]), requires_grad=True)}


def history_values(history):
    return [(r.fold, r.epoch, r.train_loss, r.validation) for r in history]


# --- optimizer -------------------------------------------------------------------------

def test_adamw_single_step_example():
    params = scalar_param(1.0)
    state = adamw_step(params, {"p": np.array([1.0])}, AdamWState(), TrainConfig(learning_rate=0.1, weight_decay=0.0))
    assert params["p"].data[0] == pytest.approx(0.9, abs=1e-6)
    assert state.step == 1


def test_adamw_zero_gradient_without_decay_is_a_no_op():
    params = scalar_param(1.5)
    adamw_step(params, {"p": np.array([0.0])}, AdamWState(), TrainConfig(weight_decay=0.0))
    assert params["p"].data[0] == 1.5


def test_adamw_weight_decay_shrinks_parameters():
    params = scalar_param(2.0)
    adamw_step(params, {"p": np.array([0.0])}, AdamWState(), TrainConfig(learning_rate=0.1, weight_decay=0.5))
    assert params["p"].data[0] == pytest.approx(2.0 - 0.1 * 0.5 * 2.0)


def test_adamw_leaves_frozen_tensors_alone():
    frozen = Tensor(np.array([1.0, 2.0]), requires_grad=False)
    params = {"frozen": frozen, **scalar_param(1.0)}
    adamw_step(params, {"frozen": np.ones(2), "p": np.ones(1)}, AdamWState(), TrainConfig())
    np.testing.assert_array_equal(frozen.data, [1.0, 2.0])


def test_adamw_shape_errors():
    with pytest.raises(UsageError):
        adamw_step(scalar_param(1.0), {"p": np.ones(2)}, AdamWState(), TrainConfig())
    with pytest.raises(UsageError):
        adamw_step(scalar_param(1.0), {"q": np.ones(1)}, AdamWState(), TrainConfig())


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_small_step_decreases_batch_loss(tiny_config, tiny_batch, seed):
    model = init_model(tiny_config, seed=seed, dtype=np.float64)
    ids, mask = tiny_batch
    targets = np.array([0, 1, 2])
    before, grads = batch_loss_and_grads(model, ids, mask, targets, training=False, rng=None)
    AdamW(model.trainable_parameters(), TrainConfig(learning_rate=1e-5, weight_decay=0.0)).step(grads)
    after = ops.cross_entropy(forward_logits(model, ids, mask), targets).item()
    assert after < before


# --- training ----------------------------------------------------------------------------

def test_zero_learning_rate_changes_nothing(tiny_model, tiny_batch):
    ids, mask = tiny_batch
    dataset = EncodedDataset(ids, mask, np.array([0, 1, 2]))
    config = TrainConfig(batch_size=3, epochs=1).model_copy(update={"learning_rate": 0.0})
    digest = tiny_model.parameter_digest()
    eval_loss = ops.cross_entropy(forward_logits(tiny_model, ids, mask), dataset.targets).item()

    _, loss = train_epoch(tiny_model, dataset, AdamW(tiny_model.trainable_parameters(), config), config, np.random.default_rng(0))
    assert tiny_model.parameter_digest() == digest
    assert loss == pytest.approx(eval_loss, abs=1e-12)


def test_training_is_deterministic(toy):
    config, dataset = toy
    train_config = TrainConfig(epochs=2, batch_size=3, learning_rate=1e-2, seed=7)
    first, second = init_model(config, seed=1), init_model(config, seed=1)
    a = fit(first, dataset, dataset, train_config)
    b = fit(second, dataset, dataset, train_config)
    assert history_values(a) == history_values(b)
    assert first.parameter_digest() == second.parameter_digest()


def test_fit_records_every_epoch(toy):
    config, dataset = toy
    seen = []
    history = fit(init_model(config, seed=0), dataset, dataset, TrainConfig(epochs=3, batch_size=4), fold=2, on_epoch=seen.append)
    assert [r.epoch for r in history] == [1, 2, 3]
    assert {r.fold for r in history} == {2}
    assert seen == history
    times = [r.wall_time_s for r in history]
    assert times[0] > 0 and times == sorted(times)


def test_toy_set_converges(toy):
    config, dataset = toy
    model = init_model(config, seed=0)
    history = fit(model, dataset, dataset, TrainConfig(epochs=10, batch_size=1, learning_rate=1e-2, seed=0))
    assert history[-1].train_loss < 0.05
    memorized = evaluate_epoch(model, dataset, num_labels=2)
    assert (memorized.accuracy, memorized.precision, memorized.recall, memorized.f1) == (1.0, 1.0, 1.0, 1.0)


def test_untrained_model_is_near_chance(tiny_config):
    rng = np.random.default_rng(3)
    config = tiny_config.model_copy(update={"num_labels": 2})
    ids = rng.integers(4, config.vocab_size, size=(50, config.max_len))
    ids[:, 0] = 1
    dataset = EncodedDataset(ids, np.ones_like(ids), np.arange(50) % 2)
    accuracy = evaluate_epoch(init_model(config, seed=0), dataset, num_labels=2).accuracy
    assert 0.2 <= accuracy <= 0.8


def test_evaluation_is_pure(toy):
    config, dataset = toy
    model = init_model(config, seed=0)
    digest = model.parameter_digest()
    first = evaluate_epoch(model, dataset, num_labels=2)
    assert evaluate_epoch(model, dataset, num_labels=2) == first
    assert model.parameter_digest() == digest


def test_frozen_base_is_unchanged_after_fit(toy):
    config, dataset = toy
    wrapped = wrap_with_lora(init_model(config, seed=0), LoraConfig(rank=2), seed=0)
    frozen = {n: t.data.copy() for n, t in wrapped.base_parameters().items() if not t.requires_grad}
    fit(wrapped, dataset, dataset, TrainConfig(epochs=2, batch_size=4, learning_rate=1e-2))
    for name, data in frozen.items():
        np.testing.assert_array_equal(wrapped.param(name).data, data)


def test_divergence_is_reported(toy):
    config, dataset = toy
    model = init_model(config, seed=0)
    model.param("classifier.b").data[:] = np.inf
    with pytest.raises(TrainingDivergedError):
        fit(model, dataset, dataset, TrainConfig(epochs=1))


def test_empty_sets_are_rejected(toy):
    config, dataset = toy
    empty = dataset.subset([])
    with pytest.raises(UsageError):
        fit(init_model(config, seed=0), empty, dataset, TrainConfig(epochs=1))
    with pytest.raises(UsageError):
        evaluate_epoch(init_model(config, seed=0), empty, num_labels=2)


@pytest.mark.slow
def test_synthetic_corpus_reaches_high_accuracy(synthetic, synthetic_vocab, synthetic_labels):
    records, _ = synthetic
    train, val = split_train_val(records, ratio=0.7, seed=42)
    config = ModelConfig.preset(
        "mini-roberta-base", vocab_size=synthetic_vocab.size, num_labels=len(synthetic_labels), dropout=0.0
    )
    history = fit(
        init_model(config, seed=42),
        encode_records(train, synthetic_vocab, synthetic_labels, config.max_len),
        encode_records(val, synthetic_vocab, synthetic_labels, config.max_len),
        TrainConfig(epochs=10, batch_size=8, learning_rate=5e-3, seed=42),
    )
    assert history[-1].validation.accuracy >= 0.99
    assert history[-1].validation.f1 >= 0.99
