import numpy as np
import pytest

from src.core.classes.encoder_model import init_model
from src.core.helpers.dataset_io import LabelIndex, generate_synthetic, write_primary, write_secondary
from src.core.helpers.tokenizer import build_vocab
from src.core.schemas.ModelConfig import ModelConfig
from src.core.templates.DISEASES import DISEASES
from src.core.templates.QUESTION_TEMPLATES import QUESTION_TEMPLATES


@pytest.fixture
def tiny_config():
    return ModelConfig(
        num_layers=1, num_heads=2, d_model=8, d_ff=16, vocab_size=12, max_len=6, num_labels=3, dropout=0.0
    )


@pytest.fixture
def tiny_model(tiny_config):
    return init_model(tiny_config, seed=0, dtype=np.float64)


@pytest.fixture
def tiny_batch(tiny_config):
    rng = np.random.default_rng(1)
    ids = rng.integers(4, tiny_config.vocab_size, size=(3, tiny_config.max_len))
    ids[:, 0] = 1
    mask = np.ones_like(ids)
    mask[0, 4:] = 0
    mask[1, 3:] = 0
    ids[mask == 0] = 0
    return ids, mask


@pytest.fixture(scope="session")
def synthetic():
    """The default 20 diseases x 8 templates dataset and its answer bank."""
    return generate_synthetic(DISEASES, QUESTION_TEMPLATES, seed=42)


@pytest.fixture(scope="session")
def synthetic_vocab(synthetic):
    records, _ = synthetic
    return build_vocab(r.question for r in records)


@pytest.fixture(scope="session")
def synthetic_labels(synthetic):
    records, _ = synthetic
    return LabelIndex.from_records(records)


@pytest.fixture
def dataset_files(tmp_path, synthetic):
    records, bank = synthetic
    primary, secondary = tmp_path / "questions.csv", tmp_path / "answers.csv"
    write_primary(records, primary)
    write_secondary(bank, secondary)
    return primary, secondary
