"""Read and write ``.mqf`` model checkpoints.

Layout::

    b"MQFCKPT1"                      8-byte magic
    <uint32 little-endian>           header length in bytes
    <UTF-8 JSON header>              config, vocab, labels, tensor manifest, optional lora section
    <float32 little-endian payload>  tensors concatenated in manifest order

Manifest offsets are byte offsets into the payload.
"""
import struct
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Union

import numpy as np
import orjson
from loguru import logger

from src.core.classes.encoder_model import EncoderModel, parameter_layout
from src.core.classes.lora import LoraAdapter, LoraModel
from src.core.classes.tensor import Tensor
from src.core.errors import BadMagicError, ManifestError, TruncatedCheckpointError
from src.core.helpers.dataset_io import LabelIndex
from src.core.helpers.tokenizer import Vocab
from src.core.schemas.LoraConfig import LoraConfig
from src.core.schemas.ModelConfig import ModelConfig

MAGIC = b"MQFCKPT1"
FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f4")


class Checkpoint(NamedTuple):
    model: Union[EncoderModel, LoraModel]
    config: ModelConfig
    vocab: Vocab
    label_index: Optional[LabelIndex]


def save_checkpoint(
    model: Union[EncoderModel, LoraModel],
    config: ModelConfig,
    vocab: Vocab,
    path: Union[str, Path],
    label_index: Optional[LabelIndex] = None,
) -> Path:
    """
    Write ``model`` to ``path``. Parameters are stored as float32, so a
    float32 model round-trips bit-exactly.

    Returns:
        Path: The written file.
    """
    path = Path(path)
    manifest: List[Dict] = []
    chunks: List[bytes] = []
    offset = 0
    for name, tensor in model.named_parameters().items():
        data = np.ascontiguousarray(tensor.data, dtype=PAYLOAD_DTYPE).tobytes()
        manifest.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        chunks.append(data)
        offset += len(data)

    header = {
        "format_version": FORMAT_VERSION,
        "config": config.model_dump(),
        "vocab": vocab.to_list(),
        "labels": label_index.labels if label_index is not None else None,
        "tensors": manifest,
        "lora": None,
    }
    if isinstance(model, LoraModel):
        header["lora"] = {
            "config": model.lora_config.model_dump(),
            "adapters": list(model.adapters),
        }

    header_bytes = orjson.dumps(header, option=orjson.OPT_SORT_KEYS)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for chunk in chunks:
            f.write(chunk)
    logger.info(f"saved checkpoint {path} ({len(manifest)} tensors, {offset} payload bytes)")
    return path


def _read_header(blob: bytes, path: Path) -> Dict:
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: bad magic, not a medqa checkpoint")
    if len(blob) < len(MAGIC) + 4:
        raise TruncatedCheckpointError(f"{path}: file ends inside the header length")
    (header_len,) = struct.unpack_from("<I", blob, len(MAGIC))
    start = len(MAGIC) + 4
    if len(blob) < start + header_len:
        raise TruncatedCheckpointError(f"{path}: header claims {header_len} bytes, file is too short")
    try:
        header = orjson.loads(blob[start:start + header_len])
    except orjson.JSONDecodeError as e:
        raise ManifestError(f"{path}: header is not valid JSON: {e}") from e
    for key in ("config", "vocab", "tensors"):
        if key not in header:
            raise ManifestError(f"{path}: header has no {key!r} section")
    if header.get("format_version") != FORMAT_VERSION:
        raise ManifestError(f"{path}: unsupported format version {header.get('format_version')!r}, expected {FORMAT_VERSION}")
    header["_payload_start"] = start + header_len
    return header


def _read_tensors(blob: bytes, header: Dict, path: Path) -> Dict[str, np.ndarray]:
    payload = memoryview(blob)[header["_payload_start"]:]
    tensors: Dict[str, np.ndarray] = {}
    expected_offset = 0
    for entry in header["tensors"]:
        name, shape, offset = entry["name"], tuple(entry["shape"]), entry["offset"]
        if offset != expected_offset:
            raise ManifestError(f"{path}: tensor {name!r} starts at byte {offset}, expected {expected_offset}")
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * PAYLOAD_DTYPE.itemsize
        if offset + nbytes > len(payload):
            raise TruncatedCheckpointError(
                f"{path}: tensor {name!r} needs {count} floats, payload has "
                f"{max(len(payload) - offset, 0) // PAYLOAD_DTYPE.itemsize}"
            )
        tensors[name] = np.frombuffer(payload, dtype=PAYLOAD_DTYPE, count=count, offset=offset).reshape(shape).astype(np.float32)
        expected_offset = offset + nbytes
    if expected_offset != len(payload):
        raise ManifestError(f"{path}: {len(payload) - expected_offset} payload bytes not described by the manifest")
    return tensors


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint written by :func:`save_checkpoint`.

    Raises:
        BadMagicError: The file does not start with the checkpoint magic.
        TruncatedCheckpointError: The header or a tensor payload is cut short.
        ManifestError: The manifest disagrees with the stored config or payload.
    """
    path = Path(path)
    blob = path.read_bytes()
    header = _read_header(blob, path)
    arrays = _read_tensors(blob, header, path)

    config = ModelConfig(**header["config"])
    vocab = Vocab.from_list(header["vocab"])
    labels = header.get("labels")
    label_index = LabelIndex(labels) if labels is not None else None
    if vocab.size != config.vocab_size:
        raise ManifestError(f"{path}: vocab has {vocab.size} tokens, config says {config.vocab_size}")
    if label_index is not None and len(label_index) != config.num_labels:
        raise ManifestError(f"{path}: {len(label_index)} labels stored, config says {config.num_labels}")

    params: Dict[str, Tensor] = {}
    for name, shape, _ in parameter_layout(config):
        if name not in arrays:
            raise ManifestError(f"{path}: manifest has no tensor {name!r}")
        if arrays[name].shape != shape:
            raise ManifestError(f"{path}: tensor {name!r} has shape {arrays[name].shape}, config implies {shape}")
        params[name] = Tensor(arrays[name], requires_grad=True, name=name)
    base = EncoderModel(config, params)

    lora = header.get("lora")
    if lora is None:
        extra = set(arrays) - set(params)
        if extra:
            raise ManifestError(f"{path}: unexpected tensors {sorted(extra)}")
        return Checkpoint(base, config, vocab, label_index)

    lora_config = LoraConfig(**lora["config"])
    base.freeze()
    if lora_config.train_classifier_head:
        for name in ("classifier.W", "classifier.b"):
            base.param(name).requires_grad = True
    adapters: Dict[str, LoraAdapter] = {}
    for weight in lora["adapters"]:
        a_name, b_name = f"{weight}.lora_A", f"{weight}.lora_B"
        if a_name not in arrays or b_name not in arrays or weight not in params:
            raise ManifestError(f"{path}: incomplete adapter for {weight!r}")
        d_in, d_out = params[weight].shape
        r = lora_config.rank
        if arrays[a_name].shape != (r, d_in) or arrays[b_name].shape != (d_out, r):
            raise ManifestError(f"{path}: adapter for {weight!r} does not match rank {r}")
        adapters[weight] = LoraAdapter(
            weight,
            Tensor(arrays[a_name], requires_grad=True, name=a_name),
            Tensor(arrays[b_name], requires_grad=True, name=b_name),
        )
    return Checkpoint(LoraModel(base, lora_config, adapters), config, vocab, label_index)
