import base64
import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from factcheck.errors import StartupError, ValidationError
from factcheck.model.embedding import EmbeddingProvider
from factcheck.model.maxpool import MaxPoolParams
from factcheck.model.nsmn import NSMNParams
from factcheck.model.schema import Head, NSMNDims
from factcheck.numerics import Tensor

logger = logging.getLogger(__name__)

FORMAT = "factcheck-nsmn"
VERSION = 1

MODEL_KINDS = {NSMNParams.kind: NSMNParams, MaxPoolParams.kind: MaxPoolParams}

Matcher = NSMNParams | MaxPoolParams


def _encode_array(values: np.ndarray) -> dict:
    data = np.ascontiguousarray(values, dtype="<f8").tobytes()
    return {"shape": list(values.shape), "data": base64.b64encode(data).decode("ascii")}


def _decode_array(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(entry["shape"])


def checkpoint_dict(model: Matcher) -> dict:
    params = model.params
    tensors = {name: _encode_array(t.values) for name, t in params.items()}
    tensors["embedding.static"] = _encode_array(model.embedding.static)
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "head": model.head.value,
        "dims": asdict(model.dims),
        "vocab": model.embedding.vocab,
        "number_vocab": model.embedding.number_vocab,
        "tensors": tensors,
        "optimizer": {
            "step": params.step,
            "first_moment": {k: _encode_array(v) for k, v in params.first_moment.items()},
            "second_moment": {k: _encode_array(v) for k, v in params.second_moment.items()},
        },
    }


def save_checkpoint(path: str | Path, model: Matcher) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(model), f)
    logger.info(
        "Saved %s/%s checkpoint (%d parameters) to %s",
        model.kind,
        model.head.value,
        model.params.num_parameters(),
        path,
    )
    return path


def model_from_dict(blob: dict) -> Matcher:
    if blob.get("format") != FORMAT:
        raise ValidationError(f"not a {FORMAT} checkpoint")
    if blob.get("version") != VERSION:
        raise ValidationError(f"unsupported checkpoint version {blob.get('version')}")
    cls = MODEL_KINDS.get(blob["kind"])
    if cls is None:
        raise ValidationError(f"unknown model kind {blob['kind']!r}")

    tensors = {name: _decode_array(entry) for name, entry in blob["tensors"].items()}
    number = tensors.get("embedding.number")
    embedding = EmbeddingProvider(
        vocab=blob["vocab"],
        static=tensors.pop("embedding.static"),
        trainable=Tensor(tensors["embedding.trainable"], requires_grad=True),
        number_vocab=blob["number_vocab"],
        number_table=None if number is None else Tensor(number, requires_grad=True),
    )
    model = cls.init(embedding, Head(blob["head"]), NSMNDims(**blob["dims"]))

    if set(tensors) != set(model.params):
        missing = sorted(set(model.params) ^ set(tensors))
        raise ValidationError(f"checkpoint tensors do not match the model: {missing}")
    for name, values in tensors.items():
        target = model.params[name]
        if target.shape != values.shape:
            raise ValidationError(f"{name}: shape {values.shape} != {target.shape}")
        target.values[...] = values

    optimizer = blob.get("optimizer")
    if optimizer:
        model.params.step = optimizer["step"]
        for k, v in optimizer["first_moment"].items():
            model.params.first_moment[k] = _decode_array(v)
        for k, v in optimizer["second_moment"].items():
            model.params.second_moment[k] = _decode_array(v)
    return model


def load_checkpoint(path: str | Path) -> Matcher:
    path = Path(path)
    if not path.exists():
        raise StartupError(f"checkpoint {path} does not exist")
    with open(path, "r", encoding="utf-8") as f:
        blob = json.load(f)
    model = model_from_dict(blob)
    logger.info("Loaded %s/%s checkpoint from %s", model.kind, model.head.value, path)
    return model
