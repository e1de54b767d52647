"""Versioned binary model files.

Layout (all integers little-endian)::

    magic        8 bytes   b"WCINTENT"
    version      u32
    total_size   u64       size of the whole file, checksum included
    meta_len     u64
    metadata     meta_len bytes of UTF-8 JSON (configs, vocabularies)
    n_tensors    u32
    per tensor:  u16 name_len, name (UTF-8), u8 ndim, ndim x u64 dims,
                 prod(dims) x float64 payload
    checksum     32 bytes  SHA-256 of every preceding byte
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .classifier import LstmParams, OutputHead
from .embedding import ConvFilter, EmbeddingTable
from .errors import BadMagicError, ChecksumError, ModelFormatError, TruncatedFileError, VersionError
from .model import IntentModel, ModelConfig
from .tensor import Tensor
from .text import Vocabularies, Vocabulary

MAGIC = b"WCINTENT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ")
_DIGEST = 32


def to_bytes(model: IntentModel) -> bytes:
    meta = {
        "architecture": "word-char" if model.config.word_char else "word-only",
        "config": model.config.to_dict(),
        "vocab": {
            "words": model.vocabs.words.to_list(),
            "chars": model.vocabs.chars.to_list(),
            "labels": model.vocabs.labels.to_list(),
            "lexicon": list(model.vocabs.lexicon),
        },
        "validation_f1": model.validation_f1,
    }
    meta_bytes = json.dumps(meta, ensure_ascii=False, sort_keys=True).encode("utf-8")
    body = bytearray()
    body += struct.pack("<Q", len(meta_bytes)) + meta_bytes
    params = model.parameters()
    body += struct.pack("<I", len(params))
    for name, t in params.items():
        nb = name.encode("utf-8")
        body += struct.pack("<H", len(nb)) + nb
        body += struct.pack("<B", t.data.ndim)
        body += struct.pack(f"<{t.data.ndim}Q", *t.shape)
        body += np.ascontiguousarray(t.data, dtype="<f8").tobytes()
    total = _HEADER.size + len(body) + _DIGEST
    blob = _HEADER.pack(MAGIC, FORMAT_VERSION, total) + bytes(body)
    return blob + hashlib.sha256(blob).digest()


def save_model(model: IntentModel, path) -> None:
    Path(path).write_bytes(to_bytes(model))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class _Reader:
    def __init__(self, buf: bytes, pos: int):
        self.buf, self.pos = buf, pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncatedFileError("model file ends in the middle of a record")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def from_bytes(blob: bytes) -> IntentModel:
    if len(blob) < _HEADER.size:
        raise TruncatedFileError(f"model file too short ({len(blob)} bytes)")
    magic, version, total = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagicError("not a wordchar model file")
    if version != FORMAT_VERSION:
        raise VersionError(f"model format version {version} not supported (this build reads {FORMAT_VERSION})")
    if len(blob) < total:
        raise TruncatedFileError(f"model file truncated: {len(blob)} of {total} bytes")
    if len(blob) > total:
        raise ModelFormatError(f"{len(blob) - total} unexpected trailing bytes")
    if hashlib.sha256(blob[:-_DIGEST]).digest() != blob[-_DIGEST:]:
        raise ChecksumError("model file checksum mismatch")

    r = _Reader(blob[:-_DIGEST], _HEADER.size)
    (meta_len,) = r.unpack("<Q")
    meta = json.loads(r.take(meta_len).decode("utf-8"))
    (count,) = r.unpack("<I")
    tensors = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}Q")
        n = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(r.take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)
        tensors[name] = data
    if r.pos != len(r.buf):
        raise ModelFormatError("unparsed bytes after the last tensor record")
    return _assemble(meta, tensors)


def _assemble(meta: dict, tensors: dict) -> IntentModel:
    config = ModelConfig.from_dict(meta["config"])
    v = meta["vocab"]
    vocabs = Vocabularies(Vocabulary.from_list(v["words"]), Vocabulary.from_list(v["chars"]),
                          Vocabulary.from_list(v["labels"], reserved=False), list(v["lexicon"]))

    def param(name):
        try:
            return Tensor(tensors[name], requires_grad=True, name=name)
        except KeyError:
            raise ModelFormatError(f"model file lacks tensor {name!r}") from None

    words = EmbeddingTable(param("embed.words"))
    chars = conv = None
    if config.word_char:
        chars = EmbeddingTable(param("embed.chars"))
        conv = ConvFilter(param("conv.F"), param("conv.b"), config.wordchar.activation)
    lstm = LstmParams(**{k: param(f"lstm.{k}") for k in
                         ("W_f", "W_i", "W_C", "W_o", "b_f", "b_i", "b_C", "b_o")})
    head = OutputHead(param("head.W_y"), param("head.b_y"))
    model = IntentModel(config, vocabs, words, chars, conv, lstm, head)
    model.validation_f1 = meta.get("validation_f1")
    return model


def load_model(path) -> IntentModel:
    return from_bytes(Path(path).read_bytes())
