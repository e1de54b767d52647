import struct

import numpy as np
import pytest

from wordchar.errors import BadMagicError, ChecksumError, ModelFormatError, TruncatedFileError, VersionError
from wordchar.serialize import MAGIC, from_bytes, load_model, save_model, to_bytes
from wordchar.training import train

from conftest import FOUR, tiny_train_config

QUERIES = ["明天 天气", "订 机票", "天气 怎么样 吗", "起飞", "一张 飞机 票", "完全 陌生 的 句子", "x"]


@pytest.fixture(scope="module", params=[True, False], ids=["word-char", "word-only"])
def model(request):
    m, _ = train(FOUR, tiny_train_config(request.param, epochs=3), validation=FOUR)
    return m


def test_roundtrip_identical_predictions(model, tmp_path):
    path = tmp_path / "m.bin"
    save_model(model, path)
    loaded = load_model(path)
    rng = np.random.default_rng(0)
    texts = [" ".join(rng.choice(QUERIES, size=rng.integers(1, 4))) for _ in range(100)]
    assert np.array_equal(loaded.predict_proba(texts), model.predict_proba(texts))
    assert loaded.predict(texts) == model.predict(texts)
    assert loaded.fingerprint() == model.fingerprint()
    assert loaded.config == model.config and loaded.validation_f1 == model.validation_f1
    assert loaded.vocabs.words == model.vocabs.words and loaded.vocabs.lexicon == model.vocabs.lexicon


def test_bytes_are_deterministic(model):
    assert to_bytes(model) == to_bytes(from_bytes(to_bytes(model)))


def test_header(model):
    blob = to_bytes(model)
    assert blob[:8] == MAGIC
    version, total = struct.unpack_from("<IQ", blob, 8)
    assert version == 1 and total == len(blob)


def test_flipped_payload_byte(model):
    blob = bytearray(to_bytes(model))
    blob[len(blob) // 2] ^= 0x01
    with pytest.raises(ChecksumError):
        from_bytes(bytes(blob))


def test_flipped_checksum_byte(model):
    blob = bytearray(to_bytes(model))
    blob[-1] ^= 0xFF
    with pytest.raises(ChecksumError):
        from_bytes(bytes(blob))


def test_future_version(model):
    blob = bytearray(to_bytes(model))
    struct.pack_into("<I", blob, 8, 2)
    with pytest.raises(VersionError):
        from_bytes(bytes(blob))


@pytest.mark.parametrize("keep", [0, 5, 20, -1, -40])
def test_truncated(model, keep):
    blob = to_bytes(model)
    with pytest.raises(TruncatedFileError):
        from_bytes(blob[:keep])


def test_bad_magic(model):
    blob = b"NOTAMODL" + to_bytes(model)[8:]
    with pytest.raises(BadMagicError):
        from_bytes(blob)


def test_trailing_garbage(model):
    with pytest.raises(ModelFormatError):
        from_bytes(to_bytes(model) + b"\0")


def test_error_classes_are_distinct():
    kinds = {BadMagicError, VersionError, ChecksumError, TruncatedFileError}
    assert all(issubclass(k, ModelFormatError) for k in kinds)
    assert all(not issubclass(a, b) for a in kinds for b in kinds if a is not b)
