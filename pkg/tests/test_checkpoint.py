import struct

import numpy as np
import pytest

from ssinr.backbones import BackboneConfig, forward, init_model
from ssinr.checkpoint import dumps, load_checkpoint, loads, read_checkpoint, save_checkpoint
from ssinr.errors import CheckpointError, CheckpointVersionError, NotACheckpointError, TruncatedCheckpointError
from ssinr.numerics import Rng
from ssinr.training import AdamState

CFG = BackboneConfig("siren", hidden_layers=2, width=16, in_dim=2, out_dim=3)


@pytest.fixture
def model():
    return init_model(CFG, Rng(0))


@pytest.mark.parametrize("dtype", [np.float64, np.float32])
def test_round_trip_forward_bitwise(model, tmp_path, dtype):
    m = init_model(CFG, Rng(0), dtype=dtype)
    path = tmp_path / "m.ssir"
    save_checkpoint(m, path, meta={"note": "x"})
    back = load_checkpoint(path)
    assert back.config == CFG and back.dtype == dtype
    x = Rng(1).random((50, 2)).astype(dtype)
    assert np.array_equal(forward(m, x)[0], forward(back, x)[0])
    assert read_checkpoint(path)[2] == {"note": "x"}


def test_adam_state_round_trip(model):
    state = AdamState(Rng(2).random(model.params.size), Rng(3).random(model.params.size), 17)
    _, back, _ = loads(dumps(model, state))
    assert back.t == 17
    assert np.array_equal(back.m, state.m) and np.array_equal(back.v, state.v)
    assert loads(dumps(model))[1] is None


def test_bytes_are_deterministic(model):
    assert dumps(model, meta={"b": 1, "a": 2}) == dumps(model.copy(), meta={"a": 2, "b": 1})


def test_wrong_magic(model):
    with pytest.raises(NotACheckpointError, match="not a checkpoint"):
        loads(b"PNG!" + dumps(model)[4:])


def test_empty():
    with pytest.raises(NotACheckpointError):
        loads(b"")


@pytest.mark.parametrize("cut", [6, 20, -1, -100])
def test_truncated(model, cut):
    data = dumps(model, AdamState.zeros(model.params.size))
    with pytest.raises(TruncatedCheckpointError, match="unexpected end of data"):
        loads(data[:cut])


def test_version(model):
    data = bytearray(dumps(model))
    data[4:8] = struct.pack("<I", 99)
    with pytest.raises(CheckpointVersionError):
        loads(bytes(data))


def test_trailing_bytes(model):
    with pytest.raises(NotACheckpointError, match="trailing"):
        loads(dumps(model) + b"\x00")


def test_errors_are_distinct():
    kinds = {NotACheckpointError, CheckpointVersionError, TruncatedCheckpointError}
    assert all(issubclass(k, CheckpointError) for k in kinds)
    assert len({k.__name__ for k in kinds}) == 3
