import struct

import numpy as np
import pytest

from poprefine.errors import BadMagic, ChecksumMismatch, ModelFileError, ModelIOError, VersionUnsupported
from poprefine.forest import TreeParams
from poprefine.persist import dump_model, export_summary, load_model, parse_model, save_model
from poprefine.pipeline import prepare_split
from poprefine.dataset import SplitSpec
from poprefine.refine import ForestConfig, RefineConfig, train_refinement
from poprefine.synth import SynthConfig, generate_synthetic

SMALL = ForestConfig(TreeParams(min_samples_leaf=3), tree_count=8)


@pytest.fixture(scope="module")
def trained():
    data = generate_synthetic(SynthConfig(n=1600, seed=1))
    prep = prepare_split(data, SplitSpec(test_count=1000, seed=1))
    cfg = RefineConfig(k=2, t_y=0.1, base=SMALL, compensator=SMALL, boost_rounds=10, seed=3)
    return train_refinement(prep.X_train, prep.y_train, cfg), prep, cfg


def test_round_trip_bit_exact(trained, tmp_path):
    model, prep, cfg = trained
    path = tmp_path / "m.rfne"
    save_model(model, prep.maps, prep.mode, cfg, path)
    loaded, maps, mode, cfg2 = load_model(path)
    assert cfg2 == cfg and maps == prep.maps and mode == prep.mode
    assert len(prep.X_test) == 1000
    assert np.array_equal(loaded.predict(prep.X_test), model.predict(prep.X_test))
    assert loaded.training_trace == model.training_trace


def test_bytes_deterministic(trained):
    model, prep, cfg = trained
    data = dump_model(model, prep.maps, prep.mode, cfg)
    assert data == dump_model(model, prep.maps, prep.mode, cfg)
    again = parse_model(data)
    assert dump_model(again[0], again[1], again[2], again[3]) == data


def test_corruption_detected(trained):
    model, prep, cfg = trained
    data = bytearray(dump_model(model, prep.maps, prep.mode, cfg))
    for pos in (30, len(data) // 2, len(data) - 1):
        bad = bytearray(data)
        bad[pos] ^= 0x01
        with pytest.raises(ChecksumMismatch):
            parse_model(bytes(bad))
    with pytest.raises(ChecksumMismatch):
        parse_model(bytes(data[:-5]))
    with pytest.raises(BadMagic):
        parse_model(b"XXXX" + bytes(data[4:]))
    with pytest.raises(BadMagic):
        parse_model(b"")
    bumped = bytes(data[:4]) + struct.pack("<I", 99) + bytes(data[8:])
    with pytest.raises(VersionUnsupported):
        parse_model(bumped)
    assert issubclass(ChecksumMismatch, ModelFileError)


def test_io_errors(trained, tmp_path):
    model, prep, cfg = trained
    with pytest.raises(ModelIOError):
        load_model(tmp_path / "nope.rfne")
    with pytest.raises(ModelIOError):
        save_model(model, prep.maps, prep.mode, cfg, tmp_path / "no" / "dir" / "m.rfne")


def test_summary(trained, tmp_path):
    import json
    model, _, _ = trained
    export_summary(model, tmp_path / "s.json")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["config"]["k"] == 2 and len(doc["training_trace"]) == 3
