"""Binary model container.

Layout (little-endian)::

    4s   magic  b"RFNE"
    u32  format version
    u64  payload length
    u32  CRC-32 of payload
    ...  payload: u32 header length, JSON header, concatenated raw arrays

The JSON header holds the config, encoding maps, text mode, training trace
and a table of (name, dtype, shape, offset) for the arrays. Output bytes are
a pure function of the model.
"""
from __future__ import annotations

import json
import struct
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .boost import BoostClassifier, Stump
from .errors import BadMagic, ChecksumMismatch, ModelFileError, ModelIOError, VersionUnsupported
from .forest import Forest, RegressionTree, TreeParams
from .preprocess import EncodingMaps, TextFeatureMode
from .refine import ForestConfig, RefineConfig, RefinementModel, Stage, TraceEntry

MAGIC = b"RFNE"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sIQI")
_DTYPES = {"feature": "<i4", "threshold": "<f8", "left": "<i4", "right": "<i4",
           "value": "<f8", "n_samples": "<i8", "impurity_decrease": "<f8"}


def config_to_dict(config: RefineConfig) -> dict:
    return asdict(config)


def config_from_dict(d: dict) -> RefineConfig:
    def forest_cfg(fd):
        return ForestConfig(params=TreeParams(**fd["params"]),
                            tree_count=fd["tree_count"], bootstrap=fd["bootstrap"])
    return RefineConfig(k=d["k"], t_y=d["t_y"], base=forest_cfg(d["base"]),
                        compensator=forest_cfg(d["compensator"]),
                        boost_rounds=d["boost_rounds"], seed=d["seed"])


class _Writer:
    def __init__(self):
        self.table = []
        self.chunks = []
        self.offset = 0

    def add(self, name, arr, dtype):
        arr = np.ascontiguousarray(arr, dtype=dtype)
        raw = arr.tobytes()
        self.table.append({"name": name, "dtype": dtype, "shape": list(arr.shape),
                           "offset": self.offset})
        self.chunks.append(raw)
        self.offset += len(raw)

    def add_forest(self, prefix, forest: Forest) -> dict:
        self.add(f"{prefix}.node_counts", [t.node_count for t in forest.trees], "<i8")
        for name, dtype in _DTYPES.items():
            self.add(f"{prefix}.{name}",
                     np.concatenate([getattr(t, name) for t in forest.trees]), dtype)
        return {"prefix": prefix, "params": asdict(forest.params), "seed": forest.seed,
                "bootstrap": forest.bootstrap}

    def add_gate(self, prefix, gate: BoostClassifier) -> dict:
        self.add(f"{prefix}.feature", [s.feature for s in gate.stumps], "<i4")
        self.add(f"{prefix}.threshold", [s.threshold for s in gate.stumps], "<f8")
        self.add(f"{prefix}.polarity", [s.polarity for s in gate.stumps], "<i1")
        self.add(f"{prefix}.alpha", gate.alphas, "<f8")
        return {"prefix": prefix}


def dump_model(model: RefinementModel, maps: EncodingMaps, mode: TextFeatureMode,
               config: RefineConfig) -> bytes:
    w = _Writer()
    stages = []
    for i, st in enumerate(model.stages):
        stages.append({
            "gate": None if st.gate is None else w.add_gate(f"g{i}", st.gate),
            "compensator": None if st.compensator is None
            else w.add_forest(f"h{i}", st.compensator),
        })
    header = {
        "config": config_to_dict(config),
        "model_config": config_to_dict(model.config),
        "maps": maps.to_dict(),
        "text_mode": TextFeatureMode(mode).value,
        "trace": [asdict(t) for t in model.training_trace],
        "base": w.add_forest("base", model.base),
        "stages": stages,
        "arrays": w.table,
    }
    hbytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    payload = struct.pack("<I", len(hbytes)) + hbytes + b"".join(w.chunks)
    return _PREFIX.pack(MAGIC, FORMAT_VERSION, len(payload), zlib.crc32(payload)) + payload


def _read_forest(meta, arrays) -> Forest:
    p = meta["prefix"]
    counts = arrays[f"{p}.node_counts"]
    bounds = np.concatenate(([0], np.cumsum(counts)))
    trees = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        trees.append(RegressionTree(**{
            name: arrays[f"{p}.{name}"][a:b].astype(np.dtype(dtype).newbyteorder("="))
            for name, dtype in _DTYPES.items()}))
    return Forest(trees=trees, params=TreeParams(**meta["params"]), seed=meta["seed"],
                  bootstrap=meta["bootstrap"])


def _read_gate(meta, arrays) -> BoostClassifier:
    p = meta["prefix"]
    stumps = [Stump(int(f), float(t), int(s)) for f, t, s in
              zip(arrays[f"{p}.feature"], arrays[f"{p}.threshold"], arrays[f"{p}.polarity"])]
    return BoostClassifier(stumps, [float(a) for a in arrays[f"{p}.alpha"]])


def parse_model(data: bytes):
    if len(data) < _PREFIX.size or data[:4] != MAGIC:
        raise BadMagic("not a model file (bad magic)")
    _, version, length, crc = _PREFIX.unpack_from(data)
    if version != FORMAT_VERSION:
        raise VersionUnsupported(f"model format version {version}; "
                                 f"this build reads {FORMAT_VERSION}")
    payload = data[_PREFIX.size:]
    if len(payload) != length or zlib.crc32(payload) != crc:
        raise ChecksumMismatch("model file is corrupt or truncated")
    try:
        (hlen,) = struct.unpack_from("<I", payload)
        header = json.loads(payload[4:4 + hlen].decode("utf-8"))
        blob = payload[4 + hlen:]
        arrays = {}
        for e in header["arrays"]:
            dtype = np.dtype(e["dtype"])
            count = int(np.prod(e["shape"]))
            arrays[e["name"]] = np.frombuffer(blob, dtype=dtype, count=count,
                                              offset=e["offset"]).reshape(e["shape"])
        stages = [Stage(gate=None if s["gate"] is None else _read_gate(s["gate"], arrays),
                        compensator=None if s["compensator"] is None
                        else _read_forest(s["compensator"], arrays))
                  for s in header["stages"]]
        model = RefinementModel(
            base=_read_forest(header["base"], arrays), stages=stages,
            config=config_from_dict(header["model_config"]),
            training_trace=[TraceEntry(**t) for t in header["trace"]])
        return (model, EncodingMaps.from_dict(header["maps"]),
                TextFeatureMode(header["text_mode"]), config_from_dict(header["config"]))
    except (KeyError, ValueError, TypeError, struct.error) as exc:
        raise ModelFileError(f"malformed model payload: {exc}") from exc


def save_model(model: RefinementModel, maps: EncodingMaps, mode: TextFeatureMode,
               config: RefineConfig, path) -> None:
    data = dump_model(model, maps, mode, config)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ModelIOError(f"cannot write model to {path}: {exc}") from exc


def load_model(path):
    """Return ``(model, maps, text_mode, config)``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelIOError(f"cannot read model from {path}: {exc}") from exc
    return parse_model(data)


def export_summary(model: RefinementModel, path) -> None:
    """Human-readable JSON with the config and per-iteration training trace."""
    doc = {"config": config_to_dict(model.config),
           "training_trace": [asdict(t) for t in model.training_trace]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
