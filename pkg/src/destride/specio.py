"""Reading and writing network spec documents.

A document is a JSON object:

    {
      "schema_version": 1,
      "network": {
        "name": "...", "provenance": "original",
        "input_shape": [channels, height, width],
        "layers": [
          {"kind": "conv", "channels_out": C, "kernel": [kh, kw], "stride": s},
          {"kind": "activation", "function": "relu"},
          {"kind": "fully_connected", "units": U, "input_permutation": [...]?}
        ]
      },
      "weights": { ... }?,        optional
      "transform": { ... }?       present on transformed documents
    }

Weights are either inline ({"mode": "inline", "arrays": {"<layer index>":
[flat floats...]}}) or a sidecar reference ({"mode": "sidecar", "path":
"relative/file.bin", "lengths": {"<layer index>": count}}).  The sidecar is
raw little-endian float64, layers concatenated in index order.  Inline
decimal values round-trip bit-exactly (shortest-repr floats); sidecars are
the raw bytes, so both modes reload to identical arrays.

The transform block links a transformed document to its source:
{"source": name, "input_map": {"stride": s, "entries": [[k, p, q], ...]},
"flatten_permutation": [0-based indices]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .network import (
    ActivationLayer,
    ConvLayer,
    FullyConnectedLayer,
    NetworkSpec,
    infer_shapes,
)
from .transform import ChannelMap, FlattenPermutation

SCHEMA_VERSION = 1


class SpecFormatError(ValueError):
    """Document does not conform to the spec schema."""


@dataclass(frozen=True)
class TransformMetadata:
    source: str
    input_map: ChannelMap
    flatten_permutation: FlattenPermutation


@dataclass(frozen=True)
class SpecDocument:
    network: NetworkSpec
    transform: TransformMetadata | None = None
    weights_mode: str | None = None  # "inline" | "sidecar" | None as loaded


def parameter_shapes(network: NetworkSpec) -> dict[int, tuple]:
    """Expected weight shape per parameterized layer index."""
    shapes = infer_shapes(network)
    before = [network.input_shape] + shapes[:-1]
    out = {}
    for i, layer in enumerate(network.layers):
        if isinstance(layer, ConvLayer):
            out[i] = (layer.channels_out, before[i][0], *layer.kernel)
        elif isinstance(layer, FullyConnectedLayer):
            feats = int(np.prod(before[i])) if isinstance(before[i], tuple) else before[i]
            out[i] = (layer.units, feats)
    return out


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SpecFormatError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise SpecFormatError(f"{where}: field {key!r} has wrong type {type(val).__name__}")
    return val


def _layer_from_json(i, obj):
    kind = _require(obj, "kind", str, f"layer {i}")
    if kind == "conv":
        return ConvLayer(
            channels_out=_require(obj, "channels_out", int, f"layer {i}"),
            kernel=tuple(_require(obj, "kernel", list, f"layer {i}")),
            stride=obj.get("stride", 1),
        )
    if kind == "activation":
        return ActivationLayer(function=_require(obj, "function", str, f"layer {i}"))
    if kind == "fully_connected":
        perm = obj.get("input_permutation")
        return FullyConnectedLayer(
            units=_require(obj, "units", int, f"layer {i}"),
            input_permutation=None if perm is None else np.asarray(perm, dtype=np.int64),
        )
    raise SpecFormatError(f"layer {i}: unknown kind {kind!r}")


def _layer_to_json(layer) -> dict:
    if isinstance(layer, ConvLayer):
        return {
            "kind": "conv",
            "channels_out": int(layer.channels_out),
            "kernel": [int(v) for v in layer.kernel],
            "stride": int(layer.stride),
        }
    if isinstance(layer, ActivationLayer):
        return {"kind": "activation", "function": layer.function}
    out = {"kind": "fully_connected", "units": int(layer.units)}
    if layer.input_permutation is not None:
        out["input_permutation"] = [int(v) for v in layer.input_permutation]
    return out


def _network_from_json(obj) -> NetworkSpec:
    name = _require(obj, "name", str, "network")
    shape = _require(obj, "input_shape", list, "network")
    layers_json = _require(obj, "layers", list, "network")
    try:
        layers = tuple(_layer_from_json(i, l) for i, l in enumerate(layers_json))
        return NetworkSpec(
            name=name,
            input_shape=tuple(shape),
            layers=layers,
            provenance=obj.get("provenance", "original"),
        )
    except SpecFormatError:
        raise
    except (ValueError, TypeError) as e:
        raise SpecFormatError(f"network: {e}") from None


def _attach_weights(network: NetworkSpec, wobj, doc_dir: Path) -> NetworkSpec:
    expected = parameter_shapes(network)
    mode = _require(wobj, "mode", str, "weights")
    flats: dict[int, np.ndarray] = {}
    if mode == "inline":
        arrays = _require(wobj, "arrays", dict, "weights")
        for key, values in arrays.items():
            idx = _weight_index(key, expected)
            flats[idx] = np.asarray(values, dtype=np.float64).ravel()
    elif mode == "sidecar":
        rel = _require(wobj, "path", str, "weights")
        lengths = _require(wobj, "lengths", dict, "weights")
        order = sorted(_weight_index(k, expected) for k in lengths)
        counts = {_weight_index(k, expected): int(v) for k, v in lengths.items()}
        path = doc_dir / rel
        try:
            blob = np.fromfile(path, dtype="<f8")
        except OSError:
            raise
        if blob.size != sum(counts.values()):
            raise SpecFormatError(
                f"weights: sidecar holds {blob.size} values, lengths declare "
                f"{sum(counts.values())}"
            )
        pos = 0
        for idx in order:
            flats[idx] = blob[pos : pos + counts[idx]]
            pos += counts[idx]
    else:
        raise SpecFormatError(f"weights: unknown mode {mode!r}")

    layers = list(network.layers)
    for idx, flat in flats.items():
        want = expected[idx]
        if flat.size != int(np.prod(want)):
            raise SpecFormatError(
                f"weights: layer {idx} has {flat.size} values, shape {want} "
                f"needs {int(np.prod(want))}"
            )
        layers[idx] = replace(layers[idx], weights=flat.reshape(want))
    return replace(network, layers=tuple(layers))


def _weight_index(key: str, expected: dict) -> int:
    try:
        idx = int(key)
    except (TypeError, ValueError):
        raise SpecFormatError(f"weights: bad layer index {key!r}") from None
    if idx not in expected:
        raise SpecFormatError(f"weights: layer {idx} is not a parameterized layer")
    return idx


def _transform_from_json(obj) -> TransformMetadata:
    source = _require(obj, "source", str, "transform")
    imap = _require(obj, "input_map", dict, "transform")
    entries = _require(imap, "entries", list, "transform.input_map")
    perm = _require(obj, "flatten_permutation", list, "transform")
    try:
        channel_map = ChannelMap(
            stride=_require(imap, "stride", int, "transform.input_map"),
            entries=tuple(tuple(e) for e in entries),
        )
        return TransformMetadata(source, channel_map, FlattenPermutation(tuple(perm)))
    except (ValueError, TypeError) as e:
        raise SpecFormatError(f"transform: {e}") from None


def load_document(path) -> SpecDocument:
    """Parse and validate a spec document (and its sidecar, if any)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise SpecFormatError(f"{path}: top level must be an object")
    version = _require(raw, "schema_version", int, str(path))
    if version != SCHEMA_VERSION:
        raise SpecFormatError(
            f"{path}: schema_version {version} unsupported (expected {SCHEMA_VERSION})"
        )
    network = _network_from_json(_require(raw, "network", dict, str(path)))
    mode = None
    if "weights" in raw:
        wobj = _require(raw, "weights", dict, str(path))
        network = _attach_weights(network, wobj, path.parent)
        mode = wobj["mode"]
    meta = None
    if "transform" in raw:
        meta = _transform_from_json(_require(raw, "transform", dict, str(path)))
    return SpecDocument(network=network, transform=meta, weights_mode=mode)


def save_document(path, doc: SpecDocument, weights_mode=None, sidecar_path=None) -> None:
    """Write a document; weights_mode None stores no weights, "inline" embeds
    them as decimal arrays, "sidecar" writes <document>.weights.bin next to
    the JSON (or sidecar_path) and references it relatively."""
    path = Path(path)
    network = doc.network
    out = {
        "schema_version": SCHEMA_VERSION,
        "network": {
            "name": network.name,
            "provenance": network.provenance,
            "input_shape": [int(v) for v in network.input_shape],
            "layers": [_layer_to_json(l) for l in network.layers],
        },
    }
    carrying = {
        i: l.weights
        for i, l in enumerate(network.layers)
        if getattr(l, "weights", None) is not None
    }
    if weights_mode is not None and carrying:
        if weights_mode == "inline":
            out["weights"] = {
                "mode": "inline",
                "arrays": {str(i): w.ravel().tolist() for i, w in carrying.items()},
            }
        elif weights_mode == "sidecar":
            sidecar = Path(sidecar_path) if sidecar_path else path.with_suffix(".weights.bin")
            blob = np.concatenate(
                [carrying[i].ravel() for i in sorted(carrying)]
            ).astype("<f8")
            blob.tofile(sidecar)
            out["weights"] = {
                "mode": "sidecar",
                "path": sidecar.name if sidecar.parent == path.parent else str(sidecar),
                "lengths": {str(i): int(carrying[i].size) for i in sorted(carrying)},
            }
        else:
            raise ValueError(f"unknown weights mode {weights_mode!r}")
    if doc.transform is not None:
        meta = doc.transform
        out["transform"] = {
            "source": meta.source,
            "input_map": {
                "stride": meta.input_map.stride,
                "entries": [list(e) for e in meta.input_map.entries],
            },
            "flatten_permutation": list(meta.flatten_permutation.indices),
        }
    path.write_text(json.dumps(out, indent=1) + "\n")
