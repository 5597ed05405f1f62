"""Workload generation and layer file I/O.

Synthetic layers come from a counter-based splitmix64 generator so any
implementation, in any language, can reproduce a fixture from its seed:

    mix(v):  v ^= v >> 30; v *= 0xBF58476D1CE4E5B9;
             v ^= v >> 27; v *= 0x94D049BB133111EB;
             v ^= v >> 31             (all mod 2**64)
    word(seed, salt, n) = mix(mix(seed XOR salt) + (n + 1) * 0x9E3779B97F4A7C15)

Four fixed salts separate the activation-zero, activation-value,
weight-zero, and weight-value streams; n counts positions in C order. A
position is zeroed when the top 53 bits of its zero-stream word fall below
round(p * 2**53), and nonzero values map a value-stream word onto the range
with zero excluded.

The binary ``.layer`` container is little endian: magic "CNVL", a u16
version, the activation and filter dimensions at their logical (unpadded)
depth, stride, and brick size, then the raw int16 payloads. A ``.json``
variant with the same fields exists for human-editable fixtures.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagicError, TruncatedError, ValidationError, VersionError
from .tensor import INT16_MAX, INT16_MIN, ActTensor, FilterSet, LayerConfig

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

SALT_ACT_ZERO = 0x41435A45524F5300   # stream tags, arbitrary fixed constants
SALT_ACT_VALUE = 0x414356414C554500
SALT_WT_ZERO = 0x57545A45524F5300
SALT_WT_VALUE = 0x575456414C554500


def _mix(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64, copy=True)
    v ^= v >> np.uint64(30)
    v *= _MIX1
    v ^= v >> np.uint64(27)
    v *= _MIX2
    v ^= v >> np.uint64(31)
    return v


def _words(seed: int, salt: int, count: int) -> np.ndarray:
    base = _mix(np.array([np.uint64((seed ^ salt) & 0xFFFFFFFFFFFFFFFF)]))[0]
    n = np.arange(1, count + 1, dtype=np.uint64)
    return _mix(base + n * _GOLDEN)


@dataclass(frozen=True)
class SyntheticSpec:
    """Deterministic layer recipe: geometry, sparsity targets, value range, seed."""

    x: int
    y: int
    i: int
    f: int
    fx: int
    fy: int
    stride: int = 1
    p_act_zero: float = 0.0
    p_wt_zero: float = 0.0
    vmin: int = -128
    vmax: int = 127
    seed: int = 0
    brick: int = 16

    def __post_init__(self):
        for name in ("x", "y", "i", "f", "fx", "fy", "stride", "brick"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"spec field {name} must be a positive int, got {v!r}")
        for name in ("p_act_zero", "p_wt_zero"):
            p = getattr(self, name)
            if not 0.0 <= float(p) <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {p}")
        if not INT16_MIN <= self.vmin <= self.vmax <= INT16_MAX:
            raise ValidationError(
                f"value range [{self.vmin}, {self.vmax}] must be ordered and 16-bit"
            )
        if self.vmin == 0 and self.vmax == 0:
            raise ValidationError("value range [0, 0] leaves no nonzero values to draw")

    def layer_config(self) -> LayerConfig:
        pad_i = self.i + (-self.i) % self.brick
        return LayerConfig(self.x, self.y, pad_i, self.fx, self.fy, self.f, self.stride)


def _draw(seed: int, zero_salt: int, value_salt: int, count: int,
          p_zero: float, vmin: int, vmax: int) -> np.ndarray:
    threshold = np.uint64(round(float(p_zero) * float(1 << 53)))
    zero = (_words(seed, zero_salt, count) >> np.uint64(11)) < threshold

    span = vmax - vmin + 1
    skip_zero = vmin <= 0 <= vmax
    nonzero_span = span - 1 if skip_zero else span
    idx = (_words(seed, value_salt, count) % np.uint64(nonzero_span)).astype(np.int64)
    vals = vmin + idx
    if skip_zero:
        vals = np.where(vals >= 0, vals + 1, vals)  # skip over 0 in the range
    return np.where(zero, 0, vals).astype(np.int16)


def gen_synthetic(spec: SyntheticSpec) -> tuple[ActTensor, FilterSet]:
    """Materialize a spec; same spec, same tensors, on any platform."""
    acts = _draw(spec.seed, SALT_ACT_ZERO, SALT_ACT_VALUE, spec.x * spec.y * spec.i,
                 spec.p_act_zero, spec.vmin, spec.vmax).reshape(spec.x, spec.y, spec.i)
    wts = _draw(spec.seed, SALT_WT_ZERO, SALT_WT_VALUE,
                spec.f * spec.fx * spec.fy * spec.i,
                spec.p_wt_zero, spec.vmin, spec.vmax
                ).reshape(spec.f, spec.fx, spec.fy, spec.i)
    return ActTensor.padded(acts, spec.brick), FilterSet.padded(wts, spec.brick)


@dataclass
class LayerData:
    """One layer's tensors plus the geometry needed to simulate it."""

    acts: ActTensor
    filters: FilterSet
    stride: int
    brick: int

    def layer_config(self) -> LayerConfig:
        return LayerConfig.from_tensors(self.acts, self.filters, self.stride)


_MAGIC = b"CNVL"
_VERSION = 1
_BIN_HEADER = struct.Struct("<4sHIIIIIIHH")  # magic, version, x, y, i, f, fx, fy, stride, brick


def save_layer(path, data: LayerData) -> None:
    """Write a layer file; the suffix picks binary (.layer) or JSON (.json)."""
    try:
        if str(path).endswith(".json"):
            _save_json(path, data)
        else:
            _save_binary(path, data)
    except OSError as exc:
        raise ValidationError(f"cannot write layer file {path}: {exc}") from None


def load_layer(path) -> LayerData:
    try:
        if str(path).endswith(".json"):
            return _load_json(path)
        return _load_binary(path)
    except OSError as exc:
        raise ValidationError(f"cannot read layer file {path}: {exc}") from None


def _logical_views(data: LayerData) -> tuple[np.ndarray, np.ndarray]:
    li = data.acts.logical_i
    if data.filters.logical_i != li:
        raise ValidationError(
            f"activation logical depth {li} != filter logical depth {data.filters.logical_i}"
        )
    return data.acts.values[:, :, :li], data.filters.values[:, :, :, :li]


def _save_binary(path, data: LayerData) -> None:
    a, w = _logical_views(data)
    header = _BIN_HEADER.pack(_MAGIC, _VERSION, a.shape[0], a.shape[1], a.shape[2],
                              w.shape[0], w.shape[1], w.shape[2],
                              data.stride, data.brick)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(a, dtype="<i2").tobytes())
        fh.write(np.ascontiguousarray(w, dtype="<i2").tobytes())


def _load_binary(path) -> LayerData:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != _MAGIC:
        raise BadMagicError(f"{path}: not a layer file (bad magic)")
    if len(blob) < _BIN_HEADER.size:
        raise TruncatedError(f"{path}: header is incomplete")
    _, version, x, y, i, f, fx, fy, stride, brick = _BIN_HEADER.unpack_from(blob)
    if version != _VERSION:
        raise VersionError(f"{path}: version {version}, expected {_VERSION}")
    n_act = x * y * i
    n_wt = f * fx * fy * i
    need = _BIN_HEADER.size + 2 * (n_act + n_wt)
    if len(blob) < need:
        raise TruncatedError(f"{path}: {len(blob)} bytes, payload needs {need}")
    body = np.frombuffer(blob, dtype="<i2", count=n_act + n_wt, offset=_BIN_HEADER.size)
    acts = body[:n_act].reshape(x, y, i)
    wts = body[n_act:].reshape(f, fx, fy, i)
    return LayerData(ActTensor.padded(acts, brick), FilterSet.padded(wts, brick),
                     stride, brick)


def _save_json(path, data: LayerData) -> None:
    a, w = _logical_views(data)
    doc = {
        "format": _MAGIC.decode(),
        "version": _VERSION,
        "dims": list(a.shape),
        "filters": list(w.shape[:3]),
        "stride": data.stride,
        "brick": data.brick,
        "activations": [int(v) for v in a.reshape(-1)],
        "weights": [int(v) for v in w.reshape(-1)],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _load_json(path) -> LayerData:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BadMagicError(f"{path}: not a JSON layer file ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != _MAGIC.decode():
        raise BadMagicError(f"{path}: missing or wrong format field")
    if doc.get("version") != _VERSION:
        raise VersionError(f"{path}: version {doc.get('version')}, expected {_VERSION}")
    try:
        x, y, i = (int(v) for v in doc["dims"])
        f, fx, fy = (int(v) for v in doc["filters"])
        stride = int(doc["stride"])
        brick = int(doc["brick"])
        acts = np.asarray(doc["activations"], dtype=np.int64)
        wts = np.asarray(doc["weights"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise TruncatedError(f"{path}: incomplete layer document ({exc})") from None
    if acts.size != x * y * i or wts.size != f * fx * fy * i:
        raise TruncatedError(
            f"{path}: payload sizes {acts.size}/{wts.size} do not match the header dims"
        )
    return LayerData(ActTensor.padded(acts.reshape(x, y, i), brick),
                     FilterSet.padded(wts.reshape(f, fx, fy, i), brick),
                     stride, brick)
