"""Bit-exact codecs for the sparse activation storage formats.

Four formats record which activation values are ineffectual so downstream
stages can skip them:

ZFNAf   Per brick, B slots of (value: 16 bits, offset: ceil(log2 B) bits).
        Effectual values are packed to the front with their original offsets,
        remaining slots are zero filled. The container always occupies
        B*(16 + offset_bits) bits regardless of content.

RoE     One mode bit per brick. Mode 1 stores k (offset, value) pairs, chosen
        whenever k*(16 + offset_bits) <= B*16 (ties encode); mode 0 stores
        all B raw values and gives up skip information for that brick. The
        container always occupies 1 + B*16 bits.

VIAI    Values stay in place; a B-bit mask (bit = 1 means effectual, offset 0
        first) is prepended. B + B*16 bits per brick.

CVIAI   VIAI masks plus only the effectual values, packed tensor-wide into
        one pool. A per-brick indirection array IR of shape (X, Y, I/B)
        holds each brick's start offset into the pool; pointers are
        ceil(log2(pool_size + 1)) bits wide and never decrease in brick
        traversal order.

Bit packing is MSB first in field declaration order and serialized streams
are big endian. Values are two's complement 16-bit. Every criterion
classifies 0 as ineffectual, so a zero value field doubles as the
end-of-pairs sentinel inside the fixed-size containers.

Footprint accounting is exact: overhead ratios are `fractions.Fraction`
values against the raw cost of X*Y*I*16 bits.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BoundsError, ConfigurationError, FormatError, TruncatedError
from .sparsity import ZERO, IneffCriterion, _KINDS
from .tensor import ActTensor, Brick, pad_depth

VALUE_BITS = 16


def offset_bits_for(brick: int) -> int:
    """Bits needed to address an offset within a brick of the given size."""
    if brick < 1:
        raise ConfigurationError(f"brick size must be at least 1, got {brick}")
    return (brick - 1).bit_length()


class _BitWriter:
    """Accumulates fields MSB first; bytes come out big endian."""

    def __init__(self):
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, nbits: int) -> None:
        if nbits < 0 or (nbits == 0 and value != 0):
            raise ValueError(f"cannot write {value} in {nbits} bits")
        if value < 0 or value >> nbits:
            raise ValueError(f"value {value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._nbits += nbits

    @property
    def bit_length(self) -> int:
        return self._nbits

    def to_bytes(self) -> bytes:
        pad = (-self._nbits) % 8
        total = self._nbits + pad
        return (self._acc << pad).to_bytes(total // 8, "big")


class _BitReader:
    """Reads MSB-first fields out of a big-endian byte stream."""

    def __init__(self, data: bytes):
        self._value = int.from_bytes(data, "big")
        self._total = len(data) * 8
        self._pos = 0

    @property
    def bits_left(self) -> int:
        return self._total - self._pos

    def read(self, nbits: int) -> int:
        if nbits > self.bits_left:
            raise TruncatedError(
                f"bit stream ends after {self._total} bits; "
                f"needed {nbits} more at position {self._pos}"
            )
        shift = self._total - self._pos - nbits
        self._pos += nbits
        return (self._value >> shift) & ((1 << nbits) - 1)


def _signed16(raw: int) -> int:
    return raw - (1 << 16) if raw >= (1 << 15) else raw


def _pairs_for(values: np.ndarray, crit: IneffCriterion) -> list[tuple[int, int]]:
    keep = crit.effectual(values)
    return [(int(j), int(values[j])) for j in np.flatnonzero(keep)]


# ---------------------------------------------------------------------------
# per-brick codecs
# ---------------------------------------------------------------------------


@dataclass
class ZfnafBrick:
    """Front-packed (value, offset) slots; fixed container size."""

    x: int
    y: int
    i: int
    brick: int
    pairs: list[tuple[int, int]]  # (offset, value), offsets strictly increasing

    @property
    def offset_bits(self) -> int:
        return offset_bits_for(self.brick)

    @property
    def container_bits(self) -> int:
        return self.brick * (VALUE_BITS + self.offset_bits)

    def decode_values(self) -> np.ndarray:
        out = np.zeros(self.brick, dtype=np.int16)
        for off, val in self.pairs:
            out[off] = val
        return out

    def pack_into(self, w: _BitWriter) -> None:
        ob = self.offset_bits
        for slot in range(self.brick):
            off, val = self.pairs[slot] if slot < len(self.pairs) else (0, 0)
            w.write(val & 0xFFFF, VALUE_BITS)
            w.write(off, ob)

    def pack_bytes(self) -> bytes:
        w = _BitWriter()
        self.pack_into(w)
        return w.to_bytes()

    @classmethod
    def unpack_from(cls, r: _BitReader, x: int, y: int, i: int, brick: int) -> "ZfnafBrick":
        ob = offset_bits_for(brick)
        pairs: list[tuple[int, int]] = []
        done = False
        for _ in range(brick):
            val = _signed16(r.read(VALUE_BITS))
            off = r.read(ob)
            if val == 0:
                done = True
                if off != 0:
                    raise FormatError("nonzero offset in a zero-filled slot")
                continue
            if done:
                raise FormatError("value slot found after the zero-fill sentinel")
            if pairs and off <= pairs[-1][0]:
                raise FormatError("offsets are not strictly increasing")
            pairs.append((off, val))
        return cls(x, y, i, brick, pairs)


def encode_zfnaf(brick: Brick, crit: IneffCriterion = ZERO) -> ZfnafBrick:
    """Encode one brick; ineffectual values are dropped, offsets kept."""
    return ZfnafBrick(brick.x, brick.y, brick.i, brick.size, _pairs_for(brick.values, crit))


def decode_zfnaf(zb: ZfnafBrick) -> Brick:
    """Inverse of `encode_zfnaf` up to zeroing of the dropped positions."""
    return Brick(zb.x, zb.y, zb.i, zb.decode_values())


@dataclass
class RoeBrick:
    """One mode bit plus either packed pairs or the raw values."""

    x: int
    y: int
    i: int
    brick: int
    encoded: bool
    pairs: list[tuple[int, int]] = field(default_factory=list)
    raw: np.ndarray | None = None

    @property
    def offset_bits(self) -> int:
        return offset_bits_for(self.brick)

    @property
    def container_bits(self) -> int:
        return 1 + self.brick * VALUE_BITS

    def bits_used(self, offset_bits: int | None = None) -> int:
        """Bits the stored form occupies inside the container.

        ``offset_bits`` overrides the address width for accounting studies
        that charge a different offset cost than the packed layout uses.
        """
        if not self.encoded:
            return self.container_bits
        ob = self.offset_bits if offset_bits is None else offset_bits
        return 1 + len(self.pairs) * (VALUE_BITS + ob)

    def decode_values(self) -> np.ndarray:
        if not self.encoded:
            return self.raw.copy()
        out = np.zeros(self.brick, dtype=np.int16)
        for off, val in self.pairs:
            out[off] = val
        return out

    def pack_into(self, w: _BitWriter) -> None:
        w.write(1 if self.encoded else 0, 1)
        if self.encoded:
            ob = self.offset_bits
            for off, val in self.pairs:
                w.write(off, ob)
                w.write(val & 0xFFFF, VALUE_BITS)
            w.write(0, self.brick * VALUE_BITS - len(self.pairs) * (VALUE_BITS + ob))
        else:
            for val in self.raw:
                w.write(int(val) & 0xFFFF, VALUE_BITS)

    def pack_bytes(self) -> bytes:
        w = _BitWriter()
        self.pack_into(w)
        return w.to_bytes()

    @classmethod
    def unpack_from(cls, r: _BitReader, x: int, y: int, i: int, brick: int) -> "RoeBrick":
        encoded = bool(r.read(1))
        payload = brick * VALUE_BITS
        if not encoded:
            raw = np.array([_signed16(r.read(VALUE_BITS)) for _ in range(brick)], dtype=np.int16)
            return cls(x, y, i, brick, False, raw=raw)
        ob = offset_bits_for(brick)
        pairs: list[tuple[int, int]] = []
        left = payload
        while left >= ob + VALUE_BITS:
            off = r.read(ob)
            val = _signed16(r.read(VALUE_BITS))
            left -= ob + VALUE_BITS
            if val == 0:
                if off != 0:
                    raise FormatError("nonzero offset in RoE zero padding")
                break
            if pairs and off <= pairs[-1][0]:
                raise FormatError("RoE offsets are not strictly increasing")
            pairs.append((off, val))
        if r.read(left) != 0:
            raise FormatError("RoE padding bits are not zero")
        return cls(x, y, i, brick, True, pairs=pairs)


def encode_roe(brick: Brick, crit: IneffCriterion = ZERO) -> RoeBrick:
    """Encode one brick, falling back to raw storage when pairs do not fit."""
    pairs = _pairs_for(brick.values, crit)
    ob = offset_bits_for(brick.size)
    if len(pairs) * (VALUE_BITS + ob) <= brick.size * VALUE_BITS:
        return RoeBrick(brick.x, brick.y, brick.i, brick.size, True, pairs=pairs)
    return RoeBrick(brick.x, brick.y, brick.i, brick.size, False, raw=brick.values.copy())


def decode_roe(rb: RoeBrick) -> Brick:
    return Brick(rb.x, rb.y, rb.i, rb.decode_values())


@dataclass
class ViaiBrick:
    """Raw values left in place plus one effectuality bit per offset."""

    x: int
    y: int
    i: int
    mask: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.values = np.asarray(self.values, dtype=np.int16)
        if self.mask.shape != self.values.shape:
            raise FormatError(f"mask shape {self.mask.shape} != values shape {self.values.shape}")

    @property
    def brick(self) -> int:
        return self.values.shape[0]

    @property
    def container_bits(self) -> int:
        return self.brick * (1 + VALUE_BITS)

    def decode_values(self) -> np.ndarray:
        return np.where(self.mask, self.values, 0).astype(np.int16)

    def pack_into(self, w: _BitWriter) -> None:
        for bit in self.mask:
            w.write(int(bit), 1)
        for val in self.values:
            w.write(int(val) & 0xFFFF, VALUE_BITS)

    def pack_bytes(self) -> bytes:
        w = _BitWriter()
        self.pack_into(w)
        return w.to_bytes()

    @classmethod
    def unpack_from(cls, r: _BitReader, x: int, y: int, i: int, brick: int) -> "ViaiBrick":
        mask = np.array([bool(r.read(1)) for _ in range(brick)])
        values = np.array([_signed16(r.read(VALUE_BITS)) for _ in range(brick)], dtype=np.int16)
        return cls(x, y, i, mask, values)


def encode_viai(brick: Brick, crit: IneffCriterion = ZERO) -> ViaiBrick:
    return ViaiBrick(brick.x, brick.y, brick.i, crit.effectual(brick.values), brick.values.copy())


def decode_viai(vb: ViaiBrick) -> Brick:
    """Masked-off positions decode to zero even if a raw value was kept there."""
    return Brick(vb.x, vb.y, vb.i, vb.decode_values())


# ---------------------------------------------------------------------------
# tensor-level stores
# ---------------------------------------------------------------------------


class Format(enum.Enum):
    RAW = "raw"
    ZFNAF = "zfnaf"
    ROE = "roe"
    VIAI = "viai"
    CVIAI = "cviai"

    @property
    def tag(self) -> int:
        return _FORMAT_TAGS[self]


_FORMAT_TAGS = {
    Format.RAW: 0,
    Format.ZFNAF: 1,
    Format.ROE: 2,
    Format.VIAI: 3,
    Format.CVIAI: 4,
}
_TAG_FORMATS = {v: k for k, v in _FORMAT_TAGS.items()}


@dataclass(frozen=True)
class FootprintReport:
    """Exact storage cost of one format over one tensor."""

    format: Format
    total_bits: int
    raw_bits: int

    @property
    def overhead(self) -> Fraction:
        """(total - raw) / raw as an exact ratio; negative means compression."""
        return Fraction(self.total_bits - self.raw_bits, self.raw_bits)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.total_bits, self.raw_bits)


def _tensor_values(acts, brick: int) -> tuple[np.ndarray, int]:
    """Normalize to a depth-padded (X, Y, I) integer array plus logical depth."""
    if isinstance(acts, ActTensor):
        arr, logical = acts.values, acts.logical_i
    else:
        arr = np.asarray(acts)
        if arr.ndim != 3 or arr.size == 0:
            raise ConfigurationError(f"expected a non-empty 3-D tensor, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ConfigurationError(f"expected an integer tensor, got dtype {arr.dtype}")
        logical = arr.shape[2]
    return pad_depth(arr, brick), logical


def pointer_bits_for(pool_size: int) -> int:
    """Width of a pointer that must address offsets 0..pool_size inclusive."""
    return int(pool_size).bit_length()


_HEADER = struct.Struct(">BIIIIHBH")  # tag, X, Y, I, logical_i, B, crit kind, crit param


def _pack_header(fmt: Format, x: int, y: int, i: int, logical_i: int,
                 brick: int, crit: IneffCriterion) -> bytes:
    return _HEADER.pack(fmt.tag, x, y, i, logical_i, brick, _KINDS.index(crit.kind), crit.param)


def _unpack_header(data: bytes) -> tuple[Format, int, int, int, int, int, IneffCriterion, bytes]:
    if len(data) < _HEADER.size:
        raise TruncatedError(f"stream of {len(data)} bytes is shorter than the header")
    tag, x, y, i, logical_i, brick, kind, param = _HEADER.unpack_from(data)
    if tag not in _TAG_FORMATS:
        raise FormatError(f"unknown format tag {tag}")
    if kind >= len(_KINDS):
        raise FormatError(f"unknown criterion tag {kind}")
    try:
        crit = IneffCriterion(_KINDS[kind], param)
    except Exception as exc:
        raise FormatError(f"bad criterion in header: {exc}") from None
    return _TAG_FORMATS[tag], x, y, i, logical_i, brick, crit, data[_HEADER.size:]


class _BrickStore:
    """Common shape bookkeeping for the per-brick stores."""

    format: Format = None  # set by subclasses

    def __init__(self, dims: tuple[int, int, int], logical_i: int, brick: int,
                 crit: IneffCriterion, bricks: list):
        self.x, self.y, self.i = dims
        self.logical_i = logical_i
        self.brick = brick
        self.crit = crit
        self.bricks = bricks

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.i)

    @property
    def bricks_per_column(self) -> int:
        return self.i // self.brick

    @property
    def brick_count(self) -> int:
        return self.x * self.y * self.bricks_per_column

    def _index(self, x: int, y: int, ib: int) -> int:
        nb = self.bricks_per_column
        if not (0 <= x < self.x and 0 <= y < self.y and 0 <= ib < nb):
            raise BoundsError(f"brick ({x}, {y}, {ib}) outside ({self.x}, {self.y}, {nb})")
        return (x * self.y + y) * nb + ib

    def decode(self) -> np.ndarray:
        out = np.zeros(self.dims, dtype=np.int16)
        nb = self.bricks_per_column
        for idx, eb in enumerate(self.bricks):
            x, rest = divmod(idx, self.y * nb)
            y, ib = divmod(rest, nb)
            out[x, y, ib * self.brick : (ib + 1) * self.brick] = eb.decode_values()
        return out

    @classmethod
    def encode(cls, acts, crit: IneffCriterion = ZERO, brick: int = 16):
        arr, logical = _tensor_values(acts, brick)
        x, y, depth = arr.shape
        nb = depth // brick
        bricks = []
        for xi in range(x):
            for yi in range(y):
                for ib in range(nb):
                    base = ib * brick
                    b = Brick(xi, yi, base, arr[xi, yi, base : base + brick])
                    bricks.append(cls._encode_brick(b, crit))
        return cls((x, y, depth), logical, brick, crit, bricks)

    def to_bytes(self) -> bytes:
        w = _BitWriter()
        for eb in self.bricks:
            eb.pack_into(w)
        return _pack_header(self.format, self.x, self.y, self.i,
                            self.logical_i, self.brick, self.crit) + w.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes):
        fmt, x, y, i, logical_i, brick, crit, body = _unpack_header(data)
        if fmt is not cls.format:
            raise FormatError(f"stream holds {fmt.value}, expected {cls.format.value}")
        if brick < 1 or i % brick != 0:
            raise FormatError(f"depth {i} is not a multiple of brick size {brick}")
        r = _BitReader(body)
        nb = i // brick
        bricks = []
        for xi in range(x):
            for yi in range(y):
                for ib in range(nb):
                    bricks.append(cls._brick_type.unpack_from(r, xi, yi, ib * brick, brick))
        return cls((x, y, i), logical_i, brick, crit, bricks)


class ZfnafStore(_BrickStore):
    format = Format.ZFNAF
    _brick_type = ZfnafBrick
    _encode_brick = staticmethod(encode_zfnaf)

    def brick_pairs(self, x: int, y: int, ib: int) -> list[tuple[int, int]]:
        """Stored (offset, value) pairs; already limited to effectual values."""
        return list(self.bricks[self._index(x, y, ib)].pairs)

    def footprint(self) -> FootprintReport:
        total = self.brick_count * self.brick * (VALUE_BITS + offset_bits_for(self.brick))
        return FootprintReport(self.format, total, _raw_bits(self.dims))


class RoeStore(_BrickStore):
    format = Format.ROE
    _brick_type = RoeBrick
    _encode_brick = staticmethod(encode_roe)

    def brick_pairs(self, x: int, y: int, ib: int) -> list[tuple[int, int]]:
        """Pairs for encoded bricks; raw-mode bricks stream every offset
        because the container carries no skip information."""
        rb = self.bricks[self._index(x, y, ib)]
        if rb.encoded:
            return list(rb.pairs)
        return [(j, int(v)) for j, v in enumerate(rb.raw)]

    def footprint(self) -> FootprintReport:
        total = self.brick_count * (1 + self.brick * VALUE_BITS)
        return FootprintReport(self.format, total, _raw_bits(self.dims))


class ViaiStore(_BrickStore):
    format = Format.VIAI
    _brick_type = ViaiBrick
    _encode_brick = staticmethod(encode_viai)

    def brick_pairs(self, x: int, y: int, ib: int) -> list[tuple[int, int]]:
        vb = self.bricks[self._index(x, y, ib)]
        return [(int(j), int(vb.values[j])) for j in np.flatnonzero(vb.mask)]

    def footprint(self) -> FootprintReport:
        total = self.brick_count * self.brick * (1 + VALUE_BITS)
        return FootprintReport(self.format, total, _raw_bits(self.dims))


class CviaiStore:
    """Tensor-wide compressed store: masks, one packed value pool, and IR."""

    format = Format.CVIAI

    def __init__(self, dims: tuple[int, int, int], logical_i: int, brick: int,
                 crit: IneffCriterion, masks: np.ndarray, packed: np.ndarray,
                 ir: np.ndarray):
        self.x, self.y, self.i = dims
        self.logical_i = logical_i
        self.brick = brick
        self.crit = crit
        self.masks = masks      # (X, Y, I/B, B) bool
        self.packed = packed    # (n_effectual,) int16
        self.ir = ir            # (X, Y, I/B) int64 start offsets into packed

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.i)

    @property
    def bricks_per_column(self) -> int:
        return self.i // self.brick

    @property
    def brick_count(self) -> int:
        return self.x * self.y * self.bricks_per_column

    @property
    def pointer_bits(self) -> int:
        return pointer_bits_for(len(self.packed))

    def _check(self, x: int, y: int, ib: int) -> None:
        nb = self.bricks_per_column
        if not (0 <= x < self.x and 0 <= y < self.y and 0 <= ib < nb):
            raise BoundsError(f"brick ({x}, {y}, {ib}) outside ({self.x}, {self.y}, {nb})")

    def fetch(self, x: int, y: int, ib: int) -> tuple[np.ndarray, np.ndarray]:
        """Mask and packed effectual values of one brick, via the IR pointer."""
        self._check(x, y, ib)
        mask = self.masks[x, y, ib]
        start = int(self.ir[x, y, ib])
        return mask.copy(), self.packed[start : start + int(mask.sum())].copy()

    def brick_pairs(self, x: int, y: int, ib: int) -> list[tuple[int, int]]:
        mask, vals = self.fetch(x, y, ib)
        return [(int(j), int(v)) for j, v in zip(np.flatnonzero(mask), vals)]

    def decode(self) -> np.ndarray:
        out = np.zeros(self.dims, dtype=np.int16)
        flat_mask = self.masks.reshape(self.x, self.y, self.i)
        out[flat_mask] = self.packed
        return out

    def footprint(self) -> FootprintReport:
        total = (self.brick_count * self.brick
                 + len(self.packed) * VALUE_BITS
                 + self.brick_count * self.pointer_bits)
        return FootprintReport(self.format, total, _raw_bits(self.dims))

    def to_bytes(self) -> bytes:
        head = _pack_header(self.format, self.x, self.y, self.i,
                            self.logical_i, self.brick, self.crit)
        head += struct.pack(">Q", len(self.packed))
        w = _BitWriter()
        for bit in self.masks.reshape(-1):
            w.write(int(bit), 1)
        for val in self.packed:
            w.write(int(val) & 0xFFFF, VALUE_BITS)
        pb = self.pointer_bits
        for ptr in self.ir.reshape(-1):
            w.write(int(ptr), pb)
        return head + w.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CviaiStore":
        fmt, x, y, i, logical_i, brick, crit, body = _unpack_header(data)
        if fmt is not cls.format:
            raise FormatError(f"stream holds {fmt.value}, expected {cls.format.value}")
        if brick < 1 or i % brick != 0:
            raise FormatError(f"depth {i} is not a multiple of brick size {brick}")
        if len(body) < 8:
            raise TruncatedError("stream ends before the pool size field")
        (pool,) = struct.unpack(">Q", body[:8])
        r = _BitReader(body[8:])
        nb = i // brick
        n_bricks = x * y * nb
        masks = np.array([bool(r.read(1)) for _ in range(n_bricks * brick)])
        masks = masks.reshape(x, y, nb, brick)
        if int(masks.sum()) != pool:
            raise FormatError(
                f"mask population {int(masks.sum())} != declared pool size {pool}"
            )
        packed = np.array([_signed16(r.read(VALUE_BITS)) for _ in range(pool)],
                          dtype=np.int16)
        pb = pointer_bits_for(pool)
        ir = np.array([r.read(pb) for _ in range(n_bricks)],
                      dtype=np.int64).reshape(x, y, nb)
        return cls((x, y, i), logical_i, brick, crit, masks, packed, ir)


def encode_cviai(acts, crit: IneffCriterion = ZERO, brick: int = 16) -> CviaiStore:
    """Encode a whole tensor; values pack in (x, y, brick) traversal order."""
    arr, logical = _tensor_values(acts, brick)
    x, y, depth = arr.shape
    nb = depth // brick
    masks = crit.effectual(arr).reshape(x, y, nb, brick)
    flat_mask = masks.reshape(x, y, depth)
    packed = np.asarray(arr, dtype=np.int16)[flat_mask]
    counts = masks.sum(axis=3, dtype=np.int64).reshape(-1)
    ir = np.concatenate(([0], np.cumsum(counts)[:-1])).reshape(x, y, nb)
    return CviaiStore((x, y, depth), logical, brick, crit, masks, packed, ir)


def fetch_brick_cviai(store: CviaiStore, x: int, y: int, ib: int) -> tuple[np.ndarray, np.ndarray]:
    """Indirection-based fetch of one brick's mask and packed values."""
    return store.fetch(x, y, ib)


_STORE_TYPES = {
    Format.ZFNAF: ZfnafStore,
    Format.ROE: RoeStore,
    Format.VIAI: ViaiStore,
    Format.CVIAI: CviaiStore,
}


def encode_store(fmt: Format, acts, crit: IneffCriterion = ZERO, brick: int = 16):
    """Encode a tensor in any of the four sparse formats."""
    if fmt is Format.CVIAI:
        return encode_cviai(acts, crit, brick)
    if fmt in _STORE_TYPES:
        return _STORE_TYPES[fmt].encode(acts, crit, brick)
    raise ConfigurationError(f"cannot build an encoded store for format {fmt}")


def deserialize_store(data: bytes):
    """Rebuild whichever store type the stream's format tag declares."""
    fmt = _unpack_header(data)[0]
    if fmt not in _STORE_TYPES:
        raise FormatError(f"format {fmt.value} has no serialized store form")
    return _STORE_TYPES[fmt].from_bytes(data)


# ---------------------------------------------------------------------------
# footprints
# ---------------------------------------------------------------------------


def _raw_bits(dims: tuple[int, int, int]) -> int:
    x, y, i = dims
    return x * y * i * VALUE_BITS


def footprint_bits(fmt: Format, acts, crit: IneffCriterion = ZERO, brick: int = 16) -> FootprintReport:
    """Exact bit cost of storing ``acts`` in the given format.

    Container sizes are content independent for ZFNAf, RoE, and VIAI; CVIAI
    depends on how many values the criterion keeps. Value fields are always
    counted at 16 bits.
    """
    arr, _ = _tensor_values(acts, brick)
    dims = arr.shape
    raw = _raw_bits(dims)
    n_bricks = dims[0] * dims[1] * (dims[2] // brick)
    if fmt is Format.RAW:
        total = raw
    elif fmt is Format.ZFNAF:
        total = n_bricks * brick * (VALUE_BITS + offset_bits_for(brick))
    elif fmt is Format.ROE:
        total = n_bricks * (1 + brick * VALUE_BITS)
    elif fmt is Format.VIAI:
        total = n_bricks * brick * (1 + VALUE_BITS)
    elif fmt is Format.CVIAI:
        kept = int(crit.effectual(arr).sum())
        total = n_bricks * brick + kept * VALUE_BITS + n_bricks * pointer_bits_for(kept)
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    return FootprintReport(fmt, int(total), raw)
