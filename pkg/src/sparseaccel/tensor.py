"""Dense activation and weight containers plus the reference convolution.

Activations are a 3-D array with axes (x, y, i) where i, the feature index,
varies fastest in memory. A brick is an aligned run of B consecutive samples
along i, so bricks are contiguous. When the feature depth is not a multiple
of the brick size the array is zero padded up to the next multiple at
ingestion and the original depth is kept as ``logical_i``; padding never
changes convolution results because the weights are padded the same way.

All stored samples are signed 16-bit. The reference convolution accumulates
in 64-bit and returns the untruncated sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BoundsError, ConfigurationError

INT16_MIN = -(1 << 15)
INT16_MAX = (1 << 15) - 1


def _as_int16(values, ndim: int, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != ndim:
        raise ConfigurationError(f"{what} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ConfigurationError(f"{what} must be non-empty, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ConfigurationError(f"{what} must hold integers, got dtype {arr.dtype}")
    lo, hi = int(arr.min()), int(arr.max())
    if lo < INT16_MIN or hi > INT16_MAX:
        raise ConfigurationError(
            f"{what} values span [{lo}, {hi}], outside the signed 16-bit range"
        )
    return np.ascontiguousarray(arr, dtype=np.int16)


def pad_depth(arr: np.ndarray, brick: int) -> np.ndarray:
    """Zero pad the last axis up to the next multiple of ``brick``."""
    if brick < 1:
        raise ConfigurationError(f"brick size must be at least 1, got {brick}")
    pad = (-arr.shape[-1]) % brick
    if pad == 0:
        return arr
    widths = [(0, 0)] * (arr.ndim - 1) + [(0, pad)]
    return np.pad(arr, widths)


class ActTensor:
    """Activation tensor with axes (x, y, i), feature index fastest.

    ``logical_i`` records the pre-padding depth; it equals the stored depth
    unless the tensor was depth padded to a brick multiple.
    """

    def __init__(self, values, logical_i: int | None = None):
        self.values = _as_int16(values, 3, "activation tensor")
        depth = self.values.shape[2]
        if logical_i is None:
            logical_i = depth
        if not 1 <= int(logical_i) <= depth:
            raise ConfigurationError(
                f"logical depth {logical_i} outside [1, {depth}]"
            )
        self.logical_i = int(logical_i)

    @classmethod
    def padded(cls, values, brick: int) -> "ActTensor":
        """Build a tensor whose depth is padded up to a multiple of ``brick``."""
        arr = _as_int16(values, 3, "activation tensor")
        return cls(pad_depth(arr, brick), logical_i=arr.shape[2])

    @property
    def x(self) -> int:
        return self.values.shape[0]

    @property
    def y(self) -> int:
        return self.values.shape[1]

    @property
    def i(self) -> int:
        return self.values.shape[2]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def brick_count(self, brick: int) -> int:
        if self.i % brick != 0:
            raise ConfigurationError(
                f"depth {self.i} is not a multiple of brick size {brick}"
            )
        return self.i // brick

    def __repr__(self) -> str:
        return f"ActTensor(dims={self.dims}, logical_i={self.logical_i})"


class FilterSet:
    """Weight tensor with axes (f, x, y, i); all filters share one shape."""

    def __init__(self, values, logical_i: int | None = None):
        self.values = _as_int16(values, 4, "filter set")
        depth = self.values.shape[3]
        if logical_i is None:
            logical_i = depth
        if not 1 <= int(logical_i) <= depth:
            raise ConfigurationError(
                f"logical depth {logical_i} outside [1, {depth}]"
            )
        self.logical_i = int(logical_i)

    @classmethod
    def padded(cls, values, brick: int) -> "FilterSet":
        arr = _as_int16(values, 4, "filter set")
        return cls(pad_depth(arr, brick), logical_i=arr.shape[3])

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def fx(self) -> int:
        return self.values.shape[1]

    @property
    def fy(self) -> int:
        return self.values.shape[2]

    @property
    def i(self) -> int:
        return self.values.shape[3]

    def __repr__(self) -> str:
        return f"FilterSet(count={self.count}, dims={self.values.shape[1:]})"


@dataclass(frozen=True)
class LayerConfig:
    """Geometry of one convolutional layer.

    The stride must tile the input exactly; there is no padding of the x/y
    extent, so (x - fx) and (y - fy) must both be multiples of the stride.
    """

    x: int
    y: int
    i: int
    fx: int
    fy: int
    f: int
    stride: int = 1

    def __post_init__(self):
        for name in ("x", "y", "i", "fx", "fy", "f", "stride"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigurationError(f"layer field {name} must be a positive int, got {v!r}")
        if self.fx > self.x or self.fy > self.y:
            raise ConfigurationError(
                f"filter extent ({self.fx}, {self.fy}) exceeds input ({self.x}, {self.y})"
            )
        if (self.x - self.fx) % self.stride or (self.y - self.fy) % self.stride:
            raise ConfigurationError(
                f"stride {self.stride} does not tile input "
                f"({self.x}, {self.y}) with filter ({self.fx}, {self.fy})"
            )

    @property
    def ox(self) -> int:
        return (self.x - self.fx) // self.stride + 1

    @property
    def oy(self) -> int:
        return (self.y - self.fy) // self.stride + 1

    @property
    def window_positions(self) -> int:
        """Number of multiply positions in one window."""
        return self.fx * self.fy * self.i

    def check_brick(self, brick: int) -> None:
        if brick < 1 or self.i % brick != 0:
            raise ConfigurationError(
                f"depth {self.i} is not a multiple of brick size {brick}"
            )

    @classmethod
    def from_tensors(cls, acts: ActTensor, filters: FilterSet, stride: int = 1) -> "LayerConfig":
        if acts.i != filters.i:
            raise ConfigurationError(
                f"filter depth {filters.i} does not match input depth {acts.i}"
            )
        return cls(acts.x, acts.y, acts.i, filters.fx, filters.fy, filters.count, stride)


@dataclass
class Brick:
    """One aligned group of B consecutive samples along the feature axis."""

    x: int
    y: int
    i: int
    values: np.ndarray

    def __post_init__(self):
        self.values = _as_int16(np.atleast_1d(self.values), 1, "brick")
        b = self.values.shape[0]
        if self.i % b != 0:
            raise ConfigurationError(
                f"brick base index {self.i} is not aligned to brick size {b}"
            )

    @property
    def size(self) -> int:
        return self.values.shape[0]


def brick_at(acts: ActTensor, x: int, y: int, brick_index: int, brick: int = 16) -> Brick:
    """Copy out the brick at spatial position (x, y) and depth ordinal ``brick_index``."""
    acts.brick_count(brick)
    if not (0 <= x < acts.x and 0 <= y < acts.y):
        raise BoundsError(f"position ({x}, {y}) outside ({acts.x}, {acts.y})")
    if not 0 <= brick_index < acts.i // brick:
        raise BoundsError(
            f"brick index {brick_index} outside [0, {acts.i // brick})"
        )
    base = brick_index * brick
    return Brick(x, y, base, acts.values[x, y, base : base + brick].copy())


def window_bricks(layer: LayerConfig, wx: int, wy: int, brick: int = 16) -> list[tuple[int, int, int]]:
    """Absolute brick coordinates (x, y, brick_index) of one output window.

    Order is x-major, then y, with the depth ordinal fastest, so consecutive
    entries at the same (x, y) step through the depth bricks first.
    """
    layer.check_brick(brick)
    if not (0 <= wx < layer.ox and 0 <= wy < layer.oy):
        raise BoundsError(f"window ({wx}, {wy}) outside ({layer.ox}, {layer.oy})")
    nb = layer.i // brick
    x0 = wx * layer.stride
    y0 = wy * layer.stride
    return [
        (x0 + fx, y0 + fy, ib)
        for fx in range(layer.fx)
        for fy in range(layer.fy)
        for ib in range(nb)
    ]


@dataclass(frozen=True)
class WindowAssignment:
    """Lane-to-brick assignment for one output window."""

    wx: int
    wy: int
    lanes: tuple[tuple[tuple[int, int, int], ...], ...]


def window_slices(layer: LayerConfig, lanes: int = 16, brick: int = 16):
    """Yield the per-lane brick lists for every window, in window order.

    Brick k of a window (in the `window_bricks` order) goes to lane k mod
    ``lanes``; each lane's bricks keep the traversal order. When a window has
    fewer bricks than lanes the tail lanes receive none.
    """
    if lanes < 1:
        raise ConfigurationError(f"lane count must be at least 1, got {lanes}")
    layer.check_brick(brick)
    for wx in range(layer.ox):
        for wy in range(layer.oy):
            per_lane: list[list[tuple[int, int, int]]] = [[] for _ in range(lanes)]
            for k, coord in enumerate(window_bricks(layer, wx, wy, brick)):
                per_lane[k % lanes].append(coord)
            yield WindowAssignment(wx, wy, tuple(tuple(l) for l in per_lane))


def conv3d(acts_values, filter_values, stride: int = 1) -> np.ndarray:
    """Strided cross-correlation with 64-bit integer accumulation.

    Args:
        acts_values: (X, Y, I) integer array.
        filter_values: (F, Fx, Fy, I) integer array.
        stride: window step along x and y.

    Returns:
        (Ox, Oy, F) int64 array of untruncated sums.
    """
    a = np.asarray(acts_values, dtype=np.int64)
    w = np.asarray(filter_values, dtype=np.int64)
    fx, fy, depth = w.shape[1:]
    if a.shape[2] != depth:
        raise ConfigurationError(
            f"filter depth {depth} does not match input depth {a.shape[2]}"
        )
    wins = sliding_window_view(a, (fx, fy, depth))[::stride, ::stride, 0]
    return np.einsum("xyabc,fabc->xyf", wins, w)


def dense_conv(acts: ActTensor, filters: FilterSet, layer: LayerConfig) -> np.ndarray:
    """Reference convolution of the layer; output axes are (wx, wy, f)."""
    if acts.dims != (layer.x, layer.y, layer.i):
        raise ConfigurationError(
            f"activation dims {acts.dims} do not match layer "
            f"({layer.x}, {layer.y}, {layer.i})"
        )
    if (filters.count, filters.fx, filters.fy, filters.i) != (layer.f, layer.fx, layer.fy, layer.i):
        raise ConfigurationError(
            f"filter dims {filters.values.shape} do not match layer "
            f"({layer.f}, {layer.fx}, {layer.fy}, {layer.i})"
        )
    return conv3d(acts.values, filters.values, layer.stride)
