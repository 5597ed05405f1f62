"""Cycle and MAC accounting for the three architectures.

Timing counts front-end multiply steps only: one multiply per lane per
cycle, idealized memory (no fetch or pipeline stalls). The baseline machine
processes every position of every window. The cnv machine skips activations
the criterion classifies ineffectual. The cnv2 machine additionally skips
positions whose weights are ineffectual in every filter of the resident
group, so its per-brick work is the count of offsets that survive both
tests.

Filters beyond one pass's residency (tiles * filters_per_tile) are handled
in sequential passes that repeat the activation traversal. Functional
outputs are exact integer convolutions over the surviving products and are
returned untruncated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dispatch import EmptyBrickCost, SyncPolicy
from .encodings import Format, FootprintReport, footprint_bits
from .errors import ConfigurationError
from .sparsity import ZERO, IneffCriterion
from .tensor import ActTensor, FilterSet, LayerConfig, conv3d, dense_conv


class GroupScope(enum.Enum):
    """Which filters a weight-product skip must cover.

    PASS_WIDE: every filter resident in the pass (tiles * filters_per_tile),
    the configuration where a skip requires all resident weights dead.
    PER_TILE: only the filters_per_tile filters of one tile; each tile gets
    its own stream, lanes wait for the slowest tile.
    """

    PASS_WIDE = "pass"
    PER_TILE = "tile"


@dataclass(frozen=True)
class TileConfig:
    """Machine shape: tile count, filters per tile, lanes, brick size."""

    tiles: int = 16
    filters_per_tile: int = 16
    lanes: int = 16
    brick: int = 16
    nbin_depth: int = 64
    sync: SyncPolicy = SyncPolicy.BRICKSET_LOCKSTEP
    empty_brick: EmptyBrickCost = EmptyBrickCost.ZERO_CYCLES
    group_scope: GroupScope = GroupScope.PASS_WIDE

    def __post_init__(self):
        for name in ("tiles", "filters_per_tile", "lanes", "brick", "nbin_depth"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigurationError(f"tile field {name} must be a positive int, got {v!r}")

    @property
    def resident(self) -> int:
        """Filters processed concurrently in one pass."""
        return self.tiles * self.filters_per_tile


@dataclass
class CycleReport:
    """Flat per-architecture counters; `to_record` uses stable field names."""

    arch: str
    cycles: int
    macs_performed: int
    macs_skipped: int
    broadcasts: int
    footprint_bits: int
    utilization: float
    per_lane_busy: tuple[int, ...] = field(default_factory=tuple)

    CSV_COLUMNS = ("arch", "cycles", "macs_performed", "macs_skipped",
                   "broadcasts", "footprint_bits", "utilization")

    def to_record(self) -> dict:
        return {
            "arch": self.arch,
            "cycles": self.cycles,
            "macs_performed": self.macs_performed,
            "macs_skipped": self.macs_skipped,
            "broadcasts": self.broadcasts,
            "footprint_bits": self.footprint_bits,
            "utilization": self.utilization,
        }

    def to_csv_row(self) -> list[str]:
        rec = self.to_record()
        return [str(rec[c]) for c in self.CSV_COLUMNS]


def _validate(acts: ActTensor, filters: FilterSet, layer: LayerConfig, tile: TileConfig) -> None:
    if acts.dims != (layer.x, layer.y, layer.i):
        raise ConfigurationError(
            f"activation dims {acts.dims} do not match layer ({layer.x}, {layer.y}, {layer.i})"
        )
    shape = (filters.count, filters.fx, filters.fy, filters.i)
    if shape != (layer.f, layer.fx, layer.fy, layer.i):
        raise ConfigurationError(
            f"filter dims {shape} do not match layer "
            f"({layer.f}, {layer.fx}, {layer.fy}, {layer.i})"
        )
    layer.check_brick(tile.brick)


def _pass_ranges(f: int, resident: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + resident, f)) for lo in range(0, f, resident)]


def _window_costs(per_brick: np.ndarray, layer: LayerConfig, brick: int) -> np.ndarray:
    """Gather per-brick counts into (ox, oy, bricks_per_window) window views."""
    fx, fy, nb = layer.fx, layer.fy, per_brick.shape[2]
    wins = sliding_window_view(per_brick, (fx, fy, nb))[::layer.stride, ::layer.stride, 0]
    return wins.reshape(layer.ox, layer.oy, fx * fy * nb)


def _reduce_cycles(costs: np.ndarray, lanes: int, sync: SyncPolicy,
                   one_cycle_drain: bool) -> int:
    """Window cycle totals from per-brick costs under one sync policy."""
    ox, oy, w = costs.shape
    eff = np.maximum(costs, 1) if one_cycle_drain else costs
    n_sets = -(-w // lanes)
    padded = np.zeros((ox, oy, n_sets * lanes), dtype=np.int64)
    padded[:, :, :w] = eff
    grid = padded.reshape(ox, oy, n_sets, lanes)
    if sync is SyncPolicy.BRICKSET_LOCKSTEP:
        per_window = grid.max(axis=3).sum(axis=2)
    else:
        per_window = grid.sum(axis=2).max(axis=2)
    return int(per_window.sum())


def _lane_busy(counts: np.ndarray, lanes: int) -> np.ndarray:
    """Non-idle cycles per lane: brick k of a window belongs to lane k mod lanes."""
    w = counts.shape[2]
    per_position = counts.reshape(-1, w).sum(axis=0, dtype=np.int64)
    return np.bincount(np.arange(w) % lanes, weights=per_position,
                       minlength=lanes).astype(np.int64)


def _utilization(busy_total: int, lanes: int, cycles: int) -> float:
    return busy_total / (lanes * cycles) if cycles else 0.0


def encode_outputs(output, fmt: Format, crit: IneffCriterion = ZERO,
                   brick: int = 16) -> FootprintReport:
    """Footprint of the produced output tensor in the chosen storage format.

    Output depth is the filter axis; it is padded to a brick multiple for
    container accounting. Value fields count at the formats' 16-bit width
    even though the in-memory outputs are untruncated sums.
    """
    return footprint_bits(fmt, output, crit, brick)


def run_baseline(acts: ActTensor, filters: FilterSet, layer: LayerConfig,
                 tile: TileConfig, *, out_format: Format = Format.ZFNAF
                 ) -> tuple[np.ndarray, CycleReport]:
    """Dense machine: every position of every window is multiplied.

    Cycles are passes * windows * ceil(window_positions / lanes); the lanes
    share each window's positions round robin.
    """
    _validate(acts, filters, layer, tile)
    out = dense_conv(acts, filters, layer)

    k = layer.window_positions
    n_windows = layer.ox * layer.oy
    n_passes = len(_pass_ranges(layer.f, tile.resident))
    cycles = n_passes * n_windows * (-(-k // tile.lanes))
    total_macs = n_windows * k * layer.f

    busy = np.full(tile.lanes, k // tile.lanes, dtype=np.int64)
    busy[: k % tile.lanes] += 1
    busy *= n_windows * n_passes

    report = CycleReport(
        arch="baseline",
        cycles=cycles,
        macs_performed=total_macs,
        macs_skipped=0,
        broadcasts=n_passes * n_windows * k,
        footprint_bits=encode_outputs(out, out_format, ZERO, tile.brick).total_bits,
        utilization=_utilization(int(busy.sum()), tile.lanes, cycles),
        per_lane_busy=tuple(int(v) for v in busy),
    )
    return out, report


def run_cnv(acts: ActTensor, filters: FilterSet, layer: LayerConfig,
            tile: TileConfig, act_crit: IneffCriterion = ZERO, *,
            out_format: Format = Format.ZFNAF) -> tuple[np.ndarray, CycleReport]:
    """Activation-skipping machine.

    Each lane spends one cycle per effectual activation of its brick; the
    sync policy decides how lane imbalance turns into stalls. Ineffectual
    activations are zeroed before the functional convolution, which changes
    nothing under the zero criterion.
    """
    _validate(acts, filters, layer, tile)
    eff = act_crit.effectual(acts.values)
    eff_acts = np.where(eff, acts.values, 0).astype(np.int16)
    out = conv3d(eff_acts, filters.values, layer.stride)

    nb = layer.i // tile.brick
    counts = eff.reshape(layer.x, layer.y, nb, tile.brick).sum(axis=3, dtype=np.int64)
    costs = _window_costs(counts, layer, tile.brick)
    pass_cycles = _reduce_cycles(costs, tile.lanes, tile.sync,
                                 tile.empty_brick is EmptyBrickCost.ONE_CYCLE)

    n_passes = len(_pass_ranges(layer.f, tile.resident))
    cycles = n_passes * pass_cycles
    eff_positions = int(costs.sum())
    performed = eff_positions * layer.f
    total_macs = layer.ox * layer.oy * layer.window_positions * layer.f
    busy = _lane_busy(costs, tile.lanes) * n_passes

    report = CycleReport(
        arch="cnv",
        cycles=cycles,
        macs_performed=performed,
        macs_skipped=total_macs - performed,
        broadcasts=n_passes * eff_positions,
        footprint_bits=encode_outputs(out, out_format, act_crit, tile.brick).total_bits,
        utilization=_utilization(int(busy.sum()), tile.lanes, cycles),
        per_lane_busy=tuple(int(v) for v in busy),
    )
    return out, report


def weight_product_table(filters: FilterSet, weight_crit: IneffCriterion,
                         brick: int, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Per-offset AND of weight ineffectuality over filters [lo, hi).

    Returns a (fx, fy, depth_bricks, brick) boolean array; True marks an
    offset every covered filter agrees is dead. Suitable as the dispatcher's
    product table.
    """
    hi = filters.count if hi is None else hi
    if not 0 <= lo < hi <= filters.count:
        raise ConfigurationError(f"filter range [{lo}, {hi}) invalid for {filters.count} filters")
    if filters.i % brick != 0:
        raise ConfigurationError(f"filter depth {filters.i} not a multiple of brick {brick}")
    ineff = weight_crit.ineffectual(filters.values[lo:hi])
    nb = filters.i // brick
    return ineff.reshape(hi - lo, filters.fx, filters.fy, nb, brick).all(axis=0)


def run_cnv2(acts: ActTensor, filters: FilterSet, layer: LayerConfig,
             tile: TileConfig, act_crit: IneffCriterion = ZERO,
             weight_crit: IneffCriterion = ZERO, *,
             out_format: Format = Format.ZFNAF) -> tuple[np.ndarray, CycleReport]:
    """Activation- and weight-skipping machine.

    A position is skipped when the activation is ineffectual or when every
    filter in the group (pass-wide by default, per tile otherwise) has an
    ineffectual weight there. Skipped products are removed from the
    functional output as well, which is a no-op under zero criteria because
    the removed products are zero.
    """
    _validate(acts, filters, layer, tile)
    if weight_crit is None:
        raise ConfigurationError("cnv2 requires a weight criterion")
    eff = act_crit.effectual(acts.values)
    eff_acts = np.where(eff, acts.values, 0).astype(np.int16)

    b = tile.brick
    nb = layer.i // b
    eff_bits = eff.reshape(layer.x, layer.y, nb, b)
    eff_windows = sliding_window_view(
        eff_bits, (layer.fx, layer.fy, nb, b)
    )[::layer.stride, ::layer.stride, 0, 0]  # (ox, oy, fx, fy, nb, b)

    out = np.zeros((layer.ox, layer.oy, layer.f), dtype=np.int64)
    cycles = 0
    performed = 0
    broadcasts = 0
    busy = np.zeros(tile.lanes, dtype=np.int64)
    one_cycle = tile.empty_brick is EmptyBrickCost.ONE_CYCLE
    w_shape = (layer.fx, layer.fy, layer.i)

    for lo, hi in _pass_ranges(layer.f, tile.resident):
        if tile.group_scope is GroupScope.PASS_WIDE:
            groups = [(lo, hi)]
        else:
            groups = [(g, min(g + tile.filters_per_tile, hi))
                      for g in range(lo, hi, tile.filters_per_tile)]
        group_costs = []
        for glo, ghi in groups:
            prod = weight_product_table(filters, weight_crit, b, glo, ghi)
            keep = eff_windows & ~prod
            counts = keep.sum(axis=-1, dtype=np.int64).reshape(
                layer.ox, layer.oy, layer.fx * layer.fy * nb)
            group_costs.append(counts)
            sent = int(counts.sum())
            broadcasts += sent
            performed += sent * (ghi - glo)
            masked = np.where(prod.reshape(w_shape), 0, filters.values[glo:ghi])
            out[:, :, glo:ghi] = conv3d(eff_acts, masked, layer.stride)
        pass_costs = np.max(np.stack(group_costs), axis=0)
        busy += _lane_busy(pass_costs, tile.lanes)
        cycles += _reduce_cycles(pass_costs, tile.lanes, tile.sync, one_cycle)

    total_macs = layer.ox * layer.oy * layer.window_positions * layer.f
    report = CycleReport(
        arch="cnv2",
        cycles=cycles,
        macs_performed=performed,
        macs_skipped=total_macs - performed,
        broadcasts=broadcasts,
        footprint_bits=encode_outputs(out, out_format, act_crit, tile.brick).total_bits,
        utilization=_utilization(int(busy.sum()), tile.lanes, cycles),
        per_lane_busy=tuple(int(v) for v in busy),
    )
    return out, report


ARCH_RUNNERS = {
    "baseline": run_baseline,
    "cnv": run_cnv,
    "cnv2": run_cnv2,
}


def run_arch(arch: str, acts: ActTensor, filters: FilterSet, layer: LayerConfig,
             tile: TileConfig, act_crit: IneffCriterion = ZERO,
             weight_crit: IneffCriterion = ZERO, *,
             out_format: Format = Format.ZFNAF) -> tuple[np.ndarray, CycleReport]:
    """Dispatch to one architecture runner by name."""
    if arch == "baseline":
        return run_baseline(acts, filters, layer, tile, out_format=out_format)
    if arch == "cnv":
        return run_cnv(acts, filters, layer, tile, act_crit, out_format=out_format)
    if arch == "cnv2":
        return run_cnv2(acts, filters, layer, tile, act_crit, weight_crit,
                        out_format=out_format)
    raise ConfigurationError(f"unknown architecture {arch!r}")
