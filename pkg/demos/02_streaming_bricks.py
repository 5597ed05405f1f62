"""Watch the dispatcher stream one window, lane by lane.

A lane holding a brick sends (offset, value) pairs for the effectual
slots only, then goes idle until the slowest lane of the brick set is
done. The trace below is the cycle-by-cycle record of that.
"""

import numpy as np

from sparseaccel import (ActTensor, FilterSet, LayerConfig, RawDispatchSource,
                         TileConfig, ZERO, format_trace, run_dispatch,
                         run_cnv, stream_brick)
from sparseaccel.tensor import Brick

# the classic single brick: two effectual values out of four slots
demo = Brick(0, 0, 0, np.array([1, 0, 0, 4], dtype=np.int16))
print("brick", demo.values.tolist(), "streams as",
      [(int(o), int(v)) for o, v in stream_brick(demo, ZERO)])
print()

# a 1x1x64 layer is one window of four bricks across four lanes
rng = np.random.default_rng(99)
values = rng.integers(-9, 9, size=(1, 1, 64), dtype=np.int16)
values[rng.random(values.shape) < 0.5] = 0
acts = ActTensor(values)
layer = LayerConfig(x=1, y=1, i=64, fx=1, fy=1, f=4)

source = RawDispatchSource(acts, ZERO, brick=16)
run = run_dispatch(source, layer, lanes=4)

print(f"window of 4 bricks over 4 lanes: {run.cycles} cycles, "
      f"{run.broadcasts} broadcasts")
for lane in range(4):
    sent = run.lane_stream(lane)
    print(f"  lane {lane}: {len(sent)} values {sent}")
print()
print("trace (cycle, lane, offset, value):")
print(format_trace(run.events[:12]))
print("  ...")

# the arithmetic model agrees with the walked trace
filters = FilterSet(np.ones((4, 1, 1, 64), dtype=np.int16))
tile = TileConfig(tiles=1, filters_per_tile=4, lanes=4, brick=16)
_, report = run_cnv(acts, filters, layer, tile)
assert report.cycles == run.cycles, (report.cycles, run.cycles)
print(f"\ncycle model agrees: {report.cycles} cycles both ways")
