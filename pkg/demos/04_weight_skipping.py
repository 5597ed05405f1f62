"""How a dead weight offset buys a cycle that activation skipping cannot.

Loads the bundled fixture: one 16-deep input, two filters that both have
a zero weight at depth 13. Activation skipping alone still pays for the
nonzero activation at 13; weight-aware skipping drops it.
"""

from pathlib import Path

import numpy as np

from sparseaccel import (TileConfig, ZERO, brick_at, can_skip, is_product,
                         is_vector, load_layer, mask_to_string, run_arch,
                         weight_product_table)
from sparseaccel.tensor import Brick

fixture = Path(__file__).resolve().parent.parent / "fixtures" / "weight_skip_demo.json"
data = load_layer(fixture)
layer = data.layer_config()
tile = TileConfig(tiles=1, filters_per_tile=2, lanes=4, brick=4)

acts = data.acts.values[0, 0]
print("activations:", acts.tolist())
for f in range(2):
    print(f"filter {f}:   ", data.filters.values[f, 0, 0].tolist())
print()

# per-filter ineffectual-weight vectors agree only at offset 13
vecs = [is_vector(Brick(0, 0, 0, data.filters.values[f, 0, 0]), ZERO)
        for f in range(2)]
prod = is_product(vecs)
for f, v in enumerate(vecs):
    print(f"filter {f} dead offsets: {np.flatnonzero(v).tolist()}")
print(f"dead everywhere:       {np.flatnonzero(prod).tolist()}")
print()

# within brick 3 (depths 12..15) the skip mask folds both causes together
table = weight_product_table(data.filters, ZERO, brick=4)
b3 = brick_at(data.acts, 0, 0, 3, brick=4)
mask = ZERO.effectual(b3.values)
skip = can_skip(mask, table[0, 0, 3])
print(f"brick 3 values {b3.values.tolist()}")
print(f"  effectual activations: {mask_to_string(mask)}")
print(f"  skippable positions:   {mask_to_string(skip)} "
      "(zero activations or all-dead weights)")
print()

outs = {}
for arch in ("baseline", "cnv", "cnv2"):
    out, rep = run_arch(arch, data.acts, data.filters, layer, tile)
    outs[arch] = out
    print(f"{arch:8} {rep.cycles} cycles, {rep.macs_performed:>3} multiplies kept")

assert all(np.array_equal(outs["baseline"], o) for o in outs.values())
print("\nsame outputs from all three, one brick set, three different bills")
