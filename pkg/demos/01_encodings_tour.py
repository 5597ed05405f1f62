"""Tour of the four sparse storage formats on one small tensor.

Builds a 2x2x16 activation block with scattered zeros, encodes it every
way the library knows, and compares exact storage footprints against the
raw 16-bit layout.
"""

import numpy as np

from sparseaccel import (ActTensor, Format, ZERO, brick_at, encode_roe,
                         encode_store, encode_zfnaf, encode_viai,
                         footprint_bits, mask_to_string, offset_bits_for)

rng = np.random.default_rng(2024)
values = rng.integers(-40, 40, size=(2, 2, 16), dtype=np.int16)
values[rng.random(values.shape) < 0.55] = 0
acts = ActTensor(values)

print(f"tensor 2x2x16, {int((values == 0).sum())}/{values.size} zeros")
print()

# one brick up close: offsets name the effectual slots
brick = brick_at(acts, 0, 0, 0, brick=16)
print("brick (0,0,0):", brick.values.tolist())

zb = encode_zfnaf(brick)
print(f"zfnaf pairs (offset, value): {zb.pairs}")
print(f"  container: {zb.container_bits} bits "
      f"({zb.brick} slots x (16 + {offset_bits_for(zb.brick)}))")

rb = encode_roe(brick)
mode = "encoded" if rb.encoded else "raw"
print(f"roe: {mode}, {rb.bits_used()} of {rb.container_bits} container bits used")

vb = encode_viai(brick)
print(f"viai mask: {mask_to_string(vb.mask)} (1 = effectual, offset 0 leftmost)")
print()

# whole-tensor footprints; raw is X*Y*I*16 bits. The first three formats
# pay a fixed structural surcharge; cviai is content dependent and can
# land well below raw when most values are skippable.
raw = footprint_bits(Format.RAW, acts).total_bits
print(f"{'format':8} {'bits':>6} {'vs raw':>8}  delta vs raw")
for fmt in (Format.ZFNAF, Format.ROE, Format.VIAI, Format.CVIAI):
    rep = footprint_bits(fmt, acts)
    print(f"{fmt.value:8} {rep.total_bits:>6} {rep.total_bits / raw:>8.3f}  "
          f"({float(rep.overhead):+.4%})")
print(f"{'raw':8} {raw:>6} {1.0:>8.3f}")
print()

# every encoded format decodes back to the original values
for fmt in (Format.ZFNAF, Format.ROE, Format.VIAI, Format.CVIAI):
    store = encode_store(fmt, acts, ZERO, 16)
    assert np.array_equal(store.decode(), values), fmt
print("all four stores decode back to the original tensor")
