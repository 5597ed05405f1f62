"""Ineffectual-value criteria and the mask algebra behind skip decisions.

Masks are boolean numpy arrays indexed by offset within a brick. Activation
masks use True = effectual (worth computing). Weight ineffectuality vectors
use the opposite polarity, True = ineffectual, because the skip predicate
consumes them directly: a position can be skipped when every resident
filter's weight there is ineffectual or the activation itself is.

When a mask is rendered as a string, offset 0 is the leftmost character.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_KINDS = ("zero", "abs", "pow2")


@dataclass(frozen=True)
class IneffCriterion:
    """Classifier for values whose products contribute nothing useful.

    kind "zero":  value == 0.
    kind "abs":   |value| <= param. param = 0 behaves exactly like "zero".
    kind "pow2":  |value| < 2**param. param = 0 leaves only 0 ineffectual.

    Every kind classifies 0 as ineffectual, which the codecs rely on.
    """

    kind: str = "zero"
    param: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown criterion kind {self.kind!r}, expected one of {_KINDS}")
        if not isinstance(self.param, (int, np.integer)):
            raise ValidationError(f"criterion parameter must be an int, got {self.param!r}")
        if self.kind == "zero" and self.param != 0:
            raise ValidationError("the zero criterion takes no parameter")
        if self.kind == "abs" and not 0 <= self.param < (1 << 16):
            raise ValidationError(f"abs threshold {self.param} outside [0, 65535]")
        if self.kind == "pow2" and not 0 <= self.param <= 16:
            raise ValidationError(f"pow2 exponent {self.param} outside [0, 16]")

    def ineffectual(self, values) -> np.ndarray:
        """Boolean array, True where a value's products may be dropped."""
        mag = np.abs(np.asarray(values, dtype=np.int64))
        if self.kind == "pow2":
            return mag < (1 << self.param)
        return mag <= (self.param if self.kind == "abs" else 0)

    def effectual(self, values) -> np.ndarray:
        return ~self.ineffectual(values)

    @classmethod
    def zero(cls) -> "IneffCriterion":
        return cls("zero")

    @classmethod
    def abs_threshold(cls, t: int) -> "IneffCriterion":
        return cls("abs", t)

    @classmethod
    def power_of_two(cls, k: int) -> "IneffCriterion":
        return cls("pow2", k)

    @classmethod
    def parse(cls, text: str) -> "IneffCriterion":
        """Parse "zero", "abs:T", or "pow2:K"."""
        parts = text.strip().lower().split(":")
        kind = parts[0]
        if kind == "zero" and len(parts) == 1:
            return cls("zero")
        if kind in ("abs", "pow2") and len(parts) == 2:
            try:
                param = int(parts[1])
            except ValueError:
                raise ValidationError(f"criterion parameter {parts[1]!r} is not an int") from None
            return cls(kind, param)
        raise ValidationError(f"cannot parse criterion {text!r}; expected zero, abs:T, or pow2:K")

    def spec(self) -> str:
        """Inverse of `parse`."""
        return self.kind if self.kind == "zero" else f"{self.kind}:{self.param}"


ZERO = IneffCriterion()


def _brick_values(brick) -> np.ndarray:
    return np.asarray(getattr(brick, "values", brick))


def effectual_mask(brick, crit: IneffCriterion = ZERO) -> np.ndarray:
    """Per-offset effectuality bits for one brick (True = effectual)."""
    return crit.effectual(_brick_values(brick))


def is_vector(weight_brick, crit: IneffCriterion = ZERO) -> np.ndarray:
    """Weight ineffectuality bits (True = ineffectual), the complement polarity."""
    return crit.ineffectual(_brick_values(weight_brick))


def is_product(group) -> np.ndarray:
    """AND together a group of weight ineffectuality vectors.

    Bit j of the result is True only when every vector in the group marks
    offset j ineffectual; a single filter with an effectual weight anywhere
    clears that offset for the whole group.
    """
    arr = np.asarray([np.asarray(v, dtype=bool) for v in group], dtype=bool)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValidationError("is_product needs a non-empty group of equal-length vectors")
    return arr.all(axis=0)


def can_skip(mask: np.ndarray, prod: np.ndarray) -> np.ndarray:
    """Combined skip bits: True where the weight product is dead or the activation is.

    ``mask`` is an activation effectuality mask (True = effectual) and
    ``prod`` an `is_product` result (True = all weights ineffectual).
    """
    mask = np.asarray(mask, dtype=bool)
    prod = np.asarray(prod, dtype=bool)
    if mask.shape != prod.shape:
        raise ValidationError(f"mask shape {mask.shape} != product shape {prod.shape}")
    return prod | ~mask


def mask_to_string(mask) -> str:
    """Render a mask with offset 0 leftmost, e.g. array([T,T,F,T]) -> '1101'."""
    return "".join("1" if b else "0" for b in np.asarray(mask, dtype=bool))


def mask_from_string(text: str) -> np.ndarray:
    if not text or any(c not in "01" for c in text):
        raise ValidationError(f"mask string must be non-empty 0/1 characters, got {text!r}")
    return np.array([c == "1" for c in text], dtype=bool)
