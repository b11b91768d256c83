"""Weight initialisation from the pinned generator."""

import math

from ..tensor_core import Rng, ShapeLike, Tensor, rand_uniform


def glorot_uniform(rng: Rng, shape: ShapeLike, fan_in: int, fan_out: int) -> Tensor:
    """Uniform in ±sqrt(6 / (fan_in + fan_out))."""
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rand_uniform(rng, shape, -limit, limit)
