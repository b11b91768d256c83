"""
Deterministic numeric substrate.

Tensors are C-ordered float64 numpy arrays. Randomness comes exclusively
from Rng, a splitmix64 counter generator, so every experiment is
bit-reproducible across runs and platforms.

Rng algorithm (pinned):
    state_k = seed + k * 0x9E3779B97F4A7C15           (mod 2**64), k = 1, 2, ...
    z = state_k
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9          (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB          (mod 2**64)
    out_k = z ^ (z >> 31)
Uniform doubles use the top 53 bits: u = (out_k >> 11) * 2**-53, u in [0, 1).
"""

from typing import Callable, Sequence, Union

import numpy as np

from .errors import ParameterError, ShapeError

Tensor = np.ndarray
ShapeLike = Union[int, Sequence[int]]

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _normalize_shape(shape: ShapeLike) -> tuple:
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    shape = tuple(int(d) for d in shape)
    if any(d < 0 for d in shape):
        raise ShapeError(f"negative dimension in shape {shape}")
    return shape


class Rng:
    """
    Single-owner splitmix64 generator.

    Identical seeds produce identical streams; independent streams for
    separate concerns (initialisation, shuffling, dropout) come from spawn().
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) <= _MASK64:
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = int(seed)
        self._state = self.seed

    def next_u64(self, count: int) -> np.ndarray:
        """Return the next `count` raw 64-bit outputs."""
        if count < 0:
            raise ParameterError(f"count must be non-negative, got {count}")
        steps = np.arange(1, count + 1, dtype=np.uint64)
        counters = np.uint64(self._state) + steps * np.uint64(_GOLDEN_GAMMA)
        self._state = (self._state + count * _GOLDEN_GAMMA) & _MASK64
        return _mix64(counters)

    def random(self, shape: ShapeLike) -> Tensor:
        """Uniform doubles in [0, 1)."""
        shape = _normalize_shape(shape)
        raw = self.next_u64(int(np.prod(shape, dtype=np.int64)))
        return ((raw >> np.uint64(11)).astype(np.float64) * _INV_2_53).reshape(shape)

    def uniform(self, shape: ShapeLike, lo: float, hi: float) -> Tensor:
        """Uniform doubles in [lo, hi)."""
        if not lo < hi:
            raise ParameterError(f"uniform range requires lo < hi, got lo={lo}, hi={hi}")
        values = lo + (hi - lo) * self.random(shape)
        # rounding in lo + (hi-lo)*u can land on hi when the range is tiny
        return np.minimum(values, np.nextafter(hi, lo))

    def integers(self, low: int, high: int, shape: ShapeLike = ()) -> np.ndarray:
        """Integers in [low, high) by scaling uniform doubles."""
        if not low < high:
            raise ParameterError(f"integer range requires low < high, got [{low}, {high})")
        draws = self.random(shape)
        return np.minimum(low + np.floor(draws * (high - low)).astype(np.int64), high - 1)

    def permutation(self, n: int) -> np.ndarray:
        """Permutation of range(n), ordered by stable sort of random keys."""
        return np.argsort(self.next_u64(n), kind="stable")

    def spawn(self, stream: int) -> "Rng":
        """Independent child generator keyed by (seed, stream)."""
        key = _mix64(np.array([(self.seed ^ (int(stream) * _MIX2)) & _MASK64], dtype=np.uint64))
        return Rng(int(key[0]))


def as_tensor(data, shape: Union[ShapeLike, None] = None) -> Tensor:
    """
    Build a float64 C-ordered tensor from nested sequences or a flat buffer.

    Args:
        data: Array-like values; with `shape`, a flat row-major buffer
        shape: Optional target shape; product must equal the buffer length
    """
    array = np.array(data, dtype=np.float64, order="C")
    if shape is not None:
        shape = _normalize_shape(shape)
        if array.size != int(np.prod(shape, dtype=np.int64)):
            raise ShapeError.mismatch("buffer length does not match shape", array.shape, shape)
        array = array.reshape(shape)
    return array


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an m×k and a k×n tensor."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError.mismatch("matmul dimension mismatch", a.shape, b.shape)
    return np.ascontiguousarray(a @ b)


def transpose(a: Tensor) -> Tensor:
    """Transpose of a 2-D tensor as a new C-ordered array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError.mismatch("transpose needs a matrix", a.shape)
    return np.ascontiguousarray(a.T)


def elementwise(a: Tensor, f: Callable[[float], float]) -> Tensor:
    """Apply a scalar function to every element; numpy ufuncs run vectorised."""
    a = np.asarray(a, dtype=np.float64)
    if isinstance(f, np.ufunc):
        return np.asarray(f(a), dtype=np.float64)
    return np.vectorize(f, otypes=[np.float64])(a).reshape(a.shape)


def rand_uniform(rng: Rng, shape: ShapeLike, lo: float, hi: float) -> Tensor:
    """Tensor of uniform samples in [lo, hi) drawn from `rng`."""
    return rng.uniform(shape, lo, hi)
