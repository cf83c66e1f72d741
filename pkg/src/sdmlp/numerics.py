"""Dense float64 array helpers and the seeded random source.

Conventions used throughout the package:

* A "matrix" is a 2-D C-contiguous float64 ndarray, a "vector" is 1-D float64.
* Batches are stored column-wise: a single sample is a column, a batch of k
  samples is an (n, k) matrix.  This keeps the affine layer transform literally
  ``W @ x + b`` for single samples and batches alike.
* All randomness flows through :class:`SeededRng` so that every run is
  reproducible from a single 64-bit seed.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixing function (used for seed derivation)."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class SeededRng:
    """Deterministic random source: Philox 4x64 keyed by a 64-bit seed.

    Philox is a counter-based generator with a frozen, documented algorithm,
    so identical seeds give bit-identical streams on every platform and run.
    An instance is single-owner; subsystems and parallel code get their own
    independent generator via :meth:`split`, never by sharing one instance.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def split(self, stream: int) -> "SeededRng":
        """Derive an independent child generator.

        The child seed is ``splitmix64(seed XOR (stream+1)*golden)``: a pure
        function of (seed, stream), so splitting is unaffected by how many
        values the parent has already drawn.
        """
        child = _splitmix64(self.seed ^ (((int(stream) + 1) * _GOLDEN) & _MASK64))
        return SeededRng(child)

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        """n independent draws from the half-open interval [lo, hi)."""
        if not lo < hi:
            raise ValueError(f"uniform requires lo < hi, got lo={lo!r} hi={hi!r}")
        return self._gen.uniform(lo, hi, size=int(n))

    def random(self, shape) -> np.ndarray:
        """Uniform draws in [0, 1) with the given shape."""
        return self._gen.random(shape)

    def integers(self, lo: int, hi: int, shape, dtype=np.uint8) -> np.ndarray:
        """Integer draws in [lo, hi)."""
        return self._gen.integers(lo, hi, size=shape, dtype=dtype)

    def permutation(self, n: int) -> np.ndarray:
        """A random permutation of range(n)."""
        return self._gen.permutation(int(n))

    def __repr__(self):
        return f"SeededRng(seed={self.seed})"


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float64 array; a 1-D input becomes a single column."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    return m


def as_vector(a) -> np.ndarray:
    """Coerce to a 1-D float64 array."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D array, got shape {v.shape}")
    return v


def matmul(a, b) -> np.ndarray:
    """Standard matrix product with an explicit shape check."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def add_bias(m, b) -> np.ndarray:
    """Add a bias vector to every column of a matrix."""
    m = as_matrix(m)
    b = as_vector(b)
    if b.shape[0] != m.shape[0]:
        raise ValueError(
            f"bias length {b.shape[0]} does not match matrix rows {m.shape[0]}"
        )
    return m + b[:, None]
