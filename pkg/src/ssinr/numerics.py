"""Dense matrix helpers, seeded randomness and the finite-difference oracle.

Matrices are plain 2-D numpy arrays. The dtype plays the role of the
precision tag: ``float32`` is single, ``float64`` is double.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractViolation, OracleFailure

PRECISIONS = {"single": np.float32, "double": np.float64}

FD_STEP = 1e-5


def dtype_for(precision):
    try:
        return PRECISIONS[precision]
    except KeyError:
        raise ContractViolation(f"unknown precision {precision!r}; expected one of {sorted(PRECISIONS)}")


def as_matrix(values, dtype=None):
    """Coerce to a C-contiguous 2-D array; 1-D input becomes a single row."""
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ContractViolation(f"expected a 2-D matrix, got array with shape {arr.shape}")
    return np.ascontiguousarray(arr)


def matmul(a, b):
    """Matrix product with shape and precision checks.

    Accumulation happens in the operands' own dtype; numpy dispatches to BLAS,
    which keeps a fixed summation order for a fixed thread count.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ContractViolation(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ContractViolation(f"matmul dimension mismatch: {a.shape[0]}x{a.shape[1]} @ {b.shape[0]}x{b.shape[1]}")
    if a.dtype != b.dtype:
        raise ContractViolation(f"matmul precision mismatch: {a.dtype} vs {b.dtype}")
    return a @ b


class Rng:
    """Seeded counter-based generator (Philox 4x64).

    ``split(*path)`` derives an independent child stream from the parent seed
    and an index path, so parallel jobs never share generator state.
    """

    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ContractViolation(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(key=seed))

    def split(self, *path):
        return Rng(derive_seed(self.seed, *path))

    def random(self, shape):
        return self._gen.random(shape, dtype=np.float64)

    def permutation(self, n):
        return self._gen.permutation(n)

    def __repr__(self):
        return f"Rng(seed={self.seed})"


def derive_seed(base_seed, *path):
    """Hash ``(base_seed, *path)`` into a fresh 64-bit seed."""
    entropy = [int(base_seed)] + [int(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def uniform_fill(rng, shape, lo, hi, dtype=np.float64):
    if lo > hi:
        raise ContractViolation(f"uniform_fill: lo={lo} exceeds hi={hi}")
    if isinstance(shape, int):
        shape = (shape,)
    u = rng.random(shape)
    if lo == hi:
        return np.full(shape, lo, dtype=dtype)
    out = (lo + (hi - lo) * u).astype(dtype)
    # rounding (including the cast) can land exactly on hi
    top = np.nextafter(dtype(hi), dtype(lo))
    return np.minimum(out, top)


def finite_diff_gradient(f, theta, h=FD_STEP):
    """Central-difference gradient of scalar ``f`` at ``theta`` (double precision)."""
    if not h > 0:
        raise ContractViolation(f"finite difference step must be positive, got {h}")
    theta = np.array(theta, dtype=np.float64).ravel()
    grad = np.empty_like(theta)
    for i in range(theta.size):
        orig = theta[i]
        theta[i] = orig + h
        fp = float(f(theta))
        theta[i] = orig - h
        fm = float(f(theta))
        theta[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise OracleFailure(f"non-finite function value while differentiating component {i}", index=i)
        grad[i] = (fp - fm) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-6):
    """Largest componentwise ``|a - n| / max(|a|, |n|, floor)``.

    The floor keeps components that are zero on both sides (dead ReLU units,
    untouched biases) from turning round-off into huge ratios.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    if a.shape != n.shape:
        raise ContractViolation(f"gradient length mismatch: {a.size} vs {n.size}")
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0
