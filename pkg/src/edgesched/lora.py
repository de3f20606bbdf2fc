"""Low-rank adapter algebra for square weight matrices.

An adapter holds a down-projection ``a`` (r x d) and an up-projection ``b``
(d x r); the update it encodes is ``lam * b @ a``, rank at most r. Fresh
adapters start as an exact no-op: ``b`` is zero and ``a`` is Gaussian, so
the encoded update is the zero matrix bit for bit.

All matrices are float64 ndarrays; ``validate_matrix`` enforces the
conventions where inputs cross the API boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


def validate_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Require a finite float64 2-D array; returns it C-contiguous."""
    if not isinstance(m, np.ndarray) or m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D ndarray")
    if m.dtype != np.float64:
        raise ValueError(f"{name} must be float64, got {m.dtype}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(m)


@dataclass(frozen=True)
class LoraAdapter:
    """Value object for one adapter; arrays are not copied, do not mutate."""

    a: np.ndarray  # (rank, dim)
    b: np.ndarray  # (dim, rank)
    lam: float
    rank: int

    def __post_init__(self):
        a = validate_matrix(self.a, "a")
        b = validate_matrix(self.b, "b")
        r, d = a.shape
        if r != self.rank:
            raise ValueError(f"a has {r} rows but rank is {self.rank}")
        if b.shape != (d, r):
            raise ValueError(f"b must be {(d, r)}, got {b.shape}")
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1: {self.rank}")
        if self.rank >= d:
            warnings.warn(
                f"rank {self.rank} is not smaller than dim {d}; "
                "the adapter saves no parameters",
                stacklevel=3,
            )

    @property
    def dim(self) -> int:
        return self.a.shape[1]

    def param_count(self) -> int:
        return self.a.size + self.b.size


def init_adapter(dim: int, rank: int, sigma: float, rng: np.random.Generator) -> LoraAdapter:
    """Fresh adapter: b = 0, a ~ N(0, sigma^2), lam = 1.

    The zero up-projection makes the initial encoded update exactly zero.
    ``sigma`` has no default on purpose; pick it per use.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1: {dim}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1: {rank}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative: {sigma}")
    a = rng.normal(0.0, sigma, size=(rank, dim)) if sigma > 0 else np.zeros((rank, dim))
    return LoraAdapter(a=np.asarray(a, dtype=np.float64), b=np.zeros((dim, rank)), lam=1.0, rank=rank)


def delta(adapter: LoraAdapter) -> np.ndarray:
    """The encoded update before scaling: b @ a, shape (dim, dim)."""
    return adapter.b @ adapter.a


def merge(w: np.ndarray, adapter: LoraAdapter) -> np.ndarray:
    """Fold the adapter into a base matrix: w + lam * (b @ a)."""
    w = validate_matrix(w, "w")
    d = adapter.dim
    if w.shape != (d, d):
        raise ValueError(f"w must be {(d, d)} to match the adapter, got {w.shape}")
    return w + adapter.lam * (adapter.b @ adapter.a)


def apply(w: np.ndarray, adapter: LoraAdapter, x: np.ndarray) -> np.ndarray:
    """Adapted forward product w @ x + lam * b @ (a @ x).

    Runs in the factored form; the dim x dim update is never materialized.
    Matches merge(w, adapter) @ x to tight relative tolerance.
    """
    w = validate_matrix(w, "w")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise ValueError(f"x must be a vector or matrix, got ndim {x.ndim}")
    if x.shape[0] != adapter.dim:
        raise ValueError(f"x has leading dim {x.shape[0]}, expected {adapter.dim}")
    return w @ x + adapter.lam * (adapter.b @ (adapter.a @ x))


def reg_term(adapter: LoraAdapter) -> float:
    """Squared Frobenius penalty on both factors: ||a||_F^2 + ||b||_F^2."""
    return float(np.sum(adapter.a * adapter.a) + np.sum(adapter.b * adapter.b))


def save_matrix(m: np.ndarray, path: str):
    """Text fixture format: 'rows cols' header, then one row per line with
    full-precision reprs. Round-trips exactly."""
    m = validate_matrix(m)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{m.shape[0]} {m.shape[1]}\n")
        for row in m:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_matrix(path: str) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"bad matrix header in {path}")
        rows, cols = int(header[0]), int(header[1])
        out = np.empty((rows, cols), dtype=np.float64)
        for i in range(rows):
            vals = fh.readline().split()
            if len(vals) != cols:
                raise ValueError(f"row {i} has {len(vals)} values, expected {cols}")
            out[i] = [float(v) for v in vals]
    return out
