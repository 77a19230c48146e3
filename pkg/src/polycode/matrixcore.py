"""Dense matrices over F_q: column partitioning and the exact product A^T B.

Storage is a numpy object array of Python ints, so every intermediate is
exact regardless of the modulus; numpy supplies the layout and the blocked
matmul, the modulus is applied after each bulk operation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInput,
    InvalidParameters,
    NonDivisiblePartition,
    ShapeMismatch,
)
from .field import FieldCtx


class FMatrix:
    """Immutable dense matrix with canonical entries in [0, q)."""

    __slots__ = ("data", "ctx")

    def __init__(self, data, ctx: FieldCtx, _canonical: bool = False):
        arr = np.asarray(data, dtype=object)
        if arr.ndim != 2:
            raise ShapeMismatch(f"expected a 2-D array, got ndim={arr.ndim}")
        if not _canonical:
            # Coerce to plain Python ints: fixed-width numpy scalars would
            # silently overflow in exact field arithmetic.
            flat = [int(v) % ctx.q for v in arr.reshape(-1)]
            arr = np.array(flat, dtype=object).reshape(arr.shape)
        arr.flags.writeable = False
        self.data = arr
        self.ctx = ctx

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, FMatrix)
            and self.ctx == other.ctx
            and self.data.shape == other.data.shape
            and bool((self.data == other.data).all())
        )

    def __repr__(self):
        return f"FMatrix({self.rows}x{self.cols}, q={self.ctx.q})"

    @classmethod
    def zeros(cls, rows: int, cols: int, ctx: FieldCtx) -> "FMatrix":
        return cls(np.zeros((rows, cols), dtype=object), ctx, _canonical=True)

    @classmethod
    def random(cls, rows: int, cols: int, ctx: FieldCtx, rng: np.random.Generator) -> "FMatrix":
        vals = rng.integers(0, ctx.q, size=(rows, cols), dtype=np.int64)
        return cls(vals.astype(object), ctx, _canonical=True)

    def digest(self) -> str:
        """Checksum of the canonical entries (hex), for run reports."""
        import hashlib

        h = hashlib.sha256()
        h.update(f"{self.rows} {self.cols} {self.ctx.q}\n".encode())
        h.update(" ".join(str(int(v)) for v in self.data.reshape(-1)).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class ProblemShape:
    """Dimensions and partitioning of one distributed multiplication task.

    A is s x r split into m column blocks, B is s x t split into n column
    blocks, computed by N workers.
    """

    s: int
    r: int
    t: int
    m: int
    n: int
    N: int
    allow_wide: bool = field(default=False, compare=False)

    def __post_init__(self):
        if min(self.s, self.r, self.t, self.m, self.n) < 1 or self.N < 1:
            raise InvalidParameters("all shape parameters must be positive")
        if self.r % self.m:
            raise NonDivisiblePartition(f"m={self.m} does not divide r={self.r}")
        if self.t % self.n:
            raise NonDivisiblePartition(f"n={self.n} does not divide t={self.t}")
        if self.s < self.r and self.s < self.t:
            if not self.allow_wide:
                raise InvalidParameters(
                    "both inputs are wide (s < r and s < t): the product is rank "
                    "deficient; pass allow_wide=True to proceed anyway"
                )
            warnings.warn("both input matrices are wide; output is rank deficient")

    @property
    def block_rows(self) -> int:
        return self.r // self.m

    @property
    def block_cols(self) -> int:
        return self.t // self.n


def split_cols(mat: FMatrix, parts: int) -> list:
    """Split into `parts` equal column blocks; concatenation restores the input."""
    if parts < 1 or mat.cols % parts:
        raise NonDivisiblePartition(f"{parts} does not divide {mat.cols} columns")
    w = mat.cols // parts
    return [
        FMatrix(mat.data[:, i * w : (i + 1) * w], mat.ctx, _canonical=True)
        for i in range(parts)
    ]


def hconcat(blocks: list) -> FMatrix:
    if not blocks:
        raise EmptyInput("nothing to concatenate")
    ctx = blocks[0].ctx
    return FMatrix(np.concatenate([b.data for b in blocks], axis=1), ctx, _canonical=True)


def vconcat(blocks: list) -> FMatrix:
    if not blocks:
        raise EmptyInput("nothing to concatenate")
    ctx = blocks[0].ctx
    return FMatrix(np.concatenate([b.data for b in blocks], axis=0), ctx, _canonical=True)


def transpose_mul(a: FMatrix, b: FMatrix) -> FMatrix:
    """Exact C = A^T B over F_q."""
    if a.ctx != b.ctx:
        raise ShapeMismatch("operands live in different fields")
    if a.rows != b.rows:
        raise ShapeMismatch(f"row counts differ: {a.rows} vs {b.rows}")
    prod = np.dot(a.data.T, b.data) % a.ctx.q
    return FMatrix(prod, a.ctx, _canonical=True)


def lincomb(blocks: list, coeffs: list) -> FMatrix:
    """Entrywise sum of coeffs[j] * blocks[j] over F_q."""
    if not blocks:
        raise EmptyInput("lincomb over an empty block list")
    if len(blocks) != len(coeffs):
        raise ShapeMismatch(f"{len(blocks)} blocks vs {len(coeffs)} coefficients")
    ctx = blocks[0].ctx
    shape = blocks[0].data.shape
    for b in blocks:
        if b.data.shape != shape or b.ctx != ctx:
            raise ShapeMismatch("lincomb blocks must share shape and field")
    acc = np.zeros(shape, dtype=object)
    for b, c in zip(blocks, coeffs):
        c = int(c) % ctx.q
        if c:
            acc = acc + b.data * c
    return FMatrix(acc % ctx.q, ctx, _canonical=True)


def assemble_blocks(grid: list) -> FMatrix:
    """Stitch a 2-D list of blocks (block row j, block col k) into one matrix."""
    return vconcat([hconcat(row) for row in grid])


def save_matrix(mat: FMatrix, path) -> None:
    """Plain text format: header `rows cols q`, then row-major integers."""
    with open(path, "w") as fh:
        fh.write(f"{mat.rows} {mat.cols} {mat.ctx.q}\n")
        for row in mat.data:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def load_matrix(path, ctx: FieldCtx = None) -> FMatrix:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 3:
        raise InvalidParameters(f"matrix file {path} is truncated")
    rows, cols, q = int(tokens[0]), int(tokens[1]), int(tokens[2])
    if ctx is None:
        ctx = FieldCtx(q)
    elif ctx.q != q:
        raise InvalidParameters(f"file modulus {q} differs from context {ctx.q}")
    vals = [int(t) for t in tokens[3:]]
    if len(vals) != rows * cols:
        raise InvalidParameters(f"expected {rows * cols} entries, found {len(vals)}")
    arr = np.array(vals, dtype=object).reshape(rows, cols)
    return FMatrix(arr, ctx)
