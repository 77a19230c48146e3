"""Distributed convolution via the (1,1)-polynomial variant.

Vectors are numpy object arrays of canonical ints in [0, q). Each worker
stores one combined block of each input, convolves them locally, and the
master interpolates the m+n-1 coefficient vectors and reassembles the output
by overlap-add.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicateEvaluationPoint,
    EmptyInput,
    InvalidParameters,
    NonDivisiblePartition,
    NotEnoughResults,
    TooManyWorkersForField,
)
from .field import FieldCtx, lagrange_weight_matrix


def as_vector(values, ctx: FieldCtx):
    arr = np.asarray(values, dtype=object).reshape(-1)
    # Plain Python ints only: fixed-width numpy scalars would overflow.
    return np.array([int(v) % ctx.q for v in arr], dtype=object)


def split_vector(vec, parts: int, ctx: FieldCtx) -> list:
    """Split into `parts` equal-length contiguous blocks."""
    vec = as_vector(vec, ctx)
    if parts < 1 or len(vec) % parts:
        raise NonDivisiblePartition(f"{parts} does not divide vector length {len(vec)}")
    s = len(vec) // parts
    return [vec[i * s : (i + 1) * s] for i in range(parts)]


def conv_direct(a, b, ctx: FieldCtx):
    """Full linear convolution over F_q, length |a| + |b| - 1."""
    a = as_vector(a, ctx)
    b = as_vector(b, ctx)
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("convolution of an empty vector")
    out = np.zeros(len(a) + len(b) - 1, dtype=object)
    for i, av in enumerate(a):
        if av:
            out[i : i + len(b)] += av * b
    return np.mod(out, ctx.q)


@dataclass(frozen=True)
class ConvShare:
    """Combined input blocks stored at one worker."""

    worker_id: int
    x: int
    a_tilde: object
    b_tilde: object


@dataclass(frozen=True)
class ConvResult:
    worker_id: int
    x: int
    value: object  # local convolution, length 2s - 1


def conv_encode(a_blocks: list, b_blocks: list, big_n: int, ctx: FieldCtx, points: list = None) -> list:
    """Worker i stores sum_j a_j x_i^j and sum_j b_j x_i^j (the (1,1) design)."""
    if not a_blocks or not b_blocks:
        raise EmptyInput("need at least one block of each input")
    s = len(a_blocks[0])
    for blk in list(a_blocks) + list(b_blocks):
        if len(blk) != s:
            raise InvalidParameters("all blocks must share the same length")
    if big_n > ctx.q:
        raise TooManyWorkersForField(f"N={big_n} exceeds field size q={ctx.q}")
    pts = points if points is not None else list(range(big_n))
    if len(pts) != big_n:
        raise InvalidParameters(f"{len(pts)} points for N={big_n} workers")
    pts = [p % ctx.q for p in pts]
    if len(set(pts)) != big_n:
        raise DuplicateEvaluationPoint("evaluation points must be distinct")
    a_blocks = [as_vector(blk, ctx) for blk in a_blocks]
    b_blocks = [as_vector(blk, ctx) for blk in b_blocks]
    shares = []
    for i, x in enumerate(pts):
        a_t = np.zeros(s, dtype=object)
        b_t = np.zeros(s, dtype=object)
        for j, blk in enumerate(a_blocks):
            a_t += blk * ctx.pow(x, j)
        for j, blk in enumerate(b_blocks):
            b_t += blk * ctx.pow(x, j)
        shares.append(ConvShare(i, x, np.mod(a_t, ctx.q), np.mod(b_t, ctx.q)))
    return shares


def conv_worker_compute(share: ConvShare, ctx: FieldCtx) -> ConvResult:
    return ConvResult(share.worker_id, share.x, conv_direct(share.a_tilde, share.b_tilde, ctx))


def conv_decode(results: list, m: int, n: int, ctx: FieldCtx):
    """Recover c = a * b from any m+n-1 worker results.

    Positionwise interpolation of the degree m+n-2 polynomial yields the
    m+n-1 coefficient vectors (each a sum of cross-term convolutions), which
    overlap-add into the output: coefficient slot d contributes to positions
    d*s .. d*s + 2s - 2.
    """
    need = m + n - 1
    ordered = sorted(results, key=lambda r: r.worker_id)
    seen = set()
    picked = []
    for r in ordered:
        if r.worker_id in seen:
            continue
        seen.add(r.worker_id)
        picked.append(r)
        if len(picked) == need:
            break
    if len(picked) < need:
        raise NotEnoughResults(f"need {need} distinct results, got {len(picked)}")
    xs = [r.x % ctx.q for r in picked]
    if len(set(xs)) != need:
        raise DuplicateEvaluationPoint("duplicate evaluation points among results")
    vlen = len(picked[0].value)
    if vlen % 2 != 1:
        raise InvalidParameters("worker results must have odd length 2s-1")
    s = (vlen + 1) // 2
    for r in picked:
        if len(r.value) != vlen:
            raise InvalidParameters("worker results must share one length")
    weights = lagrange_weight_matrix(xs, ctx)
    out = np.zeros(s * (m + n) - 1, dtype=object)
    for d in range(need):
        coeff_vec = np.zeros(vlen, dtype=object)
        for w, r in zip(weights[d], picked):
            if w:
                coeff_vec += w * np.asarray(r.value, dtype=object)
        out[d * s : d * s + vlen] += coeff_vec
    return np.mod(out, ctx.q)


def save_vector(vec, path, ctx: FieldCtx) -> None:
    """Plain text format: header `len q`, then the integers."""
    vec = as_vector(vec, ctx)
    with open(path, "w") as fh:
        fh.write(f"{len(vec)} {ctx.q}\n")
        fh.write(" ".join(str(int(v)) for v in vec) + "\n")


def load_vector(path, ctx: FieldCtx = None):
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise InvalidParameters(f"vector file {path} is truncated")
    length, q = int(tokens[0]), int(tokens[1])
    if ctx is None:
        ctx = FieldCtx(q)
    elif ctx.q != q:
        raise InvalidParameters(f"file modulus {q} differs from context {ctx.q}")
    vals = [int(t) for t in tokens[2:]]
    if len(vals) != length:
        raise InvalidParameters(f"expected {length} entries, found {len(vals)}")
    return as_vector(vals, ctx), ctx


def pad_to_multiple(vec, parts: int, ctx: FieldCtx):
    """Zero-pad so that `parts` divides the length (CLI convenience)."""
    vec = as_vector(vec, ctx)
    rem = len(vec) % parts
    if rem:
        vec = np.concatenate([vec, np.zeros(parts - rem, dtype=object)])
    return vec


def conv_thresholds(m: int, n: int, big_n: int) -> dict:
    """Recovery-threshold comparison for one (m, n, N) convolution task."""
    if min(m, n, big_n) < 1:
        raise InvalidParameters("m, n, N must be positive")
    out = {
        "conv_poly": m + n - 1,
        "via_matmul": m * n,
        "lower_bound": max(m, n),
    }
    if big_n % n == 0 and big_n // n >= m:
        out["coded_conv_baseline"] = big_n - big_n // n + m
    # Factor-2 guarantee: the lower bound always exceeds half the achieved threshold.
    assert out["lower_bound"] > out["conv_poly"] / 2
    return out
