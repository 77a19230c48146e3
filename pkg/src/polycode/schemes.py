"""The four computation strategies behind one contract.

Each scheme exposes encode / decodable / decode / threshold. Encoding yields
one WorkerShare per logical worker; each worker computes the block product of
its two stored matrices; the master decodes once the responded set satisfies
the scheme's decodability predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .errors import (
    DuplicateEvaluationPoint,
    InvalidCodeParams,
    InvalidParameters,
    NonDivisibleGroups,
    InvalidGrid,
    NotDecodable,
    NotEnoughResults,
    TooManyWorkersForField,
)
from .field import FieldCtx, bw_decode, invert_matrix, lagrange_weight_matrix
from .matrixcore import (
    FMatrix,
    ProblemShape,
    assemble_blocks,
    lincomb,
    split_cols,
    transpose_mul,
)

SCHEME_NAMES = ("poly", "mds1d", "product", "uncoded")


@dataclass(frozen=True)
class CodeParams:
    """Exponent pair (alpha, beta) of the polynomial code."""

    alpha: int
    beta: int

    def validate(self, m: int, n: int) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise InvalidCodeParams("exponents must be nonnegative")
        exps = self.exponents(m, n)
        if len(set(exps.values())) != m * n:
            raise InvalidCodeParams(
                f"(alpha,beta)=({self.alpha},{self.beta}) collides for m={m}, n={n}"
            )

    def exponents(self, m: int, n: int) -> dict:
        return {(j, k): j * self.alpha + k * self.beta for j in range(m) for k in range(n)}

    def degree(self, m: int, n: int) -> int:
        return (m - 1) * self.alpha + (n - 1) * self.beta

    @classmethod
    def default(cls, m: int) -> "CodeParams":
        return cls(alpha=1, beta=m)


@dataclass(frozen=True)
class WorkerShare:
    """Coded blocks stored at one worker, plus placement metadata."""

    worker_id: int
    a_tilde: FMatrix
    b_tilde: FMatrix
    x: int | None = None           # evaluation point (polynomial code)
    group: int | None = None       # group id (1D MDS)
    grid_pos: tuple | None = None  # (row, col) in the worker grid (product code)


@dataclass(frozen=True)
class WorkerResult:
    """One worker's block product A~^T B~."""

    worker_id: int
    c_tilde: FMatrix


def worker_compute(share: WorkerShare) -> WorkerResult:
    return WorkerResult(share.worker_id, transpose_mul(share.a_tilde, share.b_tilde))


def _select_lowest(results: list, count: int) -> list:
    """Deterministic tie-break: lowest worker ids win, extras are ignored."""
    ordered = sorted(results, key=lambda r: r.worker_id)
    seen = set()
    picked = []
    for r in ordered:
        if r.worker_id in seen:
            continue
        seen.add(r.worker_id)
        picked.append(r)
        if len(picked) == count:
            return picked
    raise NotEnoughResults(f"need {count} distinct results, got {len(picked)}")


def systematic_generator(total: int, k: int, ctx: FieldCtx) -> list:
    """Systematic (total, k) MDS generator: identity then Vandermonde rows.

    Parity row p evaluates at point p + 1, so a single-parity code gets the
    all-ones row of the textbook examples. The MDS property (every k-subset of
    rows invertible) is verified exhaustively when cheap; a singular subset at
    decode time still raises.
    """
    if k < 1 or total < k:
        raise InvalidParameters(f"generator needs total >= k >= 1, got ({total}, {k})")
    rows = [[1 if c == j else 0 for c in range(k)] for j in range(k)]
    for p in range(total - k):
        x = (p + 1) % ctx.q
        rows.append([ctx.pow(x, c) for c in range(k)])
    if math.comb(total, k) <= 2048:
        for subset in combinations(range(total), k):
            try:
                invert_matrix([rows[i] for i in subset], ctx.q)
            except InvalidParameters:
                raise InvalidParameters(
                    f"generator subset {subset} singular over q={ctx.q}; pick a larger field"
                )
    return rows


def _solve_block_system(gen_rows: list, blocks: list, ctx: FieldCtx) -> list:
    """Solve sum_j gen_rows[i][j] * U_j = blocks[i] for the block unknowns U_j."""
    inv = invert_matrix(gen_rows, ctx.q)
    return [lincomb(blocks, row) for row in inv]


class Scheme:
    """Common contract for the four computation strategies."""

    name: str = ""

    def __init__(self, ctx: FieldCtx):
        self.ctx = ctx

    def validate(self, shape: ProblemShape) -> None:
        raise NotImplementedError

    def num_shares(self, shape: ProblemShape) -> int:
        return shape.N

    def encode(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> list:
        raise NotImplementedError

    def decodable(self, responded: set, shape: ProblemShape) -> bool:
        raise NotImplementedError

    def decode(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        raise NotImplementedError

    def threshold(self, shape: ProblemShape) -> int:
        raise NotImplementedError

    def decode_op_estimate(self, shape: ProblemShape) -> int:
        """Rough multiply-accumulate count of one decode, for latency modeling."""
        raise NotImplementedError

    def _check_inputs(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> None:
        if a.rows != shape.s or a.cols != shape.r:
            raise InvalidParameters(f"A is {a.rows}x{a.cols}, shape wants {shape.s}x{shape.r}")
        if b.rows != shape.s or b.cols != shape.t:
            raise InvalidParameters(f"B is {b.rows}x{b.cols}, shape wants {shape.s}x{shape.t}")


class PolyScheme(Scheme):
    """(alpha, beta)-polynomial code; default (1, m) hits the mn threshold."""

    name = "poly"

    def __init__(self, ctx: FieldCtx, params: CodeParams = None, points: list = None):
        super().__init__(ctx)
        self.params = params
        self.points = points

    def _params(self, shape: ProblemShape) -> CodeParams:
        p = self.params or CodeParams.default(shape.m)
        p.validate(shape.m, shape.n)
        return p

    def _points(self, shape: ProblemShape) -> list:
        if shape.N > self.ctx.q:
            raise TooManyWorkersForField(f"N={shape.N} exceeds field size q={self.ctx.q}")
        pts = self.points if self.points is not None else list(range(shape.N))
        if len(pts) != shape.N:
            raise InvalidParameters(f"{len(pts)} points for N={shape.N} workers")
        pts = [p % self.ctx.q for p in pts]
        if len(set(pts)) != len(pts):
            raise DuplicateEvaluationPoint("evaluation points must be distinct")
        return pts

    def required_results(self, shape: ProblemShape) -> int:
        return self._params(shape).degree(shape.m, shape.n) + 1

    def validate(self, shape: ProblemShape) -> None:
        self._params(shape)
        self._points(shape)
        if shape.N < self.required_results(shape):
            raise InvalidParameters(
                f"N={shape.N} below the polynomial code threshold "
                f"{self.required_results(shape)}"
            )

    def encode(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> list:
        self._check_inputs(a, b, shape)
        params = self._params(shape)
        pts = self._points(shape)
        a_blocks = split_cols(a, shape.m)
        b_blocks = split_cols(b, shape.n)
        shares = []
        for i, x in enumerate(pts):
            a_coef = [self.ctx.pow(x, j * params.alpha) for j in range(shape.m)]
            b_coef = [self.ctx.pow(x, k * params.beta) for k in range(shape.n)]
            shares.append(
                WorkerShare(
                    worker_id=i,
                    a_tilde=lincomb(a_blocks, a_coef),
                    b_tilde=lincomb(b_blocks, b_coef),
                    x=x,
                )
            )
        return shares

    def decodable(self, responded: set, shape: ProblemShape) -> bool:
        return len(responded) >= self.required_results(shape)

    def decode(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        params = self._params(shape)
        need = self.required_results(shape)
        picked = _select_lowest(results, need)
        x_of = {s.worker_id: s.x for s in shares}
        xs = [x_of[r.worker_id] for r in picked]
        if len(set(xs)) != len(xs):
            raise DuplicateEvaluationPoint("duplicate evaluation points among results")
        weights = lagrange_weight_matrix(xs, self.ctx)
        blocks = [r.c_tilde for r in picked]
        exps = params.exponents(shape.m, shape.n)
        grid = [[None] * shape.n for _ in range(shape.m)]
        for (j, k), e in exps.items():
            grid[j][k] = lincomb(blocks, weights[e])
        return assemble_blocks(grid)

    def decode_with_errors(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        """Entrywise Berlekamp-Welch over all N results; corrects up to
        floor((N - K)/2) corrupted workers and detects up to N - K."""
        params = self._params(shape)
        if len({r.worker_id for r in results}) != shape.N:
            raise NotEnoughResults("error decoding needs results from all N workers")
        ordered = sorted(results, key=lambda r: r.worker_id)
        x_of = {s.worker_id: s.x for s in shares}
        xs = [x_of[r.worker_id] for r in ordered]
        k = self.required_results(shape)
        e = (shape.N - k) // 2
        br, bc = shape.block_rows, shape.block_cols
        exps = params.exponents(shape.m, shape.n)
        import numpy as np

        coeff_grids = {
            jk: np.empty((br, bc), dtype=object) for jk in exps
        }
        for u in range(br):
            for v in range(bc):
                pts = [(x, int(r.c_tilde.data[u, v])) for x, r in zip(xs, ordered)]
                poly = bw_decode(pts, k, e, self.ctx)
                for jk, d in exps.items():
                    coeff_grids[jk][u, v] = poly.coeff(d)
        grid = [
            [FMatrix(coeff_grids[(j, kk)], self.ctx, _canonical=True) for kk in range(shape.n)]
            for j in range(shape.m)
        ]
        return assemble_blocks(grid)

    def threshold(self, shape: ProblemShape) -> int:
        return self.required_results(shape)

    def decode_op_estimate(self, shape: ProblemShape) -> int:
        k = self.required_results(shape)
        return k * k + shape.m * shape.n * k * shape.block_rows * shape.block_cols


class Mds1dScheme(Scheme):
    """1D MDS code: redundancy on A only, B split uncoded across n groups."""

    name = "mds1d"

    def group_size(self, shape: ProblemShape) -> int:
        if shape.N % shape.n:
            raise NonDivisibleGroups(f"n={shape.n} does not divide N={shape.N}")
        g = shape.N // shape.n
        if g < shape.m:
            raise InvalidParameters(f"group size {g} below m={shape.m}")
        return g

    def validate(self, shape: ProblemShape) -> None:
        self.group_size(shape)

    def encode(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> list:
        self._check_inputs(a, b, shape)
        g = self.group_size(shape)
        gen = systematic_generator(g, shape.m, self.ctx)
        a_blocks = split_cols(a, shape.m)
        b_blocks = split_cols(b, shape.n)
        shares = []
        for i in range(shape.N):
            grp, idx = divmod(i, g)
            shares.append(
                WorkerShare(
                    worker_id=i,
                    a_tilde=lincomb(a_blocks, gen[idx]),
                    b_tilde=b_blocks[grp],
                    group=grp,
                )
            )
        return shares

    def decodable(self, responded: set, shape: ProblemShape) -> bool:
        g = self.group_size(shape)
        counts = [0] * shape.n
        for i in responded:
            counts[i // g] += 1
        return all(c >= shape.m for c in counts)

    def decode(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        g = self.group_size(shape)
        gen = systematic_generator(g, shape.m, self.ctx)
        by_group = {grp: [] for grp in range(shape.n)}
        seen = set()
        for r in sorted(results, key=lambda r: r.worker_id):
            if r.worker_id in seen:
                continue
            seen.add(r.worker_id)
            by_group[r.worker_id // g].append(r)
        grid = [[None] * shape.n for _ in range(shape.m)]
        for grp in range(shape.n):
            picked = by_group[grp][: shape.m]
            if len(picked) < shape.m:
                raise NotDecodable(f"group {grp} has only {len(picked)} results")
            rows = [gen[r.worker_id % g] for r in picked]
            unknowns = _solve_block_system(rows, [r.c_tilde for r in picked], self.ctx)
            for j in range(shape.m):
                grid[j][grp] = unknowns[j]
        return assemble_blocks(grid)

    def threshold(self, shape: ProblemShape) -> int:
        g = self.group_size(shape)
        return shape.N - g + shape.m

    def decode_op_estimate(self, shape: ProblemShape) -> int:
        return shape.n * (shape.m ** 3 + shape.m * shape.m * shape.block_rows * shape.block_cols)


class ProductScheme(Scheme):
    """Product code: MDS redundancy on both inputs over a sqrt(N) grid,
    decoded by iterative row/column peeling."""

    name = "product"

    def grid_side(self, shape: ProblemShape) -> int:
        if shape.m != shape.n:
            raise InvalidGrid(f"product code needs m = n, got m={shape.m}, n={shape.n}")
        side = math.isqrt(shape.N)
        if side * side != shape.N:
            raise InvalidGrid(f"N={shape.N} is not a perfect square")
        if side < shape.m:
            raise InvalidGrid(f"grid side {side} below m={shape.m}")
        return side

    def validate(self, shape: ProblemShape) -> None:
        self.grid_side(shape)

    def encode(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> list:
        self._check_inputs(a, b, shape)
        side = self.grid_side(shape)
        gen = systematic_generator(side, shape.m, self.ctx)
        a_blocks = split_cols(a, shape.m)
        b_blocks = split_cols(b, shape.n)
        a_codes = [lincomb(a_blocks, gen[c]) for c in range(side)]
        b_codes = [lincomb(b_blocks, gen[r]) for r in range(side)]
        shares = []
        for i in range(shape.N):
            row, col = divmod(i, side)
            shares.append(
                WorkerShare(
                    worker_id=i,
                    a_tilde=a_codes[col],
                    b_tilde=b_codes[row],
                    grid_pos=(row, col),
                )
            )
        return shares

    def _peel_known(self, responded: set, side: int, m: int) -> set:
        """Cells derivable from the responded set by row/column peeling.

        A row (or column) with at least m known cells decodes fully; completed
        lines are propagated with a work queue, O(side^2) overall.
        """
        known = {divmod(i, side) for i in responded}
        row_count = [0] * side
        col_count = [0] * side
        for r, c in known:
            row_count[r] += 1
            col_count[c] += 1
        stack = [("r", r) for r in range(side) if row_count[r] >= m]
        stack += [("c", c) for c in range(side) if col_count[c] >= m]
        while stack:
            kind, idx = stack.pop()
            if kind == "r":
                for c in range(side):
                    if (idx, c) not in known:
                        known.add((idx, c))
                        row_count[idx] += 1
                        col_count[c] += 1
                        if col_count[c] == m:
                            stack.append(("c", c))
            else:
                for r in range(side):
                    if (r, idx) not in known:
                        known.add((r, idx))
                        row_count[r] += 1
                        col_count[idx] += 1
                        if row_count[r] == m:
                            stack.append(("r", r))
        return known

    def decodable(self, responded: set, shape: ProblemShape) -> bool:
        side = self.grid_side(shape)
        known = self._peel_known(responded, side, shape.m)
        return all((r, c) in known for r in range(shape.m) for c in range(shape.m))

    def decode(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        side = self.grid_side(shape)
        m = shape.m
        gen = systematic_generator(side, m, self.ctx)
        cells = {}
        for res in sorted(results, key=lambda r: r.worker_id):
            pos = divmod(res.worker_id, side)
            cells.setdefault(pos, res.c_tilde)
        changed = True
        while changed:
            changed = False
            for r in range(side):
                have = [c for c in range(side) if (r, c) in cells]
                if m <= len(have) < side:
                    rows = [gen[c] for c in have[:m]]
                    unknowns = _solve_block_system(rows, [cells[(r, c)] for c in have[:m]], self.ctx)
                    for c in range(side):
                        if (r, c) not in cells:
                            cells[(r, c)] = lincomb(unknowns, gen[c])
                    changed = True
            for c in range(side):
                have = [r for r in range(side) if (r, c) in cells]
                if m <= len(have) < side:
                    rows = [gen[r] for r in have[:m]]
                    unknowns = _solve_block_system(rows, [cells[(r, c)] for r in have[:m]], self.ctx)
                    for r in range(side):
                        if (r, c) not in cells:
                            cells[(r, c)] = lincomb(unknowns, gen[r])
                    changed = True
        missing = [(r, c) for r in range(m) for c in range(m) if (r, c) not in cells]
        if missing:
            raise NotDecodable(f"peeling stalled; systematic cells {missing} unknown")
        # cell (row i, col j) holds A_j^T B_i, i.e. output block (j, i).
        grid = [[cells[(i, j)] for i in range(m)] for j in range(m)]
        return assemble_blocks(grid)

    def threshold(self, shape: ProblemShape) -> int:
        side = self.grid_side(shape)
        return 2 * (shape.m - 1) * side - (shape.m - 1) ** 2 + 1

    def decode_op_estimate(self, shape: ProblemShape) -> int:
        side = self.grid_side(shape)
        return 2 * side * (shape.m ** 3 + side * shape.m * shape.block_rows * shape.block_cols)


class UncodedScheme(Scheme):
    """mn workers each hold one raw (A_j, B_k) pair; all must respond."""

    name = "uncoded"

    def num_shares(self, shape: ProblemShape) -> int:
        return shape.m * shape.n

    def validate(self, shape: ProblemShape) -> None:
        if shape.N < shape.m * shape.n:
            raise InvalidParameters(f"uncoded needs N >= mn = {shape.m * shape.n}")

    def encode(self, a: FMatrix, b: FMatrix, shape: ProblemShape) -> list:
        self._check_inputs(a, b, shape)
        a_blocks = split_cols(a, shape.m)
        b_blocks = split_cols(b, shape.n)
        shares = []
        for i in range(shape.m * shape.n):
            j, k = divmod(i, shape.n)
            shares.append(WorkerShare(worker_id=i, a_tilde=a_blocks[j], b_tilde=b_blocks[k]))
        return shares

    def decodable(self, responded: set, shape: ProblemShape) -> bool:
        return set(range(shape.m * shape.n)) <= set(responded)

    def decode(self, results: list, shares: list, shape: ProblemShape) -> FMatrix:
        by_id = {}
        for r in results:
            by_id.setdefault(r.worker_id, r.c_tilde)
        if not self.decodable(set(by_id), shape):
            raise NotEnoughResults("uncoded decode needs every one of the mn workers")
        grid = [
            [by_id[j * shape.n + k] for k in range(shape.n)] for j in range(shape.m)
        ]
        return assemble_blocks(grid)

    def threshold(self, shape: ProblemShape) -> int:
        return shape.m * shape.n

    def decode_op_estimate(self, shape: ProblemShape) -> int:
        return shape.r * shape.t


def get_scheme(name: str, ctx: FieldCtx, **kwargs) -> Scheme:
    table = {
        "poly": PolyScheme,
        "mds1d": Mds1dScheme,
        "product": ProductScheme,
        "uncoded": UncodedScheme,
    }
    if name not in table:
        raise InvalidParameters(f"unknown scheme {name!r}; choose from {SCHEME_NAMES}")
    return table[name](ctx, **kwargs)


def threshold(name: str, shape: ProblemShape, ctx: FieldCtx = None) -> int:
    """Worst-case recovery threshold of the named scheme on this shape."""
    return get_scheme(name, ctx or FieldCtx()).threshold(shape)


def threshold_table(m: int, n: int, n_range, ctx: FieldCtx = None) -> list:
    """Rows (N, scheme, threshold) for every scheme defined at each N."""
    ctx = ctx or FieldCtx()
    rows = []
    for big_n in n_range:
        for name in SCHEME_NAMES:
            try:
                shape = ProblemShape(
                    s=max(m, n), r=m, t=n, m=m, n=n, N=big_n, allow_wide=True
                )
                rows.append((big_n, name, threshold(name, shape, ctx)))
            except Exception:
                continue
    return rows


def save_result(result: WorkerResult, path, x: int = -1) -> None:
    """Dump format: one-line header `worker_id x_point`, then the matrix text."""
    with open(path, "w") as fh:
        fh.write(f"{result.worker_id} {x}\n")
        m = result.c_tilde
        fh.write(f"{m.rows} {m.cols} {m.ctx.q}\n")
        for row in m.data:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def load_result(path, ctx: FieldCtx = None):
    """Returns (WorkerResult, x_point); x_point is -1 for non-polynomial schemes."""
    import numpy as np

    with open(path) as fh:
        header = fh.readline().split()
        tokens = fh.read().split()
    if len(header) != 2:
        raise InvalidParameters(f"result file {path} has a malformed header")
    worker_id, x = int(header[0]), int(header[1])
    if len(tokens) < 3:
        raise InvalidParameters(f"result file {path} is truncated")
    rows, cols, q = int(tokens[0]), int(tokens[1]), int(tokens[2])
    if ctx is None:
        ctx = FieldCtx(q)
    elif ctx.q != q:
        raise InvalidParameters(f"file modulus {q} differs from context {ctx.q}")
    vals = [int(t) for t in tokens[3:]]
    if len(vals) != rows * cols:
        raise InvalidParameters(f"expected {rows * cols} entries, found {len(vals)}")
    mat = FMatrix(np.array(vals, dtype=object).reshape(rows, cols), ctx)
    return WorkerResult(worker_id, mat), x


def save_share(share: WorkerShare, path) -> None:
    """Header `worker_id x_point`, then the A~ and B~ matrices back to back."""
    x = share.x if share.x is not None else -1
    with open(path, "w") as fh:
        fh.write(f"{share.worker_id} {x}\n")
        for m in (share.a_tilde, share.b_tilde):
            fh.write(f"{m.rows} {m.cols} {m.ctx.q}\n")
            for row in m.data:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")


def load_share(path, ctx: FieldCtx = None) -> WorkerShare:
    import numpy as np

    with open(path) as fh:
        header = fh.readline().split()
        tokens = fh.read().split()
    if len(header) != 2:
        raise InvalidParameters(f"share file {path} has a malformed header")
    worker_id, x = int(header[0]), int(header[1])
    mats = []
    pos = 0
    for _ in range(2):
        rows, cols, q = int(tokens[pos]), int(tokens[pos + 1]), int(tokens[pos + 2])
        pos += 3
        if ctx is None:
            ctx = FieldCtx(q)
        elif ctx.q != q:
            raise InvalidParameters(f"file modulus {q} differs from context {ctx.q}")
        vals = [int(t) for t in tokens[pos : pos + rows * cols]]
        if len(vals) != rows * cols:
            raise InvalidParameters(f"share file {path} is truncated")
        pos += rows * cols
        mats.append(FMatrix(np.array(vals, dtype=object).reshape(rows, cols), ctx))
    return WorkerShare(
        worker_id=worker_id, a_tilde=mats[0], b_tilde=mats[1], x=None if x < 0 else x
    )


# Thin functional aliases matching the operation-level vocabulary.

def poly_encode(a, b, shape, ctx, params=None, points=None):
    return PolyScheme(ctx, params=params, points=points).encode(a, b, shape)


def poly_decodable(responded, shape, ctx, params=None):
    return PolyScheme(ctx, params=params).decodable(set(responded), shape)


def poly_decode(results, shares, shape, ctx, params=None):
    return PolyScheme(ctx, params=params).decode(results, shares, shape)


def poly_decode_with_errors(results, shares, shape, ctx, params=None):
    return PolyScheme(ctx, params=params).decode_with_errors(results, shares, shape)
