from itertools import combinations

import numpy as np
import pytest

from polycode.errors import (
    DuplicateEvaluationPoint,
    InvalidCodeParams,
    InvalidGrid,
    NonDivisibleGroups,
    NotDecodable,
    NotEnoughResults,
    TooManyWorkersForField,
)
from polycode.field import FieldCtx
from polycode.matrixcore import FMatrix, ProblemShape, transpose_mul
from polycode.schemes import (
    CodeParams,
    Mds1dScheme,
    PolyScheme,
    ProductScheme,
    UncodedScheme,
    get_scheme,
    load_result,
    load_share,
    save_result,
    save_share,
    systematic_generator,
    threshold,
    threshold_table,
    worker_compute,
)

F7 = FieldCtx(7)
BIG = FieldCtx()


def make_instance(shape, ctx, seed=0):
    rng = np.random.default_rng(seed)
    a = FMatrix.random(shape.s, shape.r, ctx, rng)
    b = FMatrix.random(shape.s, shape.t, ctx, rng)
    return a, b, transpose_mul(a, b)


def all_results(scheme, a, b, shape):
    shares = scheme.encode(a, b, shape)
    return shares, [worker_compute(s) for s in shares]


class TestCodeParams:
    def test_default_is_one_m(self):
        assert CodeParams.default(3) == CodeParams(1, 3)

    @pytest.mark.parametrize("m", range(1, 33))
    @pytest.mark.parametrize("n", (1, 2, 17, 32))
    def test_one_m_and_n_one_always_valid(self, m, n):
        CodeParams(1, m).validate(m, n)
        CodeParams(n, 1).validate(m, n)

    def test_collision_rejected(self):
        for m, n in ((2, 2), (3, 5), (32, 32)):
            with pytest.raises(InvalidCodeParams):
                CodeParams(1, 1).validate(m, n)
        CodeParams(1, 1).validate(1, 5)
        CodeParams(1, 1).validate(5, 1)

    def test_degree_default(self):
        assert CodeParams.default(4).degree(4, 3) == 4 * 3 - 1


class TestPolyScheme:
    shape5 = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5)

    def test_worked_example_shares(self):
        # Worker i stores A0 + i*A1 and B0 + i^2*B1 over F_7, points 0..4.
        a, b, _ = make_instance(self.shape5, F7)
        scheme = PolyScheme(F7)
        shares = scheme.encode(a, b, self.shape5)
        a0, a1 = a.data[:, :2], a.data[:, 2:]
        b0, b1 = b.data[:, :2], b.data[:, 2:]
        for i, sh in enumerate(shares):
            assert sh.x == i
            assert (sh.a_tilde.data == (a0 + i * a1) % 7).all()
            assert (sh.b_tilde.data == (b0 + i * i * b1) % 7).all()

    def test_worker_zero_gets_systematic_share(self):
        a, b, _ = make_instance(self.shape5, F7)
        sh0 = PolyScheme(F7).encode(a, b, self.shape5)[0]
        assert (sh0.a_tilde.data == a.data[:, :2]).all()
        assert (sh0.b_tilde.data == b.data[:, :2]).all()

    def test_trivial_partition_stores_everything(self):
        shape = ProblemShape(s=4, r=3, t=2, m=1, n=1, N=3)
        a, b, _ = make_instance(shape, F7)
        for sh in PolyScheme(F7).encode(a, b, shape):
            assert sh.a_tilde == a and sh.b_tilde == b

    def test_decodable_is_count_threshold(self):
        scheme = PolyScheme(F7)
        assert scheme.decodable({1, 2, 3, 4}, self.shape5)
        assert not scheme.decodable({0, 2, 4}, self.shape5)
        shape1 = ProblemShape(s=2, r=1, t=1, m=1, n=1, N=1)
        assert scheme.decodable({0}, shape1)

    def test_every_four_subset_decodes_exactly(self):
        a, b, oracle = make_instance(self.shape5, F7)
        scheme = PolyScheme(F7)
        shares, results = all_results(scheme, a, b, self.shape5)
        for size in (4, 5):
            for subset in combinations(range(5), size):
                c = scheme.decode([results[i] for i in subset], shares, self.shape5)
                assert c == oracle

    def test_three_results_raise(self):
        a, b, _ = make_instance(self.shape5, F7)
        scheme = PolyScheme(F7)
        shares, results = all_results(scheme, a, b, self.shape5)
        with pytest.raises(NotEnoughResults):
            scheme.decode(results[:3], shares, self.shape5)

    def test_superset_independence(self):
        a, b, _ = make_instance(self.shape5, F7)
        scheme = PolyScheme(F7)
        shares, results = all_results(scheme, a, b, self.shape5)
        base = scheme.decode(results, shares, self.shape5)
        # arrival order must not matter either
        shuffled = [results[i] for i in (4, 0, 2, 1, 3)]
        assert scheme.decode(shuffled, shares, self.shape5) == base

    def test_custom_points_and_duplicates(self):
        a, b, oracle = make_instance(self.shape5, F7)
        scheme = PolyScheme(F7, points=[2, 3, 4, 5, 6])
        shares, results = all_results(scheme, a, b, self.shape5)
        assert scheme.decode(results, shares, self.shape5) == oracle
        with pytest.raises(DuplicateEvaluationPoint):
            PolyScheme(F7, points=[1, 1, 2, 3, 4]).encode(a, b, self.shape5)

    def test_too_many_workers_for_field(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=8)
        a, b, _ = make_instance(shape, F7)
        with pytest.raises(TooManyWorkersForField):
            PolyScheme(F7).encode(a, b, shape)

    def test_general_alpha_beta_decodes(self):
        shape = ProblemShape(s=6, r=6, t=4, m=3, n=2, N=10)
        a, b, oracle = make_instance(shape, BIG)
        scheme = PolyScheme(BIG, params=CodeParams(2, 1))
        scheme.params.validate(3, 2)
        shares, results = all_results(scheme, a, b, shape)
        assert scheme.decode(results, shares, shape) == oracle


class TestPolyErrors:
    shape12 = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=12)

    def test_corrects_four_of_twelve(self):
        a, b, oracle = make_instance(self.shape12, BIG)
        scheme = PolyScheme(BIG)
        shares, results = all_results(scheme, a, b, self.shape12)
        rng = np.random.default_rng(5)
        for wid in (2, 5, 7, 11):
            wrong = FMatrix(
                (results[wid].c_tilde.data + rng.integers(1, BIG.q)) % BIG.q, BIG
            )
            results[wid] = type(results[wid])(wid, wrong)
        assert scheme.decode_with_errors(results, shares, self.shape12) == oracle

    def test_zero_corruption_matches_plain_decode(self):
        a, b, oracle = make_instance(self.shape12, BIG)
        scheme = PolyScheme(BIG)
        shares, results = all_results(scheme, a, b, self.shape12)
        got = scheme.decode_with_errors(results, shares, self.shape12)
        assert got == scheme.decode(results, shares, self.shape12) == oracle

    def test_five_corruptions_detected(self):
        from polycode.errors import DecodingFailure

        a, b, _ = make_instance(self.shape12, BIG)
        scheme = PolyScheme(BIG)
        shares, results = all_results(scheme, a, b, self.shape12)
        # shared offset: inconsistent with every degree<4 candidate on >= 8 points
        for wid in (0, 3, 6, 8, 10):
            wrong = FMatrix((results[wid].c_tilde.data + 1) % BIG.q, BIG)
            results[wid] = type(results[wid])(wid, wrong)
        with pytest.raises(DecodingFailure):
            scheme.decode_with_errors(results, shares, self.shape12)

    def test_needs_all_workers(self):
        a, b, _ = make_instance(self.shape12, BIG)
        scheme = PolyScheme(BIG)
        shares, results = all_results(scheme, a, b, self.shape12)
        with pytest.raises(NotEnoughResults):
            scheme.decode_with_errors(results[:11], shares, self.shape12)


class TestSystematicGenerator:
    def test_single_parity_is_all_ones(self):
        gen = systematic_generator(3, 2, F7)
        assert gen == [[1, 0], [0, 1], [1, 1]]

    def test_every_subset_invertible(self):
        from polycode.field import invert_matrix

        gen = systematic_generator(6, 3, BIG)
        for subset in combinations(range(6), 3):
            invert_matrix([gen[i] for i in subset], BIG.q)


class TestMds1d:
    def test_fig2a_shares(self):
        # N=3, m=2, n=1: coded A blocks are A0, A1, A0+A1; B stored whole.
        shape = ProblemShape(s=8, r=4, t=2, m=2, n=1, N=3)
        a, b, _ = make_instance(shape, F7)
        shares = Mds1dScheme(F7).encode(a, b, shape)
        a0, a1 = a.data[:, :2], a.data[:, 2:]
        assert (shares[0].a_tilde.data == a0).all()
        assert (shares[1].a_tilde.data == a1).all()
        assert (shares[2].a_tilde.data == (a0 + a1) % 7).all()
        for sh in shares:
            assert sh.b_tilde == b

    def test_any_two_of_three_decode(self):
        shape = ProblemShape(s=8, r=4, t=2, m=2, n=1, N=3)
        a, b, oracle = make_instance(shape, F7)
        scheme = Mds1dScheme(F7)
        shares, results = all_results(scheme, a, b, shape)
        for subset in combinations(range(3), 2):
            assert scheme.decode([results[i] for i in subset], shares, shape) == oracle

    def test_exhaustive_threshold_n6(self):
        # Brute force over all 2^6 response sets: worst case 5 = N - N/n + m.
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=6)
        scheme = Mds1dScheme(BIG)
        decodable_sizes = {}
        for mask in range(64):
            subset = {i for i in range(6) if mask >> i & 1}
            ok = scheme.decodable(subset, shape)
            decodable_sizes.setdefault(len(subset), []).append(ok)
        worst = min(k for k, oks in decodable_sizes.items() if all(oks))
        assert worst == 5 == scheme.threshold(shape)

    def test_all_respond_decodes(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=6)
        a, b, oracle = make_instance(shape, BIG)
        scheme = Mds1dScheme(BIG)
        shares, results = all_results(scheme, a, b, shape)
        assert scheme.decode(results, shares, shape) == oracle

    def test_every_decodable_subset_exact(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=6)
        a, b, oracle = make_instance(shape, BIG)
        scheme = Mds1dScheme(BIG)
        shares, results = all_results(scheme, a, b, shape)
        for mask in range(64):
            subset = [i for i in range(6) if mask >> i & 1]
            if scheme.decodable(set(subset), shape):
                got = scheme.decode([results[i] for i in subset], shares, shape)
                assert got == oracle
            else:
                with pytest.raises((NotDecodable, NotEnoughResults)):
                    scheme.decode([results[i] for i in subset], shares, shape)

    def test_group_divisibility_enforced(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=7)
        with pytest.raises(NonDivisibleGroups):
            Mds1dScheme(BIG).threshold(shape)


class TestProduct:
    shape9 = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=9)

    def test_fig2b_pattern_decodes(self):
        # The five results A1'B0, A1'B1, (A0+A1)'B1, A0'(B0+B1), A1'(B0+B1)
        # sit at grid cells (0,1),(1,1),(1,2),(2,0),(2,1): workers 1,4,5,6,7.
        a, b, oracle = make_instance(self.shape9, BIG)
        scheme = ProductScheme(BIG)
        assert scheme.decodable({1, 4, 5, 6, 7}, self.shape9)
        shares, results = all_results(scheme, a, b, self.shape9)
        got = scheme.decode([results[i] for i in (1, 4, 5, 6, 7)], shares, self.shape9)
        assert got == oracle

    def test_exhaustive_threshold_2_9(self):
        scheme = ProductScheme(BIG)
        by_size = {}
        for mask in range(512):
            subset = {i for i in range(9) if mask >> i & 1}
            by_size.setdefault(len(subset), []).append(scheme.decodable(subset, self.shape9))
        worst = min(k for k, oks in by_size.items() if all(oks))
        assert worst == 6 == scheme.threshold(self.shape9)

    def test_every_decodable_subset_exact(self):
        a, b, oracle = make_instance(self.shape9, BIG)
        scheme = ProductScheme(BIG)
        shares, results = all_results(scheme, a, b, self.shape9)
        for mask in range(512):
            subset = [i for i in range(9) if mask >> i & 1]
            if scheme.decodable(set(subset), self.shape9):
                got = scheme.decode([results[i] for i in subset], shares, self.shape9)
                assert got == oracle

    def test_invalid_grids_rejected(self):
        with pytest.raises(InvalidGrid):
            ProductScheme(BIG).threshold(ProblemShape(s=8, r=4, t=4, m=2, n=2, N=8))
        with pytest.raises(InvalidGrid):
            ProductScheme(BIG).threshold(ProblemShape(s=8, r=4, t=6, m=2, n=3, N=9))


class TestUncoded:
    def test_requires_every_worker(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5)
        a, b, oracle = make_instance(shape, BIG)
        scheme = UncodedScheme(BIG)
        shares, results = all_results(scheme, a, b, shape)
        assert len(shares) == 4
        assert scheme.decodable({0, 1, 2, 3}, shape)
        assert not scheme.decodable({0, 1, 2}, shape)
        assert scheme.decode(results, shares, shape) == oracle
        with pytest.raises(NotEnoughResults):
            scheme.decode(results[:3], shares, shape)


class TestThresholds:
    @pytest.mark.parametrize("m", range(1, 9))
    @pytest.mark.parametrize("n", range(1, 9))
    def test_poly_threshold_is_mn(self, m, n):
        shape = ProblemShape(s=max(m, n), r=m, t=n, m=m, n=n, N=m * n, allow_wide=True)
        assert threshold("poly", shape) == m * n

    def test_fig3_regime(self):
        shape = ProblemShape(s=10, r=10, t=10, m=10, n=10, N=400)
        assert threshold("poly", shape) == 100
        assert threshold("mds1d", shape) == 370
        assert threshold("product", shape) == 280

    def test_worked_example_threshold(self):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5)
        assert threshold("poly", shape) == 4

    def test_all_one_partition(self):
        shape = ProblemShape(s=2, r=1, t=1, m=1, n=1, N=1)
        for name in ("poly", "mds1d", "product", "uncoded"):
            assert threshold(name, shape) == 1

    def test_ordering_poly_product_mds(self):
        # wherever all three are defined: K_poly <= K_product <= K_mds1d
        for m in (2, 3, 4):
            for side in range(m, 9):
                big_n = side * side
                if big_n % m:
                    continue
                shape = ProblemShape(s=m, r=m, t=m, m=m, n=m, N=big_n, allow_wide=True)
                kp = threshold("poly", shape)
                kprod = threshold("product", shape)
                if big_n // m >= m:
                    kmds = threshold("mds1d", shape)
                    assert kprod <= kmds
                assert kp <= kprod

    def test_cut_set_floor_on_predicates(self):
        # decodable(S) implies |S| >= mn for every scheme on small instances
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=4)
        shapes = {
            "poly": ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5),
            "mds1d": ProblemShape(s=8, r=4, t=4, m=2, n=2, N=6),
            "product": ProblemShape(s=8, r=4, t=4, m=2, n=2, N=9),
            "uncoded": shape,
        }
        for name, shp in shapes.items():
            scheme = get_scheme(name, BIG)
            workers = scheme.num_shares(shp)
            for mask in range(1 << workers):
                subset = {i for i in range(workers) if mask >> i & 1}
                if scheme.decodable(subset, shp):
                    assert len(subset) >= 4

    def test_threshold_table(self):
        rows = threshold_table(10, 10, [400])
        table = {name: t for _, name, t in rows}
        assert table["poly"] == 100
        assert table["product"] == 280
        assert table["mds1d"] == 370


class TestShareResultIO:
    def test_share_round_trip(self, tmp_path):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5)
        a, b, _ = make_instance(shape, F7)
        share = PolyScheme(F7).encode(a, b, shape)[2]
        path = tmp_path / "share.txt"
        save_share(share, path)
        back = load_share(path)
        assert back.worker_id == 2 and back.x == 2
        assert back.a_tilde == share.a_tilde and back.b_tilde == share.b_tilde

    def test_result_round_trip(self, tmp_path):
        shape = ProblemShape(s=8, r=4, t=4, m=2, n=2, N=5)
        a, b, _ = make_instance(shape, F7)
        scheme = PolyScheme(F7)
        shares, results = all_results(scheme, a, b, shape)
        path = tmp_path / "result.txt"
        save_result(results[1], path, x=shares[1].x)
        back, x = load_result(path)
        assert back.worker_id == 1 and x == 1
        assert back.c_tilde == results[1].c_tilde
