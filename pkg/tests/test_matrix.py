import random
from fractions import Fraction
from itertools import combinations

import pytest

from dualbench.errors import CapExceeded, NotFound, PreconditionViolation
from dualbench.f2 import F2Set, duality_measure, parity_dot
from dualbench.matrix import (
    BoolMatrix,
    SubmatrixView,
    dedup,
    discrepancy,
    factorize_f2,
    find_biased_submatrix,
    find_mono_via_dual,
    format_matrix,
    max_mono_exact,
    max_mono_exact_other_dimension,
    parse_matrix_text,
    rank_f2,
    rank_real,
    stats,
)


def ip_matrix(n):
    size = 1 << n
    return BoolMatrix(
        size, size, [sum(((x & y).bit_count() & 1) << y for y in range(size)) for x in range(size)]
    )


def identity(n):
    return BoolMatrix(n, n, [1 << i for i in range(n)])


def all_ones(k, l):
    return BoolMatrix(k, l, [(1 << l) - 1] * k)


def random_matrix(rng, k, l):
    return BoolMatrix(k, l, [rng.randrange(1 << l) for _ in range(k)])


def rank_fraction_oracle(m):
    """Independent exact rank via Fraction Gaussian elimination."""
    a = [[Fraction(m.entry(i, j)) for j in range(m.n_cols)] for i in range(m.n_rows)]
    rank = 0
    row = 0
    for col in range(m.n_cols):
        piv = next((r for r in range(row, m.n_rows) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        for r in range(m.n_rows):
            if r != row and a[r][col] != 0:
                f = a[r][col] / a[row][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        rank += 1
        row += 1
    return rank


# -- dedup ---------------------------------------------------------------------


def test_dedup_examples():
    m, rmap, cmap = dedup(all_ones(3, 3))
    assert (m.n_rows, m.n_cols) == (1, 1) and m.entry(0, 0) == 1
    assert rmap == (0, 0, 0) and cmap == (0, 0, 0)

    m, rmap, cmap = dedup(identity(2))
    assert m == identity(2)
    assert rmap == (0, 1) and cmap == (0, 1)

    src = BoolMatrix.from_lists([[0, 1], [0, 1], [1, 0]])
    m, rmap, cmap = dedup(src)
    assert m == BoolMatrix.from_lists([[0, 1], [1, 0]])
    assert rmap == (0, 0, 1)


def test_dedup_preserves_entries_through_maps():
    rng = random.Random(21)
    for _ in range(50):
        src = random_matrix(rng, rng.randint(1, 7), rng.randint(1, 7))
        m, rmap, cmap = dedup(src)
        for i in range(src.n_rows):
            for j in range(src.n_cols):
                assert src.entry(i, j) == m.entry(rmap[i], cmap[j])


# -- ranks ---------------------------------------------------------------------


def test_rank_f2_examples():
    assert rank_f2(identity(5)) == 5
    assert rank_f2(all_ones(4, 6)) == 1
    for n in (1, 2, 3):
        assert rank_f2(ip_matrix(n)) == n


def test_rank_real_examples():
    assert rank_real(ip_matrix(2)) == 3
    assert rank_real(identity(6)) == 6
    assert rank_real(BoolMatrix.from_lists([[1, 1], [1, 0]])) == 2


def test_rank_real_matches_fraction_oracle():
    rng = random.Random(22)
    for _ in range(120):
        m = random_matrix(rng, rng.randint(1, 8), rng.randint(1, 8))
        assert rank_real(m) == rank_fraction_oracle(m)


def test_rank_f2_at_most_rank_real():
    rng = random.Random(23)
    for _ in range(150):
        m = random_matrix(rng, rng.randint(1, 9), rng.randint(1, 9))
        assert rank_f2(m) <= rank_real(m)


# -- factorization ---------------------------------------------------------------


def test_factorize_all_ones():
    f = factorize_f2(all_ones(1, 1))
    assert f.r == 1


def test_factorize_ip():
    m = ip_matrix(2)
    f = factorize_f2(m)
    assert f.r == 2
    for i in range(m.n_rows):
        for j in range(m.n_cols):
            assert parity_dot(f.row_words[i], f.col_words[j]) == m.entry(i, j)
    assert len(f.a_set) == m.n_rows and len(f.b_set) == m.n_cols


def test_factorize_roundtrip_fuzz():
    rng = random.Random(24)
    done = 0
    while done < 60:
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        m, _, _ = dedup(m)
        f = factorize_f2(m)
        assert f.r == rank_f2(m)
        for i in range(m.n_rows):
            for j in range(m.n_cols):
                assert parity_dot(f.row_words[i], f.col_words[j]) == m.entry(i, j)
        done += 1


def test_factorize_rejects_duplicates():
    with pytest.raises(PreconditionViolation):
        factorize_f2(BoolMatrix.from_lists([[0, 1], [0, 1]]))


# -- discrepancy ---------------------------------------------------------------


def test_discrepancy_examples():
    assert discrepancy(all_ones(2, 3)) == 1
    assert discrepancy(BoolMatrix.from_lists([[0, 1], [1, 0]])) == 0
    assert discrepancy(BoolMatrix.from_lists([[1, 1], [1, 0]])) == Fraction(1, 2)


def test_bridge_identity_exhaustive_small():
    # discrepancy of any rectangle equals the duality measure of the factor
    # subsets; exhaustive over index pairs on deduplicated matrices.
    rng = random.Random(25)
    done = 0
    while done < 25:
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        m, _, _ = dedup(m)
        f = factorize_f2(m)
        rows = range(m.n_rows)
        cols = range(m.n_cols)
        for ra in range(1, m.n_rows + 1):
            for i_set in combinations(rows, ra):
                for ca in range(1, m.n_cols + 1):
                    for j_set in combinations(cols, ca):
                        view = SubmatrixView(m, i_set, j_set)
                        a = F2Set(f.a_set.n, [f.row_words[i] for i in i_set])
                        b = F2Set(f.b_set.n, [f.col_words[j] for j in j_set])
                        d = duality_measure(a, b)
                        assert view.discrepancy() == d
                        assert (d == 1) == view.is_monochromatic()
        done += 1
        if m.n_rows * m.n_cols > 16:
            done += 2  # keep the exhaustive loop cheap on larger draws


# -- max mono ------------------------------------------------------------------


def brute_force_max_mono_area(m):
    """Fully independent: enumerate every (row set, col set) pair."""
    best = 0
    for ra in range(1, m.n_rows + 1):
        for rows in combinations(range(m.n_rows), ra):
            for ca in range(1, m.n_cols + 1):
                for cols in combinations(range(m.n_cols), ca):
                    vals = {m.entry(i, j) for i in rows for j in cols}
                    if len(vals) == 1:
                        best = max(best, ra * ca)
    return best


def test_max_mono_examples():
    view = max_mono_exact(all_ones(3, 4))
    assert view.area() == 12 and view.is_monochromatic()

    assert max_mono_exact(identity(2)).area() == 1
    assert brute_force_max_mono_area(identity(2)) == 1

    view = max_mono_exact(ip_matrix(2))
    assert view.area() == 4 and view.is_monochromatic()
    assert brute_force_max_mono_area(ip_matrix(2)) == 4


def test_max_mono_agrees_with_other_dimension():
    rng = random.Random(26)
    for _ in range(80):
        m = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        a = max_mono_exact(m)
        b = max_mono_exact_other_dimension(m)
        assert a.area() == b.area()
        assert (a.rows, a.cols) == (b.rows, b.cols)
        assert a.area() == brute_force_max_mono_area(m)


def test_max_mono_cap():
    with pytest.raises(CapExceeded):
        max_mono_exact(all_ones(8, 8), exact_cap=4)


def test_max_mono_deterministic():
    rng = random.Random(27)
    for _ in range(20):
        m = random_matrix(rng, 4, 4)
        v1 = max_mono_exact(m)
        v2 = max_mono_exact(m)
        assert (v1.rows, v1.cols) == (v2.rows, v2.cols)


# -- biased submatrix ------------------------------------------------------------


def contract_holds(m, view):
    r = max(rank_real(m), 1)
    total = m.size()
    zeros, ones = view.counts()
    area = view.area()
    return (
        area * area * r**3 >= total * total
        and (zeros - ones) ** 2 * r**3 >= area * area
    )


def exhaustive_biased_exists(m):
    r = max(rank_real(m), 1)
    total = m.size()
    for ra in range(1, m.n_rows + 1):
        for rows in combinations(range(m.n_rows), ra):
            for ca in range(1, m.n_cols + 1):
                for cols in combinations(range(m.n_cols), ca):
                    view = SubmatrixView(m, rows, cols)
                    if contract_holds(m, view):
                        return True
    return False


def test_biased_examples():
    m = all_ones(3, 3)
    view = find_biased_submatrix(m)
    assert view.area() == 9 and view.discrepancy() == 1

    m = BoolMatrix.from_lists([[1, 1], [1, 0]])
    view = find_biased_submatrix(m)
    assert contract_holds(m, view)
    assert exhaustive_biased_exists(m)


def test_biased_identity2_has_no_witness():
    # rank 2 forces area >= 2 and imbalance >= 0.354 * area, but every
    # rectangle of I2 with area >= 2 is perfectly balanced.
    m = identity(2)
    assert not exhaustive_biased_exists(m)
    with pytest.raises(NotFound) as info:
        find_biased_submatrix(m)
    assert info.value.exhaustive


def test_biased_rank_one_unbalanced_has_no_witness():
    # rank 1 forces the whole matrix with discrepancy 1, so any
    # non-monochromatic rank-1 matrix is a certified nonexistence case.
    m = BoolMatrix.from_strings(["10110"] * 3)
    assert rank_real(m) == 1
    assert not exhaustive_biased_exists(m)
    with pytest.raises(NotFound) as info:
        find_biased_submatrix(m)
    assert info.value.exhaustive


def test_biased_random_low_rank():
    # On rank >= 2 template matrices witnesses exist generically; when the
    # exhaustive search reports nonexistence, that verdict is double-checked
    # by the fully independent rectangle enumeration.
    rng = random.Random(28)
    found = 0
    for _ in range(40):
        k = rng.randint(4, 8)
        l = rng.randint(4, 8)
        r = rng.randint(2, 3)
        templates = [rng.randrange(1 << l) for _ in range(r)]
        m = BoolMatrix(k, l, [templates[i % r] for i in range(k)])
        if rank_real(m) < 2:
            continue
        try:
            view = find_biased_submatrix(m)
        except NotFound as info:
            assert info.exhaustive
            assert not exhaustive_biased_exists(m)
            continue
        assert contract_holds(m, view)
        found += 1
    assert found >= 20


# -- mono via dual ---------------------------------------------------------------


def test_find_mono_via_dual_with_exact_finder():
    from dualbench.approxdual import exact_dual_oracle

    rng = random.Random(29)
    done = 0
    while done < 25:
        m = random_matrix(rng, rng.randint(2, 8), rng.randint(2, 8))
        m, _, _ = dedup(m)
        try:
            view = find_mono_via_dual(m, exact_dual_oracle)
        except NotFound:
            continue
        assert view.is_monochromatic()
        done += 1


def test_find_mono_via_dual_all_ones():
    from dualbench.approxdual import exact_dual_oracle

    m = all_ones(1, 1)
    view = find_mono_via_dual(m, exact_dual_oracle)
    assert view.area() == 1


def test_find_mono_via_dual_ip_matrix():
    # the whole 4x4 inner-product matrix is already biased enough
    # (discrepancy 1/4 vs the rank-3 floor), so the dual stage sees the full
    # factor sets and the exact finder recovers a maximum rectangle
    from dualbench.approxdual import exact_dual_oracle

    m = ip_matrix(2)
    assert discrepancy(m) == Fraction(1, 4)
    view = find_mono_via_dual(m, exact_dual_oracle)
    assert view.is_monochromatic()
    assert view.area() == 4 == max_mono_exact(m).area()


def test_find_mono_via_dual_requires_dedup():
    from dualbench.approxdual import exact_dual_oracle

    with pytest.raises(PreconditionViolation):
        find_mono_via_dual(BoolMatrix.from_lists([[1, 1], [1, 1]]), exact_dual_oracle)


# -- stats, file format -----------------------------------------------------------


def test_stats_fields():
    s = stats(ip_matrix(2))
    assert s.rank_f2 == 2 and s.rank_real == 3
    assert s.zeros + s.ones == s.size == 16
    assert s.rank_f2 <= s.rank_real
    assert 0 <= s.discrepancy <= 1


def test_matrix_file_round_trip():
    rng = random.Random(30)
    for _ in range(20):
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        assert parse_matrix_text(format_matrix(m)) == m


def test_matrix_file_comments():
    text = "# comment\n2 3\n010\n# another\n111\n"
    assert parse_matrix_text(text) == BoolMatrix.from_strings(["010", "111"])


def test_matrix_file_errors():
    from dualbench.errors import FormatError

    for bad in ("", "2 2\n01\n", "1 2\n012\n", "x y\n0\n"):
        with pytest.raises(FormatError):
            parse_matrix_text(bad)
