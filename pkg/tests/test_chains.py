import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nofastforward.chains import (
    QueryTranscript,
    bottom,
    bound_F,
    chain_point,
    collision_census,
    complete_chain_D,
    erased_apply,
    erased_inverse_apply,
    family_from_tables,
    gen_family,
    hybrid_apply,
    merge_random,
    random_hash,
    repair_to_permutation,
    spi_apply,
    twisted_extend,
    twisted_verify,
)
from nofastforward.errors import DomainError


def image_counts(table):
    return np.bincount(table, minlength=table.size)


def test_family_determinism():
    a, b = gen_family(11, 5, 7), gen_family(11, 5, 7)
    np.testing.assert_array_equal(a.forward, b.forward)
    assert not np.array_equal(a.forward, gen_family(12, 5, 7).forward)


def test_one_bit_levels():
    fam = gen_family(3, 6, 1)
    for i in range(1, 7):
        assert fam.forward[i - 1].tolist() in ([0, 1], [1, 0])
        assert all(fam.apply_inverse(i, fam.apply(i, x)) == x for x in (0, 1))


def test_seed7_levels_bijective():
    fam = gen_family(7, 4, 8)
    for row in fam.forward:
        assert np.all(image_counts(row) == 1)
    for row, inv in zip(fam.forward, fam.inverse):
        np.testing.assert_array_equal(inv[row], np.arange(256))


def test_levels_are_roughly_uniform():
    # over many seeds every image of a fixed point is about equally likely
    hits = np.zeros(8)
    for seed in range(4000):
        hits[gen_family(seed, 1, 3).apply(1, 5)] += 1
    assert np.all(np.abs(hits - 500) <= 5 * math.sqrt(500 * 7 / 8))


@pytest.mark.parametrize("seed,L,n", [(-1, 2, 2), (2**64, 2, 2), (0, 0, 2), (0, 65, 2), (0, 2, 0), (0, 2, 21)])
def test_gen_family_ranges(seed, L, n):
    with pytest.raises(DomainError):
        gen_family(seed, L, n)


def test_chain_points():
    fam = gen_family(2, 8, 6, start=9)
    assert chain_point(fam, 0).value == 9
    assert chain_point(fam, 1).value == fam.apply(1, 9)
    x = 9
    for i in range(1, 6):
        x = int(fam.forward[i - 1][x])
    assert chain_point(fam, 5).value == x
    with pytest.raises(DomainError):
        chain_point(fam, 9)


@given(st.integers(0, 2**64 - 1), st.integers(1, 12), st.data())
def test_forward_iteration_transcript(seed, L, data):
    q = data.draw(st.integers(0, L))
    tr = QueryTranscript()
    chain_point(gen_family(seed, L, 5), q, transcript=tr)
    assert tr.depth == q and all(w == 1 for w in tr.widths)


def test_spi_examples(rng):
    fam = gen_family(4, 3, 5)
    for _ in range(50):
        j = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        x, r = int(rng.integers(32)), int(rng.integers(64))
        assert spi_apply(fam, j, x, spi_apply(fam, j, x, r)) == r
    assert spi_apply(fam, 1, fam.start, 0) == fam.apply(1, fam.start)
    y = int(rng.integers(32))
    assert spi_apply(fam, -2, fam.apply(2, y), 0) == y
    with pytest.raises(DomainError):
        spi_apply(fam, 0, 1, 0)


@pytest.mark.parametrize("n", range(1, 9))
def test_spi_forward_then_inverse_exhaustive(n):
    fam = gen_family(100 + n, 3, n)
    for j in (1, 2, 3):
        for x in range(1 << n):
            assert spi_apply(fam, -j, spi_apply(fam, j, x, 0), 0) == x


def test_erased_examples():
    fam = gen_family(5, 4, 3)
    c = fam.chain
    for i in range(1, 5):
        assert erased_apply(fam, i, int(c[i - 1])) == c[i]
        for x in range(8):
            if x != c[i - 1]:
                assert erased_apply(fam, i, x) == bottom(3)


def test_erased_truth_table_brute_force():
    fam = gen_family(6, 3, 3, start=5)
    xbar = [5]
    for i in range(3):
        xbar.append(int(fam.forward[i][xbar[-1]]))
    for i in range(1, 4):
        for x in range(8):
            want = xbar[i] if x == xbar[i - 1] else 8
            assert erased_apply(fam, i, x) == want
            back = xbar[i - 1] if x == xbar[i] else 8
            assert erased_inverse_apply(fam, i, x) == back


def test_dummy_word_never_collides_and_xor_involutes():
    for n in range(1, 6):
        b = bottom(n)
        assert b >= 1 << n and b & ((1 << n) - 1) == 0
        assert (3 ^ b) ^ b == 3


@pytest.mark.parametrize("n", [2, 5, 8])
def test_erased_single_support(n):
    fam = gen_family(n, 5, n)
    for i in range(1, 6):
        assert sum(erased_apply(fam, i, x) != bottom(n) for x in range(1 << n)) == 1
        assert sum(erased_inverse_apply(fam, i, x) != bottom(n) for x in range(1 << n)) == 1


def test_hybrid_examples():
    fam = gen_family(8, 4, 3)
    levels = [j for j in range(-4, 5) if j]
    for j, x, r in itertools.product(levels, range(8), (0, 5)):
        erased = r ^ (erased_apply(fam, j, x) if j > 0 else erased_inverse_apply(fam, -j, x))
        assert hybrid_apply(fam, 4, j, x, r) == erased
        assert hybrid_apply(fam, 0, j, x, r) == r
    xbar3 = int(fam.chain[2])
    assert hybrid_apply(fam, 2, 3, xbar3, 6) == 6


@given(st.integers(0, 2**32), st.integers(1, 6), st.data())
def test_hybrid_nesting(seed, L, data):
    fam = gen_family(seed, L, 4)
    a = data.draw(st.integers(0, L))
    b = data.draw(st.integers(0, L))
    for j in range(1, min(a, b) + 1):
        for s in (j, -j):
            for x in range(16):
                assert hybrid_apply(fam, a, s, x, 0) == hybrid_apply(fam, b, s, x, 0)


def test_merge_examples():
    fam, rnd = gen_family(1, 4, 6), gen_family(2, 4, 6)
    m = merge_random(fam, rnd)
    c = fam.chain
    for i in range(1, 5):
        assert m.apply(i, int(c[i - 1])) == c[i]
        for x in range(64):
            if x != c[i - 1]:
                assert m.apply(i, x) == rnd.apply(i, x)


@pytest.mark.parametrize("n", range(1, 9))
def test_collision_census_exhaustive(n):
    for seed in range(10):
        fam, rnd = gen_family(seed, 5, n), gen_family(seed + 99, 5, n)
        m = merge_random(fam, rnd)
        census = collision_census(m)
        for i in range(1, 6):
            expect = int(rnd.apply(i, int(fam.chain[i - 1])) != fam.chain[i])
            assert census[i - 1] == expect
            counts = image_counts(np.asarray(m.tables[i - 1]))
            assert counts.max() <= 2


def test_repair_no_collision_case():
    fam = gen_family(3, 3, 4)
    m = merge_random(fam, fam)
    rep = repair_to_permutation(m)
    np.testing.assert_array_equal(rep.forward, fam.forward)


def test_repair_bijective_many_seeds():
    for seed in range(100):
        fam, rnd = gen_family(seed, 4, 6), gen_family(seed + 1000, 4, 6)
        m = merge_random(fam, rnd)
        rep = repair_to_permutation(m)
        assert rep.is_bijective()
        c = fam.chain
        for i in range(1, 5):
            assert rep.apply(i, int(c[i - 1])) == c[i]
            src, _ = m.collision_points(i)
            diff = np.flatnonzero(np.asarray(rep.forward[i - 1]) != np.asarray(m.tables[i - 1]))
            assert set(diff.tolist()) <= {src}


def test_family_from_tables_rejects_odd_width():
    with pytest.raises(DomainError):
        family_from_tables([[0, 2, 1]])


def test_twisted_extend_examples():
    h = random_hash(1, 8)
    assert twisted_extend(h, 17, 0).elements == (17,)
    assert twisted_extend(h, 17, 1)[1] == h[17]
    c = twisted_extend(h, 17, 6)
    prev2 = 0
    for i in range(1, 7):
        assert c[i] == h[c[i - 1]] ^ prev2
        prev2 = c[i - 1]


def test_twisted_extend_callable_matches_table():
    h = random_hash(5, 10)
    assert twisted_extend(lambda x: h[x], 3, 40) == twisted_extend(h, 3, 40)


@given(st.integers(0, 2**32), st.integers(0, 255), st.integers(0, 60))
def test_twisted_determinism(seed, x0, s):
    h = random_hash(seed, 8)
    assert twisted_extend(h, x0, s) == twisted_extend(h, x0, s)
    assert twisted_extend(h, x0, s).violations(h) == []


def test_twisted_verify():
    h = random_hash(2, 10)
    c = twisted_extend(h, 77, 9)
    assert twisted_verify(h, 77, c[8], c[9], 8)
    assert not twisted_verify(h, 77, c[8], c[9] ^ 1, 8)


def test_twisted_verify_random_triples_rejected():
    rng = np.random.default_rng(0)
    h = random_hash(3, 16)
    hits = 0
    for _ in range(10_000):
        hits += twisted_verify(h, 5, int(rng.integers(1 << 16)), int(rng.integers(1 << 16)), 4)
    assert hits / 10_000 <= 2**-14


@given(st.integers(0, 2**32), st.integers(4, 16), st.integers(1, 16), st.data())
def test_completion_honest(seed, n, q, data):
    h = random_hash(seed, n)
    x0 = data.draw(st.integers(0, (1 << n) - 1))
    c = twisted_extend(h, x0, 2 * q + 1)
    out, tr, hq = complete_chain_D(h, x0, c[q], c[q + 1], q)
    assert out == c
    assert hq == h[c[q]]
    assert out.violations(h, {c[q]: hq}) == []
    assert tr.depth == q and tr.widths == [2] * q


def test_completion_q1():
    h = random_hash(9, 6)
    c = twisted_extend(h, 4, 3)
    out, tr, _ = complete_chain_D(h, 4, c[1], c[2], 1)
    assert out.elements == c.elements and len(out.elements) == 4
    assert tr.depth == 1 and tr.to_json_dict()["layers"] == [[4, c[2]]]


def test_completion_dishonest_breaks_only_at_q():
    h = random_hash(4, 8)
    c = twisted_extend(h, 1, 9)
    out, _, hq = complete_chain_D(h, 1, c[4], c[5] ^ 3, 4)
    assert hq != h[c[4]]
    assert set(out.violations(h)) <= {5}


def test_bound_F_examples():
    assert bound_F(1, 1, 2**60) < 1e-14
    Y = 2**20
    for k in range(1, 8):
        for q in range(1, 8):
            assert bound_F(k + 1, q, Y) >= bound_F(k, q, Y)
            assert bound_F(k, q + 1, Y) >= bound_F(k, q, Y)
    mpmath.mp.dps = 50
    k, q, Yv = mpmath.mpf(4), mpmath.mpf(8), mpmath.mpf(2) ** 20
    e = mpmath.e
    ref = (
        q * e * k * mpmath.sqrt(5 * k * q * (k * q + 1) / Yv)
        + e * (q + 2) * mpmath.sqrt(5 * (q + 2) * (q + 3) / Yv)
        + mpmath.sqrt((q + 2) / Yv)
    ) ** 2
    assert bound_F(4, 8, 2**20) == pytest.approx(float(ref), rel=1e-13)


def test_bound_F_scaling_holds_away_from_smallest_cell():
    Y = 2**20
    ratios = {(k, q): bound_F(k, 2 * q, Y) * Y / (k**4 * q**4) for k in range(1, 65) for q in range(1, 65)}
    assert all(v <= 1e4 for (k, q), v in ratios.items() if (k, q) != (1, 1))


def test_bound_F_scaling_full_grid():
    """F(k,2q)|Y| <= 1e4 k^4 q^4 on the whole k, q <= 64 grid, as stated."""
    Y = 2**20
    worst = max(bound_F(k, 2 * q, Y) * Y / (k**4 * q**4) for k in range(1, 65) for q in range(1, 65))
    assert worst <= 1e4


def test_transcript_json():
    tr = QueryTranscript()
    tr.add_layer([(1, 5)])
    tr.add_layer([3, 4])
    assert tr.to_json_dict() == {"layers": [[[1, 5]], [3, 4]]}
    assert tr.total_queries == 3


def test_family_json():
    d = gen_family(3, 4, 6).to_json_dict()
    assert d["seed"] == 3 and d["L"] == 4 and d["n"] == 6 and len(d["points"]) == 5
