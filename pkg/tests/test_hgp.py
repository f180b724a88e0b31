import itertools

import numpy as np
import pytest

from lresc import classical as cl
from lresc import gf2
from lresc import hgp as hg


def lresc(outer, c):
    parent = cl.concatenate(cl.ConcatSpec(outer, c))
    return hg.hgp(parent, parent)


def test_surface_code():
    r5 = cl.repetition(5)
    code = hg.hgp(r5, r5)
    assert hg.css_parameters(code) == (41, 1, 5)
    assert code.n_qubits == 25 + 16
    assert hg.validate(code) == []


def test_small_lresc_parameters():
    assert hg.css_parameters(lresc(cl.hadamard_family(2), 2)) == (52, 4, 4)
    code = lresc(cl.hadamard_family(2), 4)
    assert hg.css_parameters(code) == (244, 4, 8)
    assert hg.css_parameters(lresc(cl.code_624(), 2)) == (244, 4, 8)


def test_index_conventions():
    c1, c2 = cl.repetition(3), cl.hadamard_family(2)
    code = hg.hgp(c1, c2)
    n1, n2, m1, m2 = c1.n, c2.n, c1.m, c2.m
    for a, i, j in itertools.product(range(m1), range(n1), range(n2)):
        assert code.HX[a * n2 + j, i * n2 + j] == c1.H[a, i]
    for a, b, j in itertools.product(range(m1), range(m2), range(n2)):
        assert code.HX[a * n2 + j, n1 * n2 + a * m2 + b] == c2.H[b, j]
    for i, b, j in itertools.product(range(n1), range(m2), range(n2)):
        assert code.HZ[i * m2 + b, i * n2 + j] == c2.H[b, j]
    # coordinates: code1 down the rows, code2 along the columns
    assert tuple(code.qubit_coords[1 * n2 + 2]) == (c1.bit_coords[1], c2.bit_coords[2])
    assert tuple(code.qubit_coords[n1 * n2 + 1 * m2]) == (c1.check_coords[1], c2.check_coords[0])
    assert code.sublattice.tolist() == [0] * (n1 * n2) + [1] * (m1 * m2)


def _k_from_parents(c1, c2):
    kt = lambda c: c.m - gf2.rank(c.H)  # noqa: E731
    return c1.k * c2.k + kt(c1) * kt(c2)


def test_k_formula_random_parents():
    rng = np.random.default_rng(1)
    for _ in range(25):
        shapes = [tuple(rng.integers(2, 6, 2)) for _ in range(2)]
        c1, c2 = (cl.from_parity_checks(rng.integers(0, 2, s, dtype=np.uint8)) for s in shapes)
        code = hg.hgp(c1, c2)
        assert not gf2.matmul(code.HZ, code.HX.T).any()
        assert code.K == _k_from_parents(c1, c2)
        assert hg.validate(code) == []


@pytest.mark.parametrize("a,b", [(a, b) for a in range(2, 9) for b in range(2, 9) if (a + b) % 3 == 0])
def test_repetition_products(a, b):
    code = hg.hgp(cl.repetition(a), cl.repetition(b))
    assert (code.n_qubits, code.K) == (a * b + (a - 1) * (b - 1), 1)
    assert hg.css_parameters(code)[2] == min(a, b)


def test_edge_census_totals():
    assert hg.edge_census(lresc(cl.hadamard_family(2), 4)).total_edges == 924
    assert hg.edge_census(lresc(cl.code_624(), 2)).total_edges == 1056
    small = hg.edge_census(lresc(cl.hadamard_family(2), 2))
    assert small.total_edges == 180
    # each long classical edge contributes n + m = 10 quantum edges per axis
    assert small.long_range_edges == 20


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_surface_code_is_local(d):
    code = hg.hgp(cl.repetition(d), cl.repetition(d))
    for threshold in (0.5, 1, 2, 3):
        census = hg.edge_census(code, threshold)
        assert census.long_range_edges == 0
    assert hg.edge_census(code, 1).total_edges == int(code.HX.sum() + code.HZ.sum())


def test_long_range_count_monotone():
    census = [hg.edge_census(lresc(cl.code_523(), 3), t).long_range_edges for t in np.arange(0, 12, 0.5)]
    assert census == sorted(census, reverse=True)
    assert census[-1] == 0


def test_tanner_transform():
    code = lresc(cl.hadamard_family(2), 2)
    tq = hg.quantum_tanner_transform(code)
    assert (tq.n_qubits, tq.K) == (36, 4)
    assert hg.validate(tq) == []
    assert hg.edge_census(tq).long_range_edges == 21

    r2 = cl.repetition(2)
    small = hg.quantum_tanner_transform(hg.hgp(r2, r2))
    assert (small.n_qubits, small.K) == (4, 1)
    assert small.HX.tolist() == [[1, 1, 1, 1]]
    assert sorted(small.HZ.tolist()) == [[0, 0, 1, 1], [1, 1, 0, 0]]

    r5 = cl.repetition(5)
    s = hg.quantum_tanner_transform(hg.hgp(r5, r5))
    assert (s.n_qubits, s.K) == (25, 1)


@pytest.mark.parametrize("outer,c", [(cl.hadamard_family(3), 2), (cl.code_523(), 2), (cl.code_624(), 2)])
def test_tanner_transform_preserves_k(outer, c):
    code = lresc(outer, c)
    tq = hg.quantum_tanner_transform(code)
    assert tq.K == code.K
    assert hg.validate(tq) == []


def test_tanner_transform_needs_product():
    code = hg.hgp(cl.repetition(3), cl.repetition(3))
    bare = hg.CssCode(code.HX, code.HZ)
    with pytest.raises(hg.ProvenanceError):
        hg.quantum_tanner_transform(bare)


def test_validate_reports_corruption():
    code = lresc(cl.hadamard_family(2), 2)
    HX = code.HX.copy()
    HX[0, np.nonzero(HX[0])[0][0]] ^= 1
    bad = hg.CssCode(HX, code.HZ, logicals=code.logicals)
    problems = hg.validate(bad)
    assert any("anticommutes with X-check 0" in p for p in problems)
    assert hg.validate(hg.CssCode(np.zeros((0, 0)), np.zeros((0, 0)))) == []


def test_generic_logicals_paired():
    rng = np.random.default_rng(5)
    c1 = cl.from_parity_checks(rng.integers(0, 2, (4, 6), dtype=np.uint8))
    c1 = cl.from_parity_checks(np.vstack([c1.H, c1.H[0] ^ c1.H[1]]))
    code = hg.hgp(c1, c1)
    GX, GZ = code.logicals
    assert GX.shape[0] == code.K
    assert np.array_equal(gf2.matmul(GX, GZ.T), np.eye(code.K, dtype=np.uint8))
    assert hg.validate(code) == []
