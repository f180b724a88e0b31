import numpy as np
import pytest

from lresc import classical as cl
from lresc import gf2
from lresc import hgp as hg
from lresc import logicals as lg


def lresc(outer, c):
    parent = cl.concatenate(cl.ConcatSpec(outer, c))
    return hg.hgp(parent, parent)


def test_surface_code_logicals():
    code = hg.hgp(cl.repetition(5), cl.repetition(5))
    basis = lg.canonical_logicals(code)
    x = np.nonzero(basis.GX[0])[0]
    z = np.nonzero(basis.GZ[0])[0]
    # X runs along the top row, Z down the left column; they share the corner
    assert x.tolist() == [0, 1, 2, 3, 4]
    assert z.tolist() == [0, 5, 10, 15, 20]
    assert np.intersect1d(x, z).tolist() == [0]


def test_small_lresc_pairing_identity():
    code = lresc(cl.hadamard_family(2), 2)
    basis = lg.canonical_logicals(code)
    assert np.array_equal(basis.pairing(), np.eye(4, dtype=np.uint8))
    basis.check(code)
    # each pair meets once, inside the upper-left k' x k' block of patches
    for r in range(4):
        (q,) = np.nonzero(basis.GX[r] & basis.GZ[r])[0]
        i, j = divmod(int(q), 6)
        assert i // 2 < 2 and j // 2 < 2


def test_canonical_from_codeword_10110():
    code = lresc(cl.code_523(), 3)
    basis = lg.canonical_logicals(code)
    n2 = 15
    x1 = np.nonzero(basis.GX[0][: 15 * 15])[0]
    cols = sorted({q % n2 for q in x1})
    rows = {q // n2 for q in x1}
    assert rows == {0}
    assert sorted({c // 3 for c in cols}) == [0, 2, 3]  # support of 10110
    z1 = np.nonzero(basis.GZ[0][: 15 * 15])[0]
    assert {q % n2 for q in z1} == {0}
    assert sorted({(q // n2) // 3 for q in z1}) == [0, 2, 3]


def test_tunneling_small():
    code = lresc(cl.hadamard_family(2), 2)
    report = lg.tunneling_check(code, "Z", "horizontal", 0)
    assert report.ok and not report.empty
    for entry in report.single_patch:
        assert entry["syndrome"] and entry["confined"]
    assert all(e["syndrome_zero"] for e in report.codeword_strings)
    assert lg.tunneling_check(code, "X", "vertical", 1).ok
    # strings along the wrong axis are flagged by local checks
    assert not lg.tunneling_check(code, "Z", "vertical", 0).ok


def test_tunneling_surface_code_empty():
    code = hg.hgp(cl.repetition(5), cl.repetition(5))
    assert lg.tunneling_check(code, "Z", "horizontal", 0).empty


def test_tunneling_523_codeword_11001():
    code = lresc(cl.code_523(), 2)
    vec = lg.segment_string(code, "horizontal", 0, 0, segments=[0, 1, 4])
    assert not gf2.matmul(code.HX, vec).any()
    single = lg.segment_string(code, "horizontal", 0, 0)
    assert gf2.matmul(code.HX, single).any()
    for sector, axis in (("Z", "horizontal"), ("X", "vertical")):
        for idx in range(5):
            assert lg.tunneling_check(code, sector, axis, idx).ok


@pytest.mark.parametrize("outer", [cl.hadamard_family(2), cl.code_523(), cl.code_624()])
def test_codeword_strings_have_zero_syndrome(outer):
    code = lresc(outer, 2)
    report = lg.tunneling_check(code, "Z", "horizontal", 0)
    assert all(e["syndrome_zero"] for e in report.codeword_strings)
    assert len(report.codeword_strings) == outer.k


def test_string_stabilizers():
    for c in (1, 2, 3):
        code = lresc(cl.code_523(), c)
        z = lg.string_stabilizer(code, 0, 0, "Z")
        assert gf2.rowspace_contains(code.HZ, z.z_part) and not z.x_part.any()
        x = lg.string_stabilizer(code, 2, 0, "X")
        assert gf2.rowspace_contains(code.HX, x.x_part)
    with pytest.raises(IndexError):
        lg.string_stabilizer(code, 99, 0, "Z")


def test_contractible_loop():
    code = lresc(cl.code_523(), 2)
    loop = lg.contractible_loop(code, 1, range(2, 6))
    assert gf2.rowspace_contains(code.HX, loop.x_part)
    # the loop touches qubits in several patch rows via the long-range check
    rows = {q // 10 for q in np.nonzero(loop.x_part[:100])[0]}
    assert len({r // 2 for r in rows}) >= 2


def test_weight_search_known_distances():
    surface = hg.hgp(cl.repetition(5), cl.repetition(5))
    assert lg.logical_weight_search(surface, "X").weight == 5
    assert lg.logical_weight_search(surface, "Z").weight == 5
    small = lresc(cl.hadamard_family(2), 2)
    res = lg.logical_weight_search(small, "Z", budget=16, seed=3)
    assert res.weight == 4 and lg.is_logical(small, "Z", res.witness)
    assert lg.logical_weight_search(lresc(cl.hadamard_family(2), 4), "X").weight == 8


def test_exhaustive_bounds():
    small = lresc(cl.hadamard_family(2), 2)
    assert lg.distance_lower_bound_exhaustive(small, "X", 3)
    assert lg.distance_lower_bound_exhaustive(small, "Z", 3)
    with pytest.raises(AssertionError):
        lg.distance_lower_bound_exhaustive(small, "X", 4)
    surface = hg.hgp(cl.repetition(5), cl.repetition(5))
    assert lg.distance_lower_bound_exhaustive(surface, "Z", 4)
    assert lg.distance_lower_bound_exhaustive(surface, "X", 0)


def test_exhaustive_matches_brute_force_on_tiny_code():
    code = hg.hgp(cl.repetition(3), cl.hadamard_family(2))
    # brute force: smallest X logical over all 2^N supports up to weight 3
    n = code.n_qubits
    import itertools

    best = None
    for w in range(1, 4):
        for supp in itertools.combinations(range(n), w):
            v = np.zeros(n, dtype=np.uint8)
            v[list(supp)] = 1
            if lg.is_logical(code, "X", v):
                best = w
                break
        if best:
            break
    assert best is not None
    assert lg.distance_lower_bound_exhaustive(code, "X", best - 1)
    with pytest.raises(AssertionError):
        lg.distance_lower_bound_exhaustive(code, "X", best)
    assert lg.logical_weight_search(code, "X").weight == best
