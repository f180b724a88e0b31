import itertools

import numpy as np
import pytest

from lresc import classical as cl
from lresc import gf2
from lresc import hgp as hg
from lresc import noise as nz
from lresc.decoders import bp_osd as bo
from lresc.decoders import matching as mm
from lresc.decoders import window as wd


def lresc(outer, c):
    parent = cl.concatenate(cl.ConcatSpec(outer, c))
    return hg.hgp(parent, parent)


@pytest.fixture(scope="module")
def surface5():
    return hg.hgp(cl.repetition(5), cl.repetition(5))


@pytest.fixture(scope="module")
def code52():
    return lresc(cl.hadamard_family(2), 2)


# ---------------------------------------------------------------- noise


def test_noise_p0_and_p1(surface5):
    for kind in (nz.CODE_CAPACITY, nz.PHENOMENOLOGICAL):
        e = nz.sample_error(surface5, nz.NoiseModel(kind, 0.0), seed=1)
        assert not (e.x.any() or e.z.any() or e.flips_x.any() or e.flips_z.any())
    e = nz.sample_error(surface5, nz.NoiseModel(nz.CODE_CAPACITY, 1.0), seed=2)
    assert np.all(e.x | e.z)
    assert not (e.flips_x.any() or e.flips_z.any())
    with pytest.raises(ValueError):
        nz.NoiseModel(nz.CODE_CAPACITY, 1.5)


def test_noise_deterministic_per_seed(surface5):
    model = nz.NoiseModel(nz.PHENOMENOLOGICAL, 0.02)
    a, b = nz.sample_error(surface5, model, 7), nz.sample_error(surface5, model, 7)
    assert all(np.array_equal(u, v) for u, v in zip(vars(a).values(), vars(b).values()))


def test_code_capacity_marginals(surface5):
    p, shots = 0.05, 10**6
    e = nz.sample_errors(surface5, nz.NoiseModel(nz.CODE_CAPACITY, p), shots, seed=2024)
    q = 2 * p / 3
    sigma = np.sqrt(q * (1 - q) / shots)
    for part in (e.x, e.z):
        # pooled marginal at 3 sigma; per-qubit bands widened for 82 simultaneous tests
        assert abs(part.mean() - q) < 3 * sigma / np.sqrt(part.shape[1])
        assert np.all(np.abs(part.mean(axis=0) - q) < 4 * sigma)
    y = (e.x & e.z).mean()
    assert abs(y - p / 3) < 5 * np.sqrt(p / 3 / (shots * 41))


def test_phenomenological_rates(surface5, code52):
    for code in (surface5, code52):
        model = nz.NoiseModel(nz.PHENOMENOLOGICAL, 0.01)
        v = code.HX.sum(axis=0) + code.HZ.sum(axis=0)
        assert np.allclose(model.qubit_rates(code), v * 0.01)
        assert np.allclose(model.check_rates(code, "X"), code.HZ.sum(axis=1) * 0.01)
        assert np.allclose(nz.NoiseModel(nz.PHENOMENOLOGICAL, 0.5).qubit_rates(code), 1.0)
        ps = nz.NoiseModel(nz.PHENOMENOLOGICAL, 0.01, "per_sector")
        assert np.allclose(ps.component_rates(code, "Z"), 2 / 3 * code.HX.sum(axis=0) * 0.01)
    e = nz.sample_errors(code52, nz.NoiseModel(nz.PHENOMENOLOGICAL, 0.02), 200000, seed=4)
    w = code52.HZ.sum(axis=1)
    rates = e.flips_x.mean(axis=0)
    assert np.all(np.abs(rates - 0.02 * w) < 5 * np.sqrt(0.02 * w / 200000))


def test_logical_failure(code52):
    GX, GZ = code52.logicals
    assert nz.logical_failure(code52, code52.HX[0], code52.HZ[3]) == {"X": False, "Z": False}
    assert nz.logical_failure(code52, residual_x=GX[0]) == {"X": True}
    assert nz.logical_failure(code52, residual_z=GZ[2]) == {"Z": True}
    rng = np.random.default_rng(5)
    for _ in range(50):
        sx = gf2.matmul(rng.integers(0, 2, code52.HX.shape[0]).astype(np.uint8), code52.HX)
        sz = gf2.matmul(rng.integers(0, 2, code52.HZ.shape[0]).astype(np.uint8), code52.HZ)
        assert nz.logical_failure(code52, sx, sz) == {"X": False, "Z": False}
        assert nz.logical_failure(code52, sx ^ GX[1], sz)["X"]
    bad = np.zeros(code52.n_qubits, dtype=np.uint8)
    bad[0] = 1
    with pytest.raises(ValueError):
        nz.logical_failure(code52, residual_x=bad)


# ---------------------------------------------------------------- BP + OSD


def test_bp_zero_syndrome():
    H = cl.repetition(6).H
    out = bo.bp_decode(H, np.zeros(H.shape[0]), 0.05)
    assert out.converged and out.iterations == 0 and not out.correction.any()


def test_bp_single_errors_on_repetition():
    H = cl.repetition(6).H
    for i in range(6):
        e = np.zeros(6, dtype=np.uint8)
        e[i] = 1
        out = bo.bp_decode(H, gf2.matmul(H, e), 0.05)
        assert out.converged and np.array_equal(out.correction, e)


@pytest.mark.parametrize("sector", ["X", "Z"])
def test_weight1_on_52(code52, sector):
    H = code52.check_matrix(sector)
    stabs = code52.stabilizers(sector)
    dec = bo.BpOsdDecoder(H, 0.01)
    for i in range(code52.n_qubits):
        e = np.zeros(code52.n_qubits, dtype=np.uint8)
        e[i] = 1
        out = dec.decode(gf2.matmul(H, e))
        assert out.converged
        assert gf2.rowspace_contains(stabs, e ^ out.correction)
    opposite = code52.logical_ops("Z" if sector == "X" else "X")
    res = bo.exhaustive_weight_sweep(dec, opposite, 1)
    assert res == {"errors": 52, "failures": 0, "mismatches": 0, "osd_calls": res["osd_calls"]}


def test_osd_always_matches_syndrome():
    rng = np.random.default_rng(6)
    for trial in range(40):
        H = rng.integers(0, 2, (12, 30)).astype(np.uint8)
        e = (rng.random(30) < 0.3).astype(np.uint8)
        s = gf2.matmul(H, e)
        out = bo.BpOsdDecoder(H, 0.1, max_iters=3).decode(s)
        assert np.array_equal(gf2.matmul(H, out.correction), s)
        soft = rng.normal(size=30)
        direct = bo.osd_postprocess(H, s, soft, order=5)
        assert np.array_equal(gf2.matmul(H, direct.correction), s)
    H = np.array([[1, 1, 0], [1, 1, 0]], dtype=np.uint8)
    with pytest.raises(bo.SyndromeMismatch):
        bo.BpOsdDecoder(H, 0.1).decode([1, 0])


def test_osd_cs_picks_lightest_candidate():
    # every codeword-coset member of a tiny code is enumerable: OSD-CS with a
    # large order must find the minimum-weight solution under uniform priors
    rng = np.random.default_rng(7)
    H = cl.code_523().H
    words = [np.array(w, dtype=np.uint8) for w in cl.codewords(cl.code_523())]
    for _ in range(30):
        e = rng.integers(0, 2, 5).astype(np.uint8)
        s = gf2.matmul(H, e)
        best = min(int((e ^ w).sum()) for w in words)
        out = bo.osd_postprocess(H, s, np.zeros(5), order=5)
        assert int(out.correction.sum()) == best


def test_weight3_sweep_on_244_prefix():
    code = lresc(cl.hadamard_family(2), 4)
    dec = bo.BpOsdDecoder(code.HZ, 0.01)
    res = bo.exhaustive_weight_sweep(dec, code.logical_ops("Z"), 3, start=0, stop=1)
    assert res["errors"] == 242 * 243 // 2
    assert res["failures"] == 0 and res["mismatches"] == 0


# ---------------------------------------------------------------- matching


def test_mwpm_empty_and_single_errors(surface5):
    H = surface5.HZ
    dec = mm.MatchingDecoder(H)
    assert not dec.decode(np.zeros(H.shape[0])).correction.any()
    for i in range(surface5.n_qubits):
        e = np.zeros(surface5.n_qubits, dtype=np.uint8)
        e[i] = 1
        corr = dec.decode(gf2.matmul(H, e)).correction
        assert gf2.rowspace_contains(surface5.HX, e ^ corr)


@pytest.mark.parametrize("sector", ["X", "Z"])
def test_mwpm_corrects_weight2(surface5, sector):
    H = surface5.check_matrix(sector)
    N = surface5.n_qubits
    errs = np.zeros((N * (N - 1) // 2 + N, N), dtype=np.uint8)
    for row, sup in enumerate(itertools.chain(itertools.combinations(range(N), 1), itertools.combinations(range(N), 2))):
        errs[row, list(sup)] = 1
    corr = mm.MatchingDecoder(H).decode_batch(gf2.matmul(errs, H.T))
    opposite = surface5.logical_ops("Z" if sector == "X" else "X")
    assert not gf2.matmul(errs ^ corr, opposite.T).any()


def test_mwpm_matches_pairing_oracle(surface5):
    H = surface5.HZ
    m = H.shape[0]
    costs = mm.min_pairing_costs(H)
    dist, _ = mm.check_distances(H)
    rng = np.random.default_rng(8)
    for _ in range(40):
        defects = sorted(rng.choice(m, size=rng.integers(1, 7), replace=False).tolist())
        mask = sum(1 << d for d in defects)
        assert costs[mask] == mm.brute_force_pairing(dist, defects, m)
    py, nxd = mm.MatchingDecoder(H), mm.MatchingDecoder(H, backend="networkx")
    for _ in range(100):
        defects = rng.choice(m, size=rng.integers(1, 9), replace=False)
        s = np.zeros(m, dtype=np.uint8)
        s[defects] = 1
        mask = sum(1 << int(d) for d in defects)
        assert py.decode(s).correction.sum() == costs[mask]
        assert nxd.decode(s).correction.sum() == costs[mask]


def test_mwpm_rejects_hypergraph(code52):
    with pytest.raises(mm.NotGraphlike):
        mm.MatchingDecoder(code52.HZ)


# ---------------------------------------------------------------- sliding window


def test_window_matrix_shape():
    H = cl.repetition(4).H
    A = wd.window_matrix(H, 3)
    m, n = H.shape
    assert A.shape == (3 * m, 3 * n + 3 * m)
    assert np.array_equal(A[m : 2 * m, n : 2 * n], H)
    assert np.array_equal(A[m : 2 * m, 3 * n : 3 * n + m], np.eye(m))
    assert np.array_equal(A[m : 2 * m, 3 * n + m : 3 * n + 2 * m], np.eye(m))
    assert not A[:m, 3 * n + m :].any()
    with pytest.raises(ValueError):
        wd.SlidingWindowDecoder(H, 0, 0.01, 0.01)


def _history(H, rounds, p_data, p_meas, rng):
    m, n = H.shape
    E = np.zeros(n, dtype=np.uint8)
    out = []
    for _ in range(rounds):
        E ^= (rng.random(n) < p_data).astype(np.uint8)
        out.append(gf2.matmul(H, E) ^ (rng.random(m) < p_meas).astype(np.uint8))
    return E, out


@pytest.mark.parametrize("decoder", ["bp_osd", "mwpm"])
def test_noiseless_window_equals_per_round(surface5, decoder):
    H = surface5.HZ
    rng = np.random.default_rng(9)
    single = (bo.BpOsdDecoder(H, 0.02) if decoder == "bp_osd" else mm.MatchingDecoder(H, 0.02))
    for _ in range(5):
        E, rounds = _history(H, 6, 0.02, 0.0, rng)
        committed = np.zeros(H.shape[1], dtype=np.uint8)
        reference = []
        for s in rounds:
            c = single.decode(s ^ gf2.matmul(H, committed)).correction
            reference.append(c)
            committed ^= c
        for w in (1, 2, 3, 6):
            got = wd.sliding_window_decode(wd.SpacetimeInstance(H, w, rounds, 0.02, 0.0), decoder)
            total = np.bitwise_xor.reduce(got, axis=0)
            assert np.array_equal(total, committed)
            if w == 1:
                assert all(np.array_equal(a, b) for a, b in zip(got, reference))


@pytest.mark.parametrize("decoder", ["bp_osd", "mwpm"])
def test_full_window_is_whole_history(surface5, decoder):
    H = surface5.HZ
    rng = np.random.default_rng(10)
    R = 4
    for _ in range(5):
        _, rounds = _history(H, R, 0.02, 0.02, rng)
        inst = wd.SpacetimeInstance(H, R, rounds, 0.02, 0.02)
        got = wd.sliding_window_decode(inst, decoder)
        A = inst.extended_matrix
        priors = np.concatenate([np.full(R * H.shape[1], 0.02), np.full(R * H.shape[0], 0.02)])
        dec = bo.BpOsdDecoder(A, priors) if decoder == "bp_osd" else mm.MatchingDecoder(A, priors)
        detections = np.concatenate([rounds[0]] + [rounds[r] ^ rounds[r - 1] for r in range(1, R)])
        whole = dec.decode(detections).correction[: R * H.shape[1]].reshape(R, -1)
        assert np.array_equal(got[0], np.bitwise_xor.reduce(whole, axis=0))
        assert not any(g.any() for g in got[1:])
