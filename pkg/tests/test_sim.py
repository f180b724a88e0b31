import itertools
import math

import numpy as np
import pytest
from scipy.stats import binom

from lresc import classical as cl
from lresc import gf2
from lresc import hgp as hg
from lresc import sim
from lresc.decoders.matching import MatchingDecoder


def surface(d):
    return hg.hgp(cl.repetition(d), cl.repetition(d))


MWPM = sim.DecoderConfig("mwpm")


def test_experiment_validation():
    code = surface(3)
    with pytest.raises(ValueError):
        sim.Experiment(code, "code_capacity", (0.02, 0.01), 10)
    with pytest.raises(ValueError):
        sim.Experiment(code, "code_capacity", (0.01,), 0)
    with pytest.raises(ValueError):
        sim.Experiment(code, "weighted_phenomenological", (0.01,), 10, cycles=0)
    with pytest.raises(ValueError):
        sim.Experiment(code, "nonsense", (0.01,), 10)
    with pytest.raises(ValueError):
        sim.DecoderConfig("union_find")


@pytest.mark.parametrize("kind", ["code_capacity", "weighted_phenomenological"])
def test_p_zero_no_failures(kind):
    exp = sim.Experiment(surface(3), kind, (0.0,), 50, cycles=5, window=2, decoder=MWPM)
    report = sim.run(exp)
    assert report.points[0].failures == 0
    assert all(row["failures"] == 0 for row in report.rows())
    assert sim.break_even(report) == [(0.0, 0.0, False)]


def _first_order_oracle(code, p):
    """Exact weight-2 contribution plus a rigorous bound on weight >= 3."""
    N = code.n_qubits
    dx, dz = MatchingDecoder(code.HZ, 2 * p / 3), MatchingDecoder(code.HX, 2 * p / 3)
    GX, GZ = code.logicals
    failing = 0
    for a, b in itertools.combinations(range(N), 2):
        for pa, pb in itertools.product("XYZ", repeat=2):
            x = np.zeros(N, dtype=np.uint8)
            z = np.zeros(N, dtype=np.uint8)
            for q, P in ((a, pa), (b, pb)):
                x[q] = P in "XY"
                z[q] = P in "ZY"
            rx = x ^ dx.decode(gf2.matmul(code.HZ, x)).correction
            rz = z ^ dz.decode(gf2.matmul(code.HX, z)).correction
            failing += bool(gf2.matmul(GZ, rx).any() or gf2.matmul(GX, rz).any())
    p2 = failing * (p / 3) ** 2 * (1 - p) ** (N - 2)
    tail = binom.sf(2, N, p)
    return p2, tail


def test_d3_low_p_matches_weight2_enumeration():
    code = surface(3)
    assert hg.css_parameters(code) == (13, 1, 3)
    p, trials = 0.01, 50_000
    # weight-1 errors never fail
    dx = MatchingDecoder(code.HZ)
    for q in range(13):
        e = np.zeros(13, dtype=np.uint8)
        e[q] = 1
        assert not gf2.matmul(code.logicals[1], e ^ dx.decode(gf2.matmul(code.HZ, e)).correction).any()
    p2, tail = _first_order_oracle(code, p)
    report = sim.run(sim.Experiment(code, "code_capacity", (p,), trials, seed=11, decoder=MWPM))
    rate, se = report.points[0].rate, report.points[0].std_error
    assert p2 - 3 * se <= rate <= p2 + tail + 3 * se


def test_reproducible_and_worker_independent():
    exp = sim.Experiment(surface(3), "code_capacity", (0.03, 0.06), 400, seed=5, decoder=MWPM)
    a, b = sim.run(exp).to_csv(), sim.run(exp).to_csv()
    assert a == b
    assert sim.run(exp, workers=2).to_csv() == a
    exp_bp = sim.Experiment(surface(3), "weighted_phenomenological", (0.01,), 30, seed=5, cycles=4, window=2)
    assert sim.run(exp_bp).to_csv() == sim.run(exp_bp, workers=2).to_csv()
    other = sim.Experiment(surface(3), "code_capacity", (0.03, 0.06), 400, seed=6, decoder=MWPM)
    assert other.config_hash != exp.config_hash


def test_monotone_in_p():
    grid = (0.01, 0.03, 0.06, 0.1)
    report = sim.run(sim.Experiment(surface(3), "code_capacity", grid, 5000, seed=2, decoder=MWPM))
    rates = [pt.rate for pt in report.points]
    errs = [pt.std_error for pt in report.points]
    for i in range(len(grid) - 1):
        assert rates[i + 1] >= rates[i] - 2 * math.hypot(errs[i], errs[i + 1])
    for pt in report.points:
        assert pt.failures <= pt.trials
        assert pt.std_error == pytest.approx(math.sqrt(pt.rate * (1 - pt.rate) / pt.trials))


def test_bp_osd_code_capacity_runs():
    parent = cl.concatenate(cl.ConcatSpec(cl.hadamard_family(2), 2))
    code = hg.hgp(parent, parent)
    report = sim.run(sim.Experiment(code, "code_capacity", (0.001, 0.05), 300, seed=3))
    assert report.points[0].failures <= report.points[1].failures


def _synthetic(rates, p_grid):
    exp = sim.Experiment(surface(3), "code_capacity", tuple(p_grid), 100)
    pts = [sim.GridPoint(p, 100, int(round(r * 100)), 0, 0, 100, 0.0) for p, r in zip(p_grid, rates)]
    return sim.SimReport(exp, pts)


def test_break_even_synthetic():
    grid = [0.01, 0.02, 0.04]
    assert all(below for _, _, below in sim.break_even(_synthetic([0, 0, 0], grid)))
    equal = sim.break_even(_synthetic(grid, grid))
    assert not any(below for _, _, below in equal)
    crossing = sim.break_even(_synthetic([0.0, 0.01, 0.09], grid))
    assert [b for *_, b in crossing] == [True, True, False]
    assert sim.break_even_bracket(crossing) == (0.02, 0.04)
    assert sim.break_even_bracket(equal) is None


def test_phenomenological_surface_window(tmp_path):
    exp = sim.Experiment(surface(3), "weighted_phenomenological", (0.002, 0.01), 60, seed=4, cycles=6, window=3, decoder=MWPM)
    report = sim.run(exp)
    for pt in report.points:
        assert pt.cycles_run <= 60 * 6
        assert pt.failures <= pt.trials
    csv_path, json_path = report.write(tmp_path)
    text = csv_path.read_text()
    assert text.splitlines()[0].split(",") == sim.CSV_FIELDS
    assert "wall_time" not in text and "wall_time" in json_path.read_text()
