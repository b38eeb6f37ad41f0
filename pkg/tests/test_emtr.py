import math
import warnings

import numpy as np
import pytest

from emtrloc import emtr, netmodel as nm, signals as sg, solver, store
from emtrloc.netmodel import LineParams, Position

LOSSLESS = LineParams(0.0, 1e-6, 0.0, 1.15e-11)
DT = 1e-7


def coarse(net):
    return nm.make_guess_grid(net, 1000.0)


def curve(values, seg="L1"):
    pos = tuple(Position(seg, 100.0 * (k + 1)) for k in range(len(values)))
    return emtr.EnergyCurve(pos, np.asarray(values, dtype=float))


@pytest.fixture(scope="module")
def single_db(single_net):
    u, desc = emtr.excitation("impulse", 20_000, DT)
    return emtr.precompute_db(single_net, coarse(single_net), u, descriptor=desc)


def test_classic_scaling_invariance(single_net, single_u0):
    grid, fgrid = coarse(single_net), emtr.energy_grid(DT, len(single_u0), 0.01)
    a = emtr.locate_classic(single_net, single_u0, grid, fgrid)
    b = emtr.locate_classic(single_net, single_u0.scaled(-37.0), grid, fgrid)
    assert a.located == b.located == Position("L1", 8000.0)
    np.testing.assert_allclose(a.energy_curve.normalized, b.energy_curve.normalized, rtol=1e-12)
    assert a.method == "classic"


def test_direct_equals_classic_lossless():
    net = nm.single_line(10e3, LOSSLESS)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", solver.TransientWarning)
        u0 = solver.simulate_fault_transient(net, nm.FaultSpec("L1", 3000.0), DT, 2e-3)
    grid, fgrid = coarse(net), emtr.energy_grid(DT, len(u0), 0.01)
    c = emtr.locate_classic(net, u0, grid, fgrid)
    d = emtr.locate_direct(net, u0, grid, fgrid)
    assert np.max(np.abs(c.energy_curve.normalized - d.energy_curve.normalized)) < 1e-6
    assert c.located == d.located == Position("L1", 3000.0)


def test_matched_lossless_line_is_degenerate():
    net = nm.single_line(10e3, LOSSLESS, z_head=None, z_tail=None)
    u0 = sg.lightning_impulse(5000, DT)
    with pytest.warns(emtr.DegenerateCurveWarning), pytest.warns(emtr.MultiMaxWarning):
        res = emtr.locate_direct(net, u0, coarse(net), emtr.energy_grid(DT, 5000, 2e-3))
    assert res.degenerate
    assert res.located == Position("L1", 1000.0)
    e = res.energy_curve.energies
    assert np.ptp(e) < 1e-9 * e.max()


def test_db_cardinality_and_provenance(single_db, single_net):
    assert len(single_db) == 9
    assert single_db.n_samples == 20_000
    assert single_db.fingerprint == single_net.fingerprint()
    assert single_db.provenance["excitation"]["kind"] == "impulse"
    assert single_db.provenance["source_impedance_ohms"] == 100e3


def test_db_determinism(single_net, single_db):
    u, desc = emtr.excitation("impulse", 20_000, DT)
    again = emtr.precompute_db(single_net, coarse(single_net), u, descriptor=desc)
    assert store.dumps_db(again) == store.dumps_db(single_db)


def test_true_fault_entry_has_max_energy(single_db, single_u0):
    res = emtr.locate_convolution(single_db, single_u0)
    assert res.located == Position("L1", 8000.0)
    assert res.contrast_ratio > 1


def test_convolution_energy_matches_toolkit(single_db, single_u0):
    u0 = single_u0.head(3000)
    fast = emtr.convolution_energies(single_db, u0)
    for k in (0, 4, 8):
        ref = sg.energy(sg.convolve(sg.SignalTrace(single_db.traces[k], DT), u0))
        assert fast[k] == pytest.approx(ref, rel=1e-10)


def test_convolution_scaling_invariance(single_db, single_u0):
    a = emtr.locate_convolution(single_db, single_u0)
    b = emtr.locate_convolution(single_db, single_u0.scaled(1e-3))
    assert a.located == b.located
    np.testing.assert_allclose(a.energy_curve.normalized, b.energy_curve.normalized, rtol=1e-10)


def test_db_excitation_scaling_invariance(single_net, single_u0):
    grid = coarse(single_net)
    u = sg.lightning_impulse(20_000, DT)
    a = emtr.locate_convolution(emtr.precompute_db(single_net, grid, u), single_u0)
    b = emtr.locate_convolution(emtr.precompute_db(single_net, grid, u.scaled(4.0)), single_u0)
    assert a.located == b.located
    np.testing.assert_allclose(a.energy_curve.normalized, b.energy_curve.normalized, rtol=1e-10)


def test_locate_convolution_errors(single_db, single_u0, t_net):
    with pytest.raises(ValueError, match="dt mismatch"):
        emtr.locate_convolution(single_db, sg.SignalTrace(single_u0.samples, 2e-7))
    with pytest.warns(emtr.FingerprintWarning):
        emtr.locate_convolution(single_db, single_u0, t_net.fingerprint())


def test_precompute_errors(single_net):
    grid = coarse(single_net)
    with pytest.raises(ValueError, match="zero"):
        emtr.precompute_db(single_net, grid, sg.SignalTrace(np.zeros(10), DT))
    with pytest.raises(ValueError, match="empty"):
        emtr.precompute_db(single_net, nm.GuessGrid((), 1000.0), sg.lightning_impulse(10, DT))


def test_contrast_ratio_examples():
    with pytest.warns(emtr.DegenerateCurveWarning):
        assert emtr.contrast_ratio(curve([2.0] * 5)) == 1.0
    eps = 1e-3
    assert emtr.contrast_ratio(curve([eps, eps, 1.0, eps, eps])) == pytest.approx(1 / eps)
    assert emtr.contrast_ratio(curve([1.0, 3.0, 2.0, 0.0])) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        emtr.contrast_ratio(curve([1.0, 2.0]))


def test_energy_curve_invariants(tmp_path):
    c = curve([1.0, 4.0, 2.0])
    assert c.norm == 4.0
    assert c.normalized.max() == 1.0
    with pytest.raises(ValueError):
        curve([1.0, -1.0, 2.0])
    c.write_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "segment,distance_m,energy,normalized"
    assert lines[2] == "L1,200.0,4.0,1.0"


def test_tie_break_smallest_key():
    pos = (Position("T1", 500.0), Position("T2", 100.0), Position("T1", 1500.0))
    c = emtr.EnergyCurve(pos, np.array([1.0, 5.0, 5.0]))
    with pytest.warns(emtr.MultiMaxWarning):
        assert c.argmax() == 2


def test_min_signal_length_estimate():
    c = nm.DEFAULT_LINE.wave_speed
    assert c == pytest.approx(2.95e8, rel=0.01)
    est = emtr.min_signal_length_estimate(nm.single_line(10e3))
    assert est == pytest.approx(25 * 10e3 / c, rel=1e-12)
    assert est == pytest.approx(0.85e-3, rel=0.01)
    assert emtr.min_signal_length_estimate(nm.single_line(20e3)) == pytest.approx(2 * est, rel=1e-12)
    t = nm.t_network()
    doubled = nm.t_network({k: 2 * v for k, v in nm.T_NETWORK_LENGTHS.items()})
    assert emtr.min_signal_length_estimate(doubled) == pytest.approx(2 * emtr.min_signal_length_estimate(t))
    assert emtr.min_signal_length_estimate(t) <= 2e-3


def test_excitation_kinds():
    for kind in ("impulse", "ac", "noise"):
        trace, desc = emtr.excitation(kind, 100, DT)
        assert len(trace) == 100 and desc["kind"] == kind
    ac, desc = emtr.excitation("ac", 100, DT)
    assert ac.samples[0] == pytest.approx(1.0)
    assert desc["phase"] == pytest.approx(math.pi / 2)
    a, _ = emtr.excitation("noise", 100, DT, seed=7)
    b, _ = emtr.excitation("noise", 100, DT, seed=7)
    np.testing.assert_array_equal(a.samples, b.samples)
    with pytest.raises(ValueError):
        emtr.excitation("square", 100, DT)
