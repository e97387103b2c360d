import math

import numpy as np
import pytest

from bernstein_orlicz import simulation as sim
from bernstein_orlicz.bracketing import FiniteClass, HalfLineClass, bracket_ladder, build_tree_chain, entropy_profile
from bernstein_orlicz.distributions import CenteredExponential, StandardNormal
from bernstein_orlicz.ep_bounds import EpBoundInput, truncation_levels
from bernstein_orlicz.orlicz import TailBound
from bernstein_orlicz.rng import uniforms


def test_clopper_pearson_edges():
    lo, hi = sim.clopper_pearson(0, 100)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.005 ** (1 / 100), rel=1e-10)
    lo, hi = sim.clopper_pearson(100, 100)
    assert hi == 1.0 and lo == pytest.approx(0.005 ** (1 / 100), rel=1e-10)


def test_clopper_pearson_symmetry_and_coverage():
    for k in (1, 7, 50):
        lo, hi = sim.clopper_pearson(k, 100)
        lo2, hi2 = sim.clopper_pearson(100 - k, 100)
        assert lo == pytest.approx(1 - hi2) and hi == pytest.approx(1 - lo2)
        assert lo < k / 100 < hi


def test_report_flags_refutation():
    vals = np.full(1000, 10.0)
    rep = sim.mc_tail_report(vals, {1.0: 1.0}, cap=lambda t: 0.1)
    assert rep.rows[0].refuted and rep.refuted and not rep.ok()
    rep = sim.mc_tail_report(vals, {1.0: 11.0})
    assert not rep.refuted and rep.ok() and rep.rows[0].count == 0


def test_report_ties_and_strict():
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    assert sim.mc_tail_report(vals, {1.0: 3.0}).rows[0].count == 2
    assert sim.mc_tail_report(vals, {1.0: 3.0}, strict=True).rows[0].count == 1


def test_report_uses_tailbound_cap():
    rep = sim.mc_tail_report(np.zeros(10), {2.0: TailBound(1.0, 0.25)})
    assert rep.rows[0].bound == 0.25


def test_expectation_row_is_one_sided():
    rep = sim.mc_tail_report(np.array([1.0, 2.0, 3.0]), {1.0: 10.0}, expectation_bound=0.0)
    assert not rep.expectation.ok
    rep = sim.mc_tail_report(np.array([1.0, 2.0, 3.0]), {1.0: 10.0}, expectation_bound=100.0)
    assert rep.expectation.ok


def test_tsv_and_plot_data():
    rep = sim.mc_tail_report(np.linspace(0, 5, 101), {0.5: 1.0, 1.0: 2.0}, expectation_bound=9.0)
    lines = rep.to_tsv().splitlines()
    assert lines[0] == "t\tthreshold\tprob_cap\tmc_freq\tci_lo\tci_hi\tstderr\trefuted"
    assert len(lines) == 4 and lines[-1].startswith("# expectation")
    plot = rep.plot_data_tsv().splitlines()
    assert plot[0] == "t\tlog_freq\tlog_bound\tlog_ci_hi" and len(plot) == 3
    assert set(rep.to_dict()) == {"replicates", "rows", "meta", "expectation"}


def test_empirical_process_by_hand():
    cls = FiniteClass([[1.0, 0.0], [0.0, 1.0]], [0.25, 0.75])
    u = np.array([[0.1, 0.2, 0.9, 0.95]])  # cells 0, 0, 1, 1
    nu = sim.empirical_process(cls, u)
    np.testing.assert_allclose(nu, [[2 * (0.5 - 0.25), 2 * (0.5 - 0.75)]])


def test_half_line_sup_matches_finite_grid_from_below():
    cfg = sim.SimulationConfig(3, 300, 40, HalfLineClass(3))
    cont = sim.simulate_sup(cfg)
    grid = sim.simulate_sup(sim.SimulationConfig(3, 300, 40, HalfLineClass(3), continuum=False))
    assert np.all(grid <= cont + 1e-12)
    assert np.mean(cont) > np.mean(grid)


def test_cell_sup_matches_brute_force():
    u = np.sort(uniforms(11, 5, 0, 4, 15), axis=1)
    m = 16
    cs = sim._cell_sup(u, m)
    for r in range(u.shape[0]):
        row = u[r]
        for k in range(m):
            v = np.concatenate([np.linspace(k / m, (k + 1) / m, 4001), row[(row >= k / m) & (row <= (k + 1) / m)],
                                row[(row >= k / m) & (row <= (k + 1) / m)] - 1e-13])
            v = v[(v >= k / m) & (v <= (k + 1) / m)]
            F = np.searchsorted(row, v, side="right") / row.size
            brute = math.sqrt(row.size) * np.max(np.abs(F - v))
            assert cs[r, k] == pytest.approx(brute, abs=1e-9)


def test_determinism_across_workers():
    outs = []
    for workers in (1, 4, 8):
        cfg = sim.SimulationConfig(20240601, 3000, 30, HalfLineClass(2), workers=workers)
        outs.append(sim.mc_tail_report(cfg, {0.5: 1.0, 1.0: 1.5}).to_tsv())
    assert outs[0] == outs[1] == outs[2]


def test_scalar_simulators():
    z = sim.simulate_scalar(StandardNormal(), 1, 20000)
    assert np.mean(z) == pytest.approx(math.sqrt(2 / math.pi), abs=0.02)
    s = sim.simulate_normalized_sum(CenteredExponential(1.0), 50, 1, 5000)
    assert np.mean(s) == pytest.approx(math.sqrt(2 / math.pi), abs=0.05)
    mx = sim.simulate_max_abs(StandardNormal(), 10, 1, 20000)
    assert np.mean(mx) == pytest.approx(1.8807156938211622, abs=0.02)


def chain_setup(n=100, S=3, replicates=60, seed=7):
    cls = HalfLineClass(S)
    levels = bracket_ladder(cls, S)
    inp = EpBoundInput(n, 1.0, entropy_profile(levels), S_max=S)
    build = build_tree_chain(cls, levels, truncation_levels(inp, S), n)
    return build, sim.SimulationConfig(seed, replicates, n, cls)


def test_pathwise_chain_check_holds():
    build, cfg = chain_setup()
    chk = sim.pathwise_chain_check(build, cfg)
    assert chk.violations == 0 and chk.worst_margin >= 0
    assert chk.checked == cfg.cls.p + cfg.cls.m


def test_pathwise_chain_check_negative_control():
    # shrinking delta a hundredfold must break the pathwise bound somewhere
    build, cfg = chain_setup(replicates=100)
    chk = sim.pathwise_chain_check(build, cfg, delta=build.delta / 100)
    assert chk.violations > 0 and chk.worst_margin < 0


def test_pathwise_check_rejects_mismatch():
    build, cfg = chain_setup()
    with pytest.raises(ValueError):
        sim.pathwise_chain_check(build, sim.SimulationConfig(1, 5, 50, cfg.cls))


def test_config_validation():
    with pytest.raises(ValueError):
        sim.SimulationConfig(1, 0, 10, HalfLineClass(1))
    with pytest.raises(ValueError):
        sim.SimulationConfig(1, 10, 10, HalfLineClass(1), t_grid=(0.0,))
    cfg = sim.SimulationConfig(1, 10, 10, HalfLineClass(1))
    assert cfg.to_dict()["class"] == {"kind": "half-line-indicators", "levels": 1}


def test_pathwise_chain_check_tenfold_shrink():
    build, cfg = chain_setup(replicates=1000, seed=20240601)
    chk = sim.pathwise_chain_check(build, cfg, delta=build.delta / 10)
    assert chk.violations > 0


def test_single_indicator_matches_binomial():
    from scipy.stats import binom
    q, n, R = 0.3, 10, 20000
    cls = FiniteClass([[1.0, 0.0]], [q, 1 - q])
    sup = sim.simulate_sup(sim.SimulationConfig(11, R, n, cls))
    k = np.arange(n + 1)
    levels = math.sqrt(n) * np.abs(k / n - q)
    for lv in np.unique(np.round(levels, 12)):
        p = binom.pmf(k[np.isclose(levels, lv)], n, q).sum()
        freq = np.mean(np.isclose(sup, lv))
        assert abs(freq - p) < 5 * math.sqrt(p * (1 - p) / R) + 1e-12
