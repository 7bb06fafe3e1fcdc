import json
import math

import pytest

import lattice_lab as ll

REF = dict(alpha=1.0, gamma0=0.1, gamma1=0.5, p_c=1.0)


def test_version():
    assert ll.__version__.count(".") == 2


def test_derived_parameters():
    d = ll.derive_params(ll.LatticeParams(**REF))
    assert d.beta == pytest.approx(5.0 / 6.0, rel=1e-15)
    assert d.q == pytest.approx(1.2, rel=1e-15)
    assert d.Z == pytest.approx(2.10418331510930828, rel=1e-14)
    assert d.regime == ll.Regime.NormalDiffusion
    assert ll.stationary_second_moment(d) == pytest.approx(6.0 / 7.0, rel=1e-14)
    assert ll.normalization_Z(ll.LatticeParams(**REF))["relative_difference"] < 1e-10


def test_validation_errors():
    with pytest.raises(ll.ValidationError, match="gamma1"):
        ll.LatticeParams(1.0, 0.1, -1.0, 1.0)
    with pytest.raises(ValueError, match="physical range"):
        ll.derive_params(ll.LatticeParams(1.0, 1.5, 0.5, 1.0))


def test_evolve_from_stationary_state_stays_put():
    params = ll.LatticeParams(**REF)
    d = ll.derive_params(params)
    grid = ll.Grid(50.0, 1000)
    start = ll.stationary_state(grid, d)
    result = ll.evolve(start, params, ll.SchemeConfig(), t_end=5.0, sample_every=100)
    drift = sum(abs(a - b) for a, b in zip(result.final_state.values, start.values)) * grid.dp
    assert drift < 1e-10
    assert result.final_state.mass() == pytest.approx(1.0, abs=1e-12)
    assert result.records[-1].t == pytest.approx(5.0)


def test_symmetry_checks():
    params = ll.LatticeParams(**REF)
    d = ll.derive_params(params)
    gen = ll.GeneratorSpec.canonical(d)
    p, w = ll.flow_map(2.0, ll.tsallis_density(2.0, d), 1.0, gen)
    assert w == pytest.approx(ll.tsallis_density(p, d), rel=1e-12)
    a = ll.extract_A(3.0, 1.0, ll.tsallis_density(3.0, d), params, gen)
    assert a.a2 == pytest.approx(ll.closed_A2(3.0, params, -2.0), rel=1e-10)


def test_analysis():
    params = ll.LatticeParams(**REF)
    d = ll.derive_params(params)
    r = ll.variation_integrals(ll.stationary_state(ll.Grid(50.0, 4000), d), params, d)
    assert r.i_phi == pytest.approx(1.0, abs=1e-6)
    assert r.i_scale == pytest.approx(-1.0, abs=1e-6)
    fit = ll.tail_exponent(ll.stationary_state(ll.Grid(1e4, 100000), d))
    assert fit.tail_class == "power_law"
    assert fit.k_hat == pytest.approx(5.0, rel=0.02)


def test_run_params(tmp_path):
    cfg = json.dumps({"params": REF})
    out = ll.run("params", cfg, str(tmp_path), 1)
    assert out["exit_code"] == 0
    printed = json.loads(out["stdout"])
    assert math.isclose(printed["derived"]["nu"], 1.9340400542152918, rel_tol=1e-13)
    meta = json.loads((tmp_path / out["run_dir"].split("/")[-1] / "metadata.json").read_text())
    assert meta["command"] == "params"


def test_run_reports_validation_failure(tmp_path):
    out = ll.run("sweep", json.dumps({"params": REF}), str(tmp_path), 1)
    assert out["exit_code"] == 1
    assert "sweep" in out["stderr"]
