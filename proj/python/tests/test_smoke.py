import math

import numpy as np
import pytest

import kslab


def test_steady_state_values():
    assert kslab.w_star(10, 1.0) == pytest.approx(2.0)
    assert kslab.u_star(3, 2.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        kslab.u_star(3, 0.0)


def test_mesh_endpoints():
    mesh = kslab.build_mesh(5, 10.0**5, 128, kslab.Grading.log)
    assert len(mesh) == 129
    assert mesh.s[0] == 0.0
    assert mesh.s[-1] == 10.0**5
    assert mesh.r_max == pytest.approx(10.0)
    assert np.all(np.diff(mesh.s) > 0)


def test_parameter_algebra():
    assert kslab.theta_threshold(10) == pytest.approx(4.0)
    lo, hi = kslab.p_bounds(10, 5.0)
    assert lo == pytest.approx(10.5) and hi == pytest.approx(10.5)
    q = kslab.select_params(10, 5.0)
    assert kslab.admissibility(10, q)["all"]
    assert not kslab.admissibility(10, kslab.EnergyParams(4.2, 2.0, 0.0))["all"]


def test_cutoffs():
    assert kslab.chi(-1.0) == 0.0
    assert kslab.chi(2.0) == 1.0
    assert kslab.zeta(0.1, 0.05) == 0.0
    assert kslab.k_chi() > 0.0


def test_hardy_tent():
    s = np.linspace(1e-3, 3.0, 2001)
    psi = np.clip(1.0 - np.abs(s - 1.5), 0.0, None)
    lhs, rhs, holds = kslab.hardy_check(s, psi, 2.0)
    assert holds and lhs <= rhs


def test_short_run_stays_below_steady_state():
    n = 5
    mesh = kslab.build_mesh(n, 30.0**n, 128, kslab.Grading.log)
    spec = kslab.InitialDatumSpec()
    spec.n = n
    spec.family = kslab.DatumFamily.scaled_chandrasekhar
    spec.a = 0.5
    out = kslab.simulate(mesh, spec, 1.0, output_count=5)
    assert out["status"] == "ok"
    assert out["w"].shape == (len(out["t"]), len(mesh))
    ws = np.array([kslab.w_star(n, s) for s in mesh.s])
    assert np.all(out["w"] <= ws * (1 + 1e-6) + 1e-12)
    assert np.all(np.diff(out["w"][-1]) >= -1e-12 * ws[1:])


def test_run_experiment_zero_datum(tmp_path):
    text = "[run]\nn = 5\nt_end = 2\noutput_count = 10\n[datum]\nfamily = zero\n[mesh]\nN = 128\n"
    res = kslab.run_experiment(text, str(tmp_path))
    assert res["all_asserted_pass"]
    assert res["verdict"] == "bounded"
    assert (tmp_path / "summary.json").exists()
    assert '"schema_version": 1' in res["summary_json"]


def test_unknown_key_is_rejected():
    with pytest.raises(ValueError):
        kslab.run_experiment("[run]\nn = 5\nt_ned = 3\n")
