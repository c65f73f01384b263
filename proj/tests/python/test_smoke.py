import json
import math
import os

import numpy as np
import pytest

import mpsrg

FIXTURES = os.environ.get("MPSRG_FIXTURES", os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"))


def test_t_iso_table():
    assert mpsrg.t_iso(1, 2) == 2
    assert mpsrg.t_iso(2, 3) == 10
    assert mpsrg.t_iso(2, 4) == 26


def test_aklt_spectrum():
    a = mpsrg.aklt()
    assert a.shape == (4, 2, 2)
    rep = mpsrg.spectral_analyze(a)
    assert rep["is_normal"]
    assert abs(rep["xi"] - 1 / math.log(3)) < 1e-9
    assert np.allclose(np.trace(rep["rho"]), 1.0)


def test_g_family_xi():
    rep = mpsrg.spectral_analyze(mpsrg.g_family(0.124353))
    assert abs(rep["xi"] - 4.0) < 1e-3


def test_ghz_not_normal():
    rep = mpsrg.spectral_analyze(mpsrg.ghz())
    assert not rep["is_normal"]
    assert rep["degeneracy_b"] == 2


def test_error_scan_decays():
    scan = mpsrg.error_scan(mpsrg.aklt(), list(range(2, 13)), M=200)
    eps = [r["epsilon_per_block"] for r in scan["rows"]]
    assert all(b < a for a, b in zip(eps, eps[1:]))
    assert 1.5 <= scan["fit"]["rate"] <= 2.5


def test_compile_and_simulate_matches_target_shape():
    a = mpsrg.g_family(mpsrg.g_for_xi(2.0))
    circuit = mpsrg.compile_circuit(a, 12, 4, "tree-rg")
    assert json.loads(circuit)["metadata"]["scheme"] == "tree-rg"
    psi = mpsrg.simulate(circuit)
    target = mpsrg.mps_state(a, 12)
    assert psi.shape == target.shape == (4096,)
    overlap = abs(np.vdot(target, psi)) / (np.linalg.norm(target) * np.linalg.norm(psi))
    assert overlap > 0.9


def test_errors_raise():
    with pytest.raises(mpsrg.MpsrgError, match="InjectivityImpossible"):
        mpsrg.compile_circuit(mpsrg.aklt(), 8, 1)
    with pytest.raises(mpsrg.MpsrgError):
        mpsrg.spectral_analyze(np.zeros((2, 2, 3)))


def test_cli_in_process():
    code, out, _ = mpsrg.run_cli(["analyze", os.path.join(FIXTURES, "aklt.json")])
    assert code == 0
    assert json.loads(out)["spectral"]["is_normal"]
    code, _, err = mpsrg.run_cli(["compile", os.path.join(FIXTURES, "aklt.json"), "--N", "8", "--q", "1"])
    assert code == 2
    assert "InjectivityImpossible" in err
