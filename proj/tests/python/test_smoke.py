"""Smoke tests for the python bindings."""

import cmath
import math
import os

import pytest

import _twistlat as tl


def config_path(name: str) -> str:
    base = os.environ.get("TWISTLAT_CONFIGS", "configs")
    return os.path.join(base, name)


def test_special_functions():
    assert abs(tl.digamma(1.0 + 0j) + 0.5772156649015329) < 1e-12
    assert abs(tl.zeta(2.0 + 0j) - math.pi**2 / 6) < 1e-12
    assert abs(tl.polylog(0j, 0.25 + 0j) - 1.0 / 3.0) < 1e-12
    assert abs(tl.lerch_phi(0j, 2 + 0j, 0.7 + 0j) - 0.7 ** (-2)) < 1e-12


def test_rank4_example_constants():
    s = tl.Session(tl.example_61_json(), seed=7)
    assert s.rank == 4
    assert s.nilpotency_index == 2
    c = s.constants([1, 0, 0, 0], [0, 0, 1, 0])
    assert abs(c["C"] - cmath.exp(1j * math.pi / 6)) < 1e-10
    assert abs(c["B"] - cmath.exp(-1j * math.pi / 12)) < 1e-10
    assert c["B_oracle_residual"] < 1e-6
    c2 = s.constants([1, 0, 0, 0], [0, 0, 0, 1])
    assert abs(c2["C"] + 1.0) < 1e-10


def test_rank3_example_constants():
    s = tl.Session(tl.example_62_json(), seed=7)
    c = s.constants([0, 0, 1], [1, 0, 0])
    assert abs(c["C"] - cmath.exp(-1j * math.pi / 3)) < 1e-10
    assert abs(s.constants([0, 0, 1], [0, 1, 0])["C"] + 1.0) < 1e-10


def test_epsilon_and_eta():
    s = tl.Session(tl.example_61_json(), seed=7)
    assert s.epsilon([0, 0, 0, 1], [1, 0, 0, 0]) == -1
    assert s.epsilon([1, 0, 0, 0], [0, 0, 0, 1]) == 1
    assert s.eta([1, 0, 0, 0]) == 1


def test_verify_group_suite():
    s = tl.Session(tl.hyperbolic_rank2_json(), seed=7)
    out = s.verify("group")
    assert out["pass"]
    names = {r["name"] for suite in out["suites"] for r in suite["records"]}
    assert "associativity" in names


def test_fock_summary():
    s = tl.Session(tl.example_62_json(), seed=7)
    info = s.fock_summary()
    assert info["basis_size"] > 100


def test_bad_input_raises():
    with pytest.raises(tl.TwistlatError):
        tl.Session("{}", seed=1)


def test_config_files_load():
    path = config_path("example-6.1.json")
    if not os.path.exists(path):
        pytest.skip("configs not available")
    s = tl.Session.from_file(path, seed=7)
    assert s.rank == 4
