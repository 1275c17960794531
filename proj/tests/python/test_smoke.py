import math

import pytest

import sbmkit


def test_version_and_commands():
    assert sbmkit.__version__ == "0.1.0"
    assert "verify special-identity" in sbmkit.commands()


def test_stable_closed_forms():
    f = sbmkit.Family("stable", 1.0)
    assert f.phi(4.0) == pytest.approx(2.0, rel=1e-15)
    assert f.ell(7.0) == pytest.approx(1.0)
    k = sbmkit.Kernels(f, 3)
    assert k.green(1.0) == pytest.approx(1 / (2 * math.pi**2), abs=1e-6)
    assert k.jump(1.0) == pytest.approx(1 / math.pi**2, abs=1e-6)
    assert sbmkit.stable_ball_exit_time(1.0, 3, 1.0, 0.0) == pytest.approx(0.5)


def test_special_identity_mixture():
    ladder = sbmkit.Ladder(sbmkit.Family("mixture", 1.0, 0.5))
    for lam in (1e-3, 1.0, 1e6):
        assert ladder.chi(lam) * ladder.rho(lam) / lam == pytest.approx(1.0, abs=1e-4)
    V, v = ladder.potential(0.5)
    assert V > 0 and v > 0


def test_validation_errors():
    with pytest.raises(ValueError):
        sbmkit.Family("mixture", 1.0)
    with pytest.raises(ValueError):
        sbmkit.Family("stable", 2.5)
    with pytest.raises(sbmkit.ConfigError):
        sbmkit.run("phi", alhpa=1.0)
    with pytest.raises(sbmkit.ConfigError):
        sbmkit.run("verify bhp", paths_per_point="many")


def test_run_matches_cli_document():
    res = sbmkit.run("verify special-identity", family="logneg", beta=0.5, points=12)
    assert res.passed
    assert res.document["tool"] == "sbmkit"
    assert res.document["reports"][0]["constants"]["max_deviation"] < 1e-4
    assert res.csv.splitlines()[0] == "lambda,chi,rho,product_over_lambda"
    again = sbmkit.run("verify special-identity", family="logneg", beta=0.5, points=12)
    assert again.document == res.document


def test_small_simulation_is_reproducible():
    a = sbmkit.run("simulate", paths=200, dt=1e-3, seed=4, workers=1)
    b = sbmkit.run("simulate", paths=200, dt=1e-3, seed=4, workers=1)
    assert a.csv == b.csv
    assert len(a.csv.splitlines()) == 201
