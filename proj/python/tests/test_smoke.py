import math

import numpy as np
import pytest

import flab


def test_nonlinearity_roundtrip():
    nl = flab.two_power(3.0, 2.0)
    assert flab.phi(nl, 0.25) == pytest.approx(0.015625)
    assert flab.phi(nl, -3.0) == pytest.approx(-9.0)
    assert flab.phi_prime(nl, 4.0) == pytest.approx(8.0)
    assert flab.psi(flab.pure_power(2.0), 1.0) == pytest.approx(1.0 / 3.0)

    u = np.linspace(-2.0, 2.0, 101)
    vals = flab.phi(nl, u)
    assert vals.shape == u.shape
    assert np.allclose(vals, -vals[::-1])  # odd

    rep = flab.verify_growth_conditions(nl, 3.0, 2.0, 10.0, 500)
    assert rep.ok and rep.c1_best > 0 and rep.c2_best > 0


def test_mesh_and_field():
    mesh = flab.make_mesh(1, [2.0], [-1.0], [64])
    assert mesh.cell_count() == 64
    f = flab.project_function(mesh, lambda x, y: math.cos(math.pi * x))
    assert abs(flab.integral(f)) < 1e-12
    assert flab.lp_norm(f, math.inf) <= 1.0


def test_solver_conserves_mass_and_contracts():
    mesh = flab.make_mesh(1, [2.0], [-1.0], [64])
    nl = flab.two_power(2.5, 1.8)
    u0 = flab.delta_like(mesh, [0.0], 0.2, 1.0)
    assert flab.integral(u0) == pytest.approx(1.0, abs=1e-12)

    cfg = flab.SolverConfig()
    cfg.t_end = 0.5
    cfg.record_count = 10
    series, final = flab.run(u0, nl, cfg, want_final=True)
    records = series.records
    assert len(records) >= 10
    masses = [r["mass"] for r in records]
    assert max(abs(m - masses[0]) for m in masses) < 1e-9
    sups = [r["linf"] for r in records]
    assert all(b <= a * (1 + 1e-8) for a, b in zip(sups, sups[1:]))
    assert final.values.shape == (64,)


def test_zkb_exponents_and_normalization():
    alpha, beta, kappa = flab.zkb_exponents(2.0, 1)
    assert alpha == pytest.approx(1.0 / 3.0)
    assert beta == pytest.approx(1.0 / 3.0)
    assert kappa == pytest.approx(1.0 / 12.0)
    c_bis = flab.zkb_normalize(2.0, 1, 1.0)
    c_exact = flab.zkb_normalize_closed_form_1d(2.0, 1.0)
    assert c_bis == pytest.approx(c_exact, rel=1e-8)

    prof = flab.make_zkb(2.0, 1, 1.0)
    assert flab.zkb_eval(prof, [0.0], 0.5) == pytest.approx(
        prof.C * 0.5 ** (-1.0 / 3.0)
    )


def test_analysis_helpers():
    assert flab.theta(2.0, 6.0, 3) == pytest.approx(1.0)
    assert flab.moser_p(2, 1.0, 2, 2.0) == pytest.approx(7.0)
    assert flab.poincare_constant_box([1.0], 1) == pytest.approx(1.0 / math.pi)

    nl = flab.pure_power(2.0)
    pred = flab.predict_rates(1.0, 1, 2.0, 2.0, 1.0, 1.0, nl, 1.0 / math.pi)
    assert pred.nonzero_mean_rate == pytest.approx(2.0 * math.pi**2)


def test_config_and_preset_surface(tmp_path):
    cfg = flab.parse_config(
        "mesh.extents = 1\n"
        "mesh.cells = 32\n"
        "nl.kind = pure-power\n"
        "nl.m = 2\n"
        "datum.kind = odd-bump\n"
        "datum.amplitude = 0.25\n"
        "solver.t_end = 1.0\n"
    )
    assert cfg.dim == 1
    echo = flab.format_config(cfg)
    assert "mesh.cells=32" in echo

    mesh = flab.make_mesh_from(cfg)
    u0 = flab.make_datum(cfg, mesh)
    series, _ = flab.run(u0, flab.make_nonlinearity(cfg), cfg.solver)
    path = str(tmp_path / "series.csv")
    flab.emit_series(series, path)
    back = flab.read_series_csv(path)
    assert len(back) == len(series)

    fit = flab.fit_power_rate(series, "linf", 0.1, 1.0)
    assert fit.slope < 0.0

    with pytest.raises(flab.ConfigError):
        flab.parse_config("nl.m1 = 0.5\n")

    assert "poincare" in flab.preset_names()
