import numpy as np
import pytest

from freetails import (
    FreeStableLaw,
    FreeStableParams,
    InversionConfig,
    MarchenkoPasturLaw,
    SemicircleLaw,
    G_from_phi,
    stieltjes_invert,
    uniform_grid,
)
from freetails.exceptions import MassDeficit, ValidationError
from freetails.inversion import richardson_weights, write_density_csv

from conftest import sc_cauchy


def l1_error(rec, density, lo, hi, log=False):
    x = np.geomspace(lo, hi, 200001) if log else np.linspace(lo, hi, 20001)
    return np.trapezoid(np.abs(rec.density_at(x) - density(x)), x)


def test_richardson_weights():
    eps, w = richardson_weights((1e-2, 5e-3, 2.5e-3), 2)
    assert np.allclose(w[::-1], [8 / 3, -2, 1 / 3])
    assert np.allclose(np.vander(eps, 3, increasing=True).T @ w, [1, 0, 0])


def test_config_validation():
    with pytest.raises(ValidationError):
        InversionConfig(epsilons=(1e-3, 1e-2))
    with pytest.raises(ValidationError):
        InversionConfig(epsilons=(1e-2, 5e-3), order=2)
    with pytest.raises(ValidationError):
        InversionConfig(support="complex")


def test_semicircle_round_trip():
    cfg = InversionConfig(support="real", body_max=4, tail_max=4, fit_tail=False)
    rec = stieltjes_invert(SemicircleLaw().cauchy, cfg)
    assert l1_error(rec, SemicircleLaw().density, -4, 4) < 2e-3
    assert rec.total_mass == pytest.approx(1.0, abs=2e-3)


def test_mp_round_trip():
    law = MarchenkoPasturLaw()
    rec = stieltjes_invert(law.cauchy, InversionConfig(body_max=6, tail_max=6, fit_tail=False))
    # the x**-1/2 edge at 0 is smoothed over a few eps; measure away from it
    assert l1_error(rec, law.density, 1e-2, 6, log=True) < 2e-3
    assert rec.total_mass == pytest.approx(1.0, abs=2e-3)


def test_uniform_round_trip():
    u = uniform_grid(0, 2)
    rec = stieltjes_invert(u.cauchy, InversionConfig(body_max=4, tail_max=4, fit_tail=False))
    f = lambda x: np.where((x > 0) & (x < 2), 0.5, 0.0)
    # jumps at the endpoints cost O(eps) in L1
    assert l1_error(rec, f, 0, 4) < 2e-2


def test_mass_deficit_raised():
    cfg = InversionConfig(body_max=1.0, tail_max=1.0, fit_tail=False)
    with pytest.raises(MassDeficit):
        stieltjes_invert(MarchenkoPasturLaw(1.0, 2.0).cauchy, cfg)


def test_G_from_phi_semicircle():
    z = np.array([1 + 1j, -2 + 0.1j, 0.5 + 3j])
    g = G_from_phi(lambda w: 1 / w, z, dphi=lambda w: -1 / w ** 2)
    assert np.allclose(g, sc_cauchy(z), atol=1e-10)


def test_stable_half_density_tail():
    # the alpha = 1/2 positive free stable law has density
    # sqrt(4x - 1)/(2 pi x^2) on [1/4, inf), with tail ~ x^{-1/2}/pi
    law = FreeStableLaw(FreeStableParams(0.5, 1.0))
    rec = stieltjes_invert(law.cauchy, InversionConfig(body_max=10, tail_max=1e3, n_log=200))
    x = np.array([0.5, 1.0, 3.0, 8.0])
    exact = np.sqrt(4 * x - 1) / (2 * np.pi * x ** 2)
    assert np.allclose(rec.density_at(x), exact, rtol=1e-3)
    assert rec.fitted_alpha == pytest.approx(0.5, abs=0.02)


def test_density_csv_is_reproducible(tmp_path):
    cfg = InversionConfig(body_max=4, tail_max=4, fit_tail=False)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_density_csv(stieltjes_invert(MarchenkoPasturLaw().cauchy, cfg), a)
    write_density_csv(stieltjes_invert(MarchenkoPasturLaw().cauchy, cfg), b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "x,density,tail,fitted_alpha,fitted_c"
