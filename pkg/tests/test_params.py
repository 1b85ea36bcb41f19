import warnings

import pytest

from escycles.errors import ConfigError
from escycles.params import AdiabaticValidityWarning, PhysicalParams, derive_rates


def make(**kw):
    base = dict(g_r=1.0, g_s=1.0, zeta_r=1.0, zeta_s=1.0, delta_r=10.0, delta_s=10.0, kappa=1.0)
    base.update(kw)
    return PhysicalParams(**base)


def test_symmetric_parameters_are_scaled():
    spec = derive_rates(make())
    assert spec.scaled
    assert spec.gamma01 == spec.gamma10 == pytest.approx(1 / 400)


def test_direct_formula():
    spec = derive_rates(make(delta_r=20.0))
    assert not spec.scaled
    assert spec.gamma01 == pytest.approx(1 / 400)
    assert spec.gamma10 == pytest.approx(1 / 1600)


def test_detuning_scaling():
    a = derive_rates(make(delta_r=40.0))
    b = derive_rates(make(delta_r=40.0, delta_s=20.0))
    assert b.gamma01 == pytest.approx(a.gamma01 / 4)


def test_mirrored_parameters_agree():
    spec = derive_rates(make(g_s=2.0, delta_s=40.0, zeta_r=0.5, delta_r=10.0))
    assert spec.scaled


def test_time_unit():
    spec = derive_rates(make())
    assert spec.time_unit == pytest.approx(100.0)


def test_validity_warnings():
    with pytest.warns(AdiabaticValidityWarning):
        derive_rates(make(delta_s=2.0))
    with pytest.warns(AdiabaticValidityWarning):
        derive_rates(make(kappa=0.001, delta_s=100.0, delta_r=100.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        derive_rates(make(delta_s=100.0, delta_r=100.0))


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        derive_rates(make(kappa=0.0))
    with pytest.raises(ConfigError):
        derive_rates(make(delta_r=0.0))
