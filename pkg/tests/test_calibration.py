"""Inversion chain: shift, linear fit, table lookup, sensitivity."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdr_sense.calibration import (
    DEFAULT_SOIL_TABLE,
    CalibrationModel,
    SoilTable,
    default_model,
    estimate,
    fit_linear,
    frequency_shift,
    sensitivity,
    sensitivity_profile,
)
from fdr_sense.errors import (
    DegenerateFit,
    EqualPermittivities,
    InvalidValue,
    NonMonotonePermittivity,
    NonPositiveFrequency,
)

# Hand algebra on the endpoint readings (-0.03, 3.7) and (-0.13, 19):
# slope = (19 - 3.7) / (-0.13 + 0.03) = -153, intercept = 3.7 - 4.59 = -0.89.
ENDPOINT_SLOPE = -153.0
ENDPOINT_INTERCEPT = -0.89

# Direct evaluation of the sensitivity metric on the loaded-trace endpoints:
# |0.93 - 0.83| / (0.95 * |3.7 - 19|) * 100.
SENSITIVITY_ENDPOINTS = 0.6879944960440323
# Shift that reproduces a 1.7 % per-step figure at the 25->30 % VWC step
# (delta eps = 3.2, f_u = 0.95): 1.7/100 * 0.95 * 3.2.
BACKSOLVED_SHIFT_GHZ = 0.05168
PER_STEP_AT_BACKSOLVED = 1.7105263157894735


def test_frequency_shift_values():
    assert frequency_shift(0.93, 0.96) == pytest.approx(-0.03)
    assert frequency_shift(0.83, 0.96) == pytest.approx(-0.13)
    assert frequency_shift(1.234, 1.234) == 0.0


def test_frequency_shift_validation():
    with pytest.raises(NonPositiveFrequency):
        frequency_shift(0.0, 0.96)
    with pytest.raises(NonPositiveFrequency):
        frequency_shift(0.93, -0.1)


def test_fit_endpoints_match_hand_algebra():
    model = fit_linear([(-0.03, 3.7), (-0.13, 19.0)], 0.96)
    assert model.slope == pytest.approx(ENDPOINT_SLOPE, rel=1e-9)
    assert model.intercept == pytest.approx(ENDPOINT_INTERCEPT, rel=1e-9)
    assert model.fit_residual == pytest.approx(0.0, abs=1e-9)


def test_fit_collinear_three_points():
    pts = [(-0.03, 3.7), (-0.08, 11.35), (-0.13, 19.0)]
    model = fit_linear(pts, 0.96)
    assert model.fit_residual < 1e-12


def test_fit_degenerate():
    with pytest.raises(DegenerateFit):
        fit_linear([(-0.05, 3.7), (-0.05, 19.0)], 0.96)
    with pytest.raises(DegenerateFit):
        fit_linear([(-0.05, 3.7)], 0.96)


@given(offset=st.floats(min_value=-50.0, max_value=50.0))
def test_fit_equivariance_under_eps_offset(offset):
    pts = [(-0.03, 3.7), (-0.07, 6.0), (-0.13, 19.0)]
    base = fit_linear(pts, 0.96)
    shifted = fit_linear([(df, e + offset) for df, e in pts], 0.96)
    assert shifted.slope == pytest.approx(base.slope, rel=1e-9, abs=1e-9)
    assert shifted.intercept - base.intercept == pytest.approx(offset,
                                                               rel=1e-9,
                                                               abs=1e-9)


def test_estimate_dry_endpoint():
    est = estimate(0.93, default_model())
    assert est.delta_f_ghz == pytest.approx(-0.03)
    assert est.eps_r_real == pytest.approx(3.7, abs=1e-9)
    assert est.vwc_percent == pytest.approx(0.0, abs=1e-6)
    assert not est.extrapolated


def test_estimate_wet_endpoint():
    est = estimate(0.83, default_model())
    assert est.eps_r_real == pytest.approx(19.0, abs=1e-9)
    assert est.vwc_percent == pytest.approx(30.0, abs=1e-6)
    assert not est.extrapolated


def test_estimate_zero_shift_is_extrapolated():
    est = estimate(0.96, default_model())
    assert est.delta_f_ghz == 0.0
    assert est.eps_r_real == pytest.approx(ENDPOINT_INTERCEPT, abs=1e-9)
    assert est.extrapolated
    assert est.vwc_percent == 0.0  # clamped to the dry end


def test_table_interpolation_oracle():
    # Between rows (5, 4.4) and (10, 5.8): 5 + 5 * (5.1 - 4.4) / 1.4 = 7.5.
    vwc, clamped = DEFAULT_SOIL_TABLE.vwc_from_eps(5.1)
    assert vwc == pytest.approx(7.5, abs=1e-9)
    assert not clamped


def test_table_forward_lookup():
    assert DEFAULT_SOIL_TABLE.eps_from_vwc(7.5) == pytest.approx(5.1,
                                                                 abs=1e-9)
    assert DEFAULT_SOIL_TABLE.eps_from_vwc(0.0) == 3.7
    assert DEFAULT_SOIL_TABLE.eps_from_vwc(30.0) == 19.0


def test_table_clamps_and_flags():
    vwc, clamped = DEFAULT_SOIL_TABLE.vwc_from_eps(25.0)
    assert vwc == 30.0 and clamped
    vwc, clamped = DEFAULT_SOIL_TABLE.vwc_from_eps(1.0)
    assert vwc == 0.0 and clamped


def test_table_validation():
    with pytest.raises(InvalidValue):
        SoilTable(((0.0, 3.7),))
    with pytest.raises(InvalidValue):
        SoilTable(((0.0, 3.7), (5.0, 3.7)))             # eps not increasing
    with pytest.raises(InvalidValue):
        SoilTable(((5.0, 3.7), (5.0, 4.4)))             # vwc not increasing


def test_extrapolated_iff_outside_table():
    model = default_model()
    for eps_target in (2.0, 3.69, 3.71, 10.0, 18.99, 19.01, 25.0):
        f_m = model.f_u_ghz + model.shift_at_eps(eps_target)
        est = estimate(f_m, model)
        assert est.extrapolated == (not 3.7 <= eps_target <= 19.0)


def test_round_trip_through_model_and_table():
    model = default_model()
    rng = np.random.default_rng(12)
    for eps_target in rng.uniform(3.7, 19.0, size=200):
        f_m = model.f_u_ghz + model.shift_at_eps(eps_target)
        est = estimate(f_m, model)
        assert est.eps_r_real == pytest.approx(eps_target, rel=1e-9)
        forward = DEFAULT_SOIL_TABLE.eps_from_vwc(est.vwc_percent)
        assert forward == pytest.approx(eps_target, rel=1e-9)


def test_vwc_monotone_in_measured_frequency():
    model = default_model()
    freqs = np.linspace(0.80, 1.00, 401)
    vwc = [estimate(float(f), model).vwc_percent for f in freqs]
    assert all(b <= a + 1e-12 for a, b in zip(vwc, vwc[1:]))


def test_sensitivity_endpoint_value():
    got = sensitivity(0.93, 0.83, 3.7, 19.0, 0.95)
    assert got == pytest.approx(SENSITIVITY_ENDPOINTS, rel=1e-12)
    assert got == pytest.approx(0.688, abs=1e-3)


def test_sensitivity_zero_shift():
    assert sensitivity(0.93, 0.93, 3.7, 19.0, 0.95) == 0.0


def test_sensitivity_symmetry():
    a = sensitivity(0.93, 0.83, 3.7, 19.0, 0.95)
    # exchanging the measurement points
    assert sensitivity(0.83, 0.93, 19.0, 3.7, 0.95) == a
    # negating the shift (frequencies swapped, permittivities fixed)
    assert sensitivity(0.83, 0.93, 3.7, 19.0, 0.95) == a


@given(
    f1=st.floats(min_value=0.5, max_value=2.0),
    f2=st.floats(min_value=0.5, max_value=2.0),
    e1=st.floats(min_value=1.0, max_value=40.0),
    e2=st.floats(min_value=1.0, max_value=40.0),
)
def test_sensitivity_symmetry_property(f1, f2, e1, e2):
    if e1 == e2:
        return
    assert sensitivity(f1, f2, e1, e2, 0.96) == sensitivity(f2, f1, e2, e1,
                                                            0.96)


def test_sensitivity_validation():
    with pytest.raises(EqualPermittivities):
        sensitivity(0.93, 0.83, 5.0, 5.0, 0.95)
    with pytest.raises(NonPositiveFrequency):
        sensitivity(0.0, 0.83, 3.7, 19.0, 0.95)


def test_profile_matches_single_pair():
    readings = [(0.93, 3.7), (0.83, 19.0)]
    profile = sensitivity_profile(readings, 0.95)
    assert profile == (sensitivity(0.93, 0.83, 3.7, 19.0, 0.95),)


def test_profile_backsolved_headline_step():
    # The shift that reproduces a 1.7 % per-step figure over the
    # 15.8 -> 19 permittivity step is 0.05168 GHz, i.e. 0.052 to the
    # reported precision.
    assert BACKSOLVED_SHIFT_GHZ == pytest.approx(0.052, abs=1e-3)
    exact = sensitivity_profile(
        [(0.90, 15.8), (0.90 - BACKSOLVED_SHIFT_GHZ, 19.0)], 0.95)
    assert exact[-1] == pytest.approx(1.7, rel=1e-9)
    rounded = sensitivity_profile([(0.90, 15.8), (0.90 - 0.052, 19.0)], 0.95)
    assert rounded[-1] == pytest.approx(PER_STEP_AT_BACKSOLVED, rel=1e-9)


def test_profile_constant_frequency_is_zero():
    profile = sensitivity_profile([(0.9, 3.7), (0.9, 4.4), (0.9, 5.8)], 0.95)
    assert profile == (0.0, 0.0)


def test_profile_requires_monotone_permittivity():
    with pytest.raises(NonMonotonePermittivity):
        sensitivity_profile([(0.93, 3.7), (0.9, 8.0), (0.88, 5.0)], 0.95)
    with pytest.raises(NonMonotonePermittivity):
        sensitivity_profile([(0.93, 3.7)], 0.95)


def test_model_serialization_round_trip(tmp_path):
    from fdr_sense.calibration import load_model, save_model
    model = CalibrationModel(0.96, -153.0, -0.89, 1.2e-3)
    path = tmp_path / "model.json"
    save_model(model, path)
    again = load_model(path)
    assert again == model
