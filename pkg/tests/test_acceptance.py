"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report.  Tolerances are fixed here and nowhere else.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from fdr_sense import calibration, modes
from fdr_sense.circuit import abcd_of_line, find_resonances, reflection
from fdr_sense.circuit_elements import (
    Capacitor,
    Inductor,
    LineSegment,
    parallel,
    series,
)
from fdr_sense.cli import dispatch
from fdr_sense.microstrip import (
    MicrostripLine,
    Substrate,
    characteristic_impedance,
    effective_permittivity,
    line_inductance,
)
from fdr_sense.sweep import (
    FrequencySweep,
    SweepFormat,
    SyntheticDip,
    detect_dips,
    parse_csv,
    parse_touchstone,
    synthesize_sweep,
    to_csv,
    to_touchstone,
)

GOLDEN = Path(__file__).parent / "data" / "table1_golden.json"
RO4003C = Substrate(3.55, 0.0027, 1.6)


def report(criterion: int, message: str) -> None:
    print(f"ACCEPTANCE {criterion:02d}: PASS  {message}")


def lc_resonance_ghz(l_nh: float, c_pf: float) -> float:
    return 1.0 / (2.0 * math.pi * math.sqrt(l_nh * 1e-9 * c_pf * 1e-12)) / 1e9


def test_criterion_01_mode_table_exactness():
    start = time.perf_counter()
    payload = {"modes": []}
    for d2, d1 in ((0, 0), (1, 0), (1, 1)):
        state = modes.resolve(d2, d1)
        payload["modes"].append({
            "state": state.state_string,
            "mode_index": state.mode_index,
            "bands_ghz": [[lo, hi] for lo, hi in state.bands_ghz],
            "services": sorted(s.value for s in state.services),
            "application": state.application,
        })
    rendered = (json.dumps(payload, indent=2) + "\n").encode()
    assert rendered == GOLDEN.read_bytes()
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(1, f"state table byte-identical to golden ({elapsed * 1e3:.1f} ms)")


def test_criterion_02_microstrip_oracle_equivalence():
    # Independent oracle: different arithmetic arrangement from the library.
    def oracle_eps(er, w, h):
        fill = (1.0 + 12.0 * h / w) ** -0.5
        if w < h:
            fill += 0.04 * (1.0 - w / h) ** 2
        return 0.5 * (er + 1.0) + 0.5 * (er - 1.0) * fill

    def oracle_z0(er, w, h):
        e = oracle_eps(er, w, h)
        return 60.0 * math.log(8.0 * h / w + w / (4.0 * h)) / math.sqrt(e)

    def oracle_l_nh(er, w, h, l_mm):
        return (oracle_z0(er, w, h) * math.sqrt(oracle_eps(er, w, h))
                * l_mm * 1e-3 / 299792458.0 * 1e9)

    line = MicrostripLine(RO4003C, 1.0, 0.0)
    assert effective_permittivity(line) == pytest.approx(
        oracle_eps(3.55, 1.0, 1.6), rel=1e-6)
    assert characteristic_impedance(line) == pytest.approx(
        oracle_z0(3.55, 1.0, 1.6), rel=1e-6)
    for length in (125.0, 140.0):
        got = line_inductance(MicrostripLine(RO4003C, 1.0, length))
        assert got == pytest.approx(oracle_l_nh(3.55, 1.0, 1.6, length),
                                    rel=1e-6)
    report(2, "eps_eff, Z0, and both turn inductances match the oracle "
              "to 1e-6")


def test_criterion_03_solver_vs_closed_form():
    # Warm the kernel so the timing covers solving, not compilation.
    find_resonances(series(Inductor(10.0), Capacitor(1.0)), (0.5, 3.0), 64)
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        l_nh = rng.uniform(1.0, 100.0)
        c_pf = rng.uniform(0.1, 10.0)
        f_ref = lc_resonance_ghz(l_nh, c_pf)
        rep = find_resonances(series(Inductor(l_nh), Capacitor(c_pf)),
                              (0.5 * f_ref, 2.0 * f_ref), 256)
        worst = max(worst, abs(rep.frequencies_ghz[0] - f_ref) / f_ref)
    elapsed = time.perf_counter() - start
    assert worst < 1e-4
    assert elapsed < 5.0
    report(3, f"100 random series-LC within {worst:.2e} rel "
              f"in {elapsed:.2f} s")


def test_criterion_04_scaling_law():
    rng = np.random.default_rng(99)
    for _ in range(20):
        l_nh = rng.uniform(1.0, 100.0)
        c_pf = rng.uniform(0.1, 2.5)
        f1 = find_resonances(series(Inductor(l_nh), Capacitor(c_pf)),
                             (0.01, 20.0), 4096).frequencies_ghz[0]
        f2 = find_resonances(series(Inductor(l_nh), Capacitor(4.0 * c_pf)),
                             (0.01, 20.0), 4096).frequencies_ghz[0]
        assert f2 == pytest.approx(0.5 * f1, rel=1e-4)
    report(4, "quadrupling C halves the resonance for 20 random networks")


def test_criterion_05_jcasa_parameter_file(capsys):
    assert dispatch(["jcasa", "--state", "00", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    dips = [d["f0_ghz"] for d in payload["dips"]]
    assert len(dips) == 2
    assert 0.91 <= dips[0] <= 1.01
    assert 1.48 <= dips[1] <= 1.61

    assert dispatch(["jcasa", "--state", "11", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    low = [d["f0_ghz"] for d in payload["dips"] if d["f0_ghz"] < 0.90]
    assert len(low) == 1
    with capsys.disabled():
        report(5, f"state 00 dips at {dips[0]:.3f}/{dips[1]:.3f} GHz, "
                  f"state 11 single low dip at {low[0]:.3f} GHz")


def test_criterion_06_sweep_round_trip_and_detection():
    base = synthesize_sweep(0.5, 2.0, 0.001, [
        SyntheticDip(0.96, -25.0, (0.95, 0.97)),
        SyntheticDip(1.545, -22.0, (1.53, 1.56)),
    ])
    variants = [
        parse_touchstone(to_touchstone(base, SweepFormat.TOUCHSTONE_RI)),
        parse_touchstone(to_touchstone(base, SweepFormat.TOUCHSTONE_MA)),
        parse_touchstone(to_touchstone(base, SweepFormat.TOUCHSTONE_DB)),
        parse_csv(to_csv(base)),
    ]
    for other in variants[1:]:
        np.testing.assert_allclose(other.freq_ghz, variants[0].freq_ghz,
                                   rtol=1e-9)
        np.testing.assert_allclose(other.gamma, variants[0].gamma,
                                   rtol=1e-9, atol=1e-12)

    lorentz = synthesize_sweep(0.90, 0.96, 0.001,
                               [SyntheticDip(0.930, -25.0, (0.92, 0.94))])
    dip = detect_dips(lorentz, -10.0).dips[0]
    assert dip.f0_ghz == pytest.approx(0.930, abs=5e-4)

    delta = 0.2
    shifted = FrequencySweep(base.freq_ghz + delta, base.gamma,
                             SweepFormat.SYNTHETIC)
    for a, b in zip(detect_dips(base, -10.0).dips,
                    detect_dips(shifted, -10.0).dips):
        assert b.f0_ghz - a.f0_ghz == pytest.approx(delta, abs=1e-6)
        assert b.band_lo_ghz - a.band_lo_ghz == pytest.approx(delta, abs=1e-6)
        assert b.band_hi_ghz - a.band_hi_ghz == pytest.approx(delta, abs=1e-6)
    report(6, "4-format normalization, 0.5 MHz dip recovery, translation "
              "equivariance")


def test_criterion_07_fdr_endpoint_reproduction(capsys, tmp_path):
    cases = [(0.93, 3.7, 0.0), (0.83, 19.0, 30.0)]
    results = []
    for f_dip, eps_want, vwc_want in cases:
        trace = synthesize_sweep(0.5, 2.0, 0.001, [
            SyntheticDip(f_dip, -25.0, (f_dip - 0.01, f_dip + 0.01)),
            SyntheticDip(1.45, -20.0, (1.44, 1.46)),
        ])
        path = tmp_path / f"trace_{f_dip}.s1p"
        path.write_text(to_touchstone(trace, SweepFormat.TOUCHSTONE_RI))
        assert dispatch(["sense", "--input", str(path), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["eps_r_real"] == pytest.approx(eps_want, abs=0.2)
        assert payload["vwc_percent"] == pytest.approx(vwc_want, abs=1.0)
        results.append((payload["eps_r_real"], payload["vwc_percent"]))
    with capsys.disabled():
        report(7, "endpoints -> " + ", ".join(
            f"(eps {e:.2f}, vwc {v:.2f}%)" for e, v in results))


def test_criterion_08_interpolation_oracle():
    vwc, clamped = calibration.DEFAULT_SOIL_TABLE.vwc_from_eps(5.1)
    assert vwc == pytest.approx(7.5, abs=1e-9)
    assert not clamped
    report(8, "eps 5.1 -> VWC 7.5 % within 1e-9")


def test_criterion_09_sensitivity_metric():
    got = calibration.sensitivity(0.93, 0.83, 3.7, 19.0, 0.95)
    assert got == pytest.approx(0.688, abs=1e-3)
    backsolved = 1.7 / 100.0 * 0.95 * 3.2
    assert backsolved == pytest.approx(0.052, abs=1e-3)
    profile = calibration.sensitivity_profile(
        [(0.90, 15.8), (0.90 - backsolved, 19.0)], 0.95)
    assert profile[-1] == pytest.approx(1.7, rel=1e-9)
    report(9, f"endpoint sensitivity {got:.4f} %, backsolved step "
              f"{backsolved:.5f} GHz")


def test_criterion_10_calibration_round_trip():
    model = calibration.default_model()
    table = calibration.DEFAULT_SOIL_TABLE
    rng = np.random.default_rng(31415)
    for eps_target in rng.uniform(3.7, 19.0, size=1000):
        f_m = model.f_u_ghz + model.shift_at_eps(eps_target)
        est = calibration.estimate(f_m, model, table)
        assert est.eps_r_real == pytest.approx(eps_target, rel=1e-9)
        assert table.eps_from_vwc(est.vwc_percent) == pytest.approx(
            eps_target, rel=1e-9)
    report(10, "1000 random permittivities round-trip to 1e-9")


def _random_lossless_network(rng):
    def leaf():
        kind = rng.integers(0, 3)
        if kind == 0:
            return Inductor(float(rng.uniform(0.5, 100.0)))
        if kind == 1:
            return Capacitor(float(rng.uniform(0.05, 10.0)))
        return LineSegment(MicrostripLine(
            RO4003C, float(rng.uniform(0.5, 30.0)),
            float(rng.uniform(1.0, 60.0))))

    combine = series if rng.integers(0, 2) == 0 else parallel
    return combine(*(leaf() for _ in range(int(rng.integers(2, 5)))))


def test_criterion_11_property_suites(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(5150)
    cases = 0

    # lossless one-ports are unimodular (200 cases)
    for _ in range(50):
        net = _random_lossless_network(rng)
        freqs = rng.uniform(0.2, 3.0, size=4)
        gamma = reflection(net, freqs)
        finite = np.isfinite(gamma)
        assert np.all(np.abs(np.abs(gamma[finite]) - 1.0) < 1e-9)
        cases += 4

    # lossless line ABCD determinant is 1 (200 cases)
    for _ in range(200):
        seg = MicrostripLine(RO4003C, float(rng.uniform(0.3, 30.0)),
                             float(rng.uniform(0.0, 80.0)))
        m = abcd_of_line(seg, float(rng.uniform(0.05, 5.0)))
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        assert abs(det - 1.0) < 1e-9
        cases += 1

    # fit equivariance under permittivity offsets (200 cases)
    for _ in range(200):
        pts = [(float(df), float(e)) for df, e in zip(
            rng.uniform(-0.2, -0.01, size=5), rng.uniform(2.0, 25.0, size=5))]
        if len({df for df, _ in pts}) < 2:
            continue
        offset = float(rng.uniform(-30.0, 30.0))
        base = calibration.fit_linear(pts, 0.96)
        moved = calibration.fit_linear([(df, e + offset) for df, e in pts],
                                       0.96)
        assert moved.slope == pytest.approx(base.slope, rel=1e-9, abs=1e-9)
        assert moved.intercept - base.intercept == pytest.approx(
            offset, rel=1e-9, abs=1e-9)
        cases += 1

    # sensitivity symmetry (200 cases)
    for _ in range(200):
        f1, f2 = rng.uniform(0.5, 2.0, size=2)
        e1, e2 = rng.uniform(1.0, 40.0, size=2)
        if e1 == e2:
            continue
        assert calibration.sensitivity(f1, f2, e1, e2, 0.96) == \
            calibration.sensitivity(f2, f1, e2, e1, 0.96)
        cases += 1

    # deepening a trace never removes dips (100 cases)
    base = synthesize_sweep(0.5, 2.0, 0.002, [
        SyntheticDip(0.96, -15.0, (0.95, 0.97)),
        SyntheticDip(1.545, -12.0, (1.53, 1.56)),
    ])
    n_base = len(detect_dips(base, -10.0).dips)
    for scale_db in rng.uniform(0.1, 20.0, size=100):
        deeper = FrequencySweep(base.freq_ghz,
                                base.gamma * 10.0 ** (-scale_db / 20.0),
                                SweepFormat.SYNTHETIC)
        assert len(detect_dips(deeper, -10.0).dips) >= n_base
        cases += 1

    # JSON determinism across repeated CLI invocations (100 cases)
    for f_m in rng.uniform(0.83, 0.96, size=50):
        argv = ["estimate", "--fm-ghz", f"{f_m:.6f}", "--json"]
        assert dispatch(argv) == 0
        first = capsys.readouterr().out
        assert dispatch(argv) == 0
        assert capsys.readouterr().out == first
        cases += 2

    elapsed = time.perf_counter() - start
    assert cases >= 1000
    with capsys.disabled():
        report(11, f"{cases} randomized property cases in {elapsed:.2f} s")
