"""Equivalent-circuit engine: impedance/reflection evaluation over
frequency, resonance search, and builders for the spiral-resonator models.

Networks are immutable trees from ``circuit_elements``; evaluation compiles
each tree once to an opcode tape (see ``_tape``) and replays it on the
selected backend.  Line segments are lossless; their ABCD parameters come
from the ``microstrip`` closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import microstrip
from ._refine import parabolic_vertex
from ._tape import compile_network
from .backends import evaluate
from .circuit_elements import (
    Capacitor,
    DiodeModel,
    Element,
    Inductor,
    LineSegment,
    series,
)
from .errors import (
    InvalidValue,
    NonPositiveFrequency,
    NoResonanceFound,
)
from .microstrip import FormulaFidelity, MicrostripLine

__all__ = [
    "ResonanceMethod",
    "ResonanceReport",
    "impedance",
    "reflection",
    "abcd_of_line",
    "find_resonances",
    "build_3csr",
    "build_3rcsr",
    "build_jcasa",
    "turn_inductances",
    "DEFAULT_TURN_LENGTHS_MM",
]

# Smallest and largest spiral turns are 125 mm and 140 mm; the middle turn
# is a free parameter defaulted to the midpoint (not a measured value).
DEFAULT_TURN_LENGTHS_MM = (125.0, 132.5, 140.0)

BISECTION_TOL_GHZ = 1e-6
DIP_THRESHOLD_DB = -10.0
_FLOOR_MAGNITUDE = 1e-30


class ResonanceMethod(Enum):
    REACTANCE_ZERO = "reactance"
    REFLECTION_DIP = "dip"


@dataclass(frozen=True)
class ResonanceReport:
    frequencies_ghz: tuple[float, ...]
    method: ResonanceMethod
    reference_ohm: float = 50.0


def _validated_freqs_ghz(f_ghz) -> tuple[np.ndarray, bool]:
    arr = np.asarray(f_ghz, dtype=np.float64)
    flat = np.atleast_1d(arr)
    if flat.size == 0 or not np.all(np.isfinite(flat)) or np.any(flat <= 0.0):
        raise NonPositiveFrequency(
            "evaluation frequencies must be finite and > 0 GHz")
    return arr, arr.ndim == 0


def impedance(net: Element, f_ghz):
    """Complex input impedance of the one-port at f_ghz (scalar or array)."""
    arr, scalar = _validated_freqs_ghz(f_ghz)
    tape = compile_network(net)
    z = evaluate(tape, np.atleast_1d(arr).ravel() * 1e9)
    if scalar:
        return complex(z[0])
    return z.reshape(arr.shape)


def reflection(net: Element, f_ghz, z_ref_ohm: float = 50.0):
    """Reflection coefficient (Z - Zref) / (Z + Zref)."""
    if not (math.isfinite(z_ref_ohm) and z_ref_ohm > 0.0):
        raise InvalidValue(f"reference impedance must be > 0, got {z_ref_ohm}")
    z = impedance(net, f_ghz)
    return (z - z_ref_ohm) / (z + z_ref_ohm)


def abcd_of_line(
    line: MicrostripLine,
    f_ghz,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> np.ndarray:
    """ABCD matrix of a lossless line segment, shape (2, 2) for scalar
    frequency or (..., 2, 2) for arrays.  Determinant is 1 by construction.
    """
    arr, scalar = _validated_freqs_ghz(f_ghz)
    z0 = microstrip.characteristic_impedance(line, fidelity)
    delay = microstrip.propagation_delay_s(line, fidelity)
    theta = 2.0 * np.pi * (np.atleast_1d(arr) * 1e9) * delay
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    abcd = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    abcd[..., 0, 0] = cos_t
    abcd[..., 0, 1] = 1j * z0 * sin_t
    abcd[..., 1, 0] = 1j * sin_t / z0
    abcd[..., 1, 1] = cos_t
    if scalar:
        return abcd[0]
    return abcd.reshape(arr.shape + (2, 2))


def _gamma_db(z: np.ndarray, z_ref: float) -> np.ndarray:
    gamma = (z - z_ref) / (z + z_ref)
    return 20.0 * np.log10(np.maximum(np.abs(gamma), _FLOOR_MAGNITUDE))


def _bisect_reactance_zeros(
    tape, lo: np.ndarray, hi: np.ndarray, x_lo: np.ndarray
) -> np.ndarray:
    """Vector bisection of Im Z sign changes down to BISECTION_TOL_GHZ."""
    lo = lo.copy()
    hi = hi.copy()
    x_lo = x_lo.copy()
    while np.any(hi - lo > BISECTION_TOL_GHZ):
        mid = 0.5 * (lo + hi)
        x_mid = evaluate(tape, mid * 1e9).imag
        left = x_lo * x_mid <= 0.0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        x_lo = np.where(left, x_lo, x_mid)
    return 0.5 * (lo + hi)


def _merge_close(
    freqs: Sequence[float], scores: Sequence[float], min_gap_ghz: float
) -> list[float]:
    """Collapse entries closer than min_gap_ghz, keeping the best score
    (lower wins) per cluster.  Input must be sorted ascending."""
    merged: list[tuple[float, float]] = []
    for f, s in zip(freqs, scores):
        if merged and f - merged[-1][0] < min_gap_ghz:
            if s < merged[-1][1]:
                merged[-1] = (f, s)
        else:
            merged.append((f, s))
    return [f for f, _ in merged]


def find_resonances(
    net: Element,
    span: tuple[float, float],
    grid_points: int = 1001,
    method: ResonanceMethod = ResonanceMethod.REACTANCE_ZERO,
    z_ref_ohm: float = 50.0,
    dip_threshold_db: float = DIP_THRESHOLD_DB,
) -> ResonanceReport:
    """Locate resonances of the one-port inside span = (f_lo, f_hi) GHz.

    REACTANCE_ZERO brackets sign changes of Im Z on the scan grid and
    refines each by bisection; brackets that converge onto a reactance pole
    instead of a zero are discarded.  REFLECTION_DIP takes strict local
    minima of |Gamma| in dB below dip_threshold_db and refines them by
    three-point parabolic interpolation.  Results are ascending and merged
    when closer than two grid steps.
    """
    f_lo, f_hi = float(span[0]), float(span[1])
    if not (math.isfinite(f_lo) and math.isfinite(f_hi) and 0.0 < f_lo < f_hi):
        raise NonPositiveFrequency(
            f"span must satisfy 0 < f_lo < f_hi, got ({f_lo}, {f_hi})")
    if grid_points < 16:
        raise InvalidValue(f"grid_points must be >= 16, got {grid_points}")

    tape = compile_network(net)
    grid = np.linspace(f_lo, f_hi, grid_points)
    step = grid[1] - grid[0]
    z = evaluate(tape, grid * 1e9)

    if method is ResonanceMethod.REACTANCE_ZERO:
        x = z.imag
        idx = np.flatnonzero(x[:-1] * x[1:] < 0.0)
        found: list[float] = []
        scores: list[float] = []
        if idx.size:
            refined = _bisect_reactance_zeros(
                tape, grid[idx], grid[idx + 1], x[idx])
            x_ref = np.abs(evaluate(tape, refined * 1e9).imag)
            # A zero shrinks |Im Z| below the bracket endpoints; a pole
            # blows up far beyond them as bisection converges onto it.
            bracket_cap = np.maximum(np.abs(x[idx]), np.abs(x[idx + 1]))
            for f, xr, cap in zip(refined, x_ref, bracket_cap):
                if xr <= cap:
                    found.append(float(f))
                    scores.append(float(xr))
        # Grid nodes landing exactly on a sign change (a constant-zero
        # reactance is not a resonance).
        for i in np.flatnonzero(x == 0.0):
            if 0 < i < grid_points - 1 and x[i - 1] * x[i + 1] < 0.0:
                found.append(float(grid[i]))
                scores.append(0.0)
    else:
        db = _gamma_db(z, z_ref_ohm)
        found = []
        scores = []
        for i in range(1, grid_points - 1):
            if (db[i] < db[i - 1] and db[i] < db[i + 1]
                    and db[i] < dip_threshold_db):
                f0, depth = parabolic_vertex(
                    grid[i - 1], grid[i], grid[i + 1],
                    db[i - 1], db[i], db[i + 1])
                found.append(float(f0))
                scores.append(float(depth))

    if not found:
        raise NoResonanceFound(
            f"no {method.value} resonance in [{f_lo}, {f_hi}] GHz")

    order = np.argsort(found)
    freqs = [found[i] for i in order]
    ordered_scores = [scores[i] for i in order]
    merged = _merge_close(freqs, ordered_scores, 2.0 * step)
    return ResonanceReport(
        frequencies_ghz=tuple(merged),
        method=method,
        reference_ohm=z_ref_ohm,
    )


# -- model builders -----------------------------------------------------------

def build_3csr(l0_nh: float, cc_pf: float) -> Element:
    """Bare three-turn spiral model: two series inductors around the
    gap capacitance, as a one-port."""
    return series(Inductor(l0_nh), Capacitor(cc_pf), Inductor(l0_nh))


def _tapped_arm(l0_nh: float, diode: DiodeModel, placement: float,
                mirrored: bool) -> list[Element]:
    outer = placement * l0_nh
    inner = (1.0 - placement) * l0_nh
    if mirrored:
        outer, inner = inner, outer
    arm: list[Element] = []
    if outer > 0.0:
        arm.append(Inductor(outer))
    arm.append(diode.to_element())
    if inner > 0.0:
        arm.append(Inductor(inner))
    return arm


def build_3rcsr(
    l0_nh: float,
    cc_pf: float,
    d1: DiodeModel,
    d2: DiodeModel,
    placement: float = 0.5,
) -> Element:
    """Reconfigurable spiral: each switch sits in series inside one
    inductive arm, splitting that arm's inductance at the fractional tap
    position (0 = outer end, 1 = capacitor end)."""
    if not (0.0 <= placement <= 1.0):
        raise InvalidValue(f"placement must be in [0, 1], got {placement}")
    arm_d2 = _tapped_arm(l0_nh, d2, placement, mirrored=False)
    arm_d1 = _tapped_arm(l0_nh, d1, placement, mirrored=True)
    return series(*arm_d2, Capacitor(cc_pf), *arm_d1)


def build_jcasa(
    patch_segments: Iterable[MicrostripLine],
    resonator: Element,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> Element:
    """Full antenna model: the patch acts as a cascade of line segments
    (feed side first) terminated by the resonator one-port."""
    segments = [LineSegment(seg, fidelity) for seg in patch_segments]
    if not segments:
        raise InvalidValue("at least one patch segment is required")
    return series(*segments, resonator)


def turn_inductances(
    substrate: microstrip.Substrate,
    width_mm: float = 1.0,
    turn_lengths_mm: Sequence[float] = DEFAULT_TURN_LENGTHS_MM,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> tuple[float, ...]:
    """Per-turn series inductance (nH) for the given turn lengths."""
    return tuple(
        microstrip.line_inductance(
            MicrostripLine(substrate, width_mm, length), fidelity)
        for length in turn_lengths_mm
    )
