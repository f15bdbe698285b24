"""Resonance-shift inversion chain: frequency shift -> real permittivity
(affine model) -> volumetric water content (monotone lookup table), plus
the shift-per-permittivity sensitivity metric and least-squares fitting.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateFit,
    EqualPermittivities,
    InvalidValue,
    MissingHeader,
    BadFieldCount,
    NonMonotonePermittivity,
    NonPositiveFrequency,
)

# Center of the unloaded sensing band; configurable everywhere it is used.
DEFAULT_F_U_GHZ = 0.96

POINTS_CSV_HEADER = "delta_f_ghz,eps_r"
SOIL_CSV_HEADER = "vwc_percent,eps_r"


def frequency_shift(f_m_ghz: float, f_u_ghz: float) -> float:
    """Loaded-minus-unloaded resonance shift, negative for wetter loads."""
    if not (f_m_ghz > 0.0 and f_u_ghz > 0.0):
        raise NonPositiveFrequency(
            f"frequencies must be > 0, got ({f_m_ghz}, {f_u_ghz})")
    return f_m_ghz - f_u_ghz


@dataclass(frozen=True)
class CalibrationModel:
    """Affine map from frequency shift (GHz) to real permittivity."""

    f_u_ghz: float
    slope: float        # eps_r per GHz; negative for soil-type loads
    intercept: float    # eps_r at zero shift
    fit_residual: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.f_u_ghz) and self.f_u_ghz > 0.0):
            raise NonPositiveFrequency(
                f"f_u_ghz must be > 0, got {self.f_u_ghz}")
        if not math.isfinite(self.slope):
            raise InvalidValue("slope must be finite")

    def eps_at_shift(self, delta_f_ghz: float) -> float:
        return self.slope * delta_f_ghz + self.intercept

    def shift_at_eps(self, eps_r: float) -> float:
        if self.slope == 0.0:
            raise InvalidValue("cannot invert a zero-slope model")
        return (eps_r - self.intercept) / self.slope

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "f_u_ghz": self.f_u_ghz,
            "slope_eps_per_ghz": self.slope,
            "intercept_eps": self.intercept,
            "fit_residual": self.fit_residual,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CalibrationModel":
        return cls(
            f_u_ghz=float(payload["f_u_ghz"]),
            slope=float(payload["slope_eps_per_ghz"]),
            intercept=float(payload["intercept_eps"]),
            fit_residual=float(payload.get("fit_residual", 0.0)),
        )


@dataclass(frozen=True)
class SoilTable:
    """Monotone (VWC %, real permittivity) pairs, piecewise-linear in both
    directions."""

    rows: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.rows) < 2:
            raise InvalidValue("soil table needs at least 2 rows")
        vwc = [r[0] for r in self.rows]
        eps = [r[1] for r in self.rows]
        if any(b <= a for a, b in zip(vwc, vwc[1:])):
            raise InvalidValue("VWC column must strictly increase")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise InvalidValue("permittivity column must strictly increase")

    @property
    def eps_min(self) -> float:
        return self.rows[0][1]

    @property
    def eps_max(self) -> float:
        return self.rows[-1][1]

    def eps_from_vwc(self, vwc_percent: float) -> float:
        vwc = np.array([r[0] for r in self.rows])
        eps = np.array([r[1] for r in self.rows])
        return float(np.interp(vwc_percent, vwc, eps))

    def vwc_from_eps(self, eps_r: float) -> tuple[float, bool]:
        """Inverse lookup; clamps outside the table and reports it.

        A 1e-9 guard band keeps round-tripped endpoint values from being
        flagged over float noise.
        """
        vwc = np.array([r[0] for r in self.rows])
        eps = np.array([r[1] for r in self.rows])
        clamped = (eps_r < self.eps_min - 1e-9) or (eps_r > self.eps_max + 1e-9)
        return float(np.interp(eps_r, eps, vwc)), clamped


# Measured soil rows shipped as the built-in table (VWC %, eps_r).
DEFAULT_SOIL_TABLE = SoilTable((
    (0.0, 3.7),
    (5.0, 4.4),
    (10.0, 5.8),
    (15.0, 8.4),
    (20.0, 12.0),
    (25.0, 15.8),
    (30.0, 19.0),
))


@dataclass(frozen=True)
class Estimate:
    delta_f_ghz: float
    eps_r_real: float
    vwc_percent: float
    extrapolated: bool


def fit_linear(
    points: Sequence[tuple[float, float]],
    f_u_ghz: float = DEFAULT_F_U_GHZ,
) -> CalibrationModel:
    """Ordinary least squares of eps_r against frequency shift."""
    if len(points) < 2:
        raise DegenerateFit(f"need at least 2 points, got {len(points)}")
    shifts = np.array([p[0] for p in points], dtype=np.float64)
    eps = np.array([p[1] for p in points], dtype=np.float64)
    if np.ptp(shifts) == 0.0:
        raise DegenerateFit("all points share the same frequency shift")
    design = np.column_stack([shifts, np.ones_like(shifts)])
    (slope, intercept), *_ = np.linalg.lstsq(design, eps, rcond=None)
    residual = float(np.sqrt(np.mean((design @ (slope, intercept) - eps) ** 2)))
    return CalibrationModel(f_u_ghz, float(slope), float(intercept), residual)


# Two-point line through the endpoint readings of the measured mode-1
# traces: shift -0.03 GHz at eps 3.7 (dry) and -0.13 GHz at eps 19 (wet).
# Derived from figure endpoints; replace with a user calibration when one
# is available.
def default_model(f_u_ghz: float = DEFAULT_F_U_GHZ) -> CalibrationModel:
    return fit_linear([(-0.03, 3.7), (-0.13, 19.0)], f_u_ghz)


def estimate(
    f_m_ghz: float,
    model: CalibrationModel,
    table: SoilTable = DEFAULT_SOIL_TABLE,
) -> Estimate:
    """Invert a measured resonance into permittivity and water content.

    The permittivity is reported as the raw affine-model value; the VWC
    lookup clamps to the nearest table endpoint outside the calibrated
    range and sets the extrapolated flag.
    """
    delta_f = frequency_shift(f_m_ghz, model.f_u_ghz)
    eps_r = model.eps_at_shift(delta_f)
    vwc, clamped = table.vwc_from_eps(eps_r)
    return Estimate(delta_f, eps_r, vwc, clamped)


def sensitivity(
    f1_ghz: float,
    f2_ghz: float,
    eps1: float,
    eps2: float,
    f_u_ghz: float = DEFAULT_F_U_GHZ,
) -> float:
    """Percent shift per unit permittivity: |(f1-f2) / (f_u (eps1-eps2))| * 100."""
    if not (f1_ghz > 0.0 and f2_ghz > 0.0 and f_u_ghz > 0.0):
        raise NonPositiveFrequency("frequencies must be > 0")
    if eps1 == eps2:
        raise EqualPermittivities("sensitivity needs two distinct permittivities")
    return abs((f1_ghz - f2_ghz) / (f_u_ghz * (eps1 - eps2))) * 100.0


def sensitivity_profile(
    readings: Sequence[tuple[float, float]],
    f_u_ghz: float = DEFAULT_F_U_GHZ,
) -> tuple[float, ...]:
    """Per-step sensitivity over adjacent (frequency, permittivity) readings.

    The final entry corresponds to the highest-permittivity step, the usual
    headline figure.  Readings must be strictly monotone in permittivity.
    """
    if len(readings) < 2:
        raise NonMonotonePermittivity("need at least 2 readings")
    eps = [r[1] for r in readings]
    increasing = all(b > a for a, b in zip(eps, eps[1:]))
    decreasing = all(b < a for a, b in zip(eps, eps[1:]))
    if not (increasing or decreasing):
        raise NonMonotonePermittivity(
            "permittivity readings must be strictly monotone")
    return tuple(
        sensitivity(f1, f2, e1, e2, f_u_ghz)
        for (f1, e1), (f2, e2) in zip(readings, readings[1:])
    )


# -- file I/O -----------------------------------------------------------------

def save_model(model: CalibrationModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path: str | Path) -> CalibrationModel:
    return CalibrationModel.from_dict(json.loads(Path(path).read_text()))


def _read_two_column_csv(text: str, header: str) -> list[tuple[float, float]]:
    rows = [(n, line.strip()) for n, line in enumerate(text.splitlines(), 1)
            if line.strip()]
    if not rows or rows[0][1].replace(" ", "").lower() != header:
        raise MissingHeader(f"first row must be '{header}'")
    out = []
    for line_number, body in rows[1:]:
        fields = body.split(",")
        if len(fields) != 2:
            raise BadFieldCount(line_number,
                                f"expected 2 fields, got {len(fields)}")
        try:
            pair = (float(fields[0]), float(fields[1]))
        except ValueError:
            raise BadFieldCount(line_number, "non-numeric field") from None
        out.append(pair)
    return out


def load_points_csv(path: str | Path) -> list[tuple[float, float]]:
    """Calibration points: ``delta_f_ghz,eps_r`` with header."""
    return _read_two_column_csv(Path(path).read_text(), POINTS_CSV_HEADER)


def load_soil_table_csv(path: str | Path) -> SoilTable:
    """Soil table: ``vwc_percent,eps_r`` with header."""
    rows = _read_two_column_csv(Path(path).read_text(), SOIL_CSV_HEADER)
    return SoilTable(tuple(rows))


def load_readings_csv(path: str | Path) -> list[tuple[float, float]]:
    """Sensitivity readings: ``f_ghz,eps_r`` with header."""
    return _read_two_column_csv(Path(path).read_text(), "f_ghz,eps_r")
