"""Closed-form quasi-static microstrip line analysis.

Effective permittivity and characteristic impedance come from the classic
narrow/wide closed forms; per-segment series inductance follows
``L = Z0 * sqrt(eps_eff) * length / c``.  All interfaces take millimeters,
return ohms/nanohenries; SI units appear only inside the formulas.

Two formula renderings are provided.  ``STANDARD`` is the textbook form
(natural logarithm, ``sqrt(eps_eff)`` in the impedance denominator) and is
the default everywhere.  ``PAPER_LITERAL`` evaluates the expressions exactly
as typeset in the source reference (base-2 logarithm, plain ``eps_eff``
denominator); it exists for traceability only — the two variants differ by
a frequency-independent factor documented in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidGeometry

C0_M_PER_S = 299_792_458.0  # speed of light in vacuum


class FormulaFidelity(Enum):
    STANDARD = "standard"
    PAPER_LITERAL = "paper-literal"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidGeometry(message)


@dataclass(frozen=True)
class Substrate:
    """Dielectric slab under the conductor.

    eps_r is the relative permittivity (>= 1), tan_delta the loss tangent
    (>= 0, unused by the lossless formulas but carried for reporting), and
    height_mm the substrate thickness.
    """

    eps_r: float
    tan_delta: float = 0.0
    height_mm: float = 1.6

    def __post_init__(self) -> None:
        _require(math.isfinite(self.eps_r) and self.eps_r >= 1.0,
                 f"eps_r must be finite and >= 1, got {self.eps_r}")
        _require(math.isfinite(self.tan_delta) and self.tan_delta >= 0.0,
                 f"tan_delta must be finite and >= 0, got {self.tan_delta}")
        _require(math.isfinite(self.height_mm) and self.height_mm > 0.0,
                 f"height_mm must be finite and > 0, got {self.height_mm}")


@dataclass(frozen=True)
class MicrostripLine:
    """One conductor segment: substrate plus width and physical length."""

    substrate: Substrate
    width_mm: float
    length_mm: float = 0.0

    def __post_init__(self) -> None:
        _require(math.isfinite(self.width_mm) and self.width_mm > 0.0,
                 f"width_mm must be finite and > 0, got {self.width_mm}")
        _require(math.isfinite(self.length_mm) and self.length_mm >= 0.0,
                 f"length_mm must be finite and >= 0, got {self.length_mm}")


@dataclass(frozen=True)
class LineParams:
    """Derived per-segment quantities."""

    eps_eff: float
    z0_ohm: float
    inductance_nh: float


def effective_permittivity(line: MicrostripLine) -> float:
    """Quasi-TEM effective permittivity of the segment.

    Uses the narrow-line form (with the ``0.04 (1 - W/h)^2`` correction)
    for W < h and the wide-line form otherwise; the boundary W = h is
    resolved to the wide branch.
    """
    eps_r = line.substrate.eps_r
    w_over_h = line.width_mm / line.substrate.height_mm
    filling = 1.0 / math.sqrt(1.0 + 12.0 / w_over_h)
    if w_over_h < 1.0:
        filling += 0.04 * (1.0 - w_over_h) ** 2
    return (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 * filling


def characteristic_impedance(
    line: MicrostripLine,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> float:
    """Characteristic impedance Z0 in ohms."""
    eps_eff = effective_permittivity(line)
    w_over_h = line.width_mm / line.substrate.height_mm

    if fidelity is FormulaFidelity.STANDARD:
        log = math.log
        denom_eps = math.sqrt(eps_eff)
    else:
        log = math.log2
        denom_eps = eps_eff

    if w_over_h < 1.0:
        return 60.0 / denom_eps * log(8.0 / w_over_h + 0.25 * w_over_h)
    return 120.0 * math.pi / (
        denom_eps * (w_over_h + 1.393 + (2.0 / 3.0) * log(w_over_h + 1.444))
    )


def line_inductance(
    line: MicrostripLine,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> float:
    """Series inductance of the segment in nanohenries.

    ``L = Z0 * sqrt(eps_eff) * l / c`` with the physical length l; strictly
    linear in length.
    """
    z0 = characteristic_impedance(line, fidelity)
    eps_eff = effective_permittivity(line)
    length_m = line.length_mm * 1e-3
    return z0 * math.sqrt(eps_eff) * length_m / C0_M_PER_S * 1e9


def analyze(
    line: MicrostripLine,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> LineParams:
    """Bundle eps_eff, Z0 and L for one segment."""
    return LineParams(
        eps_eff=effective_permittivity(line),
        z0_ohm=characteristic_impedance(line, fidelity),
        inductance_nh=line_inductance(line, fidelity),
    )


def propagation_delay_s(
    line: MicrostripLine,
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD,
) -> float:
    """One-way delay ``l * sqrt(eps_eff) / c`` in seconds.

    The electrical angle at frequency f is ``2 * pi * f * delay``.
    """
    del fidelity  # delay depends only on eps_eff, shared by both variants
    eps_eff = effective_permittivity(line)
    return line.length_mm * 1e-3 * math.sqrt(eps_eff) / C0_M_PER_S
