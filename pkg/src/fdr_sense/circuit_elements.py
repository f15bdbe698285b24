"""Immutable one-port network tree: R/L/C leaves, Series/Parallel
composites, and lossless microstrip line segments.

Values are validated at construction so evaluation never has to.  Zero-value
parts are rejected; degenerate shorts/opens are expressed structurally
instead (e.g. a Series chain without the element).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import EmptyNetwork, InvalidValue
from .microstrip import FormulaFidelity, MicrostripLine


def _positive(value: float, what: str) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidValue(f"{what} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class Resistor:
    ohms: float

    def __post_init__(self) -> None:
        _positive(self.ohms, "resistance")


@dataclass(frozen=True)
class Inductor:
    nh: float

    def __post_init__(self) -> None:
        _positive(self.nh, "inductance")


@dataclass(frozen=True)
class Capacitor:
    pf: float

    def __post_init__(self) -> None:
        _positive(self.pf, "capacitance")


@dataclass(frozen=True)
class LineSegment:
    line: MicrostripLine
    fidelity: FormulaFidelity = FormulaFidelity.STANDARD


@dataclass(frozen=True)
class Series:
    parts: tuple["Element", ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise EmptyNetwork("Series composite needs at least one member")


@dataclass(frozen=True)
class Parallel:
    parts: tuple["Element", ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise EmptyNetwork("Parallel composite needs at least one member")


Element = Union[Resistor, Inductor, Capacitor, LineSegment, Series, Parallel]


def series(*parts: Element) -> Series:
    return Series(tuple(parts))


def parallel(*parts: Element) -> Parallel:
    return Parallel(tuple(parts))


class DiodeState(Enum):
    ON = "on"
    OFF = "off"


@dataclass(frozen=True)
class DiodeModel:
    """Lumped PIN-diode switch model.

    ON realizes a series R_s-L_s path; OFF realizes L_s in series with the
    junction capacitance C_t shunted by the reverse parallel resistance R_p.
    """

    state: DiodeState
    r_s_ohm: float
    l_s_nh: float
    c_t_pf: float
    r_p_ohm: float

    def __post_init__(self) -> None:
        _positive(self.r_s_ohm, "r_s_ohm")
        _positive(self.l_s_nh, "l_s_nh")
        _positive(self.c_t_pf, "c_t_pf")
        _positive(self.r_p_ohm, "r_p_ohm")

    def with_state(self, state: DiodeState) -> "DiodeModel":
        return DiodeModel(state, self.r_s_ohm, self.l_s_nh, self.c_t_pf,
                          self.r_p_ohm)

    def to_element(self) -> Element:
        if self.state is DiodeState.ON:
            return series(Resistor(self.r_s_ohm), Inductor(self.l_s_nh))
        return series(
            Inductor(self.l_s_nh),
            parallel(Capacitor(self.c_t_pf), Resistor(self.r_p_ohm)),
        )


# Shipped switch defaults: datasheet-typical values for a small plastic
# PIN diode.  Not taken from any measured source; always overridable.
DEFAULT_DIODE = DiodeModel(
    state=DiodeState.OFF,
    r_s_ohm=0.75,
    l_s_nh=0.7,
    c_t_pf=1.75,
    r_p_ohm=3000.0,
)
