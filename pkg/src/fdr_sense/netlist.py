"""Text formats for circuit input.

Netlist: one element per line (``R <ohms>``, ``L <nH>``, ``C <pF>``,
``TL <W_mm> <h_mm> <eps_r> <len_mm>``), with ``SER{`` / ``PAR{`` opening a
composite block closed by ``}``.  Multiple top-level elements form an
implicit series chain.  ``#`` starts a comment.

Antenna parameter file: ``key = value`` pairs (``l0_nh``, ``cc_pf``,
``placement``, ``diode.*``) plus one ``patch.segment`` line per cascade
segment, feed side first, carrying ``W_mm h_mm eps_r len_mm``.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .circuit import build_3rcsr, build_jcasa
from .circuit_elements import (
    Capacitor,
    DiodeModel,
    DiodeState,
    Element,
    Inductor,
    LineSegment,
    Resistor,
    parallel,
    series,
)
from .errors import InvalidValue
from .microstrip import MicrostripLine, Substrate


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_netlist(text: str) -> Element:
    """Parse the line-based netlist into an element tree."""
    stack: list[tuple[str, list[Element]]] = [("SER", [])]
    for line_number, raw in enumerate(text.splitlines(), start=1):
        body = _strip(raw)
        if not body:
            continue
        tokens = body.split()
        kind = tokens[0].upper()
        try:
            if kind == "R":
                stack[-1][1].append(Resistor(float(tokens[1])))
            elif kind == "L":
                stack[-1][1].append(Inductor(float(tokens[1])))
            elif kind == "C":
                stack[-1][1].append(Capacitor(float(tokens[1])))
            elif kind == "TL":
                w, h, eps_r, length = (float(t) for t in tokens[1:5])
                line = MicrostripLine(Substrate(eps_r, 0.0, h), w, length)
                stack[-1][1].append(LineSegment(line))
            elif kind in ("SER{", "PAR{"):
                stack.append((kind[:3], []))
            elif kind == "}":
                if len(stack) == 1:
                    raise InvalidValue(f"line {line_number}: unmatched '}}'")
                block_kind, members = stack.pop()
                block = (series(*members) if block_kind == "SER"
                         else parallel(*members))
                stack[-1][1].append(block)
            else:
                raise InvalidValue(
                    f"line {line_number}: unknown element {tokens[0]!r}")
        except (IndexError, ValueError):
            raise InvalidValue(
                f"line {line_number}: malformed element line {body!r}"
            ) from None
    if len(stack) != 1:
        raise InvalidValue("unclosed SER{ or PAR{ block")
    top = stack[0][1]
    if not top:
        raise InvalidValue("netlist contains no elements")
    if len(top) == 1:
        return top[0]
    return series(*top)


@dataclass(frozen=True)
class JcasaParams:
    """Everything needed to build the full antenna model for any state."""

    l0_nh: float
    cc_pf: float
    placement: float
    diode: DiodeModel           # state field is a placeholder; set per use
    patch_segments: tuple[MicrostripLine, ...]

    def build(self, state: str) -> Element:
        """Element tree for a two-character diode state such as '00'."""
        state = state.strip()
        if len(state) != 2 or any(c not in "01" for c in state):
            raise InvalidValue(
                f"state must be two binary digits (D2, D1), got {state!r}")
        d2 = self.diode.with_state(
            DiodeState.ON if state[0] == "1" else DiodeState.OFF)
        d1 = self.diode.with_state(
            DiodeState.ON if state[1] == "1" else DiodeState.OFF)
        resonator = build_3rcsr(self.l0_nh, self.cc_pf, d1, d2,
                                self.placement)
        return build_jcasa(self.patch_segments, resonator)


_REQUIRED_KEYS = {
    "l0_nh", "cc_pf", "placement",
    "diode.r_s_ohm", "diode.l_s_nh", "diode.c_t_pf", "diode.r_p_ohm",
}


def parse_params(text: str) -> JcasaParams:
    values: dict[str, float] = {}
    segments: list[MicrostripLine] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        body = _strip(raw)
        if not body:
            continue
        if "=" not in body:
            raise InvalidValue(f"line {line_number}: expected key = value")
        key, _, value = (part.strip() for part in body.partition("="))
        if key == "patch.segment":
            fields = value.split()
            if len(fields) != 4:
                raise InvalidValue(
                    f"line {line_number}: patch.segment needs "
                    f"'W_mm h_mm eps_r len_mm'")
            try:
                w, h, eps_r, length = (float(f) for f in fields)
            except ValueError:
                raise InvalidValue(
                    f"line {line_number}: non-numeric segment field") from None
            segments.append(MicrostripLine(Substrate(eps_r, 0.0, h), w, length))
        elif key in _REQUIRED_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise InvalidValue(
                    f"line {line_number}: non-numeric value for {key}") from None
        else:
            raise InvalidValue(f"line {line_number}: unknown key {key!r}")
    missing = _REQUIRED_KEYS - values.keys()
    if missing:
        raise InvalidValue(f"missing keys: {', '.join(sorted(missing))}")
    if not segments:
        raise InvalidValue("at least one patch.segment is required")
    diode = DiodeModel(
        state=DiodeState.OFF,
        r_s_ohm=values["diode.r_s_ohm"],
        l_s_nh=values["diode.l_s_nh"],
        c_t_pf=values["diode.c_t_pf"],
        r_p_ohm=values["diode.r_p_ohm"],
    )
    return JcasaParams(
        l0_nh=values["l0_nh"],
        cc_pf=values["cc_pf"],
        placement=values["placement"],
        diode=diode,
        patch_segments=tuple(segments),
    )


def load_params(path: str | Path) -> JcasaParams:
    return parse_params(Path(path).read_text())


def default_params_path() -> Path:
    """Shipped mode-1 parameter file (tuned to the measured band table)."""
    return Path(resources.files("fdr_sense").joinpath("data/mode1.params"))


def load_default_params() -> JcasaParams:
    return parse_params(default_params_path().read_text())
