"""Flat opcode tape for one-port impedance evaluation.

A network tree is compiled once into three parallel arrays (opcode, two
float arguments in SI units) that a stack machine replays per frequency.
Both evaluation backends (see ``backends``) consume the same tape, which is
what keeps the numba kernel free of Python objects.

Chain semantics: a Series composite is evaluated right to left starting
from a 0-ohm terminal.  Lumped and composite members add their one-port
impedance; a line segment transforms the impedance accumulated so far
through its ABCD matrix.  A line with nothing to its right is therefore a
short-circuited stub, and nested Series composites are spliced into the
parent chain so that tree flattening never changes the result.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import microstrip
from .circuit_elements import (
    Capacitor,
    Element,
    Inductor,
    LineSegment,
    Parallel,
    Resistor,
    Series,
)

OP_R = 0      # push constant resistance        arg0 = ohms
OP_L = 1      # push j*w*L                       arg0 = henries
OP_C = 2      # push 1/(j*w*C)                   arg0 = farads
OP_ZERO = 3   # push 0 ohm (series chain terminal)
OP_ADD = 4    # pop b, a; push a + b
OP_PAR = 5    # pop b, a; push a*b/(a+b)
OP_LINE = 6   # pop Zl; push line-transformed    arg0 = Z0 ohms, arg1 = delay s


@dataclass(frozen=True)
class Tape:
    ops: np.ndarray    # int64
    arg0: np.ndarray   # float64
    arg1: np.ndarray   # float64
    stack_depth: int


def _line_args(segment: LineSegment) -> tuple[float, float]:
    z0 = microstrip.characteristic_impedance(segment.line, segment.fidelity)
    delay = microstrip.propagation_delay_s(segment.line, segment.fidelity)
    return z0, delay


class _Emitter:
    def __init__(self) -> None:
        self.ops: list[int] = []
        self.arg0: list[float] = []
        self.arg1: list[float] = []
        self._height = 0
        self._max_height = 0

    def emit(self, op: int, a0: float = 0.0, a1: float = 0.0) -> None:
        self.ops.append(op)
        self.arg0.append(a0)
        self.arg1.append(a1)
        if op in (OP_R, OP_L, OP_C, OP_ZERO):
            self._height += 1
        elif op in (OP_ADD, OP_PAR):
            self._height -= 1
        # OP_LINE leaves the height unchanged
        self._max_height = max(self._max_height, self._height)

    def one_port(self, element: Element) -> None:
        """Emit code that pushes the element's own input impedance."""
        if isinstance(element, Resistor):
            self.emit(OP_R, element.ohms)
        elif isinstance(element, Inductor):
            self.emit(OP_L, element.nh * 1e-9)
        elif isinstance(element, Capacitor):
            self.emit(OP_C, element.pf * 1e-12)
        elif isinstance(element, LineSegment):
            self.emit(OP_ZERO)
            z0, delay = _line_args(element)
            self.emit(OP_LINE, z0, delay)
        elif isinstance(element, Series):
            self.chain(_flatten_series(element))
        elif isinstance(element, Parallel):
            members = _flatten_parallel(element)
            self.one_port(members[0])
            for member in members[1:]:
                self.one_port(member)
                self.emit(OP_PAR)
        else:
            raise TypeError(f"not a circuit element: {element!r}")

    def chain(self, members: tuple[Element, ...]) -> None:
        self.emit(OP_ZERO)
        for member in reversed(members):
            if isinstance(member, LineSegment):
                z0, delay = _line_args(member)
                self.emit(OP_LINE, z0, delay)
            else:
                self.one_port(member)
                self.emit(OP_ADD)

    def finish(self) -> Tape:
        assert self._height == 1, "tape must leave exactly one value"
        return Tape(
            ops=np.asarray(self.ops, dtype=np.int64),
            arg0=np.asarray(self.arg0, dtype=np.float64),
            arg1=np.asarray(self.arg1, dtype=np.float64),
            stack_depth=self._max_height,
        )


def _flatten_series(element: Series) -> tuple[Element, ...]:
    members: list[Element] = []
    for member in element.parts:
        if isinstance(member, Series):
            members.extend(_flatten_series(member))
        else:
            members.append(member)
    return tuple(members)


def _flatten_parallel(element: Parallel) -> tuple[Element, ...]:
    members: list[Element] = []
    for member in element.parts:
        if isinstance(member, Parallel):
            members.extend(_flatten_parallel(member))
        else:
            members.append(member)
    return tuple(members)


@lru_cache(maxsize=256)
def compile_network(net: Element) -> Tape:
    emitter = _Emitter()
    emitter.one_port(net)
    return emitter.finish()
