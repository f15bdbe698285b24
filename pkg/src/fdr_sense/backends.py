"""Tape evaluation backends.

Two interchangeable implementations of the same stack machine:

* ``numba`` — scalar loop over frequencies, compiled with ``@njit``.  This
  is the default whenever numba imports cleanly.
* ``numpy`` — pure-numpy evaluation with a stack of frequency-length
  arrays; the fallback for environments without numba.

Selection: the ``FDR_SENSE_BACKEND`` environment variable (``numba`` or
``numpy``) wins; otherwise numba is tried first.  ``set_backend`` overrides
at runtime, which is how the benchmark flips between the two.
"""
from __future__ import annotations

import math
import os

import numpy as np

from ._tape import OP_ADD, OP_C, OP_L, OP_PAR, OP_R, OP_ZERO, Tape

_ENV_VAR = "FDR_SENSE_BACKEND"
_VALID = ("numba", "numpy")

_active: str | None = None
_numba_kernel = None


def _build_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def eval_tape(ops, arg0, arg1, depth, freqs_hz, out):  # pragma: no cover
        stack = np.empty(depth, dtype=np.complex128)
        n_ops = ops.shape[0]
        for k in range(freqs_hz.shape[0]):
            w = 2.0 * math.pi * freqs_hz[k]
            sp = 0
            for i in range(n_ops):
                op = ops[i]
                if op == OP_R:
                    stack[sp] = arg0[i] + 0.0j
                    sp += 1
                elif op == OP_L:
                    stack[sp] = 1j * w * arg0[i]
                    sp += 1
                elif op == OP_C:
                    stack[sp] = -1j / (w * arg0[i])
                    sp += 1
                elif op == OP_ZERO:
                    stack[sp] = 0.0j
                    sp += 1
                elif op == OP_ADD:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] + stack[sp]
                elif op == OP_PAR:
                    sp -= 1
                    a = stack[sp - 1]
                    b = stack[sp]
                    stack[sp - 1] = a * b / (a + b)
                else:  # OP_LINE
                    zl = stack[sp - 1]
                    z0 = arg0[i]
                    theta = w * arg1[i]
                    c = math.cos(theta)
                    s = math.sin(theta)
                    stack[sp - 1] = z0 * (zl * c + 1j * z0 * s) / (
                        z0 * c + 1j * zl * s)
            out[k] = stack[0]

    return eval_tape


def _eval_numpy(tape: Tape, freqs_hz: np.ndarray) -> np.ndarray:
    w = 2.0 * np.pi * freqs_hz
    stack: list[np.ndarray] = []
    for i, op in enumerate(tape.ops):
        if op == OP_R:
            stack.append(np.full_like(w, tape.arg0[i], dtype=np.complex128))
        elif op == OP_L:
            stack.append(1j * w * tape.arg0[i])
        elif op == OP_C:
            stack.append(-1j / (w * tape.arg0[i]))
        elif op == OP_ZERO:
            stack.append(np.zeros_like(w, dtype=np.complex128))
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op == OP_PAR:
            b = stack.pop()
            a = stack[-1]
            stack[-1] = a * b / (a + b)
        else:  # OP_LINE
            zl = stack[-1]
            z0 = tape.arg0[i]
            theta = w * tape.arg1[i]
            c = np.cos(theta)
            s = np.sin(theta)
            stack[-1] = z0 * (zl * c + 1j * z0 * s) / (z0 * c + 1j * zl * s)
    return stack[0]


def _resolve_default() -> str:
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested:
        if requested not in _VALID:
            raise ValueError(
                f"{_ENV_VAR} must be one of {_VALID}, got {requested!r}")
        return requested
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def active_backend() -> str:
    global _active
    if _active is None:
        _active = _resolve_default()
    return _active


def set_backend(name: str) -> None:
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    global _active
    _active = name


def evaluate(tape: Tape, freqs_hz: np.ndarray) -> np.ndarray:
    """Impedance of the compiled network at each frequency (Hz, 1-D)."""
    freqs_hz = np.ascontiguousarray(freqs_hz, dtype=np.float64)
    if active_backend() == "numba":
        global _numba_kernel
        if _numba_kernel is None:
            _numba_kernel = _build_numba_kernel()
        out = np.empty(freqs_hz.shape[0], dtype=np.complex128)
        _numba_kernel(tape.ops, tape.arg0, tape.arg1, tape.stack_depth,
                      freqs_hz, out)
        return out
    return _eval_numpy(tape, freqs_hz)
