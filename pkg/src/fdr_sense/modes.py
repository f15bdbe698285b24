"""Diode-state machine: (D2, D1) switch configuration -> operating mode,
measured bands, and permitted services.  Only the sensing mode may feed the
inversion pipeline; dips from loaded measurements are classified into band
roles with windows wide enough to cover load-induced shifts.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import UnsupportedState
from .sweep import Dip, DipReport


class Service(Enum):
    SENSING = "sensing"
    COMMUNICATION = "communication"


class BandRole(Enum):
    SENSING = "sensing"
    COMMUNICATION = "communication"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class ModeState:
    d2: int
    d1: int
    mode_index: int
    bands_ghz: tuple[tuple[float, float], ...]
    services: frozenset[Service]
    application: str

    @property
    def state_string(self) -> str:
        return f"{self.d2}{self.d1}"


_MODE_TABLE: dict[tuple[int, int], ModeState] = {
    (0, 0): ModeState(
        d2=0, d1=0, mode_index=1,
        bands_ghz=((0.95, 0.97), (1.53, 1.56)),
        services=frozenset({Service.SENSING, Service.COMMUNICATION}),
        application="Dual-band JCASA",
    ),
    (1, 0): ModeState(
        d2=1, d1=0, mode_index=2,
        bands_ghz=((0.91, 0.94), (1.54, 1.57)),
        services=frozenset({Service.COMMUNICATION}),
        application="Dual-band antenna",
    ),
    (1, 1): ModeState(
        d2=1, d1=1, mode_index=3,
        bands_ghz=((0.83, 0.85),),
        services=frozenset({Service.COMMUNICATION}),
        application="Single-band antenna",
    ),
}

# Classification windows for the sensing mode.  The measured loaded traces
# shift the first band down to ~0.83 GHz and the second to ~1.35 GHz, so
# the windows are much wider than the unloaded bands.
MODE1_SENSING_WINDOW_GHZ = (0.80, 1.00)
MODE1_COMMUNICATION_WINDOW_GHZ = (1.30, 1.60)


def resolve(d2: int, d1: int) -> ModeState:
    """Mode lookup for a (D2, D1) switch configuration."""
    key = (int(d2), int(d1))
    if key not in _MODE_TABLE:
        raise UnsupportedState(
            f"diode state ({key[0]}, {key[1]}) is not a defined mode")
    return _MODE_TABLE[key]


def resolve_string(state: str) -> ModeState:
    """Mode lookup from the two-character CLI form, e.g. '00' or '11'."""
    state = state.strip()
    if len(state) != 2 or any(c not in "01" for c in state):
        raise UnsupportedState(f"state must be two binary digits, got {state!r}")
    return resolve(int(state[0]), int(state[1]))


def all_modes() -> tuple[ModeState, ...]:
    return tuple(_MODE_TABLE.values())


@dataclass(frozen=True)
class SensingDecision:
    permitted: bool
    mode_index: int
    reason: str | None = None


def guard_sensing(state: ModeState) -> SensingDecision:
    """Permit the inversion pipeline only where sensing is a listed service."""
    if Service.SENSING in state.services:
        return SensingDecision(True, state.mode_index)
    return SensingDecision(
        False, state.mode_index,
        f"mode {state.mode_index} ({state.application}) provides no sensing "
        "service: its resonance shift does not track the load",
    )


@dataclass(frozen=True)
class LabeledDip:
    dip: Dip
    role: BandRole


def classify_dips(
    state: ModeState,
    report: DipReport,
    sensing_window_ghz: tuple[float, float] = MODE1_SENSING_WINDOW_GHZ,
    communication_window_ghz: tuple[float, float] = MODE1_COMMUNICATION_WINDOW_GHZ,
) -> tuple[LabeledDip, ...]:
    """Label each dip by the band it falls in.

    In the sensing mode the windows account for load-induced shifts; in the
    other modes a dip is a communication dip when it lies inside one of the
    declared bands.  Everything else is unassigned.
    """
    labeled = []
    for dip in report.dips:
        role = BandRole.UNASSIGNED
        if Service.SENSING in state.services:
            if sensing_window_ghz[0] <= dip.f0_ghz <= sensing_window_ghz[1]:
                role = BandRole.SENSING
            elif (communication_window_ghz[0] <= dip.f0_ghz
                  <= communication_window_ghz[1]):
                role = BandRole.COMMUNICATION
        else:
            for lo, hi in state.bands_ghz:
                if lo <= dip.f0_ghz <= hi:
                    role = BandRole.COMMUNICATION
                    break
        labeled.append(LabeledDip(dip, role))
    return tuple(labeled)
