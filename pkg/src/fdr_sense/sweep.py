"""Reflection-sweep ingestion and dip analysis.

Reads Touchstone v1 one-port files and a minimal ``freq_ghz,s11_db`` CSV,
normalizes everything to complex reflection coefficients, finds dips in the
dB trace, and extracts threshold-crossing bandwidths.  A synthesis helper
builds traces with exactly placed dips and band edges for testing and
calibration work.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._refine import parabolic_vertex
from .errors import (
    BadFieldCount,
    EdgeNotInSpan,
    InvalidValue,
    MalformedOptionLine,
    MissingHeader,
    NoDipFound,
    NonMonotoneFrequency,
    TooFewPoints,
    UnsupportedPortCount,
)

CSV_HEADER = "freq_ghz,s11_db"
DEFAULT_THRESHOLD_DB = -10.0
DEFAULT_REPEATABILITY_MHZ = 10.0
_FLOOR_MAGNITUDE = 1e-30

_UNIT_TO_GHZ = {"hz": 1e-9, "khz": 1e-6, "mhz": 1e-3, "ghz": 1.0}


class SweepFormat(Enum):
    TOUCHSTONE_RI = "touchstone-ri"
    TOUCHSTONE_MA = "touchstone-ma"
    TOUCHSTONE_DB = "touchstone-db"
    CSV_DB = "csv-db"
    SYNTHETIC = "synthetic"


_FORMAT_TOKEN = {
    "ri": SweepFormat.TOUCHSTONE_RI,
    "ma": SweepFormat.TOUCHSTONE_MA,
    "db": SweepFormat.TOUCHSTONE_DB,
}


@dataclass(frozen=True)
class FrequencySweep:
    """Ordered (frequency GHz, complex reflection) samples."""

    freq_ghz: np.ndarray
    gamma: np.ndarray
    source_format: SweepFormat
    reference_ohm: float = 50.0

    def __post_init__(self) -> None:
        freq = np.array(self.freq_ghz, dtype=np.float64)
        gamma = np.array(self.gamma, dtype=np.complex128)
        if freq.size < 2:
            raise TooFewPoints(f"need at least 2 points, got {freq.size}")
        if freq.shape != gamma.shape:
            raise InvalidValue("frequency and reflection arrays differ in size")
        if np.any(np.diff(freq) <= 0.0):
            raise NonMonotoneFrequency("frequencies must strictly increase")
        if not (np.all(np.isfinite(freq)) and np.all(np.isfinite(gamma))):
            raise InvalidValue("sweep contains non-finite values")
        freq.flags.writeable = False
        gamma.flags.writeable = False
        object.__setattr__(self, "freq_ghz", freq)
        object.__setattr__(self, "gamma", gamma)

    def __len__(self) -> int:
        return self.freq_ghz.size

    @property
    def db(self) -> np.ndarray:
        """20*log10 |Gamma| with a floor to keep log finite."""
        return 20.0 * np.log10(np.maximum(np.abs(self.gamma), _FLOOR_MAGNITUDE))


@dataclass(frozen=True)
class Dip:
    f0_ghz: float
    depth_db: float
    band_lo_ghz: float | None
    band_hi_ghz: float | None


@dataclass(frozen=True)
class DipReport:
    dips: tuple[Dip, ...]
    threshold_db: float


# -- parsing ------------------------------------------------------------------

def _decode(text: bytes | str) -> list[str]:
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    return text.splitlines()


def _parse_option_line(body: str, line_number: int) -> tuple[float, SweepFormat, float]:
    """Interpret ``# <unit> S <format> R <ref>``; tokens are optional and
    case-insensitive with Touchstone defaults (GHz, S, MA, 50 ohm)."""
    tokens = body[1:].split()
    unit_factor = 1.0
    fmt = SweepFormat.TOUCHSTONE_MA
    ref = 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].lower()
        if tok in _UNIT_TO_GHZ:
            unit_factor = _UNIT_TO_GHZ[tok]
        elif tok == "s":
            pass
        elif tok in _FORMAT_TOKEN:
            fmt = _FORMAT_TOKEN[tok]
        elif tok == "r":
            if i + 1 >= len(tokens):
                raise MalformedOptionLine(
                    f"line {line_number}: R without a reference value")
            try:
                ref = float(tokens[i + 1])
            except ValueError:
                raise MalformedOptionLine(
                    f"line {line_number}: bad reference impedance "
                    f"{tokens[i + 1]!r}") from None
            i += 1
        else:
            raise MalformedOptionLine(
                f"line {line_number}: unrecognized option token {tok!r}")
        i += 1
    return unit_factor, fmt, ref


def _row_floats(fields: Sequence[str], line_number: int) -> list[float]:
    values = []
    for field in fields:
        try:
            value = float(field)
        except ValueError:
            raise BadFieldCount(line_number,
                                f"non-numeric field {field!r}") from None
        if not math.isfinite(value):
            raise BadFieldCount(line_number, f"non-finite field {field!r}")
        values.append(value)
    return values


def parse_touchstone(text: bytes | str) -> FrequencySweep:
    """Parse a Touchstone v1 one-port file into a complex sweep."""
    option: tuple[float, SweepFormat, float] | None = None
    freqs: list[float] = []
    gammas: list[complex] = []
    for line_number, raw in enumerate(_decode(text), start=1):
        body = raw.split("!", 1)[0].strip()
        if not body:
            continue
        if body.startswith("#"):
            if option is None:  # v1: only the first option line counts
                option = _parse_option_line(body, line_number)
            continue
        if option is None:
            raise MalformedOptionLine(
                f"line {line_number}: data before the option line")
        fields = body.split()
        if len(fields) != 3:
            if len(fields) in (9, 19, 33):  # 1 + 2*n^2 for n = 2, 3, 4
                raise UnsupportedPortCount(
                    f"line {line_number}: only one-port files are supported")
            raise BadFieldCount(
                line_number, f"expected 3 fields, got {len(fields)}")
        f_raw, a, b = _row_floats(fields, line_number)
        unit_factor, fmt, _ = option
        f_ghz = f_raw * unit_factor
        if freqs and f_ghz <= freqs[-1]:
            raise NonMonotoneFrequency(
                f"line {line_number}: frequency {f_ghz} GHz does not "
                f"increase past {freqs[-1]} GHz")
        if fmt is SweepFormat.TOUCHSTONE_RI:
            gamma = complex(a, b)
        elif fmt is SweepFormat.TOUCHSTONE_MA:
            gamma = a * complex(math.cos(math.radians(b)),
                                math.sin(math.radians(b)))
        else:  # DB
            mag = 10.0 ** (a / 20.0)
            gamma = mag * complex(math.cos(math.radians(b)),
                                  math.sin(math.radians(b)))
        freqs.append(f_ghz)
        gammas.append(gamma)
    if option is None:
        raise MalformedOptionLine("no option line found")
    if len(freqs) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(freqs)}")
    return FrequencySweep(np.array(freqs), np.array(gammas),
                          option[1], option[2])


def parse_csv(text: bytes | str) -> FrequencySweep:
    """Parse the two-column ``freq_ghz,s11_db`` CSV (phase assumed zero)."""
    lines = _decode(text)
    rows = [(n, line.strip()) for n, line in enumerate(lines, start=1)
            if line.strip()]
    if not rows or rows[0][1].replace(" ", "").lower() != CSV_HEADER:
        raise MissingHeader(f"first row must be '{CSV_HEADER}'")
    freqs: list[float] = []
    gammas: list[complex] = []
    for line_number, body in rows[1:]:
        fields = body.split(",")
        if len(fields) != 2:
            raise BadFieldCount(
                line_number, f"expected 2 fields, got {len(fields)}")
        f_ghz, s11_db = _row_floats(fields, line_number)
        if freqs and f_ghz <= freqs[-1]:
            raise NonMonotoneFrequency(
                f"line {line_number}: frequency {f_ghz} GHz does not "
                f"increase past {freqs[-1]} GHz")
        freqs.append(f_ghz)
        gammas.append(complex(10.0 ** (s11_db / 20.0), 0.0))
    if len(freqs) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(freqs)}")
    return FrequencySweep(np.array(freqs), np.array(gammas),
                          SweepFormat.CSV_DB)


def load_sweep(path: str | Path) -> FrequencySweep:
    """Load a sweep file, picking the parser from the extension."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".csv":
        return parse_csv(data)
    return parse_touchstone(data)


# -- serialization ------------------------------------------------------------

def to_touchstone(sweep: FrequencySweep,
                  fmt: SweepFormat = SweepFormat.TOUCHSTONE_RI) -> str:
    """Render the sweep as Touchstone v1 text in the requested format."""
    ref = sweep.reference_ohm
    if fmt is SweepFormat.TOUCHSTONE_RI:
        token = "RI"
        def row(g: complex) -> str:
            return f"{g.real!r} {g.imag!r}"
    elif fmt is SweepFormat.TOUCHSTONE_MA:
        token = "MA"
        def row(g: complex) -> str:
            return f"{abs(g)!r} {math.degrees(math.atan2(g.imag, g.real))!r}"
    elif fmt is SweepFormat.TOUCHSTONE_DB:
        token = "DB"
        def row(g: complex) -> str:
            mag = abs(g)
            if mag == 0.0:
                raise InvalidValue("zero magnitude cannot be written as dB")
            return (f"{20.0 * math.log10(mag)!r} "
                    f"{math.degrees(math.atan2(g.imag, g.real))!r}")
    else:
        raise InvalidValue(f"not a Touchstone format: {fmt}")
    out = [f"# GHz S {token} R {ref:g}"]
    for f, g in zip(sweep.freq_ghz, sweep.gamma):
        out.append(f"{float(f)!r} {row(complex(g))}")
    return "\n".join(out) + "\n"


def to_csv(sweep: FrequencySweep) -> str:
    """Render as ``freq_ghz,s11_db`` (drops phase, like the input schema)."""
    out = [CSV_HEADER]
    for f, g in zip(sweep.freq_ghz, sweep.gamma):
        mag = abs(complex(g))
        if mag == 0.0:
            raise InvalidValue("zero magnitude cannot be written as dB")
        out.append(f"{float(f)!r},{20.0 * math.log10(mag)!r}")
    return "\n".join(out) + "\n"


# -- dip analysis -------------------------------------------------------------

def _crossing(f_inside: float, db_inside: float,
              f_outside: float, db_outside: float,
              threshold_db: float) -> float:
    t = (threshold_db - db_inside) / (db_outside - db_inside)
    return f_inside + t * (f_outside - f_inside)


def _band_edges(freq: np.ndarray, db: np.ndarray, idx: int,
                threshold_db: float) -> tuple[float | None, float | None]:
    lo = None
    for j in range(idx, 0, -1):
        if db[j - 1] >= threshold_db:
            lo = _crossing(freq[j], db[j], freq[j - 1], db[j - 1],
                           threshold_db)
            break
    hi = None
    for j in range(idx, len(db) - 1):
        if db[j + 1] >= threshold_db:
            hi = _crossing(freq[j], db[j], freq[j + 1], db[j + 1],
                           threshold_db)
            break
    return lo, hi


def detect_dips(sweep: FrequencySweep,
                threshold_db: float = DEFAULT_THRESHOLD_DB) -> DipReport:
    """Strict local minima of the dB trace below threshold_db.

    Dip centers are refined by three-point parabolic interpolation; band
    edges are the linearly interpolated threshold crossings on either side
    (``None`` when the trace never re-crosses).  Dips whose refined centers
    fall within two grid steps collapse to the deeper one.
    """
    if threshold_db >= 0.0:
        raise InvalidValue(f"threshold must be negative dB, got {threshold_db}")
    freq = sweep.freq_ghz
    db = sweep.db
    step = float(np.median(np.diff(freq)))
    candidates: list[Dip] = []
    for i in range(1, len(db) - 1):
        if db[i] < db[i - 1] and db[i] < db[i + 1] and db[i] < threshold_db:
            f0, depth = parabolic_vertex(
                freq[i - 1], freq[i], freq[i + 1],
                db[i - 1], db[i], db[i + 1])
            lo, hi = _band_edges(freq, db, i, threshold_db)
            candidates.append(Dip(float(f0), float(depth), lo, hi))
    if not candidates:
        raise NoDipFound(f"no dip below {threshold_db} dB")
    merged: list[Dip] = []
    for dip in candidates:
        if merged and dip.f0_ghz - merged[-1].f0_ghz < 2.0 * step:
            if dip.depth_db < merged[-1].depth_db:
                merged[-1] = dip
        else:
            merged.append(dip)
    return DipReport(tuple(merged), threshold_db)


def band_at_threshold(
    sweep: FrequencySweep,
    dip_f0_ghz: float,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> tuple[float, float]:
    """Threshold-crossing pair bracketing the dip nearest dip_f0_ghz."""
    report = detect_dips(sweep, threshold_db)
    dip = min(report.dips, key=lambda d: abs(d.f0_ghz - dip_f0_ghz))
    if dip.band_lo_ghz is None or dip.band_hi_ghz is None:
        raise EdgeNotInSpan(
            f"trace never re-crosses {threshold_db} dB around "
            f"{dip.f0_ghz:.4f} GHz")
    return dip.band_lo_ghz, dip.band_hi_ghz


@dataclass(frozen=True)
class DipPair:
    f0_a_ghz: float
    f0_b_ghz: float
    shift_mhz: float
    flagged: bool


@dataclass(frozen=True)
class RepeatabilityReport:
    pairs: tuple[DipPair, ...]
    max_shift_mhz: float
    count_mismatch: bool

    @property
    def flagged(self) -> bool:
        return self.count_mismatch or any(p.flagged for p in self.pairs)


def compare_repeatability(
    first: FrequencySweep,
    second: FrequencySweep,
    max_shift_mhz: float = DEFAULT_REPEATABILITY_MHZ,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
) -> RepeatabilityReport:
    """Pair up dips of two sweeps in frequency order and flag any pair
    whose centers differ by more than max_shift_mhz."""
    dips_a = detect_dips(first, threshold_db).dips
    dips_b = detect_dips(second, threshold_db).dips
    pairs = []
    for a, b in zip(dips_a, dips_b):
        shift = abs(a.f0_ghz - b.f0_ghz) * 1e3
        pairs.append(DipPair(a.f0_ghz, b.f0_ghz, shift,
                             shift > max_shift_mhz))
    return RepeatabilityReport(tuple(pairs), max_shift_mhz,
                               len(dips_a) != len(dips_b))


# -- synthesis ----------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticDip:
    """One Lorentzian-shaped dip with exact edge crossings.

    band_ghz gives the two frequencies where the magnitude crosses
    edge_level_db; depth_db is the dip level at f0_ghz and must be deeper
    than edge_level_db.
    """

    f0_ghz: float
    depth_db: float
    band_ghz: tuple[float, float]
    edge_level_db: float = DEFAULT_THRESHOLD_DB

    def magnitude(self, freq_ghz: np.ndarray) -> np.ndarray:
        g = 10.0 ** (self.depth_db / 20.0)
        t = 10.0 ** (self.edge_level_db / 20.0)
        if not g < t:
            raise InvalidValue("depth_db must lie below edge_level_db")
        half_width = (self.band_ghz[1] - self.band_ghz[0]) / 2.0
        if half_width <= 0.0:
            raise InvalidValue("band edges must be ascending")
        k_sq = 4.0 * half_width ** 2 * (1.0 - t) / (t - g)
        detune_sq = 4.0 * (freq_ghz - self.f0_ghz) ** 2
        return 1.0 - (1.0 - g) * k_sq / (k_sq + detune_sq)


def synthesize_sweep(
    f_start_ghz: float,
    f_stop_ghz: float,
    step_ghz: float,
    dips: Iterable[SyntheticDip],
    reference_ohm: float = 50.0,
) -> FrequencySweep:
    """Real-valued (zero-phase) sweep whose dB trace carries the given dips."""
    n = int(round((f_stop_ghz - f_start_ghz) / step_ghz)) + 1
    freq = np.linspace(f_start_ghz, f_stop_ghz, n)
    mag = np.ones_like(freq)
    for dip in dips:
        mag = mag * dip.magnitude(freq)
    return FrequencySweep(freq, mag.astype(np.complex128),
                          SweepFormat.SYNTHETIC, reference_ohm)
