"""Reconfigurable spiral-resonator antenna toolkit: microstrip math,
equivalent-circuit resonance analysis, reflection-sweep ingestion, and
FDR soil-moisture inversion."""

__version__ = "0.1.0"

from .microstrip import (  # noqa: F401
    FormulaFidelity,
    LineParams,
    MicrostripLine,
    Substrate,
    characteristic_impedance,
    effective_permittivity,
    line_inductance,
)
from .circuit_elements import (  # noqa: F401
    Capacitor,
    DiodeModel,
    DiodeState,
    Inductor,
    LineSegment,
    Parallel,
    Resistor,
    Series,
    parallel,
    series,
)
from .circuit import (  # noqa: F401
    ResonanceMethod,
    ResonanceReport,
    abcd_of_line,
    build_3csr,
    build_3rcsr,
    build_jcasa,
    find_resonances,
    impedance,
    reflection,
)
