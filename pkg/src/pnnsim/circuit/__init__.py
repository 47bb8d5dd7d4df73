"""Electrical netlists, modified nodal analysis and transient co-simulation."""

from .engine import RunStats, SimState, Simulator, cosimulate
from .mna import DcSystem, TransientSystem
from .netlist import (GROUND, Capacitor, Combiner, DelayLine, Inductor,
                      ISource, Laser, Mrr, Netlist, Photodiode,
                      PnModulatorLoad, Probe, Resistor, SimOptions, Splitter,
                      VSource, Waveguide)
from .trace import Trace

__all__ = [
    "GROUND", "Capacitor", "Combiner", "DcSystem", "DelayLine", "ISource",
    "Inductor", "Laser", "Mrr", "Netlist", "Photodiode", "PnModulatorLoad",
    "Probe", "Resistor", "RunStats", "SimOptions", "SimState", "Simulator",
    "Splitter", "Trace", "TransientSystem", "VSource", "Waveguide",
    "cosimulate",
]
