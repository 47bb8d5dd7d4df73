"""pnnsim: electro-optic co-simulation of WDM silicon photonic neurons.

Subpackages:

* :mod:`pnnsim.optics` — WDM field envelopes and passive components.
* :mod:`pnnsim.devices` — heaters, PN modulators, photodetectors, sources.
* :mod:`pnnsim.circuit` — netlists, nodal analysis, transient co-simulation.
* :mod:`pnnsim.ctrnn` — abstract continuous-time recurrent network reference.
* :mod:`pnnsim.calibration` — weight-bank current-to-weight mapping.
* :mod:`pnnsim.harness` — experiment runner, metrics and CLI.
"""

__version__ = "0.1.0"
