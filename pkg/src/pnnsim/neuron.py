"""Builders for photonic-neuron netlists.

A neuron is a WDM weight bank (cascaded heater-tuned add-drop rings whose
drop and thru buses land on a balanced photodetector pair), the receiver
electronics (bias resistor, PN modulator load, bond-pad/wire-bond parasitics
and photodetector bias tees), and a PN microring modulator that re-modulates
the junction voltage onto a fresh pump carrier.

The full receiver follows the single-neuron circuit used throughout: the
balanced pair feeds the junction node, the modulator load and bias resistor
sit between the junction and its return, the bias current enters through a
wire bond, and each photodetector rail is fed by a V_PD source through an
L/C bias tee.  `ideal_dc_bias` swaps the tees and bond parasitics on the
bias paths for ideal sources, which removes the (undamped) kHz tee modes
from runs that never excite them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .circuit.netlist import (Capacitor, Combiner, DelayLine, Inductor,
                              ISource, Laser, Mrr, Netlist, Photodiode,
                              PnModulatorLoad, Probe, Resistor, Splitter,
                              VSource)
from .devices import (HeaterParams, PhotodetectorParams, PnModulatorParams,
                      SourceSpec)
from .optics import MrrParams

#: extinction coefficient giving ~0.1 dB round-trip loss on an 8 um ring
ALPHA0_01DB = 5.64e-6

#: weight-ring effective index: puts the cold resonances of the default bank
#: geometry (8 um + i*12 nm rings, 1548.7 + i*2.35 nm channels) about 1 nm
#: blue of their own channels, clear of the neighboring channels, so each
#: heater tunes its ring onto its channel with a fraction of a milliamp
WEIGHT_RING_N0 = 2.401665


@dataclass(frozen=True)
class RingDesign:
    """Geometry shared by weight-bank rings."""

    k: float = 0.3
    n0: float = WEIGHT_RING_N0
    alpha0: float = ALPHA0_01DB
    heater: HeaterParams = field(default_factory=HeaterParams)


@dataclass(frozen=True)
class ModulatorDesign:
    """Geometry and junction model of the output microring modulator."""

    k: float = 0.15
    n0: float = 2.4
    alpha0: float = ALPHA0_01DB
    radius_hint: float = 8e-6
    params: PnModulatorParams = field(default_factory=PnModulatorParams)


@dataclass(frozen=True)
class ReceiverDesign:
    """Electrical receiver: bias network and parasitics (defaults per the
    single-neuron circuit: C_p = 10 fF, L_b = 1 nH, L_T = 1 mH, C_T = 2 uF)."""

    r_b: float = 10e3
    c_pad: float = 10e-15
    l_bond: float = 1e-9
    l_tee: float = 1e-3
    c_tee: float = 2e-6
    v_pd: float = 2.0
    ideal_dc_bias: bool = False
    photodetector: PhotodetectorParams = field(default_factory=PhotodetectorParams)


@dataclass(frozen=True)
class BankChannel:
    """One weight-bank ring: its channel wavelength, radius and drive."""

    wavelength: float
    radius: float
    heater_current: object = 0.0   # waveform or constant (A)


@dataclass
class NeuronRefs:
    """Element/port handles returned by `add_neuron`."""

    name: str
    bank_inputs: list[str]          # "elem.port" strings to wire signals into
    output_port: str                # modulator thru port ("elem.port")
    mod_ring: str
    modulator: str                  # pn_modulator element id
    junction_node: str
    pump: str
    pd_drop: str
    pd_thru: str
    bank_rings: list[str]


def ring_radius_for_resonance(lam_target: float, n0: float,
                              radius_hint: float) -> float:
    """Radius near `radius_hint` whose cold resonance sits exactly at lam_target."""
    m = max(1, round(n0 * 2.0 * math.pi * radius_hint / lam_target))
    return m * lam_target / (2.0 * math.pi * n0)


def mod_ring_radius(lam_channel: float, design: ModulatorDesign,
                    v_bias: float, detuning: float) -> float:
    """Radius placing the modulator resonance at lam_channel + detuning when
    the junction sits at `v_bias`.

    The PN shift moves the resonance by lam * dn / n0; the cold radius is
    offset so the biased ring lands on the requested detuning.
    """
    p = design.params
    dn_bias = p.dn_dv * v_bias + p.dn_dv2 * v_bias * v_bias
    lam_cold = lam_channel + detuning - lam_channel * dn_bias / design.n0
    return ring_radius_for_resonance(lam_cold, design.n0, design.radius_hint)


def add_neuron(net: Netlist, name: str, *,
               bank: list[BankChannel],
               pump: SourceSpec,
               mod_radius: float,
               n_bank_inputs: int = 1,
               ibias=0.0,
               ring_design: RingDesign = RingDesign(),
               mod_design: ModulatorDesign = ModulatorDesign(),
               receiver: ReceiverDesign = ReceiverDesign()) -> NeuronRefs:
    """Add one complete neuron to `net`; wiring of bank inputs is the caller's."""
    nm = lambda s: f"{name}_{s}"
    node = lambda s: f"{name}:{s}"
    a, b, m, n_ret = node("a"), node("b"), node("m"), node("n")

    # --- electrical receiver -------------------------------------------------
    pd = receiver.photodetector
    net.add(Photodiode(nm("pd_drop"), a, m, pd))
    net.add(Photodiode(nm("pd_thru"), m, b, pd))
    net.add(PnModulatorLoad(nm("mod"), m, n_ret, mod_design.params))
    net.add(Resistor(nm("rb"), m, n_ret, receiver.r_b))
    net.add(Capacitor(nm("cp_am"), a, m, receiver.c_pad))
    net.add(Capacitor(nm("cp_mb"), m, b, receiver.c_pad))

    if receiver.ideal_dc_bias:
        net.add(VSource(nm("vpd_top"), a, "gnd", receiver.v_pd))
        net.add(VSource(nm("vpd_bot"), b, "gnd", -receiver.v_pd))
        net.add(ISource(nm("ibias"), "gnd", m, ibias))
        net.add(Resistor(nm("ret"), n_ret, "gnd", 1e-3))
    else:
        net.add(Capacitor(nm("cp_nb"), n_ret, b, receiver.c_pad))
        net.add(Inductor(nm("lb_ret"), n_ret, "gnd", receiver.l_bond))
        w = node("w")
        net.add(ISource(nm("ibias"), "gnd", w, ibias))
        net.add(Inductor(nm("lb_bias"), w, m, receiver.l_bond))
        t1, t2 = node("t1"), node("t2")
        net.add(Inductor(nm("lb_top"), a, t1, receiver.l_bond))
        net.add(Capacitor(nm("ct_top"), t1, "gnd", receiver.c_tee))
        net.add(Inductor(nm("lt_top"), t1, t2, receiver.l_tee))
        net.add(VSource(nm("vpd_top"), t2, "gnd", receiver.v_pd))
        b1, b2 = node("b1"), node("b2")
        net.add(Inductor(nm("lb_bot"), b, b1, receiver.l_bond))
        net.add(Capacitor(nm("ct_bot"), b1, "gnd", receiver.c_tee))
        net.add(Inductor(nm("lt_bot"), b1, b2, receiver.l_tee))
        net.add(VSource(nm("vpd_bot"), b2, "gnd", -receiver.v_pd))

    # --- weight bank ----------------------------------------------------------
    net.add(Combiner(nm("cmb"), max(1, n_bank_inputs)))
    ring_ids = []
    prev_thru = f"{nm('cmb')}.out"
    prev_drop = None
    for i, ch in enumerate(bank):
        rid = nm(f"w{i}")
        ring = MrrParams.make(ch.radius, ring_design.k, ring_design.k,
                              ring_design.n0, ring_design.alpha0, "heater")
        net.add(Mrr(rid, ring, heater_params=ring_design.heater,
                    heater_current=ch.heater_current))
        net.connect(prev_thru, f"{rid}.in")
        if prev_drop is not None:
            net.connect(prev_drop, f"{rid}.add")
        prev_thru = f"{rid}.thru"
        prev_drop = f"{rid}.drop"
        ring_ids.append(rid)
    net.connect(prev_thru, f"{nm('pd_thru')}.in")
    if prev_drop is not None:
        net.connect(prev_drop, f"{nm('pd_drop')}.in")

    # --- output modulator -------------------------------------------------------
    net.add(Laser(nm("pump"), pump))
    mod_ring = MrrParams.make(mod_radius, mod_design.k, mod_design.k,
                              mod_design.n0, mod_design.alpha0, "pn_modulator")
    net.add(Mrr(nm("mod_ring"), mod_ring, modulator=nm("mod")))
    net.connect(f"{nm('pump')}.out", f"{nm('mod_ring')}.in")

    return NeuronRefs(
        name=name,
        bank_inputs=[f"{nm('cmb')}.in{i}" for i in range(max(1, n_bank_inputs))],
        output_port=f"{nm('mod_ring')}.thru",
        mod_ring=nm("mod_ring"),
        modulator=nm("mod"),
        junction_node=m,
        pump=nm("pump"),
        pd_drop=nm("pd_drop"),
        pd_thru=nm("pd_thru"),
        bank_rings=ring_ids,
    )


# ---------------------------------------------------------------------------
# Experiment topologies
# ---------------------------------------------------------------------------

def feedforward_neuron(*, inputs: list[SourceSpec], bank: list[BankChannel],
                       pump: SourceSpec, mod_radius: float, ibias=0.0,
                       ring_design=RingDesign(), mod_design=ModulatorDesign(),
                       receiver=ReceiverDesign(), extra_probes=True) -> tuple[Netlist, NeuronRefs]:
    """Fan-in topology: external AM inputs into the bank, no feedback."""
    net = Netlist()
    refs = add_neuron(net, "n1", bank=bank, pump=pump, mod_radius=mod_radius,
                      n_bank_inputs=len(inputs), ibias=ibias,
                      ring_design=ring_design, mod_design=mod_design,
                      receiver=receiver)
    for i, spec in enumerate(inputs):
        lid = f"in{i}"
        net.add(Laser(lid, spec))
        net.connect(f"{lid}.out", refs.bank_inputs[i])
    net.probes.append(Probe("v_junction", "vmod", element=refs.modulator))
    net.probes.append(Probe("p_out", "optical_power", element=refs.mod_ring,
                            port="thru", wavelength=pump.wavelength))
    if extra_probes:
        for i, spec in enumerate(inputs):
            net.probes.append(Probe(f"p_in{i}", "optical_power", element=f"in{i}",
                                    port="out"))
        net.probes.append(Probe("i_drop", "photocurrent", element=refs.pd_drop))
        net.probes.append(Probe("i_thru", "photocurrent", element=refs.pd_thru))
    net.validate()
    return net, refs


def self_feedback_neuron(*, bank_channel: BankChannel, pump: SourceSpec,
                         mod_radius: float, ibias=0.0, delay: float = 10e-12,
                         ring_design=RingDesign(), mod_design=ModulatorDesign(),
                         receiver=ReceiverDesign()) -> tuple[Netlist, NeuronRefs]:
    """Cascadability topology: the modulated output loops back into the bank
    through a delay line (1 mm of waveguide ~ 10 ps)."""
    net = Netlist()
    refs = add_neuron(net, "n1", bank=[bank_channel], pump=pump,
                      mod_radius=mod_radius, n_bank_inputs=1, ibias=ibias,
                      ring_design=ring_design, mod_design=mod_design,
                      receiver=receiver)
    net.add(DelayLine("fb_delay", delay))
    net.connect(refs.output_port, "fb_delay.in")
    net.connect("fb_delay.out", refs.bank_inputs[0])
    net.probes.append(Probe("v_junction", "vmod", element=refs.modulator))
    net.probes.append(Probe("p_out", "optical_power", element=refs.mod_ring,
                            port="thru", wavelength=pump.wavelength))
    net.validate()
    return net, refs


def two_neuron_network(*, wavelengths: tuple[float, float],
                       radii: tuple[float, float],
                       self_currents: tuple[object, object],
                       cross_currents: tuple[object, object],
                       pump_powers: tuple[float, float],
                       mod_radii: tuple[float, float],
                       ibias: tuple[object, object],
                       inputs: list[SourceSpec] | None = None,
                       input_currents: tuple[object, object] = (0.0, 0.0),
                       input_radii: tuple[float, float] | None = None,
                       delay: float = 10e-12,
                       ring_design=RingDesign(), mod_design=ModulatorDesign(),
                       receiver=ReceiverDesign()) -> tuple[Netlist, list[NeuronRefs]]:
    """Two neurons, each feeding back to itself and across to the other.

    Bank ring order per neuron i: [self channel lam_i, cross channel lam_j,
    optional input channel].  `inputs`, when given, adds per-neuron input
    lasers (WTA drive) carried on their own wavelengths.
    """
    lam1, lam2 = wavelengths
    has_inputs = inputs is not None and len(inputs) == 2
    net = Netlist()
    refs = []
    for i in range(2):
        lam_self, lam_cross = (lam1, lam2) if i == 0 else (lam2, lam1)
        r_self, r_cross = (radii[0], radii[1]) if i == 0 else (radii[1], radii[0])
        bank = [BankChannel(lam_self, r_self, self_currents[i]),
                BankChannel(lam_cross, r_cross, cross_currents[i])]
        n_in = 2
        if has_inputs:
            bank.append(BankChannel(inputs[i].wavelength, input_radii[i],
                                    input_currents[i]))
            n_in = 3
        pump = SourceSpec(wavelength=lam_self, power=pump_powers[i])
        refs.append(add_neuron(net, f"n{i + 1}", bank=bank, pump=pump,
                               mod_radius=mod_radii[i], n_bank_inputs=n_in,
                               ibias=ibias[i], ring_design=ring_design,
                               mod_design=mod_design, receiver=receiver))
    for i in range(2):
        other = 1 - i
        net.add(DelayLine(f"fb{i + 1}", delay))
        net.add(Splitter(f"spl{i + 1}", 0.5))
        net.connect(refs[i].output_port, f"fb{i + 1}.in")
        net.connect(f"fb{i + 1}.out", f"spl{i + 1}.in")
        # out1 -> own bank input 0 (self), out2 -> other's input 1 (cross)
        net.connect(f"spl{i + 1}.out1", refs[i].bank_inputs[0])
        net.connect(f"spl{i + 1}.out2", refs[other].bank_inputs[1])
    if has_inputs:
        for i in range(2):
            lid = f"x{i + 1}"
            net.add(Laser(lid, inputs[i]))
            net.connect(f"{lid}.out", refs[i].bank_inputs[2])
            net.probes.append(Probe(f"p_x{i + 1}", "optical_power",
                                    element=lid, port="out"))
    for i in range(2):
        net.probes.append(Probe(f"v_junction{i + 1}", "vmod",
                                element=refs[i].modulator))
        net.probes.append(Probe(f"p_out{i + 1}", "optical_power",
                                element=refs[i].mod_ring, port="thru",
                                wavelength=wavelengths[i]))
    net.validate()
    return net, refs


def weight_bank_neuron(*, bank: list[BankChannel], probe_source: SourceSpec,
                       mod_radius: float, ibias=0.0,
                       ring_design=RingDesign(), mod_design=ModulatorDesign(),
                       receiver=ReceiverDesign()) -> tuple[Netlist, NeuronRefs]:
    """Calibration topology: one probe/pump laser into the bank, junction probed."""
    net = Netlist()
    refs = add_neuron(net, "n1", bank=bank, pump=SourceSpec(probe_source.wavelength, 0.0),
                      mod_radius=mod_radius, n_bank_inputs=1, ibias=ibias,
                      ring_design=ring_design, mod_design=mod_design,
                      receiver=receiver)
    net.add(Laser("probe", probe_source))
    net.connect("probe.out", refs.bank_inputs[0])
    net.probes.append(Probe("v_junction", "vmod", element=refs.modulator))
    net.probes.append(Probe("i_drop", "photocurrent", element=refs.pd_drop))
    net.probes.append(Probe("i_thru", "photocurrent", element=refs.pd_thru))
    net.validate()
    return net, refs


def set_heater_current(net: Netlist, ring_id: str, current) -> None:
    """Point a bank ring's heater drive at a new value (weight application)."""
    from .harness.waveforms import as_waveform
    elem = net.element(ring_id)
    elem.heater_current = as_waveform(current)


def set_source(net: Netlist, laser_id: str, *, wavelength=None, power=None,
               modulation=None) -> None:
    elem = net.element(laser_id)
    spec = elem.spec
    elem.spec = replace(
        spec,
        wavelength=spec.wavelength if wavelength is None else wavelength,
        power=spec.power if power is None else power,
        modulation=spec.modulation if modulation is None else modulation)


def set_ibias(net: Netlist, neuron_name: str, value) -> None:
    from .harness.waveforms import as_waveform
    elem = net.element(f"{neuron_name}_ibias")
    elem.value = as_waveform(value)
