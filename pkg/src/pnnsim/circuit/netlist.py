"""Electro-optic netlist: lumped electrical elements, behavioral photonic
elements, directed optical wiring and probes.

Electrical connectivity is by shared node names; the ground node is "gnd".
Optical connectivity is a list of directed (output port -> input port)
connections; feedback must pass through an explicit delay line, so the
optical graph with delay-line outputs removed must be acyclic.

The JSON schema (version 1) is::

    {
      "version": 1,
      "elements": [{"id", "kind", "params": {...},
                    "terminals": {...}, "ports": {...}}],
      "connections": [["src_id.port", "dst_id.port"], ...],
      "probes": [{"name", "kind", ...}],
      "sim": {"dt": s, "duration": s, "method": "backward_euler"|"trapezoidal"}
    }
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from ..devices import PhotodetectorParams, PnModulatorParams, HeaterParams, SourceSpec
from ..errors import NetlistError
from ..harness.waveforms import as_waveform
from ..optics import CouplerParams, MrrParams, WaveguideParams

GROUND = "gnd"


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass
class Resistor:
    id: str
    a: str
    b: str
    resistance: float
    kind: str = field(default="resistor", init=False)

    def terminals(self):
        return {"a": self.a, "b": self.b}


@dataclass
class Capacitor:
    id: str
    a: str
    b: str
    capacitance: float
    kind: str = field(default="capacitor", init=False)

    def terminals(self):
        return {"a": self.a, "b": self.b}


@dataclass
class Inductor:
    id: str
    a: str
    b: str
    inductance: float
    kind: str = field(default="inductor", init=False)

    def terminals(self):
        return {"a": self.a, "b": self.b}


@dataclass
class VSource:
    """Ideal voltage source: v(pos) - v(neg) = value(t)."""

    id: str
    pos: str
    neg: str
    value: object  # waveform or constant
    kind: str = field(default="vsource", init=False)

    def __post_init__(self):
        self.value = as_waveform(self.value)

    def terminals(self):
        return {"pos": self.pos, "neg": self.neg}


@dataclass
class ISource:
    """Ideal current source pushing value(t) amperes from `a` into `b`."""

    id: str
    a: str
    b: str
    value: object
    kind: str = field(default="isource", init=False)

    def __post_init__(self):
        self.value = as_waveform(self.value)

    def terminals(self):
        return {"a": self.a, "b": self.b}


@dataclass
class Photodiode:
    """Optical-input behavioral current source with its parasitic network.

    The photocurrent source, junction capacitance and shunt resistance sit in
    parallel between terminal `p` and an internal junction node; the series
    resistance connects that node to terminal `n`.  Photocurrent flows p -> n
    through the element.  Optical input port: "in".
    """

    id: str
    p: str
    n: str
    params: PhotodetectorParams
    kind: str = field(default="photodiode", init=False)

    def terminals(self):
        return {"p": self.p, "n": self.n}

    @property
    def internal_node(self) -> str:
        # source/C/R_sh group spans p..j, series R spans j..n; R_s = 0 merges j into n
        return f"{self.id}::j" if self.params.series_resistance > 0.0 else self.n


@dataclass
class PnModulatorLoad:
    """Electrical load of the PN microring modulator.

    Series resistance from `p` to the internal junction node, junction
    capacitance from there to `n`; the junction voltage v_mod (across the
    capacitance) is what the optics sees.
    """

    id: str
    p: str
    n: str
    params: PnModulatorParams
    kind: str = field(default="pn_modulator", init=False)

    def terminals(self):
        return {"p": self.p, "n": self.n}

    @property
    def internal_node(self) -> str:
        return f"{self.id}::j" if self.params.series_resistance > 0.0 else self.p


@dataclass
class Laser:
    """CW pump with optional AM envelope; output port: "out"."""

    id: str
    spec: SourceSpec
    kind: str = field(default="laser", init=False)

    output_ports = ("out",)
    input_ports = ()


@dataclass
class Waveguide:
    id: str
    params: WaveguideParams
    kind: str = field(default="waveguide", init=False)

    output_ports = ("out",)
    input_ports = ("in",)


@dataclass
class Splitter:
    """Ideal power splitter: fraction `ratio` to out1, the rest to out2."""

    id: str
    ratio: float = 0.5
    kind: str = field(default="splitter", init=False)

    output_ports = ("out1", "out2")
    input_ports = ("in",)

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise NetlistError(f"splitter ratio must be in [0, 1], got {self.ratio}")


@dataclass
class Combiner:
    """Ideal WDM multiplexer onto one waveguide; inputs in0..in{n-1}."""

    id: str
    n_inputs: int = 2
    kind: str = field(default="combiner", init=False)

    output_ports = ("out",)

    def __post_init__(self):
        if self.n_inputs < 1:
            raise NetlistError(f"combiner needs >= 1 input, got {self.n_inputs}")

    @property
    def input_ports(self):
        return tuple(f"in{i}" for i in range(self.n_inputs))


@dataclass
class Mrr:
    """Add-drop microring with a heater or PN-modulator phase shifter.

    Heater rings carry their own HeaterParams and a current drive (waveform
    or constant); modulator rings reference a pn_modulator element whose
    junction voltage actuates the ring.
    """

    id: str
    params: MrrParams
    heater_params: HeaterParams | None = None
    heater_current: object = 0.0
    modulator: str | None = None
    kind: str = field(default="mrr", init=False)

    output_ports = ("thru", "drop")
    input_ports = ("in", "add")

    def __post_init__(self):
        if self.params.shifter_kind == "heater":
            if self.heater_params is None:
                self.heater_params = HeaterParams()
            self.heater_current = as_waveform(self.heater_current)
        elif self.modulator is None:
            raise NetlistError(
                f"mrr {self.id!r} uses a pn_modulator shifter but references no "
                "pn_modulator element")


@dataclass
class DelayLine:
    """Pure optical delay; output lags input by `delay` seconds."""

    id: str
    delay: float
    kind: str = field(default="delay_line", init=False)

    output_ports = ("out",)
    input_ports = ("in",)

    def __post_init__(self):
        if self.delay < 0.0:
            raise NetlistError(f"delay must be >= 0, got {self.delay}")


ELECTRICAL_KINDS = ("resistor", "capacitor", "inductor", "vsource", "isource",
                    "photodiode", "pn_modulator")
OPTICAL_KINDS = ("laser", "waveguide", "splitter", "combiner", "mrr", "delay_line")


@dataclass
class Probe:
    """Named observable recorded each step.

    kinds: "voltage" (node), "vmod" (pn_modulator id), "branch_current"
    (inductor or vsource id), "photocurrent" (photodiode id),
    "optical_power" (element, port, optional wavelength; None = total).
    """

    name: str
    kind: str
    node: str | None = None
    element: str | None = None
    port: str | None = None
    wavelength: float | None = None

    def __post_init__(self):
        kinds = ("voltage", "vmod", "branch_current", "photocurrent", "optical_power")
        if self.kind not in kinds:
            raise NetlistError(f"unknown probe kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Netlist container and validation
# ---------------------------------------------------------------------------

@dataclass
class SimOptions:
    dt: float = 1e-12
    duration: float = 1e-9
    method: str = "backward_euler"

    def __post_init__(self):
        if self.method not in ("backward_euler", "trapezoidal"):
            raise NetlistError(f"unknown integration method {self.method!r}")
        if self.dt <= 0.0:
            raise NetlistError(f"dt must be > 0, got {self.dt}")


class Netlist:
    """Container plus structural validation for an electro-optic circuit."""

    def __init__(self, elements=(), connections=(), probes=(), sim=None):
        self.elements = list(elements)
        self.connections = [(tuple(src), tuple(dst)) if not isinstance(src, str)
                            else _parse_conn(src, dst)
                            for src, dst in connections]
        self.probes = list(probes)
        self.sim = sim or SimOptions()
        self._by_id = {}
        self.validate()

    # -- access helpers ----------------------------------------------------

    def element(self, elem_id: str):
        return self._by_id[elem_id]

    def add(self, element):
        self.elements.append(element)
        return element

    def connect(self, src: str, dst: str):
        """Wire "elem.port" -> "elem.port" (optical)."""
        self.connections.append(_parse_conn(src, dst))

    def electrical_elements(self):
        return [e for e in self.elements if e.kind in ELECTRICAL_KINDS]

    def optical_elements(self):
        return [e for e in self.elements if e.kind in OPTICAL_KINDS]

    # -- validation ---------------------------------------------------------

    def validate(self):
        ids = [e.id for e in self.elements]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise NetlistError(f"duplicate element ids: {sorted(dupes)}")
        self._by_id = {e.id: e for e in self.elements}

        names = [p.name for p in self.probes]
        if len(set(names)) != len(names):
            raise NetlistError("duplicate probe names")

        self._validate_electrical()
        self._validate_optical()
        self._validate_probes()
        return self

    def _validate_electrical(self):
        elems = self.electrical_elements()
        if not elems:
            return
        # connectivity to ground through any element
        parent: dict[str, str] = {}

        def find(x):
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        nodes = set()
        for e in elems:
            term = list(e.terminals().values())
            nodes.update(term)
            for a, b in zip(term, term[1:]):
                union(a, b)
        nodes.add(GROUND)
        find(GROUND)
        floating = sorted(n for n in nodes if find(n) != find(GROUND))
        if floating:
            raise NetlistError(f"electrical nodes not connected to ground: {floating}")

        # pure voltage-source loops are singular
        vparent: dict[str, str] = {}

        def vfind(x):
            vparent.setdefault(x, x)
            while vparent[x] != x:
                vparent[x] = vparent[vparent[x]]
                x = vparent[x]
            return x

        for e in elems:
            if e.kind == "vsource":
                ra, rb = vfind(e.pos), vfind(e.neg)
                if ra == rb:
                    raise NetlistError(f"voltage-source loop involving {e.id!r}")
                vparent[ra] = rb

        # modulator references from rings
        for e in self.elements:
            if e.kind == "mrr" and e.params.shifter_kind == "pn_modulator":
                if e.modulator not in self._by_id:
                    raise NetlistError(
                        f"mrr {e.id!r} references unknown modulator {e.modulator!r}")
                if self._by_id[e.modulator].kind != "pn_modulator":
                    raise NetlistError(
                        f"mrr {e.id!r} modulator {e.modulator!r} is not a pn_modulator")

    def _validate_optical(self):
        inputs_seen = set()
        for (src_id, src_port), (dst_id, dst_port) in self.connections:
            for eid, port, direction in ((src_id, src_port, "out"),
                                         (dst_id, dst_port, "in")):
                if eid not in self._by_id:
                    raise NetlistError(f"connection references unknown element {eid!r}")
                e = self._by_id[eid]
                if e.kind not in OPTICAL_KINDS and e.kind != "photodiode":
                    raise NetlistError(f"element {eid!r} has no optical ports")
                valid = (("in",) if e.kind == "photodiode" else
                         (e.output_ports if direction == "out" else e.input_ports))
                if port not in valid:
                    raise NetlistError(
                        f"{eid!r} has no {'output' if direction == 'out' else 'input'} "
                        f"port {port!r} (valid: {valid})")
            if (dst_id, dst_port) in inputs_seen:
                raise NetlistError(f"input port {dst_id}.{dst_port} wired twice")
            inputs_seen.add((dst_id, dst_port))
        self.topo_order()  # raises on zero-delay cycles

    def _validate_probes(self):
        for p in self.probes:
            if p.kind == "voltage":
                if p.node is None:
                    raise NetlistError(f"probe {p.name!r}: voltage probe needs a node")
            elif p.kind in ("vmod", "branch_current", "photocurrent"):
                e = self._by_id.get(p.element)
                if e is None:
                    raise NetlistError(f"probe {p.name!r}: unknown element {p.element!r}")
                want = {"vmod": ("pn_modulator",),
                        "branch_current": ("inductor", "vsource"),
                        "photocurrent": ("photodiode",)}[p.kind]
                if e.kind not in want:
                    raise NetlistError(
                        f"probe {p.name!r}: element {p.element!r} is {e.kind}, "
                        f"expected one of {want}")
            elif p.kind == "optical_power":
                e = self._by_id.get(p.element)
                if e is None:
                    raise NetlistError(f"probe {p.name!r}: unknown element {p.element!r}")

    def topo_order(self) -> list[str]:
        """Optical evaluation order; delay-line outputs break cycles.

        A cycle that does not pass through a delay line means the netlist has
        an algebraic optical loop, which is rejected.
        """
        optical = [e for e in self.elements
                   if e.kind in OPTICAL_KINDS or e.kind == "photodiode"]
        order_ids = [e.id for e in optical]
        deps: dict[str, set[str]] = {e.id: set() for e in optical}
        for (src_id, _sp), (dst_id, _dp) in self.connections:
            if self._by_id[src_id].kind == "delay_line":
                continue  # delayed value comes from the past
            deps[dst_id].add(src_id)
        out: list[str] = []
        done: set[str] = set()
        visiting: set[str] = set()

        def visit(eid, stack):
            if eid in done:
                return
            if eid in visiting:
                cycle = stack[stack.index(eid):] + [eid]
                raise NetlistError(
                    "optical feedback must pass through a delay line; "
                    f"algebraic loop: {' -> '.join(cycle)}")
            visiting.add(eid)
            for dep in sorted(deps[eid]):
                visit(dep, stack + [eid])
            visiting.discard(eid)
            done.add(eid)
            out.append(eid)

        for eid in order_ids:
            visit(eid, [])
        return out

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        elems = []
        for e in self.elements:
            entry = {"id": e.id, "kind": e.kind}
            entry.update(_element_payload(e))
            elems.append(entry)
        return {
            "version": 1,
            "elements": elems,
            "connections": [[f"{s[0]}.{s[1]}", f"{d[0]}.{d[1]}"]
                            for s, d in self.connections],
            "probes": [{k: v for k, v in asdict(p).items() if v is not None}
                       for p in self.probes],
            "sim": {"dt": self.sim.dt, "duration": self.sim.duration,
                    "method": self.sim.method},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "Netlist":
        if d.get("version") != 1:
            raise NetlistError(f"unsupported netlist version {d.get('version')!r}")
        elements = [_element_from_dict(ed) for ed in d.get("elements", [])]
        connections = [_parse_conn(src, dst) for src, dst in d.get("connections", [])]
        probes = [Probe(**pd) for pd in d.get("probes", [])]
        sim = SimOptions(**d["sim"]) if "sim" in d else SimOptions()
        return cls(elements=elements, connections=connections, probes=probes, sim=sim)

    @classmethod
    def from_json(cls, text: str) -> "Netlist":
        return cls.from_dict(json.loads(text))


def _parse_conn(src: str, dst: str):
    def split(ref):
        if isinstance(ref, (tuple, list)):
            return tuple(ref)
        if "." not in ref:
            raise NetlistError(f"optical connection endpoint {ref!r} must be 'elem.port'")
        eid, port = ref.rsplit(".", 1)
        return (eid, port)

    return (split(src), split(dst))


# -- element (de)serialization helpers ---------------------------------------

def _waveform_payload(w):
    if hasattr(w, "to_dict"):
        return w.to_dict()
    if isinstance(w, (int, float)):
        return float(w)
    raise NetlistError(f"waveform {w!r} is not serializable")


def _element_payload(e) -> dict:
    k = e.kind
    if k in ("resistor", "capacitor", "inductor"):
        value_key = {"resistor": "resistance", "capacitor": "capacitance",
                     "inductor": "inductance"}[k]
        return {"terminals": e.terminals(), "params": {value_key: getattr(e, value_key)}}
    if k == "vsource":
        return {"terminals": e.terminals(), "params": {"value": _waveform_payload(e.value)}}
    if k == "isource":
        return {"terminals": e.terminals(), "params": {"value": _waveform_payload(e.value)}}
    if k == "photodiode":
        return {"terminals": e.terminals(), "params": asdict(e.params)}
    if k == "pn_modulator":
        p = asdict(e.params)
        p["validity_window"] = list(p["validity_window"])
        return {"terminals": e.terminals(), "params": p}
    if k == "laser":
        spec = {"wavelength": e.spec.wavelength, "power": e.spec.power}
        if e.spec.modulation is not None:
            spec["modulation"] = _waveform_payload(e.spec.modulation)
        return {"params": spec}
    if k == "waveguide":
        return {"params": asdict(e.params)}
    if k == "splitter":
        return {"params": {"ratio": e.ratio}}
    if k == "combiner":
        return {"params": {"n_inputs": e.n_inputs}}
    if k == "mrr":
        ring = e.params
        params = {"radius": ring.radius, "k_in": ring.coupler_in.k,
                  "k_drop": ring.coupler_drop.k, "n0": ring.waveguide.n0,
                  "alpha0": ring.waveguide.alpha0,
                  "shifter_kind": ring.shifter_kind}
        if ring.shifter_kind == "heater":
            params["heater"] = asdict(e.heater_params)
            params["heater_current"] = _waveform_payload(e.heater_current)
        else:
            params["modulator"] = e.modulator
        return {"params": params}
    if k == "delay_line":
        return {"params": {"delay": e.delay}}
    raise NetlistError(f"unknown element kind {k!r}")


def _element_from_dict(d: dict):
    kind = d.get("kind")
    eid = d.get("id")
    params = d.get("params", {})
    term = d.get("terminals", {})
    try:
        if kind == "resistor":
            return Resistor(eid, term["a"], term["b"], float(params["resistance"]))
        if kind == "capacitor":
            return Capacitor(eid, term["a"], term["b"], float(params["capacitance"]))
        if kind == "inductor":
            return Inductor(eid, term["a"], term["b"], float(params["inductance"]))
        if kind == "vsource":
            return VSource(eid, term["pos"], term["neg"], params["value"])
        if kind == "isource":
            return ISource(eid, term["a"], term["b"], params["value"])
        if kind == "photodiode":
            return Photodiode(eid, term["p"], term["n"], PhotodetectorParams(**params))
        if kind == "pn_modulator":
            p = dict(params)
            if "validity_window" in p:
                p["validity_window"] = tuple(p["validity_window"])
            return PnModulatorLoad(eid, term["p"], term["n"], PnModulatorParams(**p))
        if kind == "laser":
            mod = params.get("modulation")
            spec = SourceSpec(wavelength=float(params["wavelength"]),
                              power=float(params["power"]),
                              modulation=None if mod is None else as_waveform(mod))
            return Laser(eid, spec)
        if kind == "waveguide":
            return Waveguide(eid, WaveguideParams(**params))
        if kind == "splitter":
            return Splitter(eid, float(params.get("ratio", 0.5)))
        if kind == "combiner":
            return Combiner(eid, int(params.get("n_inputs", 2)))
        if kind == "mrr":
            ring = MrrParams.make(float(params["radius"]), float(params["k_in"]),
                                  float(params["k_drop"]), float(params["n0"]),
                                  float(params["alpha0"]),
                                  params.get("shifter_kind", "heater"))
            if ring.shifter_kind == "heater":
                return Mrr(eid, ring,
                           heater_params=HeaterParams(**params.get("heater", {})),
                           heater_current=params.get("heater_current", 0.0))
            return Mrr(eid, ring, modulator=params["modulator"])
        if kind == "delay_line":
            return DelayLine(eid, float(params["delay"]))
    except KeyError as exc:
        raise NetlistError(f"element {eid!r} ({kind}): missing field {exc}") from exc
    raise NetlistError(f"unknown element kind {kind!r}")
