"""Transient electro-optic co-simulation.

Each implicit step resolves the electro-optic coupling by damped fixed-point
iteration: (a) read delay-line optical inputs from their buffers, (b)
propagate the optics quasi-statically at the candidate modulator voltages
and heater currents, (c) compute photocurrents, (d) solve the electrical
system, (e) repeat until the junction voltages move less than `step_tol`
(1e-9 V) or the iteration limit is hit.  The DC operating point solves the
same loop with Newton on the modulator-voltage vector.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..devices import _modulator_shift, heater_index_shift, photodetect
from ..errors import ConvergenceError, InvalidInputError, NetlistError
from ..optics import OpticalField, WdmBus, merge_buses, mrr_transfer, propagate_waveguide
from .mna import DcSystem, TransientSystem
from .netlist import GROUND, Netlist
from .trace import Trace

STEP_TOL = 1e-9       # V, junction-voltage change per fixed-point iteration
MAX_STEP_ITER = 20
EMPTY_BUS = WdmBus(())


@dataclass
class SimState:
    t: float
    x: np.ndarray
    cap_i: np.ndarray
    v_mod: np.ndarray                 # junction voltages, modulator order
    v_eff: np.ndarray                 # optics-effective voltages (forward-bias lag)
    delay_buffers: dict[str, deque] = field(default_factory=dict)
    bootstrapped: bool = False        # first trapezoidal step taken with BE
    v_mod_prev: np.ndarray | None = None   # previous-step voltages (predictor)

    def copy(self) -> "SimState":
        return SimState(t=self.t, x=self.x.copy(), cap_i=self.cap_i.copy(),
                        v_mod=self.v_mod.copy(), v_eff=self.v_eff.copy(),
                        delay_buffers={k: deque(v, maxlen=v.maxlen)
                                       for k, v in self.delay_buffers.items()},
                        bootstrapped=self.bootstrapped,
                        v_mod_prev=None if self.v_mod_prev is None
                        else self.v_mod_prev.copy())


@dataclass
class RunStats:
    steps: int = 0
    total_iterations: int = 0
    max_iterations: int = 0
    max_kcl_residual: float = 0.0
    warnings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"steps": self.steps,
                "total_iterations": self.total_iterations,
                "max_iterations": self.max_iterations,
                "max_kcl_residual_a": self.max_kcl_residual,
                "warnings": dict(sorted(self.warnings.items()))}


class Simulator:
    """Owns the assembled systems and optical wiring for one netlist."""

    def __init__(self, netlist: Netlist, dt: float | None = None,
                 method: str | None = None):
        self.netlist = netlist
        self.dt = dt if dt is not None else netlist.sim.dt
        self.method = method if method is not None else netlist.sim.method
        self.tran = TransientSystem(netlist, self.dt, self.method)
        # trapezoidal runs bootstrap with one backward-Euler step so capacitor
        # currents start consistent across source discontinuities
        self._bootstrap = (TransientSystem(netlist, self.dt, "backward_euler")
                           if self.method == "trapezoidal" else None)
        self.dc_sys = DcSystem(netlist)
        self.st = self.tran.st

        self.order = netlist.topo_order()
        self.elems = {e.id: e for e in netlist.elements}
        self.in_edge: dict[tuple[str, str], tuple[str, str]] = {}
        for src, dst in netlist.connections:
            self.in_edge[dst] = src

        self.photodiodes = self.st.photodiodes
        self.modulators = self.st.modulators
        self.mod_index = {m.id: i for i, m in enumerate(self.modulators)}
        self._mod_nodes = [(self.st.idx(m.internal_node), self.st.idx(m.n))
                           for m in self.modulators]

        self.delays = [e for e in netlist.optical_elements() if e.kind == "delay_line"]
        for d in self.delays:
            if d.delay > 0.0 and round(d.delay / self.dt) < 1:
                raise NetlistError(
                    f"delay line {d.id!r}: delay {d.delay:.3e} s shorter than "
                    f"dt = {self.dt:.3e} s")
            if d.delay == 0.0:
                raise NetlistError(
                    f"delay line {d.id!r} has zero delay; feedback needs >= dt")
        self._warn_counts: dict[str, int] = {}

    # -- optics --------------------------------------------------------------

    def _gather(self, values, eid, port):
        src = self.in_edge.get((eid, port))
        if src is None:
            return EMPTY_BUS
        return values.get(src, EMPTY_BUS)

    def _eval_optics(self, t: float, v_eff: np.ndarray, delay_out: dict):
        """One quasi-static optics pass; returns (port values, photocurrents)."""
        # delay outputs come from buffers (the past), so they are inputs to
        # this pass and must be visible before any consumer is evaluated
        values: dict[tuple[str, str], WdmBus] = {
            (d.id, "out"): delay_out.get(d.id, EMPTY_BUS) for d in self.delays}
        pd_currents = np.zeros(len(self.photodiodes))
        pd_index = {pd.id: i for i, pd in enumerate(self.photodiodes)}
        for eid in self.order:
            e = self.elems[eid]
            kind = e.kind
            if kind == "laser":
                p = e.spec.power_at(t)
                values[(eid, "out")] = WdmBus.unchecked(
                    (OpticalField.from_power(p, e.spec.wavelength),))
            elif kind == "waveguide":
                bus = self._gather(values, eid, "in")
                values[(eid, "out")] = WdmBus.unchecked(tuple(
                    propagate_waveguide(c, e.params) for c in bus.channels))
            elif kind == "splitter":
                bus = self._gather(values, eid, "in")
                s1 = np.sqrt(e.ratio)
                s2 = np.sqrt(1.0 - e.ratio)
                values[(eid, "out1")] = WdmBus.unchecked(tuple(
                    OpticalField(c.e_real * s1, c.e_imag * s1, c.wavelength)
                    for c in bus.channels))
                values[(eid, "out2")] = WdmBus.unchecked(tuple(
                    OpticalField(c.e_real * s2, c.e_imag * s2, c.wavelength)
                    for c in bus.channels))
            elif kind == "combiner":
                buses = [self._gather(values, eid, p) for p in e.input_ports]
                values[(eid, "out")] = merge_buses(*buses)
            elif kind == "mrr":
                in_bus = self._gather(values, eid, "in")
                add_bus = self._gather(values, eid, "add")
                if e.params.shifter_kind == "heater":
                    dn = heater_index_shift(float(e.heater_current(t)), e.heater_params)
                else:
                    mod = self.elems[e.modulator]
                    v = float(v_eff[self.mod_index[e.modulator]])
                    lo, hi = mod.params.validity_window
                    if v < lo or v > hi:
                        key = f"{e.modulator}: voltage outside fitted window"
                        self._warn_counts[key] = self._warn_counts.get(key, 0) + 1
                    dn = _modulator_shift(v, mod.params)
                wavelengths = list(in_bus.wavelengths)
                for wl in add_bus.wavelengths:
                    if in_bus.channel_at(wl) is None:
                        wavelengths.append(wl)
                thru_ch, drop_ch = [], []
                for wl in wavelengths:
                    f_in = in_bus.channel_at(wl) or OpticalField(0.0, 0.0, wl)
                    f_add = add_bus.channel_at(wl) or OpticalField(0.0, 0.0, wl)
                    thru, drop = mrr_transfer(f_in, f_add, e.params, dn)
                    thru_ch.append(thru)
                    drop_ch.append(drop)
                values[(eid, "thru")] = WdmBus.unchecked(tuple(thru_ch))
                values[(eid, "drop")] = WdmBus.unchecked(tuple(drop_ch))
            elif kind == "delay_line":
                pass  # output pre-seeded from the buffer
            elif kind == "photodiode":
                bus = self._gather(values, eid, "in")
                pd_currents[pd_index[eid]] = photodetect(bus, e.params)
        return values, pd_currents

    def _eval_optics_dc(self, t0: float, v_eff: np.ndarray):
        """Optics steady state with delay lines passing through (relaxation)."""
        delay_out = {d.id: EMPTY_BUS for d in self.delays}
        values = {}
        pd_currents = np.zeros(len(self.photodiodes))
        for _ in range(200):
            values, pd_currents = self._eval_optics(t0, v_eff, delay_out)
            new_out = {d.id: self._gather(values, d.id, "in") for d in self.delays}
            if all(_bus_close(new_out[k], delay_out[k]) for k in delay_out):
                return values, pd_currents, new_out
            delay_out = new_out
        raise ConvergenceError("optical DC relaxation did not converge "
                               "(check passive loop gain)")

    # -- state extraction ------------------------------------------------------

    def _extract_vmod(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.modulators))
        for i, (ij, inn) in enumerate(self._mod_nodes):
            vj = x[ij] if ij >= 0 else 0.0
            vn = x[inn] if inn >= 0 else 0.0
            out[i] = vj - vn
        return out

    def _lagged_v(self, v_eff_prev: np.ndarray, v_mod_new: np.ndarray) -> np.ndarray:
        if not len(self.modulators):
            return v_eff_prev
        out = np.empty_like(v_mod_new)
        for i, m in enumerate(self.modulators):
            if m.params.forward_bias_mode:
                a = self.dt / m.params.carrier_lifetime
                out[i] = (v_eff_prev[i] + a * v_mod_new[i]) / (1.0 + a)
            else:
                out[i] = v_mod_new[i]
        return out

    # -- DC operating point ----------------------------------------------------

    def dc_operating_point(self, t0: float = 0.0) -> SimState:
        """Self-consistent DC state: Newton on the electro-optic loop."""
        n_mod = len(self.modulators)
        dc = self.dc_sys
        dc.t0 = t0

        def solve_for(u):
            _, pd_i, _ = self._eval_optics_dc(t0, u)
            return dc.solve(pd_i)

        if n_mod == 0:
            _, pd_i, delay_out = self._eval_optics_dc(t0, np.zeros(0))
            x = dc.solve(pd_i) if dc.st.size else np.zeros(0)
            return self._make_state(t0, x, np.zeros(0), delay_out)

        x0 = dc.solve(np.zeros(len(self.photodiodes))) if dc.st.size else np.zeros(0)
        u = self._extract_vmod_dc(x0)
        residual = None
        for _ in range(60):
            x = solve_for(u)
            r = u - self._extract_vmod_dc(x)
            residual = float(np.max(np.abs(r)))
            if residual < 1e-10 * (1.0 + float(np.max(np.abs(u)))):
                u = self._extract_vmod_dc(x)
                _, _, delay_out = self._eval_optics_dc(t0, u)
                x = solve_for(u)
                return self._make_state(t0, x, u, delay_out)
            # finite-difference Jacobian of r(u); small systems only
            jac = np.empty((n_mod, n_mod))
            for j in range(n_mod):
                du = np.zeros(n_mod)
                du[j] = 1e-6
                rj = (u + du) - self._extract_vmod_dc(solve_for(u + du))
                jac[:, j] = (rj - r) / 1e-6
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                raise ConvergenceError("singular Jacobian in DC Newton",
                                       residual=residual)
            lam = 1.0
            while lam > 1e-4:
                u_try = u + lam * step
                r_try = u_try - self._extract_vmod_dc(solve_for(u_try))
                if np.max(np.abs(r_try)) < residual:
                    break
                lam *= 0.5
            u = u + lam * step
        # Newton can stall on folds of the electro-optic nullcline; relax
        # toward a stable root the way the physical circuit would settle
        u = self._extract_vmod_dc(x0)
        for _ in range(4000):
            f_u = self._extract_vmod_dc(solve_for(u))
            du = f_u - u
            residual = float(np.max(np.abs(du)))
            if residual < 1e-10 * (1.0 + float(np.max(np.abs(u)))):
                _, _, delay_out = self._eval_optics_dc(t0, u)
                x = solve_for(u)
                return self._make_state(t0, x, u, delay_out)
            u = u + 0.25 * du
        raise ConvergenceError(
            f"DC operating point did not converge (residual {residual:.3e} V); "
            "consider zero_state() with a settling transient", residual=residual)

    def _extract_vmod_dc(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.modulators))
        for i, m in enumerate(self.modulators):
            ij = self.dc_sys.st.idx(m.internal_node)
            inn = self.dc_sys.st.idx(m.n)
            vj = x[ij] if ij >= 0 else 0.0
            vn = x[inn] if inn >= 0 else 0.0
            out[i] = vj - vn
        return out

    def zero_state(self, t0: float = 0.0) -> SimState:
        """All-zero initial condition (fallback when DC does not converge)."""
        x = np.zeros(self.st.size)
        delay_out = {d.id: EMPTY_BUS for d in self.delays}
        return self._make_state(t0, x, np.zeros(len(self.modulators)), delay_out)

    def _make_state(self, t0, x, v_mod, delay_out) -> SimState:
        bufs = {}
        for d in self.delays:
            depth = max(1, int(round(d.delay / self.dt)))
            bufs[d.id] = deque([delay_out.get(d.id, EMPTY_BUS)] * depth, maxlen=depth)
        return SimState(t=t0, x=np.asarray(x, dtype=float),
                        cap_i=np.zeros(len(self.tran.cap_rows)),
                        v_mod=np.asarray(v_mod, dtype=float),
                        v_eff=np.asarray(v_mod, dtype=float).copy(),
                        delay_buffers=bufs)

    # -- stepping ---------------------------------------------------------------

    def step(self, state: SimState, stats: RunStats | None = None):
        """Advance one dt; returns (new_state, port_values at t+dt)."""
        t_new = state.t + self.dt
        sys = self.tran
        if self._bootstrap is not None and not state.bootstrapped:
            sys = self._bootstrap
        hist = sys.history_rhs(state.x, state.cap_i)
        src = sys.source_rhs(t_new)
        base_rhs = hist + src
        delay_heads = {d.id: state.delay_buffers[d.id][0] for d in self.delays}

        # linear extrapolation from the last two steps usually lands within
        # tolerance, so the loop often converges in one optics evaluation
        if state.v_mod_prev is not None and len(state.v_mod):
            u = 2.0 * state.v_mod - state.v_mod_prev
        else:
            u = state.v_mod.copy()
        damping = 1.0
        prev_delta = None
        port_values = {}
        x_new = state.x
        rhs = base_rhs
        converged = len(self.modulators) == 0
        n_iter = 0
        for n_iter in range(1, MAX_STEP_ITER + 1):
            v_eff = self._lagged_v(state.v_eff, u)
            port_values, pd_i = self._eval_optics(t_new, v_eff, delay_heads)
            rhs = base_rhs.copy()
            sys.inject_photocurrents(rhs, pd_i)
            x_new = sys.solve(rhs) if self.st.size else np.zeros(0)
            if not len(self.modulators):
                converged = True
                break
            u_new = self._extract_vmod(x_new)
            delta = u_new - u
            if float(np.max(np.abs(delta))) < STEP_TOL:
                u = u_new
                converged = True
                break
            if prev_delta is not None and float(np.dot(delta, prev_delta)) < 0.0:
                damping = 0.5
            prev_delta = delta
            u = u + damping * delta
        if not converged:
            raise ConvergenceError(
                f"step at t = {t_new:.6e} s did not converge in {MAX_STEP_ITER} "
                f"iterations", residual=float(np.max(np.abs(prev_delta))), time=t_new,
                iterations=MAX_STEP_ITER)
        if not np.all(np.isfinite(x_new)):
            raise ConvergenceError(f"non-finite solution at t = {t_new:.6e} s",
                                   time=t_new)

        new_state = SimState(
            t=t_new, x=x_new,
            cap_i=sys.cap_currents(x_new, state.x, state.cap_i),
            v_mod=u if len(self.modulators) else np.zeros(0),
            v_eff=self._lagged_v(state.v_eff, u),
            delay_buffers=state.delay_buffers,
            bootstrapped=True,
            v_mod_prev=state.v_mod)
        for d in self.delays:
            new_state.delay_buffers[d.id].append(
                self._gather(port_values, d.id, "in"))
        if stats is not None:
            stats.steps += 1
            stats.total_iterations += n_iter
            stats.max_iterations = max(stats.max_iterations, n_iter)
            stats.max_kcl_residual = max(stats.max_kcl_residual,
                                         sys.kcl_residual(x_new, rhs))
        return new_state, port_values

    # -- full runs ----------------------------------------------------------------

    def _probe_values(self, state: SimState, port_values) -> list[float]:
        out = []
        for p in self.netlist.probes:
            if p.kind == "voltage":
                i = self.st.idx(p.node)
                out.append(state.x[i] if i >= 0 else 0.0)
            elif p.kind == "vmod":
                out.append(float(state.v_mod[self.mod_index[p.element]]))
            elif p.kind == "branch_current":
                e = self.elems[p.element]
                k = (self.st.l_index[p.element] if e.kind == "inductor"
                     else self.st.v_index[p.element])
                out.append(state.x[k])
            elif p.kind == "photocurrent":
                pd = self.elems[p.element]
                bus = self._gather(port_values, p.element, "in")
                out.append(photodetect(bus, pd.params))
            elif p.kind == "optical_power":
                bus = port_values.get((p.element, p.port), EMPTY_BUS)
                if p.wavelength is None:
                    out.append(bus.total_power)
                else:
                    out.append(bus.power_at(p.wavelength))
        return out

    def run(self, duration: float | None = None, initial_state: SimState | None = None,
            progress: bool = False) -> tuple[Trace, RunStats]:
        """Co-simulate and record all netlist probes each step."""
        duration = duration if duration is not None else self.netlist.sim.duration
        if duration <= 0.0:
            raise InvalidInputError(f"duration must be > 0, got {duration}")
        n_steps = int(round(duration / self.dt))
        state = (initial_state.copy() if initial_state is not None
                 else self.dc_operating_point())
        stats = RunStats()

        names = [p.name for p in self.netlist.probes]
        data = np.empty((n_steps + 1, len(names)))
        times = state.t + np.arange(n_steps + 1) * self.dt

        v_eff0 = state.v_eff
        if self.delays:
            heads0 = {d.id: state.delay_buffers[d.id][0] for d in self.delays}
            pv0, _ = self._eval_optics(state.t, v_eff0, heads0)
        else:
            pv0, _ = self._eval_optics(state.t, v_eff0, {})
        data[0] = self._probe_values(state, pv0)

        for i in range(n_steps):
            state, port_values = self.step(state, stats)
            data[i + 1] = self._probe_values(state, port_values)
        stats.warnings = dict(self._warn_counts)
        trace = Trace(t=times, columns={n: data[:, j] for j, n in enumerate(names)})
        self._final_state = state
        return trace, stats


def _bus_close(a: WdmBus, b: WdmBus, tol: float = 1e-13) -> bool:
    if len(a) != len(b):
        return False
    for ca, cb in zip(a.channels, b.channels):
        if ca.wavelength != cb.wavelength:
            return False
        if abs(ca.e_real - cb.e_real) > tol or abs(ca.e_imag - cb.e_imag) > tol:
            return False
    return True


def cosimulate(netlist: Netlist, duration: float | None = None,
               dt: float | None = None, method: str | None = None,
               initial_state: SimState | None = None) -> tuple[Trace, RunStats]:
    """One-shot transient: build, find the operating point, step, record."""
    sim = Simulator(netlist, dt=dt, method=method)
    return sim.run(duration=duration, initial_state=initial_state)
