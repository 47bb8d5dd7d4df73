"""Modified nodal analysis with companion models for transient analysis.

Unknown vector layout: [non-ground node voltages | inductor currents |
voltage-source currents].  Capacitors and inductors are discretized with
backward-Euler or trapezoidal companion models; the linear system matrix is
constant for a fixed dt, so it is LU-factorized once and only the right-hand
side is rebuilt each step:

    rhs = E_hist @ x_prev + A_c^T (i_cap_prev) [trapezoidal only]
          + source terms (t) + behavioral injections

Behavioral elements (photodiodes, whose currents depend on the optics) enter
as per-iteration current injections supplied by the engine.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..errors import NetlistError
from .netlist import GROUND, Netlist

_METHODS = ("backward_euler", "trapezoidal")


class Stamps:
    """Index bookkeeping shared by the transient and DC assemblies."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.node_index: dict[str, int] = {}
        self.l_index: dict[str, int] = {}
        self.v_index: dict[str, int] = {}

        def touch(node):
            if node != GROUND and node not in self.node_index:
                self.node_index[node] = len(self.node_index)

        self.caps: list[tuple[str, str, str, float]] = []   # id, a, b, C
        self.resistors: list[tuple[str, str, float]] = []
        self.inductors: list[tuple[str, str, str, float]] = []
        self.vsources: list = []
        self.isources: list = []
        self.photodiodes: list = []
        self.modulators: list = []

        for e in netlist.electrical_elements():
            if e.kind == "resistor":
                touch(e.a), touch(e.b)
                self.resistors.append((e.a, e.b, e.resistance))
            elif e.kind == "capacitor":
                touch(e.a), touch(e.b)
                self.caps.append((e.id, e.a, e.b, e.capacitance))
            elif e.kind == "inductor":
                touch(e.a), touch(e.b)
                self.inductors.append((e.id, e.a, e.b, e.inductance))
            elif e.kind == "vsource":
                touch(e.pos), touch(e.neg)
                self.vsources.append(e)
            elif e.kind == "isource":
                touch(e.a), touch(e.b)
                self.isources.append(e)
            elif e.kind == "photodiode":
                j = e.internal_node
                touch(e.p), touch(e.n), touch(j)
                p = e.params
                self.photodiodes.append(e)
                self.caps.append((e.id + "::cj", e.p, j, p.junction_capacitance))
                self.resistors.append((e.p, j, p.shunt_resistance))
                if p.series_resistance > 0.0:
                    self.resistors.append((j, e.n, p.series_resistance))
            elif e.kind == "pn_modulator":
                j = e.internal_node
                touch(e.p), touch(e.n), touch(j)
                p = e.params
                self.modulators.append(e)
                if p.series_resistance > 0.0:
                    self.resistors.append((e.p, j, p.series_resistance))
                self.caps.append((e.id + "::cj", j, e.n, p.junction_capacitance))
            else:
                raise NetlistError(f"unknown electrical element kind {e.kind!r}")

        self.n_nodes = len(self.node_index)
        for lid, *_ in self.inductors:
            self.l_index[lid] = self.n_nodes + len(self.l_index)
        off = self.n_nodes + len(self.l_index)
        for v in self.vsources:
            self.v_index[v.id] = off + len(self.v_index)
        self.size = self.n_nodes + len(self.l_index) + len(self.v_index)

    def idx(self, node: str) -> int:
        return -1 if node == GROUND else self.node_index[node]

    def node_rows(self) -> slice:
        return slice(0, self.n_nodes)


def _add(mat, i, j, val):
    if i >= 0 and j >= 0:
        mat[i, j] += val


def _stamp_conductance(mat, ia, ib, g):
    _add(mat, ia, ia, g)
    _add(mat, ib, ib, g)
    _add(mat, ia, ib, -g)
    _add(mat, ib, ia, -g)


class TransientSystem:
    """Assembled, factorized linear system for one (netlist, dt, method)."""

    def __init__(self, netlist: Netlist, dt: float, method: str = "backward_euler"):
        if method not in _METHODS:
            raise NetlistError(f"unknown integration method {method!r}")
        if dt <= 0.0:
            raise NetlistError(f"dt must be > 0, got {dt}")
        self.dt = dt
        self.method = method
        self.st = st = Stamps(netlist)
        n = st.size
        g_mat = np.zeros((n, n))
        e_hist = np.zeros((n, n))

        for a, b, r in st.resistors:
            _stamp_conductance(g_mat, st.idx(a), st.idx(b), 1.0 / r)

        # capacitor companion: g_c = C/dt (BE) or 2C/dt (TRZ)
        cfac = 1.0 / dt if method == "backward_euler" else 2.0 / dt
        self.cap_g = np.array([c * cfac for _, _, _, c in st.caps])
        self.cap_rows = []
        for (cid, a, b, c), g in zip(st.caps, self.cap_g):
            ia, ib = st.idx(a), st.idx(b)
            _stamp_conductance(g_mat, ia, ib, g)
            # history current g*v_ab(prev) re-enters the RHS
            if ia >= 0:
                _add(e_hist, ia, ia, g)
                _add(e_hist, ia, ib, -g)
            if ib >= 0:
                _add(e_hist, ib, ib, g)
                _add(e_hist, ib, ia, -g)
            self.cap_rows.append((ia, ib))

        lfac = 1.0 / dt if method == "backward_euler" else 2.0 / dt
        for lid, a, b, l_val in st.inductors:
            ia, ib, k = st.idx(a), st.idx(b), st.l_index[lid]
            if ia >= 0:
                g_mat[ia, k] += 1.0
            if ib >= 0:
                g_mat[ib, k] -= 1.0
            if ia >= 0:
                g_mat[k, ia] += 1.0
            if ib >= 0:
                g_mat[k, ib] -= 1.0
            z = l_val * lfac
            g_mat[k, k] -= z
            e_hist[k, k] -= z
            if method == "trapezoidal":
                # v_new - z*i_new = -z*i_old - v_old
                if ia >= 0:
                    e_hist[k, ia] -= 1.0
                if ib >= 0:
                    e_hist[k, ib] += 1.0

        for v in st.vsources:
            ia, ib, k = st.idx(v.pos), st.idx(v.neg), st.v_index[v.id]
            if ia >= 0:
                g_mat[ia, k] += 1.0
                g_mat[k, ia] += 1.0
            if ib >= 0:
                g_mat[ib, k] -= 1.0
                g_mat[k, ib] -= 1.0

        self.g_mat = g_mat
        self.e_hist = e_hist
        try:
            self.lu = lu_factor(g_mat)
        except Exception as exc:
            raise NetlistError(
                f"singular circuit topology (floating subcircuit or source loop): {exc}"
            ) from exc

        # source stamp bookkeeping
        self.i_entries = [(st.idx(s.a), st.idx(s.b), s.value) for s in st.isources]
        self.v_entries = [(st.v_index[v.id], v.value) for v in st.vsources]
        # photodiode current (A) flows p -> internal node j inside the element
        self.pd_entries = [(st.idx(pd.p), st.idx(pd.internal_node))
                           for pd in st.photodiodes]

    def source_rhs(self, t: float) -> np.ndarray:
        rhs = np.zeros(self.st.size)
        for ia, ib, w in self.i_entries:
            i = float(w(t))
            if ia >= 0:
                rhs[ia] -= i
            if ib >= 0:
                rhs[ib] += i
        for k, w in self.v_entries:
            rhs[k] = float(w(t))
        return rhs

    def history_rhs(self, x_prev: np.ndarray,
                    cap_i_prev: np.ndarray | None) -> np.ndarray:
        rhs = self.e_hist @ x_prev
        if self.method == "trapezoidal" and len(self.cap_rows):
            for (ia, ib), i_old in zip(self.cap_rows, cap_i_prev):
                if ia >= 0:
                    rhs[ia] += i_old
                if ib >= 0:
                    rhs[ib] -= i_old
        return rhs

    def inject_photocurrents(self, rhs: np.ndarray, currents) -> None:
        for (ia, ij), i_ph in zip(self.pd_entries, currents):
            if ia >= 0:
                rhs[ia] -= i_ph
            if ij >= 0:
                rhs[ij] += i_ph

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.lu, rhs, check_finite=False)

    def cap_currents(self, x_new: np.ndarray, x_prev: np.ndarray,
                     cap_i_prev: np.ndarray | None) -> np.ndarray:
        """Element currents through each capacitor after a step (TRZ state)."""
        def v_ab(x, ia, ib):
            va = x[ia] if ia >= 0 else 0.0
            vb = x[ib] if ib >= 0 else 0.0
            return va - vb

        out = np.empty(len(self.cap_rows))
        for m, ((ia, ib), g) in enumerate(zip(self.cap_rows, self.cap_g)):
            dv = v_ab(x_new, ia, ib) - v_ab(x_prev, ia, ib)
            if self.method == "backward_euler":
                out[m] = g * dv
            else:
                out[m] = g * dv - cap_i_prev[m]
        return out

    def kcl_residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Max KCL mismatch (A) over node rows for the accepted solution."""
        r = self.g_mat @ x - rhs
        nr = self.st.node_rows()
        return float(np.max(np.abs(r[nr]))) if self.st.n_nodes else 0.0


class DcSystem:
    """Operating-point assembly: capacitors open, inductors shorted."""

    def __init__(self, netlist: Netlist, t0: float = 0.0):
        self.t0 = t0
        self.st = st = Stamps(netlist)
        n = st.size
        g_mat = np.zeros((n, n))
        for a, b, r in st.resistors:
            _stamp_conductance(g_mat, st.idx(a), st.idx(b), 1.0 / r)
        for lid, a, b, _l in st.inductors:
            ia, ib, k = st.idx(a), st.idx(b), st.l_index[lid]
            if ia >= 0:
                g_mat[ia, k] += 1.0
                g_mat[k, ia] += 1.0
            if ib >= 0:
                g_mat[ib, k] -= 1.0
                g_mat[k, ib] -= 1.0
        for v in st.vsources:
            ia, ib, k = st.idx(v.pos), st.idx(v.neg), st.v_index[v.id]
            if ia >= 0:
                g_mat[ia, k] += 1.0
                g_mat[k, ia] += 1.0
            if ib >= 0:
                g_mat[ib, k] -= 1.0
                g_mat[k, ib] -= 1.0
        # nodes touching only capacitors float at DC; tie them down weakly
        connected = np.abs(g_mat[: st.n_nodes, :]).sum(axis=1) > 0.0
        for i in np.flatnonzero(~connected):
            g_mat[i, i] = 1.0
        self.g_mat = g_mat
        try:
            self.lu = lu_factor(g_mat)
        except Exception as exc:
            raise NetlistError(f"singular DC topology: {exc}") from exc
        self.i_entries = [(st.idx(s.a), st.idx(s.b), s.value) for s in st.isources]
        self.v_entries = [(st.v_index[v.id], v.value) for v in st.vsources]
        self.pd_entries = [(st.idx(pd.p), st.idx(pd.internal_node))
                           for pd in st.photodiodes]

    def rhs(self, photocurrents) -> np.ndarray:
        rhs = np.zeros(self.st.size)
        for ia, ib, w in self.i_entries:
            i = float(w(self.t0))
            if ia >= 0:
                rhs[ia] -= i
            if ib >= 0:
                rhs[ib] += i
        for k, w in self.v_entries:
            rhs[k] = float(w(self.t0))
        for (ia, ij), i_ph in zip(self.pd_entries, photocurrents):
            if ia >= 0:
                rhs[ia] -= i_ph
            if ij >= 0:
                rhs[ij] += i_ph
        return rhs

    def solve(self, photocurrents) -> np.ndarray:
        return lu_solve(self.lu, self.rhs(photocurrents), check_finite=False)
