"""Weight-bank calibration: map desired weights in [-1, +1] to heater currents.

The feedforward procedure characterizes each channel of a microring weight
bank through the voltage measured at the neuron junction:

1. all heaters off, sweep the probe wavelength -> junction-voltage spectrum;
2. per channel, park the probe laser on the channel and sweep that ring's
   heater current; the junction voltage peaks where the ring couples the
   most light to the drop port (the resonance current);
3. discard data above the resonance current, truncate the remaining curve
   symmetrically about 0 V, normalize so the maximum retained voltage maps
   to W = -1 and the minimum to W = +1, and invert to current-as-a-function-
   of-weight with a monotone piecewise-cubic interpolant.

Because the drop port pulls the junction up and the thru port pulls it
down, the resonance end of the curve is the most negative weight; applied
current is therefore strictly decreasing in W.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .circuit import Simulator
from .errors import (CalibrationError, CalibrationQualityError,
                     CalibrationRangeError, ConvergenceError, WeightRangeError)
from .devices import SourceSpec
from .neuron import (BankChannel, ModulatorDesign, ReceiverDesign, RingDesign,
                     mod_ring_radius, set_heater_current, set_source,
                     weight_bank_neuron)


@dataclass(frozen=True)
class BankSpec:
    """Bank geometry: ring i has radius r0 + i*dr, channel i sits at
    lam0 + i*dlam."""

    channel_count: int = 5
    r0: float = 8e-6
    dr: float = 12e-9
    lam0: float = 1548.7e-9
    dlam: float = 2.35e-9

    def __post_init__(self):
        if self.channel_count < 1:
            raise CalibrationError(f"need >= 1 channel, got {self.channel_count}")
        if self.dr <= 0.0 or self.dlam <= 0.0:
            raise CalibrationError("radius/wavelength increments must be > 0")

    @property
    def wavelengths(self) -> list[float]:
        return [self.lam0 + i * self.dlam for i in range(self.channel_count)]

    @property
    def radii(self) -> list[float]:
        return [self.r0 + i * self.dr for i in range(self.channel_count)]

    def to_dict(self) -> dict:
        return {"channel_count": self.channel_count, "r0": self.r0,
                "dr": self.dr, "lam0": self.lam0, "dlam": self.dlam}

    @classmethod
    def from_dict(cls, d: dict) -> "BankSpec":
        return cls(channel_count=int(d["channel_count"]), r0=float(d["r0"]),
                   dr=float(d["dr"]), lam0=float(d["lam0"]), dlam=float(d["dlam"]))


@dataclass
class ChannelMap:
    resonance_current: float
    weights: np.ndarray      # ascending in W over [-1, +1]
    currents: np.ndarray     # strictly decreasing in W
    v_at_wneg1: float
    v_at_wpos1: float
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def interp(self) -> PchipInterpolator:
        if self._interp is None:
            # store as current(weight); PCHIP preserves monotonicity
            self._interp = PchipInterpolator(self.weights, self.currents)
        return self._interp


@dataclass
class WeightMap:
    wavelengths: list[float]
    radii: list[float]
    channels: list[ChannelMap]
    probe_power: float
    bank: BankSpec | None = None    # set when calibrated from a uniform spec

    def to_dict(self) -> dict:
        return {
            "bank_spec": None if self.bank is None else self.bank.to_dict(),
            "channel_wavelengths_m": list(self.wavelengths),
            "channel_radii_m": list(self.radii),
            "probe_power_w": self.probe_power,
            "per_channel": [
                {"resonance_current_a": c.resonance_current,
                 "curve": [[float(w), float(i)]
                           for w, i in zip(c.weights, c.currents)],
                 "v_at_wneg1": c.v_at_wneg1,
                 "v_at_wpos1": c.v_at_wpos1}
                for c in self.channels],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "WeightMap":
        chans = []
        for cd in d["per_channel"]:
            curve = np.asarray(cd["curve"], dtype=float)
            chans.append(ChannelMap(
                resonance_current=float(cd["resonance_current_a"]),
                weights=curve[:, 0], currents=curve[:, 1],
                v_at_wneg1=float(cd["v_at_wneg1"]),
                v_at_wpos1=float(cd["v_at_wpos1"])))
        bank = d.get("bank_spec")
        return cls(wavelengths=[float(x) for x in d["channel_wavelengths_m"]],
                   radii=[float(x) for x in d["channel_radii_m"]],
                   channels=chans,
                   probe_power=float(d.get("probe_power_w", 0.0)),
                   bank=None if bank is None else BankSpec.from_dict(bank))

    @classmethod
    def from_json(cls, text: str) -> "WeightMap":
        return cls.from_dict(json.loads(text))


def apply_weight(wmap: WeightMap, channel: int, weight: float) -> float:
    """Heater current realizing `weight` on `channel` (monotone decreasing)."""
    if not -1.0 <= weight <= 1.0:
        raise WeightRangeError(f"weight {weight} outside [-1, +1]")
    if not 0 <= channel < len(wmap.channels):
        raise CalibrationError(f"channel {channel} not calibrated")
    # interpolation noise at the W=+1 endpoint can dip a hair below zero
    return max(0.0, float(wmap.channels[channel].interp()(weight)))


# ---------------------------------------------------------------------------
# Measurement harness
# ---------------------------------------------------------------------------

class BankCalibrator:
    """Builds the calibration netlist for a bank and runs the DC sweeps."""

    def __init__(self, wavelengths, radii, probe_power: float = 0.25e-3,
                 ring_design: RingDesign = RingDesign(),
                 mod_design: ModulatorDesign = ModulatorDesign(),
                 receiver: ReceiverDesign | None = None):
        self.wavelengths = list(wavelengths)
        self.radii = list(radii)
        if len(self.wavelengths) != len(self.radii) or not self.wavelengths:
            raise CalibrationError("need matching, nonempty wavelength/radius lists")
        self.probe_power = probe_power
        self.ring_design = ring_design
        receiver = receiver or ReceiverDesign(ideal_dc_bias=True)
        channels = [BankChannel(lam, r, 0.0)
                    for lam, r in zip(self.wavelengths, self.radii)]
        r_mod = mod_ring_radius(self.wavelengths[0], mod_design,
                                v_bias=0.5, detuning=0.0)
        self.netlist, self.refs = weight_bank_neuron(
            bank=channels, probe_source=SourceSpec(self.wavelengths[0], probe_power),
            mod_radius=r_mod, ibias=0.0, ring_design=ring_design,
            mod_design=mod_design, receiver=receiver)

    def _dc_voltage(self) -> float:
        sim = Simulator(self.netlist, dt=1e-12)
        return float(sim.dc_operating_point().v_mod[0])

    def _dc_balanced_current(self) -> float:
        """Net drop-minus-thru photocurrent at the DC operating point."""
        sim = Simulator(self.netlist, dt=1e-12)
        state = sim.dc_operating_point()
        _, pd_i, _ = sim._eval_optics_dc(0.0, state.v_mod)
        by_id = {pd.id: i for i, pd in enumerate(sim.photodiodes)}
        return float(pd_i[by_id[self.refs.pd_drop]] - pd_i[by_id[self.refs.pd_thru]])

    def junction_voltage(self, wavelength: float, power: float | None = None,
                         currents: dict[int, float] | None = None) -> float:
        set_source(self.netlist, "probe", wavelength=wavelength,
                   power=self.probe_power if power is None else power)
        for i, rid in enumerate(self.refs.bank_rings):
            cur = 0.0 if currents is None else currents.get(i, 0.0)
            set_heater_current(self.netlist, rid, float(cur))
        return self._dc_voltage()

    def spectrum_sweep(self, lam_lo: float | None = None,
                       lam_hi: float | None = None, points: int = 2000
                       ) -> tuple[np.ndarray, np.ndarray, list[float]]:
        """V_junction(lambda) with all heaters off; returns (lam, V, gaps)."""
        if lam_lo is None:
            lam_lo = min(self.wavelengths) - 2e-9
        if lam_hi is None:
            lam_hi = max(self.wavelengths) + 2e-9
        lams = np.linspace(lam_lo, lam_hi, points)
        vs = np.empty(points)
        gaps: list[float] = []
        for k, lam in enumerate(lams):
            try:
                vs[k] = self.junction_voltage(float(lam))
            except ConvergenceError:
                vs[k] = np.nan
                gaps.append(float(lam))
        return lams, vs, gaps

    def current_sweep(self, channel: int, i_max: float = 1e-3,
                      points: int = 200) -> tuple[np.ndarray, np.ndarray]:
        """V_junction vs this channel's heater current, probe on the channel."""
        lam = self.wavelengths[channel]
        currents = np.linspace(0.0, i_max, points)
        vs = np.empty(points)
        for k, cur in enumerate(currents):
            vs[k] = self.junction_voltage(lam, currents={channel: float(cur)})
        return currents, vs

    def resonance_current(self, channel: int, i_max: float = 1e-3,
                          points: int = 200
                          ) -> tuple[float, float, np.ndarray, np.ndarray]:
        """Grid scan plus parabolic refinement of the drop-coupling maximum.

        Returns (i_res, v_res, sweep currents, sweep voltages).  The refined
        point is verified; if the parabola overshoots a sharp peak the best
        grid sample wins.
        """
        currents, vs = self.current_sweep(channel, i_max, points)
        k = int(np.argmax(vs))
        if k == 0 or k == points - 1:
            raise CalibrationRangeError(
                f"channel {channel}: no interior junction-voltage maximum in "
                f"[0, {i_max:.3e}] A (peak at sample {k})")
        i0, i1, i2 = currents[k - 1:k + 2]
        v0, v1, v2 = vs[k - 1:k + 2]
        i_res, v_res = float(i1), float(v1)
        denom = (v0 - 2.0 * v1 + v2)
        if denom < 0.0:
            i_ref = float(i1 + 0.25 * (i2 - i0) * (v2 - v0) / -denom)
            i_ref = min(max(i_ref, float(min(i0, i2))), float(max(i0, i2)))
            lam = self.wavelengths[channel]
            v_ref = self.junction_voltage(lam, currents={channel: i_ref})
            if v_ref > v_res:
                i_res, v_res = i_ref, v_ref
        return i_res, v_res, currents, vs


def build_channel_map(currents: np.ndarray, voltages: np.ndarray,
                      i_res: float, v_res: float) -> ChannelMap:
    """Truncate, symmetrize about 0 V, normalize and invert one channel curve."""
    keep = currents < i_res
    i_kept, v_kept = currents[keep], voltages[keep]
    # grid samples hugging the peak can sit above the refined vertex; drop them
    n_trim = len(i_kept)
    while n_trim > 0 and v_kept[n_trim - 1] >= v_res:
        n_trim -= 1
    i_kept = np.append(i_kept[:n_trim], i_res)
    v_kept = np.append(v_kept[:n_trim], v_res)
    v_m = min(float(v_kept[-1]), abs(float(v_kept[0])))
    if v_m <= 0.0 or float(v_kept[0]) >= 0.0:
        raise CalibrationQualityError(
            "curve does not straddle 0 V; cannot truncate symmetrically",
            diagnostics={"v_first": float(v_kept[0]), "v_res": float(v_kept[-1])})
    # retain the segment with V in [-v_m, +v_m]: walk back from resonance to
    # the last upward crossing of -v_m, forward from there to +v_m
    j = len(v_kept) - 1
    while j > 0 and v_kept[j - 1] >= -v_m:
        j -= 1
    idx0 = max(j - 1, 0)
    i_seg = i_kept[idx0:].copy()
    v_seg = v_kept[idx0:].copy()
    if np.any(np.diff(v_seg) <= 0.0):
        bad = int(np.argmin(np.diff(v_seg)))
        raise CalibrationQualityError(
            "junction response is not monotone on the retained segment",
            diagnostics={"index": bad, "current_a": float(i_seg[bad])})
    # clip both boundaries exactly to +/-v_m by linear interpolation
    if v_seg[0] < -v_m:
        frac = (-v_m - v_seg[0]) / (v_seg[1] - v_seg[0])
        i_seg[0] += frac * (i_seg[1] - i_seg[0])
        v_seg[0] = -v_m
    hi = int(np.searchsorted(v_seg, v_m))
    if hi < len(v_seg):
        if v_seg[hi] > v_m and hi > 0:
            frac = (v_m - v_seg[hi - 1]) / (v_seg[hi] - v_seg[hi - 1])
            i_cut = i_seg[hi - 1] + frac * (i_seg[hi] - i_seg[hi - 1])
            i_seg = np.append(i_seg[:hi], i_cut)
            v_seg = np.append(v_seg[:hi], v_m)
        else:
            i_seg = i_seg[:hi + 1]
            v_seg = v_seg[:hi + 1]
    if len(i_seg) < 4:
        raise CalibrationQualityError(
            "too few samples in the retained segment",
            diagnostics={"n": len(i_seg)})
    weights = -v_seg / v_m          # V = +v_m -> W = -1, V = -v_m -> W = +1
    order = np.argsort(weights)
    weights = weights[order]
    currents_by_w = i_seg[order]
    weights[0], weights[-1] = -1.0, 1.0   # endpoints exact by construction
    if np.any(np.diff(currents_by_w) >= 0.0):
        raise CalibrationQualityError(
            "current is not strictly decreasing in weight after inversion",
            diagnostics={})
    return ChannelMap(resonance_current=float(i_res), weights=weights,
                      currents=currents_by_w, v_at_wneg1=float(v_m),
                      v_at_wpos1=float(-v_m))


def calibrate_channels(wavelengths, radii, probe_power: float = 0.25e-3,
                       i_max: float = 1e-3, points: int = 200,
                       ring_design: RingDesign = RingDesign(),
                       mod_design: ModulatorDesign = ModulatorDesign(),
                       receiver: ReceiverDesign | None = None,
                       bank: BankSpec | None = None) -> WeightMap:
    """Per-channel calibration of an arbitrary channel/radius selection."""
    cal = BankCalibrator(wavelengths, radii, probe_power, ring_design,
                         mod_design, receiver)
    channels = []
    for ch in range(len(cal.wavelengths)):
        i_res, v_res, currents, vs = cal.resonance_current(ch, i_max, points)
        channels.append(build_channel_map(currents, vs, i_res, v_res))
    return WeightMap(wavelengths=cal.wavelengths, radii=cal.radii,
                     channels=channels, probe_power=probe_power, bank=bank)


def calibrate_bank(bank: BankSpec, probe_power: float = 0.25e-3,
                   i_max: float = 1e-3, points: int = 200,
                   ring_design: RingDesign = RingDesign(),
                   mod_design: ModulatorDesign = ModulatorDesign(),
                   receiver: ReceiverDesign | None = None) -> WeightMap:
    """Full per-channel calibration of a uniform bank (sequential channels)."""
    return calibrate_channels(bank.wavelengths, bank.radii, probe_power,
                              i_max, points, ring_design, mod_design,
                              receiver, bank=bank)


def closed_loop_check(wmap: WeightMap, channel: int,
                      weights=None, probe_power: float = 0.25e-3,
                      ring_design: RingDesign = RingDesign(),
                      mod_design: ModulatorDesign = ModulatorDesign(),
                      receiver: ReceiverDesign | None = None) -> dict:
    """Apply a grid of target weights and regress the realized balanced
    photocurrent against W; returns slope, intercept, r_squared and samples."""
    weights = np.linspace(-0.9, 0.9, 13) if weights is None else np.asarray(weights)
    cal = BankCalibrator(wmap.wavelengths, wmap.radii, probe_power,
                         ring_design, mod_design, receiver)
    lam = wmap.wavelengths[channel]
    set_source(cal.netlist, "probe", wavelength=lam, power=probe_power)
    currents_realized = []
    for w in weights:
        for i, rid in enumerate(cal.refs.bank_rings):
            cur = apply_weight(wmap, channel, float(w)) if i == channel \
                else apply_weight(wmap, i, 0.0)
            set_heater_current(cal.netlist, rid, cur)
        currents_realized.append(cal._dc_balanced_current())
    i_ph = np.asarray(currents_realized)
    coeffs = np.polyfit(weights, i_ph, 1)
    fit = np.polyval(coeffs, weights)
    ss_res = float(np.sum((i_ph - fit) ** 2))
    ss_tot = float(np.sum((i_ph - np.mean(i_ph)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return {"slope_a_per_w": float(coeffs[0]), "intercept_a": float(coeffs[1]),
            "r_squared": r2,
            "samples": [[float(w), float(i)] for w, i in zip(weights, i_ph)]}


def crosstalk_report(wmap: WeightMap, probe_power: float = 0.25e-3,
                     ring_design: RingDesign = RingDesign(),
                     mod_design: ModulatorDesign = ModulatorDesign(),
                     receiver: ReceiverDesign | None = None,
                     bound: float = 0.05) -> dict:
    """How much does slewing channel i's weight move channel j's realized weight?

    Realized weight of channel j is read back as -V_junction/v_m with the
    probe parked on channel j.  Violations of `bound` are reported, not
    hidden.
    """
    cal = BankCalibrator(wmap.wavelengths, wmap.radii, probe_power,
                         ring_design, mod_design, receiver)
    n = len(wmap.wavelengths)
    worst = 0.0
    entries = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            deltas = []
            for w_i in (-1.0, 1.0):
                cur = {i: apply_weight(wmap, i, w_i),
                       j: apply_weight(wmap, j, 0.0)}
                v = cal.junction_voltage(wmap.wavelengths[j], currents=cur)
                deltas.append(-v / wmap.channels[j].v_at_wneg1)
            shift = abs(deltas[1] - deltas[0])
            worst = max(worst, shift)
            if shift > bound:
                entries.append({"aggressor": i, "victim": j, "shift": shift})
    return {"worst_shift": worst, "bound": bound, "violations": entries}
