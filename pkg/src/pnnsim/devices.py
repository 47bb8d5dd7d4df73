"""Active electro-optic device models.

Heater and PN-modulator index shifts are low-order polynomial fits with
config-exposed coefficients; the defaults are plausible silicon values, not
measured ground truth, and are meant to be overridden by experimental fits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import (ActuatorLimitError, ChannelMismatchError,
                     InvalidInputError, InvalidParamsError,
                     ModelExtrapolationWarning)
from .optics import WdmBus, same_wavelength


@dataclass(frozen=True)
class HeaterParams:
    """N-doped in-ring heater: index shift per watt of dissipated power."""

    resistance: float = 1e3          # ohm
    thermo_optic_gain: float = 6.0   # index shift per W of heater power
    max_current: float = 2e-3        # A

    def __post_init__(self):
        if self.resistance <= 0.0:
            raise InvalidParamsError(f"resistance must be > 0, got {self.resistance}")
        if self.max_current <= 0.0:
            raise InvalidParamsError(f"max_current must be > 0, got {self.max_current}")


@dataclass(frozen=True)
class PnModulatorParams:
    """PN junction phase shifter plus its electrical load.

    Index shift: dn = dn_dv*v + dn_dv2*v**2, absorption shift dalpha_dv*v.
    Electrically the junction is a capacitance in series with a small
    resistance.  In forward bias (carrier injection) the optical response
    lags the junction voltage with time constant `carrier_lifetime`.
    """

    dn_dv: float = -2e-4             # 1/V
    dn_dv2: float = -2e-5            # 1/V^2
    dalpha_dv: float = -1e-7         # 1/V
    junction_capacitance: float = 40e-15  # F
    series_resistance: float = 25.0  # ohm
    forward_bias_mode: bool = False
    carrier_lifetime: float = 1.6e-11  # s, used only in forward bias (<10 GHz)
    validity_window: tuple[float, float] = (-4.0, 1.0)  # V

    def __post_init__(self):
        if self.junction_capacitance <= 0.0:
            raise InvalidParamsError(
                f"junction_capacitance must be > 0, got {self.junction_capacitance}")
        if self.series_resistance < 0.0:
            raise InvalidParamsError(
                f"series_resistance must be >= 0, got {self.series_resistance}")
        if self.forward_bias_mode and self.carrier_lifetime <= 0.0:
            raise InvalidParamsError(
                f"carrier_lifetime must be > 0 in forward bias, got {self.carrier_lifetime}")


@dataclass(frozen=True)
class PhotodetectorParams:
    """Behavioral current source with junction C and shunt R, in series with R_s.

    Defaults are typical germanium-on-silicon numbers, documented as defaults
    rather than ground truth.
    """

    responsivity: float = 0.8        # A/W
    junction_capacitance: float = 50e-15  # F
    shunt_resistance: float = 10e3   # ohm
    series_resistance: float = 25.0  # ohm

    def __post_init__(self):
        if self.responsivity <= 0.0:
            raise InvalidParamsError(f"responsivity must be > 0, got {self.responsivity}")
        if self.junction_capacitance <= 0.0:
            raise InvalidParamsError(
                f"junction_capacitance must be > 0, got {self.junction_capacitance}")


@dataclass(frozen=True)
class SourceSpec:
    """CW laser of `power` W at `wavelength` m, with optional AM envelope.

    The modulation waveform (when present) is an envelope in [0, 1] applied
    multiplicatively to the *power*; the field amplitude is scaled by its
    square root.
    """

    wavelength: float
    power: float
    modulation: object | None = None  # Waveform evaluated as envelope(t) in [0, 1]

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise InvalidParamsError(f"wavelength must be > 0, got {self.wavelength}")
        if self.power < 0.0:
            raise InvalidParamsError(f"power must be >= 0, got {self.power}")

    def power_at(self, t: float) -> float:
        if self.modulation is None:
            return self.power
        env = float(self.modulation(t))
        if env < -1e-12 or env > 1.0 + 1e-12:
            raise InvalidInputError(
                f"modulation envelope {env:.6g} outside [0, 1] at t={t:.3e} s")
        return self.power * min(max(env, 0.0), 1.0)


def heater_index_shift(i_heat: float, params: HeaterParams) -> complex:
    """Thermo-optic index shift dn = gain * i**2 * R (real, non-negative)."""
    if not math.isfinite(i_heat):
        raise InvalidInputError(f"i_heat is not finite: {i_heat!r}")
    if i_heat < 0.0 or i_heat > params.max_current:
        raise ActuatorLimitError(
            f"heater current {i_heat:.4g} A outside [0, {params.max_current:.4g}] A")
    return complex(params.thermo_optic_gain * i_heat * i_heat * params.resistance, 0.0)


def _modulator_shift(v_mod: float, params: PnModulatorParams) -> complex:
    """Polynomial shift without validity checks (hot path)."""
    dn = params.dn_dv * v_mod + params.dn_dv2 * v_mod * v_mod
    dalpha = params.dalpha_dv * v_mod
    return complex(dn, dalpha)


def modulator_index_shift(v_mod: float, params: PnModulatorParams) -> complex:
    """Electro-optic perturbation: Re = index shift, Im = absorption shift."""
    if not math.isfinite(v_mod):
        raise InvalidInputError(f"v_mod is not finite: {v_mod!r}")
    lo, hi = params.validity_window
    if v_mod < lo or v_mod > hi:
        warnings.warn(
            f"modulator voltage {v_mod:.3g} V outside fitted window [{lo}, {hi}] V",
            ModelExtrapolationWarning, stacklevel=2)
    return _modulator_shift(v_mod, params)


def photodetect(bus: WdmBus, params: PhotodetectorParams) -> float:
    """Photocurrent (A): responsivity times total power across all channels."""
    return params.responsivity * bus.total_power


def balanced_photocurrent(drop_bus: WdmBus, thru_bus: WdmBus,
                          params: PhotodetectorParams) -> float:
    """Signed current eta * sum_j (D_j - T_j) of a balanced photodetector pair.

    The two buses must carry the same channel set (matched per wavelength).
    """
    if len(drop_bus) != len(thru_bus):
        raise ChannelMismatchError(
            f"balanced detector buses carry {len(drop_bus)} vs {len(thru_bus)} channels")
    total = 0.0
    for d in drop_bus.channels:
        t = thru_bus.channel_at(d.wavelength)
        if t is None:
            raise ChannelMismatchError(
                f"thru bus has no channel at {d.wavelength:.6e} m")
        total += d.power - t.power
    return params.responsivity * total
