"""Wavelength-multiplexed optical signals and passive component models.

Signals are slowly varying complex field envelopes attached to a vacuum
wavelength; carrier-frequency oscillation is discarded.  Conventions used
throughout the package:

* Field envelopes are in sqrt(W), so channel power is ``e_real**2 + e_imag**2``.
* A waveguide of complex index ``n0 + i*alpha0`` scales the field amplitude by
  ``exp(-(2*pi/lam) * alpha0 * L)`` and advances its phase by
  ``(2*pi/lam) * n0 * L``.  The extinction coefficient is an *amplitude*
  (not power) coefficient.
* Directional couplers are lossless with transfer matrix ``[[t, -ik], [-ik, t]]``
  and ``t = sqrt(1 - k**2)``, ``k`` being the field coupling coefficient.
* Two channels are "the same wavelength" when they agree within
  ``WAVELENGTH_TOL`` (1 pm by default).

All operations are pure functions; microrings are solved in quasi-static
steady state (photon lifetime is far below the electrical timescales the
circuit engine resolves).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import ChannelMismatchError, InvalidInputError, InvalidParamsError

TWO_PI = 2.0 * math.pi

#: Tolerance (m) within which two wavelengths are treated as one WDM channel.
WAVELENGTH_TOL = 1e-12


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} contains non-finite value {v!r}")


@dataclass(frozen=True, slots=True)
class OpticalField:
    """Single-channel field envelope: (e_real, e_imag) in sqrt(W) at `wavelength` (m)."""

    e_real: float
    e_imag: float
    wavelength: float

    def __post_init__(self):
        if not (math.isfinite(self.e_real) and math.isfinite(self.e_imag)
                and math.isfinite(self.wavelength)):
            raise InvalidInputError(
                f"OpticalField contains non-finite value "
                f"({self.e_real!r}, {self.e_imag!r}, {self.wavelength!r})")
        if self.wavelength <= 0.0:
            raise InvalidParamsError(f"wavelength must be > 0, got {self.wavelength}")

    @classmethod
    def from_complex(cls, e: complex, wavelength: float) -> "OpticalField":
        return cls(e.real, e.imag, wavelength)

    @classmethod
    def from_power(cls, power: float, wavelength: float, phase: float = 0.0) -> "OpticalField":
        if power < 0.0:
            raise InvalidParamsError(f"power must be >= 0, got {power}")
        amp = math.sqrt(power)
        return cls(amp * math.cos(phase), amp * math.sin(phase), wavelength)

    @property
    def field(self) -> complex:
        return complex(self.e_real, self.e_imag)

    @property
    def power(self) -> float:
        """Optical power in W (envelope convention |E|^2)."""
        return self.e_real * self.e_real + self.e_imag * self.e_imag

    def zero_like(self) -> "OpticalField":
        return OpticalField(0.0, 0.0, self.wavelength)


def same_wavelength(a: float, b: float, tol: float = WAVELENGTH_TOL) -> bool:
    return abs(a - b) <= tol


@dataclass(frozen=True)
class WdmBus:
    """An ordered set of channels with pairwise-distinct wavelengths."""

    channels: tuple[OpticalField, ...] = ()
    tol: float = field(default=WAVELENGTH_TOL, compare=False)

    def __post_init__(self):
        chans = tuple(self.channels)
        object.__setattr__(self, "channels", chans)
        wls = [c.wavelength for c in chans]
        for i in range(len(wls)):
            for j in range(i + 1, len(wls)):
                if same_wavelength(wls[i], wls[j], self.tol):
                    raise ChannelMismatchError(
                        f"bus channels {i} and {j} share wavelength "
                        f"{wls[i]:.6e} m within {self.tol:.0e} m"
                    )

    @classmethod
    def unchecked(cls, channels: tuple[OpticalField, ...],
                  tol: float = WAVELENGTH_TOL) -> "WdmBus":
        """Skip the pairwise wavelength check; for transforms of an existing
        bus whose channel wavelengths are preserved."""
        bus = object.__new__(cls)
        object.__setattr__(bus, "channels", channels)
        object.__setattr__(bus, "tol", tol)
        return bus

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    @property
    def total_power(self) -> float:
        return sum(c.power for c in self.channels)

    @property
    def wavelengths(self) -> tuple[float, ...]:
        return tuple(c.wavelength for c in self.channels)

    def channel_at(self, wavelength: float) -> OpticalField | None:
        """The channel matching `wavelength` within tolerance, or None."""
        for c in self.channels:
            if same_wavelength(c.wavelength, wavelength, self.tol):
                return c
        return None

    def power_at(self, wavelength: float) -> float:
        c = self.channel_at(wavelength)
        return 0.0 if c is None else c.power


def bus_map(bus: WdmBus, per_channel_transform) -> WdmBus:
    """Apply `per_channel_transform` to every channel independently.

    Channel order and wavelengths are preserved; a transform that alters a
    channel's wavelength is a bug and is rejected.
    """
    out = []
    for c in bus.channels:
        t = per_channel_transform(c)
        if not same_wavelength(t.wavelength, c.wavelength, bus.tol):
            raise ChannelMismatchError(
                "per-channel transform changed a wavelength "
                f"({c.wavelength:.6e} -> {t.wavelength:.6e})"
            )
        out.append(t)
    return WdmBus(tuple(out), tol=bus.tol)


def merge_buses(*buses: WdmBus, tol: float = WAVELENGTH_TOL) -> WdmBus:
    """Concatenate buses onto one waveguide; duplicate wavelengths are rejected."""
    chans: list[OpticalField] = []
    for b in buses:
        chans.extend(b.channels)
    return WdmBus(tuple(chans), tol=tol)


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveguideParams:
    """Linear waveguide with complex index n0 + i*alpha0 over `length` (m)."""

    n0: float
    alpha0: float
    length: float

    def __post_init__(self):
        _require_finite("WaveguideParams", self.n0, self.alpha0, self.length)
        if self.length < 0.0:
            raise InvalidParamsError(f"length must be >= 0, got {self.length}")
        if self.alpha0 < 0.0:
            raise InvalidParamsError(f"alpha0 must be >= 0, got {self.alpha0}")


@dataclass(frozen=True)
class CouplerParams:
    """Lossless directional coupler with field coupling coefficient k."""

    k: float
    excess_loss: float = 1.0  # power transmission factor, 1.0 = lossless

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise InvalidParamsError(f"coupling coefficient must be in [0, 1], got {self.k}")
        if not 0.0 < self.excess_loss <= 1.0:
            raise InvalidParamsError(f"excess_loss must be in (0, 1], got {self.excess_loss}")

    @property
    def t(self) -> float:
        """Through (self-coupling) coefficient, t^2 + k^2 = 1."""
        return math.sqrt(1.0 - self.k * self.k)


@dataclass(frozen=True)
class MrrParams:
    """Add-drop microring: two couplers joined by the ring waveguide.

    The ring waveguide length must equal the circumference 2*pi*radius.
    `shifter_kind` selects which actuator perturbs the ring index: an
    N-doped heater or the PN junction modulator.
    """

    radius: float
    coupler_in: CouplerParams
    coupler_drop: CouplerParams
    waveguide: WaveguideParams
    shifter_kind: str = "heater"

    def __post_init__(self):
        if self.radius <= 0.0:
            raise InvalidParamsError(f"radius must be > 0, got {self.radius}")
        circumference = TWO_PI * self.radius
        if not math.isclose(self.waveguide.length, circumference, rel_tol=1e-9):
            raise InvalidParamsError(
                f"ring waveguide length {self.waveguide.length:.6e} m inconsistent "
                f"with radius {self.radius:.6e} m (expected {circumference:.6e} m)"
            )
        if self.shifter_kind not in ("heater", "pn_modulator"):
            raise InvalidParamsError(f"unknown shifter_kind {self.shifter_kind!r}")

    @classmethod
    def make(cls, radius: float, k_in: float, k_drop: float, n0: float,
             alpha0: float, shifter_kind: str = "heater") -> "MrrParams":
        """Build a ring from scalars, deriving the ring waveguide record."""
        wg = WaveguideParams(n0=n0, alpha0=alpha0, length=TWO_PI * radius)
        return cls(radius=radius, coupler_in=CouplerParams(k_in),
                   coupler_drop=CouplerParams(k_drop), waveguide=wg,
                   shifter_kind=shifter_kind)

    @property
    def circumference(self) -> float:
        return TWO_PI * self.radius

    def resonance_wavelengths(self, lo: float, hi: float,
                              delta_n: complex = 0j) -> list[float]:
        """Resonances n*L = m*lam falling inside [lo, hi]."""
        n_eff = self.waveguide.n0 + delta_n.real
        nl = n_eff * self.circumference
        m_lo = int(math.floor(nl / hi))
        m_hi = int(math.ceil(nl / lo))
        return [nl / m for m in range(m_lo, m_hi + 1) if lo <= nl / m <= hi]


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def propagate_waveguide(field_in: OpticalField, params: WaveguideParams,
                        delta_n: complex = 0j) -> OpticalField:
    """Propagate a field through a waveguide with index perturbation `delta_n`.

    The amplitude is scaled by exp(-(2*pi/lam)*(alpha0 + Im(delta_n))*L) and the
    phase advanced by (2*pi/lam)*(n0 + Re(delta_n))*L; the wavelength is
    unchanged.
    """
    _require_finite("delta_n", delta_n.real, delta_n.imag)
    k_v = TWO_PI / field_in.wavelength
    loss = (params.alpha0 + delta_n.imag) * params.length
    phase = (params.n0 + delta_n.real) * params.length
    factor = math.exp(-k_v * loss) * cmath.exp(1j * (k_v * phase))
    e = field_in.field * factor
    return OpticalField(e.real, e.imag, field_in.wavelength)


def couple(in1: OpticalField, in2: OpticalField,
           params: CouplerParams) -> tuple[OpticalField, OpticalField]:
    """Lossless 2x2 coupler: [out1, out2] = [[t, -ik], [-ik, t]] @ [in1, in2]."""
    if not same_wavelength(in1.wavelength, in2.wavelength):
        raise ChannelMismatchError(
            f"coupler inputs at different wavelengths: "
            f"{in1.wavelength:.6e} m vs {in2.wavelength:.6e} m"
        )
    t = params.t
    mik = -1j * params.k
    e1 = in1.field
    e2 = in2.field
    o1 = t * e1 + mik * e2
    o2 = mik * e1 + t * e2
    if params.excess_loss != 1.0:
        s = math.sqrt(params.excess_loss)
        o1 *= s
        o2 *= s
    wl = in1.wavelength
    return (OpticalField(o1.real, o1.imag, wl), OpticalField(o2.real, o2.imag, wl))


def _ring_halves(params: MrrParams, wavelength: float, delta_n: complex) -> complex:
    """Complex propagation factor of half the ring circumference."""
    k_v = TWO_PI / wavelength
    half = 0.5 * params.circumference
    loss = (params.waveguide.alpha0 + delta_n.imag) * half
    phase = (params.waveguide.n0 + delta_n.real) * half
    return math.exp(-k_v * loss) * cmath.exp(1j * k_v * phase)


def mrr_transfer(field_in: OpticalField, add: OpticalField | None,
                 params: MrrParams, delta_n: complex = 0j
                 ) -> tuple[OpticalField, OpticalField]:
    """Quasi-static add-drop response: returns (thru, drop).

    Composes the two couplers and the two half-ring segments and solves the
    circulating field in closed form.  Port convention: IN and THRU sit on
    coupler 1's bus side, ADD and DROP on coupler 2's.
    """
    if add is None:
        add = field_in.zero_like()
    if not same_wavelength(field_in.wavelength, add.wavelength):
        raise ChannelMismatchError(
            f"MRR input/add wavelengths differ: "
            f"{field_in.wavelength:.6e} m vs {add.wavelength:.6e} m"
        )
    _require_finite("delta_n", delta_n.real, delta_n.imag)
    wl = field_in.wavelength
    t1 = params.coupler_in.t
    k1 = params.coupler_in.k
    t2 = params.coupler_drop.t
    k2 = params.coupler_drop.k
    h = _ring_halves(params, wl, delta_n)
    g = h * h  # full round trip
    if abs(t1 * t2 * g) >= 1.0:
        raise InvalidParamsError(
            f"circulating field diverges: |t1*t2*a| = {abs(t1 * t2 * g):.6g} >= 1 "
            "(ring round trip has net gain)"
        )
    e_in = field_in.field
    e_add = add.field
    # e_circ: field leaving coupler 1 into the ring (self-consistent).
    e_circ = (-1j * k1 * e_in + (-1j * k2) * t1 * h * e_add) / (1.0 - t1 * t2 * g)
    e_at_c2 = h * e_circ               # after first half ring, entering coupler 2
    e_back = h * (-1j * k2 * e_add + t2 * e_at_c2)  # back at coupler 1 from the ring
    e_thru = t1 * e_in - 1j * k1 * e_back
    e_drop = t2 * e_add - 1j * k2 * e_at_c2
    return (OpticalField(e_thru.real, e_thru.imag, wl),
            OpticalField(e_drop.real, e_drop.imag, wl))
