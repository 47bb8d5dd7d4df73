"""Drive waveforms for sources and heater controls.

Waveforms are callables of time (seconds) returning the target quantity in
its own units.  `am_carrier` is special-cased to an envelope in [0, 1] for
amplitude-modulating optical sources.  All kinds serialize to/from plain
dicts tagged with "kind" for use in JSON configs.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class ConstantWaveform:
    level: float

    def __call__(self, t):
        if isinstance(t, (float, int)):
            return self.level
        return np.full_like(np.asarray(t, dtype=float), self.level)

    def to_dict(self):
        return {"kind": "constant", "level": self.level}


@dataclass(frozen=True)
class SineWaveform:
    frequency: float
    amplitude: float
    offset: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.frequency <= 0.0:
            raise ConfigError(f"sine frequency must be > 0, got {self.frequency}")

    def __call__(self, t):
        w = 2.0 * math.pi * self.frequency
        if isinstance(t, (float, int)):
            return self.offset + self.amplitude * math.sin(w * t + self.phase)
        return self.offset + self.amplitude * np.sin(w * np.asarray(t, float) + self.phase)

    def to_dict(self):
        return {"kind": "sine", "frequency": self.frequency,
                "amplitude": self.amplitude, "offset": self.offset,
                "phase": self.phase}


@dataclass(frozen=True)
class TriangularWaveform:
    """Periodic ramp from `offset` up to `offset + amplitude` and back.

    Rises for a fraction `asymmetry` of the period, falls for the rest; the
    value at t = 0 is the minimum.
    """

    frequency: float
    amplitude: float
    offset: float = 0.0
    asymmetry: float = 0.5

    def __post_init__(self):
        if self.frequency <= 0.0:
            raise ConfigError(f"triangle frequency must be > 0, got {self.frequency}")
        if not 0.0 < self.asymmetry < 1.0:
            raise ConfigError(f"asymmetry must be in (0, 1), got {self.asymmetry}")

    def _shape(self, u):
        a = self.asymmetry
        return np.where(u < a, u / a, (1.0 - u) / (1.0 - a))

    def __call__(self, t):
        a = self.asymmetry
        if isinstance(t, (float, int)):
            u = math.fmod(t * self.frequency, 1.0)
            if u < 0.0:
                u += 1.0
            shape = u / a if u < a else (1.0 - u) / (1.0 - a)
            return self.offset + self.amplitude * shape
        u = np.mod(np.asarray(t, dtype=float) * self.frequency, 1.0)
        return self.offset + self.amplitude * self._shape(u)

    def to_dict(self):
        return {"kind": "triangular", "frequency": self.frequency,
                "amplitude": self.amplitude, "offset": self.offset,
                "asymmetry": self.asymmetry}


@dataclass(frozen=True)
class SquareWaveform:
    """Piecewise-constant schedule: level[i] holds on [times[i], times[i+1])."""

    times: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if len(self.times) != len(self.levels) or not self.times:
            raise ConfigError("square schedule needs equal, nonzero times/levels")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ConfigError("square schedule times must be strictly increasing")

    def __call__(self, t):
        if isinstance(t, (float, int)):
            k = bisect.bisect_right(self.times, t) - 1
            return self.levels[min(max(k, 0), len(self.levels) - 1)]
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right") - 1
        idx = np.clip(idx, 0, len(self.levels) - 1)
        return np.asarray(self.levels, dtype=float)[idx]

    def to_dict(self):
        return {"kind": "square", "times": list(self.times),
                "levels": list(self.levels)}


@dataclass(frozen=True)
class AmCarrierWaveform:
    """Amplitude-modulation envelope in [0, 1] at `frequency`.

    envelope "sine": 0.5 * (1 + depth*sin(...)); "square": gates between
    (1 +/- depth)/2 at the modulation frequency.
    """

    frequency: float
    envelope: str = "sine"
    depth: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.frequency <= 0.0:
            raise ConfigError(f"AM frequency must be > 0, got {self.frequency}")
        if not 0.0 <= self.depth <= 1.0:
            raise ConfigError(f"AM depth must be in [0, 1], got {self.depth}")
        if self.envelope not in ("sine", "square"):
            raise ConfigError(f"unknown AM envelope {self.envelope!r}")

    def __call__(self, t):
        w = 2.0 * math.pi * self.frequency
        if self.envelope == "sine":
            if isinstance(t, (float, int)):
                return 0.5 * (1.0 + self.depth * math.sin(w * t + self.phase))
            return 0.5 * (1.0 + self.depth * np.sin(w * np.asarray(t, float) + self.phase))
        u = np.mod(np.asarray(t, dtype=float) * self.frequency + self.phase / (2 * math.pi), 1.0)
        val = np.where(u < 0.5, 0.5 * (1.0 + self.depth), 0.5 * (1.0 - self.depth))
        if np.ndim(t) == 0:
            return float(val)
        return val

    def to_dict(self):
        return {"kind": "am_carrier", "frequency": self.frequency,
                "envelope": self.envelope, "depth": self.depth,
                "phase": self.phase}


_KINDS = {
    "constant": ConstantWaveform,
    "sine": SineWaveform,
    "triangular": TriangularWaveform,
    "square": SquareWaveform,
    "am_carrier": AmCarrierWaveform,
}


def waveform_from_dict(d) -> object:
    """Build a waveform from a config dict (a bare number means constant)."""
    if isinstance(d, (int, float)):
        return ConstantWaveform(float(d))
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"waveform spec must be a number or dict with 'kind': {d!r}")
    kind = d["kind"]
    if kind not in _KINDS:
        raise ConfigError(f"unknown waveform kind {kind!r}")
    kwargs = {k: v for k, v in d.items() if k != "kind"}
    if kind == "square":
        kwargs["times"] = tuple(kwargs["times"])
        kwargs["levels"] = tuple(kwargs["levels"])
    try:
        return _KINDS[kind](**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for waveform {kind!r}: {exc}") from exc


def as_waveform(value) -> object:
    """Accept a waveform object, dict spec, or bare number."""
    if callable(value) and not isinstance(value, dict):
        return value
    return waveform_from_dict(value)
