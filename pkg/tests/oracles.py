"""Independent reference computations used to pin expected test values.

Everything in here is deliberately written from first principles (iterative
circulation, analytic circuit formulas, finite differences) and must stay
independent of the implementations it is used to check.
"""

from __future__ import annotations

import cmath
import math

import numpy as np


def ring_circulation(e_in: complex, e_add: complex, k1: float, k2: float,
                     half_factor: complex, tol: float = 1e-12,
                     max_iter: int = 2_000_000) -> tuple[complex, complex]:
    """Add-drop ring response by iterating the circulating field to a fixed point.

    `half_factor` is the complex propagation factor of half the ring
    circumference.  Port/sign conventions mirror a [[t, -ik], [-ik, t]]
    coupler with IN/THRU on coupler 1 and ADD/DROP on coupler 2.
    """
    t1 = math.sqrt(1.0 - k1 * k1)
    t2 = math.sqrt(1.0 - k2 * k2)
    e_back = 0j  # field arriving at coupler 1 from the ring
    e_fwd = 0j
    for _ in range(max_iter):
        e_fwd = -1j * k1 * e_in + t1 * e_back          # into the ring at coupler 1
        at_c2 = half_factor * e_fwd                    # at coupler 2
        out_ring = -1j * k2 * e_add + t2 * at_c2       # leaving coupler 2 in the ring
        new_back = half_factor * out_ring
        if abs(new_back - e_back) < tol:
            e_back = new_back
            break
        e_back = new_back
    else:
        raise RuntimeError("ring circulation did not converge")
    e_fwd = -1j * k1 * e_in + t1 * e_back
    thru = t1 * e_in - 1j * k1 * e_back
    drop = t2 * e_add - 1j * k2 * (half_factor * e_fwd)
    return thru, drop


def half_ring_factor(wavelength: float, n0: float, alpha0: float,
                     radius: float, delta_n: complex = 0j) -> complex:
    k_v = 2.0 * math.pi / wavelength
    half = math.pi * radius
    amp = math.exp(-k_v * (alpha0 + delta_n.imag) * half)
    return amp * cmath.exp(1j * k_v * (n0 + delta_n.real) * half)


def rc_step_response(t: np.ndarray, v_step: float, r: float, c: float) -> np.ndarray:
    """Capacitor voltage of a series RC driven by a step at t=0 (zero IC)."""
    return v_step * (1.0 - np.exp(-t / (r * c)))


def rlc_step_response(t: np.ndarray, v_step: float, r: float, l: float,
                      c: float) -> np.ndarray:
    """Capacitor voltage of a series RLC driven by a step (underdamped case)."""
    alpha = r / (2.0 * l)
    w0 = 1.0 / math.sqrt(l * c)
    if alpha >= w0:
        raise ValueError("oracle only covers the underdamped case")
    wd = math.sqrt(w0 * w0 - alpha * alpha)
    return v_step * (1.0 - np.exp(-alpha * t) *
                     (np.cos(wd * t) + (alpha / wd) * np.sin(wd * t)))


def central_difference_jacobian(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Dense Jacobian of f: R^n -> R^m by central differences."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    jac = np.zeros((f0.size, x.size))
    for j in range(x.size):
        dx = np.zeros_like(x)
        step = h * max(1.0, abs(x[j]))
        dx[j] = step
        jac[:, j] = (np.asarray(f(x + dx)) - np.asarray(f(x - dx))) / (2.0 * step)
    return jac
