import math

import numpy as np
import pytest

from pnnsim.errors import (ChannelMismatchError, InvalidInputError,
                           InvalidParamsError)
from pnnsim.optics import (CouplerParams, MrrParams, OpticalField,
                           WaveguideParams, WdmBus, bus_map, couple,
                           merge_buses, mrr_transfer, propagate_waveguide)

from oracles import half_ring_factor, ring_circulation

LAM = 1.55e-6


def field(power, lam=LAM, phase=0.0):
    return OpticalField.from_power(power, lam, phase)


class TestOpticalField:
    def test_power_convention(self):
        f = OpticalField(3e-3, 4e-3, LAM)
        assert f.power == pytest.approx(25e-6, rel=1e-12)

    def test_rejects_nonpositive_wavelength(self):
        with pytest.raises(InvalidParamsError):
            OpticalField(1.0, 0.0, -1e-6)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            OpticalField(float("nan"), 0.0, LAM)


class TestWdmBus:
    def test_total_power_is_channel_sum(self):
        bus = WdmBus((field(1e-3, 1.55e-6), field(2e-3, 1.56e-6)))
        assert bus.total_power == pytest.approx(3e-3, rel=1e-12)

    def test_duplicate_wavelength_rejected(self):
        with pytest.raises(ChannelMismatchError):
            WdmBus((field(1e-3, LAM), field(1e-3, LAM + 0.5e-12)))

    def test_channel_lookup_within_tolerance(self):
        bus = WdmBus((field(1e-3, LAM),))
        assert bus.channel_at(LAM + 0.4e-12) is not None
        assert bus.channel_at(LAM + 5e-12) is None


class TestWaveguide:
    def test_zero_length_is_identity(self):
        f = field(1e-3, phase=0.3)
        out = propagate_waveguide(f, WaveguideParams(2.4, 1e-5, 0.0))
        assert out.field == f.field
        assert out.wavelength == f.wavelength

    def test_unit_extinction_gives_e_minus_two_in_power(self):
        # choose L so that (2*pi/lam)*alpha0*L = 1
        alpha0 = 1e-5
        length = LAM / (2.0 * math.pi * alpha0)
        out = propagate_waveguide(field(1e-3), WaveguideParams(0.0, alpha0, length))
        assert out.power == pytest.approx(1e-3 * math.exp(-2.0), rel=1e-12)

    def test_full_wave_phase_returns_same_field(self):
        n0 = 2.4
        length = LAM / n0
        f = field(1e-3, phase=0.7)
        out = propagate_waveguide(f, WaveguideParams(n0, 0.0, length))
        assert out.field == pytest.approx(f.field, rel=1e-12)

    def test_passivity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            alpha0 = rng.uniform(0.0, 1e-4)
            length = rng.uniform(0.0, 1e-3)
            f = field(rng.uniform(0, 10e-3), phase=rng.uniform(0, 2 * math.pi))
            out = propagate_waveguide(f, WaveguideParams(2.4, alpha0, length))
            if alpha0 == 0.0:
                assert out.power == pytest.approx(f.power, rel=1e-12)
            else:
                assert out.power <= f.power

    def test_nonfinite_delta_n_rejected(self):
        with pytest.raises(InvalidInputError):
            propagate_waveguide(field(1e-3), WaveguideParams(2.4, 0.0, 1e-5),
                                complex(float("inf"), 0))


class TestCoupler:
    def test_k_zero_is_identity(self):
        f = field(1e-3, phase=0.2)
        o1, o2 = couple(f, f.zero_like(), CouplerParams(0.0))
        assert o1.field == pytest.approx(f.field, rel=1e-12)
        assert o2.power == 0.0

    def test_k_one_full_cross(self):
        f = field(1e-3)
        o1, o2 = couple(f, f.zero_like(), CouplerParams(1.0))
        assert o1.power == pytest.approx(0.0, abs=1e-18)
        assert o2.field == pytest.approx(-1j * f.field, rel=1e-12)

    def test_3db_splitter(self):
        o1, o2 = couple(field(1e-3), field(0.0), CouplerParams(1.0 / math.sqrt(2.0)))
        assert o1.power == pytest.approx(0.5e-3, rel=1e-12)
        assert o2.power == pytest.approx(0.5e-3, rel=1e-12)

    def test_wavelength_mismatch_rejected(self):
        with pytest.raises(ChannelMismatchError):
            couple(field(1e-3, 1.55e-6), field(1e-3, 1.551e-6), CouplerParams(0.5))

    def test_unitarity_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            k = rng.uniform(0.0, 1.0)
            f1 = OpticalField(rng.normal(), rng.normal(), LAM)
            f2 = OpticalField(rng.normal(), rng.normal(), LAM)
            o1, o2 = couple(f1, f2, CouplerParams(k))
            p_in = f1.power + f2.power
            p_out = o1.power + o2.power
            assert abs(p_out - p_in) <= 1e-12 * max(p_in, 1e-300)


def default_ring(radius=8e-6, k=0.3, alpha0=5.64e-6, n0=2.4):
    return MrrParams.make(radius, k, k, n0, alpha0)


class TestMrr:
    def test_on_resonance_lossless_symmetric_full_drop(self):
        ring = default_ring(alpha0=0.0)
        # pick an exact resonance: lam = n0 * L / m
        circ = ring.circumference
        m = round(2.4 * circ / LAM)
        lam = 2.4 * circ / m
        f = OpticalField.from_power(1e-3, lam)
        thru, drop = mrr_transfer(f, None, ring)
        assert drop.power == pytest.approx(1e-3, rel=1e-9)
        assert thru.power == pytest.approx(0.0, abs=1e-15)

    def test_far_off_resonance_mostly_thru(self):
        ring = default_ring(k=0.1)
        circ = ring.circumference
        m = round(2.4 * circ / LAM)
        lam_res = 2.4 * circ / m
        # anti-resonance: phase offset by pi => shift wavelength by half a "FSR in m"
        lam = 2.4 * circ / (m + 0.5)
        f = OpticalField.from_power(1e-3, lam)
        thru, drop = mrr_transfer(f, None, ring)
        h = half_ring_factor(lam, 2.4, ring.waveguide.alpha0, ring.radius)
        oracle_thru, oracle_drop = ring_circulation(f.field, 0j, 0.1, 0.1, h)
        assert thru.field == pytest.approx(oracle_thru, abs=1e-12)
        assert drop.field == pytest.approx(oracle_drop, abs=1e-12)
        assert thru.power > 0.99 * f.power
        assert drop.power < 1e-3 * f.power
        assert lam_res != lam

    def test_closed_form_matches_circulation_randomized(self):
        rng = np.random.default_rng(1234)
        for _ in range(300):
            k1 = rng.uniform(0.05, 0.95)
            k2 = rng.uniform(0.05, 0.95)
            radius = rng.uniform(5e-6, 20e-6)
            n0 = rng.uniform(2.0, 3.0)
            lam = rng.uniform(1.5e-6, 1.6e-6)
            # round-trip amplitude in [0.5, 0.9995]
            a = rng.uniform(0.5, 0.9995)
            alpha0 = -math.log(a) * lam / (2.0 * math.pi * 2.0 * math.pi * radius)
            dn = complex(rng.uniform(-2e-3, 2e-3), 0.0)
            ring = MrrParams.make(radius, k1, k2, n0, alpha0)
            e_in = OpticalField(rng.normal(0, 0.05), rng.normal(0, 0.05), lam)
            e_add = OpticalField(rng.normal(0, 0.05), rng.normal(0, 0.05), lam)
            thru, drop = mrr_transfer(e_in, e_add, ring, dn)
            h = half_ring_factor(lam, n0, alpha0, radius, dn)
            o_thru, o_drop = ring_circulation(e_in.field, e_add.field, k1, k2, h)
            assert abs(thru.field - o_thru) < 1e-9
            assert abs(drop.field - o_drop) < 1e-9

    def test_passivity(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            k1 = rng.uniform(0.05, 0.95)
            k2 = rng.uniform(0.05, 0.95)
            alpha0 = rng.uniform(0.0, 1e-4)
            ring = MrrParams.make(8e-6, k1, k2, 2.4, alpha0)
            lam = rng.uniform(1.5e-6, 1.6e-6)
            f_in = OpticalField(rng.normal(0, 0.05), rng.normal(0, 0.05), lam)
            f_add = OpticalField(rng.normal(0, 0.05), rng.normal(0, 0.05), lam)
            thru, drop = mrr_transfer(f_in, f_add, ring)
            p_in = f_in.power + f_add.power
            p_out = thru.power + drop.power
            if alpha0 == 0.0:
                assert p_out == pytest.approx(p_in, rel=1e-9)
            else:
                assert p_out <= p_in * (1.0 + 1e-12)

    def test_wavelength_unchanged(self):
        ring = default_ring()
        thru, drop = mrr_transfer(field(1e-3), None, ring)
        assert thru.wavelength == LAM
        assert drop.wavelength == LAM

    def test_gain_params_rejected(self):
        ring = default_ring(alpha0=0.0)
        with pytest.raises(InvalidParamsError):
            # negative imaginary perturbation = round-trip gain
            mrr_transfer(field(1e-3), None, ring, complex(0.0, -1e-3))

    def test_ring_length_must_match_radius(self):
        with pytest.raises(InvalidParamsError):
            MrrParams(radius=8e-6, coupler_in=CouplerParams(0.3),
                      coupler_drop=CouplerParams(0.3),
                      waveguide=WaveguideParams(2.4, 0.0, 1e-6))


class TestBusOps:
    def test_empty_bus_maps_to_empty(self):
        out = bus_map(WdmBus(()), lambda c: c)
        assert len(out) == 0

    def test_identity_transform(self):
        bus = WdmBus((field(1e-3, 1.55e-6), field(2e-3, 1.56e-6)))
        out = bus_map(bus, lambda c: c)
        assert out.wavelengths == bus.wavelengths
        assert out.total_power == bus.total_power

    def test_selective_ring_drop(self):
        ring = default_ring(k=0.3)
        circ = ring.circumference
        m = round(2.4 * circ / 1.55e-6)
        lam_res = 2.4 * circ / m
        lam_off = 2.4 * circ / (m + 0.5)
        bus = WdmBus((field(1e-3, lam_res), field(1e-3, lam_off)))

        thru_fields = bus_map(bus, lambda c: mrr_transfer(c, None, ring)[0])
        assert thru_fields.power_at(lam_res) < 0.05e-3
        assert thru_fields.power_at(lam_off) > 0.9e-3

    def test_transform_may_not_change_wavelength(self):
        bus = WdmBus((field(1e-3, 1.55e-6),))
        with pytest.raises(ChannelMismatchError):
            bus_map(bus, lambda c: OpticalField(c.e_real, c.e_imag, 1.56e-6))

    def test_merge_buses_rejects_collision(self):
        with pytest.raises(ChannelMismatchError):
            merge_buses(WdmBus((field(1e-3, LAM),)), WdmBus((field(1e-3, LAM),)))
