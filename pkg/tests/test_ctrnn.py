import math

import numpy as np
import pytest

from pnnsim import ctrnn
from pnnsim.ctrnn import (CtrnnParams, SigmoidParams, cubic_nullcline_roots,
                          feedforward_fixed_point, hopf_sweep, hopf_weights,
                          integrate, jacobian, newton_fixed_point,
                          nullcline_roots, sigmoid, sigmoid_deriv,
                          sigmoid_inverse, vector_field, wta_analyze,
                          wta_weights)
from pnnsim.errors import InvalidInputError, InvalidParamsError

from oracles import central_difference_jacobian


def single_neuron(tau=1.0, b=0.0, w_x=1.0, w_f=0.0, sig=None):
    sig = sig or SigmoidParams(alpha=1.0, beta=4.0, gamma=0.0, s0=0.0)
    return CtrnnParams(tau=[tau], b=[b], w_x=[[w_x]], w_y=[[w_f]], sigma=(sig,))


def pair(tau=1.0, b=(0.0, 0.0), w_y=None, sig=None, n_inputs=2):
    sig = sig or SigmoidParams(alpha=1.0, beta=6.0, gamma=0.0, s0=0.0)
    w_y = np.zeros((2, 2)) if w_y is None else w_y
    return CtrnnParams(tau=[tau, tau], b=list(b), w_x=np.eye(2)[:, :n_inputs],
                       w_y=w_y, sigma=(sig, sig))


class TestSigmoid:
    def test_midpoint(self):
        p = SigmoidParams(alpha=2.0, beta=3.0, gamma=0.5, s0=1.0)
        assert sigmoid(1.0, p) == pytest.approx(2.0 / 2 + 0.5, rel=1e-12)

    def test_asymptotes(self):
        p = SigmoidParams(alpha=2.0, beta=3.0, gamma=0.5, s0=1.0)
        assert sigmoid(1e6, p) == pytest.approx(2.5, rel=1e-12)
        assert sigmoid(-1e6, p) == pytest.approx(0.5, rel=1e-12)

    def test_derivative_at_center(self):
        p = SigmoidParams(alpha=2.0, beta=3.0, gamma=0.5, s0=1.0)
        assert sigmoid_deriv(1.0, p) == pytest.approx(2.0 * 3.0 / 4.0, rel=1e-12)

    def test_monotone_and_bounded(self):
        p = SigmoidParams(alpha=1.5, beta=5.0, gamma=-0.2, s0=0.3)
        s = np.linspace(-10, 10, 2001)
        y = sigmoid(s, p)
        # strictly increasing where float resolution allows; bounded everywhere
        core = (s > -3.0) & (s < 3.0)
        assert np.all(np.diff(y[core]) > 0)
        assert np.all(np.diff(y) >= 0)
        assert np.all(y >= p.gamma)          # strict bound saturates in float
        assert np.all(y <= p.gamma + p.alpha)
        assert np.all(y[core] > p.gamma)
        assert np.all(y[core] < p.gamma + p.alpha)

    def test_inverse_roundtrip(self):
        p = SigmoidParams(alpha=1.5, beta=-5.0, gamma=-0.2, s0=0.3)
        s = np.linspace(-2, 2, 41)
        assert sigmoid_inverse(sigmoid(s, p), p) == pytest.approx(s, abs=1e-9)

    def test_overflow_saturates(self):
        p = SigmoidParams(alpha=1.0, beta=400.0)
        assert sigmoid(10.0, p) == pytest.approx(1.0)
        assert sigmoid(-10.0, p) == pytest.approx(0.0, abs=1e-12)

    def test_param_validation(self):
        with pytest.raises(InvalidParamsError):
            SigmoidParams(alpha=-1.0)
        with pytest.raises(InvalidParamsError):
            SigmoidParams(beta=0.0)


class TestIntegrate:
    def test_pure_decay_without_feedback(self):
        p = single_neuron(tau=2.0)
        res = integrate(p, None, s_init=[3.0], duration=4.0, dt=0.01)
        expect = 3.0 * math.exp(-4.0 / 2.0)
        assert res.s[-1, 0] == pytest.approx(expect, rel=1e-8)

    def test_converges_to_feedforward_fixed_point(self):
        p = single_neuron(tau=0.5, b=0.3, w_x=2.0)
        res = integrate(p, [0.7], s_init=[-1.0], duration=20 * 0.5, dt=0.01)
        s_star, y_star = feedforward_fixed_point(p, [0.7])
        assert res.s[-1, 0] == pytest.approx(s_star[0], abs=1e-8)
        assert res.y[-1, 0] == pytest.approx(y_star[0], abs=1e-8)

    def test_rk4_order(self):
        p = single_neuron(tau=1.0, b=0.2, w_f=0.8)
        ends = []
        for dt in (0.02, 0.01, 0.005):
            res = integrate(p, [0.1], s_init=[1.3], duration=2.0, dt=dt)
            ends.append(res.s[-1, 0])
        # Richardson: |e(dt)|/|e(dt/2)| ~ 16 for RK4
        e1 = abs(ends[0] - ends[2])
        e2 = abs(ends[1] - ends[2])
        # e(dt) - e(dt/4) ~ e(dt); e(dt/2) - e(dt/4) ~ e(dt/2)
        ratio = e1 / e2
        assert 12.0 < ratio < 22.0

    def test_chain_rule_output_dynamics(self):
        p = single_neuron(tau=0.7, b=0.1, w_f=0.5)
        res = integrate(p, [0.2], s_init=[0.9], duration=3.0, dt=0.002)
        # numerical dy/dt vs sigma'(s) * ds/dt
        dy_num = np.gradient(res.y[:, 0], res.t)
        ds = np.array([ctrnn.rhs(p, res.s[i], np.array([0.2]))[0]
                       for i in range(len(res.t))])
        dy_pred = sigmoid_deriv(res.s[:, 0], p.sigma[0]) * ds
        mask = slice(5, -5)
        assert np.max(np.abs(dy_num[mask] - dy_pred[mask])) < 5e-4

    def test_coarse_dt_rejected(self):
        p = single_neuron(tau=1.0)
        with pytest.raises(InvalidInputError):
            integrate(p, None, [0.0], duration=1.0, dt=0.2)


class TestFeedforward:
    def test_zero_input_gives_bias(self):
        p = single_neuron(b=0.4)
        s_star, _ = feedforward_fixed_point(p, [0.0])
        assert s_star[0] == 0.4

    def test_fan_in_addition(self):
        p = CtrnnParams(tau=[1.0], b=[0.1], w_x=[[1.0, 1.0]], w_y=[[0.0]],
                        sigma=(SigmoidParams(),))
        s_star, _ = feedforward_fixed_point(p, [0.3, 0.5])
        assert s_star[0] == pytest.approx(0.9, rel=1e-12)

    def test_fan_in_subtraction(self):
        p = CtrnnParams(tau=[1.0], b=[0.1], w_x=[[1.0, -1.0]], w_y=[[0.0]],
                        sigma=(SigmoidParams(),))
        s_star, _ = feedforward_fixed_point(p, [0.3, 0.5])
        assert s_star[0] == pytest.approx(-0.1, rel=1e-12)

    def test_feedback_params_rejected(self):
        p = single_neuron(w_f=0.5)
        with pytest.raises(InvalidInputError):
            feedforward_fixed_point(p, [0.0])

    def test_global_convergence_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            tau = rng.uniform(0.1, 3.0)
            p = single_neuron(tau=tau, b=rng.uniform(-1, 1),
                              w_x=rng.uniform(-2, 2),
                              sig=SigmoidParams(alpha=rng.uniform(0.5, 2),
                                                beta=rng.uniform(1, 8),
                                                gamma=rng.uniform(-0.5, 0.5),
                                                s0=rng.uniform(-1, 1)))
            x = rng.uniform(-1, 1)
            s_star, _ = feedforward_fixed_point(p, [x])
            s_init = s_star + rng.uniform(-3, 3)
            res = integrate(p, [x], [s_init], duration=20 * tau, dt=tau / 25)
            assert abs(res.s[-1, 0] - s_star[0]) < 1e-8


class TestNullcline:
    def test_no_feedback_single_stable_root(self):
        # with w_f = 0 the lone root is exactly b + x
        p = single_neuron(b=0.2)
        roots = nullcline_roots(p, x=0.3, w_f=0.0)
        assert len(roots) == 1
        assert roots[0].stable
        assert roots[0].s_star == pytest.approx(0.5, abs=1e-10)

    def test_strong_feedback_three_roots(self):
        sig = SigmoidParams(alpha=1.0, beta=8.0, gamma=0.0, s0=0.5)
        p = single_neuron(b=0.0, sig=sig)
        # centered: fixed point structure symmetric about s0 when b + x + w_f/2 = s0
        w_f = 1.0
        x = 0.5 - w_f / 2.0
        roots = nullcline_roots(p, x=x, w_f=w_f)
        assert len(roots) == 3
        assert [r.stable for r in roots] == [True, False, True]

    def test_root_count_transition_and_integration_agreement(self):
        sig = SigmoidParams(alpha=1.0, beta=8.0, gamma=0.0, s0=0.5)
        p0 = single_neuron(b=0.0, sig=sig)
        counts = []
        for w_f in np.linspace(0.0, 1.2, 25):
            # slight off-centering keeps grid points away from the fold itself
            x = 0.5 - w_f / 2.0 + 0.03
            roots = nullcline_roots(p0, x=x, w_f=w_f)
            counts.append(len(roots))
            p = single_neuron(b=0.0, w_f=w_f, sig=sig)
            for r in roots:
                if r.stable:
                    res = integrate(p, [x], [r.s_star + 1e-4], duration=60.0,
                                    dt=0.02)
                    assert abs(res.s[-1, 0] - r.s_star) < 1e-5
        counts = np.array(counts)
        # monostable at low w_f, bistable at high w_f, single transition
        assert counts[0] == 1
        assert counts[-1] == 3
        assert np.all(np.diff((counts == 3).astype(int)) >= 0)

    def test_cubic_cross_check_root_count(self):
        sig = SigmoidParams(alpha=1.0, beta=8.0, gamma=0.0, s0=0.5)
        p = single_neuron(b=0.0, sig=sig)
        for w_f in (0.2, 1.0):
            x = 0.5 - w_f / 2.0
            exact = nullcline_roots(p, x=x, w_f=w_f)
            approx = cubic_nullcline_roots(p, x=x, w_f=w_f)
            assert len(exact) == len(approx)

    def test_unstable_root_repels(self):
        sig = SigmoidParams(alpha=1.0, beta=8.0, gamma=0.0, s0=0.5)
        w_f = 1.0
        x = 0.5 - w_f / 2.0
        p = single_neuron(b=0.0, w_f=w_f, sig=sig)
        roots = nullcline_roots(p, x=x, w_f=w_f)
        unstable = [r for r in roots if not r.stable][0]
        res = integrate(p, [x], [unstable.s_star + 1e-3], duration=60.0, dt=0.02)
        assert abs(res.s[-1, 0] - unstable.s_star) > 0.05


class TestJacobian:
    def test_no_feedback_diagonal(self):
        p = pair(tau=0.5)
        j = jacobian(p, [0.1, -0.2])
        assert j == pytest.approx(-np.eye(2) / 0.5)

    def test_matches_finite_differences_randomized(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = rng.integers(1, 5)
            sig = tuple(SigmoidParams(alpha=rng.uniform(0.5, 2),
                                      beta=rng.uniform(-6, 6) or 1.0,
                                      gamma=rng.uniform(-0.5, 0.5),
                                      s0=rng.uniform(-1, 1)) for _ in range(n))
            p = CtrnnParams(tau=rng.uniform(0.2, 2.0, n), b=rng.uniform(-1, 1, n),
                            w_x=rng.uniform(-1, 1, (n, 2)),
                            w_y=rng.uniform(-2, 2, (n, n)), sigma=sig)
            s = rng.uniform(-1.5, 1.5, n)
            x = rng.uniform(-1, 1, 2)
            j_analytic = jacobian(p, s)
            j_fd = central_difference_jacobian(lambda sv: ctrnn.rhs(p, sv, x), s)
            scale = np.max(np.abs(j_fd)) + 1e-30
            assert np.max(np.abs(j_analytic - j_fd)) / scale < 1e-6

    def test_hopf_matrix_complex_pair(self):
        sig = SigmoidParams(alpha=1.0, beta=6.0, gamma=0.0, s0=0.0)
        p = pair(w_y=hopf_weights(0.2), sig=sig, b=(0.0, 0.0))
        fp = newton_fixed_point(p, [0.0, 0.0], [0.0, 0.0])
        eig = fp.eigenvalues
        assert eig[0] == pytest.approx(np.conj(eig[1]), rel=1e-9)
        assert abs(eig[0].imag) > 0


class TestHopf:
    def make(self):
        # bias keeps the tracked fixed point near the sigmoid centers so the
        # loop gain w_f * sigma' crosses 1 inside w_f in (0, 1)
        sig = SigmoidParams(alpha=1.0, beta=8.0, gamma=0.0, s0=0.5)
        return pair(tau=0.3, b=(-0.3, 0.7), w_y=hopf_weights(0.0), sig=sig)

    def test_sweep_finds_crossing(self):
        p = self.make()
        sweep = hopf_sweep(p, np.linspace(0.0, 1.0, 11))
        assert sweep.w_f_critical is not None
        # theory: crossing when w_f * sigma'(s*) = 1 at the symmetric FP;
        # s* = 0 is not a FP here, so just check bracketing and monotonicity
        below = [pt for pt in sweep.points if pt.w_f < sweep.w_f_critical - 0.05]
        above = [pt for pt in sweep.points if pt.w_f > sweep.w_f_critical + 0.05]
        assert all(not pt.oscillating for pt in below)
        assert all(pt.oscillating for pt in above)
        # amplitude grows with w_f, modulo jitter once it saturates near alpha
        amps = [pt.amplitude for pt in above]
        assert all(b >= a - 0.01 * max(amps) for a, b in zip(amps, amps[1:]))
        assert amps[-1] > amps[0]

    def test_crossing_matches_eigenvalue_zero(self):
        p = self.make()
        sweep = hopf_sweep(p, [0.0, 1.0], crossing_tol=1e-6)
        wf_c = sweep.w_f_critical
        pw = p.with_w_y(hopf_weights(wf_c))
        fp = newton_fixed_point(pw, [0.0, 0.0], sweep.points[0].fixed_point.s_star)
        assert abs(np.max(fp.eigenvalues.real)) < 2e-5

    def test_below_critical_decays(self):
        p = self.make()
        sweep = hopf_sweep(p, [0.05], x=[0.0, 0.0])
        pt = sweep.points[0]
        assert not pt.oscillating
        res = integrate(p.with_w_y(hopf_weights(0.05)), None,
                        pt.fixed_point.s_star + 0.3, duration=30 * 0.3, dt=0.005)
        assert np.max(np.abs(res.s[-1] - pt.fixed_point.s_star)) < 1e-6


class TestWta:
    def make(self, w_inh=-1.0):
        sig = SigmoidParams(alpha=1.0, beta=6.0, gamma=0.0, s0=0.5)
        return pair(tau=0.3, b=(0.3, 0.3), w_y=wta_weights(w_inh), sig=sig)

    def test_stronger_input_wins(self):
        p = self.make()
        assert wta_analyze(p, [0.5, 0.1]).winner == 0
        assert wta_analyze(p, [0.1, 0.5]).winner == 1

    def test_memory_of_last_state(self):
        p = self.make()
        first = wta_analyze(p, [0.5, 0.1])
        assert first.winner == 0
        hold = wta_analyze(p, [0.0, 0.0], s_init=first.s_final)
        assert hold.winner == 0

    def test_symmetric_input_stays_on_diagonal(self):
        p = self.make()
        res = wta_analyze(p, [0.3, 0.3], s_init=[0.4, 0.4])
        assert res.winner is None
        assert np.max(np.abs(res.trajectory.y[:, 0] - res.trajectory.y[:, 1])) < 1e-9

    def test_requires_inhibitory_coupling(self):
        p = self.make(w_inh=-1.0).with_w_y(np.array([[1.0, 0.5], [0.5, 1.0]]))
        with pytest.raises(InvalidParamsError):
            wta_analyze(p, [0.1, 0.0])

    def test_basins_split_by_diagonal(self):
        p = self.make()
        rng = np.random.default_rng(8)
        for _ in range(12):
            a, b = rng.uniform(0.0, 1.0, 2)
            if abs(a - b) < 0.05:
                continue
            res = wta_analyze(p, [0.0, 0.0],
                              s_init=[float(sigmoid_inverse(max(a, 1e-3), p.sigma[0])),
                                      float(sigmoid_inverse(max(b, 1e-3), p.sigma[1]))])
            assert res.winner == (0 if a > b else 1)


class TestVectorField:
    def test_zero_at_fixed_point(self):
        sig = SigmoidParams(alpha=1.0, beta=6.0, gamma=0.0, s0=0.5)
        p = pair(tau=0.3, b=(0.3, 0.3), w_y=wta_weights(-1.0), sig=sig)
        res = wta_analyze(p, [0.4, 0.1])
        y_fp = res.y_final
        vf = vector_field(p, [y_fp[0]], [y_fp[1]], x=[0.4, 0.1])
        assert abs(vf.dy1[0, 0]) < 1e-7
        assert abs(vf.dy2[0, 0]) < 1e-7

    def test_out_of_range_points_excluded(self):
        p = pair()
        vf = vector_field(p, [-0.5, 0.5], [0.5, 1.5])
        assert vf.excluded == 3
        assert np.isnan(vf.dy1[0, 0]) and np.isnan(vf.dy1[1, 1])
        assert np.isfinite(vf.dy1[1, 0])

    def test_arrows_align_with_trajectories(self):
        sig = SigmoidParams(alpha=1.0, beta=6.0, gamma=0.0, s0=0.5)
        p = pair(tau=0.3, b=(0.3, 0.3), w_y=wta_weights(-1.0), sig=sig)
        rng = np.random.default_rng(5)
        for _ in range(8):
            y0 = rng.uniform(0.1, 0.9, 2)
            s0 = np.array([float(sigmoid_inverse(y0[0], p.sigma[0])),
                           float(sigmoid_inverse(y0[1], p.sigma[1]))])
            vf = vector_field(p, [y0[0]], [y0[1]])
            v = np.array([vf.dy1[0, 0], vf.dy2[0, 0]])
            res = integrate(p, [0.0, 0.0], s0, duration=0.01, dt=0.002)
            step = res.y[-1] - res.y[0]
            if np.linalg.norm(v) > 1e-9 and np.linalg.norm(step) > 1e-12:
                cosang = v @ step / (np.linalg.norm(v) * np.linalg.norm(step))
                assert cosang > 0.99


class TestSerialization:
    def test_params_roundtrip(self):
        p = pair(tau=0.3, b=(0.1, -0.2), w_y=hopf_weights(0.4))
        q = CtrnnParams.from_dict(p.to_dict())
        assert np.allclose(q.tau, p.tau)
        assert np.allclose(q.w_y, p.w_y)
        assert q.sigma == p.sigma
