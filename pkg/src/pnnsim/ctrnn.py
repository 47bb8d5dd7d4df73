"""Abstract continuous-time recurrent neural network reference model.

The state of a layer of leaky-integrator neurons evolves as

    tau * ds/dt = -(s - b) + W_x @ x(t) + W_y @ sigma(s),      y = sigma(s)

with the parameterized sigmoid

    sigma(s) = alpha / (1 + exp(-beta * (s - s0))) + gamma.

Besides plain integration (RK4), this module provides fixed-point and
nullcline analysis, the analytic Jacobian, and bifurcation sweeps for the
two canonical two-neuron systems: the mutually-inhibiting winner-take-all
network and the self-excited cross-coupled pair that undergoes a Hopf
bifurcation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import ConvergenceError, InvalidInputError, InvalidParamsError

_EXP_CLIP = 500.0


@dataclass(frozen=True)
class SigmoidParams:
    """sigma(s) = alpha / (1 + exp(-beta*(s - s0))) + gamma."""

    alpha: float = 1.0
    beta: float = 4.0
    gamma: float = 0.0
    s0: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise InvalidParamsError(f"alpha must be > 0, got {self.alpha}")
        if self.beta == 0.0:
            raise InvalidParamsError("beta must be nonzero (its sign sets orientation)")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta,
                "gamma": self.gamma, "s0": self.s0}

    @classmethod
    def from_dict(cls, d: dict) -> "SigmoidParams":
        return cls(alpha=float(d["alpha"]), beta=float(d["beta"]),
                   gamma=float(d.get("gamma", 0.0)), s0=float(d.get("s0", 0.0)))


def sigmoid(s, p: SigmoidParams):
    """Activation value; exp overflow saturates to the asymptotes."""
    z = np.clip(p.beta * (np.asarray(s, dtype=float) - p.s0), -_EXP_CLIP, _EXP_CLIP)
    return p.alpha / (1.0 + np.exp(-z)) + p.gamma


def sigmoid_deriv(s, p: SigmoidParams):
    z = np.clip(p.beta * (np.asarray(s, dtype=float) - p.s0), -_EXP_CLIP, _EXP_CLIP)
    u = 1.0 / (1.0 + np.exp(-z))
    return p.alpha * p.beta * u * (1.0 - u)


def sigmoid_inverse(y, p: SigmoidParams):
    """Inverse activation; valid strictly inside (gamma, alpha + gamma)."""
    y = np.asarray(y, dtype=float)
    arg = p.alpha / (y - p.gamma) - 1.0
    return p.s0 - np.log(arg) / p.beta


@dataclass(frozen=True)
class CtrnnParams:
    """Layer parameters: per-neuron tau, bias, weights and activation."""

    tau: np.ndarray          # (n,)
    b: np.ndarray            # (n,)
    w_x: np.ndarray          # (n, m)
    w_y: np.ndarray          # (n, n)
    sigma: tuple[SigmoidParams, ...]  # one per neuron

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        w_x = np.atleast_2d(np.asarray(self.w_x, dtype=float))
        w_y = np.atleast_2d(np.asarray(self.w_y, dtype=float))
        sig = self.sigma
        if isinstance(sig, SigmoidParams):
            sig = (sig,) * tau.size
        sig = tuple(sig)
        if len(sig) == 1 and tau.size > 1:
            sig = sig * tau.size
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "w_x", w_x)
        object.__setattr__(self, "w_y", w_y)
        object.__setattr__(self, "sigma", sig)
        n = tau.size
        if np.any(tau <= 0.0):
            raise InvalidParamsError("tau must be > 0 elementwise")
        if b.size != n or w_y.shape != (n, n) or w_x.shape[0] != n or len(sig) != n:
            raise InvalidParamsError(
                f"inconsistent shapes for n={n}: b{b.shape}, "
                f"w_x{w_x.shape}, w_y{w_y.shape}, {len(sig)} sigmoids")

    @property
    def n(self) -> int:
        return self.tau.size

    @property
    def n_inputs(self) -> int:
        return self.w_x.shape[1]

    def activation(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([sigmoid(s[i], self.sigma[i]) for i in range(self.n)])

    def activation_deriv(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([sigmoid_deriv(s[i], self.sigma[i]) for i in range(self.n)])

    def with_w_y(self, w_y: np.ndarray) -> "CtrnnParams":
        return CtrnnParams(self.tau, self.b, self.w_x, np.asarray(w_y, float), self.sigma)

    def to_dict(self) -> dict:
        return {"tau": self.tau.tolist(), "b": self.b.tolist(),
                "w_x": self.w_x.tolist(), "w_y": self.w_y.tolist(),
                "sigma": [s.to_dict() for s in self.sigma]}

    @classmethod
    def from_dict(cls, d: dict) -> "CtrnnParams":
        sig = d["sigma"]
        if isinstance(sig, dict):
            sig = [sig]
        return cls(tau=np.asarray(d["tau"], float), b=np.asarray(d["b"], float),
                   w_x=np.asarray(d["w_x"], float), w_y=np.asarray(d["w_y"], float),
                   sigma=tuple(SigmoidParams.from_dict(s) for s in sig))


def wta_weights(w_inh: float) -> np.ndarray:
    """Winner-take-all coupling: +1 self-excitation, mutual inhibition w_inh < 0."""
    return np.array([[1.0, w_inh], [w_inh, 1.0]])


def hopf_weights(w_f: float) -> np.ndarray:
    """Cross-coupled pair with self-feedback w_f; oscillatory above a critical w_f."""
    return np.array([[w_f, 1.0], [-1.0, w_f]])


def rhs(p: CtrnnParams, s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """ds/dt of the layer at state s and input x."""
    drive = -(s - p.b) + p.w_x @ x + p.w_y @ p.activation(s)
    return drive / p.tau


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------

@dataclass
class IntegrationResult:
    t: np.ndarray      # (nt,)
    s: np.ndarray      # (nt, n)
    y: np.ndarray      # (nt, n)


def _input_fn(p: CtrnnParams, x_of_t):
    if x_of_t is None:
        const = np.zeros(p.n_inputs)
        return lambda t: const
    if callable(x_of_t):
        return lambda t: np.atleast_1d(np.asarray(x_of_t(t), dtype=float))
    const = np.atleast_1d(np.asarray(x_of_t, dtype=float))
    return lambda t: const


def integrate(p: CtrnnParams, x_of_t, s_init, duration: float,
              dt: float) -> IntegrationResult:
    """Fixed-step RK4 integration of the layer dynamics.

    `x_of_t` may be None (zero input), a constant vector, or a callable of
    time.  Requires dt <= min(tau)/20 so the fastest neuron is resolved.
    """
    if dt <= 0.0 or duration <= 0.0:
        raise InvalidInputError("duration and dt must be > 0")
    if dt > np.min(p.tau) / 20.0:
        raise InvalidInputError(
            f"dt = {dt:.3e} s too coarse: must be <= min(tau)/20 = "
            f"{np.min(p.tau) / 20.0:.3e} s")
    xf = _input_fn(p, x_of_t)
    n_steps = int(round(duration / dt))
    s = np.atleast_1d(np.asarray(s_init, dtype=float)).copy()
    if s.size != p.n:
        raise InvalidInputError(f"s_init has size {s.size}, expected {p.n}")
    t_grid = np.arange(n_steps + 1) * dt
    out_s = np.empty((n_steps + 1, p.n))
    out_s[0] = s
    for i in range(n_steps):
        t = t_grid[i]
        k1 = rhs(p, s, xf(t))
        k2 = rhs(p, s + 0.5 * dt * k1, xf(t + 0.5 * dt))
        k3 = rhs(p, s + 0.5 * dt * k2, xf(t + 0.5 * dt))
        k4 = rhs(p, s + dt * k3, xf(t + dt))
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise ConvergenceError(
                f"state diverged at t = {t_grid[i + 1]:.6e} s",
                time=t_grid[i + 1])
        out_s[i + 1] = s
    out_y = np.empty_like(out_s)
    for j in range(p.n):
        out_y[:, j] = sigmoid(out_s[:, j], p.sigma[j])
    return IntegrationResult(t=t_grid, s=out_s, y=out_y)


def feedforward_fixed_point(p: CtrnnParams, x) -> tuple[np.ndarray, np.ndarray]:
    """s* = W_x @ x + b and y* = sigma(s*); only valid without feedback."""
    if np.any(p.w_y != 0.0):
        raise InvalidInputError("feedforward fixed point requires W_y = 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s_star = p.w_x @ x + p.b
    return s_star, p.activation(s_star)


# ---------------------------------------------------------------------------
# Fixed points, stability, nullclines
# ---------------------------------------------------------------------------

def jacobian(p: CtrnnParams, s) -> np.ndarray:
    """Analytic Jacobian (-I + W_y @ diag(sigma')) / tau at state s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    j = -np.eye(p.n) + p.w_y * p.activation_deriv(s)[np.newaxis, :]
    return j / p.tau[:, np.newaxis]


def classify_eigenvalues(eigvals: np.ndarray, tol: float = 1e-9) -> str:
    re = eigvals.real
    im = eigvals.imag
    osc = np.any(np.abs(im) > tol)
    if np.max(np.abs(re)) <= tol:
        return "center_marginal"
    if np.max(re) < tol and np.min(re) < -tol:
        return "stable_focus" if osc else "stable_node"
    if np.min(re) > -tol:
        return "unstable_focus" if osc else "unstable_node"
    return "saddle"


@dataclass(frozen=True)
class FixedPoint:
    s_star: np.ndarray
    eigenvalues: np.ndarray
    stability: str
    residual: float

    def __post_init__(self):
        if self.residual > 1e-10:
            raise ConvergenceError(
                f"fixed point residual {self.residual:.3e} exceeds 1e-10",
                residual=self.residual)

    @property
    def is_stable(self) -> bool:
        return self.stability in ("stable_node", "stable_focus")


def newton_fixed_point(p: CtrnnParams, x, s_guess, tol: float = 1e-13,
                       max_iter: int = 80) -> FixedPoint:
    """Damped Newton iteration on the drive term; raises on non-convergence."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.atleast_1d(np.asarray(s_guess, dtype=float)).copy()

    def drive(sv):
        return -(sv - p.b) + p.w_x @ x + p.w_y @ p.activation(sv)

    g = drive(s)
    for _ in range(max_iter):
        if np.max(np.abs(g)) < tol:
            break
        jg = -np.eye(p.n) + p.w_y * p.activation_deriv(s)[np.newaxis, :]
        try:
            step = np.linalg.solve(jg, -g)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in fixed-point Newton")
        lam = 1.0
        g_norm = np.max(np.abs(g))
        while lam > 1e-6:
            s_new = s + lam * step
            g_new = drive(s_new)
            if np.max(np.abs(g_new)) < g_norm:
                break
            lam *= 0.5
        s = s + lam * step
        g = drive(s)
    residual = float(np.max(np.abs(g)))
    if residual > 1e-10:
        raise ConvergenceError(
            f"fixed-point Newton stalled at residual {residual:.3e}",
            residual=residual)
    eig = np.linalg.eigvals(jacobian(p, s))
    return FixedPoint(s_star=s, eigenvalues=eig,
                      stability=classify_eigenvalues(eig), residual=residual)


@dataclass(frozen=True)
class NullclineRoot:
    s_star: float
    stable: bool


def nullcline_roots(p: CtrnnParams, x: float, w_f: float,
                    grid_points: int = 4001, tol: float = 1e-12
                    ) -> list[NullclineRoot]:
    """All real roots of 0 = -s + b + x + w_f * sigma(s) for a single neuron.

    Roots are found by sign-change bracketing on a dense grid followed by
    bisection; stability comes from the sign of the RHS derivative
    (-1 + w_f * sigma'(s*)).
    """
    if p.n != 1:
        raise InvalidInputError("nullcline analysis is defined for a single neuron")
    sig = p.sigma[0]
    b = float(p.b[0])

    def f(s):
        return -s + b + x + w_f * float(sigmoid(s, sig))

    bounds = sorted((w_f * sig.gamma, w_f * (sig.alpha + sig.gamma)))
    margin = 1e-6 + 1e-3 * (bounds[1] - bounds[0] + abs(b) + abs(x) + 1.0)
    lo = b + x + bounds[0] - margin
    hi = b + x + bounds[1] + margin
    grid = np.linspace(lo, hi, grid_points)
    vals = -grid + b + x + w_f * sigmoid(grid, sig)

    roots: list[float] = []
    for i in range(grid_points - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(float(grid[i]))
            continue
        if v0 * v1 < 0.0:
            a_, b_ = float(grid[i]), float(grid[i + 1])
            fa = v0
            while b_ - a_ > tol:
                mid = 0.5 * (a_ + b_)
                fm = f(mid)
                if fm == 0.0:
                    a_ = b_ = mid
                    break
                if fa * fm < 0.0:
                    b_ = mid
                else:
                    a_, fa = mid, fm
            roots.append(0.5 * (a_ + b_))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))

    out = []
    for r in roots:
        slope = -1.0 + w_f * float(sigmoid_deriv(r, sig))
        out.append(NullclineRoot(s_star=r, stable=slope < 0.0))
    return out


def cubic_nullcline_roots(p: CtrnnParams, x: float, w_f: float) -> list[float]:
    """Cross-check: roots of the cubic Taylor expansion of the nullcline about s0.

    Uses sigma(s0 + d) ~ gamma + alpha/2 + alpha*beta*d/4 - alpha*beta^3*d^3/48.
    Only intended for qualitative root counting near the fold.
    """
    if p.n != 1:
        raise InvalidInputError("single-neuron analysis only")
    sig = p.sigma[0]
    b = float(p.b[0])
    c3 = -w_f * sig.alpha * sig.beta ** 3 / 48.0
    c1 = w_f * sig.alpha * sig.beta / 4.0 - 1.0
    c0 = b + x + w_f * (sig.gamma + 0.5 * sig.alpha) - sig.s0
    if c3 == 0.0:
        return [sig.s0 - c0 / c1] if c1 != 0.0 else []
    roots = np.roots([c3, 0.0, c1, c0])
    real = [float(r.real) + sig.s0 for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r))]
    return sorted(real)


# ---------------------------------------------------------------------------
# Two-neuron analyses
# ---------------------------------------------------------------------------

@dataclass
class HopfPoint:
    w_f: float
    fixed_point: FixedPoint | None
    oscillating: bool
    amplitude: float      # peak-to-peak of y1 on the limit cycle, 0 if none
    period: float         # s, nan if not oscillating


@dataclass
class HopfSweep:
    points: list[HopfPoint]
    w_f_critical: float | None   # eigenvalue real-part crossing, or None


def _settle_to_fixed_point(p: CtrnnParams, x, s_guess) -> FixedPoint:
    """Fallback for Newton failures: integrate to quiescence, then polish."""
    tau_max = float(np.max(p.tau))
    res = integrate(p, x, s_guess, duration=60.0 * tau_max,
                    dt=float(np.min(p.tau)) / 40.0)
    return newton_fixed_point(p, x, res.s[-1])


def measure_limit_cycle(p: CtrnnParams, x, s_start, period_hint: float,
                        settle_mult: float = 50.0, n_periods: int = 20,
                        amp_floor_frac: float = 1e-6
                        ) -> tuple[float, float]:
    """(peak-to-peak amplitude of y1, period); (0, nan) if motion dies out.

    Discards a transient of settle_mult*max(tau), then measures peak spacing
    over the last `n_periods` detected periods.  Oscillation requires the
    amplitude to exceed amp_floor_frac * alpha.
    """
    tau_max = float(np.max(p.tau))
    dt = min(float(np.min(p.tau)) / 40.0, period_hint / 60.0)
    settle = settle_mult * tau_max
    span = settle + (n_periods + 8) * period_hint
    res = integrate(p, x, s_start, duration=span, dt=dt)
    i0 = np.searchsorted(res.t, settle)
    y1 = res.y[i0:, 0]
    t = res.t[i0:]
    amp = float(np.ptp(y1))
    floor = amp_floor_frac * p.sigma[0].alpha
    if amp <= floor:
        return 0.0, float("nan")
    peaks, _ = find_peaks(y1, prominence=0.25 * amp)
    if len(peaks) < 3:
        return 0.0, float("nan")
    tail = peaks[-min(len(peaks), n_periods + 1):]
    period = float(np.mean(np.diff(t[tail])))
    lo = tail[0]
    amp = float(np.ptp(y1[lo:]))
    return amp, period


def hopf_sweep(p: CtrnnParams, w_f_values, x=None,
               crossing_tol: float = 1e-6) -> HopfSweep:
    """Continuation sweep of the cross-coupled pair over self-feedback values.

    For each w_f the fixed point is tracked by Newton (seeded from the
    previous solution), classified by its eigenvalues, and, above the
    crossing, the limit cycle is measured by long integration.  The critical
    w_f is located by bisection on the leading eigenvalue real part.
    """
    if p.n != 2:
        raise InvalidInputError("hopf analysis is defined for two neurons")
    x = np.zeros(p.n_inputs) if x is None else np.asarray(x, dtype=float)
    w_f_values = list(w_f_values)

    def solve_at(w_f, s_guess):
        pw = p.with_w_y(hopf_weights(w_f))
        try:
            return pw, newton_fixed_point(pw, x, s_guess)
        except ConvergenceError:
            return pw, _settle_to_fixed_point(pw, x, s_guess)

    points: list[HopfPoint] = []
    s_guess = p.b.copy()
    lead_re = []
    for w_f in w_f_values:
        pw, fp = solve_at(w_f, s_guess)
        s_guess = fp.s_star
        lead = float(np.max(fp.eigenvalues.real))
        lead_re.append(lead)
        oscillating = lead > 0.0
        amp, period = 0.0, float("nan")
        if oscillating:
            w_im = float(np.max(np.abs(fp.eigenvalues.imag)))
            hint = 2.0 * math.pi / w_im if w_im > 0 else 10.0 * float(np.max(p.tau))
            kick = fp.s_star + 1e-3 * (1.0 + np.arange(p.n))
            amp, period = measure_limit_cycle(pw, x, kick, hint)
            oscillating = amp > 0.0
        points.append(HopfPoint(w_f=w_f, fixed_point=fp,
                                oscillating=oscillating, amplitude=amp,
                                period=period))

    w_f_critical = None
    for i in range(len(w_f_values) - 1):
        if lead_re[i] < 0.0 <= lead_re[i + 1]:
            lo_w, hi_w = w_f_values[i], w_f_values[i + 1]
            s_c = points[i].fixed_point.s_star
            while hi_w - lo_w > crossing_tol:
                mid = 0.5 * (lo_w + hi_w)
                _, fp = solve_at(mid, s_c)
                s_c = fp.s_star
                if float(np.max(fp.eigenvalues.real)) < 0.0:
                    lo_w = mid
                else:
                    hi_w = mid
            w_f_critical = 0.5 * (lo_w + hi_w)
            break
    return HopfSweep(points=points, w_f_critical=w_f_critical)


@dataclass
class WtaResult:
    winner: int | None       # 0-based neuron index, None if tie/unsettled
    settled: bool
    s_final: np.ndarray
    y_final: np.ndarray
    trajectory: IntegrationResult
    diagnostics: dict = field(default_factory=dict)


def wta_analyze(p: CtrnnParams, x, s_init=None, t_max: float | None = None,
                settle_tol: float = 1e-9) -> WtaResult:
    """Integrate the mutual-inhibition pair to settling and report the winner.

    The winner is the neuron with the larger steady output.  A symmetric
    trajectory pinned to the diagonal is reported as a tie; sustained motion
    within t_max is reported as unsettled with diagnostics.
    """
    if p.n != 2:
        raise InvalidInputError("WTA analysis is defined for two neurons")
    if p.w_y[0, 1] >= 0.0 or p.w_y[1, 0] >= 0.0:
        raise InvalidParamsError("WTA coupling requires inhibitory off-diagonal weights")
    tau_max = float(np.max(p.tau))
    t_max = 300.0 * tau_max if t_max is None else t_max
    dt = float(np.min(p.tau)) / 40.0
    s = p.b.copy() if s_init is None else np.asarray(s_init, dtype=float)
    xv = np.asarray(x, dtype=float)

    chunks = []
    t_off = 0.0
    settled = False
    while t_off < t_max:
        span = min(20.0 * tau_max, t_max - t_off)
        res = integrate(p, xv, s, duration=span, dt=dt)
        chunks.append((t_off, res))
        s = res.s[-1]
        t_off += span
        ds = rhs(p, s, xv)
        if np.max(np.abs(ds)) * tau_max < settle_tol * (1.0 + np.max(np.abs(s))):
            settled = True
            break

    t_all = np.concatenate([c.t[:-1] + off for off, c in chunks[:-1]]
                           + [chunks[-1][1].t + chunks[-1][0]])
    s_all = np.concatenate([c.s[:-1] for _, c in chunks[:-1]]
                           + [chunks[-1][1].s])
    y_all = np.concatenate([c.y[:-1] for _, c in chunks[:-1]]
                           + [chunks[-1][1].y])
    traj = IntegrationResult(t=t_all, s=s_all, y=y_all)
    y_fin = y_all[-1]
    diag: dict = {}
    if not settled:
        tail = y_all[-max(2, len(y_all) // 5):]
        diag["tail_ptp"] = float(np.max(np.ptp(tail, axis=0)))
        return WtaResult(winner=None, settled=False, s_final=s_all[-1],
                         y_final=y_fin, trajectory=traj, diagnostics=diag)
    gap = float(y_fin[0] - y_fin[1])
    scale = max(p.sigma[0].alpha, p.sigma[1].alpha)
    if abs(gap) < 1e-6 * scale:
        diag["tie_gap"] = gap
        return WtaResult(winner=None, settled=True, s_final=s_all[-1],
                         y_final=y_fin, trajectory=traj, diagnostics=diag)
    return WtaResult(winner=0 if gap > 0 else 1, settled=True,
                     s_final=s_all[-1], y_final=y_fin, trajectory=traj,
                     diagnostics=diag)


@dataclass
class VectorField:
    y1: np.ndarray          # (n1,)
    y2: np.ndarray          # (n2,)
    dy1: np.ndarray         # (n1, n2), NaN where excluded
    dy2: np.ndarray
    excluded: int


def vector_field(p: CtrnnParams, y1_grid, y2_grid, x=None) -> VectorField:
    """Sample (dy1/dt, dy2/dt) on a rectangular grid in output space.

    Grid values outside the open sigmoid range of either neuron cannot be
    mapped back to a state and are excluded (NaN) and counted.
    """
    if p.n != 2:
        raise InvalidInputError("vector field is defined for two neurons")
    x = np.zeros(p.n_inputs) if x is None else np.asarray(x, dtype=float)
    y1_grid = np.asarray(y1_grid, dtype=float)
    y2_grid = np.asarray(y2_grid, dtype=float)
    dy1 = np.full((y1_grid.size, y2_grid.size), np.nan)
    dy2 = np.full_like(dy1, np.nan)
    excluded = 0
    eps = 1e-12
    for i, y1 in enumerate(y1_grid):
        for j, y2 in enumerate(y2_grid):
            ok = True
            for yv, sig in ((y1, p.sigma[0]), (y2, p.sigma[1])):
                if not (sig.gamma + eps < yv < sig.gamma + sig.alpha - eps):
                    ok = False
            if not ok:
                excluded += 1
                continue
            s = np.array([float(sigmoid_inverse(y1, p.sigma[0])),
                          float(sigmoid_inverse(y2, p.sigma[1]))])
            ds = rhs(p, s, x)
            dydt = p.activation_deriv(s) * ds
            dy1[i, j] = dydt[0]
            dy2[i, j] = dydt[1]
    return VectorField(y1=y1_grid, y2=y2_grid, dy1=dy1, dy2=dy2, excluded=excluded)
