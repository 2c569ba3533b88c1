"""Mean-field equations of motion, attractor detection and state fidelity.

The dynamical variables are the intensive cavity amplitude ``alpha`` and
the Hermitian matrix of collective expectations ``lambda_exp[i, j]``
(= <L_ij>/N).  The atomic part evolves unitarily under the mean-field
single-atom Hamiltonian; dissipation enters only through the cavity:

    d alpha /dt = -(i omega + kappa) alpha
                  - i lambda1 (cos(phi) l10 + sin(phi) l01)
                  -   lambda2 (cos(phi) l20 + sin(phi) l02)
    d l /dt     = -i (l h^T - h^T l),   h = mean-field single-atom Hamiltonian.

All eleven real equations are generated from the collective-operator
commutation relations, so Hermiticity is structural (the integrator state
stores only independent real components) and the three SU(3) constraints
are conserved identically by the flow; their numerical drift is monitored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (BothCouplingsZero, ConstraintDriftExceeded, NotConverged,
                     StepSizeUnderflow, ValidationError)
from .opensteady import su3_constraint_residuals
from .params import ModelParams

_CHANNELS = ("re_alpha", "im_alpha", "l00", "l11", "l22", "re_l01", "im_l01",
             "re_l02", "im_l02", "re_l12", "im_l12", "abs_alpha")


@dataclass(frozen=True)
class MeanFieldODEState:
    """Intensive mean-field state (cavity amplitude + atomic expectations)."""

    alpha: complex
    lambda_exp: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_exp, dtype=complex)
        if lam.shape != (3, 3):
            raise ValidationError("lambda_exp must be 3x3")
        if np.abs(lam - lam.conj().T).max() > 1e-10 * max(1.0, np.abs(lam).max()):
            raise ValidationError("lambda_exp must be Hermitian")
        object.__setattr__(self, "lambda_exp", lam)
        object.__setattr__(self, "alpha", complex(self.alpha))

    # -- constructors -------------------------------------------------------

    @classmethod
    def normal_state(cls, cavity_seed: complex = 0.0) -> "MeanFieldODEState":
        lam = np.zeros((3, 3), dtype=complex)
        lam[0, 0] = 1.0
        return cls(alpha=cavity_seed, lambda_exp=lam)

    @classmethod
    def from_level_amplitudes(cls, c0: complex, c1: complex, c2: complex,
                              alpha: complex = 0.0) -> "MeanFieldODEState":
        c = np.array([c0, c1, c2], dtype=complex)
        n = np.linalg.norm(c)
        if n == 0:
            raise ValidationError("level amplitudes cannot all vanish")
        c = c / n
        return cls(alpha=alpha, lambda_exp=np.outer(c.conj(), c))

    @classmethod
    def inverted_state(cls, n1_frac: float, theta: float) -> "MeanFieldODEState":
        if not 0.0 <= n1_frac <= 1.0:
            raise ValidationError("n1_frac must lie in [0, 1]")
        return cls.from_level_amplitudes(
            0.0, math.sqrt(n1_frac),
            math.sqrt(1.0 - n1_frac) * complex(math.cos(theta), math.sin(theta)))

    # -- packing ------------------------------------------------------------

    def to_vector(self) -> np.ndarray:
        a, l = self.alpha, self.lambda_exp
        return np.array([a.real, a.imag, l[0, 0].real, l[1, 1].real, l[2, 2].real,
                         l[0, 1].real, l[0, 1].imag, l[0, 2].real, l[0, 2].imag,
                         l[1, 2].real, l[1, 2].imag])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "MeanFieldODEState":
        l = np.array([[y[2], y[5] + 1j * y[6], y[7] + 1j * y[8]],
                      [y[5] - 1j * y[6], y[3], y[9] + 1j * y[10]],
                      [y[7] - 1j * y[8], y[9] - 1j * y[10], y[4]]], dtype=complex)
        return cls(alpha=complex(y[0], y[1]), lambda_exp=l)

    def constraint_residuals(self) -> tuple[float, float, float]:
        return su3_constraint_residuals(self.lambda_exp)


def _rhs(t, y, w, w0, l1, l2, s, c, kappa):
    alpha = complex(y[0], y[1])
    ac = alpha.conjugate()
    l01 = complex(y[5], y[6])
    l02 = complex(y[7], y[8])
    l12 = complex(y[9], y[10])
    m1 = l1 * (s * alpha + c * ac)
    m2 = 1j * l2 * (s * alpha - c * ac)
    t1 = l01 * m1.conjugate()
    t2 = l02 * m2.conjugate()
    dl01 = -1j * (m1 * (y[2] - y[3]) - m2 * l12.conjugate() + w0 * l01)
    dl02 = -1j * (m2 * (y[2] - y[4]) - m1 * l12 + w0 * l02)
    dl12 = -1j * (m2 * l01.conjugate() - m1.conjugate() * l02)
    da = (-(1j * w + kappa) * alpha
          - 1j * l1 * (c * l01.conjugate() + s * l01)
          - l2 * (c * l02.conjugate() + s * l02))
    return np.array([da.real, da.imag,
                     2.0 * (t1.imag + t2.imag), -2.0 * t1.imag, -2.0 * t2.imag,
                     dl01.real, dl01.imag, dl02.real, dl02.imag,
                     dl12.real, dl12.imag])


def eom_rhs(state: MeanFieldODEState, p: ModelParams) -> MeanFieldODEState:
    """Time derivative of the mean-field state (same container type)."""
    dy = _rhs(0.0, state.to_vector(), p.omega, p.omega0, p.lambda1, p.lambda2,
              math.sin(p.phi), math.cos(p.phi), p.kappa)
    l = np.array([[dy[2], dy[5] + 1j * dy[6], dy[7] + 1j * dy[8]],
                  [dy[5] - 1j * dy[6], dy[3], dy[9] + 1j * dy[10]],
                  [dy[7] - 1j * dy[8], dy[9] - 1j * dy[10], dy[4]]], dtype=complex)
    out = MeanFieldODEState.__new__(MeanFieldODEState)
    object.__setattr__(out, "alpha", complex(dy[0], dy[1]))
    object.__setattr__(out, "lambda_exp", l)
    return out


def rhs_norm(state: MeanFieldODEState, p: ModelParams) -> float:
    """Max-norm of the packed time derivative; zero at fixed points."""
    dy = _rhs(0.0, state.to_vector(), p.omega, p.omega0, p.lambda1, p.lambda2,
              math.sin(p.phi), math.cos(p.phi), p.kappa)
    return float(np.abs(dy).max())


def energy_of_state(state: MeanFieldODEState, p: ModelParams) -> float:
    """Mean-field energy per atom; conserved along kappa = 0 trajectories."""
    s, c = math.sin(p.phi), math.cos(p.phi)
    a = state.alpha
    l = state.lambda_exp
    ap = s * a + c * a.conjugate()
    am = s * a - c * a.conjugate()
    coup = p.lambda1 * l[1, 0] * ap + 1j * p.lambda2 * l[2, 0] * am
    return (p.omega * abs(a) ** 2
            + p.omega0 * (l[1, 1].real + l[2, 2].real) + 2.0 * coup.real)


@dataclass(frozen=True)
class IntegrationControls:
    """Adaptive RK45 settings plus constraint-drift policy."""

    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = 0.1
    n_samples: int = 2001
    drift_limit: float | None = None   # hard cap on SU(3) residual drift


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the mean-field flow."""

    t: np.ndarray
    y: np.ndarray               # shape (11, len(t))
    params: ModelParams

    def state(self, index: int = -1) -> MeanFieldODEState:
        return MeanFieldODEState.from_vector(self.y[:, index])

    def alpha(self) -> np.ndarray:
        return self.y[0] + 1j * self.y[1]

    def channels(self) -> dict[str, np.ndarray]:
        out = {name: self.y[i] for i, name in enumerate(_CHANNELS[:11])}
        out["abs_alpha"] = np.abs(self.alpha())
        return out

    def constraint_residuals(self) -> np.ndarray:
        res = np.empty((3, len(self.t)))
        for i in range(len(self.t)):
            res[:, i] = su3_constraint_residuals(
                MeanFieldODEState.from_vector(self.y[:, i]).lambda_exp)
        return res

    def energy(self) -> np.ndarray:
        return np.array([energy_of_state(self.state(i), self.params)
                         for i in range(len(self.t))])


def integrate(state0: MeanFieldODEState, p: ModelParams, t_end: float,
              controls: IntegrationControls | None = None) -> Trajectory:
    """Integrate the mean-field flow with adaptive RK45.

    Hermiticity is structural (only independent real components evolve);
    SU(3) constraint drift is monitored and, when ``drift_limit`` is set,
    enforced.  ``t_end = 0`` returns the initial state only.
    """
    controls = controls or IntegrationControls()
    if t_end < 0:
        raise ValidationError("t_end must be nonnegative")
    y0 = state0.to_vector()
    if t_end == 0:
        return Trajectory(t=np.zeros(1), y=y0[:, None], params=p)
    t_eval = np.linspace(0.0, t_end, controls.n_samples)
    sol = solve_ivp(_rhs, (0.0, t_end), y0, method="RK45", t_eval=t_eval,
                    args=(p.omega, p.omega0, p.lambda1, p.lambda2,
                          math.sin(p.phi), math.cos(p.phi), p.kappa),
                    rtol=controls.rtol, atol=controls.atol,
                    max_step=controls.max_step)
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    traj = Trajectory(t=sol.t, y=sol.y, params=p)
    if controls.drift_limit is not None:
        start = np.array(su3_constraint_residuals(state0.lambda_exp))
        end = np.array(su3_constraint_residuals(traj.state().lambda_exp))
        drift = np.abs(end - start).max()
        if drift > controls.drift_limit:
            raise ConstraintDriftExceeded(f"constraint drift {drift:.3e}")
    return traj


# ---------------------------------------------------------------------------
# attractor detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttractorControls:
    """Windows and tolerances of the attractor classifier."""

    transient: float | None = None     # default max(20/kappa, 1000)
    window: float = 500.0
    fp_tol: float = 1e-6
    amplitude_floor: float = 1e-3
    period_rel_tol: float = 0.01
    amplitude_rel_tol: float = 0.05

    def resolved_transient(self, p: ModelParams) -> float:
        if self.transient is not None:
            return self.transient
        return max(20.0 / p.kappa, 1000.0) if p.kappa > 0 else 1000.0


@dataclass(frozen=True)
class AttractorReport:
    kind: str                          # "FixedPoint" | "LimitCycle" | "Unresolved"
    fixed_state: MeanFieldODEState | None = None
    period: float | None = None
    amplitude: float | None = None
    channel: str | None = None
    transient_time: float = 0.0


def _autocorr_period(sig: np.ndarray, dt: float):
    """Dominant period via the autocorrelation peak, parabolic-refined."""
    x = sig - sig.mean()
    n = len(x)
    if n < 16 or np.abs(x).max() == 0:
        return None
    ac = np.correlate(x, x, mode="full")[n - 1:]
    ac = ac / ac[0]
    # first sign change bounds the search away from the zero-lag peak
    neg = np.flatnonzero(ac < 0)
    if len(neg) == 0:
        return None
    k_min = neg[0]
    k_max = n - 2
    if k_max <= k_min + 1:
        return None
    k = k_min + int(np.argmax(ac[k_min:k_max]))
    if ac[k] < 0.2:
        return None
    if 0 < k < len(ac) - 1:
        y0, y1, y2 = ac[k - 1], ac[k], ac[k + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        return (k + shift) * dt
    return k * dt


def detect_attractor(traj: Trajectory,
                     controls: AttractorControls | None = None) -> AttractorReport:
    """Classify the trajectory endpoint as fixed point, limit cycle or neither.

    The last two analysis windows (after the transient) must exist; a fixed
    point requires every channel to be static within ``fp_tol``; a limit
    cycle requires a persistent oscillation above ``amplitude_floor`` with
    period and amplitude stable across the two windows.  Anything else is
    reported Unresolved, never coerced.
    """
    controls = controls or AttractorControls()
    transient = controls.resolved_transient(traj.params)
    t = traj.t
    if t[-1] < transient + 2 * controls.window:
        raise ValidationError("trajectory shorter than transient + 2 windows")
    w2 = t >= t[-1] - controls.window
    w1 = (t >= t[-1] - 2 * controls.window) & ~w2
    dt = t[1] - t[0]

    channels = traj.channels()
    # fixed point: all channels static over both windows
    both = w1 | w2
    is_fp = True
    for name in _CHANNELS:
        seg = channels[name][both]
        scale = max(1.0, np.abs(seg).max())
        if np.ptp(seg) > controls.fp_tol * scale:
            is_fp = False
            break
    if is_fp:
        mean_vec = traj.y[:, w2].mean(axis=1)
        return AttractorReport(kind="FixedPoint",
                               fixed_state=MeanFieldODEState.from_vector(mean_vec),
                               transient_time=transient)

    # limit cycle: pick the channel with the strongest persistent oscillation
    best = None
    for name in _CHANNELS:
        a1 = np.ptp(channels[name][w1]) / 2.0
        a2 = np.ptp(channels[name][w2]) / 2.0
        score = min(a1, a2)
        if best is None or score > best[1]:
            best = (name, score, a1, a2)
    name, score, a1, a2 = best
    rel_floor = controls.amplitude_floor * max(1.0, np.abs(channels[name][both]).max())
    if score > rel_floor and abs(a1 - a2) <= controls.amplitude_rel_tol * max(a1, a2):
        t1_period = _autocorr_period(channels[name][w1], dt)
        t2_period = _autocorr_period(channels[name][w2], dt)
        if t1_period and t2_period and t2_period < controls.window / 2:
            if abs(t1_period - t2_period) <= controls.period_rel_tol * t2_period:
                return AttractorReport(kind="LimitCycle", period=float(t2_period),
                                       amplitude=float(a2), channel=name,
                                       transient_time=transient)
    return AttractorReport(kind="Unresolved", transient_time=transient)


def run_to_attractor(p: ModelParams, state0: MeanFieldODEState | None = None,
                     controls: IntegrationControls | None = None,
                     attractor: AttractorControls | None = None,
                     max_time: float = 2e4):
    """Integrate (extending as needed) until the attractor is resolved.

    Returns (report, trajectory-of-last-chunk).  The state is continued
    across chunks; detection on later chunks uses a short local transient
    since the global one has already elapsed.
    """
    controls = controls or IntegrationControls()
    attractor = attractor or AttractorControls()
    transient = attractor.resolved_transient(p)
    state = state0 if state0 is not None else MeanFieldODEState.normal_state(0.01)
    t_chunk = transient + 2.2 * attractor.window
    traj = integrate(state, p, t_chunk, controls)
    report = detect_attractor(traj, attractor)
    elapsed = t_chunk
    local = replace(attractor, transient=0.2 * attractor.window)
    while report.kind == "Unresolved" and elapsed < max_time:
        t_chunk = min(max(2.5 * attractor.window, transient), max_time - elapsed)
        if t_chunk < 2.2 * attractor.window:
            break
        traj = integrate(traj.state(), p, t_chunk, controls)
        report = detect_attractor(traj, local)
        elapsed += t_chunk
    return report, traj


# ---------------------------------------------------------------------------
# dark state and fidelity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetState:
    """Inverted target state |d> = i sin(nu)|1> + cos(nu)|2> per atom."""

    nu: float
    single_atom_density: np.ndarray
    n1_frac: float
    theta: float


def dark_state(p: ModelParams) -> TargetState:
    """Cavity-decoupled inverted state of the model, tan(nu) = lambda2/lambda1."""
    if p.lambda1 == 0 and p.lambda2 == 0:
        raise BothCouplingsZero("dark state undefined at lambda1 = lambda2 = 0")
    nu = math.atan2(p.lambda2, p.lambda1)
    c = np.array([0.0, 1j * math.sin(nu), math.cos(nu)], dtype=complex)
    rho = np.outer(c, c.conj())
    # phase of <L_12> = conj(c1) c2 is -pi/2 by the i factor in |d>
    return TargetState(nu=nu, single_atom_density=rho,
                       n1_frac=math.sin(nu) ** 2, theta=1.5 * math.pi)


def fidelity(steady: MeanFieldODEState, target: TargetState,
             many_body: bool = False, n_atoms: float = 1.0) -> float:
    """Overlap Tr(rho_s rho_d) of single-atom density matrices.

    ``many_body=True`` returns the N-fold product-state overlap (the
    single-atom value raised to ``n_atoms``).
    """
    rho_s = steady.lambda_exp.T
    f = float(np.trace(rho_s @ target.single_atom_density).real)
    f = min(max(f, 0.0), 1.0)
    return f ** n_atoms if many_body else f


def run_fidelity(p: ModelParams, target: TargetState | None = None,
                 cavity_seed: complex = 0.01,
                 controls: IntegrationControls | None = None,
                 attractor: AttractorControls | None = None,
                 max_time: float = 6e4) -> tuple[float, AttractorReport]:
    """Steady-state preparation fidelity from the standard initial condition.

    Integrates the normal state with a small cavity seed to its attractor
    and evaluates the overlap with ``target`` (the dark state by default).
    Raises :class:`NotConverged` if no fixed point is reached in budget.
    """
    target = target or dark_state(p)
    report, _ = run_to_attractor(p, MeanFieldODEState.normal_state(cavity_seed),
                                 controls, attractor, max_time)
    if report.kind != "FixedPoint":
        raise NotConverged(f"attractor is {report.kind}, not a fixed point")
    return fidelity(report.fixed_state, target), report


def os_probe(p: ModelParams, max_time: float = 4000.0) -> str:
    """Attractor kind from the standard seeded normal state (sweep helper)."""
    report, _ = run_to_attractor(p, max_time=max_time)
    return report.kind
