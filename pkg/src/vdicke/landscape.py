"""Closed-system mean-field energy landscape and its extrema.

The classical energy per atom, as a function of the cavity amplitude
``alpha`` and the two atomic condensate amplitudes ``beta1``, ``beta2``
(all per sqrt(N), dimensionless), is

    e = omega |alpha|^2 + omega0 (|beta1|^2 + |beta2|^2) + sqrt(k) * W

with ``k = 1 - |beta1|^2 - |beta2|^2`` and the coupling combination

    W = lambda1 (conj(beta1) Ap + beta1 conj(Ap))
        + i lambda2 (conj(beta2) Am - beta2 conj(Am)),
    Ap = sin(phi) alpha + cos(phi) conj(alpha),
    Am = sin(phi) alpha - cos(phi) conj(alpha).

Eliminating (beta1, beta2) at fixed alpha (two branches of the equilibrium
conditions) gives the reduced landscape used for phase classification; the
superradiant extrema are available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, NotSuperradiant, UnphysicalState
from .params import ModelParams, derived_scalars

#: States with reference-level population below this are rejected as
#: unphysical (the Holstein-Primakoff expansion around |0> breaks down).
K_MIN = 1e-9


@dataclass(frozen=True)
class OrderParams:
    """Mean-field amplitudes of a closed- or open-system state."""

    alpha: complex
    beta1: complex
    beta2: complex

    @property
    def k(self) -> float:
        """Reference-level population 1 - |beta1|^2 - |beta2|^2."""
        return 1.0 - abs(self.beta1) ** 2 - abs(self.beta2) ** 2


def _coupling_terms(alpha: complex, beta1: complex, beta2: complex, p: ModelParams):
    s, c = math.sin(p.phi), math.cos(p.phi)
    ap = s * alpha + c * alpha.conjugate()
    am = s * alpha - c * alpha.conjugate()
    w = (p.lambda1 * (beta1.conjugate() * ap + beta1 * ap.conjugate())
         + 1j * p.lambda2 * (beta2.conjugate() * am - beta2 * am.conjugate()))
    return ap, am, w


def mean_field_energy(alpha: complex, beta1: complex, beta2: complex,
                      p: ModelParams) -> float:
    """Energy per atom of the product state labeled by (alpha, beta1, beta2)."""
    k = 1.0 - abs(beta1) ** 2 - abs(beta2) ** 2
    if k < 0:
        raise DomainError("|beta1|^2 + |beta2|^2 exceeds 1")
    _, _, w = _coupling_terms(alpha, beta1, beta2, p)
    return (p.omega * abs(alpha) ** 2
            + p.omega0 * (abs(beta1) ** 2 + abs(beta2) ** 2)
            + math.sqrt(k) * w.real)


def landscape_q(alpha: complex, p: ModelParams) -> float:
    """Quadratic coupling invariant q = 4 B (a^2 + conj(a)^2) + 4 L |a|^2."""
    d = derived_scalars(p)
    return (4.0 * d.b_param * (alpha ** 2 + alpha.conjugate() ** 2).real
            + 4.0 * d.l_param * abs(alpha) ** 2)


def me_landscape(alpha: complex, p: ModelParams) -> float:
    """Reduced mean-field landscape e(alpha), per atom, lower atomic branch.

    Obtained from the energy by exact elimination of (beta1, beta2); the
    additive constant is fixed so that e(0) = omega0 / 2.  Only differences
    of this function carry physical meaning.
    """
    q = landscape_q(alpha, p)
    if q + p.omega0 ** 2 <= 0:
        raise DomainError("q + omega0^2 must be positive")
    return (p.omega * abs(alpha) ** 2 + p.omega0
            - math.sqrt(q + p.omega0 ** 2) / 2.0)


def np_boundary_residual(p: ModelParams) -> float:
    """(2|B| + L)^2 - omega^2 omega0^2: negative inside NP, positive in SP."""
    d = derived_scalars(p)
    return (2.0 * abs(d.b_param) + d.l_param) ** 2 - (p.omega * p.omega0) ** 2


def sp_amplitude(p: ModelParams) -> float:
    """Superradiant cavity amplitude |<a>|/sqrt(N) beyond the boundary."""
    r = np_boundary_residual(p)
    if r < 0:
        raise NotSuperradiant("parameters lie inside the normal phase")
    d = derived_scalars(p)
    return math.sqrt(r / (4.0 * (2.0 * abs(d.b_param) + d.l_param) * p.omega ** 2))


def sp_candidate_alphas(p: ModelParams) -> list[complex]:
    """Stationary cavity amplitudes of the superradiant branches.

    Real pair for B > 0, imaginary pair for B < 0; for B = 0 the extremum is
    a U(1) family and the real representative (plus its sign partner) is
    returned.  Empty inside the normal phase.
    """
    if np_boundary_residual(p) < 0:
        return []
    a = sp_amplitude(p)
    if a == 0.0:
        return [0j]
    b = derived_scalars(p).b_param
    unit = 1j if b < 0 else 1.0 + 0j
    return [unit * a, -unit * a]


def order_params_branches(alpha: complex, p: ModelParams):
    """Closed-form (beta1, beta2) branches at stationary alpha.

    Returns the list of (OrderParams, k) for the lower (+) and upper (-)
    atomic branches; branches with unphysical k are dropped.  At alpha = 0
    only beta1 = beta2 = 0 survives.
    """
    s, c = math.sin(p.phi), math.cos(p.phi)
    if alpha == 0:
        return [(OrderParams(0j, 0j, 0j), 1.0)]
    q = landscape_q(alpha, p)
    sq = math.sqrt(q + p.omega0 ** 2)
    out = []
    for sign in (+1.0, -1.0):
        dd = (p.omega0 + sign * sq) / 2.0
        if dd == 0.0:
            continue
        k = dd * dd / (dd * dd + q / 4.0)
        if k < K_MIN:
            continue
        u = math.sqrt(k)
        b1 = -p.lambda1 * (c * alpha.conjugate() + s * alpha) * u / dd
        b2 = 1j * p.lambda2 * (c * alpha.conjugate() - s * alpha) * u / dd
        out.append((OrderParams(alpha, b1, b2), k))
    return out


def equilibrium_residuals(alpha: complex, beta1: complex, beta2: complex,
                          p: ModelParams) -> tuple[complex, complex]:
    """Gradient of the energy with respect to (conj(beta1), conj(beta2)).

    Both components vanish exactly at an atomic equilibrium; these are the
    four (real) equilibrium conditions in complex form.
    """
    k = 1.0 - abs(beta1) ** 2 - abs(beta2) ** 2
    if k <= 0:
        raise UnphysicalState("reference level depleted")
    u = math.sqrt(k)
    ap, am, w = _coupling_terms(alpha, beta1, beta2, p)
    g1 = p.omega0 * beta1 - beta1 * w / (2 * u) + u * p.lambda1 * ap
    g2 = p.omega0 * beta2 - beta2 * w / (2 * u) + u * 1j * p.lambda2 * am
    return g1, g2


def alpha_gradient(alpha: complex, beta1: complex, beta2: complex,
                   p: ModelParams) -> complex:
    """Gradient of the energy with respect to conj(alpha)."""
    k = 1.0 - abs(beta1) ** 2 - abs(beta2) ** 2
    if k <= 0:
        raise UnphysicalState("reference level depleted")
    s, c = math.sin(p.phi), math.cos(p.phi)
    w_ab = (p.lambda1 * (c * beta1.conjugate() + s * beta1)
            + 1j * p.lambda2 * (-c * beta2.conjugate() - s * beta2))
    return p.omega * alpha + math.sqrt(k) * w_ab


def solve_order_params(alpha: complex, p: ModelParams, tol: float = 1e-10,
                       max_restarts: int = 16, seed: int = 0) -> OrderParams:
    """Solve the atomic equilibrium conditions at stationary ``alpha``.

    Damped Newton on the four real residuals, warm-started from the
    closed-form lower branch and restarted from random |beta| <= 0.5 points;
    ties are broken by the lowest residual.  Raises :class:`NoConvergence`.
    """
    if alpha == 0:
        return OrderParams(0j, 0j, 0j)

    def residual_vec(x):
        b1 = x[0] + 1j * x[1]
        b2 = x[2] + 1j * x[3]
        if abs(b1) ** 2 + abs(b2) ** 2 >= 1.0 - K_MIN:
            return None
        g1, g2 = equilibrium_residuals(alpha, b1, b2, p)
        return np.array([g1.real, g1.imag, g2.real, g2.imag])

    def newton(x0):
        x = np.asarray(x0, dtype=float)
        f = residual_vec(x)
        if f is None:
            return None, math.inf
        for _ in range(80):
            fn = np.abs(f).max()
            if fn < tol:
                return x, fn
            jac = np.empty((4, 4))
            h = 1e-7
            for i in range(4):
                e = np.zeros(4)
                e[i] = h
                fp = residual_vec(x + e)
                fm = residual_vec(x - e)
                if fp is None or fm is None:
                    return None, math.inf
                jac[:, i] = (fp - fm) / (2 * h)
            try:
                dx = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                return None, math.inf
            lam = 1.0
            while lam > 1e-6:
                f_new = residual_vec(x + lam * dx)
                if f_new is not None and np.abs(f_new).max() < fn:
                    break
                lam /= 2
            else:
                return x, fn
            x = x + lam * dx
            f = f_new
        return x, np.abs(f).max()

    rng = np.random.default_rng(seed)
    starts = [np.array([b.beta1.real, b.beta1.imag, b.beta2.real, b.beta2.imag])
              for b, _ in order_params_branches(alpha, p)[:1]]
    for _ in range(max_restarts):
        v = rng.uniform(-0.5, 0.5, size=4)
        if v[0] ** 2 + v[1] ** 2 + v[2] ** 2 + v[3] ** 2 < 0.25:
            starts.append(v)
    best, best_res = None, math.inf
    for x0 in starts:
        x, res = newton(x0)
        if x is not None and res < best_res:
            best, best_res = x, res
        if best_res < tol:
            break
    if best is None or best_res >= tol:
        raise NoConvergence(f"equilibrium solve stalled at residual {best_res:.3e}")
    return OrderParams(alpha, best[0] + 1j * best[1], best[2] + 1j * best[3])


def minimize_landscape(p: ModelParams, n_starts: int = 12, seed: int = 1) -> complex:
    """Numerically minimize the reduced landscape over (Re alpha, Im alpha).

    Test oracle for the closed-form extrema; production classification uses
    the closed forms.
    """
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    f = lambda v: me_landscape(v[0] + 1j * v[1], p)
    best, best_val = 0j, me_landscape(0j, p)
    scale = 1.0 + sp_amplitude(p) if np_boundary_residual(p) >= 0 else 1.0
    for _ in range(n_starts):
        x0 = rng.uniform(-scale, scale, size=2)
        r = minimize(f, x0, method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if r.fun < best_val - 1e-15 or (best == 0j and r.fun <= best_val):
            best, best_val = r.x[0] + 1j * r.x[1], r.fun
    return best
