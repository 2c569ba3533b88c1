"""Open-system steady states, rapidity stability and the inverted region.

Stability of a steady state is read off the Liouvillian shape matrix of the
quadratic fluctuation problem.  With the (H, K) normalization of
:mod:`vdicke.fluctuations` and a cavity-only bath of amplitude decay rate
``kappa``, the shape matrix is

    chi = 1/2 [[ i H + M, 2 i conj(K)], [-2 i K, -i conj(H) + M]],
    M = diag(kappa, 0, ..., 0),

whose eigenvalues (rapidities) equal minus one half of the eigenvalues of
the linearized mean-field flow: a steady state is stable iff
``min Re zeta >= 0``.  This assembly is pinned against the numerical
Jacobian of the full equations of motion in the test suite.

Superradiant fixed points are found from the self-consistency of the
effective atomic fields (M1, M2): the atoms must sit in an eigenstate of
the mean-field single-atom Hamiltonian while the cavity amplitude is slaved
to the resulting coherences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EigensolverFailure, UnphysicalState
from .fluctuations import QuadraticForm, Sector, build_inverted_form, build_ns_form
from .landscape import K_MIN, OrderParams
from .params import ModelParams, OMEGA_SIGN_CONVENTION, derived_scalars

RAPIDITY_TOL = 1e-8

_PAIRS = ((0, 1), (1, 2), (2, 0))
_TRIPLETS = (((0, 1), 2), ((1, 2), 0), ((2, 0), 1))


def su3_constraint_residuals(lam: np.ndarray) -> tuple[float, float, float]:
    """Residuals of the three collective-spin constraints, per N, N^2, N^3.

    Zero (to rounding) exactly on the manifold of symmetric product states;
    conserved along mean-field trajectories.
    """
    l = np.asarray(lam, dtype=complex)
    d = l.diagonal().real
    r1 = d.sum() - 1.0
    r2 = (d ** 2).sum() - 1.0
    for i, j in _PAIRS:
        r2 += 3.0 * abs(l[i, j]) ** 2 - d[i] * d[j]
    s3 = 0.0
    prod = 1.0
    for (i, j), k in _TRIPLETS:
        t = d[i] + d[j] - 2.0 * d[k]
        s3 += abs(l[i, j]) ** 2 * t
        prod *= t
    r3 = 4.5 * s3 - 0.5 * prod + 27.0 * abs(l[0, 1] * l[1, 2] * l[2, 0]) - 1.0
    return float(r1), float(r2), float(r3)


# ---------------------------------------------------------------------------
# shape matrix and rapidities
# ---------------------------------------------------------------------------

def shape_matrix(q: QuadraticForm, kappa: float) -> np.ndarray:
    """Shape matrix of the quadratic Liouvillian built on the form ``q``."""
    n = q.n_modes
    m = np.zeros((n, n))
    m[0, 0] = kappa
    h = q.h_matrix
    k = q.k_matrix
    return 0.5 * np.block([[1j * h + m, 2j * k.conj()],
                           [-2j * k, -1j * h.conj() + m]])


@dataclass(frozen=True)
class RapiditySet:
    """Rapidities of a steady state; stability requires min Re zeta >= 0."""

    zetas: np.ndarray
    min_real: float

    def is_stable(self, tol: float = RAPIDITY_TOL) -> bool:
        return self.min_real >= -tol

    def is_marginal(self, tol: float = RAPIDITY_TOL) -> bool:
        return abs(self.min_real) < tol


def rapidities(chi: np.ndarray) -> RapiditySet:
    """Eigenvalues of the shape matrix, sorted by (Re, Im)."""
    chi = np.asarray(chi, dtype=complex)
    if chi.ndim != 2 or chi.shape[0] != chi.shape[1]:
        raise ValueError("shape matrix must be square")
    try:
        z = np.linalg.eigvals(chi)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverFailure(str(exc)) from exc
    z = z[np.lexsort((z.imag, z.real))]
    return RapiditySet(zetas=z, min_real=float(z.real.min()))


def state_rapidities(p: ModelParams, op: OrderParams) -> RapiditySet:
    """Rapidities of the normal/superradiant state with amplitudes ``op``."""
    return rapidities(shape_matrix(build_ns_form(p, op), p.kappa))


def np_rapidities(p: ModelParams) -> RapiditySet:
    return state_rapidities(p, OrderParams(0j, 0j, 0j))


# ---------------------------------------------------------------------------
# superradiant fixed points
# ---------------------------------------------------------------------------

def effective_fields(alpha: complex, p: ModelParams) -> tuple[complex, complex]:
    """Atomic drive fields (M1, M2) generated by cavity amplitude ``alpha``."""
    s, c = math.sin(p.phi), math.cos(p.phi)
    m1 = p.lambda1 * (s * alpha + c * alpha.conjugate())
    m2 = 1j * p.lambda2 * (s * alpha - c * alpha.conjugate())
    return m1, m2


def steady_cavity(lam: np.ndarray, p: ModelParams) -> complex:
    """Cavity amplitude slaved to the atomic coherences at steadiness."""
    s, c = math.sin(p.phi), math.cos(p.phi)
    num = (-1j * p.lambda1 * (c * lam[1, 0] + s * lam[0, 1])
           - p.lambda2 * (c * lam[2, 0] + s * lam[0, 2]))
    return complex(num / (1j * p.omega + p.kappa))


def single_atom_hamiltonian(m1: complex, m2: complex, omega0: float) -> np.ndarray:
    """Mean-field single-atom Hamiltonian in the (|0>, |1>, |2>) basis."""
    return np.array([[0.0, m1.conjugate(), m2.conjugate()],
                     [m1, omega0, 0.0],
                     [m2, 0.0, omega0]], dtype=complex)


@dataclass(frozen=True)
class SteadyAtomicState:
    """One steady state: expectations, slaved cavity, effective fields."""

    lambda_exp: np.ndarray
    cavity_alpha: complex
    m1: complex
    m2: complex
    branch: int = -1            # atomic eigenbranch: 0 ground, 2 excited, -1 NP
    z2_multiplicity: int = 1    # 2 when the sign-flipped partner was merged

    @property
    def is_np(self) -> bool:
        return abs(self.m1) < 1e-12 and abs(self.m2) < 1e-12

    def constraint_residuals(self) -> tuple[float, float, float]:
        return su3_constraint_residuals(self.lambda_exp)

    def order_params(self) -> OrderParams:
        """Holstein-Primakoff amplitudes (gauge: real lowest-level amplitude)."""
        k = float(self.lambda_exp[0, 0].real)
        if k < K_MIN:
            raise UnphysicalState("lowest level unpopulated; not an NS-sector state")
        u = math.sqrt(k)
        return OrderParams(self.cavity_alpha,
                           complex(self.lambda_exp[0, 1]) / u,
                           complex(self.lambda_exp[0, 2]) / u)

    def rapidities(self, p: ModelParams) -> RapiditySet:
        return state_rapidities(p, self.order_params())


def _batched_map(x: np.ndarray, p: ModelParams, branch: int) -> np.ndarray:
    """One pass of the self-consistency map on a (B, 4) batch of (M1, M2)."""
    m1 = x[:, 0] + 1j * x[:, 1]
    m2 = x[:, 2] + 1j * x[:, 3]
    b = x.shape[0]
    h = np.zeros((b, 3, 3), dtype=complex)
    h[:, 0, 1] = m1.conj()
    h[:, 0, 2] = m2.conj()
    h[:, 1, 0] = m1
    h[:, 2, 0] = m2
    h[:, 1, 1] = p.omega0
    h[:, 2, 2] = p.omega0
    _, vecs = np.linalg.eigh(h)
    cvec = vecs[:, :, branch]
    c0 = cvec[:, 0]
    phase = np.where(np.abs(c0) > 1e-13, np.exp(-1j * np.angle(c0)), 1.0)
    cvec = cvec * phase[:, None]
    lam = cvec.conj()[:, :, None] * cvec[:, None, :]
    s, c = math.sin(p.phi), math.cos(p.phi)
    num = (-1j * p.lambda1 * (c * lam[:, 1, 0] + s * lam[:, 0, 1])
           - p.lambda2 * (c * lam[:, 2, 0] + s * lam[:, 0, 2]))
    alpha = num / (1j * p.omega + p.kappa)
    m1n = p.lambda1 * (s * alpha + c * alpha.conj())
    m2n = 1j * p.lambda2 * (s * alpha - c * alpha.conj())
    return np.stack([m1n.real, m1n.imag, m2n.real, m2n.imag], axis=1)


def _default_seeds(scale: float = 2.0, n: int = 5) -> np.ndarray:
    g = np.linspace(-scale, scale, n)
    a, b, c, d = np.meshgrid(g, g, g, g, indexing="ij")
    return np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)


def _closed_warm_starts(p: ModelParams) -> list[np.ndarray]:
    from .landscape import order_params_branches, sp_candidate_alphas

    starts = []
    for alpha in sp_candidate_alphas(p):
        for op, _ in order_params_branches(alpha, p):
            m1, m2 = effective_fields(op.alpha, p)
            starts.append(np.array([m1.real, m1.imag, m2.real, m2.imag]))
    return starts


def solve_sp_steady(p: ModelParams, seeds: np.ndarray | None = None,
                    branches=(0, 2), tol: float = 1e-12,
                    dedup_tol: float = 1e-8, max_iter: int = 60) -> list[SteadyAtomicState]:
    """All distinct fixed points of the (M1, M2) self-consistency equations.

    Batched damped Newton from a deterministic seed lattice plus the
    closed-system superradiant warm starts; the trivial M = 0 (normal) state
    is always included.  Sign-flipped partners (M -> -M) are merged into one
    record with ``z2_multiplicity = 2``.  Per-seed failures are dropped, not
    raised.
    """
    if seeds is None:
        seeds = _default_seeds()
    warm = _closed_warm_starts(p)
    if warm:
        seeds = np.vstack([seeds, np.asarray(warm)])

    solutions = []
    for branch in branches:
        x = np.array(seeds, dtype=float)
        fval = x - _batched_map(x, p, branch)
        active = np.ones(len(x), dtype=bool)
        for _ in range(max_iter):
            fn = np.abs(fval).max(axis=1)
            active &= fn > tol
            if not active.any():
                break
            idx = np.flatnonzero(active)
            xa = x[idx]
            fa = fval[idx]
            # finite-difference Jacobian of F(x) = x - map(x), batched
            eye = np.eye(4)
            jac = np.empty((len(idx), 4, 4))
            for col in range(4):
                e = 1e-7 * eye[col]
                fp = (xa + e) - _batched_map(xa + e, p, branch)
                fm = (xa - e) - _batched_map(xa - e, p, branch)
                jac[:, :, col] = (fp - fm) / 2e-7
            try:
                dx = np.linalg.solve(jac, -fa[:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                # singular element somewhere in the batch: regularize weakly
                dx = np.linalg.solve(jac + 1e-10 * np.eye(4), -fa[:, :, None])[:, :, 0]
            lam = np.ones(len(idx))
            fn_a = np.abs(fa).max(axis=1)
            improved = np.zeros(len(idx), dtype=bool)
            xa_new = xa.copy()
            fa_new = fa.copy()
            for _ in range(20):
                trial = xa + lam[:, None] * dx
                ftrial = trial - _batched_map(trial, p, branch)
                better = (np.abs(ftrial).max(axis=1) < fn_a) & ~improved
                xa_new[better] = trial[better]
                fa_new[better] = ftrial[better]
                improved |= better
                if improved.all():
                    break
                lam = np.where(improved, lam, lam / 2)
            stalled = ~improved
            x[idx] = xa_new
            fval[idx] = fa_new
            if stalled.any():
                active[idx[stalled]] = False
        converged = np.abs(fval).max(axis=1) <= tol
        for xc in x[converged]:
            solutions.append((xc, branch))

    # deduplicate, fold M -> -M partners
    kept: list[tuple[np.ndarray, int, int]] = []
    for xc, branch in solutions:
        merged = False
        for i, (xk, bk, mult) in enumerate(kept):
            if bk != branch:
                continue
            if np.abs(xk - xc).max() < dedup_tol:
                merged = True
                break
            if np.abs(xk + xc).max() < dedup_tol:
                kept[i] = (xk, bk, 2)
                merged = True
                break
        if not merged:
            kept.append((xc, branch, 1))

    out = []
    have_np = False
    for xc, branch, mult in kept:
        m1 = complex(xc[0], xc[1])
        m2 = complex(xc[2], xc[3])
        if abs(m1) < dedup_tol and abs(m2) < dedup_tol:
            if have_np:
                continue
            have_np = True
            lam = np.zeros((3, 3), dtype=complex)
            lam[0, 0] = 1.0
            out.append(SteadyAtomicState(lambda_exp=lam, cavity_alpha=0j,
                                         m1=0j, m2=0j, branch=-1))
            continue
        h = single_atom_hamiltonian(m1, m2, p.omega0)
        _, vecs = np.linalg.eigh(h)
        cvec = vecs[:, branch]
        if abs(cvec[0]) > 1e-13:
            cvec = cvec * np.exp(-1j * np.angle(cvec[0]))
        lam = np.outer(cvec.conj(), cvec)
        out.append(SteadyAtomicState(lambda_exp=lam, cavity_alpha=steady_cavity(lam, p),
                                     m1=m1, m2=m2, branch=branch,
                                     z2_multiplicity=mult))
    if not have_np:
        lam = np.zeros((3, 3), dtype=complex)
        lam[0, 0] = 1.0
        out.insert(0, SteadyAtomicState(lambda_exp=lam, cavity_alpha=0j,
                                        m1=0j, m2=0j, branch=-1))
    return out


# ---------------------------------------------------------------------------
# inverted-state stability region
# ---------------------------------------------------------------------------

def _inverted_flow_matrices(p: ModelParams, n1: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Batched linear-flow matrices A (..., 4, 4) of the inverted sector."""
    n1 = np.asarray(n1, dtype=float)
    theta = np.asarray(theta, dtype=float)
    eta1 = np.sqrt(n1) * p.lambda1
    eta2 = p.lambda2 * np.sqrt(1.0 - n1)
    s, c = math.sin(p.phi), math.cos(p.phi)
    ph = np.exp(-1j * theta)
    h01 = c * (eta1 - 1j * eta2 * ph)
    koff = 0.5 * s * (eta1 + 1j * eta2 * ph)
    shape = np.broadcast(n1, theta).shape
    a = np.zeros(shape + (4, 4), dtype=complex)
    w, w0, kp = p.omega, p.omega0, p.kappa
    a[..., 0, 0] = -1j * w - kp
    a[..., 0, 1] = -1j * h01
    a[..., 0, 3] = -2j * koff.conj()
    a[..., 1, 0] = -1j * h01.conj()
    a[..., 1, 1] = 1j * w0
    a[..., 1, 2] = -2j * koff.conj()
    a[..., 2, 1] = 2j * koff
    a[..., 2, 2] = 1j * w - kp
    a[..., 2, 3] = 1j * h01.conj()
    a[..., 3, 0] = 2j * koff
    a[..., 3, 2] = 1j * h01
    a[..., 3, 3] = -1j * w0
    return a


def inverted_min_real(p: ModelParams, n1, theta) -> np.ndarray:
    """min Re zeta of the inverted state(s); broadcast over (n1, theta)."""
    a = _inverted_flow_matrices(p, n1, theta)
    ev = np.linalg.eigvals(a)
    return -ev.real.max(axis=-1) / 2.0


def inverted_rapidities(p: ModelParams, n1_frac: float, theta: float) -> RapiditySet:
    return rapidities(shape_matrix(build_inverted_form(p, n1_frac, theta), p.kappa))


def analytic_inverted_area(p: ModelParams, omega_scaled: float | None = None) -> float:
    """Closed-form area (per atom) of the stable inverted region."""
    if omega_scaled is None:
        omega_scaled = derived_scalars(p).omega_scaled
    l1s, l2s = p.lambda1 ** 2, p.lambda2 ** 2
    den = math.sqrt(omega_scaled ** 2 * (l1s - l2s) ** 2 + 4 * l1s * l2s)
    if den == 0.0:
        return 0.0 if omega_scaled >= 0 else 2.0 * math.pi
    return math.pi * (1.0 - omega_scaled * (l1s + l2s) / den)


@dataclass(frozen=True)
class InvertedRegion:
    """Numerically classified stability region in the (theta, N1/N) plane."""

    boundary_samples: list
    area: float                 # per atom, in [0, 2*pi]
    area_extensive: float       # times n_atoms
    omega_used: float
    analytic_area: float        # with the resolved sign convention
    analytic_area_flipped: float
    matched_convention: str
    stable_fraction: float


def inverted_region(p: ModelParams, n_theta: int = 64, n_n1: int = 64,
                    tol: float = RAPIDITY_TOL, refine_iters: int = 40) -> InvertedRegion:
    """Map the stable inverted region and measure its area.

    Every grid point is classified by its rapidities; arc boundaries are
    then refined by bisection along theta within each N1 row, making the
    area accurate to the row discretization rather than the cell size.
    """
    if n_theta < 32 or n_n1 < 32:
        raise ValueError("grid resolution must be at least 32x32")
    thetas = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    n1s = (np.arange(n_n1) + 0.5) / n_n1
    mr = inverted_min_real(p, n1s[:, None], thetas[None, :])
    stable = mr >= -tol

    # refine each stability transition along theta by bisection
    edges = []  # (row, theta_lo, theta_hi, stable_lo)
    for i in range(n_n1):
        row = stable[i]
        for j in range(n_theta):
            jn = (j + 1) % n_theta
            if row[j] != row[jn]:
                tlo = thetas[j]
                thi = thetas[jn] if jn != 0 else thetas[0] + 2 * math.pi
                edges.append((i, tlo, thi, row[j]))
    crossings: dict[int, list[tuple[float, bool]]] = {}
    if edges:
        rows = np.array([e[0] for e in edges])
        lo = np.array([e[1] for e in edges])
        hi = np.array([e[2] for e in edges])
        stable_lo = np.array([e[3] for e in edges])
        for _ in range(refine_iters):
            mid = 0.5 * (lo + hi)
            smid = inverted_min_real(p, n1s[rows], mid % (2 * math.pi)) >= -tol
            same = smid == stable_lo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        mid = 0.5 * (lo + hi)
        for r, m, sl in zip(rows, mid, stable_lo):
            crossings.setdefault(int(r), []).append((float(m % (2 * math.pi)), bool(sl)))

    area = 0.0
    boundary = []
    dtheta = 2 * math.pi / n_theta
    for i in range(n_n1):
        row = stable[i]
        cr = sorted(crossings.get(i, []))
        if not cr:
            measure = 2 * math.pi if row.all() else 0.0
        else:
            # start from the coarse measure, then correct each edge:
            measure = row.sum() * dtheta
            for theta_star, stable_left in cr:
                # grid cell centers straddling theta_star: the fraction of the
                # half-open edge cell assigned to the stable side
                j = int(theta_star / dtheta - 0.5) % n_theta
                cell_left = thetas[j]
                frac = (theta_star - cell_left) / dtheta
                frac = min(max(frac, 0.0), 1.0)
                measure += (frac - 0.5) * dtheta if stable_left else (0.5 - frac) * dtheta
                boundary.append((theta_star, float(n1s[i])))
        area += measure / n_n1

    d = derived_scalars(p)
    a_res = analytic_inverted_area(p, d.omega_scaled)
    a_flip = analytic_inverted_area(p, -d.omega_scaled)
    matched = OMEGA_SIGN_CONVENTION if abs(area - a_res) <= abs(area - a_flip) else "literal"
    boundary.sort(key=lambda t: (t[1], t[0]))
    return InvertedRegion(boundary_samples=boundary, area=area,
                          area_extensive=area * p.n_atoms,
                          omega_used=d.omega_scaled,
                          analytic_area=a_res, analytic_area_flipped=a_flip,
                          matched_convention=matched,
                          stable_fraction=float(stable.mean()))


# ---------------------------------------------------------------------------
# point classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OpenPhasePoint:
    """Stability record of one open-system parameter point."""

    np_rapidities: RapiditySet
    np_stable: bool
    sp_states: list = field(default_factory=list)     # (state, RapiditySet)
    sp_stable: bool = False
    inverted_area: float = 0.0
    oscillatory: str | None = None   # None / "LimitCycle" / "Unresolved"

    @property
    def needs_dynamics(self) -> bool:
        return not (self.np_stable or self.sp_stable)

    def stable_sp_order_parameter(self) -> float:
        """Largest |<L_01>|/N among the stable superradiant fixed points."""
        best = 0.0
        for state, rap in self.sp_states:
            if rap.is_stable() and not state.is_np:
                best = max(best, abs(state.lambda_exp[0, 1]))
        return best


def classify_open(p: ModelParams, seeds: np.ndarray | None = None,
                  tol: float = RAPIDITY_TOL) -> OpenPhasePoint:
    """Rapidity-classify the normal and superradiant states at one point.

    Oscillatory (limit-cycle) attractors cannot be inferred from rapidities
    and are left to the dynamics layer; ``needs_dynamics`` flags the points
    where neither fixed-point family is stable.
    """
    nrap = np_rapidities(p)
    sp_states = []
    sp_stable = False
    for state in solve_sp_steady(p, seeds=seeds):
        if state.is_np:
            continue
        try:
            rap = state.rapidities(p)
        except UnphysicalState:
            continue
        sp_states.append((state, rap))
        sp_stable = sp_stable or rap.is_stable(tol)
    return OpenPhasePoint(np_rapidities=nrap,
                          np_stable=nrap.is_stable(tol),
                          sp_states=sp_states, sp_stable=sp_stable,
                          inverted_area=analytic_inverted_area(p))


def open_row(p: ModelParams, seeds: np.ndarray | None = None,
             tol: float = RAPIDITY_TOL, os_detector=None) -> dict:
    """Flat per-point record used by sweeps and the CLI dataset writer."""
    point = classify_open(p, seeds=seeds, tol=tol)
    labels = []
    if point.np_stable:
        labels.append("NP")
    if point.sp_stable:
        labels.append("SP")
    if point.inverted_area > 0:
        labels.append("INV")
    os_kind = None
    if point.needs_dynamics and os_detector is not None:
        os_kind = os_detector(p)
        if os_kind == "LimitCycle":
            labels.append("OS")
    best_alpha = 0j
    best_l01 = 0.0
    for state, rap in point.sp_states:
        if rap.is_stable(tol) and abs(state.lambda_exp[0, 1]) > best_l01:
            best_l01 = abs(state.lambda_exp[0, 1])
            best_alpha = state.cavity_alpha
    return {
        "phases": "|".join(labels),
        "np_min_re_zeta": point.np_rapidities.min_real,
        "np_stable": int(point.np_stable),
        "sp_stable": int(point.sp_stable),
        "sp_count": len(point.sp_states),
        "sp_l01_abs": best_l01,
        "sp_alpha_re": best_alpha.real,
        "sp_alpha_im": best_alpha.imag,
        "inverted_area": point.inverted_area,
        "os_kind": os_kind or "",
    }


def sweep_open(grid, p_base: ModelParams, workers: int = 0,
               meta: dict | None = None, os_detector=None):
    """Open-system stability sweep; limit-cycle probing via ``os_detector``."""
    import functools

    from .datasets import run_sweep

    fn = functools.partial(open_row, os_detector=os_detector) if os_detector \
        else open_row
    return run_sweep(fn, grid, p_base, workers=workers, meta=meta)
