"""Closed-system spectra and phase classification.

The excitation spectrum of a quadratic form follows from the dynamical
(Hopfield-Bogoliubov) matrix

    D = [[ H, 2 conj(K)], [-2 K, -conj(H)]]

acting on (a, adag); its eigenvalues come in (w, -conj(w)) pairs and are the
normal-mode frequencies.  A mean-field state is stable exactly when its
spectrum is entirely real.  The symplectic norm  v^dag I_z v  of an
eigenvector (I_z = diag(+1,...,-1,...)) distinguishes particlelike from
holelike modes; the lowest pair swaps norm signs when the empty-cavity state
turns from ground-state-like (NP) into the excited normal phase (e-NP).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EigensolverFailure, UnphysicalState
from .fluctuations import QuadraticForm, build_ns_form
from .landscape import (OrderParams, mean_field_energy, np_boundary_residual,
                        order_params_branches, sp_candidate_alphas)
from .params import ModelParams, derived_scalars

REALNESS_TOL = 1e-8


class Phase(Enum):
    NP = "NP"
    SP1 = "SP1"
    SP2 = "SP2"
    ENP = "eNP"


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenfrequencies and per-mode symplectic norm signs of a form."""

    frequencies: np.ndarray       # 2n complex, sorted by (Re, Im)
    symplectic_norms: np.ndarray  # 2n floats in {-1, 0, +1}
    is_real: bool

    @property
    def max_abs_imag(self) -> float:
        return float(np.abs(self.frequencies.imag).max())


def hb_matrix(q: QuadraticForm) -> np.ndarray:
    """Dynamical matrix of the quadratic form in the (a, adag) basis."""
    h = q.h_matrix
    k = q.k_matrix
    return np.block([[h, 2 * k.conj()], [-2 * k, -h.conj()]])


def hb_spectrum(q: QuadraticForm, tol: float = REALNESS_TOL) -> SpectrumResult:
    """Diagonalize the dynamical matrix and attach symplectic norm signs.

    Norms are normalized to +-1 (0 for symplectically null vectors, which
    occur for complex-frequency pairs).
    """
    d = hb_matrix(q)
    try:
        freqs, vecs = np.linalg.eig(d)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails
        raise EigensolverFailure(str(exc)) from exc
    n = q.n_modes
    iz = np.concatenate([np.ones(n), -np.ones(n)])
    raw = np.einsum("ij,i,ij->j", vecs.conj(), iz, vecs).real
    norm2 = np.einsum("ij,ij->j", vecs.conj(), vecs).real
    signs = np.where(np.abs(raw) > 1e-10 * norm2, np.sign(raw), 0.0)
    order = np.lexsort((freqs.imag, freqs.real))
    freqs = freqs[order]
    signs = signs[order]
    return SpectrumResult(frequencies=freqs, symplectic_norms=signs,
                          is_real=bool(np.abs(freqs.imag).max() < tol))


def soft_mode_norm(spec: SpectrumResult, tol: float = REALNESS_TOL):
    """Norm sign of the lowest positive-frequency mode, None if spectrum complex."""
    if not spec.is_real:
        return None
    pos = [i for i, f in enumerate(spec.frequencies) if f.real > tol]
    if not pos:
        return None
    i0 = min(pos, key=lambda i: spec.frequencies[i].real)
    return float(spec.symplectic_norms[i0])


@dataclass(frozen=True)
class ClosedPhasePoint:
    """Classification record of one closed-system parameter point."""

    stable_phases: frozenset
    order_params: dict
    energies: dict
    boundary_residual: float
    np_spectrum: SpectrumResult
    sp_spectrum: SpectrumResult | None


def classify_closed(p: ModelParams, tol: float = REALNESS_TOL) -> ClosedPhasePoint:
    """Enumerate candidate extrema and keep the spectrally stable ones.

    Candidates are the empty-cavity state plus the closed-form superradiant
    amplitudes with both atomic branches.  The empty-cavity state is labeled
    NP inside the boundary and e-NP outside it (where it coexists with a
    superradiant minimum).
    """
    residual = np_boundary_residual(p)
    b = derived_scalars(p).b_param

    op0 = OrderParams(0j, 0j, 0j)
    np_spec = hb_spectrum(build_ns_form(p, op0), tol)

    stable = set()
    order_params = {}
    energies = {}
    if np_spec.is_real:
        tag = Phase.NP if residual <= 0 else Phase.ENP
        stable.add(tag)
        order_params[tag] = op0
        energies[tag] = mean_field_energy(0j, 0j, 0j, p)

    sp_spec = None
    for alpha in sp_candidate_alphas(p):
        for op, k in order_params_branches(alpha, p):
            try:
                spec = hb_spectrum(build_ns_form(p, op), tol)
            except UnphysicalState:
                continue
            if not spec.is_real:
                continue
            e = mean_field_energy(op.alpha, op.beta1, op.beta2, p)
            tags = [Phase.SP1] if b > 0 else [Phase.SP2] if b < 0 else [Phase.SP1, Phase.SP2]
            for tag in tags:
                if tag not in stable or e < energies[tag] - 1e-15:
                    order_params[tag] = op
                    energies[tag] = e
                    stable.add(tag)
            if sp_spec is None or abs(alpha) > 0:
                sp_spec = spec

    return ClosedPhasePoint(stable_phases=frozenset(stable),
                            order_params=order_params, energies=energies,
                            boundary_residual=residual,
                            np_spectrum=np_spec, sp_spectrum=sp_spec)


def closed_row(p: ModelParams, tol: float = REALNESS_TOL) -> dict:
    """Flat per-point record used by sweeps and the CLI dataset writer."""
    point = classify_closed(p, tol)
    labels = sorted(ph.value for ph in point.stable_phases)
    row = {
        "phases": "|".join(labels),
        "boundary_residual": point.boundary_residual,
        "np_stable": int(Phase.NP in point.stable_phases),
        "enp_stable": int(Phase.ENP in point.stable_phases),
        "np_max_im": point.np_spectrum.max_abs_imag,
        "soft_mode_norm": soft_mode_norm(point.np_spectrum) or 0.0,
    }
    sp_tag = next((t for t in (Phase.SP1, Phase.SP2) if t in point.stable_phases), None)
    op = point.order_params.get(sp_tag)
    row["alpha_re"] = op.alpha.real if op else 0.0
    row["alpha_im"] = op.alpha.imag if op else 0.0
    row["beta1_re"] = op.beta1.real if op else 0.0
    row["beta1_im"] = op.beta1.imag if op else 0.0
    row["beta2_re"] = op.beta2.real if op else 0.0
    row["beta2_im"] = op.beta2.imag if op else 0.0
    row["energy_np"] = point.energies.get(Phase.NP, point.energies.get(Phase.ENP, math.nan))
    row["energy_sp"] = point.energies.get(sp_tag, math.nan) if sp_tag else math.nan
    return row


def sweep_closed(grid, p_base: ModelParams, workers: int = 0, meta: dict | None = None):
    """Classify every grid point; see :mod:`vdicke.datasets` for the format."""
    from .datasets import run_sweep

    return run_sweep(closed_row, grid, p_base, workers=workers, meta=meta)
