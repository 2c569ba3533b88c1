"""Quadratic fluctuation Hamiltonians around mean-field states.

A quadratic bosonic Hamiltonian is stored in the normalization

    h2 = adag H a + a K a + adag K* adag,

i.e. ``H`` is the Hermitian normal part and ``K`` the symmetric anomalous
part with ``K_ij = (1/2) d^2 e / dz_i dz_j`` of the classical energy.  Both
matrices are exact Wirtinger second derivatives of the mean-field energy,
evaluated analytically; every sign and factor is pinned by the requirement
that the Bogoliubov equations reproduce the linearized mean-field equations
of motion (enforced in the test suite).

Two sectors exist:

* ``NORMAL_SUPERRADIANT``: 3 modes (cavity, two atomic excitations) around
  a state expanded on the lowest level.
* ``INVERTED``: 2 modes (cavity, lowest-level excitation) around an inverted
  spin coherent state labeled by (N1/N, theta); the in-manifold third mode
  decouples at quadratic order and is omitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UnphysicalState, ValidationError
from .landscape import K_MIN, OrderParams
from .params import ModelParams

_HERM_TOL = 1e-12


class Sector(Enum):
    NORMAL_SUPERRADIANT = "normal_superradiant"
    INVERTED = "inverted"


@dataclass(frozen=True)
class QuadraticForm:
    """(H, K) pair of a quadratic bosonic form, tagged by sector."""

    h_matrix: np.ndarray
    k_matrix: np.ndarray
    sector: Sector

    def __post_init__(self):
        h = np.asarray(self.h_matrix, dtype=complex)
        k = np.asarray(self.k_matrix, dtype=complex)
        n = 3 if self.sector is Sector.NORMAL_SUPERRADIANT else 2
        if h.shape != (n, n) or k.shape != (n, n):
            raise ValidationError(f"expected {n}x{n} matrices for {self.sector}")
        scale = max(np.abs(h).max(), np.abs(k).max(), 1.0)
        if np.abs(h - h.conj().T).max() > _HERM_TOL * scale:
            raise ValidationError("H must be Hermitian")
        if np.abs(k - k.T).max() > _HERM_TOL * scale:
            raise ValidationError("K must be symmetric")
        object.__setattr__(self, "h_matrix", h)
        object.__setattr__(self, "k_matrix", k)

    @property
    def n_modes(self) -> int:
        return self.h_matrix.shape[0]


def build_ns_form(p: ModelParams, op: OrderParams) -> QuadraticForm:
    """Fluctuation form around a normal/superradiant state (3 modes).

    Basis (cavity, d1, d2).  Valid for any physical mean-field point, not
    only energy extrema, so the same builder serves the open steady states.
    """
    k = op.k
    if k <= K_MIN:
        raise UnphysicalState(f"reference population k = {k:.3e} too small")
    a, b1, b2 = op.alpha, op.beta1, op.beta2
    s, c = math.sin(p.phi), math.cos(p.phi)
    l1, l2, w, w0 = p.lambda1, p.lambda2, p.omega, p.omega0
    ac, b1c, b2c = a.conjugate(), b1.conjugate(), b2.conjugate()
    u = math.sqrt(k)
    u3 = u * k  # u**3

    ap = s * a + c * ac
    am = s * a - c * ac
    apc, amc = ap.conjugate(), am.conjugate()
    wfull = l1 * (b1c * ap + b1 * apc) + 1j * l2 * (b2c * am - b2 * amc)
    w_a = l1 * (s * b1c + c * b1) + 1j * l2 * (s * b2c + c * b2)
    w_ab = l1 * (c * b1c + s * b1) - 1j * l2 * (c * b2c + s * b2)

    h = np.empty((3, 3), dtype=complex)
    kk = np.zeros((3, 3), dtype=complex)

    h[0, 0] = w
    h[0, 1] = -b1c * w_ab / (2 * u) + u * l1 * s
    h[0, 2] = -b2c * w_ab / (2 * u) - 1j * u * l2 * s
    h[1, 1] = (w0 - wfull / (2 * u) - l1 * (b1c * ap + b1 * apc) / (2 * u)
               - abs(b1) ** 2 * wfull / (4 * u3))
    h[2, 2] = (w0 - wfull / (2 * u) - 1j * l2 * (b2c * am - b2 * amc) / (2 * u)
               - abs(b2) ** 2 * wfull / (4 * u3))
    h[1, 2] = (-b2c * l1 * ap / (2 * u) - b2c * b1 * wfull / (4 * u3)
               + 1j * l2 * b1 * amc / (2 * u))
    h[1, 0] = h[0, 1].conjugate()
    h[2, 0] = h[0, 2].conjugate()
    h[2, 1] = h[1, 2].conjugate()
    # the diagonal is real analytically; drop the rounding residue
    for i in range(3):
        h[i, i] = h[i, i].real

    kk[0, 1] = 0.5 * (-b1c * w_a / (2 * u) + u * l1 * c)
    kk[0, 2] = 0.5 * (-b2c * w_a / (2 * u) + 1j * u * l2 * c)
    kk[1, 1] = -b1c * l1 * apc / (2 * u) - b1c ** 2 * wfull / (8 * u3)
    kk[2, 2] = 1j * l2 * b2c * amc / (2 * u) - b2c ** 2 * wfull / (8 * u3)
    kk[1, 2] = 0.5 * (1j * l2 * b1c * amc / (2 * u) - b1c * b2c * wfull / (4 * u3)
                      - l1 * b2c * apc / (2 * u))
    kk[1, 0] = kk[0, 1]
    kk[2, 0] = kk[0, 2]
    kk[2, 1] = kk[1, 2]

    return QuadraticForm(h_matrix=h, k_matrix=kk, sector=Sector.NORMAL_SUPERRADIANT)


def inverted_etas(p: ModelParams, n1_frac: float) -> tuple[float, float]:
    """Effective couplings of an inverted state: (eta1, eta2)."""
    return (math.sqrt(n1_frac) * p.lambda1,
            p.lambda2 * math.sqrt(1.0 - n1_frac))


def build_inverted_form(p: ModelParams, n1_frac: float, theta: float) -> QuadraticForm:
    """Fluctuation form around the inverted state (N1/N, theta), 2 modes.

    Basis (cavity, d0).  The atomic diagonal entry is -omega0: excitations
    out of the inverted manifold lower the energy.  theta is the phase of
    the 1-2 coherence, arg <L_12>.
    """
    if not 0.0 <= n1_frac <= 1.0:
        raise ValidationError("n1_frac must lie in [0, 1]")
    s, c = math.sin(p.phi), math.cos(p.phi)
    eta1, eta2 = inverted_etas(p, n1_frac)
    ph = complex(math.cos(theta), -math.sin(theta))  # e^{-i theta}
    h = np.array([[p.omega, c * (eta1 - 1j * eta2 * ph)],
                  [c * (eta1 - 1j * eta2 * ph).conjugate(), -p.omega0]],
                 dtype=complex)
    koff = 0.5 * s * (eta1 + 1j * eta2 * ph)
    k = np.array([[0.0, koff], [koff, 0.0]], dtype=complex)
    return QuadraticForm(h_matrix=h, k_matrix=k, sector=Sector.INVERTED)


# ---------------------------------------------------------------------------
# Scalar auxiliary functions of the printed normal/superradiant matrices.
#
# Each is implemented verbatim for cross-validation.  The cavity-atom blocks
# assemble exactly from these (see tests); the printed atomic diagonal
# combinations are inconsistent with Hermiticity as published and are
# superseded by the derivative-based entries above.
# ---------------------------------------------------------------------------

def aux_j1(p: ModelParams, op: OrderParams, phi_val: float) -> complex:
    s, c = math.sin(phi_val), math.cos(phi_val)
    k = op.k
    b1c = op.beta1.conjugate()
    return (-b1c ** 2 * c - s * abs(op.beta1) ** 2 + 2 * s * k) * p.lambda1 / (2 * math.sqrt(k))


def aux_j2(p: ModelParams, op: OrderParams, phi_val: float) -> complex:
    s, c = math.sin(phi_val), math.cos(phi_val)
    k = op.k
    b2c = op.beta2.conjugate()
    return (-b2c ** 2 * c - s * abs(op.beta2) ** 2 + 2 * s * k) * p.lambda2 / (2 * math.sqrt(k))


def aux_g1(p: ModelParams, op: OrderParams, phi_val: float) -> complex:
    s, c = math.sin(phi_val), math.cos(phi_val)
    b1, b2 = op.beta1, op.beta2
    return (1j * c * b2.conjugate() * b1.conjugate()
            + 1j * s * b2.conjugate() * b1) * p.lambda1 / (2 * math.sqrt(op.k))


def aux_g2(p: ModelParams, op: OrderParams, phi_val: float) -> complex:
    s, c = math.sin(phi_val), math.cos(phi_val)
    b1, b2 = op.beta1, op.beta2
    return (1j * c * b2.conjugate() * b1.conjugate()
            + 1j * s * b1.conjugate() * b2) * p.lambda2 / (2 * math.sqrt(op.k))


def aux_eta1(p: ModelParams, n1_frac: float) -> float:
    return math.sqrt(n1_frac) * p.lambda1


def aux_eta2(p: ModelParams, n1_frac: float) -> float:
    return p.lambda2 * math.sqrt(1.0 - n1_frac)
