"""Model parameters, derived scalar quantities and symmetry classification.

Conventions used throughout the package:

* hbar = 1, and frequencies are quoted in units of the reference frequency
  ``sqrt(omega * omega0)`` of the standard working point ``omega = 4*omega0``.
  Nothing enforces the normalization; ``ModelParams.normalized()`` rescales an
  arbitrary parameter set onto it.
* ``phi`` is the co/counter-rotating mixing angle.  The Hamiltonian is
  invariant under ``phi -> phi + pi`` combined with a sign flip of the cavity
  mode, so ``phi`` is normalized to ``[0, pi)`` on construction.
* ``omega_scaled`` (the inverted-state stability parameter) follows the
  operational sign convention fixed by the numerically computed stability
  region: +1 on the pure co-rotating side (``phi = pi/2``, dark point only)
  and -1 on the pure counter-rotating side (``phi = 0``, everything stable).
  See ``OMEGA_SIGN_CONVENTION``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import InconsistentRaman, ValidationError, ZeroDetuning

#: Sign convention chosen for the scaled inverted-state stability parameter.
#: "minus-literal" means the value is the negative of the raw boundary-equation
#: ratio; with it the analytic area formula reproduces the numeric
#: rapidity-classified region (checked in inverted_region and the test suite).
OMEGA_SIGN_CONVENTION = "minus-literal"

#: Default tolerance for symmetry classification (radians / relative).
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """The seven constants of the three-level V-model.

    omega    -- cavity frequency
    omega0   -- transition frequency of the two degenerate excited levels
    lambda1  -- collective coupling of the |0> <-> |1> transition
    lambda2  -- collective coupling of the |0> <-> |2> transition
    phi      -- co/counter-rotating mixing angle, normalized to [0, pi)
    kappa    -- cavity amplitude decay rate
    n_atoms  -- atom number; only extensive quantities (region area) use it
    """

    omega: float
    omega0: float
    lambda1: float
    lambda2: float
    phi: float
    kappa: float = 0.0
    n_atoms: float = 1.0

    def __post_init__(self):
        if not (self.omega > 0 and self.omega0 > 0):
            raise ValidationError("omega and omega0 must be positive")
        if self.kappa < 0:
            raise ValidationError("kappa must be nonnegative")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("coupling strengths must be nonnegative")
        if self.n_atoms < 1:
            raise ValidationError("n_atoms must be at least 1")
        if not all(math.isfinite(x) for x in
                   (self.omega, self.omega0, self.lambda1, self.lambda2,
                    self.phi, self.kappa, self.n_atoms)):
            raise ValidationError("parameters must be finite")
        object.__setattr__(self, "phi", self.phi % math.pi)

    @property
    def reference_frequency(self) -> float:
        """sqrt(omega * omega0); equals 1 for normalized parameter sets."""
        return math.sqrt(self.omega * self.omega0)

    def normalized(self) -> "ModelParams":
        """Rescale all frequencies by the reference frequency."""
        w = self.reference_frequency
        return replace(self, omega=self.omega / w, omega0=self.omega0 / w,
                       lambda1=self.lambda1 / w, lambda2=self.lambda2 / w,
                       kappa=self.kappa / w)

    def replace(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)

    # -- canonical key-value serialization (used by the CLI config loader) --

    _KV_FIELDS = ("omega", "omega0", "lambda1", "lambda2", "phi", "kappa", "n_atoms")

    def to_kv(self) -> str:
        """Canonical `key = value` text block, one field per line."""
        return "".join(f"{name} = {getattr(self, name):.17g}\n"
                       for name in self._KV_FIELDS)

    @classmethod
    def from_kv(cls, text: str) -> "ModelParams":
        """Parse the canonical key-value block produced by :meth:`to_kv`."""
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in cls._KV_FIELDS:
                raise ValidationError(f"line {lineno}: unknown field {key!r}")
            try:
                values[key] = float(val)
            except ValueError:
                raise ValidationError(f"line {lineno}: bad number {val.strip()!r}") from None
        missing = [f for f in cls._KV_FIELDS[:5] if f not in values]
        if missing:
            raise ValidationError(f"missing required fields: {', '.join(missing)}")
        return cls(**values)


@dataclass(frozen=True)
class DerivedScalars:
    """Scalar combinations that control the phase structure.

    b_param      -- cos(phi) sin(phi) (lambda1^2 - lambda2^2)
    l_param      -- lambda1^2 + lambda2^2
    lambda_r     -- sqrt(l_param)
    omega_scaled -- resolved inverted-state stability parameter, in [-1, 1]
    lambda_c     -- sqrt(omega * omega0 / 2), the balanced-point critical coupling
    """

    b_param: float
    l_param: float
    lambda_r: float
    omega_scaled: float
    lambda_c: float


def omega_scaled_literal(p: ModelParams) -> float:
    """Raw boundary-equation ratio before the sign-convention resolution."""
    x = p.kappa ** 2 + p.omega ** 2 + p.omega0 ** 2
    c2 = math.cos(2 * p.phi)
    return (x * c2 - 2 * p.omega0 * p.omega) / (x - 2 * p.omega0 * p.omega * c2)


def derived_scalars(p: ModelParams) -> DerivedScalars:
    b = math.cos(p.phi) * math.sin(p.phi) * (p.lambda1 ** 2 - p.lambda2 ** 2)
    l = p.lambda1 ** 2 + p.lambda2 ** 2
    return DerivedScalars(
        b_param=b,
        l_param=l,
        lambda_r=math.sqrt(l),
        omega_scaled=-omega_scaled_literal(p),
        lambda_c=math.sqrt(p.omega * p.omega0 / 2),
    )


class SymmetryClass(Enum):
    """Symmetry of the Hamiltonian at a parameter point."""

    U1_TAVIS_CUMMINGS = "U1_TavisCummings"   # phi = n pi/2: one rotating term vanishes
    U1_BALANCED = "U1_Balanced"              # lambda1 = lambda2
    Z2xZ2_GENERIC = "Z2xZ2_Generic"


def classify_symmetry(p: ModelParams, tol: float = SYMMETRY_TOL) -> SymmetryClass:
    """Classify the symmetry; the Tavis-Cummings case wins when both hold."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    half_pi = math.pi / 2
    dist_tc = abs(p.phi - half_pi * round(p.phi / half_pi))
    if dist_tc <= tol:
        return SymmetryClass.U1_TAVIS_CUMMINGS
    scale = max(1.0, p.lambda1, p.lambda2)
    if abs(p.lambda1 - p.lambda2) <= tol * scale:
        return SymmetryClass.U1_BALANCED
    return SymmetryClass.Z2xZ2_GENERIC


@dataclass(frozen=True)
class RamanInputs:
    """Drive and coupling data of the four-channel Raman implementation.

    Rabi frequencies and detunings are per channel (s/r legs, tau = 1, 2);
    ``zeeman_1``/``zeeman_2`` are the bare energies of the two target levels,
    and ``omega_laser_*`` the frequencies of the corresponding drive lasers.
    All quantities share one frequency unit.
    """

    rabi_s1: float
    rabi_s2: float
    rabi_r1: float
    rabi_r2: float
    delta_s1: float
    delta_s2: float
    delta_r1: float
    delta_r2: float
    g_r: float
    g_s: float
    n_atoms: float
    omega_cavity_bare: float
    omega_laser_r1: float = 0.0
    omega_laser_s1: float = 0.0
    zeeman_1: float = 0.0
    zeeman_2: float = 0.0
    omega_laser_r2: float = 0.0
    omega_laser_s2: float = 0.0
    kappa: float = 0.0

    def adiabaticity_ratio(self) -> float:
        """Smallest detuning over the largest drive/coupling scale.

        Values well above 1 justify the adiabatic elimination behind the
        effective model; this is a validity figure, not a hard constraint.
        """
        dmin = min(abs(self.delta_s1), abs(self.delta_s2),
                   abs(self.delta_r1), abs(self.delta_r2))
        fmax = max(abs(self.rabi_s1), abs(self.rabi_s2), abs(self.rabi_r1),
                   abs(self.rabi_r2), abs(self.g_r), abs(self.g_s), 1e-300)
        return dmin / fmax


def raman_map(r: RamanInputs, tol: float = 1e-8) -> ModelParams:
    """Map Raman drive data onto the effective model constants.

    The two tau channels must imply one common mixing angle; the cavity Stark
    shifts must satisfy the flattening condition that removes the
    state-dependent dispersive term.  Both are checked within ``tol``
    (relative).  Raises :class:`ZeroDetuning` / :class:`InconsistentRaman`.
    """
    deltas = (r.delta_s1, r.delta_s2, r.delta_r1, r.delta_r2)
    if any(d == 0 for d in deltas):
        raise ZeroDetuning("all four detunings must be nonzero")

    sqn = math.sqrt(r.n_atoms)
    lam_s = (sqn * r.rabi_s1 * r.g_s / (2 * r.delta_s1),
             sqn * r.rabi_s2 * r.g_s / (2 * r.delta_s2))
    lam_r = (sqn * r.rabi_r1 * r.g_r / (2 * r.delta_r1),
             sqn * r.rabi_r2 * r.g_r / (2 * r.delta_r2))

    # Stark-shift flattening: g_r/d_r1 = g_r/d_r2 = g_s/d_s1 + g_s/d_s2.
    s1 = r.g_r / r.delta_r1
    s2 = r.g_r / r.delta_r2
    s3 = r.g_s / r.delta_s1 + r.g_s / r.delta_s2
    scale = max(abs(s1), abs(s2), abs(s3), 1e-300)
    if abs(s1 - s2) > tol * scale or abs(s1 - s3) > tol * scale:
        raise InconsistentRaman("cavity Stark shifts do not satisfy the flattening condition")

    lam = tuple(math.hypot(ls, lr) for ls, lr in zip(lam_s, lam_r))
    phis = []
    for tau in range(2):
        if lam[tau] > 0:
            phis.append(math.atan2(lam_s[tau], lam_r[tau]) % math.pi)
    if len(phis) == 2 and abs(phis[0] - phis[1]) > tol * max(1.0, phis[0]) \
            and abs(abs(phis[0] - phis[1]) - math.pi) > tol:
        raise InconsistentRaman(
            f"channel mixing angles differ: {phis[0]:.12g} vs {phis[1]:.12g}")
    phi = phis[0] if phis else 0.0

    omega = (r.omega_cavity_bare - (r.omega_laser_r1 + r.omega_laser_s1) / 2
             + 3 * r.n_atoms * r.g_r / r.delta_r1)
    w10 = r.zeeman_1 + r.rabi_s1 ** 2 / (4 * r.delta_s1) - (r.omega_laser_r1 - r.omega_laser_s1) / 2
    w20 = r.zeeman_2 + r.rabi_s2 ** 2 / (4 * r.delta_s2) - (r.omega_laser_r2 - r.omega_laser_s2) / 2
    if abs(w10 - w20) > tol * max(1.0, abs(w10), abs(w20)):
        raise InconsistentRaman(f"level energies differ: {w10:.12g} vs {w20:.12g}")

    return ModelParams(omega=omega, omega0=w10, lambda1=lam[0], lambda2=lam[1],
                       phi=phi, kappa=r.kappa, n_atoms=r.n_atoms)
