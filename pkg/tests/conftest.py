import numpy as np
import pytest

from vdicke.dynamics import MeanFieldODEState, eom_rhs
from vdicke.params import ModelParams

STD = dict(omega=2.0, omega0=0.5)   # omega = 4 omega0 = 2 in reference units
LAMBDA_C = np.sqrt(0.5)             # sqrt(omega*omega0/2) at the standard point


def make_params(lambda1=0.5, lambda2=0.5, phi=np.pi / 4, kappa=0.0, **kw):
    return ModelParams(lambda1=lambda1, lambda2=lambda2, phi=phi, kappa=kappa,
                       **{**STD, **kw})


def packed_jacobian(state: MeanFieldODEState, p: ModelParams, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the packed mean-field flow."""
    y0 = state.to_vector()
    n = len(y0)
    jac = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp = eom_rhs(MeanFieldODEState.from_vector(y0 + e), p).to_vector()
        fm = eom_rhs(MeanFieldODEState.from_vector(y0 - e), p).to_vector()
        jac[:, i] = (fp - fm) / (2 * h)
    return jac


def multiset_close(a, b, atol=1e-8) -> bool:
    """Greedy matching of two complex multisets within atol."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return False
    for x in a:
        dists = [abs(x - y) for y in b]
        i = int(np.argmin(dists))
        if dists[i] > atol:
            return False
        b.pop(i)
    return True


def subset_close(sub, full, atol=1e-5) -> bool:
    """Every element of ``sub`` appears in ``full`` within atol."""
    full = np.asarray(full, dtype=complex)
    return all(np.abs(full - x).min() <= atol for x in np.asarray(sub, dtype=complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_physical_point(rng, max_amp=0.45):
    """A random (alpha, beta1, beta2) with healthy reference population."""
    while True:
        a = complex(*rng.uniform(-0.5, 0.5, 2))
        b1 = complex(*rng.uniform(-max_amp, max_amp, 2))
        b2 = complex(*rng.uniform(-max_amp, max_amp, 2))
        if abs(b1) ** 2 + abs(b2) ** 2 < 0.6:
            return a, b1, b2


def random_params(rng, kappa_max=0.5):
    return make_params(lambda1=rng.uniform(0.05, 1.4), lambda2=rng.uniform(0.05, 1.4),
                       phi=rng.uniform(0.02, np.pi - 0.02), kappa=rng.uniform(0.0, kappa_max))


def coherent_state(alpha, b1, b2) -> MeanFieldODEState:
    k = 1.0 - abs(b1) ** 2 - abs(b2) ** 2
    return MeanFieldODEState.from_level_amplitudes(np.sqrt(k), b1, b2, alpha=alpha)
