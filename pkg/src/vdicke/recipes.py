"""Bundled figure-reproduction run configurations.

Each recipe is a complete config-file text (see :mod:`vdicke.cli` for the
schema); ``vdicke recipes`` lists them, ``vdicke recipes --show NAME``
prints one, and ``vdicke <task> --recipe NAME`` runs one.  Grid resolutions
are chosen for desk-scale runtimes; raise them (and ``workers``) for
publication-quality maps.
"""

from __future__ import annotations

import math

_PI = math.pi


def _model(omega=2.0, omega0=0.5, lam1=0.5, lam2=0.5, phi=_PI / 4,
           kappa=0.0, n_atoms=1.0) -> str:
    return (f"model.omega = {omega!r}\nmodel.omega0 = {omega0!r}\n"
            f"model.lambda1 = {lam1!r}\nmodel.lambda2 = {lam2!r}\n"
            f"model.phi = {phi!r}\nmodel.kappa = {kappa!r}\n"
            f"model.n_atoms = {n_atoms!r}\n")


_RATIO_D = 0.41
_NU8 = _PI / 8

RECIPES: dict[str, tuple[str, str]] = {
    "fig1b": (
        "Closed phase diagram, balanced mixing (NP/SP1/SP2 over the coupling plane)",
        "schema_version = 1\ntask = sweep-closed\n" + _model()
        + "grid.axis1 = lambda1\ngrid.start1 = 0.0\ngrid.stop1 = 1.5\ngrid.num1 = 101\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.0\ngrid.stop2 = 1.5\ngrid.num2 = 101\n"),
    "fig1c": (
        "Closed phase diagram at strongly co-rotating mixing; e-NP coexistence appears",
        "schema_version = 1\ntask = sweep-closed\n" + _model(phi=7 * _PI / 16)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.0\ngrid.stop1 = 1.5\ngrid.num1 = 101\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.0\ngrid.stop2 = 1.5\ngrid.num2 = 101\n"),
    "fig1d": (
        "Closed phase diagram in the mixing-angle / radial-coupling plane",
        "schema_version = 1\ntask = sweep-closed\n" + _model()
        + "grid.axis1 = phi\ngrid.start1 = 0.0\ngrid.stop1 = 3.141592653589793\ngrid.num1 = 101\n"
          "grid.axis2 = lambda_r\ngrid.start2 = 0.0\ngrid.stop2 = 2.0\ngrid.num2 = 101\n"
          f"grid.ratio = {_RATIO_D}\n"),
    "fig1e-cutscan": (
        "Empty-cavity excitation spectrum and norm signs along a radial cut "
        "(particle-to-hole inversion crossing into e-NP)",
        "schema_version = 1\ntask = sweep-closed\n" + _model(phi=7 * _PI / 16)
        + "grid.axis1 = lambda_r\ngrid.start1 = 0.5\ngrid.stop1 = 1.7\ngrid.num1 = 241\n"
          f"grid.ratio = {_RATIO_D}\n"),
    "fig2a": (
        "Open steady-state map near the pure co-rotating side",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.49 * _PI, kappa=0.1)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.02\ngrid.stop1 = 1.5\ngrid.num1 = 41\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.02\ngrid.stop2 = 1.5\ngrid.num2 = 41\n"),
    "fig2b": (
        "Open steady-state map, co-rotating dominated",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.30 * _PI, kappa=0.1)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.02\ngrid.stop1 = 1.5\ngrid.num1 = 41\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.02\ngrid.stop2 = 1.5\ngrid.num2 = 41\n"),
    "fig2c": (
        "Open steady-state map at balanced mixing",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.25 * _PI, kappa=0.1)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.02\ngrid.stop1 = 1.5\ngrid.num1 = 41\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.02\ngrid.stop2 = 1.5\ngrid.num2 = 41\n"),
    "fig2d": (
        "Open steady-state map, counter-rotating dominated",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.22 * _PI, kappa=0.1)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.02\ngrid.stop1 = 1.5\ngrid.num1 = 41\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.02\ngrid.stop2 = 1.5\ngrid.num2 = 41\n"),
    "fig2e": (
        "Open steady-state map, deeper counter-rotating side (second-order cut)",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.18 * _PI, kappa=0.1)
        + "grid.axis1 = lambda1\ngrid.start1 = 0.02\ngrid.stop1 = 1.5\ngrid.num1 = 41\n"
          "grid.axis2 = lambda2\ngrid.start2 = 0.02\ngrid.stop2 = 1.5\ngrid.num2 = 41\n"),
    "fig2f": (
        "Open steady-state bands over mixing angle and radial coupling "
        "(limit-cycle probing enabled; the slow one)",
        "schema_version = 1\ntask = sweep-open\n" + _model(kappa=0.1)
        + "grid.axis1 = phi\ngrid.start1 = 0.0628\ngrid.stop1 = 1.5708\ngrid.num1 = 21\n"
          "grid.axis2 = lambda_r\ngrid.start2 = 0.1\ngrid.stop2 = 2.5\ngrid.num2 = 21\n"
          f"grid.ratio = {_RATIO_D}\nopen.os_detect = 1\nopen.os_max_time = 4000.0\n"),
    "fig3a": (
        "Trajectory in the oscillatory (limit-cycle) regime from a seeded normal state",
        "schema_version = 1\ntask = evolve\n"
        + _model(lam1=1.0 / math.sqrt(1 + _RATIO_D ** 2),
                 lam2=_RATIO_D / math.sqrt(1 + _RATIO_D ** 2),
                 phi=0.22 * _PI, kappa=0.1)
        + "evolve.t_end = 3000.0\nevolve.cavity_seed = 0.01\nevolve.n_samples = 3001\n"),
    "fig3b": (
        "Stable superradiant order parameter along the second-order cut",
        "schema_version = 1\ntask = sweep-open\n" + _model(phi=0.18 * _PI, kappa=0.1)
        + "grid.axis1 = lambda_r\ngrid.start1 = 0.6\ngrid.stop1 = 1.6\ngrid.num1 = 51\n"
          "grid.ratio = 0.2\n"),
    "fig4b": (
        "Inverted-region area versus mixing angle at fixed coupling ratio sqrt(3)",
        "schema_version = 1\ntask = inverted-region\n"
        + _model(lam1=0.5, lam2=0.5 * math.sqrt(3), kappa=0.1)
        + "inverted.n_theta = 96\ninverted.n_n1 = 96\n"
          "inverted.scan_phi_start = 0.0\ninverted.scan_phi_stop = 1.5707963267948966\n"
          "inverted.scan_phi_num = 25\n"),
    "fig4c": (
        "Preparation fidelity versus mixing angle (dark-state target, nu = pi/8)",
        "schema_version = 1\ntask = fidelity-scan\n"
        + _model(lam1=0.8 * math.cos(_NU8), lam2=0.8 * math.sin(_NU8), kappa=1.0)
        + f"fidelity.scan = phi\nfidelity.start = {0.06 * _PI!r}\n"
          f"fidelity.stop = {0.48 * _PI!r}\nfidelity.num = 22\n"
          f"fidelity.nu = {_NU8!r}\nfidelity.lambda_r = 0.8\n"
          "fidelity.max_time = 60000.0\n"),
    "fig4d": (
        "Preparation fidelity versus target mixing nu at fixed mixing angle",
        "schema_version = 1\ntask = fidelity-scan\n"
        + _model(lam1=0.8 * math.cos(_NU8), lam2=0.8 * math.sin(_NU8),
                 phi=0.46 * _PI, kappa=1.0)
        + "fidelity.scan = nu\nfidelity.start = 0.02\n"
          f"fidelity.stop = {_PI / 2 - 0.02!r}\nfidelity.num = 20\n"
          "fidelity.lambda_r = 0.8\nfidelity.max_time = 60000.0\n"),
}


def list_recipes() -> list[tuple[str, str]]:
    """(name, description) pairs of all bundled recipes."""
    return [(name, desc) for name, (desc, _) in RECIPES.items()]


def recipe_config(name: str) -> str:
    if name not in RECIPES:
        raise KeyError(f"unknown recipe {name!r}; see `vdicke recipes`")
    return RECIPES[name][1]
