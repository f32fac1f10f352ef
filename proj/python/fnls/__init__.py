"""Response solutions of the forced fractional NLS on the torus.

Configurations, reports and fields cross the boundary as JSON; this wrapper
accepts and returns plain dicts.
"""
import json

from . import _core
from ._core import CertificateError, ConfigError, NoGoodCellsError

__all__ = [
    "CertificateError", "ConfigError", "NoGoodCellsError",
    "default_config", "solve", "measure_sweep", "green_audit", "partition_dump",
    "verify", "residual_norm", "collocation_residual",
    "coupling_lemma1", "coupling_lemma2", "synthetic_lemma1", "synthetic_lemma2",
]


def _text(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def solve(config=None, overrides=()):
    """Returns (report, solution) as dicts."""
    report, solution = _core.solve(_text(config), list(overrides))
    return json.loads(report), json.loads(solution)


def measure_sweep(config=None, overrides=()):
    """Returns (csv text, fitted K)."""
    return _core.measure_sweep(_text(config), list(overrides))


def green_audit(omega, N, config=None):
    return json.loads(_core.green_audit(_text(config), omega, N))


def partition_dump(dim, B, box_radius, verify=True):
    return _core.partition_dump(dim, B, box_radius, verify)


def verify(solution, tolerance=1e-9, grid=0):
    """Returns (ok, per-frequency entries)."""
    return _core.verify(_text(solution), tolerance, grid)


def residual_norm(field, omega, config=None):
    return _core.residual_norm(_text(field), _text(config), omega)


def collocation_residual(field, omega, config=None, grid=0):
    return _core.collocation_residual(_text(field), _text(config), omega, grid)


def coupling_lemma1(instance):
    keys = ("T", "points", "cover", "B", "K", "C", "C_prime", "c")
    return _core.coupling_lemma1(*(instance[k] for k in keys))


def coupling_lemma2(instance):
    keys = ("D", "S", "points", "clusters", "M", "eps1", "eps2", "eps3", "rho", "eps", "C", "c")
    return _core.coupling_lemma2(*(instance[k] for k in keys))


synthetic_lemma1 = _core.synthetic_lemma1
synthetic_lemma2 = _core.synthetic_lemma2
