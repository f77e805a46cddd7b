"""Preconditioned HMC on spectral truncations of Gaussian reference measures.

The compiled extension ``phmc._core`` does the work; this module converts between
Python objects and the JSON documents the core library speaks.
"""

import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import _core
from ._core import ConditionError, ConfigError, DimensionError, DivergenceError, Error

__all__ = [
    "ConditionError",
    "ConfigError",
    "DimensionError",
    "DivergenceError",
    "Error",
    "Model",
    "contraction_constants",
    "coupling_times",
    "eigenvalue_lemma_check",
    "failure_probability",
    "parse_toml",
    "pimd_constants",
    "run_experiment",
    "sample",
    "tps_constants",
    "__version__",
]

__version__ = _core.version()


class Model:
    """A TPS, PIMD or diagonal target built from a config mapping such as
    ``{"model": "tps", "tau": 1.0, "m": 32, "potential": "zero"}``."""

    def __init__(self, config: Dict[str, Any]):
        self.config = dict(config)
        self._m = _core.Model(json.dumps(self.config))

    @property
    def kind(self) -> str:
        return self._m.kind

    @property
    def dimension(self) -> int:
        return self._m.dimension

    @property
    def weight(self) -> float:
        return self._m.weight

    @property
    def covariance(self) -> List[float]:
        """Eigenvalues of C in non-increasing order."""
        return self._m.covariance

    def describe(self) -> Dict[str, Any]:
        return json.loads(self._m.describe())

    def to_eigen(self, grid: Sequence[float]) -> List[float]:
        return self._m.to_eigen(list(grid))

    def to_grid(self, eigen: Sequence[float]) -> List[float]:
        return self._m.to_grid(list(eigen))

    def force(self, grid: Sequence[float]) -> Tuple[float, List[float]]:
        """Returns (U_m(x), C grad G_m(x)) on grid values."""
        return self._m.force(list(grid))

    def initial_state(self, spec: Any = "zero", seed: int = 0) -> List[float]:
        return self._m.initial_state(json.dumps(spec), seed)


def sample(model: Model, x0: Sequence[float], T: float, dt: float, steps: int, seed: int,
           metropolis: bool = True) -> Dict[str, Any]:
    """Runs a chain and returns its summary with eigen-coordinate moments."""
    return json.loads(_core.sample(model._m, list(x0), T, dt, steps, seed, metropolis))


def coupling_times(model: Model, x0: Sequence[float], y0: Sequence[float], T_grid: Sequence[float],
                   rules: Sequence[str], dt: float, n: int = 1, replicas: int = 100,
                   max_steps: int = 10000, threshold: float = 1e-8, seed: int = 1,
                   threads: int = 1) -> Dict[str, Any]:
    return json.loads(_core.coupling_times(model._m, list(x0), list(y0), list(T_grid), list(rules), dt, n,
                                           replicas, max_steps, threshold, seed, threads))


def failure_probability(z: Sequence[float], gamma: float, ctilde: Sequence[float], samples: int,
                        seed: int) -> Dict[str, float]:
    return json.loads(_core.failure_probability(list(z), gamma, list(ctilde), samples, seed))


def eigenvalue_lemma_check(kind: str, params: Dict[str, float], m: int) -> Dict[str, Any]:
    return json.loads(_core.eigenvalue_lemma_check(kind, json.dumps(params), m))


def tps_constants(tau: float, d: int, M_G: float, L_G: float, T: float) -> Dict[str, Any]:
    return json.loads(_core.tps_constants(tau, d, M_G, L_G, T))


def pimd_constants(beta: float, a: float, d: int, M_G: float, L_G: float, T: float) -> Dict[str, Any]:
    return json.loads(_core.pimd_constants(beta, a, d, M_G, L_G, T))


def contraction_constants(L: float, K: float, A: float, n: int, sigma_min: float, sigma_max: float,
                          trace: float, T: float, R: Optional[float] = None) -> Dict[str, Any]:
    return json.loads(_core.contraction_constants(L, K, A, n, sigma_min, sigma_max, trace, T, R))


def parse_toml(text: str) -> Dict[str, Any]:
    return json.loads(_core.parse_toml(text))


def run_experiment(config: Dict[str, Any], out: str, seed: Optional[int] = None,
                   threads: int = 0) -> Tuple[int, str]:
    """Runs one command of the experiment runner; returns (exit code, log text)."""
    return _core.run_experiment(json.dumps(config), str(out), seed, threads)
