"""Noise channels and logical-failure tests for CSS codes.

Two channel families:

* ``code_capacity`` - each qubit independently suffers X, Y or Z with
  probability p / 3 each; syndromes are perfect.
* ``weighted_phenomenological`` - a qubit in v checks errs with probability
  min(1, v p) (uniform over X, Y, Z) and a weight-w check outcome flips with
  probability min(1, w p).  ``degree_mode="total"`` counts the qubit's edges
  in both HX and HZ; ``"per_sector"`` uses, for each Pauli component, only
  the checks that detect it, and samples the X and Z components independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .hgp import CssCode

CODE_CAPACITY = "code_capacity"
PHENOMENOLOGICAL = "weighted_phenomenological"

__all__ = [
    "NoiseModel",
    "ErrorSample",
    "sample_error",
    "sample_errors",
    "logical_failure",
    "sector_priors",
    "CODE_CAPACITY",
    "PHENOMENOLOGICAL",
]


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    p: float
    degree_mode: str = "total"

    def __post_init__(self):
        if self.kind not in (CODE_CAPACITY, PHENOMENOLOGICAL):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.degree_mode not in ("total", "per_sector"):
            raise ValueError("degree_mode must be 'total' or 'per_sector'")

    def qubit_rates(self, code: CssCode) -> np.ndarray:
        """Probability that each qubit suffers a nonidentity Pauli (total mode)."""
        if self.kind == CODE_CAPACITY:
            return np.full(code.n_qubits, self.p)
        v = code.HX.sum(axis=0) + code.HZ.sum(axis=0)
        return np.minimum(1.0, v * self.p)

    def component_rates(self, code: CssCode, sector: str) -> np.ndarray:
        """Marginal probability that a qubit's error has an X (or Z) component."""
        if self.kind == PHENOMENOLOGICAL and self.degree_mode == "per_sector":
            v = code.check_matrix(sector).sum(axis=0)
            return 2.0 / 3.0 * np.minimum(1.0, v * self.p)
        return 2.0 / 3.0 * self.qubit_rates(code)

    def check_rates(self, code: CssCode, sector: str) -> np.ndarray:
        """Flip probability of each check that detects errors of ``sector``."""
        H = code.check_matrix(sector)
        if self.kind == CODE_CAPACITY:
            return np.zeros(H.shape[0])
        return np.minimum(1.0, H.sum(axis=1) * self.p)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p, "degree_mode": self.degree_mode}


@dataclass(frozen=True)
class ErrorSample:
    x: np.ndarray
    z: np.ndarray
    flips_x: np.ndarray  # flips of HZ outcomes (the checks seeing X errors)
    flips_z: np.ndarray  # flips of HX outcomes

    def part(self, sector: str) -> np.ndarray:
        return self.x if sector.upper() == "X" else self.z

    def flips(self, sector: str) -> np.ndarray:
        return self.flips_x if sector.upper() == "X" else self.flips_z


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_error(code: CssCode, model: NoiseModel, seed=None) -> ErrorSample:
    """One draw of data errors (and check flips for the phenomenological model)."""
    rng = _rng(seed)
    N = code.n_qubits
    if model.kind == PHENOMENOLOGICAL and model.degree_mode == "per_sector":
        x = (rng.random(N) < model.component_rates(code, "X")).astype(np.uint8)
        z = (rng.random(N) < model.component_rates(code, "Z")).astype(np.uint8)
    else:
        hit = rng.random(N) < model.qubit_rates(code)
        pauli = rng.integers(0, 3, N)  # 0 = X, 1 = Y, 2 = Z
        x = (hit & (pauli != 2)).astype(np.uint8)
        z = (hit & (pauli != 0)).astype(np.uint8)
    fx = (rng.random(code.HZ.shape[0]) < model.check_rates(code, "X")).astype(np.uint8)
    fz = (rng.random(code.HX.shape[0]) < model.check_rates(code, "Z")).astype(np.uint8)
    return ErrorSample(x, z, fx, fz)


def sample_errors(code: CssCode, model: NoiseModel, shots: int, seed=None) -> ErrorSample:
    """``shots`` independent draws stacked row-wise (same law as :func:`sample_error`)."""
    rng = _rng(seed)
    N = code.n_qubits
    if model.kind == PHENOMENOLOGICAL and model.degree_mode == "per_sector":
        x = (rng.random((shots, N)) < model.component_rates(code, "X")).astype(np.uint8)
        z = (rng.random((shots, N)) < model.component_rates(code, "Z")).astype(np.uint8)
    else:
        hit = rng.random((shots, N)) < model.qubit_rates(code)
        pauli = rng.integers(0, 3, (shots, N))
        x = (hit & (pauli != 2)).astype(np.uint8)
        z = (hit & (pauli != 0)).astype(np.uint8)
    fx = (rng.random((shots, code.HZ.shape[0])) < model.check_rates(code, "X")).astype(np.uint8)
    fz = (rng.random((shots, code.HX.shape[0])) < model.check_rates(code, "Z")).astype(np.uint8)
    return ErrorSample(x, z, fx, fz)


def sector_priors(code: CssCode, model: NoiseModel, sector: str, floor: float = 1e-9) -> np.ndarray:
    """Per-qubit decoder priors for one sector, clipped into (0, 0.5]."""
    return np.clip(model.component_rates(code, sector), floor, 0.5)


def logical_failure(code: CssCode, residual_x=None, residual_z=None) -> dict[str, bool]:
    """Whether each residual acts as a nontrivial logical operator.

    Residuals must have zero syndrome; an X residual fails when it
    anticommutes with some Z logical (and vice versa).
    """
    out = {}
    GX, GZ = code.logicals
    for sector, res, checks, dual in (("X", residual_x, code.HZ, GZ), ("Z", residual_z, code.HX, GX)):
        if res is None:
            continue
        res = gf2.as_binary(res)
        if gf2.matmul(checks, res).any():
            raise ValueError(f"{sector} residual has a nonzero syndrome")
        out[sector] = bool(gf2.matmul(dual, res).any())
    return out
