"""Covariance-matrix engine for zero-mean multimode Gaussian states.

Quadrature convention: ``a = (q + i p) / sqrt(2)``, so the vacuum has
variance 1/2 in each quadrature.  Covariance matrices use the block
ordering ``(q_1 .. q_n, p_1 .. p_n)``.  A state is physical when every
symplectic eigenvalue is at least 1/2.

The channels implemented here are exactly the ones the decorrelation
planner composes:

* squeezed-thermal preparation (per-mode diagonal covariances),
* CPHASE networks along a graph, with adjustable uniform strength,
* uniform photon loss ``V -> (1 - eps) V + (eps / 2) I``,
* homodyne detector inefficiency referred to the input after the
  compensating amplification, which adds ``eps2 / (1 - eps2)`` of noise
  to the measured q quadratures only,
* passive orthogonal (beam-splitter/phase) networks acting identically
  on q and p blocks,
* the balanced collective-mode reduction used when the protocol couples
  one qubit weakly to many redundant rails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graphs import Graph, adjacency_matrix

__all__ = [
    "SqueezedThermalParams",
    "GaussianState",
    "vacuum",
    "squeezed_thermal",
    "mode_diag_state",
    "apply_cphase",
    "apply_loss",
    "apply_detector_noise",
    "apply_orthogonal",
    "symplectic_form",
    "symplectic_eigenvalues",
    "is_physical",
    "thermal_cvcs",
    "collective_mode_covariance",
    "MixtureParams",
    "mixture_params",
    "state_to_json",
    "state_from_json",
]


@dataclass(frozen=True)
class SqueezedThermalParams:
    """Per-mode source: squeezing parameter ``r`` and thermal occupation ``nbar``.

    The q quadrature is antisqueezed (variance ``exp(2 r) (nbar + 1/2)``)
    and p squeezed (variance ``exp(-2 r) (nbar + 1/2)``), matching a
    p-squeezed source measured in q.
    """

    r: float
    nbar: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.r):
            raise ValueError(f"squeezing parameter must be finite, got {self.r}")
        if not (self.nbar >= 0.0 and math.isfinite(self.nbar)):
            raise ValueError(f"thermal occupation must be >= 0, got {self.nbar}")

    @property
    def q_variance(self) -> float:
        return math.exp(2.0 * self.r) * (self.nbar + 0.5)

    @property
    def p_variance(self) -> float:
        return math.exp(-2.0 * self.r) * (self.nbar + 0.5)


class GaussianState:
    """Zero-mean Gaussian state of ``n`` modes held as a covariance matrix."""

    __slots__ = ("n", "cov", "mean")

    def __init__(self, n: int, cov, mean=None):
        cov = np.array(cov, dtype=float)
        if cov.shape != (2 * n, 2 * n):
            raise ValueError(f"expected a {2 * n}x{2 * n} covariance, got {cov.shape}")
        dev = float(np.abs(cov - cov.T).max())
        if dev > 1e-12:
            raise ValueError(f"covariance is not symmetric (deviation {dev:.3e})")
        if mean is None:
            mean = np.zeros(2 * n)
        else:
            mean = np.array(mean, dtype=float)
            if mean.shape != (2 * n,):
                raise ValueError(f"mean must have length {2 * n}, got {mean.shape}")
        self.n = n
        self.cov = cov
        self.mean = mean

    def copy(self) -> "GaussianState":
        return GaussianState(self.n, self.cov, self.mean)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"GaussianState(n={self.n})"


def vacuum(n: int) -> GaussianState:
    return GaussianState(n, 0.5 * np.eye(2 * n))


def squeezed_thermal(params: SqueezedThermalParams, n: int) -> GaussianState:
    """``n`` identical uncorrelated squeezed-thermal modes."""
    diag = np.concatenate(
        [np.full(n, params.q_variance), np.full(n, params.p_variance)]
    )
    return GaussianState(n, np.diag(diag))


def mode_diag_state(q_vars, p_vars) -> GaussianState:
    """Uncorrelated modes with individually chosen quadrature variances."""
    q_vars = np.asarray(q_vars, dtype=float)
    p_vars = np.asarray(p_vars, dtype=float)
    if q_vars.shape != p_vars.shape or q_vars.ndim != 1:
        raise ValueError("q_vars and p_vars must be 1-D with equal length")
    if np.any(q_vars <= 0.0) or np.any(p_vars <= 0.0):
        raise ValueError("quadrature variances must be positive")
    return GaussianState(len(q_vars), np.diag(np.concatenate([q_vars, p_vars])))


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

def apply_cphase(state: GaussianState, graph: Graph, strength: float = 1.0) -> GaussianState:
    """CPHASE network ``exp(i g q_i q_j)`` on every edge, uniform strength ``g``.

    Symplectically ``(q, p) -> (q, p + g A q)``, i.e. ``S = [[I, 0], [g A, I]]``.
    """
    if graph.n != state.n:
        raise ValueError(f"graph has {graph.n} vertices but state has {state.n} modes")
    n = state.n
    s = np.eye(2 * n)
    s[n:, :n] = strength * adjacency_matrix(graph)
    return GaussianState(n, s @ state.cov @ s.T, s @ state.mean)


def apply_loss(state: GaussianState, eps: float) -> GaussianState:
    """Uniform photon loss of fraction ``eps`` on every mode.

    ``V -> (1 - eps) V + (eps / 2) I``; the vacuum is a fixed point.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"loss fraction must be in [0, 1), got {eps}")
    n = state.n
    cov = (1.0 - eps) * state.cov + 0.5 * eps * np.eye(2 * n)
    return GaussianState(n, cov, math.sqrt(1.0 - eps) * state.mean)


def apply_detector_noise(state: GaussianState, eps2: float) -> GaussianState:
    """Homodyne inefficiency ``eps2`` referred to the input.

    After compensating for the efficiency loss by rescaling the measured
    record, an inefficient q measurement is an ideal one preceded by
    additive Gaussian noise of variance ``eps2 / (1 - eps2)`` on the q
    quadratures only.
    """
    if not 0.0 <= eps2 < 1.0:
        raise ValueError(f"detector inefficiency must be in [0, 1), got {eps2}")
    n = state.n
    cov = state.cov.copy()
    cov[:n, :n] += (eps2 / (1.0 - eps2)) * np.eye(n)
    return GaussianState(n, cov, state.mean)


def apply_orthogonal(state: GaussianState, o: np.ndarray, tol: float = 1e-10) -> GaussianState:
    """Passive network acting as the same orthogonal ``O`` on q and p blocks."""
    o = np.asarray(o, dtype=float)
    n = state.n
    if o.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {o.shape}")
    dev = float(np.abs(o @ o.T - np.eye(n)).max())
    if dev > tol:
        raise ValueError(f"matrix is not orthogonal (deviation {dev:.3e})")
    u = np.zeros((2 * n, 2 * n))
    u[:n, :n] = o
    u[n:, n:] = o
    return GaussianState(n, u @ state.cov @ u.T, u @ state.mean)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def symplectic_form(n: int) -> np.ndarray:
    """``Omega = [[0, I], [-I, 0]]`` in qqpp ordering."""
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, n:] = np.eye(n)
    omega[n:, :n] = -np.eye(n)
    return omega


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Symplectic spectrum, ascending.

    The eigenvalues of ``Omega V`` come in pairs ``+/- i nu_k``; the
    moduli therefore list each ``nu_k`` twice, and sorting then taking
    every other entry recovers the spectrum.
    """
    ev = np.linalg.eigvals(symplectic_form(state.n) @ state.cov)
    nus = np.sort(np.abs(ev))
    return nus[::2]


def is_physical(state: GaussianState, tol: float = 1e-10) -> bool:
    """Uncertainty-principle check: every symplectic eigenvalue >= 1/2 - tol."""
    return bool(symplectic_eigenvalues(state).min() >= 0.5 - tol)


# ---------------------------------------------------------------------------
# composite constructions
# ---------------------------------------------------------------------------

def thermal_cvcs(
    graph: Graph, params: SqueezedThermalParams, strength: float = 1.0
) -> GaussianState:
    """Continuous-variable cluster state built from squeezed-thermal modes.

    With unit strength and per-mode variances ``(B1, B2)`` the covariance
    works out to ``[[B1 I, B1 A], [B1 A, B2 I + B1 A^2]]``; tests pin the
    channel composition against that closed form.
    """
    return apply_cphase(squeezed_thermal(params, graph.n), graph, strength)


def collective_mode_covariance(state: GaussianState, copies: int) -> np.ndarray:
    """Covariance of the balanced collective quadratures over ``copies`` rails.

    For ``R`` independent copies of the state, the modes
    ``Q_i = sum_s q_i^(s) / sqrt(R)`` (and likewise ``P_i``) have exactly
    the single-copy covariance: the ``1/sqrt(R)`` normalization cancels
    the ``R``-fold variance accumulation, and cross-copy terms vanish by
    independence.  Returned as a plain matrix for direct comparison.
    """
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    n = state.n
    eye_r = np.eye(copies)
    vqq = state.cov[:n, :n]
    vqp = state.cov[:n, n:]
    vpp = state.cov[n:, n:]
    big = np.block(
        [
            [np.kron(eye_r, vqq), np.kron(eye_r, vqp)],
            [np.kron(eye_r, vqp.T), np.kron(eye_r, vpp)],
        ]
    )
    t = np.kron(np.full((1, copies), 1.0 / math.sqrt(copies)), np.eye(n))
    tf = np.zeros((2 * n, 2 * n * copies))
    tf[:n, : n * copies] = t
    tf[n:, n * copies :] = t
    return tf @ big @ tf.T


class MixtureParams(NamedTuple):
    """Squeezed-thermal state as a phase-space mixture of displaced pure states."""

    r0: float  # squeezing of the underlying pure squeezed vacuum
    sigma2: float  # variance of the Gaussian p-displacement parameter


def mixture_params(params: SqueezedThermalParams) -> MixtureParams:
    """Convert ``(r, nbar)`` to the pure-state mixture picture ``(r0, sigma^2)``.

    The q variance fixes ``exp(2 r0) = exp(2 r) (1 + 2 nbar)``; the excess
    p variance is carried by random p displacements with parameter
    variance ``sigma^2 = nbar (1 + nbar) / (exp(2 r) (1 + 2 nbar))``.  In
    covariance terms ``squeezed_thermal(r, nbar)`` equals the squeezed
    vacuum at ``r0`` plus ``diag(0, 2 sigma^2)`` per mode (the factor 2
    reflects the sqrt(2) scaling between the displacement parameter and
    the p-quadrature shift).
    """
    e2r0 = math.exp(2.0 * params.r) * (1.0 + 2.0 * params.nbar)
    sigma2 = params.nbar * (1.0 + params.nbar) / e2r0
    return MixtureParams(0.5 * math.log(e2r0), sigma2)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def state_to_json(state: GaussianState) -> dict:
    return {
        "n": state.n,
        "ordering": "qqpp",
        "cov": state.cov.tolist(),
        "mean": state.mean.tolist(),
    }


def state_from_json(obj: dict) -> GaussianState:
    if obj.get("ordering", "qqpp") != "qqpp":
        raise ValueError(f"unsupported quadrature ordering {obj.get('ordering')!r}")
    return GaussianState(int(obj["n"]), np.asarray(obj["cov"]), obj.get("mean"))
