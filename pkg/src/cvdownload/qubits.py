"""Dense N-qubit state-vector and density-matrix engine.

Implements exactly the operations the downloading protocol needs: cluster
state preparation, diagonal phase gates, Pauli gates, computational-basis
measurement, the two-outcome amplitude-balancing POVM, single-site
dephasing, and fidelity / trace-distance metrics.

Conventions
-----------
* Qubit order is little-endian: qubit ``i`` is bit ``i`` of the basis
  index, so ``|b_{n-1} ... b_1 b_0>`` sits at index ``sum_i b_i 2**i``.
* ``RZ(theta) = exp(-i Z theta / 2)``; relative to ``|0>``, the ``|1>``
  amplitude picks up ``exp(+i theta)``.
* State comparisons are phase-insensitive throughout (fidelity, overlap
  magnitude, trace distance); raw amplitude equality is never asserted.

Everything is dense, so register sizes are capped (default 12 qubits) to
keep memory honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, adjacency_matrix

__all__ = [
    "DEFAULT_MAX_QUBITS",
    "QubitPureState",
    "QubitDensityMatrix",
    "plus_state",
    "basis_state",
    "cluster_state",
    "apply_cz",
    "apply_cphase",
    "apply_rz",
    "apply_x",
    "apply_z",
    "measure_z",
    "MeasurementResult",
    "inner",
    "tensor",
    "dm_tensor",
    "dm_apply_cz",
    "dm_apply_cphase",
    "apply_dephasing",
    "balancing_povm_diagonals",
    "apply_balancing_povm",
    "PovmResult",
    "fidelity",
    "trace_distance",
    "stabilizer_residual",
    "postprocessing_equivalence",
]

DEFAULT_MAX_QUBITS = 12

_NORM_TOL = 1e-12


def _bit(n: int, site: int) -> np.ndarray:
    """Value of bit ``site`` for every basis index of an n-qubit register."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} qubits")
    return (np.arange(2**n) >> site) & 1


class QubitPureState:
    """Normalized pure state of ``n`` qubits stored as a dense vector."""

    __slots__ = ("n", "amps")

    def __init__(self, n: int, amps, *, normalize: bool = False):
        amps = np.array(amps, dtype=complex)
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes, got shape {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        self.n = n
        self.amps = amps

    def copy(self) -> "QubitPureState":
        return QubitPureState(self.n, self.amps)

    def density_matrix(self) -> "QubitDensityMatrix":
        return QubitDensityMatrix(self.n, np.outer(self.amps, self.amps.conj()))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "re": self.amps.real.tolist(),
            "im": self.amps.imag.tolist(),
        }

    @staticmethod
    def from_json(obj: dict) -> "QubitPureState":
        return QubitPureState(
            int(obj["n"]), np.asarray(obj["re"]) + 1j * np.asarray(obj["im"])
        )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"QubitPureState(n={self.n})"


class QubitDensityMatrix:
    """Mixed state of ``n`` qubits: Hermitian, unit trace, dense."""

    __slots__ = ("n", "rho")

    def __init__(self, n: int, rho, *, normalize: bool = False):
        rho = np.array(rho, dtype=complex)
        dim = 2**n
        if rho.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        herm_dev = float(np.abs(rho - rho.conj().T).max())
        if herm_dev > 1e-12:
            raise ValueError(f"matrix is not Hermitian (deviation {herm_dev:.3e})")
        tr = float(rho.trace().real)
        if normalize:
            if tr <= 0.0:
                raise ValueError("cannot normalize: trace is not positive")
            rho = rho / tr
        elif abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace is {tr!r}, expected 1")
        self.n = n
        self.rho = rho

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho).min())

    def purity(self) -> float:
        return float(np.vdot(self.rho, self.rho).real)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "re": self.rho.real.tolist(),
            "im": self.rho.imag.tolist(),
        }

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"QubitDensityMatrix(n={self.n})"


# ---------------------------------------------------------------------------
# state preparation
# ---------------------------------------------------------------------------

def plus_state(n: int) -> QubitPureState:
    """Product state ``|+>^n``."""
    return QubitPureState(n, np.full(2**n, 2 ** (-n / 2), dtype=complex))


def basis_state(n: int, bits) -> QubitPureState:
    """Computational basis state.  ``bits`` is an index or a bit sequence."""
    if np.isscalar(bits):
        index = int(bits)
    else:
        index = sum(int(b) << i for i, b in enumerate(bits))
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return QubitPureState(n, amps)


def cluster_state(graph: Graph, max_qubits: int = DEFAULT_MAX_QUBITS) -> QubitPureState:
    """Graph state ``prod_edges CZ_ij |+>^n``.

    Every amplitude has modulus ``2**(-n/2)``; the edge set only toggles
    signs ``(-1)**(b_i b_j)``.
    """
    if graph.n > max_qubits:
        raise ValueError(
            f"{graph.n} qubits exceeds the dense-simulation cap of {max_qubits}"
        )
    psi = plus_state(graph.n)
    for i, j in graph.edges:
        psi = apply_cz(psi, i, j)
    return psi


# ---------------------------------------------------------------------------
# gates on pure states
# ---------------------------------------------------------------------------

def apply_cz(psi: QubitPureState, i: int, j: int) -> QubitPureState:
    """Controlled-Z between qubits ``i`` and ``j`` (exact sign flips)."""
    if i == j:
        raise ValueError("CZ needs two distinct qubits")
    both = _bit(psi.n, i) & _bit(psi.n, j)
    amps = psi.amps.copy()
    amps[both == 1] *= -1.0
    return QubitPureState(psi.n, amps)


def apply_cphase(psi: QubitPureState, i: int, j: int, angle: float) -> QubitPureState:
    """Diagonal two-qubit phase ``exp(i * angle * b_i * b_j)``.

    ``angle = pi`` reproduces CZ up to float round-off in the phase; use
    :func:`apply_cz` when exact signs matter.
    """
    if i == j:
        raise ValueError("CPHASE needs two distinct qubits")
    both = _bit(psi.n, i) & _bit(psi.n, j)
    amps = psi.amps * np.where(both == 1, np.exp(1j * angle), 1.0)
    return QubitPureState(psi.n, amps)


def apply_rz(psi: QubitPureState, site: int, theta: float) -> QubitPureState:
    """``RZ(theta) = exp(-i Z theta / 2)`` on one qubit."""
    b = _bit(psi.n, site)
    phase = np.where(b == 1, np.exp(0.5j * theta), np.exp(-0.5j * theta))
    return QubitPureState(psi.n, psi.amps * phase)


def apply_x(psi: QubitPureState, site: int) -> QubitPureState:
    _bit(psi.n, site)
    flipped = np.arange(2**psi.n) ^ (1 << site)
    return QubitPureState(psi.n, psi.amps[flipped])


def apply_z(psi: QubitPureState, site: int) -> QubitPureState:
    amps = psi.amps.copy()
    amps[_bit(psi.n, site) == 1] *= -1.0
    return QubitPureState(psi.n, amps)


@dataclass(frozen=True)
class MeasurementResult:
    outcome: int
    probability: float
    state: QubitPureState


def measure_z(
    psi: QubitPureState,
    site: int,
    rng: np.random.Generator | None = None,
    force: int | None = None,
) -> MeasurementResult:
    """Computational-basis measurement of one qubit.

    The outcome is drawn from the Born rule unless ``force`` fixes it (in
    which case the returned probability is still the Born weight of that
    branch).  The post-measurement state is renormalized.
    """
    b = _bit(psi.n, site)
    p1 = float(np.sum(np.abs(psi.amps[b == 1]) ** 2))
    p1 = min(max(p1, 0.0), 1.0)
    probs = (1.0 - p1, p1)
    if force is not None:
        outcome = int(force)
        if outcome not in (0, 1):
            raise ValueError(f"forced outcome must be 0 or 1, got {force}")
    else:
        if rng is None:
            raise ValueError("measure_z needs an rng when no outcome is forced")
        outcome = int(rng.random() < p1)
    if probs[outcome] <= 0.0:
        raise ValueError(f"outcome {outcome} has zero probability")
    amps = np.where(b == outcome, psi.amps, 0.0)
    amps = amps / math.sqrt(probs[outcome])
    return MeasurementResult(outcome, probs[outcome], QubitPureState(psi.n, amps))


def inner(a: QubitPureState, b: QubitPureState) -> complex:
    if a.n != b.n:
        raise ValueError("states act on different register sizes")
    return complex(np.vdot(a.amps, b.amps))


def tensor(states: list[QubitPureState]) -> QubitPureState:
    """Tensor product with qubit 0 of ``states[0]`` as the least significant bit."""
    amps = np.ones(1, dtype=complex)
    n = 0
    for s in states:
        amps = np.kron(s.amps, amps)
        n += s.n
    return QubitPureState(n, amps)


# ---------------------------------------------------------------------------
# density-matrix operations
# ---------------------------------------------------------------------------

def dm_tensor(dms: list[QubitDensityMatrix]) -> QubitDensityMatrix:
    """Tensor product, same bit ordering as :func:`tensor`."""
    rho = np.ones((1, 1), dtype=complex)
    n = 0
    for d in dms:
        rho = np.kron(d.rho, rho)
        n += d.n
    return QubitDensityMatrix(n, rho)


def dm_apply_cz(rho: QubitDensityMatrix, i: int, j: int) -> QubitDensityMatrix:
    if i == j:
        raise ValueError("CZ needs two distinct qubits")
    both = _bit(rho.n, i) & _bit(rho.n, j)
    sign = np.where(both == 1, -1.0, 1.0)
    return QubitDensityMatrix(rho.n, rho.rho * np.outer(sign, sign))


def dm_apply_cphase(
    rho: QubitDensityMatrix, i: int, j: int, angle: float
) -> QubitDensityMatrix:
    if i == j:
        raise ValueError("CPHASE needs two distinct qubits")
    both = _bit(rho.n, i) & _bit(rho.n, j)
    phase = np.where(both == 1, np.exp(1j * angle), 1.0)
    return QubitDensityMatrix(rho.n, rho.rho * np.outer(phase, phase.conj()))


def apply_dephasing(
    rho: QubitDensityMatrix, site: int, p_phi: float
) -> QubitDensityMatrix:
    """Phase-flip channel ``rho -> (1 - p) rho + p Z rho Z`` on one qubit."""
    if not 0.0 <= p_phi <= 0.5:
        raise ValueError(f"dephasing probability must be in [0, 1/2], got {p_phi}")
    z = np.where(_bit(rho.n, site) == 1, -1.0, 1.0)
    flipped = z[:, None] * rho.rho * z[None, :]
    return QubitDensityMatrix(rho.n, (1.0 - p_phi) * rho.rho + p_phi * flipped)


# ---------------------------------------------------------------------------
# amplitude-balancing POVM
# ---------------------------------------------------------------------------

def balancing_povm_diagonals(gamma: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Single-qubit POVM diagonals ``(m_keep, m_delete, deleted_bit)``.

    For imbalance ``gamma < 1`` (the ``|1>`` amplitude dominated by
    ``|0>``): ``m_keep = diag(gamma, 1)`` rebalances the superposition,
    and the delete operator ``diag(sqrt(1 - gamma^2), 0)`` collapses onto
    ``|0>``.  For ``gamma > 1`` the roles mirror with ``1/gamma`` and the
    delete branch collapses onto ``|1>``.  Both cases satisfy
    ``m_keep^2 + m_delete^2 = 1`` elementwise (completeness).
    """
    if not (gamma > 0.0 and math.isfinite(gamma)):
        raise ValueError(f"imbalance must be positive and finite, got {gamma}")
    if gamma <= 1.0:
        keep = np.array([gamma, 1.0])
        delete = np.array([math.sqrt(max(0.0, 1.0 - gamma * gamma)), 0.0])
        deleted_bit = 0
    else:
        inv = 1.0 / gamma
        keep = np.array([1.0, inv])
        delete = np.array([0.0, math.sqrt(max(0.0, 1.0 - inv * inv))])
        deleted_bit = 1
    return keep, delete, deleted_bit


@dataclass(frozen=True)
class PovmResult:
    outcome: str  # "keep" or "delete"
    probability: float
    state: QubitDensityMatrix
    collapsed_bit: int | None  # None on keep; 0/1 on delete


def apply_balancing_povm(
    rho: QubitDensityMatrix,
    site: int,
    gamma: float,
    rng: np.random.Generator | None = None,
    force: str | None = None,
) -> PovmResult:
    """Two-outcome balancing measurement on one qubit of a register.

    The keep branch restores a balanced superposition on the target qubit
    (probability ``2 min(1, gamma^2) / (1 + gamma^2)`` when the qubit was
    in the imbalanced pure state); the delete branch projects onto a
    computational basis state of known value, i.e. a located erasure.
    """
    keep, delete, deleted_bit = balancing_povm_diagonals(gamma)
    b = _bit(rho.n, site)
    w_keep = np.where(b == 1, keep[1], keep[0])
    w_del = np.where(b == 1, delete[1], delete[0])
    diag = rho.rho.diagonal().real
    p_keep = float(np.sum(w_keep**2 * diag))
    p_del = float(np.sum(w_del**2 * diag))
    if abs(p_keep + p_del - 1.0) > 1e-9:  # pragma: no cover - defensive
        raise RuntimeError("POVM branch probabilities do not sum to 1")
    if force is not None:
        if force not in ("keep", "delete"):
            raise ValueError(f"force must be 'keep' or 'delete', got {force!r}")
        outcome = force
    else:
        if rng is None:
            raise ValueError("apply_balancing_povm needs an rng or a forced outcome")
        outcome = "keep" if rng.random() < p_keep else "delete"
    weights, prob = (w_keep, p_keep) if outcome == "keep" else (w_del, p_del)
    if prob <= 0.0:
        raise ValueError(f"cannot realize zero-probability outcome {outcome!r}")
    post = weights[:, None] * rho.rho * weights[None, :] / prob
    return PovmResult(
        outcome,
        prob,
        QubitDensityMatrix(rho.n, post),
        None if outcome == "keep" else deleted_bit,
    )


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a, b) -> float:
    """Uhlmann fidelity; accepts pure states and density matrices mixed freely.

    Pure/pure reduces to ``|<a|b>|^2`` and pure/mixed to ``<psi|rho|psi>``.
    """
    pure_a = isinstance(a, QubitPureState)
    pure_b = isinstance(b, QubitPureState)
    if pure_a and pure_b:
        return float(abs(inner(a, b)) ** 2)
    if pure_a or pure_b:
        psi, rho = (a, b) if pure_a else (b, a)
        val = float(np.real(np.vdot(psi.amps, rho.rho @ psi.amps)))
        return min(max(val, 0.0), 1.0)
    s = _psd_sqrt(a.rho)
    vals = np.linalg.eigvalsh(s @ b.rho @ s)
    vals = np.clip(vals, 0.0, None)
    return float(np.sum(np.sqrt(vals)) ** 2)


def trace_distance(a, b) -> float:
    """``(1/2) || rho_a - rho_b ||_1``."""
    rho_a = a.density_matrix().rho if isinstance(a, QubitPureState) else a.rho
    rho_b = b.density_matrix().rho if isinstance(b, QubitPureState) else b.rho
    vals = np.linalg.eigvalsh(rho_a - rho_b)
    return float(0.5 * np.sum(np.abs(vals)))


# ---------------------------------------------------------------------------
# cluster-state identities
# ---------------------------------------------------------------------------

def stabilizer_residual(psi: QubitPureState, graph: Graph, vertex: int) -> float:
    """Norm of ``(X_v prod_{j ~ v} Z_j - 1) |psi>``.

    Zero exactly on the graph state of ``graph``; ``sqrt(2)`` for a state
    orthogonal to its own stabilizer image (e.g. ``|0...0>`` on an
    edgeless graph).
    """
    out = apply_x(psi, vertex)
    for i, j in graph.edges:
        if i == vertex:
            out = apply_z(out, j)
        elif j == vertex:
            out = apply_z(out, i)
    return float(np.linalg.norm(out.amps - psi.amps))


def postprocessing_equivalence(graph: Graph, l, mu) -> float:
    """Deviation between the two equivalent outcome-correction orders.

    Writing each measured outcome as ``q = sqrt(pi) l + mu`` with integer
    part ``l`` and remainder ``mu``, applying ``X^{l_i}`` byproducts first
    and then phases built from the remainders alone must match applying
    phases built from the full outcomes, up to global phase:

        prod_k RZ(-theta_k) prod_i X_i^{l_i} |G>
            ~ prod_k RZ(-phi_k) |G>,

    with ``theta = sqrt(pi) A mu`` and ``phi = sqrt(pi) A q``.  Returns
    ``1 - |overlap|``, which is zero when the identity holds.
    """
    l = np.asarray(l, dtype=int)
    mu = np.asarray(mu, dtype=float)
    if l.shape != (graph.n,) or mu.shape != (graph.n,):
        raise ValueError("l and mu must each have one entry per vertex")
    a = adjacency_matrix(graph)
    psi_g = cluster_state(graph)

    lhs = psi_g
    for i in range(graph.n):
        if l[i] % 2:
            lhs = apply_x(lhs, i)
    theta = math.sqrt(math.pi) * (a @ mu)
    for k in range(graph.n):
        lhs = apply_rz(lhs, k, -theta[k])

    q = math.sqrt(math.pi) * l + mu
    phi = math.sqrt(math.pi) * (a @ q)
    rhs = psi_g
    for k in range(graph.n):
        rhs = apply_rz(rhs, k, -phi[k])

    return float(1.0 - abs(inner(lhs, rhs)))
