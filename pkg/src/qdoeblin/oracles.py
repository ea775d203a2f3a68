"""Independent verification machinery.

Brute-force contraction and expansion estimators on the Bloch sphere,
hockey-stick and classical f-divergence evaluations, the dephasing
degradation identity for generalized amplitude damping, and the classical
binary-input symmetric-output (BISO) coefficient suite.

Everything here avoids the semidefinite solver except
:func:`classical_reverse_alpha`, which uses it only as a tiny LP feasibility
backend, so these values can cross-check the SDP coefficient routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hermlin, sdpcore
from .channel import (
    QuantumChannel,
    compose,
    dephasing,
    depolarizing,
    gad,
    generalized_depolarizing,
)

SPHERE_POINTS = 10_000
REFINE_STEPS = 20

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULIS = (_PAULI_X, _PAULI_Y, _PAULI_Z)


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform unit vectors on the sphere, golden-angle spiral."""
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _require_qubit(channel: QuantumChannel) -> None:
    if channel.d_in != 2 or channel.d_out != 2:
        raise ValueError(
            f"needs a qubit channel, got ({channel.d_in}, {channel.d_out})"
        )


def _pauli_components(channel: QuantumChannel) -> tuple[np.ndarray, np.ndarray]:
    """Images of the Paulis, reduced to the data that fixes their trace norm.

    The image of a traceless Hermitian u . sigma is again traceless
    Hermitian, [[m, c], [conj(c), -m]], and its trace norm is
    2 sqrt(m^2 + |c|^2).
    """
    images = [channel(p) for p in _PAULIS]
    diag = np.array([im[0, 0].real for im in images])
    off = np.array([im[0, 1] for im in images])
    return diag, off


def _direction_objective(
    dirs: np.ndarray, diag: np.ndarray, off: np.ndarray
) -> np.ndarray:
    m = dirs @ diag
    c = dirs @ off
    return np.sqrt(m * m + np.abs(c) ** 2)


def _pattern_search_sphere(
    objective, u0: np.ndarray, maximize: bool, steps: int = REFINE_STEPS
) -> float:
    """Compass search in spherical angles with step halving on failure."""
    theta = float(np.arccos(np.clip(u0[2], -1.0, 1.0)))
    phi = float(np.arctan2(u0[1], u0[0]))
    sign = 1.0 if maximize else -1.0

    def value(th, ph):
        st = np.sin(th)
        u = np.array([st * np.cos(ph), st * np.sin(ph), np.cos(th)])
        return float(objective(u[None, :])[0])

    best = value(theta, phi)
    step = 0.05
    for _ in range(steps):
        moved = False
        for dth, dph in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            cand = value(theta + dth, phi + dph)
            if sign * (cand - best) > 0.0:
                best = cand
                theta += dth
                phi += dph
                moved = True
                break
        if not moved:
            step /= 2.0
    return best


def eta_tr_qubit(channel: QuantumChannel, n_points: int = SPHERE_POINTS) -> float:
    """Trace-distance contraction over orthogonal pure qubit pairs.

    A grid maximum refined locally, hence a guaranteed lower bound on the
    true supremum; the grid resolution keeps it within 1e-4.
    """
    _require_qubit(channel)
    diag, off = _pauli_components(channel)

    def objective(dirs):
        return _direction_objective(dirs, diag, off)

    dirs = fibonacci_sphere(n_points)
    vals = objective(dirs)
    u0 = dirs[int(np.argmax(vals))]
    return _pattern_search_sphere(objective, u0, maximize=True)


def eta_tr_expansion_qubit(
    channel: QuantumChannel, n_pairs: int = SPHERE_POINTS, seed: int = 7
) -> float:
    """Upper bound on the trace-distance expansion coefficient.

    Minimises the output/input trace-distance ratio over antipodal pure
    pairs, independently drawn pure pairs, and mixed pairs sampled from the
    Bloch ball, then refines the best find locally.
    """
    _require_qubit(channel)
    diag, off = _pauli_components(channel)

    def objective(dirs):
        return _direction_objective(dirs, diag, off)

    rng = np.random.default_rng(seed)
    third = n_pairs // 3
    axes = np.eye(3)
    antipodal = fibonacci_sphere(third)
    pure_a = _random_unit(rng, third)
    pure_b = _random_unit(rng, third)
    mixed_a = _random_ball(rng, n_pairs - 2 * third)
    mixed_b = _random_ball(rng, n_pairs - 2 * third)
    diffs = [2.0 * axes, 2.0 * antipodal, pure_a - pure_b, mixed_a - mixed_b]
    w = np.concatenate(diffs, axis=0)
    norms = np.linalg.norm(w, axis=1)
    keep = norms > 1e-9
    dirs = w[keep] / norms[keep, None]
    vals = objective(dirs)
    u0 = dirs[int(np.argmin(vals))]
    return _pattern_search_sphere(objective, u0, maximize=False)


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _random_ball(rng: np.random.Generator, n: int) -> np.ndarray:
    return _random_unit(rng, n) * rng.uniform(size=(n, 1)) ** (1.0 / 3.0)


@dataclass
class DivergencePair:
    """A validated pair of density matrices sharing one dimension."""

    rho: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        self.rho = hermlin.require_hermitian(np.asarray(self.rho, dtype=complex))
        self.sigma = hermlin.require_hermitian(np.asarray(self.sigma, dtype=complex))
        if self.rho.shape != self.sigma.shape:
            raise ValueError(
                f"dimension mismatch: {self.rho.shape} vs {self.sigma.shape}"
            )
        for name, mat in (("rho", self.rho), ("sigma", self.sigma)):
            if abs(np.trace(mat).real - 1.0) > 1e-8:
                raise ValueError(f"{name} must have unit trace")
            if np.linalg.eigvalsh(mat)[0] < -hermlin.PSD_TOL:
                raise ValueError(f"{name} must be positive semidefinite")

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]


def hockey_stick(rho: np.ndarray, sigma: np.ndarray, gamma: float) -> float:
    """E_gamma(rho||sigma): the trace of the positive part of rho - gamma sigma."""
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    pair = DivergencePair(rho, sigma)
    w = np.linalg.eigvalsh(pair.rho - gamma * pair.sigma)
    return float(np.sum(w[w > 0.0]))


def f_divergence_commuting(rho: np.ndarray, sigma: np.ndarray, kind: str) -> float:
    """Classical f-divergence of two diagonal density matrices.

    ``kind="chi2"`` uses f(x) = x^2 - 1 and ``kind="kl"`` uses
    f(x) = x log2 x.  Mass of rho outside the support of sigma sends the
    value to +inf for both choices; 0/0 contributes nothing.
    """
    if kind not in ("chi2", "kl"):
        raise ValueError(f"kind must be 'chi2' or 'kl', got {kind!r}")
    pair = DivergencePair(rho, sigma)
    for name, mat in (("rho", pair.rho), ("sigma", pair.sigma)):
        off = mat - np.diag(np.diag(mat))
        if np.max(np.abs(off)) > 1e-12:
            raise ValueError(f"{name} must be diagonal in the computational basis")
    p = np.clip(np.diag(pair.rho).real, 0.0, None)
    q = np.clip(np.diag(pair.sigma).real, 0.0, None)
    if np.any((q <= 1e-15) & (p > 1e-15)):
        return float("inf")
    mask = (p > 1e-15) & (q > 1e-15)
    p, q = p[mask], q[mask]
    if kind == "chi2":
        return float(np.sum(p * p / q) - 1.0)
    return float(np.sum(p * np.log2(p / q)))


def expansion_witness_hockey_stick(
    p: float, gamma: float
) -> tuple[float, float, float]:
    """State pair showing the hockey-stick expansion of depolarizing is zero.

    Picks epsilon in the open interval where the input divergence is
    positive but the depolarized outputs have none left, and returns
    (epsilon, E_in, E_out).  The interval's upper end is clipped to 1 so the
    witness stays a valid state.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    if gamma <= 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    lo = (gamma - 1.0) / gamma
    hi = min(1.0, lo * (1.0 - p / 2.0) / (1.0 - p))
    if hi <= lo:
        raise RuntimeError("empty witness interval")
    eps = 0.5 * (lo + hi)
    rho = np.diag([1.0, 0.0]).astype(complex)
    sigma = np.diag([1.0 - eps, eps]).astype(complex)
    dep = depolarizing(p)
    e_in = hockey_stick(rho, sigma, gamma)
    e_out = hockey_stick(dep(rho), dep(sigma), gamma)
    return eps, e_in, e_out


def gad_dephasing_identity(p: float, eta: float) -> float:
    """Max-entry gap between dephased amplitude damping and its closed form.

    Dephasing at b = (1 - sqrt(eta))/2 after A_{p, eta} equals the
    generalized depolarizing channel at rate 1 - eta onto diag(p, 1-p);
    returns the largest absolute Choi-entry deviation.
    """
    b = 0.5 * (1.0 - np.sqrt(eta))
    left = compose(dephasing(b), gad(p, eta)).choi.matrix
    sigma = np.diag([p, 1.0 - p]).astype(complex)
    right = generalized_depolarizing(1.0 - eta, sigma).choi.matrix
    return float(np.max(np.abs(left - right)))


@dataclass
class ClassicalChannel:
    """Column-stochastic matrix P[y, x] with a BISO detection flag.

    ``is_biso`` is true when the channel has two inputs and some involution
    of the outputs swaps their roles.
    """

    matrix: np.ndarray
    is_biso: bool = field(init=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ValueError("matrix must be a 2-d stochastic array")
        if np.min(mat) < -1e-12:
            raise ValueError("entries must be nonnegative")
        sums = mat.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > 1e-12:
            raise ValueError("columns must sum to 1")
        self.matrix = np.clip(mat, 0.0, None)
        self.is_biso = (
            mat.shape[1] == 2 and _biso_involution(self.matrix) is not None
        )

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[1]


def _biso_involution(mat: np.ndarray, tol: float = 1e-9) -> np.ndarray | None:
    """Greedy search for an output involution swapping the two inputs."""
    m = mat.shape[0]
    c0, c1 = mat[:, 0], mat[:, 1]
    perm = np.full(m, -1, dtype=int)
    for y in range(m):
        if perm[y] >= 0:
            continue
        if abs(c0[y] - c1[y]) <= tol:
            perm[y] = y
            continue
        for z in range(m):
            if perm[z] >= 0 or z == y:
                continue
            if abs(c0[y] - c1[z]) <= tol and abs(c0[z] - c1[y]) <= tol:
                perm[y] = z
                perm[z] = y
                break
        else:
            return None
    return perm


def bsc(p: float) -> ClassicalChannel:
    """Binary symmetric channel with crossover probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return ClassicalChannel(np.array([[1.0 - p, p], [p, 1.0 - p]]))


def bec(eps: float) -> ClassicalChannel:
    """Binary erasure channel; outputs are (0, 1, erased)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    return ClassicalChannel(
        np.array([[1.0 - eps, 0.0], [0.0, 1.0 - eps], [eps, eps]])
    )


def random_biso(rng: np.random.Generator, n_outputs: int | None = None) -> ClassicalChannel:
    """Random BISO channel built from symmetric output pairs.

    Outputs come in swapped pairs plus an optional fixed point, so the
    constructed matrix is BISO for every draw.
    """
    if n_outputs is None:
        n_outputs = int(rng.integers(2, 7))
    if n_outputs < 2:
        raise ValueError("need at least 2 outputs")
    col0 = rng.dirichlet(np.ones(n_outputs))
    col1 = np.empty_like(col0)
    n_paired = n_outputs - (n_outputs % 2)
    for y in range(0, n_paired, 2):
        col1[y], col1[y + 1] = col0[y + 1], col0[y]
    if n_outputs % 2:
        col1[-1] = col0[-1]
    return ClassicalChannel(np.stack([col0, col1], axis=1))


def classical_doeblin(c: ClassicalChannel) -> float:
    """Sum over outputs of the smallest conditional probability."""
    return float(c.matrix.min(axis=1).sum())


def binary_entropy(p: float) -> float:
    """Binary entropy in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def classical_capacity_biso(c: ClassicalChannel) -> float:
    """Capacity in bits; uniform input is optimal for BISO channels."""
    if not c.is_biso:
        raise ValueError("channel is not BISO")
    mat = c.matrix
    mean = mat.mean(axis=1)
    total = 0.0
    for x in range(2):
        col = mat[:, x]
        mask = col > 0.0
        total += 0.5 * float(np.sum(col[mask] * np.log2(col[mask] / mean[mask])))
    return total


def classical_gamma(c: ClassicalChannel) -> float:
    """1 minus the BISO capacity."""
    return 1.0 - classical_capacity_biso(c)


def _degrades_to_bsc(c: ClassicalChannel, p: float, tol: float) -> bool:
    """LP feasibility: some 2-output post-processing maps c onto BSC_p.

    The post-processing is column-stochastic with two rows, so it is fixed
    by the vector t of probabilities of outputting 0; feasibility means
    <t, P(.|0)> = 1-p and <t, P(.|1)> = p with t in [0,1]^m.  Solved as a
    minimax LP on the worst constraint violation.
    """
    m = c.n_outputs
    c0, c1 = c.matrix[:, 0], c.matrix[:, 1]
    n = m + 1
    objective = np.zeros(n)
    objective[m] = -1.0
    blocks = []
    for vec, target in ((c0, 1.0 - p), (c1, p)):
        coeffs_hi = [(i, np.array([[vec[i]]])) for i in range(m) if vec[i] != 0.0]
        coeffs_hi.append((m, np.array([[-1.0]])))
        blocks.append(sdpcore.SdpBlock(c=np.array([[target]]), coeffs=coeffs_hi))
        coeffs_lo = [(i, np.array([[-vec[i]]])) for i in range(m) if vec[i] != 0.0]
        coeffs_lo.append((m, np.array([[-1.0]])))
        blocks.append(sdpcore.SdpBlock(c=np.array([[-target]]), coeffs=coeffs_lo))
    lower = np.zeros(n)
    upper = np.ones(n)
    upper[m] = 2.0
    problem = sdpcore.SdpProblem(
        num_vars=n, objective=objective, blocks=blocks, lower=lower, upper=upper
    )
    # Degenerate vertices can stall below the gap target; 40 iterations put
    # the violation estimate well inside the bisection slack either way.
    sol = sdpcore.solve(problem, tol=1e-8, max_iter=40)
    return -sol.objective_value <= tol


def classical_reverse_alpha(c: ClassicalChannel, p_tol: float = 1e-5) -> float:
    """Binary entropy of the least noisy BSC the channel degrades onto.

    Bisection over the crossover probability in [0, 1/2]; returns the
    entropy at the feasible end of the final bracket, so the reported value
    is always achievable by an explicit post-processing.
    """
    if not c.is_biso:
        raise ValueError("channel is not BISO")
    feas_tol = 1e-6
    if _degrades_to_bsc(c, 0.0, feas_tol):
        return 0.0
    lo, hi = 0.0, 0.5
    while hi - lo > p_tol:
        mid = 0.5 * (lo + hi)
        if _degrades_to_bsc(c, mid, feas_tol):
            hi = mid
        else:
            lo = mid
    return binary_entropy(hi)
