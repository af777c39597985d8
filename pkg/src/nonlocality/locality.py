"""Behaviors, common-cause models and the local polytope.

A behavior is the table ``P(a, b | x, y)`` stored as an array indexed
``[x, y, a, b]``.  A :class:`LocalModel` is a finite set of common causes
``μ`` with probabilities ``λ_μ`` and, for each cause, independent response
tables ``P(a | x, μ)`` and ``P(b | y, μ)``; mixing them gives a behavior.

Membership of a behavior in the convex hull of deterministic strategies is
decided by a phase-one simplex over the strategy weights.  Both possible
verdicts come with a certificate that is checked here without trusting the
solver: a weight vector that reproduces the behavior, or a linear functional
that every deterministic strategy satisfies and the behavior violates.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._simplex import phase_one
from .exceptions import ConsistencyError, DomainError, NumericError, ShapeError, SizeError
from .linalg import PAULIS, hermitian_eigh
from .quantum import DensityOperator, ProjectiveMeasurement, joint_probabilities

MAX_STRATEGIES = 10**6
PROB_TOL = 1e-10
LP_TOL = 1e-9
CERT_TOL = 1e-8
SAMPLE_BLOCK = 1 << 16


@dataclass(frozen=True)
class Scenario:
    """Numbers of settings and outcomes per party (outcomes uniform across settings)."""

    settings_a: int
    settings_b: int
    outcomes_a: int = 2
    outcomes_b: int = 2

    def __post_init__(self):
        if self.settings_a < 1 or self.settings_b < 1:
            raise DomainError("each party needs at least one setting")
        if self.outcomes_a < 2 or self.outcomes_b < 2:
            raise DomainError("each setting needs at least two outcomes")
        if self.n_strategies > MAX_STRATEGIES:
            raise SizeError(
                f"{self.n_strategies} deterministic strategies exceed the guard of {MAX_STRATEGIES}"
            )

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.settings_a, self.settings_b, self.outcomes_a, self.outcomes_b)

    @property
    def n_strategies(self) -> int:
        return self.outcomes_a**self.settings_a * self.outcomes_b**self.settings_b

    @classmethod
    def chsh(cls) -> "Scenario":
        return cls(2, 2, 2, 2)


@dataclass(frozen=True, eq=False)
class BehaviorTable:
    """Conditional distribution ``p[x, y, a, b] = P(a, b | x, y)``."""

    scenario: Scenario
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != self.scenario.shape:
            raise ShapeError(f"table shape {p.shape} does not match scenario {self.scenario.shape}")
        if not np.all(np.isfinite(p)):
            raise DomainError("behavior contains non-finite entries")
        if p.min() < -1e-12 or p.max() > 1.0 + 1e-12:
            raise DomainError("behavior entries must lie in [0, 1]")
        sums = p.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > PROB_TOL:
            raise DomainError(f"P(.,.|x,y) does not sum to 1 (worst {sums.flat[np.argmax(np.abs(sums - 1))]!r})")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def marginal_a(self) -> np.ndarray:
        """``P(a | x, y)`` indexed ``[x, y, a]``."""
        return self.p.sum(axis=3)

    def marginal_b(self) -> np.ndarray:
        """``P(b | x, y)`` indexed ``[x, y, b]``."""
        return self.p.sum(axis=2)

    def correlators(self) -> np.ndarray:
        """``E(x, y)`` for two-outcome settings, first outcome counted as +1."""
        if self.scenario.outcomes_a != 2 or self.scenario.outcomes_b != 2:
            raise ShapeError("correlators need two outcomes per setting")
        s = np.array([1.0, -1.0])
        return np.einsum("xyab,a,b->xy", self.p, s, s)


@dataclass(frozen=True, eq=False)
class LocalModel:
    """Finite common-cause model.

    Attributes
    ----------
    weights : ndarray, shape (k,)
        Probabilities ``λ_μ`` of the causes.
    response_a : ndarray, shape (k, settings_a, outcomes_a)
        ``P(a | x, μ)``.
    response_b : ndarray, shape (k, settings_b, outcomes_b)
        ``P(b | y, μ)``.
    """

    scenario: Scenario
    weights: np.ndarray
    response_a: np.ndarray
    response_b: np.ndarray

    def __post_init__(self):
        s = self.scenario
        w = np.array(self.weights, dtype=float)
        ra = np.array(self.response_a, dtype=float)
        rb = np.array(self.response_b, dtype=float)
        k = w.shape[0] if w.ndim == 1 else -1
        if k < 1:
            raise ShapeError("weights must be a non-empty vector")
        if ra.shape != (k, s.settings_a, s.outcomes_a) or rb.shape != (k, s.settings_b, s.outcomes_b):
            raise ShapeError(
                f"response shapes {ra.shape}, {rb.shape} do not match {k} causes in {s}"
            )
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("cause weights must be non-negative and sum to 1")
        for name, r in (("A", ra), ("B", rb)):
            if np.any(r < 0) or np.max(np.abs(r.sum(axis=2) - 1.0)) > 1e-12:
                raise DomainError(f"party {name} responses are not probability distributions")
        for arr in (w, ra, rb):
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "response_a", ra)
        object.__setattr__(self, "response_b", rb)

    @classmethod
    def from_unnormalized(cls, scenario, weights, response_a, response_b) -> "LocalModel":
        """Build a model from non-negative weights of any positive total."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise DomainError("weights must be non-negative with a positive sum")
        return cls(scenario, w / w.sum(), response_a, response_b)

    @property
    def n_causes(self) -> int:
        return self.weights.shape[0]


@dataclass
class LhvResult:
    """Verdict of :func:`lhv_membership` with its certificate.

    For a feasible behavior ``weights`` is a distribution over the strategies
    of :func:`enumerate_deterministic_strategies` (same order).  For an
    infeasible one, ``dual`` holds coefficients ``c[x, y, a, b]`` such that
    ``c·d <= bound`` for every deterministic strategy ``d`` while
    ``c·p = bound + gap``.
    """

    feasible: bool
    scenario: Scenario
    weights: np.ndarray | None = None
    dual: np.ndarray | None = None
    bound: float | None = None
    gap: float = 0.0
    reconstruction_error: float | None = None
    iterations: int = 0

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def local_model(self, cutoff: float = 0.0) -> LocalModel:
        """The certificate as an explicit :class:`LocalModel` of point-mass causes."""
        if not self.feasible:
            raise DomainError("an infeasible verdict has no local model")
        keep = np.flatnonzero(self.weights > cutoff)
        s = self.scenario
        ra = np.zeros((keep.size, s.settings_a, s.outcomes_a))
        rb = np.zeros((keep.size, s.settings_b, s.outcomes_b))
        for row, idx in enumerate(keep):
            sa, sb = _strategy_assignment(s, idx)
            ra[row, np.arange(s.settings_a), sa] = 1.0
            rb[row, np.arange(s.settings_b), sb] = 1.0
        return LocalModel.from_unnormalized(s, self.weights[keep], ra, rb)


def behavior_from_state(
    rho: DensityOperator,
    meas_a: list[ProjectiveMeasurement],
    meas_b: list[ProjectiveMeasurement],
) -> BehaviorTable:
    """Born-rule behavior of ``rho`` for the given per-setting measurements."""
    n_a = {m.n_outcomes for m in meas_a}
    n_b = {m.n_outcomes for m in meas_b}
    if len(n_a) != 1 or len(n_b) != 1:
        raise ShapeError("all settings of a party must have the same number of outcomes")
    scenario = Scenario(len(meas_a), len(meas_b), n_a.pop(), n_b.pop())
    p = np.empty(scenario.shape)
    for x, ma in enumerate(meas_a):
        for y, mb in enumerate(meas_b):
            p[x, y] = joint_probabilities(rho, ma, mb)
    return BehaviorTable(scenario, p)


def factorization_residual(joint, marg_a, marg_b) -> float:
    """``max |P(a, b) - P(a) P(b)|`` for one common cause.

    Raises
    ------
    ConsistencyError
        If ``marg_a``/``marg_b`` differ from the marginals of ``joint`` by more than 1e-8.
    """
    joint = np.asarray(joint, dtype=float)
    marg_a = np.asarray(marg_a, dtype=float)
    marg_b = np.asarray(marg_b, dtype=float)
    if joint.shape != (marg_a.size, marg_b.size):
        raise ShapeError(f"joint shape {joint.shape} vs marginals ({marg_a.size}, {marg_b.size})")
    if abs(joint.sum() - 1.0) > PROB_TOL:
        raise DomainError("joint distribution does not sum to 1")
    dev = max(np.max(np.abs(joint.sum(axis=1) - marg_a)), np.max(np.abs(joint.sum(axis=0) - marg_b)))
    if dev > 1e-8:
        raise ConsistencyError(f"supplied marginals deviate from the joint by {dev:.3e}")
    return float(np.max(np.abs(joint - np.outer(marg_a, marg_b))))


def mix_local_model(model: LocalModel) -> BehaviorTable:
    """``P(a, b | x, y) = Σ_μ λ_μ P(a | x, μ) P(b | y, μ)``."""
    p = np.einsum("m,mxa,myb->xyab", model.weights, model.response_a, model.response_b)
    return BehaviorTable(model.scenario, p)


def _strategy_assignment(s: Scenario, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n_b = s.outcomes_b**s.settings_b
    ia, ib = divmod(index, n_b)
    sa = np.unravel_index(ia, (s.outcomes_a,) * s.settings_a)
    sb = np.unravel_index(ib, (s.outcomes_b,) * s.settings_b)
    return tuple(int(v) for v in sa), tuple(int(v) for v in sb)


def deterministic_matrix(s: Scenario) -> np.ndarray:
    """Deterministic behaviors as columns of a ``(prod(shape), n_strategies)`` 0/1 matrix.

    Column order matches :func:`enumerate_deterministic_strategies`.
    """
    assign_a = np.array(list(itertools.product(range(s.outcomes_a), repeat=s.settings_a)), dtype=int)
    assign_b = np.array(list(itertools.product(range(s.outcomes_b), repeat=s.settings_b)), dtype=int)
    # onehot_a[i, x, a] = 1 iff assignment i answers a to setting x
    onehot_a = (assign_a[:, :, None] == np.arange(s.outcomes_a)).astype(float)
    onehot_b = (assign_b[:, :, None] == np.arange(s.outcomes_b)).astype(float)
    d = np.einsum("ixa,jyb->xyabij", onehot_a, onehot_b)
    return d.reshape(int(np.prod(s.shape)), s.n_strategies)


def enumerate_deterministic_strategies(s: Scenario) -> list[BehaviorTable]:
    """All deterministic behaviors of ``s``.

    Order is lexicographic in ``(A assignment, B assignment)`` where an
    assignment is the tuple of outcomes for settings ``0, 1, ...`` and the
    B assignment varies fastest.
    """
    d = deterministic_matrix(s)
    return [BehaviorTable(s, d[:, j].reshape(s.shape)) for j in range(d.shape[1])]


def lhv_membership(b: BehaviorTable, tol: float = LP_TOL) -> LhvResult:
    """Decide whether ``b`` lies in the local polytope.

    Solves ``D q = p, Σ q = 1, q >= 0`` with a phase-one simplex (Bland's
    rule), where the columns of ``D`` are the deterministic strategies.  The
    returned certificate is re-verified independently of the tableau; if it
    does not survive that check a :class:`NumericError` is raised instead of
    a verdict.
    """
    s = b.scenario
    d = deterministic_matrix(s)
    p = b.p.ravel()
    a_mat = np.vstack([d, np.ones((1, d.shape[1]))])
    rhs = np.concatenate([p, [1.0]])
    res = phase_one(a_mat, rhs, tol=tol)

    if res.infeasibility <= tol:
        q = np.clip(res.x, 0.0, None)
        q = q / q.sum()
        err = float(np.max(np.abs(d @ q - p)))
        if err > CERT_TOL:
            raise NumericError(f"feasible verdict reconstructs the behavior only to {err:.3e}")
        return LhvResult(True, s, weights=q, reconstruction_error=err, iterations=res.iterations)

    coeffs = res.y[:-1]
    vertex_values = coeffs @ d
    bound = float(vertex_values.max())
    gap = float(coeffs @ p - bound)
    if gap <= CERT_TOL:
        raise NumericError(
            f"infeasible verdict but the separating functional has gap {gap:.3e} <= {CERT_TOL:.0e}"
        )
    return LhvResult(
        False, s, dual=coeffs.reshape(s.shape), bound=bound, gap=gap, iterations=res.iterations
    )


def chsh_value(b: BehaviorTable) -> float:
    """``S = E(0,0) + E(0,1) + E(1,0) - E(1,1)``; outcomes map to ±1 in label order."""
    if b.scenario.shape != (2, 2, 2, 2):
        raise ShapeError(f"CHSH needs the 2x2x2x2 scenario, got {b.scenario.shape}")
    e = b.correlators()
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def chsh_variants(b: BehaviorTable) -> np.ndarray:
    """All eight CHSH expressions: each placement of the minus sign, both overall signs."""
    if b.scenario.shape != (2, 2, 2, 2):
        raise ShapeError(f"CHSH needs the 2x2x2x2 scenario, got {b.scenario.shape}")
    e = b.correlators()
    total = e.sum()
    vals = [total - 2 * e[x, y] for x in range(2) for y in range(2)]
    return np.array(vals + [-v for v in vals])


def correlation_matrix(rho: DensityOperator) -> np.ndarray:
    """``T[k, l] = Tr(ρ σ_k ⊗ σ_l)`` for a two-qubit state."""
    if rho.dims != (2, 2):
        raise ShapeError(f"correlation matrix needs a two-qubit state, got dims {rho.dims}")
    return np.array(
        [[np.trace(rho.matrix @ np.kron(sk, sl)).real for sl in PAULIS] for sk in PAULIS]
    )


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-14 else fallback


def chsh_optimal_settings(
    rho: DensityOperator,
) -> tuple[list[ProjectiveMeasurement], list[ProjectiveMeasurement]]:
    """Spin measurements attaining :func:`chsh_max` for a two-qubit state.

    Bob's directions are ``cos θ c1 ± sin θ c2`` with ``c1, c2`` the leading
    eigenvectors of ``TᵀT`` and ``tan θ = sqrt(t2/t1)``; Alice measures along
    ``T(b0 + b1)`` and ``T(b0 - b1)``.
    """
    t = correlation_matrix(rho)
    vals, vecs = hermitian_eigh(t.T @ t)
    vecs = vecs.real
    t1, t2 = max(vals[2], 0.0), max(vals[1], 0.0)
    c1, c2 = vecs[:, 2], vecs[:, 1]
    theta = np.arctan2(np.sqrt(t2), np.sqrt(t1))
    b0 = np.cos(theta) * c1 + np.sin(theta) * c2
    b1 = np.cos(theta) * c1 - np.sin(theta) * c2
    a0 = _unit(t @ (b0 + b1), c1)
    a1 = _unit(t @ (b0 - b1), c2)
    meas_a = [ProjectiveMeasurement.qubit(a0), ProjectiveMeasurement.qubit(a1)]
    meas_b = [ProjectiveMeasurement.qubit(b0), ProjectiveMeasurement.qubit(b1)]
    return meas_a, meas_b


def chsh_max(rho: DensityOperator) -> float:
    """Maximal CHSH value over spin measurements: ``2 sqrt(t1 + t2)``.

    ``t1 >= t2`` are the two largest eigenvalues of ``TᵀT`` for the
    correlation matrix ``T`` of the two-qubit state.
    """
    t = correlation_matrix(rho)
    vals, _ = hermitian_eigh(t.T @ t)
    return float(2.0 * np.sqrt(max(vals[2] + vals[1], 0.0)))


def canonical_chsh_settings() -> tuple[list[ProjectiveMeasurement], list[ProjectiveMeasurement]]:
    """Fixed settings for which the singlet reaches ``S = +2√2``.

    Alice measures ``Z`` and ``X``; Bob measures along ``-(Z + X)/√2`` and
    ``-(Z - X)/√2``.
    """
    r = 1.0 / np.sqrt(2.0)
    meas_a = [ProjectiveMeasurement.qubit([0, 0, 1]), ProjectiveMeasurement.qubit([1, 0, 0])]
    meas_b = [ProjectiveMeasurement.qubit([-r, 0, -r]), ProjectiveMeasurement.qubit([r, 0, -r])]
    return meas_a, meas_b


def no_signaling_residual(b: BehaviorTable) -> float:
    """Largest change of one party's marginal when only the other party's setting changes."""
    ma = b.marginal_a()  # [x, y, a]
    mb = b.marginal_b()  # [x, y, b]
    res_a = np.max(ma.max(axis=1) - ma.min(axis=1))
    res_b = np.max(mb.max(axis=0) - mb.min(axis=0))
    return float(max(res_a, res_b))


def default_schedule(s: Scenario) -> list[tuple[int, int]]:
    """Round-robin over all setting pairs, ``x`` outer and ``y`` inner."""
    return [(x, y) for x in range(s.settings_a) for y in range(s.settings_b)]


def block_seed(seed: int, block: int) -> np.random.SeedSequence:
    """Seed of trial block ``block``: ``SeedSequence(seed, spawn_key=(block,))``.

    This is the ``block``-th child that ``SeedSequence(seed).spawn`` would
    produce, so the stream of each block does not depend on how blocks are
    distributed over workers.
    """
    return np.random.SeedSequence(entropy=seed, spawn_key=(block,))


def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    # inverse-CDF lookup per row; clipping absorbs a final cdf entry of 1 - eps
    return np.minimum((u[:, None] >= cdf).sum(axis=1), cdf.shape[1] - 1)


def sample_block(model: LocalModel, n: int, seed: int, block: int, schedule) -> np.ndarray:
    """Counts ``[x, y, a, b]`` for trials ``block*SAMPLE_BLOCK ... `` up to ``n``."""
    s = model.scenario
    start = block * SAMPLE_BLOCK
    stop = min(n, start + SAMPLE_BLOCK)
    sched = np.asarray(schedule, dtype=int)
    k = np.arange(start, stop)
    xs = sched[k % len(sched), 0]
    ys = sched[k % len(sched), 1]
    rng = np.random.Generator(np.random.PCG64(block_seed(seed, block)))
    u = rng.random((3, k.size))
    mu = _draw(np.cumsum(model.weights)[None, :], u[0])
    a = _draw(np.cumsum(model.response_a[mu, xs], axis=1), u[1])
    b = _draw(np.cumsum(model.response_b[mu, ys], axis=1), u[2])
    counts = np.zeros(s.shape, dtype=np.int64)
    np.add.at(counts, (xs, ys, a, b), 1)
    return counts


@dataclass
class SampleResult:
    """Raw counts and relative frequencies from :func:`sample_local_model`.

    ``frequencies`` holds NaN for setting pairs that received no trials;
    those pairs are listed in ``missing``.
    """

    scenario: Scenario
    counts: np.ndarray
    trials: np.ndarray
    frequencies: np.ndarray
    missing: list = field(default_factory=list)

    @property
    def behavior(self) -> BehaviorTable:
        if self.missing:
            raise DomainError(f"no trials for setting pairs {self.missing}")
        return BehaviorTable(self.scenario, self.frequencies)


def sample_local_model(
    model: LocalModel,
    n: int,
    seed: int = 0,
    settings_schedule=None,
    workers: int = 1,
) -> SampleResult:
    """Simulate ``n`` trials of a common-cause model.

    Trial ``k`` uses setting pair ``schedule[k % len(schedule)]``; a cause
    ``μ ~ λ`` is drawn, then ``a ~ P(.|x, μ)`` and ``b ~ P(.|y, μ)``
    independently.  Trials are processed in fixed blocks of
    ``SAMPLE_BLOCK`` with per-block seeds from :func:`block_seed`, so the
    counts are identical for any ``workers``.
    """
    if n < 1:
        raise DomainError("need at least one trial")
    s = model.scenario
    schedule = default_schedule(s) if settings_schedule is None else list(settings_schedule)
    if not schedule:
        raise DomainError("settings schedule is empty")
    for x, y in schedule:
        if not (0 <= x < s.settings_a and 0 <= y < s.settings_b):
            raise DomainError(f"setting pair {(x, y)} outside the scenario")
    n_blocks = -(-n // SAMPLE_BLOCK)

    def run(block):
        return sample_block(model, n, seed, block, schedule)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(i) for i in range(n_blocks)]
    counts = np.sum(parts, axis=0)
    trials = counts.sum(axis=(2, 3))
    missing = [(int(x), int(y)) for x, y in zip(*np.nonzero(trials == 0))]
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = counts / trials[:, :, None, None]
    return SampleResult(s, counts, trials, freq, missing)
