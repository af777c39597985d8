"""Density operators, projective measurements and Born-rule probabilities.

A bipartite state lives on ``C^dimA ⊗ C^dimB``; a single-party state is
represented with ``dimB == 1``.  Constructors validate their output, so any
:class:`DensityOperator` in hand is Hermitian, unit-trace and PSD to 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError, NumericError, ShapeError
from .linalg import (
    DEFAULT_TOL,
    PAULIS,
    as_matrix,
    kron,
    partial_trace,
    validate_density,
)

CLAMP_TOL = 1e-12
SUM_TOL = 1e-10
WEIGHT_TOL = 1e-12

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated quantum state on ``C^dim_a ⊗ C^dim_b``."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int = 1

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if self.dim_a < 1 or self.dim_b < 1 or m.shape != (self.dim_a * self.dim_b,) * 2:
            raise ShapeError(
                f"matrix of shape {m.shape} does not match dims ({self.dim_a}, {self.dim_b})"
            )
        report = validate_density(m, DEFAULT_TOL)
        if not report.passed:
            raise DomainError(f"not a density operator: {report.describe()}")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def is_bipartite(self) -> bool:
        return self.dim_b > 1

    def __repr__(self):
        return f"DensityOperator(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """A complete set of orthogonal projectors with outcome labels.

    Projectors are checked to be Hermitian, idempotent, mutually orthogonal
    and to sum to the identity, all to 1e-9.
    """

    dim: int
    projectors: tuple
    labels: tuple

    def __post_init__(self):
        projs = tuple(_readonly(as_matrix(p)) for p in self.projectors)
        labels = tuple(self.labels) if self.labels is not None else tuple(range(len(projs)))
        if len(projs) < 1 or len(labels) != len(projs):
            raise ShapeError("need one label per projector and at least one projector")
        for p in projs:
            if p.shape != (self.dim, self.dim):
                raise ShapeError(f"projector of shape {p.shape} in a dimension-{self.dim} measurement")
            if np.max(np.abs(p - p.conj().T)) > DEFAULT_TOL:
                raise DomainError("projector is not Hermitian")
            if np.max(np.abs(p @ p - p)) > DEFAULT_TOL:
                raise DomainError("projector is not idempotent")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(projs[i] @ projs[j])) > DEFAULT_TOL:
                    raise DomainError(f"projectors {i} and {j} are not orthogonal")
        if np.max(np.abs(sum(projs) - np.eye(self.dim))) > DEFAULT_TOL:
            raise DomainError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", labels)

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)

    @classmethod
    def from_basis(cls, vectors, labels=None) -> "ProjectiveMeasurement":
        """Rank-one projectors ``|v_i><v_i|`` onto the columns of ``vectors``."""
        v = as_matrix(vectors)
        projs = [np.outer(v[:, i], v[:, i].conj()) for i in range(v.shape[1])]
        return cls(v.shape[0], tuple(projs), labels)

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        return cls.from_basis(np.eye(dim))

    @classmethod
    def qubit(cls, direction) -> "ProjectiveMeasurement":
        """Spin measurement along a Bloch direction, outcomes ``(+1, -1)`` in that order."""
        n = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(n)
        if n.shape != (3,) or norm == 0.0:
            raise DomainError("direction must be a non-zero 3-vector")
        n = n / norm
        obs = sum(c * s for c, s in zip(n, PAULIS))
        eye = np.eye(2)
        return cls(2, ((eye + obs) / 2, (eye - obs) / 2), (1, -1))


@dataclass(frozen=True, eq=False)
class SeparableComponents:
    """Weights ``λ_μ`` with local states ``ρ_Aμ`` and ``ρ_Bμ``."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), a, b) for w, a, b in self.components)
        if not comps:
            raise DomainError("at least one component is required")
        weights = np.array([w for w, _, _ in comps])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise DomainError(
                f"weights must be non-negative and sum to 1 (sum = {weights.sum()!r})"
            )
        dims_a = {a.dim for _, a, _ in comps}
        dims_b = {b.dim for _, _, b in comps}
        if len(dims_a) != 1 or len(dims_b) != 1:
            raise ShapeError("all local states of one party must share a dimension")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _, _ in self.components])

    @property
    def dims(self) -> tuple[int, int]:
        _, a, b = self.components[0]
        return (a.dim, b.dim)

    def __len__(self):
        return len(self.components)


def bell_state(kind: str) -> DensityOperator:
    """One of the four Bell states as an exact density matrix.

    ``kind`` is one of ``"phi+"``, ``"phi-"``, ``"psi+"``, ``"psi-"``.
    """
    m = np.zeros((4, 4), dtype=complex)
    if kind in ("phi+", "phi-"):
        i, j = 0, 3
    elif kind in ("psi+", "psi-"):
        i, j = 1, 2
    else:
        raise DomainError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    sign = 1.0 if kind.endswith("+") else -1.0
    m[i, i] = m[j, j] = 0.5
    m[i, j] = m[j, i] = 0.5 * sign
    return DensityOperator(m, 2, 2)


def werner_state(p: float) -> DensityOperator:
    """``p |Ψ⁻><Ψ⁻| + (1 - p) I/4`` for ``0 <= p <= 1``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Werner parameter must lie in [0, 1], got {p}")
    return noisy_state(p, bell_state("psi-"))


def noisy_state(p: float, pure: DensityOperator) -> DensityOperator:
    """Mix a state with white noise: ``p ρ + (1 - p) I/d``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"mixing parameter must lie in [0, 1], got {p}")
    d = pure.dim
    m = p * pure.matrix + (1.0 - p) * np.eye(d) / d
    return DensityOperator(m, pure.dim_a, pure.dim_b)


def pure_state(vector, dims: tuple[int, int] | None = None) -> DensityOperator:
    """Projector onto the normalised ``vector``."""
    v = np.asarray(vector, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DomainError("zero vector is not a state")
    v = v / norm
    dim_a, dim_b = dims if dims is not None else (v.size, 1)
    return DensityOperator(np.outer(v, v.conj()), dim_a, dim_b)


def qubit_state(bloch) -> DensityOperator:
    """Single-qubit state ``(I + r·σ)/2`` for a Bloch vector with ``|r| <= 1``."""
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,) or np.linalg.norm(r) > 1.0 + 1e-12:
        raise DomainError("Bloch vector must be a 3-vector of length at most 1")
    return DensityOperator((np.eye(2) + sum(c * s for c, s in zip(r, PAULIS))) / 2, 2)


def product_state(rho_a: DensityOperator, rho_b: DensityOperator) -> DensityOperator:
    return DensityOperator(kron(rho_a.matrix, rho_b.matrix), rho_a.dim, rho_b.dim)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def random_density(dim: int, seed, dims: tuple[int, int] | None = None) -> DensityOperator:
    """Seeded random state ``G G† / Tr(G G†)`` with complex Gaussian ``G``.

    The generator is numpy's PCG64 seeded with ``seed``.  ``G = X + iY``
    where ``X`` and then ``Y`` are drawn as ``dim x dim`` row-major blocks of
    standard normals.  ``seed`` may also be an existing ``numpy.random.Generator``,
    which is advanced in place.
    """
    if dim < 1:
        raise DomainError("dimension must be at least 1")
    if dims is not None and dims[0] * dims[1] != dim:
        raise ShapeError(f"dims {dims} do not multiply to {dim}")
    rng = _rng(seed)
    x = rng.standard_normal((dim, dim))
    y = rng.standard_normal((dim, dim))
    g = x + 1j * y
    w = g @ g.conj().T
    w = 0.5 * (w + w.conj().T)
    w = w / np.trace(w).real
    dim_a, dim_b = dims if dims is not None else (dim, 1)
    return DensityOperator(w, dim_a, dim_b)


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Gaussian matrix."""
    rng = _rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (r.diagonal() / np.abs(r.diagonal()))


def random_measurement(dim: int, seed) -> ProjectiveMeasurement:
    """Measurement in a Haar-random orthonormal basis."""
    return ProjectiveMeasurement.from_basis(random_unitary(dim, seed))


def random_separable_components(
    n_components: int, dims: tuple[int, int], seed
) -> SeparableComponents:
    """Random weights (normalised exponentials) with random local states."""
    rng = _rng(seed)
    w = rng.exponential(size=n_components)
    w = w / w.sum()
    comps = [
        (w[k], random_density(dims[0], rng), random_density(dims[1], rng))
        for k in range(n_components)
    ]
    return SeparableComponents(tuple(comps))


def separable_mixture(c: SeparableComponents) -> DensityOperator:
    """``Σ_μ λ_μ ρ_Aμ ⊗ ρ_Bμ``."""
    dim_a, dim_b = c.dims
    m = sum(w * kron(a.matrix, b.matrix) for w, a, b in c.components)
    return DensityOperator(m, dim_a, dim_b)


def _check_probabilities(p: np.ndarray) -> np.ndarray:
    if np.any(p < -CLAMP_TOL):
        raise NumericError(f"negative probability {p.min():.3e} beyond round-off")
    p = np.where(p < 0.0, 0.0, p)
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise NumericError(f"probabilities sum to {p.sum()!r}")
    return p


def outcome_probabilities(rho: DensityOperator, meas: ProjectiveMeasurement) -> np.ndarray:
    """Born-rule distribution ``Tr(ρ P_i)`` of a single-party measurement."""
    if meas.dim != rho.dim:
        raise ShapeError(f"measurement dimension {meas.dim} != state dimension {rho.dim}")
    p = np.array([np.trace(rho.matrix @ proj).real for proj in meas.projectors])
    return _check_probabilities(p)


def joint_probabilities(
    rho: DensityOperator, meas_a: ProjectiveMeasurement, meas_b: ProjectiveMeasurement
) -> np.ndarray:
    """Joint outcome table ``P[i, j] = Tr(ρ · P_Ai ⊗ P_Bj)``.

    Entries within -1e-12 of zero are clamped to zero; anything more negative,
    or a total more than 1e-10 away from one, raises :class:`NumericError`.
    """
    if meas_a.dim != rho.dim_a or meas_b.dim != rho.dim_b:
        raise ShapeError(
            f"measurement dims ({meas_a.dim}, {meas_b.dim}) do not match state dims {rho.dims}"
        )
    p = np.empty((meas_a.n_outcomes, meas_b.n_outcomes))
    for i, pa in enumerate(meas_a.projectors):
        for j, pb in enumerate(meas_b.projectors):
            p[i, j] = np.trace(rho.matrix @ kron(pa, pb)).real
    return _check_probabilities(p)


def reduced_state(rho: DensityOperator, keep: str = "A") -> DensityOperator:
    """Reduced density operator of the kept party."""
    if not rho.is_bipartite:
        raise ShapeError("reduced_state needs a bipartite state")
    keep = str(keep).upper()
    if keep not in ("A", "B"):
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    traced = "B" if keep == "A" else "A"
    m = partial_trace(rho.matrix, rho.dim_a, rho.dim_b, traced)
    return DensityOperator(m, rho.dim_a if keep == "A" else rho.dim_b)


def verify_mixture_equality(
    c: SeparableComponents, meas_a: ProjectiveMeasurement, meas_b: ProjectiveMeasurement
) -> float:
    """Largest gap between the two sides of the mixture identity.

    Compares ``Tr(ρ_AB P_Ai ⊗ P_Bj)`` for ``ρ_AB = separable_mixture(c)`` with
    ``Σ_μ λ_μ Tr(ρ_Aμ P_Ai) Tr(ρ_Bμ P_Bj)`` over every outcome pair.
    """
    lhs = joint_probabilities(separable_mixture(c), meas_a, meas_b)
    rhs = sum(
        w * np.outer(outcome_probabilities(a, meas_a), outcome_probabilities(b, meas_b))
        for w, a, b in c.components
    )
    return float(np.max(np.abs(lhs - rhs)))
