"""Small-dimension state vectors, tensor products, and projective measurements.

Complex amplitudes are stored as ``numpy.complex128`` and every comparison
uses the absolute tolerance :data:`ATOL`. Tensor products are big-endian:
the first factor's index varies slowest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Hashable, Iterable, Sequence

import numpy as np

ATOL = 1e-12

# Reserved label of the augmented no-show outcome; never part of a spectrum.
THETA = "θ"


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized vector in C^dim, optionally carrying a short label."""

    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"state is not normalized: squared norm {norm2!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def inner(self, other: "PureState") -> complex:
        """Return <self|other>."""
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def same_ray(self, other: "PureState") -> bool:
        """True when the two states differ at most by a global phase."""
        return other.dim == self.dim and abs(abs(self.inner(other)) - 1.0) <= ATOL

    def close_to(self, other: "PureState") -> bool:
        return other.dim == self.dim and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=ATOL)
        )

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"PureState{name}({np.array2string(self.amplitudes, precision=4)})"


def state(amplitudes, label: str | None = None, normalize: bool = False) -> PureState:
    """Build a :class:`PureState`, optionally normalizing the amplitudes first."""
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if normalize:
        amps = amps / np.linalg.norm(amps)
    return PureState(amps, label)


_R = 1 / np.sqrt(2)
KET_0 = PureState([1, 0], "0")
KET_1 = PureState([0, 1], "1")
KET_PLUS = PureState([_R, _R], "+")
KET_MINUS = PureState([_R, -_R], "-")
KET_PLUS_I = PureState([_R, 1j * _R], "i")
KET_MINUS_I = PureState([_R, -1j * _R], "-i")

NAMED_STATES = {s.label: s for s in (KET_0, KET_1, KET_PLUS, KET_MINUS, KET_PLUS_I, KET_MINUS_I)}


def tensor_product(factors: Sequence[PureState]) -> PureState:
    """Kronecker product of ``factors``, first factor slowest."""
    factors = list(factors)
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    amps = reduce(np.kron, (f.amplitudes for f in factors))
    labels = [f.label for f in factors]
    label = "".join(labels) if all(labels) else None
    return PureState(amps, label)


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Rank-one projective measurement given by an orthonormal basis.

    ``outcomes[k]`` labels the projector onto ``basis[k]``. ``name`` is the
    observable id used to look up response tables.
    """

    basis: tuple[PureState, ...]
    outcomes: tuple[Hashable, ...]
    name: str = "M"
    complete: bool = field(default=True, repr=False)

    def __post_init__(self):
        basis = tuple(self.basis)
        outcomes = tuple(self.outcomes)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "outcomes", outcomes)
        if not basis:
            raise ValueError("measurement needs at least one basis vector")
        if len(outcomes) != len(basis):
            raise ValueError("one outcome label per basis vector is required")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError(f"outcome labels must be distinct: {outcomes!r}")
        if THETA in outcomes:
            raise ValueError(f"{THETA!r} is reserved for the no-show outcome")
        dims = {b.dim for b in basis}
        if len(dims) != 1:
            raise ValueError("basis vectors have different dimensions")
        gram = self.matrix().conj() @ self.matrix().T
        dev = np.max(np.abs(gram - np.eye(len(basis))))
        if dev > ATOL:
            raise ValueError(f"basis is not orthonormal (Gram deviation {dev:.3e})")
        if self.complete and len(basis) != self.dim:
            raise ValueError(
                f"basis has {len(basis)} vectors but dimension is {self.dim}; "
                "eigenvectors must span the space"
            )

    @classmethod
    def incomplete(cls, basis, outcomes, name: str = "M") -> "ProjectiveMeasurement":
        """Orthonormal family that need not span; for diagnostics only."""
        return cls(tuple(basis), tuple(outcomes), name, complete=False)

    @property
    def dim(self) -> int:
        return self.basis[0].dim

    def matrix(self) -> np.ndarray:
        """Rows are the basis vectors."""
        return np.stack([b.amplitudes for b in self.basis])

    def index(self, label) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise ValueError(f"{label!r} is not an outcome of {self.name!r}") from None

    def outcome_set(self, members: Iterable) -> frozenset:
        """Validate ``members`` as a subset of this measurement's spectrum."""
        members = frozenset(members)
        for m in members:
            self.index(m)
        return members


def born_vector(psi: PureState, meas: ProjectiveMeasurement) -> np.ndarray:
    """Outcome probabilities |<b_k|psi>|^2 in outcome order, clipped to [0, 1]."""
    if psi.dim != meas.dim:
        raise ValueError(f"dimension mismatch: state {psi.dim}, measurement {meas.dim}")
    amps = meas.matrix().conj() @ psi.amplitudes
    return np.clip(np.abs(amps) ** 2, 0.0, 1.0)


def born_probability(psi: PureState, meas: ProjectiveMeasurement, s: Iterable) -> float:
    """Probability that measuring ``meas`` on ``psi`` gives an outcome in ``s``."""
    s = meas.outcome_set(s)
    probs = born_vector(psi, meas)
    total = sum(float(probs[k]) for k, o in enumerate(meas.outcomes) if o in s)
    return min(max(total, 0.0), 1.0)


def identity_resolution_residual(meas: ProjectiveMeasurement) -> float:
    """Max-entry deviation of the summed projectors from the identity."""
    m = meas.matrix()
    total = m.T @ m.conj()
    return float(np.max(np.abs(total - np.eye(meas.dim))))


def gram_residual(meas: ProjectiveMeasurement) -> float:
    """Max-entry deviation of the basis Gram matrix from the identity."""
    m = meas.matrix()
    return float(np.max(np.abs(m.conj() @ m.T - np.eye(len(meas.basis)))))


def product_measurement(*parts: ProjectiveMeasurement, name: str | None = None) -> ProjectiveMeasurement:
    """Measure each factor separately; outcomes are tuples of component outcomes."""
    if not parts:
        raise ValueError("product_measurement needs at least one factor")
    basis = [PureState(np.array([1.0]))]
    outcomes: list[tuple] = [()]
    for p in parts:
        basis = [tensor_product([b, c]) for b in basis for c in p.basis]
        outcomes = [o + (q,) for o in outcomes for q in p.outcomes]
    return ProjectiveMeasurement(
        tuple(basis), tuple(outcomes), name or "⊗".join(p.name for p in parts)
    )


def bivalent_observable(name: str, plus: PureState, minus: PureState | None = None) -> ProjectiveMeasurement:
    """Qubit observable with outcomes (+1, -1); ``minus`` defaults to the orthogonal state."""
    if plus.dim != 2:
        raise ValueError("bivalent observables act on a qubit")
    if minus is None:
        a, b = plus.amplitudes
        minus = PureState([-np.conj(b), np.conj(a)])
    return ProjectiveMeasurement((plus, minus), (1, -1), name)


PAULI_X = bivalent_observable("X", KET_PLUS, KET_MINUS)
PAULI_Y = bivalent_observable("Y", KET_PLUS_I, KET_MINUS_I)
PAULI_Z = bivalent_observable("Z", KET_0, KET_1)
Z_BASIS = ProjectiveMeasurement((KET_0, KET_1), ("0", "1"), "Zbits")
