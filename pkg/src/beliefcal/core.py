"""Shared probability and dialogue-domain value types.

Everything here is immutable after construction (arrays are marked
read-only), so values can be shared freely across worker threads or
processes without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

#: Absolute tolerance on |sum(probs) - 1| accepted at construction time.
#: Vectors inside the tolerance are renormalized (divided by their sum);
#: decimal-text round-trips lose exactness, hence a tolerance at all.
NORMALIZATION_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SlotSchema:
    """Ordered slot -> candidate-value layout for one tracking domain.

    slots: sequence of (slot_name, candidate values). Slot names are unique,
    candidates are unique within a slot, and every slot has at least two
    candidates.
    """

    slots: tuple[tuple[str, tuple[str, ...]], ...]

    def __init__(self, slots: Iterable[tuple[str, Sequence[str]]]):
        normalized = tuple((str(name), tuple(str(c) for c in cands)) for name, cands in slots)
        names = [name for name, _ in normalized]
        if len(set(names)) != len(names):
            raise DomainError("slot names must be unique")
        for name, cands in normalized:
            if len(cands) < 2:
                raise DomainError(f"slot {name!r} needs at least 2 candidates, got {len(cands)}")
            if len(set(cands)) != len(cands):
                raise DomainError(f"slot {name!r} has duplicate candidate values")
        object.__setattr__(self, "slots", normalized)

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.slots)

    def candidates(self, slot: str) -> tuple[str, ...]:
        for name, cands in self.slots:
            if name == slot:
                return cands
        raise DomainError(f"unknown slot {slot!r}")

    def candidate_count(self, slot: str) -> int:
        return len(self.candidates(slot))

    @property
    def candidate_counts(self) -> tuple[int, ...]:
        return tuple(len(cands) for _, cands in self.slots)

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class CategoricalDist:
    """Normalized probability vector over one slot's candidate values.

    Entries are nonnegative and sum to 1 within ``NORMALIZATION_TOL``
    (the stored vector is renormalized on construction). Exact zeros are
    legal: one-hot labels are legitimate distributions, and log-based
    consumers clamp instead.
    """

    probs: np.ndarray

    def __init__(self, probs):
        arr = np.asarray(probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("probs must be a nonempty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError("probs must be finite")
        if np.any(arr < 0):
            raise DomainError("probs must be nonnegative")
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"probs sum to {total!r}, outside tolerance {NORMALIZATION_TOL}")
        object.__setattr__(self, "probs", _freeze(arr / total))

    def __len__(self) -> int:
        return self.probs.size

    def argmax(self) -> int:
        """Index of the most probable candidate; ties break to the lowest index."""
        return int(np.argmax(self.probs))

    def top_k(self, k: int) -> np.ndarray:
        """Indices of the k most probable candidates, ties broken by lowest index."""
        order = np.argsort(-self.probs, kind="stable")
        return order[:k]


#: Logit vectors are plain 1-D float arrays; ``as_logits`` is the boundary
#: check (finiteness) applied by consumers.
Logits = np.ndarray


def as_logits(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError("logits must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError("logits must be finite (no NaN/Inf)")
    return arr


@dataclass(frozen=True)
class DirichletParams:
    """Positive concentration vector of a Dirichlet distribution."""

    alpha: np.ndarray

    def __init__(self, alpha):
        arr = np.asarray(alpha, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError("alpha must be a 1-D vector of length >= 2")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("alpha entries must be finite and strictly positive")
        object.__setattr__(self, "alpha", _freeze(arr.copy()))

    def __len__(self) -> int:
        return self.alpha.size

    @property
    def total(self) -> float:
        return float(self.alpha.sum())

    def mean(self) -> CategoricalDist:
        """Expected categorical distribution alpha / sum(alpha)."""
        return CategoricalDist(self.alpha / self.alpha.sum())


@dataclass(frozen=True)
class BeliefState:
    """One turn's full prediction: a distribution per slot.

    Keys and row lengths are expected to match a referenced SlotSchema;
    ``validate_belief`` checks that conformance.
    """

    per_slot: Mapping[str, CategoricalDist]

    def __init__(self, per_slot: Mapping[str, CategoricalDist]):
        items = {}
        for name, dist in per_slot.items():
            if not isinstance(dist, CategoricalDist):
                dist = CategoricalDist(dist)
            items[str(name)] = dist
        if not items:
            raise DomainError("belief state needs at least one slot")
        object.__setattr__(self, "per_slot", MappingProxyType(items))

    def __getitem__(self, slot: str) -> CategoricalDist:
        return self.per_slot[slot]

    def __iter__(self):
        return iter(self.per_slot)

    def __len__(self) -> int:
        return len(self.per_slot)

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(self.per_slot)


@dataclass(frozen=True)
class PredictionRecord:
    """One dialogue turn: predicted belief plus per-slot true labels."""

    dialogue_id: str
    turn_index: int
    belief: BeliefState
    labels: Mapping[str, int]

    def __init__(self, dialogue_id: str, turn_index: int, belief: BeliefState,
                 labels: Mapping[str, int]):
        if turn_index < 0:
            raise DomainError("turn_index must be nonnegative")
        if not isinstance(belief, BeliefState):
            belief = BeliefState(belief)
        labels = {str(k): int(v) for k, v in labels.items()}
        if set(labels) != set(belief.slot_names):
            raise DomainError(
                f"label keys {sorted(labels)} do not match belief slots {sorted(belief.slot_names)}")
        for slot, idx in labels.items():
            n = len(belief[slot])
            if not 0 <= idx < n:
                raise DomainError(f"label {idx} out of range for slot {slot!r} with {n} candidates")
        object.__setattr__(self, "dialogue_id", str(dialogue_id))
        object.__setattr__(self, "turn_index", int(turn_index))
        object.__setattr__(self, "belief", belief)
        object.__setattr__(self, "labels", MappingProxyType(labels))


@dataclass(frozen=True)
class Violation:
    """One belief-vs-schema conformance failure."""

    slot: str
    kind: str  # missing_slot | extra_slot | wrong_arity | unnormalized | negative_mass | non_finite
    detail: str

    def __str__(self) -> str:
        return f"[{self.kind}] slot {self.slot!r}: {self.detail}"


def one_hot(index: int, size: int) -> CategoricalDist:
    """Distribution with all mass on ``index``.

    Raises DomainError when index is outside [0, size).
    """
    if size < 1:
        raise DomainError("size must be positive")
    if not 0 <= index < size:
        raise DomainError(f"index {index} out of range for size {size}")
    v = np.zeros(size)
    v[index] = 1.0
    return CategoricalDist(v)


def validate_belief(belief, schema: SlotSchema) -> list[Violation]:
    """Check a belief against a schema; an empty list means ok.

    Accepts either a ``BeliefState`` or a raw mapping slot -> probability
    sequence (the latter lets callers report problems in data that is too
    broken to construct typed objects from, e.g. unnormalized file rows).
    """
    if isinstance(belief, BeliefState):
        rows: Mapping = {name: belief[name].probs for name in belief.slot_names}
    else:
        rows = belief

    violations: list[Violation] = []
    schema_names = set(schema.slot_names)
    for name in schema.slot_names:
        if name not in rows:
            violations.append(Violation(name, "missing_slot", "slot absent from belief"))
    for name in rows:
        if name not in schema_names:
            violations.append(Violation(name, "extra_slot", "slot not in schema"))

    for name, row in rows.items():
        if name not in schema_names:
            continue
        arr = np.asarray(row, dtype=np.float64)
        expected = schema.candidate_count(name)
        if arr.ndim != 1 or arr.size != expected:
            violations.append(Violation(
                name, "wrong_arity", f"expected {expected} entries, got {arr.size}"))
            continue
        if not np.all(np.isfinite(arr)):
            violations.append(Violation(name, "non_finite", "NaN or Inf entry"))
            continue
        if np.any(arr < 0):
            violations.append(Violation(name, "negative_mass", f"min entry {arr.min()!r}"))
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            violations.append(Violation(name, "unnormalized", f"entries sum to {total!r}"))
    return violations
