"""Core domain types: concepts, relations, triples, and label normalization.

Everything here is an immutable value type with equality defined on
normalized content, so the same assertion extracted twice (with different
casing or spacing) counts as one item in sets and vote tallies.
"""
from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Mapping, TypeVar

_V = TypeVar("_V")


class EmptyLabel(ValueError):
    """Raised when a label is empty after trimming."""


class UnknownRelation(ValueError):
    """Raised when a relation name cannot be mapped to the vocabulary."""

    def __init__(self, raw: str):
        super().__init__(f"unknown relation: {raw!r}")
        self.raw = raw


class SelfLoopError(ValueError):
    """Raised when a triple relates a concept to itself."""


_WHITESPACE = re.compile(r"\s+")


def normalize_label(raw: str) -> str:
    """Fold a free-text label to canonical form.

    Lowercase, whitespace collapsed to single spaces, trimmed. Idempotent.
    No stemming or pluralization: 'exercise' and 'exercises' stay distinct
    (synonym groups in the evaluation layer handle deliberate merges).
    """
    folded = _WHITESPACE.sub(" ", raw).strip().lower()
    if not folded:
        raise EmptyLabel(f"label is empty after trimming: {raw!r}")
    return folded


class SnomedStatus(enum.Enum):
    IN_SNOMED = "in_snomed"
    NOT_IN_SNOMED = "not_in_snomed"
    UNKNOWN = "unknown"


class Provenance(enum.Enum):
    GOLD = "gold"
    LLM = "llm"
    EXPERT_ADDED = "expert-added"


class RelationType(enum.Enum):
    """The closed vocabulary of twelve semantic relation types."""

    IS_A = "is-a"
    PART_OF = "part-of"
    TREATS = "treats"
    AFFECTS = "affects"
    USES = "uses"
    RESULT_OF = "result-of"
    CONTAINS = "contains"
    MANAGES = "manages"
    DISRUPTS = "disrupts"
    COMPLICATES = "complicates"
    INTERACTS_WITH = "interacts-with"
    PREVENTS = "prevents"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


# Extra surface spellings seen in the wild: OWL vocabulary terms and
# snake_case variants. CamelCase and underscores are folded before lookup,
# so e.g. "subClassOf" arrives here as "sub-class-of".
_RELATION_ALIASES: dict[str, RelationType] = {rel.value: rel for rel in RelationType}
_RELATION_ALIASES.update({
    "sub-class-of": RelationType.IS_A,
    "subclass-of": RelationType.IS_A,
    "subclassof": RelationType.IS_A,
    "isa": RelationType.IS_A,
})

_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


def _fold_relation_surface(raw: str) -> str:
    """Reduce a relation spelling to hyphenated lowercase."""
    s = _CAMEL_BOUNDARY.sub("-", raw.strip())
    s = s.replace("_", "-").replace(" ", "-").lower()
    s = re.sub(r"-+", "-", s).strip("-")
    return s


def _edit_distance(a: str, b: str, cap: int = 3) -> int:
    """Levenshtein distance, cut off above `cap` for speed."""
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        if min(cur) > cap:
            return cap + 1
        prev = cur
    return prev[-1]


def match_relation_name(raw: str, table: Mapping[str, _V] | None = None,
                        max_distance: int = 2) -> _V | None:
    """Resolve `raw` against an alias table, repairing typos up to edit
    distance `max_distance`. Returns None when nothing matches unambiguously.
    """
    if table is None:
        table = _RELATION_ALIASES
    folded = _fold_relation_surface(raw)
    if not folded:
        return None
    if folded in table:
        return table[folded]
    best: set[_V] = set()
    best_d = max_distance + 1
    for alias, rel in table.items():
        d = _edit_distance(folded, alias, cap=max_distance)
        if d < best_d:
            best_d, best = d, {rel}
        elif d == best_d:
            best.add(rel)
    if best_d <= max_distance and len(best) == 1:
        return next(iter(best))
    return None


def canonical_relation(raw: str) -> RelationType:
    """Map a surface relation spelling to one of the twelve canonical types.

    Accepts OWL spellings (subClassOf), underscore and camelCase variants,
    and typos within edit distance 2 of a known alias. Anything else raises
    UnknownRelation rather than being silently dropped.
    """
    if not raw or not raw.strip():
        raise UnknownRelation(raw)
    rel = match_relation_name(raw)
    if rel is None:
        raise UnknownRelation(raw)
    return rel


@dataclass(frozen=True, eq=False)
class Concept:
    """A domain term. Equality and hashing use the normalized label only."""

    label: str
    normalized_label: str = field(init=False)
    snomed_status: SnomedStatus = SnomedStatus.UNKNOWN

    def __post_init__(self):
        object.__setattr__(self, "normalized_label", normalize_label(self.label))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Concept):
            return NotImplemented
        return self.normalized_label == other.normalized_label

    def __hash__(self) -> int:
        return hash(self.normalized_label)

    def __repr__(self) -> str:
        return f"Concept({self.normalized_label!r})"

    def with_status(self, status: SnomedStatus) -> "Concept":
        return Concept(self.label, snomed_status=status)


@dataclass(frozen=True, eq=False)
class Triple:
    """A (subject, relation, object) assertion between two concepts.

    Identity is the canonical key (subject, relation, object); provenance,
    votes and source section are bookkeeping and do not affect equality, so
    the same assertion seen in several extraction runs pools into one item.
    """

    subject: Concept
    relation: RelationType
    object: Concept
    provenance: Provenance = Provenance.LLM
    votes: int = 0
    source_section: str = ""

    def __post_init__(self):
        if self.subject == self.object:
            raise SelfLoopError(
                f"self-loop triple rejected: {self.subject.normalized_label!r}"
            )
        if self.votes < 0:
            raise ValueError("votes must be >= 0")

    @property
    def key(self) -> tuple[str, str, str]:
        return (
            self.subject.normalized_label,
            self.relation.value,
            self.object.normalized_label,
        )

    def triple_id(self) -> str:
        """Stable content hash of the canonical key, used as a public id."""
        return hashlib.sha256("|".join(self.key).encode("utf-8")).hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Triple):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Triple({self.key[0]!r} -{self.key[1]}-> {self.key[2]!r})"

    def with_votes(self, votes: int) -> "Triple":
        return Triple(self.subject, self.relation, self.object,
                      self.provenance, votes, self.source_section)

    def with_provenance(self, provenance: Provenance) -> "Triple":
        return Triple(self.subject, self.relation, self.object,
                      provenance, self.votes, self.source_section)


class DifficultyLevel(enum.IntEnum):
    """Four-way stratification by SNOMED membership and is-a-ness."""

    LEVEL_1 = 1
    LEVEL_2 = 2
    LEVEL_3 = 3
    LEVEL_4 = 4


@dataclass(frozen=True)
class ExtractionRun:
    """One run's parsed output plus the raw text for audit."""

    run_index: int
    concepts: frozenset[Concept]
    triples: frozenset[Triple]
    raw_transcript: str = ""
