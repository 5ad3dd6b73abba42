"""Two-step extraction pipeline with k-of-n consensus voting.

Step 1 asks the model for domain concepts present in a guideline passage;
step 2 asks for typed triples over the voted concepts. Both steps run N
times and keep only items that appear in at least k runs. Inverse surface
relations (treated-by, has-part, ...) are rewritten to their canonical
form per run, before voting, so the same assertion phrased either way
pools its votes.
"""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence, TypeVar

from .data import default_template_path
from .gateway import Backend, PromptRequest, TransportError
from .model import (
    Concept,
    EmptyLabel,
    ExtractionRun,
    Provenance,
    RelationType,
    Triple,
    canonical_relation,
    match_relation_name,
)

log = logging.getLogger(__name__)

T = TypeVar("T", bound=Hashable)


class EmptyContext(ValueError):
    """Raised when a prompt is built over empty guideline text."""


class NoConcepts(ValueError):
    """Raised when the triple prompt is built with no concepts."""


class InvalidThreshold(ValueError):
    """Raised when the vote threshold is outside [1, n_runs]."""


@dataclass(frozen=True)
class InverseMap:
    """Maps inverse surface relation names to (canonical, swap_arguments).

    interacts-with is symmetric and deliberately has no entry.
    """

    pairs: dict[str, tuple[RelationType, bool]]

    def __post_init__(self):
        for name, (canonical, _swap) in self.pairs.items():
            if match_relation_name(name) is not None:
                raise ValueError(f"inverse name shadows a canonical alias: {name}")
            if not isinstance(canonical, RelationType):
                raise ValueError(f"inverse {name} must map to a canonical relation")

    def lookup(self, surface: str) -> tuple[RelationType, bool] | None:
        folded = _fold(surface)
        if folded in self.pairs:
            return self.pairs[folded]
        return None

    def surface_names(self) -> list[str]:
        return sorted(self.pairs)


def _fold(name: str) -> str:
    # reuse the relation surface folding from the core model
    from .model import _fold_relation_surface

    return _fold_relation_surface(name)


DEFAULT_INVERSE_MAP = InverseMap({
    "treated-by": (RelationType.TREATS, True),
    "affected-by": (RelationType.AFFECTS, True),
    "used-by": (RelationType.USES, True),
    "has-result": (RelationType.RESULT_OF, True),
    "contained-in": (RelationType.CONTAINS, True),
    "managed-by": (RelationType.MANAGES, True),
    "disrupted-by": (RelationType.DISRUPTS, True),
    "complicated-by": (RelationType.COMPLICATES, True),
    "prevented-by": (RelationType.PREVENTS, True),
    "has-part": (RelationType.PART_OF, True),
    "has-subtype": (RelationType.IS_A, True),
})


@dataclass(frozen=True)
class PipelineConfig:
    n_runs: int = 10
    vote_threshold: int = 6
    relation_vocabulary: tuple[RelationType, ...] = tuple(RelationType)
    include_inverses: bool = True
    inverse_map: InverseMap = DEFAULT_INVERSE_MAP
    model_id: str = "gpt-3.5-turbo"
    temperature: float = 1.0
    system_message: str = (
        "You are an expert in clinical terminology and biomedical ontologies."
    )
    concept_template_path: str | None = None
    triple_template_path: str | None = None

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if not 1 <= self.vote_threshold <= self.n_runs:
            raise InvalidThreshold(
                f"vote_threshold {self.vote_threshold} not in [1, {self.n_runs}]"
            )


@dataclass(frozen=True)
class RawTriple:
    """A parsed triple whose relation may still be an inverse surface form."""

    subject: Concept
    relation_name: str
    object: Concept


def _load_template(path: str | None, default_name: str) -> str:
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    return default_template_path(default_name).read_text(encoding="utf-8")


def build_concept_prompt(context: str, config: PipelineConfig = PipelineConfig()) -> PromptRequest:
    """Render the step-1 prompt. Deterministic for fixed inputs."""
    if not context.strip():
        raise EmptyContext("guideline context is empty")
    template = _load_template(config.concept_template_path, "concept_prompt.txt")
    user = template.replace("{{context}}", context)
    return PromptRequest(
        system_message=config.system_message,
        user_message=user,
        temperature=config.temperature,
        model_id=config.model_id,
    )


def build_triple_prompt(
    context: str,
    concepts: Iterable[Concept],
    config: PipelineConfig = PipelineConfig(),
) -> PromptRequest:
    """Render the step-2 prompt over the voted concepts.

    Lists every concept, the canonical relation vocabulary, and (when
    configured) the recognized inverse forms, so the model may phrase an
    assertion in whichever direction it prefers.
    """
    if not context.strip():
        raise EmptyContext("guideline context is empty")
    concept_labels = sorted({c.normalized_label for c in concepts})
    if not concept_labels:
        raise NoConcepts("no concepts to build triples over")
    relations = [rel.value for rel in config.relation_vocabulary]
    if config.include_inverses:
        relations += config.inverse_map.surface_names()
    template = _load_template(config.triple_template_path, "triple_prompt.txt")
    user = (
        template.replace("{{context}}", context)
        .replace("{{concepts}}", "\n".join(f"- {label}" for label in concept_labels))
        .replace("{{relations}}", ", ".join(relations))
    )
    return PromptRequest(
        system_message=config.system_message,
        user_message=user,
        temperature=config.temperature,
        model_id=config.model_id,
    )


_LIST_MARKERS = ("-", "*", "•", "–")


def _strip_list_marker(line: str) -> str:
    s = line.strip()
    while s[:1] in _LIST_MARKERS:
        s = s[1:].lstrip()
    # numbered markers: "3.", "3)", "3 -"
    i = 0
    while i < len(s) and s[i].isdigit():
        i += 1
    if i and i < len(s) and s[i] in ".)":
        s = s[i + 1:].lstrip()
    return s


def parse_concepts(response: str) -> set[Concept]:
    """One concept per non-empty line, list markers stripped, deduplicated.

    Never aborts: lines that normalize to nothing are skipped with a warning.
    """
    concepts: set[Concept] = set()
    for line in response.splitlines():
        if not line.strip():
            continue
        stripped = _strip_list_marker(line)
        try:
            concepts.add(Concept(stripped))
        except EmptyLabel:
            log.warning("skipping unparseable concept line: %r", line)
    return concepts


def parse_triples(
    response: str,
    inverse_map: InverseMap = DEFAULT_INVERSE_MAP,
    delimiter: str = "|",
) -> set[RawTriple]:
    """Parse `subject | relation | object` lines into raw triples.

    The relation must resolve to a canonical type or a known inverse form;
    inverse rewriting itself is deferred to normalize_inverse. Malformed
    lines (wrong field count, unknown relation, empty labels, self-loops)
    are skipped with a warning; consensus voting filters the noise.
    """
    triples: set[RawTriple] = set()
    for line in response.splitlines():
        if not line.strip():
            continue
        fields = [f.strip() for f in _strip_list_marker(line).split(delimiter)]
        if len(fields) != 3:
            log.warning("skipping line without 3 '|' fields: %r", line)
            continue
        raw_subject, raw_relation, raw_object = fields
        relation_name = _resolve_relation_name(raw_relation, inverse_map)
        if relation_name is None:
            log.warning("skipping line with unknown relation %r: %r", raw_relation, line)
            continue
        try:
            subject = Concept(raw_subject)
            obj = Concept(raw_object)
        except EmptyLabel:
            log.warning("skipping line with empty concept: %r", line)
            continue
        if subject == obj:
            log.warning("skipping self-loop line: %r", line)
            continue
        triples.add(RawTriple(subject, relation_name, obj))
    return triples


def _resolve_relation_name(raw: str, inverse_map: InverseMap) -> str | None:
    """Folded canonical value, folded inverse name, or None."""
    if inverse_map.lookup(raw) is not None:
        return _fold(raw)
    rel = match_relation_name(raw)
    if rel is not None:
        return rel.value
    # typo repair against inverse names as well (e.g. "treated_byy")
    return match_relation_name(raw, table={name: name for name in inverse_map.pairs})


def normalize_inverse(
    triple: RawTriple | Triple,
    inverse_map: InverseMap = DEFAULT_INVERSE_MAP,
) -> Triple:
    """Rewrite an inverse-form triple to its canonical direction.

    Canonical triples pass through unchanged; the result always carries a
    canonical relation, so the function is idempotent.
    """
    if isinstance(triple, Triple):
        return triple
    entry = inverse_map.lookup(triple.relation_name)
    if entry is not None:
        canonical, swap = entry
        subject, obj = (triple.object, triple.subject) if swap else (triple.subject, triple.object)
        return Triple(subject, canonical, obj)
    # raises UnknownRelation when the name is neither inverse nor canonical
    return Triple(triple.subject, canonical_relation(triple.relation_name), triple.object)


def consensus_vote(runs: Sequence[Iterable[T]], threshold: int) -> dict[T, int]:
    """Items present in at least `threshold` of the runs, with their counts.

    Membership per run is counted once (runs are treated as sets), so the
    result is independent of run order and of duplicates within a run.
    """
    n = len(runs)
    if not 1 <= threshold <= n:
        raise InvalidThreshold(f"threshold {threshold} not in [1, {n}]")
    counts: Counter[T] = Counter()
    for run in runs:
        counts.update(set(run))
    return {item: count for item, count in counts.items() if count >= threshold}


@dataclass(frozen=True)
class PipelineResult:
    concepts: dict[Concept, int]
    triples: frozenset[Triple]
    runs: tuple[ExtractionRun, ...]


def run_pipeline(context: str, config: PipelineConfig, backend: Backend) -> PipelineResult:
    """Execute both extraction steps N times and vote.

    A run whose completion fails even after the gateway's retry contributes
    an empty set but still counts toward N, keeping the k-of-n semantics
    conservative. Replay integrity errors are misconfigurations and
    propagate instead.
    """
    concept_request = build_concept_prompt(context, config)
    step1_responses: list[str] = []
    step1_sets: list[set[Concept]] = []
    for index in range(config.n_runs):
        text = _complete_or_empty(backend, concept_request, "concepts", index)
        step1_responses.append(text)
        step1_sets.append(parse_concepts(text))

    concept_votes = consensus_vote(step1_sets, config.vote_threshold)
    voted_concepts = set(concept_votes)

    step2_responses: list[str] = ["" for _ in range(config.n_runs)]
    step2_sets: list[set[Triple]] = [set() for _ in range(config.n_runs)]
    if voted_concepts:
        triple_request = build_triple_prompt(context, voted_concepts, config)
        for index in range(config.n_runs):
            text = _complete_or_empty(backend, triple_request, "triples", index)
            step2_responses[index] = text
            raw = parse_triples(text, config.inverse_map)
            step2_sets[index] = {normalize_inverse(t, config.inverse_map) for t in raw}
    else:
        log.warning("no concepts survived voting; skipping triple extraction")

    triple_votes = consensus_vote(step2_sets, config.vote_threshold)
    accepted = frozenset(
        triple.with_votes(votes).with_provenance(Provenance.LLM)
        for triple, votes in triple_votes.items()
    )

    runs = tuple(
        ExtractionRun(
            run_index=index,
            concepts=frozenset(step1_sets[index]),
            triples=frozenset(step2_sets[index]),
            raw_transcript=(
                f"=== step 1 (concepts) ===\n{step1_responses[index]}\n"
                f"=== step 2 (triples) ===\n{step2_responses[index]}"
            ),
        )
        for index in range(config.n_runs)
    )
    return PipelineResult(concepts=concept_votes, triples=accepted, runs=runs)


def _complete_or_empty(backend: Backend, request: PromptRequest, step: str, index: int) -> str:
    try:
        return backend.complete(request)
    except TransportError as exc:
        log.warning("%s run %d failed, counting as empty: %s", step, index, exc)
        return ""


def snapshot_dict(result: PipelineResult, config: PipelineConfig) -> dict:
    """Deterministic JSON-ready view of a pipeline result."""
    return {
        "config": {
            "n_runs": config.n_runs,
            "vote_threshold": config.vote_threshold,
            "include_inverses": config.include_inverses,
            "model_id": config.model_id,
            "temperature": config.temperature,
        },
        "concepts": [
            {"label": concept.normalized_label, "votes": votes}
            for concept, votes in sorted(
                result.concepts.items(), key=lambda kv: kv[0].normalized_label
            )
        ],
        "triples": [
            {
                "subject": t.subject.normalized_label,
                "relation": t.relation.value,
                "object": t.object.normalized_label,
                "votes": t.votes,
                "source_section": t.source_section,
            }
            for t in sorted(result.triples, key=lambda t: t.key)
        ],
        "runs": [
            {
                "index": run.run_index,
                "concepts": sorted(c.normalized_label for c in run.concepts),
                "triples": sorted("|".join(t.key) for t in run.triples),
                "transcript": run.raw_transcript,
            }
            for run in result.runs
        ],
    }


def write_snapshot(result: PipelineResult, config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(snapshot_dict(result, config), indent=2, sort_keys=True,
                   ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_snapshot_triples(path: str | Path) -> list[Triple]:
    """Triples from a snapshot file, votes and provenance preserved."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    triples = []
    for row in data.get("triples", []):
        triples.append(
            Triple(
                Concept(row["subject"]),
                canonical_relation(row["relation"]),
                Concept(row["object"]),
                provenance=Provenance.LLM,
                votes=int(row.get("votes", 0)),
                source_section=row.get("source_section", ""),
            )
        )
    return triples


def load_snapshot_concepts(path: str | Path) -> dict[Concept, int]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        Concept(row["label"]): int(row.get("votes", 0))
        for row in data.get("concepts", [])
    }
