"""Gold-standard evaluation: matching, difficulty stratification, metrics.

Extracted triples are matched against expert gold rows under normalized
label equality, optionally widened by synonym groups. Matched gold rows are
true positives, unmatched gold rows false negatives, and unmatched
extracted triples become candidates awaiting an expert verdict: accepted
candidates extend the gold standard as true positives, declined ones count
as false positives. Precision and recall are reported per difficulty level
and overall, plus analogous concept-level figures.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .model import (
    Concept,
    DifficultyLevel,
    Provenance,
    RelationType,
    SnomedStatus,
    Triple,
    UnknownRelation,
    canonical_relation,
    normalize_label,
)
from .terminology import Lexicon, in_snomed

log = logging.getLogger(__name__)


class GoldParseError(ValueError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row


class Unclassified(ValueError):
    """Raised when SNOMED membership is unknown for either concept."""


class PendingVerdicts(RuntimeError):
    def __init__(self, pending: Sequence[Triple]):
        super().__init__(f"{len(pending)} candidates lack a verdict")
        self.pending = tuple(pending)


class Decision(enum.Enum):
    ACCEPT = "accept"
    DECLINE = "decline"


@dataclass(frozen=True)
class GoldEntry:
    triple: Triple
    level: DifficultyLevel
    found_by_model: bool


@dataclass(frozen=True)
class ExtractedRow:
    """One row of an extracted-triples table, with its printed claims."""

    triple: Triple
    in_gold_claim: bool
    claimed_level: DifficultyLevel


class SynonymMap:
    """Disjoint groups of normalized labels treated as one concept."""

    def __init__(self, groups: Iterable[Iterable[str]] = ()):
        self._canon: dict[str, str] = {}
        for group in groups:
            labels = sorted({normalize_label(label) for label in group})
            if len(labels) < 2:
                continue
            representative = labels[0]
            for label in labels:
                if label in self._canon:
                    raise ValueError(f"label {label!r} appears in two synonym groups")
                self._canon[label] = representative

    def canonical(self, label: str) -> str:
        normalized = normalize_label(label)
        return self._canon.get(normalized, normalized)

    def triple_key(self, triple: Triple) -> tuple[str, str, str]:
        return (
            self.canonical(triple.subject.normalized_label),
            triple.relation.value,
            self.canonical(triple.object.normalized_label),
        )

    def __len__(self) -> int:
        return len(self._canon)


def load_synonyms(path: str | Path) -> SynonymMap:
    """One group per line, labels separated by `|`; `#` starts a comment."""
    groups = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        groups.append([part for part in line.split("|") if part.strip()])
    return SynonymMap(groups)


def _split_tsv(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rows.append([cell.strip() for cell in line.split("\t")])
    return rows


def _parse_level(value: str, row: int) -> DifficultyLevel:
    try:
        return DifficultyLevel(int(value))
    except (ValueError, KeyError) as exc:
        raise GoldParseError(row, f"bad difficulty level {value!r}") from exc


def _parse_yes_no(value: str, row: int) -> bool:
    lowered = value.strip().lower()
    if lowered in ("yes", "y", "true", "1"):
        return True
    if lowered in ("no", "n", "false", "0"):
        return False
    raise GoldParseError(row, f"expected yes/no, got {value!r}")


def load_gold(path: str | Path) -> list[GoldEntry]:
    """Read the 5-column gold TSV (concept, relation, concept, level, found).

    Relations are canonicalized (typos like 'resut-of' repaired); duplicate
    rows under normalized equality are dropped with a warning.
    """
    rows = _split_tsv(Path(path).read_text(encoding="utf-8"))
    entries: list[GoldEntry] = []
    seen: set[tuple[str, str, str]] = set()
    for number, cells in enumerate(rows, 1):
        if number == 1 and cells[0].lower().startswith("concept"):
            continue
        if len(cells) != 5:
            raise GoldParseError(number, f"expected 5 columns, got {len(cells)}")
        subject, relation_raw, obj, level_raw, found_raw = cells
        try:
            relation = canonical_relation(relation_raw)
        except UnknownRelation as exc:
            raise GoldParseError(number, str(exc)) from exc
        triple = Triple(Concept(subject), relation, Concept(obj),
                        provenance=Provenance.GOLD)
        if triple.key in seen:
            log.warning("gold row %d duplicates an earlier row, skipping", number)
            continue
        seen.add(triple.key)
        entries.append(GoldEntry(
            triple=triple,
            level=_parse_level(level_raw, number),
            found_by_model=_parse_yes_no(found_raw, number),
        ))
    return entries


def load_extracted(path: str | Path) -> list[ExtractedRow]:
    """Read the extracted-triples TSV (subject, relation, object, in_gold, type)."""
    rows = _split_tsv(Path(path).read_text(encoding="utf-8"))
    out: list[ExtractedRow] = []
    seen: set[tuple[str, str, str]] = set()
    for number, cells in enumerate(rows, 1):
        if number == 1 and cells[0].lower() in ("subject", "concept a"):
            continue
        if len(cells) != 5:
            raise GoldParseError(number, f"expected 5 columns, got {len(cells)}")
        subject, relation_raw, obj, in_gold_raw, level_raw = cells
        try:
            relation = canonical_relation(relation_raw)
        except UnknownRelation as exc:
            raise GoldParseError(number, str(exc)) from exc
        triple = Triple(Concept(subject), relation, Concept(obj),
                        provenance=Provenance.LLM)
        if triple.key in seen:
            log.warning("extracted row %d duplicates an earlier row, skipping", number)
            continue
        seen.add(triple.key)
        out.append(ExtractedRow(
            triple=triple,
            in_gold_claim=_parse_yes_no(in_gold_raw, number),
            claimed_level=_parse_level(level_raw, number),
        ))
    return out


MembershipFn = Callable[[Concept], SnomedStatus]


def classify(
    triple: Triple,
    lexicon: Lexicon | None = None,
    membership: MembershipFn | None = None,
) -> DifficultyLevel:
    """Assign the difficulty level of a triple.

    Level 1: both concepts in SNOMED-CT and the relation is is-a.
    Level 2: at most one concept in SNOMED-CT and the relation is is-a.
    Level 3: both concepts in SNOMED-CT and the relation is not is-a.
    Level 4: at most one concept in SNOMED-CT and the relation is not is-a.

    Unknown membership on either side raises Unclassified instead of
    guessing.
    """
    if membership is None:
        if lexicon is None:
            raise ValueError("classify needs a lexicon or a membership function")
        membership = lambda concept: in_snomed(concept, lexicon)  # noqa: E731
    statuses = (membership(triple.subject), membership(triple.object))
    if SnomedStatus.UNKNOWN in statuses:
        raise Unclassified(f"membership unknown for {triple!r}")
    both_in = all(s is SnomedStatus.IN_SNOMED for s in statuses)
    if triple.relation is RelationType.IS_A:
        return DifficultyLevel.LEVEL_1 if both_in else DifficultyLevel.LEVEL_2
    return DifficultyLevel.LEVEL_3 if both_in else DifficultyLevel.LEVEL_4


@dataclass(frozen=True)
class MatchResult:
    tp_entries: tuple[GoldEntry, ...]
    fn_entries: tuple[GoldEntry, ...]
    fp_candidates: frozenset[Triple]

    @property
    def tp(self) -> frozenset[Triple]:
        return frozenset(entry.triple for entry in self.tp_entries)

    @property
    def fn(self) -> frozenset[Triple]:
        return frozenset(entry.triple for entry in self.fn_entries)


def match_triples(
    extracted: Iterable[Triple],
    gold: Sequence[GoldEntry],
    synonyms: SynonymMap | None = None,
) -> MatchResult:
    """Partition gold into matched/missed and extracted into matched/candidates.

    A triple matches a gold entry iff the relations are equal and both
    concept pairs agree under normalized labels widened by the synonym map.
    """
    synonyms = synonyms or SynonymMap()
    extracted = list(extracted)
    extracted_keys = {synonyms.triple_key(t) for t in extracted}
    tp_entries = tuple(e for e in gold if synonyms.triple_key(e.triple) in extracted_keys)
    fn_entries = tuple(e for e in gold if synonyms.triple_key(e.triple) not in extracted_keys)
    gold_keys = {synonyms.triple_key(e.triple) for e in gold}
    fp_candidates = frozenset(
        t for t in extracted if synonyms.triple_key(t) not in gold_keys
    )
    return MatchResult(tp_entries, fn_entries, fp_candidates)


def precision(tp: int, fp: int) -> float | None:
    """TP / (TP + FP); None when the denominator is zero."""
    if tp < 0 or fp < 0:
        raise ValueError("counts must be >= 0")
    if tp + fp == 0:
        return None
    return tp / (tp + fp)


def recall(tp: int, fn: int) -> float | None:
    """TP / (TP + FN); None when the denominator is zero."""
    if tp < 0 or fn < 0:
        raise ValueError("counts must be >= 0")
    if tp + fn == 0:
        return None
    return tp / (tp + fn)


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fn: int = 0
    fp: int = 0

    @property
    def precision(self) -> float | None:
        return precision(self.tp, self.fp)

    @property
    def recall(self) -> float | None:
        return recall(self.tp, self.fn)

    def add(self, tp: int = 0, fn: int = 0, fp: int = 0) -> "Counts":
        return Counts(self.tp + tp, self.fn + fn, self.fp + fp)


@dataclass(frozen=True)
class StratifiedReport:
    per_level: dict[DifficultyLevel, Counts]
    overall: Counts
    concepts: Counts
    unclassified: Counts = Counts()
    pending: tuple[Triple, ...] = ()
    expert_added: tuple[Triple, ...] = ()

    def validate(self) -> None:
        """Micro-consistency: overall equals the sum over strata."""
        total = Counts()
        for counts in self.per_level.values():
            total = total.add(counts.tp, counts.fn, counts.fp)
        total = total.add(self.unclassified.tp, self.unclassified.fn,
                          self.unclassified.fp)
        if (total.tp, total.fn, total.fp) != (self.overall.tp, self.overall.fn,
                                              self.overall.fp):
            raise AssertionError(
                f"stratum sums {total} do not match overall {self.overall}"
            )


def stratified_report(
    match: MatchResult,
    verdicts: Mapping[Triple, Decision],
    lexicon: Lexicon | None = None,
    membership: MembershipFn | None = None,
    extracted_concepts: Iterable[Concept] | None = None,
    synonyms: SynonymMap | None = None,
    allow_pending: bool = False,
) -> StratifiedReport:
    """Aggregate counts and metrics per difficulty level and overall.

    Gold rows keep their curated level; candidates are classified against
    the lexicon. Accepted candidates count as true positives and extend the
    gold standard; declined ones are false positives. Candidates without a
    verdict raise PendingVerdicts unless allow_pending, in which case they
    are excluded from the counts and listed on the report.
    """
    synonyms = synonyms or SynonymMap()
    pending = sorted(
        (t for t in match.fp_candidates if t not in verdicts),
        key=lambda t: t.key,
    )
    if pending and not allow_pending:
        raise PendingVerdicts(pending)

    per_level: dict[DifficultyLevel, Counts] = {
        level: Counts() for level in DifficultyLevel
    }
    unclassified = Counts()
    for entry in match.tp_entries:
        per_level[entry.level] = per_level[entry.level].add(tp=1)
    for entry in match.fn_entries:
        per_level[entry.level] = per_level[entry.level].add(fn=1)

    expert_added: list[Triple] = []
    for candidate in sorted(match.fp_candidates, key=lambda t: t.key):
        decision = verdicts.get(candidate)
        if decision is None:
            continue
        try:
            level = classify(candidate, lexicon, membership)
        except Unclassified:
            level = None
        if decision is Decision.ACCEPT:
            if level is None:
                unclassified = unclassified.add(tp=1)
            else:
                per_level[level] = per_level[level].add(tp=1)
            expert_added.append(candidate.with_provenance(Provenance.EXPERT_ADDED))
        else:
            if level is None:
                unclassified = unclassified.add(fp=1)
            else:
                per_level[level] = per_level[level].add(fp=1)

    overall = Counts()
    for counts in per_level.values():
        overall = overall.add(counts.tp, counts.fn, counts.fp)
    overall = overall.add(unclassified.tp, unclassified.fn, unclassified.fp)

    concepts = _concept_counts(match, expert_added, extracted_concepts, synonyms)
    report = StratifiedReport(
        per_level=per_level,
        overall=overall,
        concepts=concepts,
        unclassified=unclassified,
        pending=tuple(pending),
        expert_added=tuple(expert_added),
    )
    report.validate()
    return report


def _concept_counts(
    match: MatchResult,
    expert_added: Sequence[Triple],
    extracted_concepts: Iterable[Concept] | None,
    synonyms: SynonymMap,
) -> Counts:
    """Concept-level TP/FN/FP against the extended gold concept set."""
    gold_concepts: set[str] = set()
    for entry in list(match.tp_entries) + list(match.fn_entries):
        gold_concepts.add(synonyms.canonical(entry.triple.subject.normalized_label))
        gold_concepts.add(synonyms.canonical(entry.triple.object.normalized_label))
    for triple in expert_added:
        gold_concepts.add(synonyms.canonical(triple.subject.normalized_label))
        gold_concepts.add(synonyms.canonical(triple.object.normalized_label))

    if extracted_concepts is None:
        model_concepts: set[str] = set()
        for triple in set(match.tp) | match.fp_candidates:
            model_concepts.add(synonyms.canonical(triple.subject.normalized_label))
            model_concepts.add(synonyms.canonical(triple.object.normalized_label))
    else:
        model_concepts = {
            synonyms.canonical(c.normalized_label) for c in extracted_concepts
        }

    tp = len(gold_concepts & model_concepts)
    fn = len(gold_concepts - model_concepts)
    fp = len(model_concepts - gold_concepts)
    return Counts(tp=tp, fn=fn, fp=fp)


def verify_gold_levels(
    entries: Sequence[GoldEntry],
    lexicon: Lexicon | None = None,
    membership: MembershipFn | None = None,
) -> list[str]:
    """Report gold rows whose curated level disagrees with the classifier."""
    issues = []
    for entry in entries:
        try:
            computed = classify(entry.triple, lexicon, membership)
        except Unclassified:
            issues.append(f"{entry.triple!r}: membership unknown, cannot check level")
            continue
        if computed != entry.level:
            issues.append(
                f"{entry.triple!r}: curated level {int(entry.level)}, "
                f"classifier says {int(computed)}"
            )
    return issues


def verify_extracted_levels(
    rows: Sequence[ExtractedRow],
    lexicon: Lexicon | None = None,
    membership: MembershipFn | None = None,
) -> list[str]:
    """Report extracted rows whose printed type disagrees with the classifier."""
    issues = []
    for row in rows:
        try:
            computed = classify(row.triple, lexicon, membership)
        except Unclassified:
            issues.append(f"{row.triple!r}: membership unknown, cannot check level")
            continue
        if computed != row.claimed_level:
            issues.append(
                f"{row.triple!r}: table says level {int(row.claimed_level)}, "
                f"classifier says {int(computed)}"
            )
    return issues


def verify_found_claims(
    gold: Sequence[GoldEntry], match: MatchResult
) -> list[str]:
    """Report gold rows whose found-by-model flag disagrees with matching."""
    matched = {e.triple.key for e in match.tp_entries}
    issues = []
    for entry in gold:
        actually_found = entry.triple.key in matched
        if actually_found != entry.found_by_model:
            issues.append(
                f"{entry.triple!r}: table says found={entry.found_by_model}, "
                f"matcher says {actually_found}"
            )
    return issues


def _fmt(value: float | None) -> str:
    return "—" if value is None else f"{value:.2f}"


def report_to_json(report: StratifiedReport) -> dict:
    def counts_dict(counts: Counts) -> dict:
        return {
            "tp": counts.tp,
            "fn": counts.fn,
            "fp": counts.fp,
            "precision": counts.precision,
            "recall": counts.recall,
        }

    payload = {
        "levels": {str(int(level)): counts_dict(counts)
                   for level, counts in sorted(report.per_level.items())},
        "overall": counts_dict(report.overall),
        "concepts": counts_dict(report.concepts),
        "pending": ["|".join(t.key) for t in report.pending],
        "expert_added": ["|".join(t.key) for t in report.expert_added],
    }
    if report.unclassified != Counts():
        payload["unclassified"] = counts_dict(report.unclassified)
    return payload


def render_report_table(report: StratifiedReport) -> str:
    """Aligned text table of per-level and overall metrics."""
    header = f"{'stratum':<12}{'TP':>5}{'FN':>5}{'FP':>5}{'prec':>8}{'recall':>8}"
    lines = [header, "-" * len(header)]
    for level, counts in sorted(report.per_level.items()):
        lines.append(
            f"{'level ' + str(int(level)):<12}{counts.tp:>5}{counts.fn:>5}"
            f"{counts.fp:>5}{_fmt(counts.precision):>8}{_fmt(counts.recall):>8}"
        )
    if report.unclassified != Counts():
        c = report.unclassified
        lines.append(
            f"{'unclassified':<12}{c.tp:>5}{c.fn:>5}{c.fp:>5}"
            f"{_fmt(c.precision):>8}{_fmt(c.recall):>8}"
        )
    o = report.overall
    lines.append(
        f"{'overall':<12}{o.tp:>5}{o.fn:>5}{o.fp:>5}"
        f"{_fmt(o.precision):>8}{_fmt(o.recall):>8}"
    )
    c = report.concepts
    lines.append(
        f"{'concepts':<12}{c.tp:>5}{c.fn:>5}{c.fp:>5}"
        f"{_fmt(c.precision):>8}{_fmt(c.recall):>8}"
    )
    if report.pending:
        lines.append(f"pending verdicts: {len(report.pending)}")
    return "\n".join(lines)


def write_report(report: StratifiedReport, json_path: str | Path | None = None,
                 table_path: str | Path | None = None) -> None:
    if json_path is not None:
        Path(json_path).write_text(
            json.dumps(report_to_json(report), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    if table_path is not None:
        Path(table_path).write_text(render_report_table(report) + "\n",
                                    encoding="utf-8")
