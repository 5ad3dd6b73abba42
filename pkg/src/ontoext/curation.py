"""Expert review service: candidate listing, verdict capture, reporting.

State is event-sourced: an immutable candidate snapshot plus an append-only
JSONL verdict log. Replaying the log from an empty store reproduces the
exact same statuses, so restarting the service never loses or reorders a
decision. Verdict appends are serialized through one writer lock; reads
are lock-free over immutable snapshots of derived state.
"""
from __future__ import annotations

import enum
import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Literal, Optional

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .evaluation import (
    Decision,
    GoldEntry,
    MatchResult,
    StratifiedReport,
    SynonymMap,
    Unclassified,
    classify,
    load_extracted,
    load_gold,
    load_synonyms,
    match_triples,
    report_to_json,
    stratified_report,
)
from .model import DifficultyLevel, Provenance, Triple
from .owl_export import OntologyFragment, to_owl_xml
from .pipeline import load_snapshot_triples
from .terminology import Lexicon, load_lexicon

log = logging.getLogger(__name__)


class NotFound(KeyError):
    pass


class DuplicateVerdict(ValueError):
    """The reviewer already ruled on this candidate."""


class CandidateStatus(enum.Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    DECLINED = "declined"


@dataclass(frozen=True)
class Verdict:
    triple_id: str
    decision: Decision
    reviewer: str
    timestamp: str


@dataclass
class CandidateRecord:
    triple: Triple
    votes: int
    level: Optional[DifficultyLevel]
    source_section: str = ""
    context_snippet: str = ""
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def triple_id(self) -> str:
        return self.triple.triple_id()

    def reviewers(self) -> set[str]:
        return {v.reviewer for v in self.verdicts}

    def accepts(self) -> list[str]:
        return [v.reviewer for v in self.verdicts if v.decision is Decision.ACCEPT]

    def declines(self) -> list[str]:
        return [v.reviewer for v in self.verdicts if v.decision is Decision.DECLINE]

    def status(self, required_verdicts: int) -> CandidateStatus:
        if len(self.accepts()) >= required_verdicts:
            return CandidateStatus.ACCEPTED
        if len(self.declines()) >= required_verdicts:
            return CandidateStatus.DECLINED
        return CandidateStatus.PENDING

    def conflicted(self, required_verdicts: int) -> bool:
        return (
            self.status(required_verdicts) is CandidateStatus.PENDING
            and bool(self.accepts())
            and bool(self.declines())
        )


class CurationStore:
    """Candidates awaiting review plus the verdict log that resolves them."""

    def __init__(
        self,
        gold: list[GoldEntry],
        candidates: Iterable[tuple[Triple, str]],
        lexicon: Lexicon,
        synonyms: SynonymMap | None = None,
        verdict_log_path: str | Path | None = None,
        required_verdicts: int = 1,
        base_iri: str | None = None,
        extracted_concepts=None,
    ):
        if required_verdicts < 1:
            raise ValueError("required_verdicts must be >= 1")
        self.gold = gold
        self.lexicon = lexicon
        self.synonyms = synonyms or SynonymMap()
        self.required_verdicts = required_verdicts
        self.verdict_log_path = Path(verdict_log_path) if verdict_log_path else None
        self.base_iri = base_iri
        self.extracted_concepts = extracted_concepts
        self._write_lock = threading.Lock()

        triples = [t for t, _snippet in candidates]
        snippets = {t.key: snippet for t, snippet in candidates}
        self.match: MatchResult = match_triples(triples, gold, self.synonyms)
        self._records: dict[str, CandidateRecord] = {}
        for triple in sorted(self.match.fp_candidates, key=lambda t: t.key):
            try:
                level: Optional[DifficultyLevel] = classify(triple, lexicon)
            except Unclassified:
                level = None
            record = CandidateRecord(
                triple=triple,
                votes=triple.votes,
                level=level,
                source_section=triple.source_section,
                context_snippet=snippets.get(triple.key, ""),
            )
            self._records[record.triple_id] = record

        if self.verdict_log_path and self.verdict_log_path.exists():
            self._replay_log()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_files(
        cls,
        snapshot_path: str | Path,
        gold_path: str | Path,
        lexicon_path: str | Path,
        synonyms_path: str | Path | None = None,
        verdict_log_path: str | Path | None = None,
        required_verdicts: int = 1,
        base_iri: str | None = None,
    ) -> "CurationStore":
        """Load candidates from a pipeline snapshot (.json) or an
        extracted-triples table (.tsv)."""
        snapshot_path = Path(snapshot_path)
        if snapshot_path.suffix == ".json":
            triples = load_snapshot_triples(snapshot_path)
        else:
            triples = [row.triple for row in load_extracted(snapshot_path)]
        gold = load_gold(gold_path)
        lexicon = load_lexicon(lexicon_path)
        synonyms = load_synonyms(synonyms_path) if synonyms_path else None
        return cls(
            gold=gold,
            candidates=[(t, "") for t in triples],
            lexicon=lexicon,
            synonyms=synonyms,
            verdict_log_path=verdict_log_path,
            required_verdicts=required_verdicts,
            base_iri=base_iri,
        )

    # -- event sourcing -------------------------------------------------------

    def _replay_log(self) -> None:
        assert self.verdict_log_path is not None
        for number, line in enumerate(
            self.verdict_log_path.read_text(encoding="utf-8").splitlines(), 1
        ):
            if not line.strip():
                continue
            entry = json.loads(line)
            verdict = Verdict(
                triple_id=entry["triple_id"],
                decision=Decision(entry["decision"]),
                reviewer=entry["reviewer"],
                timestamp=entry["timestamp"],
            )
            record = self._records.get(verdict.triple_id)
            if record is None:
                raise NotFound(
                    f"verdict log line {number} references unknown candidate "
                    f"{verdict.triple_id}"
                )
            if verdict.reviewer in record.reviewers():
                raise DuplicateVerdict(
                    f"verdict log line {number} duplicates reviewer "
                    f"{verdict.reviewer!r} on {verdict.triple_id}"
                )
            record.verdicts.append(verdict)

    def submit_verdict(self, triple_id: str, decision: Decision, reviewer: str) -> CandidateRecord:
        reviewer = reviewer.strip()
        if not reviewer:
            raise ValueError("reviewer must be non-empty")
        with self._write_lock:
            record = self._records.get(triple_id)
            if record is None:
                raise NotFound(triple_id)
            if reviewer in record.reviewers():
                raise DuplicateVerdict(
                    f"reviewer {reviewer!r} already ruled on {triple_id}"
                )
            verdict = Verdict(
                triple_id=triple_id,
                decision=decision,
                reviewer=reviewer,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
            if self.verdict_log_path is not None:
                with open(self.verdict_log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({
                        "triple_id": verdict.triple_id,
                        "decision": verdict.decision.value,
                        "reviewer": verdict.reviewer,
                        "timestamp": verdict.timestamp,
                    }) + "\n")
            record.verdicts.append(verdict)
            return record

    # -- queries --------------------------------------------------------------

    def get(self, triple_id: str) -> CandidateRecord:
        record = self._records.get(triple_id)
        if record is None:
            raise NotFound(triple_id)
        return record

    def list_candidates(
        self,
        status: CandidateStatus | None = None,
        level: int | None = None,
        section: str | None = None,
    ) -> list[CandidateRecord]:
        """Stable ordering: by level (unclassified last), then subject label."""
        records = sorted(
            self._records.values(),
            key=lambda r: (
                int(r.level) if r.level is not None else 99,
                r.triple.key,
            ),
        )
        out = []
        for record in records:
            if status is not None and record.status(self.required_verdicts) is not status:
                continue
            if level is not None and (record.level is None or int(record.level) != level):
                continue
            if section is not None and record.source_section != section:
                continue
            out.append(record)
        return out

    def counts(self) -> dict[str, int]:
        total = len(self._records)
        resolved = sum(
            1 for r in self._records.values()
            if r.status(self.required_verdicts) is not CandidateStatus.PENDING
        )
        return {"total": total, "resolved": resolved, "pending": total - resolved}

    def verdict_map(self) -> dict[Triple, Decision]:
        verdicts: dict[Triple, Decision] = {}
        for record in self._records.values():
            status = record.status(self.required_verdicts)
            if status is CandidateStatus.ACCEPTED:
                verdicts[record.triple] = Decision.ACCEPT
            elif status is CandidateStatus.DECLINED:
                verdicts[record.triple] = Decision.DECLINE
        return verdicts

    def report(self) -> StratifiedReport:
        """Current-state report; unresolved candidates are listed as pending."""
        return stratified_report(
            self.match,
            self.verdict_map(),
            self.lexicon,
            extracted_concepts=self.extracted_concepts,
            synonyms=self.synonyms,
            allow_pending=True,
        )

    def accepted_triples(self) -> list[Triple]:
        return [
            r.triple.with_provenance(Provenance.EXPERT_ADDED)
            for r in self._records.values()
            if r.status(self.required_verdicts) is CandidateStatus.ACCEPTED
        ]

    def gold_relation_count(self) -> int:
        """Size of the gold standard including expert-added extensions."""
        return len(self.gold) + len(self.accepted_triples())

    def export_owl(self) -> str:
        """Gold plus accepted triples, as OWL."""
        triples = [entry.triple for entry in self.gold] + self.accepted_triples()
        kwargs = {"base_iri": self.base_iri} if self.base_iri else {}
        return to_owl_xml(OntologyFragment.from_triples(triples, **kwargs))


# -- HTTP layer ----------------------------------------------------------------


class VerdictBody(BaseModel):
    triple_id: str
    decision: Literal["accept", "decline"]
    reviewer: str


def _record_json(record: CandidateRecord, required_verdicts: int) -> dict:
    return {
        "triple_id": record.triple_id,
        "subject": record.triple.subject.normalized_label,
        "relation": record.triple.relation.value,
        "object": record.triple.object.normalized_label,
        "votes": record.votes,
        "level": int(record.level) if record.level is not None else None,
        "source_section": record.source_section,
        "context_snippet": record.context_snippet,
        "status": record.status(required_verdicts).value,
        "accepts": record.accepts(),
        "declines": record.declines(),
        "conflict": record.conflicted(required_verdicts),
    }


def create_app(store: CurationStore, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ontoext curation service")

    @app.get("/health")
    def health():
        return {"status": "ok", **store.counts()}

    @app.get("/candidates")
    def candidates(
        status: str | None = Query(default=None),
        level: str | None = Query(default=None),
        section: str | None = Query(default=None),
    ):
        # empty query values mean "no filter"
        status_filter = None
        if status:
            try:
                status_filter = CandidateStatus(status)
            except ValueError:
                raise HTTPException(status_code=422, detail=f"bad status {status!r}")
        level_filter = None
        if level:
            try:
                level_filter = int(level)
            except ValueError:
                raise HTTPException(status_code=422, detail=f"bad level {level!r}")
        records = store.list_candidates(status_filter, level_filter, section or None)
        return {
            "candidates": [_record_json(r, store.required_verdicts) for r in records],
            **store.counts(),
            "required_verdicts": store.required_verdicts,
        }

    @app.post("/verdicts")
    def verdicts(body: VerdictBody):
        try:
            record = store.submit_verdict(
                body.triple_id, Decision(body.decision), body.reviewer
            )
        except NotFound:
            raise HTTPException(status_code=404,
                                detail=f"no candidate {body.triple_id}")
        except DuplicateVerdict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _record_json(record, store.required_verdicts)

    @app.get("/report")
    def report():
        result = store.report()
        payload = report_to_json(result)
        payload["pending_count"] = len(result.pending)
        payload["gold_relations"] = store.gold_relation_count()
        return payload

    @app.get("/export")
    def export():
        return Response(content=store.export_owl(),
                        media_type="application/rdf+xml")

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
