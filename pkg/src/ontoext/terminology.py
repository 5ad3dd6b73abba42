"""SNOMED-CT membership lookups used by difficulty classification.

The default backend is a local lexicon file (one term per line, optional
tab-separated code), which is all the bundled dataset needs. A minimal
terminology-server client is provided for deployments that have one; a
transport failure there answers `unknown`, never a silent false.
"""
from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .model import Concept, EmptyLabel, SnomedStatus, normalize_label

log = logging.getLogger(__name__)


class LexiconLoadError(RuntimeError):
    """Raised when the lexicon file cannot be read."""


class LexiconSource(enum.Enum):
    LOCAL_FILE = "local_file"
    REMOTE_SERVER = "remote_server"


@dataclass(frozen=True)
class Lexicon:
    """Immutable set of normalized in-terminology labels."""

    entries: frozenset[str]
    codes: dict[str, str] = field(default_factory=dict)
    source: LexiconSource = LexiconSource.LOCAL_FILE

    def __contains__(self, label: str) -> bool:
        return normalize_label(label) in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a `label[TAB code]` file into a deduplicated, normalized lexicon.

    Malformed lines are skipped with a warning; an unreadable file raises
    LexiconLoadError.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconLoadError(f"cannot read lexicon {path}: {exc}") from exc
    entries: set[str] = set()
    codes: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) > 2:
            log.warning("lexicon line %d has %d fields, skipping", number, len(parts))
            continue
        try:
            label = normalize_label(parts[0])
        except EmptyLabel:
            log.warning("lexicon line %d has an empty label, skipping", number)
            continue
        entries.add(label)
        if len(parts) == 2 and parts[1].strip():
            codes[label] = parts[1].strip()
    return Lexicon(frozenset(entries), codes, LexiconSource.LOCAL_FILE)


def in_snomed(concept: Concept | str, lexicon: Lexicon) -> SnomedStatus:
    """Membership by exact normalized match against the lexicon."""
    label = concept.normalized_label if isinstance(concept, Concept) else normalize_label(concept)
    if label in lexicon.entries:
        return SnomedStatus.IN_SNOMED
    return SnomedStatus.NOT_IN_SNOMED


@dataclass
class TerminologyServerClient:
    """Term-search client against a remote terminology server.

    A non-empty result set means the term exists; an empty set means it does
    not; any transport problem yields UNKNOWN so callers never mistake an
    outage for absence.
    """

    base_url: str
    search_path: str = "/search"
    credential_env: str = "ONTOEXT_TERMINOLOGY_KEY"
    timeout: float = 10.0

    def lookup(self, concept: Concept | str) -> SnomedStatus:
        label = (
            concept.normalized_label if isinstance(concept, Concept)
            else normalize_label(concept)
        )
        headers = {}
        credential = os.environ.get(self.credential_env)
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        url = self.base_url.rstrip("/") + self.search_path
        try:
            response = httpx.get(url, params={"term": label}, headers=headers,
                                 timeout=self.timeout)
            if response.status_code >= 400:
                log.warning("terminology server returned HTTP %d", response.status_code)
                return SnomedStatus.UNKNOWN
            results = response.json().get("results", [])
        except (httpx.HTTPError, ValueError) as exc:
            log.warning("terminology lookup failed: %s", exc)
            return SnomedStatus.UNKNOWN
        return SnomedStatus.IN_SNOMED if results else SnomedStatus.NOT_IN_SNOMED
