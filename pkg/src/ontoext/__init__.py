"""ontoext: LLM-assisted ontology extension with consensus voting,
stratified evaluation against an expert gold standard, human-in-the-loop
curation, and OWL export."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Concept,
    DifficultyLevel,
    Provenance,
    RelationType,
    SnomedStatus,
    Triple,
    canonical_relation,
    normalize_label,
)
