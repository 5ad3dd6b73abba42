"""OWL serialization of accepted concepts and triples as RDF/XML.

Every concept becomes an owl:Class with an rdfs:label. An is-a triple
becomes a plain rdfs:subClassOf axiom; any other relation becomes a
subclass-of-existential-restriction axiom (subject ⊑ ∃relation.object)
with the relation declared once as an owl:ObjectProperty. This is the
attribute style SNOMED itself uses and renders as labeled edges in
WebVOWL-class visualizers. Output is sorted by IRI so identical fragments
serialize byte-identically.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from io import BytesIO
from pathlib import Path

from .model import Concept, RelationType, Triple, canonical_relation

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"

DEFAULT_BASE_IRI = "https://example.org/ontoext/fatigue"


class IntegrityError(ValueError):
    """A triple references a concept missing from the fragment."""


_SLUG_STRIP = re.compile(r"[^a-z0-9]+")


def iri_slug(label: str) -> str:
    """Deterministic URL-safe fragment for a normalized label."""
    slug = _SLUG_STRIP.sub("-", label.lower()).strip("-")
    return slug or "blank"


@dataclass(frozen=True)
class OntologyFragment:
    concepts: frozenset[Concept]
    triples: frozenset[Triple]
    base_iri: str = DEFAULT_BASE_IRI

    def __post_init__(self):
        for triple in self.triples:
            if triple.subject not in self.concepts or triple.object not in self.concepts:
                raise IntegrityError(
                    f"triple {triple!r} references a concept outside the fragment"
                )

    @classmethod
    def from_triples(cls, triples, base_iri: str = DEFAULT_BASE_IRI) -> "OntologyFragment":
        """Fragment over exactly the concepts the triples mention."""
        triple_set = frozenset(triples)
        concepts = frozenset(
            c for t in triple_set for c in (t.subject, t.object)
        )
        return cls(concepts=concepts, triples=triple_set, base_iri=base_iri)


def _class_iris(base: str, concepts: frozenset[Concept]) -> dict[Concept, str]:
    """Slug-based IRIs, deterministically disambiguated on collision."""
    iris: dict[Concept, str] = {}
    taken: set[str] = set()
    for concept in sorted(concepts, key=lambda c: c.normalized_label):
        slug = iri_slug(concept.normalized_label)
        candidate = slug
        suffix = 2
        while candidate in taken:
            candidate = f"{slug}-{suffix}"
            suffix += 1
        taken.add(candidate)
        iris[concept] = f"{base}#{candidate}"
    return iris


def _property_iri(base: str, relation: RelationType) -> str:
    return f"{base}#rel-{iri_slug(relation.value)}"


def to_owl_xml(fragment: OntologyFragment) -> str:
    """Serialize the fragment. Pure: same fragment, same bytes."""
    ET.register_namespace("rdf", RDF_NS)
    ET.register_namespace("rdfs", RDFS_NS)
    ET.register_namespace("owl", OWL_NS)
    base = fragment.base_iri
    class_iri = _class_iris(base, fragment.concepts)

    root = ET.Element(f"{{{RDF_NS}}}RDF")
    ET.SubElement(root, f"{{{OWL_NS}}}Ontology",
                  {f"{{{RDF_NS}}}about": base})

    relations = sorted({t.relation for t in fragment.triples
                        if t.relation is not RelationType.IS_A},
                       key=lambda r: r.value)
    for relation in relations:
        prop = ET.SubElement(root, f"{{{OWL_NS}}}ObjectProperty",
                             {f"{{{RDF_NS}}}about": _property_iri(base, relation)})
        label = ET.SubElement(prop, f"{{{RDFS_NS}}}label")
        label.text = relation.value

    by_subject: dict[Concept, list[Triple]] = {}
    for triple in fragment.triples:
        by_subject.setdefault(triple.subject, []).append(triple)

    for concept in sorted(fragment.concepts, key=lambda c: class_iri[c]):
        cls = ET.SubElement(root, f"{{{OWL_NS}}}Class",
                            {f"{{{RDF_NS}}}about": class_iri[concept]})
        label = ET.SubElement(cls, f"{{{RDFS_NS}}}label")
        label.text = concept.normalized_label
        for triple in sorted(by_subject.get(concept, []), key=lambda t: t.key):
            if triple.relation is RelationType.IS_A:
                ET.SubElement(cls, f"{{{RDFS_NS}}}subClassOf",
                              {f"{{{RDF_NS}}}resource": class_iri[triple.object]})
            else:
                sub = ET.SubElement(cls, f"{{{RDFS_NS}}}subClassOf")
                restriction = ET.SubElement(sub, f"{{{OWL_NS}}}Restriction")
                ET.SubElement(restriction, f"{{{OWL_NS}}}onProperty",
                              {f"{{{RDF_NS}}}resource": _property_iri(base, triple.relation)})
                ET.SubElement(
                    restriction, f"{{{OWL_NS}}}someValuesFrom",
                    {f"{{{RDF_NS}}}resource": class_iri[triple.object]})

    ET.indent(root, space="  ")
    buffer = BytesIO()
    ET.ElementTree(root).write(buffer, encoding="utf-8", xml_declaration=True)
    return buffer.getvalue().decode("utf-8") + "\n"


def parse_owl_xml(document: str) -> set[tuple[str, str, str]]:
    """Recover (subject label, relation, object label) keys from a document
    produced by to_owl_xml. Inverse of the serialization on its image."""
    root = ET.fromstring(document)
    label_by_iri: dict[str, str] = {}
    property_by_iri: dict[str, str] = {}
    for prop in root.findall(f"{{{OWL_NS}}}ObjectProperty"):
        iri = prop.get(f"{{{RDF_NS}}}about", "")
        label = prop.findtext(f"{{{RDFS_NS}}}label", default="")
        property_by_iri[iri] = label
    for cls in root.findall(f"{{{OWL_NS}}}Class"):
        iri = cls.get(f"{{{RDF_NS}}}about", "")
        label_by_iri[iri] = cls.findtext(f"{{{RDFS_NS}}}label", default="")

    triples: set[tuple[str, str, str]] = set()
    for cls in root.findall(f"{{{OWL_NS}}}Class"):
        subject = label_by_iri[cls.get(f"{{{RDF_NS}}}about", "")]
        for sub in cls.findall(f"{{{RDFS_NS}}}subClassOf"):
            resource = sub.get(f"{{{RDF_NS}}}resource")
            if resource is not None:
                triples.add((subject, RelationType.IS_A.value, label_by_iri[resource]))
                continue
            restriction = sub.find(f"{{{OWL_NS}}}Restriction")
            if restriction is None:
                continue
            on_property = restriction.find(f"{{{OWL_NS}}}onProperty")
            some_values = restriction.find(f"{{{OWL_NS}}}someValuesFrom")
            if on_property is None or some_values is None:
                continue
            relation = property_by_iri[on_property.get(f"{{{RDF_NS}}}resource", "")]
            obj = label_by_iri[some_values.get(f"{{{RDF_NS}}}resource", "")]
            triples.add((subject, relation, obj))
    return triples


def parsed_triples(document: str) -> set[Triple]:
    """Parse back into model triples (labels become concepts)."""
    return {
        Triple(Concept(s), canonical_relation(r), Concept(o))
        for s, r, o in parse_owl_xml(document)
    }


def write_owl(fragment: OntologyFragment, path: str | Path) -> None:
    Path(path).write_text(to_owl_xml(fragment), encoding="utf-8")


def axiom_counts(document: str) -> tuple[int, int]:
    """(plain subclass axioms, restriction axioms) in the document."""
    root = ET.fromstring(document)
    plain = 0
    restricted = 0
    for cls in root.findall(f"{{{OWL_NS}}}Class"):
        for sub in cls.findall(f"{{{RDFS_NS}}}subClassOf"):
            if sub.get(f"{{{RDF_NS}}}resource") is not None:
                plain += 1
            elif sub.find(f"{{{OWL_NS}}}Restriction") is not None:
                restricted += 1
    return plain, restricted
