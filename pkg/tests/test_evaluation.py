import pytest

from ontoext.evaluation import (
    Counts,
    Decision,
    GoldEntry,
    GoldParseError,
    PendingVerdicts,
    SynonymMap,
    Unclassified,
    classify,
    load_extracted,
    load_gold,
    load_synonyms,
    match_triples,
    precision,
    recall,
    render_report_table,
    report_to_json,
    stratified_report,
    verify_gold_levels,
)
from ontoext.model import (
    Concept,
    DifficultyLevel,
    Provenance,
    RelationType,
    SnomedStatus,
    Triple,
)
from ontoext.terminology import Lexicon


def T(s, r, o, **kw):
    return Triple(Concept(s), r, Concept(o), **kw)


LEX = Lexicon(frozenset({"acupuncture", "fatigue", "yoga", "stress"}))


class TestLoadGold:
    def test_basic_row(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text(
            "concept_a\trelation\tconcept_b\tclassification\tin_model_output\n"
            "Acupuncture\ttreats\tfatigue\t3\tYes\n",
            encoding="utf-8",
        )
        entries = load_gold(path)
        assert len(entries) == 1
        assert entries[0].triple.key == ("acupuncture", "treats", "fatigue")
        assert entries[0].level is DifficultyLevel.LEVEL_3
        assert entries[0].found_by_model is True
        assert entries[0].triple.provenance is Provenance.GOLD

    def test_relation_typo_repaired(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text("a\tresut-of\tb\t4\tNo\n", encoding="utf-8")
        assert load_gold(path)[0].triple.relation is RelationType.RESULT_OF

    def test_bad_level_rejected(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text("a\ttreats\tb\t5\tNo\n", encoding="utf-8")
        with pytest.raises(GoldParseError):
            load_gold(path)

    def test_duplicates_dropped(self, tmp_path):
        path = tmp_path / "gold.tsv"
        path.write_text("a\ttreats\tb\t3\tNo\nA \ttreats\tb\t3\tNo\n",
                        encoding="utf-8")
        assert len(load_gold(path)) == 1


class TestClassify:
    def membership(self, in_labels):
        def fn(concept):
            return (SnomedStatus.IN_SNOMED if concept.normalized_label in in_labels
                    else SnomedStatus.NOT_IN_SNOMED)
        return fn

    def test_four_rules(self):
        both = self.membership({"a", "b"})
        one = self.membership({"a"})
        assert classify(T("a", RelationType.IS_A, "b"), membership=both) == 1
        assert classify(T("a", RelationType.IS_A, "b"), membership=one) == 2
        assert classify(T("a", RelationType.TREATS, "b"), membership=both) == 3
        assert classify(T("a", RelationType.TREATS, "b"), membership=one) == 4

    def test_totality_over_membership_and_relation_combos(self):
        for subject_in in (True, False):
            for object_in in (True, False):
                members = set()
                if subject_in:
                    members.add("a")
                if object_in:
                    members.add("b")
                for relation in RelationType:
                    level = classify(T("a", relation, "b"),
                                     membership=self.membership(members))
                    both = subject_in and object_in
                    if relation is RelationType.IS_A:
                        assert level == (1 if both else 2)
                    else:
                        assert level == (3 if both else 4)

    def test_unknown_membership_raises(self):
        def unknown(_):
            return SnomedStatus.UNKNOWN
        with pytest.raises(Unclassified):
            classify(T("a", RelationType.TREATS, "b"), membership=unknown)

    def test_reference_examples(self):
        assert classify(T("acupuncture", RelationType.TREATS, "fatigue"), LEX) == 3
        assert classify(T("yoga", RelationType.IS_A, "meditation club"), LEX) == 2


class TestMatchTriples:
    def gold(self):
        return [
            GoldEntry(T("acupuncture", RelationType.TREATS, "fatigue",
                        provenance=Provenance.GOLD), DifficultyLevel.LEVEL_3, True),
            GoldEntry(T("meditation", RelationType.PART_OF, "yoga",
                        provenance=Provenance.GOLD), DifficultyLevel.LEVEL_1, False),
        ]

    def test_identity_case(self):
        gold = self.gold()
        result = match_triples([e.triple for e in gold], gold)
        assert result.fn == frozenset()
        assert result.fp_candidates == frozenset()
        assert result.tp == {e.triple for e in gold}

    def test_partial_match_and_candidates(self):
        gold = self.gold()
        extracted = [T("Acupuncture", RelationType.TREATS, "Fatigue"),
                     T("yoga", RelationType.AFFECTS, "cancer patients")]
        result = match_triples(extracted, gold)
        assert {e.triple.key for e in result.tp_entries} == \
            {("acupuncture", "treats", "fatigue")}
        assert {e.triple.key for e in result.fn_entries} == \
            {("meditation", "part-of", "yoga")}
        assert {t.key for t in result.fp_candidates} == \
            {("yoga", "affects", "cancer patients")}

    def test_partition_invariant(self):
        gold = self.gold()
        result = match_triples([T("x", RelationType.TREATS, "y")], gold)
        assert result.tp | result.fn == {e.triple for e in gold}
        assert result.tp & result.fn == frozenset()
        assert not (result.fp_candidates & {e.triple for e in gold})

    def test_synonyms_widen_matching(self):
        gold = [GoldEntry(T("acupuncture", RelationType.TREATS, "fatigue",
                            provenance=Provenance.GOLD),
                          DifficultyLevel.LEVEL_3, True)]
        synonyms = SynonymMap([["fatigue", "crf"]])
        result = match_triples([T("acupuncture", RelationType.TREATS, "CRF")],
                               gold, synonyms)
        assert len(result.tp_entries) == 1
        assert result.fp_candidates == frozenset()

    def test_relation_must_match_exactly(self):
        gold = [GoldEntry(T("msbr", RelationType.TREATS, "sleep",
                            provenance=Provenance.GOLD),
                          DifficultyLevel.LEVEL_3, False)]
        result = match_triples([T("msbr", RelationType.AFFECTS, "sleep")], gold)
        assert result.tp == frozenset()
        assert len(result.fp_candidates) == 1

    def test_invariant_under_renormalization_and_input_order(self):
        gold = self.gold()
        extracted = [T(" Acupuncture ", RelationType.TREATS, "FATIGUE"),
                     T("yoga", RelationType.AFFECTS, "cancer patients")]
        forward = match_triples(extracted, gold)
        backward = match_triples(list(reversed(extracted)), gold)
        assert forward.tp == backward.tp
        assert forward.fn == backward.fn
        assert forward.fp_candidates == backward.fp_candidates

    def test_synonym_group_order_is_immaterial(self):
        gold = [GoldEntry(T("acupuncture", RelationType.TREATS, "fatigue",
                            provenance=Provenance.GOLD),
                          DifficultyLevel.LEVEL_3, True)]
        extracted = [T("acupuncture", RelationType.TREATS, "CRF")]
        for group in (["fatigue", "crf"], ["crf", "fatigue"]):
            result = match_triples(extracted, gold, SynonymMap([group]))
            assert len(result.tp_entries) == 1


class TestMetrics:
    def test_level3_precision(self):
        assert precision(36, 14) == pytest.approx(0.72)

    def test_level2_recall(self):
        assert recall(11, 14) == pytest.approx(0.44)

    def test_zero_denominators_undefined(self):
        assert precision(0, 0) is None
        assert recall(0, 0) is None

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            precision(-1, 0)


class TestStratifiedReport:
    def setup_case(self):
        gold = [
            GoldEntry(T("acupuncture", RelationType.TREATS, "fatigue",
                        provenance=Provenance.GOLD), DifficultyLevel.LEVEL_3, True),
            GoldEntry(T("meditation", RelationType.PART_OF, "yoga",
                        provenance=Provenance.GOLD), DifficultyLevel.LEVEL_1, False),
        ]
        extracted = [
            T("acupuncture", RelationType.TREATS, "fatigue"),
            T("yoga", RelationType.TREATS, "stress"),        # will be accepted
            T("fatigue", RelationType.AFFECTS, "meditation"),  # will be declined
        ]
        lexicon = Lexicon(frozenset({"acupuncture", "fatigue", "yoga",
                                     "stress", "meditation"}))
        return gold, extracted, lexicon

    def test_pending_raises_without_flag(self):
        gold, extracted, lexicon = self.setup_case()
        match = match_triples(extracted, gold)
        with pytest.raises(PendingVerdicts):
            stratified_report(match, {}, lexicon)

    def test_allow_pending_lists_them(self):
        gold, extracted, lexicon = self.setup_case()
        match = match_triples(extracted, gold)
        report = stratified_report(match, {}, lexicon, allow_pending=True)
        assert len(report.pending) == 2
        assert report.overall.tp == 1 and report.overall.fn == 1

    def test_verdicts_resolve_counts(self):
        gold, extracted, lexicon = self.setup_case()
        match = match_triples(extracted, gold)
        verdicts = {
            T("yoga", RelationType.TREATS, "stress"): Decision.ACCEPT,
            T("fatigue", RelationType.AFFECTS, "meditation"): Decision.DECLINE,
        }
        report = stratified_report(match, verdicts, lexicon)
        assert report.overall == Counts(tp=2, fn=1, fp=1)
        # accepted candidate classified level 3 (both in lexicon, non is-a)
        assert report.per_level[DifficultyLevel.LEVEL_3] == Counts(tp=2, fn=0, fp=1)
        assert report.per_level[DifficultyLevel.LEVEL_1] == Counts(tp=0, fn=1, fp=0)
        assert [t.key for t in report.expert_added] == [("yoga", "treats", "stress")]
        assert all(t.provenance is Provenance.EXPERT_ADDED for t in report.expert_added)
        report.validate()

    def test_empty_extraction_edge(self):
        gold, _, lexicon = self.setup_case()
        match = match_triples([], gold)
        report = stratified_report(match, {}, lexicon)
        assert report.overall.recall == 0.0
        assert report.overall.precision is None

    def test_concept_counts(self):
        gold, extracted, lexicon = self.setup_case()
        match = match_triples(extracted, gold)
        verdicts = {
            T("yoga", RelationType.TREATS, "stress"): Decision.ACCEPT,
            T("fatigue", RelationType.AFFECTS, "meditation"): Decision.DECLINE,
        }
        report = stratified_report(match, verdicts, lexicon)
        # gold concepts: acupuncture fatigue meditation yoga + stress (added)
        # model concepts: acupuncture fatigue yoga stress meditation
        assert report.concepts == Counts(tp=5, fn=0, fp=0)

    def test_table_rendering_shows_dash_for_undefined(self):
        gold, _, lexicon = self.setup_case()
        match = match_triples([], gold)
        report = stratified_report(match, {}, lexicon)
        table = render_report_table(report)
        assert "—" in table
        payload = report_to_json(report)
        assert payload["overall"]["precision"] is None


@pytest.fixture(scope="module")
def loaded():
    from ontoext.data import fixture_path
    from ontoext.terminology import load_lexicon

    gold = load_gold(fixture_path("gold_standard.tsv"))
    rows = load_extracted(fixture_path("extracted_triples.tsv"))
    synonyms = load_synonyms(fixture_path("synonyms.txt"))
    lexicon = load_lexicon(fixture_path("snomed_lexicon.tsv"))
    return gold, rows, synonyms, lexicon


class TestBundledDatasetEvaluation:
    """The reconciliation identities the bundled tables must reproduce."""

    def test_row_counts(self, loaded):
        gold, rows, _, _ = loaded
        assert len(gold) == 52
        assert len(rows) == 83

    def test_matching_reproduces_found_column(self, loaded):
        gold, rows, synonyms, _ = loaded
        match = match_triples([r.triple for r in rows], gold, synonyms)
        assert len(match.tp_entries) == 14
        assert len(match.fn_entries) == 38
        assert len(match.fp_candidates) == 69
        assert {e.triple.key for e in match.tp_entries} == \
            {e.triple.key for e in gold if e.found_by_model}
        claimed = {r.triple.key for r in rows if r.in_gold_claim}
        matched_extracted = {r.triple.key for r in rows
                             if r.triple not in match.fp_candidates}
        assert matched_extracted == claimed

    def test_single_gold_level_violation_reported(self, loaded):
        gold, _, _, lexicon = loaded
        issues = verify_gold_levels(gold, lexicon)
        assert len(issues) == 1
        assert "meditation" in issues[0] and "yoga" in issues[0]
