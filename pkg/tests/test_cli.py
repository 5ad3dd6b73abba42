import json

import pytest

from ontoext.cli import main
from ontoext.data import fixture_path


def run(argv):
    return main([str(a) for a in argv])


class TestEvaluate:
    def test_bundled_dataset_with_adjudication(self, tmp_path, capsys):
        json_out = tmp_path / "report.json"
        code = run(["evaluate", "--verdicts", fixture_path("adjudication.tsv"),
                    "--json-out", json_out])
        assert code == 0
        out = capsys.readouterr().out
        assert "overall" in out
        payload = json.loads(json_out.read_text())
        assert payload["overall"]["tp"] == 53
        assert payload["overall"]["fp"] == 30
        assert payload["overall"]["fn"] == 38
        assert payload["overall"]["precision"] == pytest.approx(53 / 83)
        assert payload["overall"]["recall"] == pytest.approx(53 / 91)
        # discrepancies are surfaced, not hidden
        assert "gold level rule violations" in out
        assert "extracted type conflicts" in out

    def test_resolve_column_strict(self, tmp_path):
        json_out = tmp_path / "report.json"
        code = run(["evaluate", "--resolve-column", "--json-out", json_out])
        assert code == 0
        payload = json.loads(json_out.read_text())
        assert payload["overall"]["tp"] == 14
        assert payload["overall"]["fp"] == 69
        assert payload["overall"]["fn"] == 38

    def test_pending_warning_without_resolution(self, tmp_path, capsys):
        code = run(["evaluate"])
        assert code == 0
        assert "unresolved" in capsys.readouterr().out

    def test_incomplete_verdict_file_fails(self, tmp_path):
        verdicts = tmp_path / "partial.tsv"
        verdicts.write_text("subject\trelation\tobject\tdecision\n"
                            "Yoga\taffects\tStress\taccept\n", encoding="utf-8")
        assert run(["evaluate", "--verdicts", verdicts]) == 1


class TestExtractReplay:
    def test_replay_determinism(self, tmp_path):
        outputs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code = run(["extract",
                        "--context", fixture_path("quickstart/context.txt"),
                        "--transcript", fixture_path("quickstart/transcript.jsonl"),
                        "--mode", "replay", "--out", out])
            assert code == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_replay_verify_ok(self):
        code = run(["replay-verify",
                    "--context", fixture_path("quickstart/context.txt"),
                    "--transcript", fixture_path("quickstart/transcript.jsonl")])
        assert code == 0

    def test_replay_against_wrong_context_fails(self, tmp_path):
        context = tmp_path / "other.txt"
        context.write_text("entirely different passage", encoding="utf-8")
        code = run(["extract", "--context", context,
                    "--transcript", fixture_path("quickstart/transcript.jsonl"),
                    "--mode", "replay", "--out", tmp_path / "x.json"])
        assert code == 1  # fingerprint mismatch is an error, not a skip


class TestExport:
    def test_empty_snapshot(self, tmp_path):
        snapshot = tmp_path / "empty.json"
        snapshot.write_text(json.dumps({"concepts": [], "triples": []}),
                            encoding="utf-8")
        out = tmp_path / "empty.owl"
        assert run(["export", "--in", snapshot, "--out", out]) == 0
        text = out.read_text()
        assert text.startswith("<?xml")
        import xml.etree.ElementTree as ET

        ET.fromstring(text)

    def test_export_from_extracted_table(self, tmp_path):
        out = tmp_path / "cands.owl"
        code = run(["export", "--in", fixture_path("extracted_triples.tsv"),
                    "--out", out])
        assert code == 0
        from ontoext.owl_export import axiom_counts

        plain, restricted = axiom_counts(out.read_text())
        assert plain + restricted == 83

    def test_missing_input_fails(self, tmp_path):
        assert run(["export", "--in", tmp_path / "nope.json",
                    "--out", tmp_path / "o.owl"]) == 1


class TestClassifySubcommand:
    def test_levels_annotated(self, tmp_path):
        snapshot = tmp_path / "snap.json"
        snapshot.write_text(json.dumps({
            "concepts": [{"label": "acupuncture", "votes": 10}],
            "triples": [{"subject": "acupuncture", "relation": "treats",
                         "object": "fatigue", "votes": 10,
                         "source_section": ""}],
        }), encoding="utf-8")
        out = tmp_path / "levels.json"
        assert run(["classify", "--in", snapshot, "--out", out]) == 0
        payload = json.loads(out.read_text())
        assert payload["triples"][0]["level"] == "3"


class TestUsageErrors:
    def test_missing_required_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["extract", "--out", "x.json"])  # no --context
        assert err.value.code == 2

    def test_replay_without_transcript_exits_2(self, tmp_path):
        context = tmp_path / "ctx.txt"
        context.write_text("text", encoding="utf-8")
        code = run(["extract", "--context", context, "--out", tmp_path / "s.json",
                    "--mode", "replay"])
        assert code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["frobnicate"])
        assert err.value.code == 2
