"""Command-line entry point.

Subcommands wrap one stage each: extract (run the pipeline), classify
(annotate difficulty levels), evaluate (stratified metrics against gold),
export (OWL), serve (curation service), replay-verify (determinism check).
Exit codes: 0 success, 1 verification or validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import Settings, load_config_file
from .data import fixture_path
from .evaluation import (
    Decision,
    load_extracted,
    load_gold,
    load_synonyms,
    match_triples,
    render_report_table,
    stratified_report,
    verify_extracted_levels,
    verify_found_claims,
    verify_gold_levels,
    write_report,
)
from .gateway import HttpBackend, RecordingBackend, ReplayBackend
from .model import Concept, Triple, UnknownRelation, canonical_relation
from .owl_export import DEFAULT_BASE_IRI, OntologyFragment, write_owl
from .pipeline import (
    PipelineConfig,
    load_snapshot_triples,
    run_pipeline,
    snapshot_dict,
    write_snapshot,
)
from .terminology import load_lexicon

log = logging.getLogger("ontoext")


class SystemExit2(Exception):
    """Usage error surfaced with exit code 2."""


def _pipeline_config(settings: Settings, args) -> PipelineConfig:
    return PipelineConfig(
        n_runs=settings.get("n_runs", args.n_runs, 10, int),
        vote_threshold=settings.get("vote_threshold", args.threshold, 6, int),
        include_inverses=settings.get("include_inverses", None, True, bool),
        model_id=settings.get("model_id", getattr(args, "model_id", None), "gpt-3.5-turbo"),
        temperature=settings.get("temperature", getattr(args, "temperature", None), 1.0, float),
        concept_template_path=settings.get("concept_template", None, None),
        triple_template_path=settings.get("triple_template", None, None),
    )


def _make_backend(settings: Settings, args):
    mode = settings.get("mode", args.mode, "replay")
    transcript = settings.get("transcript_path", args.transcript, None)
    if mode == "replay":
        if transcript is None:
            raise SystemExit2("replay mode needs --transcript")
        return ReplayBackend.from_file(transcript)
    endpoint = settings.get("endpoint_url", getattr(args, "endpoint", None), None)
    if endpoint is None:
        raise SystemExit2(f"{mode} mode needs --endpoint or endpoint_url config")
    live = HttpBackend(endpoint)
    if mode == "record":
        if transcript is None:
            raise SystemExit2("record mode needs --transcript")
        Path(transcript).parent.mkdir(parents=True, exist_ok=True)
        return RecordingBackend(live, transcript)
    if mode == "live":
        return live
    raise SystemExit2(f"unknown mode {mode!r}")


def cmd_extract(args) -> int:
    settings = Settings(load_config_file(args.config))
    config = _pipeline_config(settings, args)
    backend = _make_backend(settings, args)
    settings.log_resolved()
    context = Path(args.context).read_text(encoding="utf-8")
    result = run_pipeline(context, config, backend)
    write_snapshot(result, config, args.out)
    print(f"extracted {len(result.concepts)} concepts, "
          f"{len(result.triples)} triples -> {args.out}")
    return 0


def cmd_classify(args) -> int:
    settings = Settings(load_config_file(args.config))
    lexicon = load_lexicon(settings.get("lexicon", args.lexicon,
                                        fixture_path("snomed_lexicon.tsv")))
    settings.log_resolved()
    triples = load_snapshot_triples(args.input)
    from .evaluation import Unclassified, classify

    rows = []
    for triple in sorted(triples, key=lambda t: t.key):
        try:
            level = str(int(classify(triple, lexicon)))
        except Unclassified:
            level = "unclassified"
        rows.append({"subject": triple.key[0], "relation": triple.key[1],
                     "object": triple.key[2], "level": level})
    payload = json.dumps({"triples": rows}, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return 0


def _load_verdict_file(path: str | Path) -> dict[tuple[str, str, str], Decision]:
    verdicts: dict[tuple[str, str, str], Decision] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in line.split("\t")]
        if cells[0].lower() == "subject":
            continue
        if len(cells) < 4:
            raise SystemExit2(f"verdict file line {number}: expected at least 4 columns")
        subject, relation, obj, decision = cells[:4]
        try:
            triple = Triple(Concept(subject), canonical_relation(relation), Concept(obj))
        except UnknownRelation as exc:
            raise SystemExit2(f"verdict file line {number}: {exc}")
        verdicts[triple.key] = Decision(decision.lower())
    return verdicts


def cmd_evaluate(args) -> int:
    settings = Settings(load_config_file(args.config))
    gold_path = settings.get("gold", args.gold, fixture_path("gold_standard.tsv"))
    extracted_path = settings.get("extracted", args.extracted,
                                  fixture_path("extracted_triples.tsv"))
    lexicon_path = settings.get("lexicon", args.lexicon,
                                fixture_path("snomed_lexicon.tsv"))
    synonyms_path = settings.get("synonyms", args.synonyms,
                                 fixture_path("synonyms.txt"))
    settings.log_resolved()

    gold = load_gold(gold_path)
    rows = load_extracted(extracted_path)
    lexicon = load_lexicon(lexicon_path)
    synonyms = load_synonyms(synonyms_path)

    match = match_triples([row.triple for row in rows], gold, synonyms)

    verdicts: dict[Triple, Decision] = {}
    if args.verdicts:
        by_key = _load_verdict_file(args.verdicts)
        missing = [c for c in match.fp_candidates if c.key not in by_key]
        if missing:
            print(f"error: {len(missing)} candidates lack verdicts in {args.verdicts}",
                  file=sys.stderr)
            return 1
        verdicts = {c: by_key[c.key] for c in match.fp_candidates}
    elif args.resolve_column:
        claims = {row.triple.key: row.in_gold_claim for row in rows}
        verdicts = {
            c: Decision.ACCEPT if claims.get(c.key) else Decision.DECLINE
            for c in match.fp_candidates
        }

    report = stratified_report(match, verdicts, lexicon, synonyms=synonyms,
                               allow_pending=True)
    print(render_report_table(report))
    if report.pending:
        print(f"\nwarning: {len(report.pending)} candidates are unresolved; "
              f"counts cover resolved items only")

    issues = {
        "gold level rule violations": verify_gold_levels(gold, lexicon),
        "extracted type conflicts": verify_extracted_levels(rows, lexicon),
        "found-by-model claim mismatches": verify_found_claims(gold, match),
    }
    for title, entries in issues.items():
        if entries:
            print(f"\n{title} ({len(entries)}):")
            for entry in entries:
                print(f"  - {entry}")

    write_report(report, json_path=args.json_out, table_path=args.table_out)
    return 0


def _triples_from_any(path: str | Path) -> list:
    path = Path(path)
    if path.suffix == ".json":
        return load_snapshot_triples(path)
    return [row.triple for row in load_extracted(path)]


def cmd_export(args) -> int:
    settings = Settings(load_config_file(args.config))
    base_iri = settings.get("base_iri", args.base_iri, DEFAULT_BASE_IRI)
    settings.log_resolved()
    triples = _triples_from_any(args.input)
    fragment = OntologyFragment.from_triples(triples, base_iri=base_iri)
    write_owl(fragment, args.out)
    print(f"wrote {len(fragment.triples)} triples over "
          f"{len(fragment.concepts)} classes -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .curation import CurationStore, create_app

    settings = Settings(load_config_file(args.config))
    store = CurationStore.from_files(
        snapshot_path=settings.get("snapshot", args.snapshot,
                                   fixture_path("extracted_triples.tsv")),
        gold_path=settings.get("gold", args.gold, fixture_path("gold_standard.tsv")),
        lexicon_path=settings.get("lexicon", args.lexicon,
                                  fixture_path("snomed_lexicon.tsv")),
        synonyms_path=settings.get("synonyms", args.synonyms,
                                   fixture_path("synonyms.txt")),
        verdict_log_path=settings.get("verdict_log", args.verdict_log,
                                      "verdicts.jsonl"),
        required_verdicts=settings.get("required_verdicts",
                                       args.required_verdicts, 1, int),
        base_iri=settings.get("base_iri", None, None),
    )
    ui_dir = settings.get("ui_dir", args.ui_dir, _default_ui_dir())
    host = settings.get("host", args.host, "127.0.0.1")
    port = settings.get("port", args.port, 8000, int)
    settings.log_resolved()
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


def _default_ui_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def cmd_replay_verify(args) -> int:
    settings = Settings(load_config_file(args.config))
    config = _pipeline_config(settings, args)
    settings.log_resolved()
    context = Path(args.context).read_text(encoding="utf-8")

    payloads = []
    for _ in range(2):
        backend = ReplayBackend.from_file(args.transcript)
        result = run_pipeline(context, config, backend)
        payloads.append(json.dumps(snapshot_dict(result, config), sort_keys=True))
    if payloads[0] != payloads[1]:
        print("replay-verify: FAIL (outputs differ between runs)")
        return 1
    print("replay-verify: OK (two replay runs produced identical output)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontoext",
                                     description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="run the two-step extraction pipeline")
    p.add_argument("--context", required=True, help="guideline text file")
    p.add_argument("--out", required=True, help="snapshot JSON to write")
    p.add_argument("--config")
    p.add_argument("--mode", choices=["live", "record", "replay"])
    p.add_argument("--transcript")
    p.add_argument("--endpoint")
    p.add_argument("--n-runs", type=int, dest="n_runs")
    p.add_argument("--threshold", type=int)
    p.add_argument("--model-id", dest="model_id")
    p.add_argument("--temperature", type=float)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("classify", help="annotate snapshot triples with levels")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="stratified precision/recall vs gold")
    p.add_argument("--gold")
    p.add_argument("--extracted")
    p.add_argument("--lexicon")
    p.add_argument("--synonyms")
    p.add_argument("--verdicts", help="TSV resolving each candidate")
    p.add_argument("--resolve-column", action="store_true",
                   help="resolve candidates per the extracted table's "
                        "in_gold_standard column")
    p.add_argument("--json-out")
    p.add_argument("--table-out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("export", help="write OWL for a snapshot or table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--base-iri", dest="base_iri")
    p.add_argument("--config")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the curation service")
    p.add_argument("--snapshot")
    p.add_argument("--gold")
    p.add_argument("--lexicon")
    p.add_argument("--synonyms")
    p.add_argument("--verdict-log", dest="verdict_log")
    p.add_argument("--required-verdicts", dest="required_verdicts", type=int)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui-dir", dest="ui_dir")
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay-verify",
                       help="assert byte-identical output across two replays")
    p.add_argument("--context", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--n-runs", type=int, dest="n_runs")
    p.add_argument("--threshold", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # stage failures exit nonzero with the stage name
        log.error("%s failed: %s", args.command, exc)
        if args.verbose:
            raise
        return 1


if __name__ == "__main__":
    sys.exit(main())
