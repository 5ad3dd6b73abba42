"""Generate the bundled quickstart demo: a small synthetic guideline
passage plus a recorded 10+10-response transcript that exercises consensus
boundaries (one concept at exactly 6 of 10 votes, one at 5) and inverse
pooling (treated-by phrasings voting together with treats). Replaying it
through `ontoext extract --mode replay` is deterministic by construction.
"""
from __future__ import annotations

import sys

from ontoext.data import _data_root
from ontoext.gateway import PromptRequest, RecordingBackend, ReplayBackend
from ontoext.pipeline import PipelineConfig, run_pipeline, snapshot_dict

CONTEXT = """\
Synthetic demonstration passage (not from any published guideline).

Fatigue is a common and distressing complaint in people treated for
cancer. Acupuncture reduces fatigue in several trials. Yoga, a mind-body
practice that combines physical poses with meditation, also treats fatigue
and lowers stress. Meditation is one component of yoga practice. Stress
management programmes may improve sleep quality for some patients.
"""

CORE_CONCEPTS = ["fatigue", "acupuncture", "yoga", "meditation", "stress"]

CONCEPT_RESPONSES = []
for i in range(10):
    lines = [f"- {c}" for c in CORE_CONCEPTS]
    if i < 6:
        lines.append("- stress management")      # exactly 6 votes: accepted
    if i < 5:
        lines.append("- sleep quality")          # exactly 5 votes: rejected
    if i == 3:
        lines.append("-   ")                     # unparseable, skipped
    CONCEPT_RESPONSES.append("\n".join(lines))

TRIPLE_RESPONSES = []
for i in range(10):
    lines = ["acupuncture | treats | fatigue"]   # 10 votes
    if i < 3:
        lines.append("fatigue | treated-by | yoga")   # pooled with the next:
    elif i < 6:
        lines.append("yoga | treats | fatigue")       # 3 + 3 = 6 votes
    if i < 5:
        lines.append("meditation | part-of | yoga")   # 5 votes: rejected
    if i == 2:
        lines.append("yoga heals stress")             # malformed, skipped
        lines.append("yoga | heals | stress")         # unknown relation, skipped
    TRIPLE_RESPONSES.append("\n".join(lines))


class ScriptedBackend:
    """Returns canned responses in call order."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def complete(self, request: PromptRequest) -> str:
        response = self.responses[self.calls]
        self.calls += 1
        return response


def main() -> int:
    out_dir = _data_root() / "quickstart"
    out_dir.mkdir(parents=True, exist_ok=True)
    context_path = out_dir / "context.txt"
    transcript_path = out_dir / "transcript.jsonl"
    context_path.write_text(CONTEXT, encoding="utf-8")
    if transcript_path.exists():
        transcript_path.unlink()

    config = PipelineConfig()
    scripted = ScriptedBackend(CONCEPT_RESPONSES + TRIPLE_RESPONSES)
    recorder = RecordingBackend(scripted, transcript_path)
    recorded = run_pipeline(CONTEXT, config, recorder)

    replayed = run_pipeline(CONTEXT, config, ReplayBackend.from_file(transcript_path))
    assert snapshot_dict(recorded, config) == snapshot_dict(replayed, config)

    accepted = sorted("|".join(t.key) for t in replayed.triples)
    concepts = sorted(c.normalized_label for c in replayed.concepts)
    assert "stress management" in concepts and "sleep quality" not in concepts
    assert "yoga|treats|fatigue" in accepted, accepted
    assert "meditation|part-of|yoga" not in accepted
    print(f"context -> {context_path}")
    print(f"transcript ({scripted.calls} responses) -> {transcript_path}")
    print(f"consensus concepts: {concepts}")
    print(f"consensus triples: {accepted}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
