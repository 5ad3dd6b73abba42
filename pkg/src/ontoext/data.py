"""Access to bundled data files: prompt templates, the curated evaluation
dataset (gold standard, extracted triples, lexicon, synonym groups), and
the quickstart replay transcript."""
from __future__ import annotations

from importlib import resources
from pathlib import Path


def _data_root() -> Path:
    return Path(str(resources.files("ontoext").joinpath("data")))


def fixture_path(name: str) -> Path:
    """Path of a bundled dataset file, e.g. fixture_path('gold_standard.tsv')."""
    path = _data_root() / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled data file named {name!r}")
    return path


def default_template_path(name: str) -> Path:
    return fixture_path(f"templates/{name}")
