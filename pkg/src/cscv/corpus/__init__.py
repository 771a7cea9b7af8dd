"""The shipped vulnerability corpus and heuristic base."""

from pathlib import Path

CORPUS_DIR = Path(__file__).resolve().parent
MANIFEST = CORPUS_DIR / "manifest.json"
HEURISTICS = CORPUS_DIR / "heuristics.json"
