import json
from fractions import Fraction

import pytest

from cscv.engine import Budget
from cscv.harness import CorpusEntry, load_manifest, run_corpus


def _manifest(tmp_path, entries):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"version": 1, "entries": entries}))
    return path


def test_shipped_manifest(entries):
    assert len(entries) == 12
    vulnerable = [e for e in entries if e.vulnerable]
    assert len(vulnerable) == 6
    assert {e.cls for e in vulnerable} == {"BF", "RE", "PM", "IV", "AF", "UE"}
    for e in entries:
        assert e.contract.exists() and e.property.exists() and e.snapshot.exists()


def test_empty_manifest(tmp_path):
    sweep = run_corpus(_manifest(tmp_path, []), proportions=[0, Fraction(1, 2)])
    assert [(r.detected, r.vulnerable, r.vectors, r.entries) for r in sweep.rows] == [(0, 0, 0, ())] * 2


def test_manifest_validation(tmp_path):
    bad = {"id": "x", "class": "XX", "contract": "a", "property": "b", "snapshot": "c", "expected": "violated"}
    with pytest.raises(ValueError):
        load_manifest(_manifest(tmp_path, [bad]))
    bad = dict(bad, **{"class": "RE", "expected": "maybe"})
    with pytest.raises(ValueError):
        load_manifest(_manifest(tmp_path, [bad]))


def test_entry_errors_are_recorded(tmp_path):
    broken = CorpusEntry("ghost", "RE", tmp_path / "no.mcl", tmp_path / "no.prop", tmp_path / "no.json", "violated")
    sweep = run_corpus([broken], proportions=[0])
    (row,) = sweep.rows
    (res,) = row.entries
    assert res.verdict == "error" and "FileNotFoundError" in res.error
    assert row.detected == 0 and row.vulnerable == 1


def test_sweep_order_and_determinism(entries):
    picked = [e for e in entries if e.id in ("vault", "wallet-patched", "rewards")]
    kw = dict(proportions=[0, Fraction(3, 4)], seeds=[0, 1], budget=Budget(diameter=3))
    a = run_corpus(picked, **kw)
    b = run_corpus(picked, jobs=2, **kw)
    ja, jb = a.to_json(timing=False), b.to_json(timing=False)
    assert json.dumps(ja) == json.dumps(jb)
    row = ja["sweep"][0]
    assert [(e["id"], e["seed"]) for e in row["entries"]] == [
        (e.id, s) for s in (0, 1) for e in picked]
    assert row["proportion"] == "0" and ja["sweep"][1]["proportion"] == "3/4"
    assert row["detected"] == 4 and row["vulnerable"] == 4
