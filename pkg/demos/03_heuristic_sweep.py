"""Sweep the corpus over the heuristic proportion grid.

Each column selects a seeded share of the heuristic base and verifies all twelve
entries with it. Vulnerable entries should be detected at every proportion;
patched ones should never produce a vector. Unknown entries show which
budget ran out. Takes under a minute.

    python3 demos/03_heuristic_sweep.py
"""

from cscv.harness import load_manifest, run_corpus
from cscv.optimization import SWEEP_GRID

entries = load_manifest()
sweep = run_corpus(entries, SWEEP_GRID, seeds=[0])

ids = [e.id for e in entries]
width = max(map(len, ids))
print(f"{'entry':{width}s}  " + "  ".join(f"{str(r.proportion):>9s}" for r in sweep.rows))
for i, eid in enumerate(ids):
    cells = []
    for row in sweep.rows:
        r = row.entries[i]
        mark = f"len {r.vector_length}" if r.detected else (r.reason or r.verdict).split("-")[0]
        cells.append(f"{mark:>9s}")
    print(f"{eid:{width}s}  " + "  ".join(cells))

print()
for row in sweep.rows:
    print(f"proportion {str(row.proportion):>4s}: detected {row.detected}/{row.vulnerable}, "
          f"{row.vectors} vectors total, mean {row.mean_elapsed:.2f}s per entry")
