"""
Experiment artifacts from the command line
==========================================

The same comparison through the ``lassobo`` command: per-run trace CSVs, a
summary CSV of median and interquartile log regret, a JSON manifest and an
SVG plot. Calling ``main`` with an argument list is equivalent to running
``lassobo compare ...`` in a shell.
"""

import json
import tempfile
from pathlib import Path

from lassobo.cli import main

out = Path(tempfile.mkdtemp()) / "levy"
code = main(["compare", "--benchmark", "levy-d20-e4", "--methods", "lassobo,random,dropout",
             "--dropout-d", "4", "--budget", "15", "--n-init", "10", "--repeats", "2",
             "--trace-rho", "--out", str(out)])
print("exit code", code)
for path in sorted(out.rglob("*")):
    if path.is_file():
        print(" ", path.relative_to(out))

manifest = json.loads((out / "manifest.json").read_text())
print("seeds shared by every method:", manifest["seeds"])
print("verdict:", manifest["verdict"]["ordering_best_first"])
print((out / "lassobo/seed_0/trace.csv").read_text().splitlines()[-1][:160], "...")
