"""The command-line pipeline end to end on a synthetic panel.

Run with ``python3 demos/03_cli_pipeline.py [directory]`` (a minute or two).

``init-sim`` writes a generator file and a run config, ``simulate`` turns
them into CSV inputs, and classify / fit / risk / report produce the
tables. The same steps from a shell::

    esgvine init-sim sim
    esgvine simulate --config sim/config.ini
    esgvine classify --config sim/config.ini
    esgvine fit      --config sim/config.ini
    esgvine risk     --config sim/config.ini
    esgvine report   --config sim/config.ini
"""
import os
import sys
import tempfile

from esgvine.cli import main

directory = sys.argv[1] if len(sys.argv) > 1 else os.path.join(tempfile.mkdtemp(), "sim")
assert main(["init-sim", directory]) == 0
config = os.path.join(directory, "config.ini")
for step in ("simulate", "classify", "fit", "risk", "report"):
    print(f"esgvine {step} --config {config}")
    code = main([step, "--config", config])
    if code:
        sys.exit(f"{step} failed with exit code {code}")

out = os.path.join(directory, "out")
print(f"\noutputs in {out}:")
for name in sorted(os.listdir(out)):
    print("  " + name)

print("\nclass sizes and model comparison:")
for name in ("class_sizes.csv", "comparison.csv"):
    with open(os.path.join(out, name)) as fh:
        print("".join(line for line in fh if not line.startswith("#")))

print("mean risk shares per class (tau):")
with open(os.path.join(out, "aggregate.csv")) as fh:
    print("".join(line for line in fh if not line.startswith("#")))
