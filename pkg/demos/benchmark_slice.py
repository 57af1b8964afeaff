"""Drive a small benchmark sweep through the command-line pipeline.

Writes a config covering a 2 x 2 x 1 slice of the scenario grid on the
bundled ten-node dataset, runs both methods, then aggregates the results
CSV into the reporting tables.  Everything lands under
demos/out-slice/.

    python3 demos/benchmark_slice.py
"""

import pathlib

from flexhub.cli import main

out = pathlib.Path(__file__).resolve().parent / "out-slice"
out.mkdir(exist_ok=True)

config = out / "slice.ini"
config.write_text("""\
[run]
datasets = ap10
methods = f1, f2
time_limit = 300
out = {out}
taus = 0.5, 1
rhos = 0.1
alphas = 0.5, 0.8
gauges = l2
pairs = l2-l2
""".format(out=out))

rc = main(["run", str(config)])
assert rc == 0, f"run exited with {rc}"

rc = main(["aggregate", str(out / "results.csv"), "--out", str(out)])
assert rc == 0, f"aggregate exited with {rc}"

print("\nresults tables:")
for f in sorted(out.glob("table_*.csv")):
    print(f"  {f}")
print(f"solution files under {out / 'solutions'}")
