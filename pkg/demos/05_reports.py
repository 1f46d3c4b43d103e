"""
Batch verification, reports and plot series
===========================================

The same pipeline the ``gldual`` command runs: a bundled config is checked,
written as a JSON report, and turned into CSV series for plotting.
Equivalent shell commands::

    gldual verify theorem2_sweep -o out/theorem2.json
    gldual sweep f0_case --param beta --from 0.01 --to 0.05 --steps 5 -o out/sweep.json
    gldual plotdata out/sweep.json out/csv
"""

import os
import tempfile

from gldual.cli import main
from gldual.report import read_report

out = tempfile.mkdtemp(prefix="gldual-demo-")

code = main(["verify", "theorem2_sweep", "-o", os.path.join(out, "theorem2.json")])
print("exit code", code)

report = read_report(os.path.join(out, "theorem2.json"))
for r in report["records"]:
    if r["check"] == "gap":
        v = r["values"]
        print(f"{r['case']}: J = {v['J_primal']:.10f}, dual = {v['J_dual']:.10f}, "
              f"gap = {v['gap']:.1e}")

sweep = os.path.join(out, "sweep.json")
main(["sweep", "f0_case", "--param", "beta", "--from", "0.01", "--to", "0.05",
      "--steps", "5", "-o", sweep])
for path in sorted(os.listdir(out)):
    print(path)
main(["plotdata", sweep, os.path.join(out, "csv")])
with open(os.path.join(out, "csv", "lambda_min_vs_beta.csv")) as fh:
    print(fh.read())
