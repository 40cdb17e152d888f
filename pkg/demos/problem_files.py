"""Write a problem JSON file and drive it through the command-line tool.

The on-disk format describes a quadratic objective 0.5 x'Hx + c'x + r,
a list of quadratic/affine inequality constraints and the operating box.
This script writes the one-dimensional example, then shells out to the
installed ``augpdg`` entry point to solve and certify it.
"""

import json
import pathlib
import subprocess
import sys

doc = {
    "n": 1,
    "objective": {"H": [[2.0]], "c": [-4.0], "r": 4.0},
    "constraints": [{"type": "affine", "a": [1.0], "beta": 1.0}],
    "box": {"lo": [-5.0], "hi": [5.0]},
}

path = pathlib.Path("example_problem.json")
path.write_text(json.dumps(doc, indent=2) + "\n")
print(f"wrote {path}")

for cmd in (
    ["augpdg", "solve", str(path), "--alpha", "0.3", "--rho", "1.0", "--out", "cli-out"],
    ["augpdg", "certify", str(path), "--rho", "1.0", "--out", "cli-out"],
):
    print(f"\n$ {' '.join(cmd)}")
    proc = subprocess.run(cmd)
    if proc.returncode != 0:
        sys.exit(proc.returncode)

solution = json.loads(pathlib.Path("cli-out/solution.json").read_text())
print(f"\nsolution: x = {solution['x']}, lambda = {solution['lambda']}")
print("certificate written to cli-out/certificate.txt")
