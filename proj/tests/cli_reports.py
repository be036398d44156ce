"""Runs every dmc subcommand and checks exit codes, reports and determinism."""

import filecmp
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema

DMC, ROOT, OUT = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
CONFIGS = ROOT / "configs"
SCHEMAS = ROOT / "schemas"
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(args, out=None):
    cmd = [DMC] + (["--out", str(out)] if out else []) + args
    return subprocess.run(cmd, capture_output=True, text=True)


def report(out, command):
    data = json.loads((out / "report.json").read_text())
    schema = json.loads((SCHEMAS / f"{command}.schema.json").read_text())
    try:
        jsonschema.validate(data, schema)
        check(True, f"{command} report matches its schema")
    except jsonschema.ValidationError as err:
        check(False, f"{command} report matches its schema: {err.message}")
    for name in data["files"]:
        check((out / name).is_file(), f"{command} wrote {name}")
    return data


if OUT.exists():
    shutil.rmtree(OUT)
OUT.mkdir(parents=True)

scalar = str(CONFIGS / "scalar_memory.json")
weights_spec = OUT / "weights_spec.json"
weights_spec.write_text(json.dumps({"delta": 0.2, "lambda": 1.0, "s": 1.0, "T": 1.0, "h": 0.1}))

cases = {
    "simulate": ["simulate", "--config", scalar],
    "adjoint": ["adjoint", "--config", scalar],
    "observability": ["observability", "--config", scalar, "--gramian"],
    "synthesize": ["synthesize", "--config", scalar],
    "duality": ["--seed", "7", "duality", "--n", "3", "--dt-study"],
    "heat-demo": ["heat-demo", "--config", str(CONFIGS / "heat_sweep.json"), "--figure"],
}
for command, args in cases.items():
    out = OUT / command
    proc = run(args, out)
    check(proc.returncode == 0, f"{command} exits 0 ({proc.stderr.strip()})")
    if proc.returncode == 0:
        report(out, command)

proc = run(["weights", "--spec", str(weights_spec), "--field", str(OUT / "heat-demo" / "field.csv")],
           OUT / "weights")
check(proc.returncode == 0, f"weights exits 0 ({proc.stderr.strip()})")
if proc.returncode == 0:
    report(OUT / "weights", "weights")

heat = OUT / "heat-demo"
for name in ("field.csv", "norms.csv", "figure.csv", "report.json"):
    check((heat / name).is_file(), f"heat-demo emits {name}")

study = (OUT / "duality" / "duality_study.csv").read_text().splitlines()
check(study[0] == "dt,residual,ratio", "dt study header")
ratios = [float(line.split(",")[2]) for line in study[2:]]
check(all(1.7 <= r <= 2.3 for r in ratios), f"dt study ratios near 2: {ratios}")

# Same inputs give byte-identical artifacts, and --jobs only changes scheduling.
for command, args in (("duality", cases["duality"]), ("heat-demo", cases["heat-demo"])):
    again = OUT / (command + "-again")
    extra = ["--jobs", "3"] if command == "duality" else []
    run(extra + args, again)
    same = all(filecmp.cmp(OUT / command / f, again / f, shallow=False)
               for f in json.loads((again / "report.json").read_text())["files"] + ["report.json"])
    check(same, f"{command} artifacts are reproducible")

# Exit codes.
check(run(["heat-demo", "--config", str(OUT / "missing.json")], OUT / "x").returncode == 2,
      "missing config exits 2")
bad = OUT / "bad.json"
bad.write_text("{ not json")
check(run(["simulate", "--config", str(bad)], OUT / "x").returncode == 2, "malformed JSON exits 2")
check(run(["nonsense"]).returncode == 2, "unknown subcommand exits 2")
singular = json.loads(Path(scalar).read_text())
singular["A"] = [[200.0]]  # 1 - dt * A vanishes at dt = 1/200
singular_path = OUT / "singular.json"
singular_path.write_text(json.dumps(singular))
check(run(["simulate", "--config", str(singular_path)], OUT / "x").returncode == 3,
      "singular step exits 3")

# Version and schema flags.
proc = run(["--version"])
check(proc.returncode == 0 and proc.stdout.strip() != "", "--version prints a version")
proc = run(["--schema", "synthesize"])
check(proc.returncode == 0 and json.loads(proc.stdout) == json.loads(
    (SCHEMAS / "synthesize.schema.json").read_text()), "--schema prints the shipped schema")
check(run(["--schema", "bogus"]).returncode == 2, "unknown schema exits 2")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
