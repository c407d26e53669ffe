"""Regenerate the golden CLI outputs in docs/golden/ (one JSON file per command)."""

import json
from pathlib import Path

from elgdist.cli import run

GOLDEN = Path(__file__).resolve().parents[1] / "docs" / "golden"

COMMANDS = {
    "fit": ["fit", "--data", "builtin:relief", "--model", "elg", "--format", "json"],
    "compare": ["compare", "--data", "builtin:relief", "--format", "json"],
    "lrtest": ["lrtest", "--data", "builtin:relief", "--null", "lg", "--format", "json"],
    "sample": ["sample", "--alpha", "2", "--theta", "1", "--p", "0.5", "--n", "10",
               "--seed", "7", "--format", "json"],
    "eval": ["eval", "--alpha", "2", "--theta", "1", "--p", "0.5", "--what", "cdf",
             "--x", "0", "0.5", "1", "2", "4", "--format", "json"],
    "moments": ["moments", "--alpha", "1", "--theta", "1", "--p", "0", "--mgf-t", "0.5",
                "--format", "json"],
}


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name, argv in COMMANDS.items():
        code, env, msg = run(argv)
        if code != 0:
            raise SystemExit(f"{name}: exit {code}: {msg}")
        doc = {"argv": argv, "envelope": json.loads(env.to_json())}
        (GOLDEN / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
