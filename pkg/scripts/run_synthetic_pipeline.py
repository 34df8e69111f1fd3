"""Walk the full pipeline on simulated structure data.

Generates undamaged and damaged responses of the 3-DOF chain, trains a
reduced model for a few epochs, translates the undamaged record into the
damaged domain, and evaluates the translation. Artifacts land in the
chosen output directory under synth/, train/, translate/, evaluate/.
This is a smoke-scale walkthrough, not a converged run; raise --epochs
for a translation that actually tracks the damaged spectrum.
"""

import argparse
import json
import sys
from pathlib import Path

from vibecycle.cli import main as vibecycle_main

REDUCED_SPECS = {
    "generator_spec": {
        "input_length": 1024, "channel_plan": [8, 16, 32],
        "kernel_size": 11, "stride": 2,
    },
    "critic_spec": {
        "input_length": 1024, "channel_plan": [8, 16, 32],
        "kernel_size": 11, "stride": 2,
    },
}


def run(argv) -> None:
    print("+ vibecycle", " ".join(argv))
    code = vibecycle_main(argv)
    if code != 0:
        raise SystemExit(f"step failed with exit code {code}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--duration-s", type=float, default=64.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    spec_config = out / "reduced_specs.json"
    spec_config.write_text(json.dumps(REDUCED_SPECS, indent=2))

    run([
        "synth", "--kind", "modal", "--duration-s", str(args.duration_s),
        "--seed", str(args.seed), "--out", str(out / "synth"),
    ])
    run([
        "train", "--config", str(spec_config),
        "--data-u", str(out / "synth" / "undamaged.f64"),
        "--data-d", str(out / "synth" / "damaged.f64"),
        "--epochs", str(args.epochs), "--batch-size", "8",
        "--critic-iterations", "4", "--allow-reduced",
        "--seed", str(args.seed), "--out", str(out / "train"),
    ])
    run([
        "translate", "--checkpoint", str(out / "train" / "checkpoint.ckpt"),
        "--input", str(out / "synth" / "undamaged.f64"),
        "--direction", "u2d", "--out", str(out / "translate"),
    ])
    run([
        "evaluate",
        "--real", str(out / "synth" / "damaged.f64"),
        "--fake", str(out / "translate" / "translated.f64"),
        "--out", str(out / "evaluate"),
    ])
    print(f"pipeline artifacts in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
