"""Run the two-tone translation experiment and print its verdict.

Trains the reduced model on the shared 5 Hz / 12 Hz preset, then reports
the three success indicators: the fraction of translated segments whose
dominant frequency lands on the target tone, the likeliness score of the
fake damaged set against the real one, and the rank correlation of
generator loss with epoch. With the default 250 epochs this takes around
20 minutes on one CPU core.
"""

import argparse
import sys
import time
from pathlib import Path

from vibecycle.toy_experiment import (
    TOY_ACCEPTANCE_EPOCHS,
    assess_toy_outcome,
    run_toy_experiment,
)
from vibecycle.training import format_epoch_record, write_monitor_log, write_timings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--epochs", type=int, default=TOY_ACCEPTANCE_EPOCHS)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--data-seed", type=int, default=20)
    parser.add_argument("--monitor-interval", type=int, default=10)
    parser.add_argument("--out", type=Path, default=None,
                        help="directory for monitor logs (optional)")
    args = parser.parse_args(argv)

    started = time.perf_counter()

    def progress(record):
        print(f"{time.perf_counter() - started:8.1f}s  {format_epoch_record(record)}",
              flush=True)

    result, record_u, record_d = run_toy_experiment(
        args.epochs,
        seed=args.seed,
        data_seed=args.data_seed,
        monitor_interval=args.monitor_interval,
        callbacks=(progress,),
    )
    outcome = assess_toy_outcome(result, record_u, record_d)

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_monitor_log(args.out / "monitor.log", result.history)
        write_timings(args.out / "monitor_timings.log", result.history)

    print(f"dominant-frequency fraction at 12 Hz: "
          f"{outcome.fraction_dominant_at_target:.3f} (want >= 0.8)")
    print(f"likeliness score, real vs fake damaged: "
          f"{outcome.ls_real_vs_fake:.3f} (want >= 0.7)")
    print(f"generator loss vs epoch Spearman rho: "
          f"{outcome.generator_loss_epoch_correlation:.3f} (want < 0)")
    success = (
        outcome.fraction_dominant_at_target >= 0.8
        and outcome.ls_real_vs_fake >= 0.7
        and outcome.generator_loss_epoch_correlation < 0.0
    )
    print("verdict:", "success" if success else "failure")
    return 0 if success else 1


if __name__ == "__main__":
    sys.exit(main())
