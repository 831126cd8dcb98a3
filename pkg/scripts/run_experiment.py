"""Run the walk-forward experiment for a config and print the headline tables.

    python scripts/run_experiment.py --config configs/default.ini
"""

import argparse
import logging
import sys

from sdaeforecast import experiment
from sdaeforecast.config import load_config


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default="configs/default.ini")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    cfg = load_config(args.config)
    result = experiment.run_experiment(cfg)
    out = experiment.write_outputs(result, cfg.output_dir(), plot=cfg.output.plot)
    for name, build in experiment.TABLES.items():
        print(f"# {name}")
        experiment.write_rows(build(result.report), sys.stdout)
    print(f"outputs in {out}")


if __name__ == "__main__":
    main()
