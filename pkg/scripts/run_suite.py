"""Run the scenario suite (default selection unless --config is given) and print the summary."""

import argparse
import sys

from krylab.scenarios import DEFAULT_SUITE, load_config, run_suite


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--out", default="suite_out")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args(argv)
    cfg = load_config(a.config) if a.config else DEFAULT_SUITE
    res = run_suite(cfg, a.out, a.seed, a.jobs)
    print(res.table())
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
