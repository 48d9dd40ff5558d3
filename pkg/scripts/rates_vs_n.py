"""Mean and minimum rates against N with optimal and random-permutation baselines."""

import sys

from fsigsim import cli

if __name__ == "__main__":
    sys.exit(cli.main(["sweep", "--out", "results/rates_vs_n", *sys.argv[1:]]))
