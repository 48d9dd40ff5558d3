"""Order-statistic ratio trend and bound coverage for Exponential and Rayleigh draws."""

import sys

from fsigsim import cli

if __name__ == "__main__":
    sys.exit(cli.main(["orderstats", "--ks", "100", "1000", "10000", "100000",
                       "--out", "results/orderstats", *sys.argv[1:]]))
