"""Empirical CDF of the convergence turn for several network sizes."""

import sys

from fsigsim import cli

if __name__ == "__main__":
    sys.exit(cli.main(["cdf", "--out", "results/convergence_cdf", *sys.argv[1:]]))
