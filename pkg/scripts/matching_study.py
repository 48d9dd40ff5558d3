"""Frequency of perfect matchings in M-best and M-worst user-resource graphs."""

import sys

from fsigsim import cli

if __name__ == "__main__":
    sys.exit(cli.main(["matching", "--ns", "25", "50", "100", "200",
                       "--out", "results/matching", *sys.argv[1:]]))
