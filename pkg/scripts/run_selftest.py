#!/usr/bin/env python3
"""Run the randomized property harness from the command line."""

import sys

from modgraph.cli import main

if __name__ == "__main__":
    sys.exit(main(["selftest"] + sys.argv[1:]))
