#!/usr/bin/env python3
"""Run every verification suite at full scale and write report.json.

Equivalent to `mdclab run --out report.json --csv sweep.csv`, kept as a
script so the defaults live in one obvious place for experiments.
"""

import sys

from mdclab.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--out", "report.json", "--csv", "sweep.csv", *sys.argv[1:]]))
