#!/usr/bin/env python3
"""Audit the analytic objective gradient against symmetric finite differences.

Usage: python3 scripts/gradient_report.py [--nx 20] [--nt 20] [--trials 50]
Exits nonzero if the worst relative error exceeds 1e-5.
"""

import sys

from convexiwave.cli import main as cli_main

if __name__ == "__main__":
    sys.exit(cli_main(["gradient-check", *sys.argv[1:]]))
