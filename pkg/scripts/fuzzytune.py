#!/usr/bin/env python
"""
Fuzzy controller tuning harness.

Usage:
    python scripts/fuzzytune.py optimize --config configs/default.conf --out runs/demo
    python scripts/fuzzytune.py simulate --params runs/demo/best_params.txt --theta0 0.3 --out trace.csv
    python scripts/fuzzytune.py sweep --params runs/demo/best_params.txt --min 0.05 --max 0.5 --steps 10 --out runs/sweep
    python scripts/fuzzytune.py plot --in runs/demo/history.csv --x evaluations --y best_mse --out history.svg
    python scripts/fuzzytune.py membership --params runs/demo/best_params.txt --out membership.svg

Set FUZZYTUNE_LOG_LEVEL (e.g. in .env) to DEBUG or WARNING to change verbosity.
"""

import logging
import os
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv

from src.fuzzytune.cli import main

load_dotenv()

# Logs go to stderr; stdout is reserved for command results
logging.basicConfig(
    level=os.getenv("FUZZYTUNE_LOG_LEVEL", "INFO").upper(),
    format='%(message)s',
    handlers=[logging.StreamHandler(sys.stderr)]
)


if __name__ == "__main__":
    sys.exit(main())
