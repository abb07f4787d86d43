#!/usr/bin/env python3
"""
Rank dynamics analysis

Usage:
    python rank_dynamics.py fit --input rankings.csv --time last --models m1,m2,m3,m4,m5
    python rank_dynamics.py dynamics --input rankings.csv --top 100 --svg out/
    python rank_dynamics.py simulate --n 100 --t 50 --sigma 0.1 --seed 7 --out walk.csv
    python rank_dynamics.py simulate --calibrate-from rankings.csv --report calibration.json
"""

import sys
from pathlib import Path

# project src directory
sys.path.insert(0, str(Path(__file__).parent / "src"))

from cli import main


if __name__ == "__main__":
    sys.exit(main())
