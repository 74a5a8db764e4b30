#!/usr/bin/env python3
"""Write data/uis.csv and data/jobs.csv from the rdatasets package.

    pip install rdatasets
    python3 tools/fetch_datasets.py [outdir]
"""
import sys
from pathlib import Path

import rdatasets


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    out.mkdir(parents=True, exist_ok=True)
    uis = rdatasets.data("quantreg", "uis")
    uis.to_csv(out / "uis.csv", index=False)
    jobs = rdatasets.data("mediation", "jobs")
    jobs.to_csv(out / "jobs.csv", index=False)
    print(f"uis: {len(uis)} rows, jobs: {len(jobs)} rows -> {out}")


if __name__ == "__main__":
    main()
