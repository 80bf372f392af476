"""Write the threshold-structure tables for the Horodecki-shield family.

Produces, under OUTPUT_DIR (or ./results):
- thresholds.csv          p1, p2, PPT bound and eps* for l = 1..L_MAX
- horodecki_d{d}_l{l}.dat gnuplot layout of the verdict scan per (d, l)
- noise_l{l}.csv          noise thresholds over an eps grid

Run:  python -m scripts.reproduce_thresholds
"""

import logging
from pathlib import Path

from app.commands.common import render_csv, render_gnuplot
from app.config import settings
from app.services.criteria import threshold_table
from app.services.scans import grid, horodecki_scan, noise_scan

log = logging.getLogger(__name__)

# ── Configuration ─────────────────────────────────────────────────────────────

L_MAX = 10
SCANS = [(2, 1), (2, 2), (2, 3), (3, 1), (4, 2)]
P_STEP = 0.005
NOISE_LS = [1, 2, 3]
EPS_GRID = grid(0.0, 0.2, 0.005)


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    out_dir = Path(settings.OUTPUT_DIR or "results")
    out_dir.mkdir(parents=True, exist_ok=True)

    (out_dir / "thresholds.csv").write_text(render_csv(threshold_table(L_MAX)))

    for d, l in SCANS:
        rows = horodecki_scan(d, l, grid(P_STEP, 0.5 - P_STEP, P_STEP))
        (out_dir / f"horodecki_d{d}_l{l}.dat").write_text(render_gnuplot(rows))
        log.info("Scanned d=%s l=%s (%s rows)", d, l, len(rows))

    for l in NOISE_LS:
        (out_dir / f"noise_l{l}.csv").write_text(render_csv(noise_scan(l, EPS_GRID)))

    log.info("Tables written to %s", out_dir)


if __name__ == "__main__":
    main()
