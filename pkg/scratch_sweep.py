"""Calibration: CSOF vs NCSO across volumes, paired seeds."""
import sys
import time
from statistics import fmean

from coopspeed.sim import SimConfig, World

duration = float(sys.argv[1]) if len(sys.argv) > 1 else 900.0
seeds = list(range(1, (int(sys.argv[2]) if len(sys.argv) > 2 else 3) + 1))

t0 = time.time()
for vol in (300, 600, 900, 1200, 1500, 1800):
    lam = vol / 3600.0
    means = {}
    for tech in ("csof", "ncso"):
        idles, stops, comps = [], [], []
        for seed in seeds:
            rep = World(SimConfig(duration_s=duration, seed=seed, technique=tech,
                                  arrival_rate_veh_s=lam)).run()
            idles.append(rep.total_mean_idling_s)
            stops.append(rep.total_mean_stops)
            comps.append(rep.completed)
        means[tech] = (fmean(idles), fmean(stops), fmean(comps))
    red = 100 * (means["ncso"][0] - means["csof"][0]) / means["ncso"][0] if means["ncso"][0] else float("nan")
    print(f"vol={vol:5d} csof idle={means['csof'][0]:8.3f} stops={means['csof'][1]:6.3f} "
          f"ncso idle={means['ncso'][0]:8.3f} stops={means['ncso'][1]:6.3f} "
          f"reduction={red:6.1f}% completed={means['csof'][2]:.0f}/{means['ncso'][2]:.0f}")
print(f"wall: {time.time()-t0:.1f}s")
