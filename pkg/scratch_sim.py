"""Scratch harness: engine smoke checks before formal tests."""
import time

from coopspeed.sim import InitialVehicle, SegmentConfig, SimConfig, World
from coopspeed.signals import SignalConfig

# 1. Single vehicle arriving in green: should glide through with 0 idle/stops.
cfg = SimConfig(
    duration_s=240.0, dt_s=0.1, seed=1, technique="csof",
    arrival_rate_veh_s=0.0,
    segments=(SegmentConfig(), SegmentConfig(), SegmentConfig()),
    initial_vehicles=(InitialVehicle(seg=0, lane=0, pos=400.0, speed=13.89),),
)
w = World(cfg)
rep = w.run()
print("single CSOF:", "completed", rep.completed, "idle", rep.total_mean_idling_s,
      "stops", rep.total_mean_stops)

# 2. Same under NCSO.
rep2 = World(SimConfig(
    duration_s=240.0, dt_s=0.1, seed=1, technique="ncso", arrival_rate_veh_s=0.0,
    initial_vehicles=(InitialVehicle(seg=0, lane=0, pos=400.0, speed=13.89),),
)).run()
print("single NCSO:", "completed", rep2.completed, "idle", rep2.total_mean_idling_s)

# 3. Moderate volume comparison, short horizon.
for tech in ("csof", "ncso", "fixed"):
    t0 = time.time()
    rep = World(SimConfig(
        duration_s=600.0, dt_s=0.1, seed=3, technique=tech,
        arrival_rate_veh_s=600 / 3600.0,
    )).run()
    print(f"{tech}: spawned={rep.spawned} completed={rep.completed} "
          f"idle={rep.total_mean_idling_s:.3f} stops={rep.total_mean_stops:.3f} "
          f"energy={rep.total_mean_energy_j:.0f} wall={time.time()-t0:.1f}s")

# 4. Determinism.
a = World(SimConfig(duration_s=300.0, seed=9, technique="csof",
                    arrival_rate_veh_s=0.2)).run()
b = World(SimConfig(duration_s=300.0, seed=9, technique="csof",
                    arrival_rate_veh_s=0.2)).run()
print("determinism:", a == b)
