"""Trace a single vehicle through the corridor to find where it stalls."""
from coopspeed.sim import InitialVehicle, SimConfig, World

cfg = SimConfig(
    duration_s=400.0, dt_s=0.1, seed=1, technique="csof", arrival_rate_veh_s=0.0,
    initial_vehicles=(InitialVehicle(seg=0, lane=0, pos=400.0, speed=13.89),),
)
w = World(cfg)
last = None
for i in range(4000):
    w.step()
    if not w.vehicles:
        print(f"completed at t={w.t:.1f}")
        break
    v = w.vehicles[1]
    snap = (v.seg, round(v.pos, -1), round(v.speed, 1), v.queued, v.released,
            v.token.tau if v.token else None)
    if snap != last:
        print(f"t={w.t:6.1f} seg={v.seg} pos={v.pos:7.1f} v={v.speed:5.2f} "
              f"queued={v.queued} released={v.released} "
              f"tok={v.token.tau if v.token else '-'} cmd={v.cmd}")
        last = snap
print("report:", w.report().total_mean_idling_s, w.report().total_mean_stops,
      "completed:", w.completed)
