"""Where do stops happen at low volume?"""
from coopspeed.sim import SimConfig, World

cfg = SimConfig(duration_s=900.0, seed=2, technique="csof", arrival_rate_veh_s=300 / 3600.0)
w = World(cfg)
stop_events = []
speeds = {}
for _ in range(9000):
    w.step()
    for vin, v in w.vehicles.items():
        was = speeds.get(vin, 99.0)
        if v.speed < 0.1 and was >= 0.1:
            d = cfg.segments[v.seg].length_m - v.pos
            u = (w.t - cfg.segments[v.seg].signal.offset_s) % 60.0
            stop_events.append((round(w.t, 1), vin, v.seg, round(d, 1),
                                round(u, 1), v.cmd and round(v.cmd, 2),
                                v.token.tau if v.token else None))
        speeds[vin] = v.speed

print(f"{len(stop_events)} stop events")
for e in stop_events[:40]:
    print("t=%7.1f vin=%3d seg=%d d=%7.1f cyclepos=%5.1f cmd=%s tok=%s" % e)
