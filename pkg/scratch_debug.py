"""Find where low-volume vehicles lose time: follow a mid-run vehicle."""
from coopspeed.sim import SimConfig, World

cfg = SimConfig(duration_s=400.0, seed=2, technique="csof", arrival_rate_veh_s=300 / 3600.0)
w = World(cfg)

target = 4  # follow this vin
prev = None
for _ in range(4000):
    w.step()
    v = w.vehicles.get(target)
    if v is None:
        continue
    state = (v.seg, round(v.speed, 1), v.queued, v.released,
             v.token.tau if v.token else None)
    if state != prev:
        d = cfg.segments[v.seg].length_m - v.pos
        print(f"t={w.t:6.1f} seg={v.seg} d={d:7.1f} v={v.speed:5.2f} "
              f"q={int(v.queued)} r={int(v.released)} tok={v.token.tau if v.token else '-'} "
              f"cmd={v.cmd if v.cmd is None else round(v.cmd, 2)} idle={sum(v.idle):.1f}")
        prev = state
print("done", w.t)
