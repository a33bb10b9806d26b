"""Trace a vehicle that stops at red onset: why did its plan fail?"""
from coopspeed.sim import SimConfig, World

cfg = SimConfig(duration_s=900.0, seed=2, technique="csof", arrival_rate_veh_s=300 / 3600.0)
w = World(cfg)
speeds = {}
victim = None
for _ in range(9000):
    w.step()
    for vin, v in w.vehicles.items():
        was = speeds.get(vin, 99.0)
        if v.speed < 0.1 and was >= 0.1 and victim is None:
            u = (w.t % 60.0)
            if u > 24.5:  # stopped shortly after red onset
                victim = vin
                print(f"victim vin={vin} stopped at t={w.t:.1f} cyclepos={u:.1f} seg={v.seg}")
        speeds[vin] = v.speed
    if victim:
        break

# Re-run and trace the victim from activation.
w = World(cfg)
prev = None
for _ in range(9000):
    w.step()
    v = w.vehicles.get(victim)
    if v is None:
        if prev is not None:
            break
        continue
    seg = cfg.segments[v.seg]
    d = seg.length_m - v.pos
    if d > 520:
        continue
    u = w.t % 60.0
    snap = (v.seg, round(v.speed, 1), v.queued, v.token.tau if v.token else None,
            None if v.cmd is None else round(v.cmd, 1))
    if snap != prev:
        print(f"t={w.t:7.1f} u={u:5.1f} seg={v.seg} d={d:6.1f} v={v.speed:5.2f} "
              f"q={int(v.queued)} tok={v.token.tau if v.token else '-'} "
              f"cmd={None if v.cmd is None else round(v.cmd, 2)} idle={sum(v.idle):.1f}")
        prev = snap
