"""Discrete-time corridor engine.

A corridor is a chain of road segments, each ending at a fixed-cycle
light.  Per step the engine advances signals, releases queued vehicles
at the service rate, lets in-range cooperative vehicles maintain or
claim time tokens (with conflicts settled by the precedence games),
plans every vehicle's speed, and integrates kinematics under density,
comfort, car-following, and stop-line constraints.

Three techniques share identical road physics:

* ``csof``  -- token table per light, conflicts resolved by games;
* ``ncso``  -- the same case-based speed planning, but every vehicle
  assumes the slot containing its own arrival is free (no table, no
  games, no exclusivity);
* ``fixed`` -- no speed optimization; cruise and react.

Tokens live in per-light allocation epochs: an epoch opens at a red
start and closes when the following green ends, so slots granted during
red carry into the green they target and everything expires with it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import tokens
from .energy import EnergyLedger, EnergyParams, accel_energy
from .games import CreditLedger, Mode, resolve_conflict
from .planner import KinematicState, plan
from .signals import Approach, SignalConfig, SignalState, departures_per_green, state_at
from .tokens import TimeToken, TokenTable, detect_conflicts, slot_for_arrival

TECHNIQUES = ("csof", "ncso", "fixed")

KMH = 1 / 3.6


@dataclass(frozen=True)
class SegmentConfig:
    length_m: float = 1000.0
    lanes: int = 2
    v_min: float = 10.0 * KMH
    v_max: float = 60.0 * KMH
    d_max_veh_km_lane: float = 150.0
    grade: float = 0.0  # elevation gain per meter traveled
    signal: SignalConfig = field(default_factory=SignalConfig)

    def __post_init__(self) -> None:
        if self.length_m <= 0:
            raise ValueError("segment length must be positive")
        if self.lanes < 2:
            raise ValueError("the corridor needs at least two lanes")
        if not 0 <= self.v_min <= self.v_max:
            raise ValueError("need 0 <= v_min <= v_max")
        if self.d_max_veh_km_lane <= 0:
            raise ValueError("d_max must be positive")


@dataclass(frozen=True)
class InitialVehicle:
    """Deterministically pre-placed vehicle for scripted scenarios."""

    seg: int = 0
    lane: int = 0
    pos: float = 0.0
    speed: float = 0.0
    mode: Mode = Mode.NORMAL
    credits: int = 0


def _default_segments() -> tuple[SegmentConfig, ...]:
    return (SegmentConfig(), SegmentConfig(), SegmentConfig())


@dataclass(frozen=True)
class SimConfig:
    duration_s: float = 10800.0
    dt_s: float = 0.1
    seed: int = 1
    technique: str = "csof"
    activation_distance_m: float = 500.0
    arrival_rate_veh_s: float = 0.1
    entry_speed: float = 50.0 * KMH
    replan_keep_probability: float = 0.0
    mode_probabilities: tuple[float, float, float] = (0.2, 0.6, 0.2)
    accel_limit: float = 2.5  # comfort bound, m/s^2
    time_gap_s: float = 2.0
    reaction_time_s: float = 1.10
    vehicle_length_m: float = 5.0
    standstill_gap_m: float = 2.0
    plan_margin_s: float = 0.5  # extra slack before a green closes
    arrival_bias_s: float = 0.5  # aim this far into the target window
    stop_speed: float = 0.1  # below this a vehicle counts as stopped
    moving_speed: float = 1.0  # stop detector re-arms above this
    density_cap_ratio: float = 0.85
    energy: EnergyParams = field(default_factory=EnergyParams)
    segments: tuple[SegmentConfig, ...] = field(default_factory=_default_segments)
    initial_vehicles: tuple[InitialVehicle, ...] = ()
    scripted_arrivals: tuple[float, ...] | None = None
    trace: bool = False

    def __post_init__(self) -> None:
        if self.dt_s <= 0:
            raise ValueError("dt must be positive")
        if self.duration_s < 0:
            raise ValueError("duration must be non-negative")
        if self.technique not in TECHNIQUES:
            raise ValueError(f"technique must be one of {TECHNIQUES}")
        if not self.segments:
            raise ValueError("need at least one segment")
        if self.activation_distance_m > min(s.length_m for s in self.segments):
            raise ValueError("activation distance cannot exceed segment length")
        if abs(sum(self.mode_probabilities) - 1.0) > 1e-9:
            raise ValueError("mode probabilities must sum to 1")


class Vehicle:
    __slots__ = (
        "vin", "mode", "seg", "lane", "pos", "speed", "cmd", "token",
        "queued", "idle", "stops", "energy_j", "energy",
        "stop_armed", "spawned_at",
    )

    def __init__(self, vin: int, mode: Mode, seg: int, lane: int, pos: float,
                 speed: float, n_segments: int, spawned_at: float) -> None:
        self.vin = vin
        self.mode = mode
        self.seg = seg
        self.lane = lane
        self.pos = pos
        self.speed = speed
        self.cmd: float | None = None
        self.token: TimeToken | None = None
        self.queued = False
        self.idle = [0.0] * n_segments
        self.stops = [0] * n_segments
        self.energy_j = [0.0] * n_segments
        self.energy = EnergyLedger()
        self.stop_armed = speed > 1.0
        self.spawned_at = spawned_at


class LightAgent:
    """Per-intersection runtime: token table, queue, crossing gate."""

    def __init__(self, idx: int, seg_cfg: SegmentConfig) -> None:
        self.idx = idx
        self.cfg = seg_cfg.signal
        self.n_dep = departures_per_green(self.cfg.departure_rate, self.cfg.green_s)
        self.table = TokenTable(self.cfg.departure_rate, self.n_dep, cycle_id=-(10**9))
        self.queue: list[int] = []  # vins, closest to the line first
        self.last_cross_t = -math.inf
        self.was_crossable = False
        self.was_green = False
        # Per-phase measurement counters.
        self.red_joins = 0
        self.green_crossings = 0
        self.red_join_history: list[int] = []
        self.green_crossing_history: list[int] = []

    def epoch_of(self, t: float) -> int:
        """Allocation epoch: opens at a red start, ends with its green."""
        return math.floor((t - self.cfg.offset_s - self.cfg.green_s) / self.cfg.cycle_s)


@dataclass
class IntersectionMetrics:
    name: str
    vehicles: int
    mean_idling_s: float
    mean_stops: float
    mean_energy_j: float


@dataclass
class MetricsReport:
    technique: str
    seed: int
    duration_s: float
    spawned: int
    completed: int
    in_network: int
    per_intersection: list[IntersectionMetrics]
    total_mean_idling_s: float
    total_mean_stops: float
    total_mean_energy_j: float

    def rows(self) -> list[dict]:
        out = [
            {
                "intersection": m.name,
                "vehicles": m.vehicles,
                "mean_idling_s": m.mean_idling_s,
                "mean_stops": m.mean_stops,
                "mean_energy_j": m.mean_energy_j,
            }
            for m in self.per_intersection
        ]
        out.append(
            {
                "intersection": "total",
                "vehicles": self.completed,
                "mean_idling_s": self.total_mean_idling_s,
                "mean_stops": self.total_mean_stops,
                "mean_energy_j": self.total_mean_energy_j,
            }
        )
        return out


class World:
    """One simulation instance; mutate through step() only."""

    def __init__(self, cfg: SimConfig) -> None:
        self.cfg = cfg
        self.t = 0.0
        self.lights = [LightAgent(i, s) for i, s in enumerate(cfg.segments)]
        self.vehicles: dict[int, Vehicle] = {}
        self.ledger = CreditLedger()
        self.next_vin = 1
        self.spawned = 0
        self.completed = 0
        self.trace: list[str] = []
        base = cfg.seed
        self.rng_arrivals = random.Random(base * 6 + 0)
        self.rng_modes = random.Random(base * 6 + 1)
        self.rng_games = random.Random(base * 6 + 2)
        self.rng_tl = random.Random(base * 6 + 3)
        self.rng_replan = random.Random(base * 6 + 4)
        self._pending_spawns = 0
        self._next_arrival = self._draw_arrival(0.0)
        self._scripted_idx = 0
        n = len(cfg.segments)
        self._sum_idle = [0.0] * n
        self._sum_stops = [0] * n
        self._sum_energy = [0.0] * n
        self._device_power = sum(w for w, _ in cfg.energy.devices)
        for iv in cfg.initial_vehicles:
            self._place(iv.seg, iv.lane, iv.pos, iv.speed, mode=iv.mode,
                        credits=iv.credits)

    # -- spawning ----------------------------------------------------------

    def _draw_arrival(self, now: float) -> float | None:
        if self.cfg.scripted_arrivals is not None or self.cfg.arrival_rate_veh_s <= 0:
            return None
        return now + self.rng_arrivals.expovariate(self.cfg.arrival_rate_veh_s)

    def _sample_mode(self) -> Mode:
        r = self.rng_modes.random()
        p_relaxed, p_normal, _ = self.cfg.mode_probabilities
        if r < p_relaxed:
            return Mode.RELAXED
        if r < p_relaxed + p_normal:
            return Mode.NORMAL
        return Mode.RUSH

    def _place(self, seg: int, lane: int, pos: float, speed: float,
               mode: Mode | None = None, credits: int = 0) -> Vehicle:
        v = Vehicle(
            vin=self.next_vin,
            mode=self._sample_mode() if mode is None else mode,
            seg=seg, lane=lane, pos=pos, speed=speed,
            n_segments=len(self.cfg.segments), spawned_at=self.t,
        )
        self.next_vin += 1
        self.spawned += 1
        self.vehicles[v.vin] = v
        if credits:
            self.ledger.set(v.vin, credits)
        return v

    def _entry_lane(self) -> int | None:
        """Freest entry lane of segment 0, or None while all are blocked."""
        cfg = self.cfg
        needed = cfg.vehicle_length_m + cfg.standstill_gap_m
        best_lane = None
        best_clear = needed - 1e-9
        for lane in range(cfg.segments[0].lanes):
            rear = min(
                (v.pos - cfg.vehicle_length_m for v in self.vehicles.values()
                 if v.seg == 0 and v.lane == lane),
                default=math.inf,
            )
            if rear > best_clear:
                best_lane, best_clear = lane, rear
        return best_lane

    def _spawn_due(self) -> None:
        if self.cfg.scripted_arrivals is not None:
            script = self.cfg.scripted_arrivals
            while self._scripted_idx < len(script) and script[self._scripted_idx] <= self.t:
                self._pending_spawns += 1
                self._scripted_idx += 1
        else:
            while self._next_arrival is not None and self._next_arrival <= self.t:
                self._pending_spawns += 1
                self._next_arrival = self._draw_arrival(self._next_arrival)
        while self._pending_spawns:
            lane = self._entry_lane()
            if lane is None:
                break
            self._pending_spawns -= 1
            self._place(0, lane, 0.0, self.cfg.entry_speed)

    # -- token protocol ----------------------------------------------------

    def _usable_b(self, light: LightAgent, b: float) -> float:
        """Slot upper edge pulled in so arrivals dodge the all-red gap."""
        margin = light.cfg.all_red_gap_s + self.cfg.plan_margin_s
        return min(b, light.cfg.green_s - margin)

    def _build_token(self, light: LightAgent, tau: int, vin: int) -> TimeToken:
        a, b = tokens.token_window(tau, light.cfg.departure_rate)
        return TimeToken(tau=tau, a=a, b=self._usable_b(light, b),
                         cycle_id=light.table.cycle_id, vin=vin)

    def _token_feasible(self, v: Vehicle, state: SignalState, tok: TimeToken,
                        seg: SegmentConfig, v_cap: float) -> bool:
        if state.queue_len >= tok.tau:
            # The standing queue will discharge through this slot.
            return False
        d = seg.length_m - v.pos
        if state.approach_green:
            elapsed = state.green_s - (state.remaining_green or 0.0)
            lo, hi = max(0.0, tok.a - elapsed), tok.b - elapsed
        else:
            r_r = state.remaining_red or 0.0
            lo, hi = r_r + tok.a, r_r + tok.b
        if hi <= lo or hi <= 0:
            return False
        if d / hi > v_cap:
            return False
        return lo <= 0 or d / lo >= seg.v_min

    def _request_tti(self, v: Vehicle, state: SignalState, seg: SegmentConfig,
                     v_cap: float) -> float | None:
        """Arrival time submitted with a token request, or None."""
        d = seg.length_m - v.pos
        if v.speed <= 0:
            return None
        cur = d / v.speed
        if state.approach_green:
            r_g = state.remaining_green or 0.0
            if cur <= r_g:
                return cur
            # An achievable higher speed may still make this green.
            if v_cap > 0 and d / v_cap <= r_g and cur <= r_g + state.red_s:
                return d / v_cap
            return None
        r_r = state.remaining_red or 0.0
        if r_r < cur <= r_r + state.green_s:
            return cur
        return None

    def _slot_reachable(self, v: Vehicle, state: SignalState, light: LightAgent,
                        slot: int, v_cap: float) -> bool:
        """Can the vehicle still arrive inside this slot's usable window?"""
        seg = self.cfg.segments[light.idx]
        d = seg.length_m - v.pos
        a, b = tokens.token_window(slot, light.cfg.departure_rate)
        b = self._usable_b(light, b)
        if state.approach_green:
            elapsed = state.green_s - (state.remaining_green or 0.0)
            lo, hi = max(0.0, a - elapsed), b - elapsed
        else:
            r_r = state.remaining_red or 0.0
            lo, hi = r_r + a, r_r + b
        if hi <= lo or hi <= 0:
            return False
        if d / hi > v_cap:
            return False
        return lo <= 0 or d / lo >= seg.v_min

    def _first_free_reachable(self, v: Vehicle, state: SignalState, light: LightAgent,
                              v_cap: float, occupied, start: int = 1) -> int | None:
        """First unclaimed, reachable slot at or after ``start``.

        Scanning forward from the natural arrival slot keeps allocation
        roughly first-come-first-served: a vehicle slows into a later
        free slot rather than racing ahead of traffic for an early one.
        """
        for j in range(max(start, state.queue_len + 1), light.n_dep + 1):
            if j in occupied:
                continue
            if self._slot_reachable(v, state, light, j, v_cap):
                return j
        return None

    def _maintain_tokens(self, light: LightAgent, state: SignalState,
                         approach_vehicles: list[Vehicle],
                         caps: dict[int, float]) -> None:
        """One allocation round for one light.

        Standing reservations are binding: new requests never contest
        them and instead take the first free slot they can still reach.
        Requests within the same step act on the same table snapshot, so
        simultaneous requests can land on one slot; those races are the
        conflicts the games resolve.
        """
        seg = self.cfg.segments[light.idx]
        table = light.table
        occupied_before = {
            j for j in range(1, light.n_dep + 1) if table.claimants(j)
        }
        fresh: list[int] = []
        for v in approach_vehicles:
            if v.queued:
                continue
            v_cap = caps[v.vin]
            if v.token is not None:
                if v.token.cycle_id != table.cycle_id or not self._token_feasible(
                    v, state, v.token, seg, v_cap
                ):
                    table.release(v.vin)
                    self._trace(f"{self.t:.1f},SI{light.idx + 1},release,{v.vin},{v.token.tau}")
                    v.token = None
            if v.token is not None:
                upgrade = self._first_free_reachable(
                    v, state, light, v_cap,
                    {j for j in range(1, light.n_dep + 1) if table.claimants(j)},
                )
                if upgrade is not None and upgrade < v.token.tau:
                    table.release(v.vin)
                    table.claim(upgrade, v.vin)
                    v.token = self._build_token(light, upgrade, v.vin)
                    self._trace(f"{self.t:.1f},SI{light.idx + 1},grant,{v.vin},{upgrade}")
            if v.token is None:
                tti_req = self._request_tti(v, state, seg, v_cap)
                if tti_req is None:
                    continue
                slot = slot_for_arrival(tti_req, state, light.cfg.departure_rate,
                                        light.n_dep)
                if slot is not None and slot not in occupied_before:
                    table.claim(slot, v.vin)
                    fresh.append(v.vin)
                    continue
                alt = self._first_free_reachable(v, state, light, v_cap,
                                                 occupied_before)
                if alt is not None:
                    table.claim(alt, v.vin)
                    fresh.append(v.vin)
                else:
                    self._trace(f"{self.t:.1f},SI{light.idx + 1},deny,{v.vin},0")

        vehicles = self.vehicles
        for tau, group in detect_conflicts(table.requests()).items():
            group = [vin for vin in group if vin in vehicles]
            if len(group) < 2:
                continue
            modes = {vin: vehicles[vin].mode for vin in group}
            result = resolve_conflict(group, modes, self.ledger, self.rng_games, self.rng_tl)
            tiers = ";".join(str(r.tier) for r in result.rounds)
            losers = ";".join(str(x) for x in result.losers)
            self._trace(f"{self.t:.1f},conflict,{tau},{result.winner},{losers},{tiers}")
            live = {j for j in range(1, light.n_dep + 1) if table.claimants(j)}
            for loser in result.losers:
                table.release(loser)
                lv = vehicles[loser]
                lv.token = None
                # The loser requests a different token right away; only a
                # conflict-free slot will do.
                alt = self._first_free_reachable(lv, state, light, caps[loser],
                                                 live, start=tau)
                if alt is not None:
                    table.claim(alt, loser)
                    live.add(alt)

        for vin in fresh:
            v = vehicles[vin]
            slot = table.slot_of(vin)
            if slot is not None and v.token is None and table.holder(slot) == vin:
                v.token = self._build_token(light, slot, vin)
                self._trace(f"{self.t:.1f},SI{light.idx + 1},grant,{vin},{slot}")

    def _virtual_token(self, v: Vehicle, state: SignalState, light: LightAgent,
                       seg: SegmentConfig, v_cap: float) -> TimeToken | None:
        """Non-cooperative planning: the slot for my arrival, assumed free."""
        tti_req = self._request_tti(v, state, seg, v_cap)
        if tti_req is None:
            return None
        tau = slot_for_arrival(tti_req, state, light.cfg.departure_rate, light.n_dep)
        if tau is None:
            return None
        return self._build_token(light, tau, v.vin)

    def _plan_cap(self, v: Vehicle, leader: Vehicle | None, seg: SegmentConfig) -> float:
        """Achievable speed ceiling for planning: the road limit, or what
        the leader ahead allows (its speed, or the gap-safe speed)."""
        if leader is None:
            return seg.v_max
        gap = leader.pos - self.cfg.vehicle_length_m - v.pos
        safe = max(0.0, (gap - self.cfg.standstill_gap_m) / self.cfg.time_gap_s)
        return max(seg.v_min, min(seg.v_max, max(leader.speed, safe)))

    # -- main loop ---------------------------------------------------------

    def _trace(self, line: str) -> None:
        if self.cfg.trace:
            self.trace.append(line)

    def _signal_phase_bookkeeping(self) -> list[SignalState]:
        t = self.t
        states: list[SignalState] = []
        for light in self.lights:
            state = state_at(light.cfg, t, Approach.EAST)
            state.queue_len = len(light.queue)
            state.green_end_margin_s = light.cfg.all_red_gap_s + self.cfg.plan_margin_s
            states.append(state)

            epoch = light.epoch_of(t)
            if epoch != light.table.cycle_id:
                light.table.clear(epoch)

            if state.approach_green and not light.was_green:
                light.red_join_history.append(light.red_joins)
                light.red_joins = 0
            light.was_green = state.approach_green

            crossable = state.crossable
            if crossable and not light.was_crossable:
                light.green_crossings = 0
            if not crossable and light.was_crossable:
                light.green_crossing_history.append(light.green_crossings)
            light.was_crossable = crossable
        return states

    def _by_lane(self) -> dict[tuple[int, int], list[Vehicle]]:
        out: dict[tuple[int, int], list[Vehicle]] = {}
        for v in self.vehicles.values():
            out.setdefault((v.seg, v.lane), []).append(v)
        for group in out.values():
            group.sort(key=lambda v: v.pos)
        return out

    @staticmethod
    def _leaders(lanes: dict[tuple[int, int], list[Vehicle]]) -> dict[int, Vehicle]:
        out: dict[int, Vehicle] = {}
        for group in lanes.values():
            for follower, leader in zip(group, group[1:]):
                out[follower.vin] = leader
        return out

    def _plan_targets(self, order: list[int], states: list[SignalState],
                      caps: dict[int, float]) -> dict[int, float]:
        cfg = self.cfg
        targets: dict[int, float] = {}
        for vin in order:
            v = self.vehicles[vin]
            seg = cfg.segments[v.seg]
            light = self.lights[v.seg]
            state = states[v.seg]
            d = seg.length_m - v.pos
            if v.queued:
                # The stop-line gate and car-following govern discharge.
                targets[vin] = seg.v_max if state.crossable else 0.0
                continue
            if d > cfg.activation_distance_m or cfg.technique == "fixed":
                targets[vin] = min(cfg.entry_speed, seg.v_max)
                continue
            if (
                cfg.replan_keep_probability > 0
                and v.cmd is not None
                and self.rng_replan.random() < cfg.replan_keep_probability
            ):
                targets[vin] = v.cmd
                continue
            v_cap = caps[vin]
            k = KinematicState(speed=v.speed, dist=d, v_min=seg.v_min, v_max=v_cap)
            t_q = len(light.queue) / light.cfg.departure_rate + cfg.arrival_bias_s
            tok = v.token if cfg.technique == "csof" else self._virtual_token(
                v, state, light, seg, v_cap
            )
            res = plan(k, state, tok, t_q)
            v.cmd = res.speed
            targets[vin] = res.speed
        return targets

    def _lane_changes(self, order: list[int], lanes: dict) -> None:
        """Overtake when the adjacent lane allows a higher speed and has
        safe time gaps fore and aft."""
        cfg = self.cfg
        for vin in order:
            v = self.vehicles[vin]
            if v.queued or v.speed < cfg.stop_speed:
                continue
            seg = cfg.segments[v.seg]
            if seg.length_m - v.pos < 30.0:
                continue  # no weaving on the final approach
            group = lanes.get((v.seg, v.lane), [])
            lead = None
            for o in group:
                if o.pos > v.pos and (lead is None or o.pos < lead.pos):
                    lead = o
            cap_here = self._plan_cap(v, lead, seg)
            if cap_here >= seg.v_max - 0.3:
                continue
            for other_lane in range(seg.lanes):
                if other_lane == v.lane:
                    continue
                other = lanes.get((v.seg, other_lane), [])
                front_gap = math.inf
                back_gap = math.inf
                back_speed = 0.0
                new_lead = None
                for o in other:
                    if o.pos >= v.pos:
                        if o.pos - cfg.vehicle_length_m - v.pos < front_gap:
                            front_gap = o.pos - cfg.vehicle_length_m - v.pos
                            new_lead = o
                    else:
                        back_gap = min(back_gap, v.pos - cfg.vehicle_length_m - o.pos)
                        back_speed = max(back_speed, o.speed)
                if self._plan_cap(v, new_lead, seg) <= cap_here + 0.5:
                    continue
                if (
                    front_gap >= cfg.time_gap_s * max(v.speed, 1.0)
                    and back_gap >= cfg.time_gap_s * max(back_speed, 1.0)
                ):
                    group.remove(v)
                    v.lane = other_lane
                    other.append(v)
                    other.sort(key=lambda x: x.pos)
                    lanes[(v.seg, other_lane)] = other
                    break

    def _gate_open(self, light: LightAgent, state: SignalState, lanes: dict,
                   v: Vehicle) -> bool:
        return (
            state.crossable
            and self.t + self.cfg.dt_s - light.last_cross_t
            >= 1.0 / light.cfg.departure_rate - 1e-9
            and self._next_entry_clear(lanes, v)
        )

    def _next_entry_clear(self, lanes: dict, v: Vehicle) -> bool:
        """Room to land at the start of the next segment (spillback guard)."""
        nxt = v.seg + 1
        if nxt >= len(self.cfg.segments):
            return True
        need = self.cfg.vehicle_length_m + self.cfg.standstill_gap_m
        return all(o.pos >= need for o in lanes.get((nxt, v.lane), ()))

    def step(self) -> None:
        cfg = self.cfg
        dt = cfg.dt_s
        t = self.t

        states = self._signal_phase_bookkeeping()
        lanes = self._by_lane()
        order = sorted(self.vehicles)
        leaders = self._leaders(lanes)
        caps = {
            vin: self._plan_cap(
                self.vehicles[vin], leaders.get(vin), cfg.segments[self.vehicles[vin].seg]
            )
            for vin in order
        }

        if cfg.technique == "csof":
            per_light: list[list[Vehicle]] = [[] for _ in self.lights]
            for vin in order:
                v = self.vehicles[vin]
                if cfg.segments[v.seg].length_m - v.pos <= cfg.activation_distance_m:
                    per_light[v.seg].append(v)
            for light, state in zip(self.lights, states):
                self._maintain_tokens(light, state, per_light[light.idx], caps)

        # Per-segment density speed cap (density saturates at the cap ratio).
        counts = [0] * len(cfg.segments)
        for v in self.vehicles.values():
            counts[v.seg] += 1
        density_cap = []
        for seg, n in zip(cfg.segments, counts):
            density = n / (seg.length_m / 1000.0) / seg.lanes
            density = min(density, cfg.density_cap_ratio * seg.d_max_veh_km_lane)
            density_cap.append(seg.v_max * (1.0 - density / seg.d_max_veh_km_lane))

        targets = self._plan_targets(order, states, caps)
        self._lane_changes(order, lanes)
        leaders = self._leaders(lanes)

        # Compose clamps: comfort-limited planning, hard safety overrides.
        new_speed: dict[int, float] = {}
        for vin in order:
            v = self.vehicles[vin]
            seg = cfg.segments[v.seg]
            light = self.lights[v.seg]
            state = states[v.seg]
            d = seg.length_m - v.pos

            desired = min(targets[vin], density_cap[v.seg])
            limit = cfg.accel_limit * dt
            sp = min(max(desired, v.speed - limit), v.speed + limit)

            lead = leaders.get(vin)
            if lead is not None:
                gap = lead.pos - cfg.vehicle_length_m - v.pos
                safe = max(0.0, (gap - cfg.standstill_gap_m) / cfg.time_gap_s)
                if sp > safe:
                    if gap < v.speed * cfg.reaction_time_s:
                        sp = safe  # inside the reaction horizon: brake hard
                    else:
                        sp = max(safe, v.speed - limit)

            # Stop line behaves as an obstacle unless the gate is open.
            if d <= cfg.time_gap_s * seg.v_max + 5.0 and not self._gate_open(
                light, state, lanes, v
            ):
                line_safe = max(0.0, d / cfg.time_gap_s)
                if sp > line_safe:
                    if d < v.speed * cfg.reaction_time_s:
                        sp = line_safe
                    else:
                        sp = max(line_safe, v.speed - limit)
            new_speed[vin] = max(0.0, sp)

        # Integrate, accrue metrics, and handle crossings.
        completed_now: list[int] = []
        for vin in order:
            v = self.vehicles[vin]
            seg = cfg.segments[v.seg]
            light = self.lights[v.seg]
            state = states[v.seg]
            sp = new_speed[vin]
            prev_speed = v.speed
            v.speed = sp
            v.pos += sp * dt

            stopped = sp < cfg.stop_speed
            if stopped:
                v.idle[v.seg] += dt
                if v.stop_armed:
                    v.stops[v.seg] += 1
                    v.stop_armed = False
            elif sp > cfg.moving_speed:
                v.stop_armed = True
            self._accrue_energy(v, prev_speed, sp, dt, seg)

            if v.pos >= seg.length_m:
                if self._gate_open(light, state, lanes, v):
                    light.last_cross_t = t + dt
                    light.green_crossings += 1
                    light.table.release(vin)
                    v.token = None
                    v.queued = False
                    if v.seg + 1 >= len(cfg.segments):
                        completed_now.append(vin)
                    else:
                        v.pos -= seg.length_m
                        v.seg += 1
                else:
                    v.pos = seg.length_m - 0.01
                    v.speed = 0.0

        for vin in completed_now:
            v = self.vehicles.pop(vin)
            self.completed += 1
            for i in range(len(cfg.segments)):
                self._sum_idle[i] += v.idle[i]
                self._sum_stops[i] += v.stops[i]
                self._sum_energy[i] += v.energy_j[i]

        self._update_queues(states)
        self._spawn_due()
        self.t = t + dt

    def _accrue_energy(self, v: Vehicle, prev: float, sp: float, dt: float,
                       seg: SegmentConfig) -> None:
        """One step of the energy ledger.

        The speed-change term is evaluated per step over the distance
        covered, with two engine-level guards: changes below the cruising
        threshold do not count (planner jitter), and no step may move more
        energy than the motor can deliver or absorb in ``dt``.
        """
        ep = self.cfg.energy
        dist = sp * dt
        power = (
            ep.rolling * ep.mass * ep.gravity * sp
            + 0.5 * ep.air_density * ep.frontal_area * ep.drag * sp * sp * sp
        )
        loss_j = power * dt / ep.eta
        dev_j = self._device_power * dt
        pot = ep.mass * ep.gravity * (seg.grade * dist) / ep.eta
        led = v.energy
        led.loss += loss_j
        led.devices += dev_j
        if pot >= 0:
            led.potential_consumed += pot
        else:
            led.potential_gained += pot
        total = loss_j + dev_j + pot

        acc = accel_energy(ep, prev, sp, dist)
        if acc:
            cap = ep.motor_power * dt / ep.eta
            acc = max(-cap, min(cap, acc))
            if acc >= 0:
                led.accel += acc
            else:
                led.decel += acc
            total += acc
        led.total += total
        v.energy_j[v.seg] += total

    def _update_queues(self, states: list[SignalState]) -> None:
        """Queue bookkeeping: join when stopped at the line or the lane's
        queue tail, leave when rolling with the discharge wave."""
        cfg = self.cfg
        join_zone = cfg.vehicle_length_m + 2.0 * cfg.standstill_gap_m
        roll_speed = 0.5  # above this a queued vehicle is moving again
        for light, state in zip(self.lights, states):
            seg = cfg.segments[light.idx]
            for vin in light.queue:
                v = self.vehicles.get(vin)
                if v is not None and v.queued and v.speed >= roll_speed:
                    v.queued = False
            light.queue = [
                vin for vin in light.queue
                if vin in self.vehicles and self.vehicles[vin].queued
                and self.vehicles[vin].seg == light.idx
            ]
            tails: dict[int, float] = {}
            for vin in light.queue:
                q = self.vehicles[vin]
                rear = q.pos - cfg.vehicle_length_m
                if q.lane not in tails or rear < tails[q.lane]:
                    tails[q.lane] = rear
            cands = [
                v for v in self.vehicles.values()
                if v.seg == light.idx and not v.queued
                and v.speed < cfg.stop_speed
            ]
            cands.sort(key=lambda v: -v.pos)
            for v in cands:
                d_line = seg.length_m - v.pos
                tail = tails.get(v.lane)
                if d_line <= join_zone or (tail is not None and tail - v.pos <= join_zone):
                    v.queued = True
                    v.token = None
                    light.table.release(v.vin)
                    light.queue.append(v.vin)
                    tails[v.lane] = v.pos - cfg.vehicle_length_m
                    if not state.approach_green:
                        light.red_joins += 1

    def run(self) -> MetricsReport:
        steps = int(round(self.cfg.duration_s / self.cfg.dt_s))
        for _ in range(steps):
            self.step()
        return self.report()

    def report(self) -> MetricsReport:
        n = self.completed
        per = []
        for i in range(len(self.cfg.segments)):
            per.append(
                IntersectionMetrics(
                    name=f"SI{i + 1}",
                    vehicles=n,
                    mean_idling_s=self._sum_idle[i] / n if n else 0.0,
                    mean_stops=self._sum_stops[i] / n if n else 0.0,
                    mean_energy_j=self._sum_energy[i] / n if n else 0.0,
                )
            )
        return MetricsReport(
            technique=self.cfg.technique,
            seed=self.cfg.seed,
            duration_s=self.cfg.duration_s,
            spawned=self.spawned,
            completed=n,
            in_network=len(self.vehicles),
            per_intersection=per,
            total_mean_idling_s=sum(self._sum_idle) / n if n else 0.0,
            total_mean_stops=sum(self._sum_stops) / n if n else 0.0,
            total_mean_energy_j=sum(self._sum_energy) / n if n else 0.0,
        )


def run(cfg: SimConfig) -> MetricsReport:
    """Run one scenario to completion; deterministic for a given seed."""
    return World(cfg).run()
