"""Green-window time tokens: slot arithmetic, allocation, conflicts.

Each green phase is partitioned into service slots of duration ``1/mu``
(one departure per slot).  Slots are anchored to the start of the green
window; the first ``N_q`` slots are implicitly reserved for the standing
queue and never offered to approaching vehicles.  Allocation maps a
vehicle's time-to-intersection onto the slot containing its projected
arrival.  Double allocation is possible by design (it is what triggers
the conflict games); the table therefore tracks claimants per slot and
conflict resolution trims each slot back to a single holder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .signals import SignalState


@dataclass(frozen=True)
class TimeToken:
    """One indexed green-window slot held by one vehicle.

    ``a``/``b`` are the slot boundaries in seconds after the green start;
    during red the planner offsets them by the remaining red time.
    """

    tau: int
    a: float
    b: float
    cycle_id: int
    vin: int


def token_window(tau: int, mu: float, red_offset: float = 0.0) -> tuple[float, float]:
    """Boundaries of slot ``tau``: ((tau-1)/mu, tau/mu), shifted by ``red_offset``."""
    if tau < 1:
        raise ValueError("token index must be >= 1")
    if mu <= 0:
        raise ValueError("departure rate mu must be positive")
    tsd = 1.0 / mu
    return red_offset + (tau - 1) * tsd, red_offset + tau * tsd


class TokenTable:
    """Per-approach, per-cycle claim table for green-window slots."""

    def __init__(self, mu: float, n_dep: int, cycle_id: int = 0) -> None:
        if mu <= 0:
            raise ValueError("departure rate mu must be positive")
        self.mu = mu
        self.n_dep = n_dep
        self.cycle_id = cycle_id
        self._claims: dict[int, list[int]] = {}

    @property
    def tsd(self) -> float:
        return 1.0 / self.mu

    def claim(self, slot: int, vin: int) -> None:
        self._claims.setdefault(slot, []).append(vin)

    def claimants(self, slot: int) -> tuple[int, ...]:
        return tuple(self._claims.get(slot, ()))

    def holder(self, slot: int) -> int | None:
        """Sole claimant of ``slot``, or None while free or contested."""
        vins = self._claims.get(slot)
        if vins and len(vins) == 1:
            return vins[0]
        return None

    def slot_of(self, vin: int) -> int | None:
        for slot, vins in self._claims.items():
            if vin in vins:
                return slot
        return None

    def requests(self) -> list[tuple[int, int]]:
        """All (vin, slot) claims, ordered by slot then vin."""
        out = []
        for slot in sorted(self._claims):
            for vin in sorted(self._claims[slot]):
                out.append((vin, slot))
        return out

    def release(self, vin: int) -> bool:
        """Free the slot claimed by ``vin``; no-op returning False if none."""
        slot = self.slot_of(vin)
        if slot is None:
            return False
        self._claims[slot].remove(vin)
        if not self._claims[slot]:
            del self._claims[slot]
        return True

    def clear(self, cycle_id: int) -> None:
        """Start a fresh cycle; all outstanding tokens expire."""
        self.cycle_id = cycle_id
        self._claims.clear()


def slot_for_arrival(
    tti: float, state: SignalState, mu: float, n_dep: int, n_q: int | None = None
) -> int | None:
    """Slot index containing the projected arrival, or None.

    Pure form of the allocation rule, shared by the table-backed
    allocator and by non-cooperative planning (which assumes every slot
    is free).  ``n_q`` defaults to the state's queue length.
    """
    if tti <= 0:
        return None
    tsd = 1.0 / mu
    n_q = state.queue_len if n_q is None else n_q
    if state.approach_green:
        r_g = state.remaining_green or 0.0
        if tti > r_g:
            return None
        # Slots are anchored to the green start, so shift by elapsed green.
        h = tti + (state.green_s - r_g)
    else:
        r_r = state.remaining_red or 0.0
        if tti < r_r:
            return None
        if not (tti > r_r + tsd * n_q and tti <= r_r + state.green_s):
            return None
        h = tti - r_r
    for j in range(n_q + 1, n_dep + 1):
        if (j - 1) * tsd <= h <= j * tsd:
            return j
    return None


def allocate(
    vin: int,
    tti: float,
    state: SignalState,
    table: TokenTable,
    free_only: bool = False,
) -> int | None:
    """Claim the slot containing ``vin``'s projected arrival.

    Returns the token index, or None when no slot covers the arrival
    (arrival outside the upcoming green, or inside the queue-reserved
    lead-in).  A claim on an already-claimed slot is recorded as well --
    that is a conflict for the games to resolve -- unless ``free_only``
    is set (used when re-assigning a game loser, so losers cannot
    immediately re-contest the slot they just lost).
    """
    slot = slot_for_arrival(tti, state, table.mu, table.n_dep)
    if slot is None:
        return None
    if free_only and table.claimants(slot):
        return None
    table.claim(slot, vin)
    return slot


def detect_conflicts(requests: Iterable[tuple[int, int]]) -> dict[int, list[int]]:
    """Group request (vin, tau) pairs by token; keep groups of two or more."""
    by_tau: dict[int, list[int]] = {}
    for vin, tau in requests:
        by_tau.setdefault(tau, []).append(vin)
    return {tau: sorted(vins) for tau, vins in sorted(by_tau.items()) if len(vins) > 1}


def release(vin: int, table: TokenTable) -> bool:
    """Free ``vin``'s slot; returns False (warning) if it held none."""
    return table.release(vin)


def reassign(
    vin: int, tti: float, state: SignalState, table: TokenTable
) -> int | None:
    """Drop ``vin``'s current slot and re-allocate for a recomputed TTI."""
    table.release(vin)
    return allocate(vin, tti, state, table, free_only=True)


def build_token(tau: int, table: TokenTable, vin: int) -> TimeToken:
    a, b = token_window(tau, table.mu)
    return TimeToken(tau=tau, a=a, b=b, cycle_id=table.cycle_id, vin=vin)
