from dataclasses import dataclass

from utils.environment import StatusFlags
from utils.geometry import Axis


@dataclass(frozen=True)
class StatusMessage:
    """The transmitted (starred) part of an agent's status at one tick."""

    sender: Axis
    tick: int
    stuck: bool
    access: bool
    arrived: bool

    @classmethod
    def from_flags(cls, sender, tick, flags):
        return cls(sender, tick, flags.stuck, flags.access, flags.arrived)

    def as_flags(self):
        """Partner flags as the receiver sees them; untransmitted fields are False."""
        return StatusFlags(stuck=self.stuck, access=self.access, arrived=self.arrived)


@dataclass(frozen=True)
class CommLedger:
    communicating_x: int = 0
    communicating_y: int = 0
    total_ticks: int = 0

    def percent(self, axis):
        if self.total_ticks == 0:
            return 0.0
        count = self.communicating_x if axis is Axis.X else self.communicating_y
        return 100.0 * count / self.total_ticks


def exchange(tick, flags_x, flags_y):
    """
    Synchronous push of both agents' pre-move snapshots.

    Returns:
        (message delivered to X, message delivered to Y)
    """
    from_x = StatusMessage.from_flags(Axis.X, tick, flags_x)
    from_y = StatusMessage.from_flags(Axis.Y, tick, flags_y)
    return from_y, from_x


def record_communication(ledger, tick, fired_x, fired_y, ticks=1):
    """
    Add one tick (or `ticks` identical ticks) to the ledger.

    Args:
        ledger: CommLedger so far
        tick: Tick being recorded
        fired_x: Whether X acted on Y's flags this tick
        fired_y: Whether Y acted on X's flags this tick
        ticks: Number of identical ticks to record
    """
    if ticks < 1:
        raise ValueError("ticks must be at least 1")
    if tick < ledger.total_ticks:
        raise ValueError(f"tick {tick} already recorded")
    return CommLedger(
        communicating_x=ledger.communicating_x + (ticks if fired_x else 0),
        communicating_y=ledger.communicating_y + (ticks if fired_y else 0),
        total_ticks=ledger.total_ticks + ticks,
    )
