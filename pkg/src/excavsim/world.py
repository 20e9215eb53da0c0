"""Quasi-1D tunnel lattice and the deposit-driven growth rule.

Cell 0 is the dig face and the last cell is the entrance.  Growth inserts a
new cell at the dig face, so a cell's index is its distance from the face and
``l_true`` is the walking distance from the entrance to the face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

# Off-lattice zones, encoded as negative positions.
HOME = -1
DEPOSIT = -2
REST = -3

ZONE_NAMES = {HOME: "home", DEPOSIT: "deposit", REST: "rest"}
ZONE_CODES = {v: k for k, v in ZONE_NAMES.items()}


class ContractViolation(RuntimeError):
    """Internal consistency failure; the run cannot continue."""


@dataclass
class Cell:
    occupant: Optional[int] = None


@dataclass
class WorldState:
    l0: int
    deposits_per_growth: int
    growth: bool = True
    tunnel_cells: list[Cell] = field(default_factory=list)
    deposit_count: int = 0
    # Off-lattice zones hold any number of robots and never exclude.
    home_capacity: int = 0

    @property
    def l_true(self) -> int:
        return len(self.tunnel_cells)

    @property
    def entrance(self) -> int:
        return len(self.tunnel_cells) - 1

    def occupant(self, pos: int) -> Optional[int]:
        return self.tunnel_cells[pos].occupant

    def check_exclusive(self, positions: dict[int, int]) -> None:
        """Cross-check cell occupants against robot positions."""
        seen = {}
        for rid, pos in positions.items():
            if pos >= 0:
                if pos in seen:
                    raise ContractViolation(f"robots {seen[pos]} and {rid} share cell {pos}")
                seen[pos] = rid
        for i, cell in enumerate(self.tunnel_cells):
            if cell.occupant is not None and seen.get(i) != cell.occupant:
                raise ContractViolation(f"cell {i} names robot {cell.occupant} which is not there")
            if cell.occupant is None and i in seen:
                raise ContractViolation(f"robot {seen[i]} at cell {i} is not registered")


def new_world(config) -> WorldState:
    w = config.world
    world = WorldState(
        l0=w.l0,
        deposits_per_growth=w.deposits_per_growth,
        growth=w.growth,
        tunnel_cells=[Cell() for _ in range(w.l0)],
    )
    world.home_capacity = config.robots
    return world


def expected_length(world: WorldState) -> int:
    if not world.growth:
        return world.l0
    return world.l0 + world.deposit_count // world.deposits_per_growth


def record_deposit(world: WorldState, robot) -> WorldState:
    """Count one delivered load and extend the tunnel on a growth threshold.

    On extension a new empty cell is inserted at the dig face; callers must
    shift every in-tunnel robot position by one.
    """
    if not robot.carrying:
        raise ContractViolation(f"robot {robot.id} deposited without carrying pellets")
    world.deposit_count += 1
    if world.growth and world.deposit_count % world.deposits_per_growth == 0:
        world.tunnel_cells.insert(0, Cell())
    return world
