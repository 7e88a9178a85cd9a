"""Toroidal grid environment: item slots, agent occupancy slots, pheromone field.

Coordinates are (x, y) with x in [0, width) and y in [0, height); both axes
wrap. Each cell holds at most one item and at most one agent (an agent may
stand on a cell that holds an item). Pheromone is a non-negative scalar per
cell, raised by deposits and decayed multiplicatively by evaporation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvariantError

# The 8 compass directions in fixed clockwise order starting north.
# y grows southward, so N is (0, -1). Index into this table is a "heading".
DIRECTIONS: tuple[tuple[int, int], ...] = (
    (0, -1),   # N
    (1, -1),   # NE
    (1, 0),    # E
    (1, 1),    # SE
    (0, 1),    # S
    (-1, 1),   # SW
    (-1, 0),   # W
    (-1, -1),  # NW
)

EMPTY = -1

GRID_CSV_HEADER = "x,y,item_id,class_label"


@dataclass
class Cell:
    """Read-only view of one grid cell."""

    item: int | None
    agent: int | None


class Habitat:
    """2D toroidal grid with item, agent, and pheromone layers.

    Internally the item and agent layers are int32 arrays holding EMPTY (-1)
    or an identifier; identifiers index into registries owned by the colony.
    """

    def __init__(self, width: int, height: int):
        if width < 3 or height < 3:
            raise ConfigError(f"grid must be at least 3x3, got {width}x{height}")
        self.width = int(width)
        self.height = int(height)
        self.item_grid = np.full((self.width, self.height), EMPTY, dtype=np.int32)
        self.agent_grid = np.full((self.width, self.height), EMPTY, dtype=np.int32)
        self.pheromone = np.zeros((self.width, self.height), dtype=np.float64)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def wrap(self, pos: tuple[int, int]) -> tuple[int, int]:
        """Map any signed coordinate pair onto the torus."""
        return pos[0] % self.width, pos[1] % self.height

    def neighborhood8(self, pos: tuple[int, int]) -> list[tuple[int, int]]:
        """The 8 wrapped cells around pos, center excluded, N clockwise to NW."""
        x, y = pos
        return [((x + dx) % self.width, (y + dy) % self.height) for dx, dy in DIRECTIONS]

    def count_items_around(self, pos: tuple[int, int]) -> int:
        """Occupied item slots among the 8 neighbors of pos."""
        n = 0
        for nx, ny in self.neighborhood8(pos):
            if self.item_grid[nx, ny] != EMPTY:
                n += 1
        return n

    def deposit(self, pos: tuple[int, int], amount: float) -> None:
        if amount < 0:
            raise ConfigError(f"deposit amount must be >= 0, got {amount}")
        self.pheromone[pos[0], pos[1]] += amount

    def evaporate(self, rate: float) -> None:
        """Multiplicative decay: every cell keeps a (1 - rate) fraction."""
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"evaporation rate must be in [0, 1), got {rate}")
        self.pheromone *= 1.0 - rate

    def cell(self, x: int, y: int) -> Cell:
        item = int(self.item_grid[x, y])
        agent = int(self.agent_grid[x, y])
        return Cell(item=None if item == EMPTY else item,
                    agent=None if agent == EMPTY else agent)

    # -- occupancy mutations (single item / single agent per cell) ----------

    def place_item(self, item_id: int, pos: tuple[int, int]) -> None:
        if self.item_grid[pos[0], pos[1]] != EMPTY:
            raise InvariantError(f"cell {pos} already holds an item")
        self.item_grid[pos[0], pos[1]] = item_id

    def remove_item(self, pos: tuple[int, int]) -> int:
        item = int(self.item_grid[pos[0], pos[1]])
        if item == EMPTY:
            raise InvariantError(f"cell {pos} holds no item")
        self.item_grid[pos[0], pos[1]] = EMPTY
        return item

    def place_agent(self, agent_id: int, pos: tuple[int, int]) -> None:
        if self.agent_grid[pos[0], pos[1]] != EMPTY:
            raise InvariantError(f"cell {pos} already holds an agent")
        self.agent_grid[pos[0], pos[1]] = agent_id

    def move_agent(self, src: tuple[int, int], dst: tuple[int, int]) -> None:
        agent = int(self.agent_grid[src[0], src[1]])
        if agent == EMPTY:
            raise InvariantError(f"cell {src} holds no agent")
        if self.agent_grid[dst[0], dst[1]] != EMPTY:
            raise InvariantError(f"cell {dst} already holds an agent")
        self.agent_grid[src[0], src[1]] = EMPTY
        self.agent_grid[dst[0], dst[1]] = agent

    def items_on_grid(self) -> int:
        return int(np.count_nonzero(self.item_grid != EMPTY))

    def item_positions(self) -> list[tuple[int, int, int]]:
        """(x, y, item_id) triples for every occupied cell, row-major order."""
        out = []
        for x in range(self.width):
            for y in range(self.height):
                item = int(self.item_grid[x, y])
                if item != EMPTY:
                    out.append((x, y, item))
        return out


def grid_rows(habitat: Habitat, labels=None) -> list[tuple[int, int, int, int | None]]:
    """One (x, y, item_id, class_label) row per occupied cell.

    ``labels`` maps item id -> class label; None entries (or labels=None)
    yield a missing label.
    """
    rows = []
    for x, y, item in habitat.item_positions():
        label = None if labels is None else labels[item]
        rows.append((x, y, item, label))
    return rows


def write_grid_csv(path, habitat: Habitat, labels=None) -> None:
    """Snapshot export: CSV grid, one row per occupied cell."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(GRID_CSV_HEADER + "\n")
        for x, y, item, label in grid_rows(habitat, labels):
            fh.write(f"{x},{y},{item},{'' if label is None else label}\n")


def write_pheromone_pgm(path, pheromone: np.ndarray) -> None:
    """Grayscale PGM (P2) of the pheromone field, linearly scaled to 0-255."""
    peak = float(pheromone.max())
    if peak > 0:
        scaled = np.rint(pheromone / peak * 255).astype(int)
    else:
        scaled = np.zeros_like(pheromone, dtype=int)
    width, height = pheromone.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{width} {height}\n255\n")
        for y in range(height):
            fh.write(" ".join(str(int(scaled[x, y])) for x in range(width)) + "\n")
