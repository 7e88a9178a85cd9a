"""Colony simulation driver and measurement.

``run`` executes the full sorting loop: random placement, per-sweep agent
updates (pick/drop, move, deposit), field-wide evaporation, and laden-agent
force-drop at the end. Measurement helpers compute block entropy of the
item distribution, extract spatial clusters, and score them against true
labels.

Two engines produce identical results for a given seed: ``compiled``
(numba, the default) and ``reference`` (pure Python on the public swarm
kernels, kept as the readable oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .errors import ConfigError, InvariantError
from .habitat import EMPTY, Habitat
from .mining import DataItem
from .rng import SplitMix64
from .swarm import AntAgent, AntParams, deposit_amount, step_move, try_drop, try_pick

CONSERVATION_INTERVAL = 10_000


@dataclass
class ColonyConfig:
    width: int
    height: int
    n_ants: int
    t_max: int
    params: AntParams = field(default_factory=AntParams)
    seed: int = 0
    snapshot_every: int | None = None
    entropy_block: int = 3

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ConfigError("grid must be at least 3x3")
        if self.n_ants < 0:
            raise ConfigError("n_ants must be >= 0")
        if self.t_max < 1:
            raise ConfigError("t_max must be >= 1")
        if self.entropy_block < 1:
            raise ConfigError("entropy_block must be >= 1")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")


@dataclass
class GridSnapshot:
    """Item grid and pheromone field captured after a given sweep."""

    step: int
    item_grid: np.ndarray
    pheromone: np.ndarray

    def rows(self, labels=None) -> list[tuple[int, int, int, int | None]]:
        out = []
        width, height = self.item_grid.shape
        for x in range(width):
            for y in range(height):
                item = int(self.item_grid[x, y])
                if item != EMPTY:
                    out.append((x, y, item, None if labels is None else labels[item]))
        return out


@dataclass
class SimulationResult:
    placements: np.ndarray            # (n_items, 2): final (x, y) per item id
    entropy_trace: list[tuple[int, float]]
    snapshots: list[GridSnapshot]
    seed: int
    habitat: Habitat                  # final grid state


@dataclass
class ClusterAssignment:
    labels: np.ndarray                # cluster id per item id, contiguous from 0
    n_clusters: int


def default_grid_side(n_items: int) -> int:
    """Side length giving roughly 4 cells per item."""
    return max(3, math.ceil(2.0 * math.sqrt(n_items)))


def default_n_ants(n_cells: int) -> int:
    """Agent count at the published density of about 0.023 agents per cell."""
    return max(1, math.ceil(0.023 * n_cells))


def entropy_checkpoints(t_max: int) -> list[int]:
    """Log-spaced sweep indices {0} + ceil(10^(k/4)) up to and including t_max."""
    steps = {0, t_max}
    k = 0
    while True:
        s = math.ceil(10 ** (k / 4))
        if s > t_max:
            break
        steps.add(s)
        k += 1
    return sorted(steps)


def _place_randomly(rng: SplitMix64, occupied: np.ndarray, width: int, height: int) -> tuple[int, int]:
    """Rejection-sample an unoccupied cell; idx decodes as (idx % w, idx // w)."""
    while True:
        idx = rng.randbelow(width * height)
        x, y = idx % width, idx // width
        if occupied[x, y] == EMPTY:
            return x, y


def _force_drop_all(habitat: Habitat, carry: list[int | None],
                    agent_pos: list[tuple[int, int]]) -> None:
    """Drop every carried item on the nearest empty cell (outward ring scan).

    Scan order is fixed: rings of growing Chebyshev radius, each traversed
    in (dy, dx) row-major order, so seeded runs stay reproducible.
    """
    width, height = habitat.width, habitat.height
    for a, item in enumerate(carry):
        if item is None:
            continue
        ax, ay = agent_pos[a]
        placed = False
        for radius in range(0, width + height):
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if max(abs(dx), abs(dy)) != radius:
                        continue
                    x, y = (ax + dx) % width, (ay + dy) % height
                    if habitat.item_grid[x, y] == EMPTY:
                        habitat.place_item(item, (x, y))
                        carry[a] = None
                        placed = True
                        break
                if placed:
                    break
            if placed:
                break
        if not placed:
            raise InvariantError("no empty cell found for terminal drop")


def spatial_entropy(habitat: Habitat, block: int) -> float:
    """Shannon entropy of item counts over block x block tiles; 0 if empty."""
    if block < 1:
        raise ConfigError("entropy block must be >= 1")
    return float(_engine.block_entropy(habitat.item_grid, block))


def run(config: ColonyConfig, items: list[DataItem], engine: str = "compiled") -> SimulationResult:
    """Execute the full sorting simulation; deterministic for a given seed."""
    if not items:
        raise ConfigError("at least one item is required")
    n_items = len(items)
    n_cells = config.width * config.height
    if n_items > n_cells:
        raise ConfigError(f"{n_items} items do not fit on {n_cells} cells")
    if config.n_ants > n_cells - n_items:
        raise ConfigError("too many agents: n_ants must be <= cells - items")
    lengths = {len(it.features) for it in items}
    if len(lengths) != 1:
        raise ConfigError("items must share one feature length")

    habitat = Habitat(config.width, config.height)
    features = np.ascontiguousarray([it.features for it in items], dtype=np.float64)
    rng = SplitMix64(config.seed)

    for i in range(n_items):
        habitat.place_item(i, _place_randomly(rng, habitat.item_grid, config.width, config.height))
    agent_pos: list[tuple[int, int]] = []
    agent_heading: list[int] = []
    for a in range(config.n_ants):
        pos = _place_randomly(rng, habitat.agent_grid, config.width, config.height)
        habitat.place_agent(a, pos)
        agent_pos.append(pos)
        agent_heading.append(rng.randbelow(8))

    checkpoints = entropy_checkpoints(config.t_max)
    snapshot_steps: list[int] = []
    if config.snapshot_every is not None:
        snapshot_steps = list(range(0, config.t_max + 1, config.snapshot_every))

    entropy_trace: list[tuple[int, float]] = [(0, spatial_entropy(habitat, config.entropy_block))]
    snapshots: list[GridSnapshot] = []
    if snapshot_steps and snapshot_steps[0] == 0:
        snapshots.append(GridSnapshot(0, habitat.item_grid.copy(), habitat.pheromone.copy()))

    carry: list[int | None]
    if engine == "compiled":
        carry, agent_pos = _run_compiled(config, habitat, features, rng, agent_pos,
                                         agent_heading, checkpoints, snapshot_steps,
                                         entropy_trace, snapshots, n_items)
    elif engine == "reference":
        carry, agent_pos = _run_reference(config, habitat, features, rng, agent_pos,
                                          agent_heading, checkpoints, snapshot_steps,
                                          entropy_trace, snapshots, n_items)
    else:
        raise ConfigError(f"unknown engine {engine!r}")

    _force_drop_all(habitat, carry, agent_pos)
    if habitat.items_on_grid() != n_items:
        raise InvariantError("final item count does not match the initial count")

    placements = np.full((n_items, 2), -1, dtype=np.int32)
    for x, y, item in habitat.item_positions():
        placements[item, 0] = x
        placements[item, 1] = y
    return SimulationResult(placements=placements, entropy_trace=entropy_trace,
                            snapshots=snapshots, seed=config.seed, habitat=habitat)


def _run_compiled(config, habitat, features, rng, agent_pos, agent_heading,
                  checkpoints, snapshot_steps, entropy_trace, snapshots, n_items):
    p = config.params
    n_ants = config.n_ants
    agent_x = np.array([pos[0] for pos in agent_pos], dtype=np.int64)
    agent_y = np.array([pos[1] for pos in agent_pos], dtype=np.int64)
    headings = np.array(agent_heading, dtype=np.int64)
    carry_arr = np.full(n_ants, EMPTY, dtype=np.int64)

    ent_steps = np.array([s for s in checkpoints if s >= 1], dtype=np.int64)
    ent_out = np.full(ent_steps.shape[0], np.nan)
    snap_steps = np.array([s for s in snapshot_steps if s >= 1], dtype=np.int64)
    snap_items = np.full((snap_steps.shape[0], config.width, config.height), EMPTY, dtype=np.int32)
    snap_pher = np.zeros((snap_steps.shape[0], config.width, config.height))

    state, err, err_step = _engine.run_sweeps(
        habitat.item_grid, habitat.agent_grid, habitat.pheromone, features,
        agent_x, agent_y, headings, carry_arr,
        p.beta, p.delta, p.eta, p.K, p.a, p.k1, p.k2,
        p.theta_items ** p.resp_exponent, p.resp_exponent,
        np.array(p.dir_weights), p.strict_vote,
        config.t_max, np.uint64(rng.state),
        ent_steps, ent_out, config.entropy_block,
        snap_steps, snap_items, snap_pher,
        CONSERVATION_INTERVAL, n_items)
    rng.state = int(state)
    if err == _engine.ERR_CONSERVATION:
        raise InvariantError(f"item conservation violated at step {err_step}")

    for step, value in zip(ent_steps, ent_out):
        entropy_trace.append((int(step), float(value)))
    for i, step in enumerate(snap_steps):
        snapshots.append(GridSnapshot(int(step), snap_items[i].copy(), snap_pher[i].copy()))
    carry = [None if c == EMPTY else int(c) for c in carry_arr]
    pos = [(int(agent_x[a]), int(agent_y[a])) for a in range(n_ants)]
    return carry, pos


def _run_reference(config, habitat, features, rng, agent_pos, agent_heading,
                   checkpoints, snapshot_steps, entropy_trace, snapshots, n_items):
    p = config.params
    agents = [AntAgent(pos=agent_pos[a], heading=agent_heading[a])
              for a in range(config.n_ants)]
    ent_pending = [s for s in checkpoints if s >= 1]
    snap_pending = [s for s in snapshot_steps if s >= 1]

    for t in range(1, config.t_max + 1):
        for agent in agents:
            x, y = agent.pos
            if agent.carrying is None and habitat.item_grid[x, y] != EMPTY:
                try_pick(agent, habitat, features, p, rng)
            elif agent.carrying is not None and habitat.item_grid[x, y] == EMPTY:
                try_drop(agent, habitat, features, p, rng)
            step_move(agent, habitat, p, rng)
            habitat.deposit(agent.pos, deposit_amount(habitat.count_items_around(agent.pos), p))
        habitat.evaporate(p.K)

        if ent_pending and t == ent_pending[0]:
            entropy_trace.append((t, spatial_entropy(habitat, config.entropy_block)))
            ent_pending.pop(0)
        if snap_pending and t == snap_pending[0]:
            snapshots.append(GridSnapshot(t, habitat.item_grid.copy(), habitat.pheromone.copy()))
            snap_pending.pop(0)
        if CONSERVATION_INTERVAL > 0 and t % CONSERVATION_INTERVAL == 0:
            carried = sum(1 for agent in agents if agent.carrying is not None)
            if habitat.items_on_grid() + carried != n_items:
                raise InvariantError(f"item conservation violated at step {t}")

    carry = [agent.carrying for agent in agents]
    pos = [agent.pos for agent in agents]
    return carry, pos


def snapshot(habitat: Habitat, step: int) -> GridSnapshot:
    """Capture the current grid state tagged with a sweep index."""
    return GridSnapshot(step, habitat.item_grid.copy(), habitat.pheromone.copy())


def extract_clusters(habitat: Habitat, link_radius: int = 1) -> ClusterAssignment:
    """Connected components of item cells under toroidal Chebyshev adjacency.

    Component ids are assigned by descending size, ties broken by the
    smallest member coordinate (x, y).
    """
    if link_radius < 1:
        raise ConfigError("link_radius must be >= 1")
    positions = habitat.item_positions()
    if not positions:
        raise ConfigError("no items on grid")
    occupied = {(x, y): item for x, y, item in positions}
    width, height = habitat.width, habitat.height

    components: list[list[tuple[int, int]]] = []
    seen: set[tuple[int, int]] = set()
    for start in sorted(occupied):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        member_cells = []
        while queue:
            cx, cy = queue.pop()
            member_cells.append((cx, cy))
            for dx in range(-link_radius, link_radius + 1):
                for dy in range(-link_radius, link_radius + 1):
                    if dx == 0 and dy == 0:
                        continue
                    cell = ((cx + dx) % width, (cy + dy) % height)
                    if cell in occupied and cell not in seen:
                        seen.add(cell)
                        queue.append(cell)
        components.append(member_cells)

    components.sort(key=lambda cells: (-len(cells), min(cells)))
    labels = np.full(max(occupied.values()) + 1, -1, dtype=np.int64)
    for cid, cells in enumerate(components):
        for cell in cells:
            labels[occupied[cell]] = cid
    return ClusterAssignment(labels=labels, n_clusters=len(components))


def purity(assignment: ClusterAssignment, items: list[DataItem]) -> float:
    """Size-weighted majority-class fraction over clusters, in [0, 1]."""
    if any(it.true_label is None for it in items):
        raise ConfigError("purity requires a true label on every item")
    majority_total = 0
    for cid in range(assignment.n_clusters):
        counts: dict[int, int] = {}
        for item_id, label in enumerate(assignment.labels):
            if label == cid:
                cls = items[item_id].true_label
                counts[cls] = counts.get(cls, 0) + 1
        if counts:
            majority_total += max(counts.values())
    return majority_total / len(items)
