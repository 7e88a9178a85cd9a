"""Per-agent kernels: pheromone-biased movement and pick/drop voting.

Movement weight for a candidate cell with pheromone density sigma:

    W(sigma) = (1 + sigma / (1 + delta * sigma)) ** beta

multiplied by a turn-magnitude weight w(turn) that favors going straight.
Pick/drop decisions combine two response thresholds: chi(n) driven by the
number of items in the 3x3 region, and a similarity response driven by the
normalized feature distance d between the focal item and each neighbor
item. Each neighbor item casts one Bernoulli vote; a majority triggers the
action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .habitat import DIRECTIONS, EMPTY, Habitat
from .rng import SplitMix64

# Turn weights for turn magnitudes {0, 45, 90, 135, 180} degrees: a standard
# forward-biased table for 8-direction lattice walkers. Configurable knob.
DEFAULT_DIR_WEIGHTS = (1.0, 0.5, 0.25, 1.0 / 12.0, 0.05)


@dataclass
class AntParams:
    """Movement and pick/drop parameters; defaults are the reference setup."""

    beta: float = 3.5            # osmotropotactic sensitivity
    delta: float = 0.2           # inverse sensory capacity
    eta: float = 0.07            # constant per-step pheromone deposit
    K: float = 0.015             # evaporation rate per sweep
    a: float = 400.0             # item-count divisor in the deposit rule
    k1: float = 0.1              # drop similarity constant
    k2: float = 0.3              # pick similarity constant
    theta_items: float = 5.0     # item-count response threshold
    resp_exponent: float = 2.0   # steepness of the item-count response
    dir_weights: tuple[float, ...] = DEFAULT_DIR_WEIGHTS
    strict_vote: bool = False    # True: majority must be strict (2*sum > n)

    def __post_init__(self):
        for name in ("beta", "delta", "a", "k1", "k2", "theta_items", "resp_exponent"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"AntParams.{name} must be > 0")
        if self.eta < 0:
            raise ConfigError("AntParams.eta must be >= 0")
        if not 0.0 <= self.K < 1.0:
            raise ConfigError("AntParams.K must be in [0, 1)")
        w = tuple(float(v) for v in self.dir_weights)
        if len(w) != 5 or any(v < 0 for v in w) or max(w) != w[0] or w[0] <= 0:
            raise ConfigError("dir_weights must be 5 reals >= 0 with the maximum first")
        self.dir_weights = w


@dataclass
class AntAgent:
    """One walker: grid position, heading (direction index), carried item."""

    pos: tuple[int, int]
    heading: int = 0
    carrying: int | None = None


def pheromone_weight(sigma: float, params: AntParams) -> float:
    """W(sigma); strictly increasing, bounded by (1 + 1/delta)**beta."""
    if sigma < 0:
        raise ConfigError(f"pheromone density must be >= 0, got {sigma}")
    return (1.0 + sigma / (1.0 + params.delta * sigma)) ** params.beta


def direction_weight(turn: int, params: AntParams) -> float:
    """Weight for a turn of ``turn`` eighth-circles; folds to magnitude [0, 4]."""
    turn = turn % 8
    return params.dir_weights[min(turn, 8 - turn)]


def deposit_amount(n_items: int, params: AntParams) -> float:
    """Pheromone laid at the agent's site: eta plus n/a for n items around."""
    return params.eta + n_items / params.a


def normalized_distance(a, b, d_max: float = 1.0) -> float:
    """Root-mean-square feature distance scaled by 1/d_max, clamped to [0, 1]."""
    if len(a) != len(b):
        raise ConfigError(f"feature length mismatch: {len(a)} vs {len(b)}")
    if d_max <= 0:
        raise ConfigError("d_max must be > 0")
    acc = 0.0
    for fa, fb in zip(a, b):
        diff = float(fa) - float(fb)
        acc += diff * diff
    d = math.sqrt(acc / len(a)) / d_max
    return min(d, 1.0)


def chi(n: int, params: AntParams) -> float:
    """Item-count response n^e / (n^e + theta^e); exactly 1/2 at n = theta."""
    s = float(n) ** params.resp_exponent
    return s / (s + params.theta_items ** params.resp_exponent)


def drop_response(d: float, params: AntParams) -> float:
    """Similarity response for dropping: (k1 / (k1 + d))^2, decreasing in d."""
    t = params.k1 / (params.k1 + d)
    return t * t


def pick_response(d: float, params: AntParams) -> float:
    """Similarity response for picking: (d / (k2 + d))^2, increasing in d."""
    t = d / (params.k2 + d)
    return t * t


def pick_probability(chi_val: float, eps_val: float) -> float:
    """Per-vote pick probability P_p = (1 - chi) * eps."""
    return (1.0 - chi_val) * eps_val


def drop_probability(chi_val: float, rho_val: float) -> float:
    """Per-vote drop probability P_d = chi * rho."""
    return chi_val * rho_val


def vote_passes(votes: int, n: int, params: AntParams) -> bool:
    """Majority rule over n votes; the 'at least half' reading by default."""
    if params.strict_vote:
        return 2 * votes > n
    return 2 * votes >= n


def raw_move_weights(habitat: Habitat, agent: AntAgent, params: AntParams) -> np.ndarray:
    """Unnormalized movement weight per direction; 0 for agent-occupied cells."""
    x, y = agent.pos
    weights = np.zeros(8)
    for k, (dx, dy) in enumerate(DIRECTIONS):
        nx = (x + dx) % habitat.width
        ny = (y + dy) % habitat.height
        if habitat.agent_grid[nx, ny] != EMPTY:
            continue
        turn = abs(k - agent.heading)
        weights[k] = (pheromone_weight(float(habitat.pheromone[nx, ny]), params)
                      * params.dir_weights[min(turn, 8 - turn)])
    return weights


def transition_distribution(habitat: Habitat, agent: AntAgent,
                            params: AntParams) -> list[tuple[int, tuple[int, int], float]]:
    """Normalized move probabilities as (direction, cell, mass) entries.

    Empty when every neighbor is agent-occupied or all weights are zero.
    """
    weights = raw_move_weights(habitat, agent, params)
    total = float(weights.sum())
    if total <= 0.0:
        return []
    x, y = agent.pos
    table = []
    for k, (dx, dy) in enumerate(DIRECTIONS):
        if weights[k] > 0.0:
            cell = ((x + dx) % habitat.width, (y + dy) % habitat.height)
            table.append((k, cell, float(weights[k]) / total))
    return table


def step_move(agent: AntAgent, habitat: Habitat, params: AntParams,
              rng: SplitMix64) -> bool:
    """Sample one move; updates occupancy, position, and heading. False if stuck.

    Sampling uses the unnormalized weights (threshold = R * total) so the
    pure-Python path and the compiled engine consume identical draws.
    """
    weights = raw_move_weights(habitat, agent, params)
    total = 0.0
    for k in range(8):  # sequential sum; keeps parity with the compiled engine
        total += weights[k]
    if total <= 0.0:
        return False
    threshold = rng.random() * total
    acc = 0.0
    chosen = -1
    for k in range(8):
        if weights[k] <= 0.0:
            continue
        acc += weights[k]
        chosen = k
        if threshold < acc:
            break
    dx, dy = DIRECTIONS[chosen]
    dst = ((agent.pos[0] + dx) % habitat.width, (agent.pos[1] + dy) % habitat.height)
    habitat.move_agent(agent.pos, dst)
    agent.pos = dst
    agent.heading = chosen
    return True


def try_pick(agent: AntAgent, habitat: Habitat, features: np.ndarray,
             params: AntParams, rng: SplitMix64) -> bool:
    """Attempt to pick up the item under an unladen agent.

    One vote per neighbor item; picks when votes reach a majority of the
    neighbor count n, or unconditionally when n = 0.
    """
    x, y = agent.pos
    focal = int(habitat.item_grid[x, y])
    if agent.carrying is not None:
        raise ConfigError("try_pick requires an unladen agent")
    if focal == EMPTY:
        raise ConfigError("try_pick requires an item under the agent")
    n = habitat.count_items_around(agent.pos)
    chi_val = chi(n, params)
    votes = 0
    for dx, dy in DIRECTIONS:
        other = int(habitat.item_grid[(x + dx) % habitat.width, (y + dy) % habitat.height])
        if other == EMPTY:
            continue
        d = normalized_distance(features[focal], features[other])
        p_p = pick_probability(chi_val, pick_response(d, params))
        if rng.random() <= p_p:
            votes += 1
    if n == 0 or vote_passes(votes, n, params):
        habitat.remove_item(agent.pos)
        agent.carrying = focal
        return True
    return False


def try_drop(agent: AntAgent, habitat: Habitat, features: np.ndarray,
             params: AntParams, rng: SplitMix64) -> bool:
    """Attempt to drop the carried item onto the empty cell under the agent.

    Votes as in try_pick but with the drop response; never drops with no
    neighbors (an isolated drop would be undone by the n = 0 pickup rule).
    """
    x, y = agent.pos
    if agent.carrying is None:
        raise ConfigError("try_drop requires a laden agent")
    if habitat.item_grid[x, y] != EMPTY:
        raise ConfigError("try_drop requires an empty cell under the agent")
    carried = agent.carrying
    n = habitat.count_items_around(agent.pos)
    chi_val = chi(n, params)
    votes = 0
    for dx, dy in DIRECTIONS:
        other = int(habitat.item_grid[(x + dx) % habitat.width, (y + dy) % habitat.height])
        if other == EMPTY:
            continue
        d = normalized_distance(features[carried], features[other])
        p_d = drop_probability(chi_val, drop_response(d, params))
        if rng.random() <= p_d:
            votes += 1
    if n >= 1 and vote_passes(votes, n, params):
        habitat.place_item(carried, agent.pos)
        agent.carrying = None
        return True
    return False
