"""Compiled inner loop of the colony simulation.

This module re-expresses the per-agent kernels from ``swarm`` as numba
kernels over plain arrays so that million-sweep runs finish in seconds.
The random stream is the same splitmix64 as ``rng.SplitMix64`` and every
floating-point expression mirrors the pure-Python kernels term for term;
``tests/test_engine_equivalence.py`` pins the two paths to each other.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EMPTY = -1

# Same direction table as habitat.DIRECTIONS (N clockwise to NW).
DX = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
DY = np.array([-1, -1, 0, 1, 1, 1, 0, -1], dtype=np.int64)

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0 ** -53

ERR_OK = 0
ERR_CONSERVATION = 1


@njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rand(state):
    state, u = _next_u64(state)
    return state, np.float64(u >> np.uint64(11)) * _INV53


@njit(cache=True, inline="always")
def _pheromone_weight(sigma, beta, delta):
    return (1.0 + sigma / (1.0 + delta * sigma)) ** beta


@njit(cache=True, inline="always")
def _distance(features, i, j):
    acc = 0.0
    n_features = features.shape[1]
    for f in range(n_features):
        diff = features[i, f] - features[j, f]
        acc += diff * diff
    d = math.sqrt(acc / n_features)
    return min(d, 1.0)


@njit(cache=True, inline="always")
def _count_items_around(item_grid, x, y, width, height):
    n = 0
    for k in range(8):
        if item_grid[(x + DX[k]) % width, (y + DY[k]) % height] != EMPTY:
            n += 1
    return n


@njit(cache=True)
def block_entropy(item_grid, block):
    """Shannon entropy of item counts over block x block tiles (edges truncated)."""
    width, height = item_grid.shape
    tiles_x = (width + block - 1) // block
    tiles_y = (height + block - 1) // block
    counts = np.zeros((tiles_x, tiles_y), dtype=np.int64)
    total = 0
    for x in range(width):
        for y in range(height):
            if item_grid[x, y] != EMPTY:
                counts[x // block, y // block] += 1
                total += 1
    if total == 0:
        return 0.0
    entropy = 0.0
    for i in range(tiles_x):
        for j in range(tiles_y):
            if counts[i, j] > 0:
                p = counts[i, j] / total
                entropy -= p * math.log(p)
    return entropy


@njit(cache=True)
def run_sweeps(item_grid, agent_grid, pheromone, features,
               agent_x, agent_y, agent_heading, agent_carry,
               beta, delta, eta, evap, a_div, k1, k2,
               theta_pow, resp_exp, dir_weights, strict_vote,
               t_max, state,
               entropy_steps, entropy_out, entropy_block,
               snapshot_steps, snapshot_items, snapshot_pher,
               conservation_interval, n_items):
    """Run sweeps t = 1..t_max in place; returns (state, err, err_step).

    Per sweep, each agent in index order: pick/drop attempt with one vote
    draw per neighbor item, then a transition-sampled move, then a deposit
    of eta + n/a at its (new) site; evaporation closes the sweep.
    """
    width, height = item_grid.shape
    n_ants = agent_x.shape[0]
    w8 = np.zeros(8)  # reused per agent-step; zeroed in place
    ent_idx = 0
    while ent_idx < entropy_steps.shape[0] and entropy_steps[ent_idx] < 1:
        ent_idx += 1
    snap_idx = 0
    while snap_idx < snapshot_steps.shape[0] and snapshot_steps[snap_idx] < 1:
        snap_idx += 1

    for t in range(1, t_max + 1):
        for a in range(n_ants):
            x = agent_x[a]
            y = agent_y[a]

            if agent_carry[a] == EMPTY and item_grid[x, y] != EMPTY:
                # pick attempt
                focal = item_grid[x, y]
                n = _count_items_around(item_grid, x, y, width, height)
                s = np.float64(n) ** resp_exp
                chi_val = s / (s + theta_pow)
                votes = 0
                for k in range(8):
                    other = item_grid[(x + DX[k]) % width, (y + DY[k]) % height]
                    if other == EMPTY:
                        continue
                    d = _distance(features, focal, other)
                    resp = d / (k2 + d)
                    p_vote = (1.0 - chi_val) * (resp * resp)
                    state, r = _rand(state)
                    if r <= p_vote:
                        votes += 1
                if n == 0 or (2 * votes > n if strict_vote else 2 * votes >= n):
                    item_grid[x, y] = EMPTY
                    agent_carry[a] = focal
            elif agent_carry[a] != EMPTY and item_grid[x, y] == EMPTY:
                # drop attempt
                carried = agent_carry[a]
                n = _count_items_around(item_grid, x, y, width, height)
                s = np.float64(n) ** resp_exp
                chi_val = s / (s + theta_pow)
                votes = 0
                for k in range(8):
                    other = item_grid[(x + DX[k]) % width, (y + DY[k]) % height]
                    if other == EMPTY:
                        continue
                    d = _distance(features, carried, other)
                    resp = k1 / (k1 + d)
                    p_vote = chi_val * (resp * resp)
                    state, r = _rand(state)
                    if r <= p_vote:
                        votes += 1
                if n >= 1 and (2 * votes > n if strict_vote else 2 * votes >= n):
                    item_grid[x, y] = carried
                    agent_carry[a] = EMPTY

            # movement: transition weights over agent-free neighbors
            total = 0.0
            heading = agent_heading[a]
            for k in range(8):
                w8[k] = 0.0
            for k in range(8):
                nx = (x + DX[k]) % width
                ny = (y + DY[k]) % height
                if agent_grid[nx, ny] != EMPTY:
                    continue
                turn = abs(k - heading)
                if turn > 4:
                    turn = 8 - turn
                w = _pheromone_weight(pheromone[nx, ny], beta, delta) * dir_weights[turn]
                w8[k] = w
                total += w
            if total > 0.0:
                state, r = _rand(state)
                threshold = r * total
                acc = 0.0
                chosen = -1
                for k in range(8):
                    if w8[k] <= 0.0:
                        continue
                    acc += w8[k]
                    chosen = k
                    if threshold < acc:
                        break
                nx = (x + DX[chosen]) % width
                ny = (y + DY[chosen]) % height
                agent_grid[x, y] = EMPTY
                agent_grid[nx, ny] = a
                agent_x[a] = nx
                agent_y[a] = ny
                agent_heading[a] = chosen
                x = nx
                y = ny

            # deposit at the (possibly new) site
            n_after = _count_items_around(item_grid, x, y, width, height)
            pheromone[x, y] += eta + np.float64(n_after) / a_div

        # evaporation closes the sweep
        decay = 1.0 - evap
        for gx in range(width):
            for gy in range(height):
                pheromone[gx, gy] *= decay

        if ent_idx < entropy_steps.shape[0] and t == entropy_steps[ent_idx]:
            entropy_out[ent_idx] = block_entropy(item_grid, entropy_block)
            ent_idx += 1
        if snap_idx < snapshot_steps.shape[0] and t == snapshot_steps[snap_idx]:
            for gx in range(width):
                for gy in range(height):
                    snapshot_items[snap_idx, gx, gy] = item_grid[gx, gy]
                    snapshot_pher[snap_idx, gx, gy] = pheromone[gx, gy]
            snap_idx += 1
        if conservation_interval > 0 and t % conservation_interval == 0:
            on_grid = 0
            for gx in range(width):
                for gy in range(height):
                    if item_grid[gx, gy] != EMPTY:
                        on_grid += 1
            carried = 0
            for a in range(n_ants):
                if agent_carry[a] != EMPTY:
                    carried += 1
            if on_grid + carried != n_items:
                return state, ERR_CONSERVATION, t

    return state, ERR_OK, 0
