"""Tap selection: local optimum, ideal-tap pruning, window pairs and the pruned global search.

Node N is pinned to tap 1 everywhere. Every search breaks cost ties toward the
lexicographically smallest index sequence, i.e. toward fewer delay buffers.
"""

from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import TYPE_CHECKING

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .costs import PairSet, pair_mean, pair_sum
from .delay import DelayProfile, TapAssignment
from .errors import SearchLimitExceeded
from .settings import Settings

if TYPE_CHECKING:
    from .region import RegionModel, TapLine, WindowSpec

logger = logging.getLogger(__name__)

STRATEGIES = ("auto", "dp", "mincut", "bnb")


@dataclass(frozen=True)
class PrunedCandidates:
    ideal: tuple[int, ...]
    candidates: tuple[tuple[int, ...], ...]
    clamped: tuple[bool, ...]

    def at(self, node: int) -> tuple[int, ...]:
        return self.candidates[node - 1]

    @property
    def space_size(self) -> int:
        return prod(len(c) for c in self.candidates)

    @property
    def clamped_nodes(self) -> tuple[int, ...]:
        return tuple(node for node, flag in enumerate(self.clamped, start=1) if flag)


@dataclass(frozen=True)
class SearchResult:
    assignment: TapAssignment
    cost: Fraction
    pair_sum: int
    method: str
    strategy: str
    examined: int
    full_space: int
    pruned_space: int
    frontier: int | None = None

    def to_document(self) -> dict[str, object]:
        from .units import rational_document

        return {
            "assignment": list(self.assignment.indices),
            "cost": rational_document(self.cost),
            "pair_sum_fs": self.pair_sum,
            "method": self.method,
            "strategy": self.strategy,
            "examined": self.examined,
            "full_space": self.full_space,
            "pruned_space": self.pruned_space,
            "frontier": self.frontier,
        }


def local_optimize(profile: DelayProfile, taps: TapLine) -> TapAssignment:
    """Per node, the tap whose arrival lands closest to T_LCT of node N at tap 1."""
    line = taps.for_corner(profile.corner)
    reference = profile.reference_natural + line[0]
    indices = []
    for natural in profile.natural[:-1]:
        target = reference - natural
        k = bisect_left(line, target)
        if k == len(line):
            indices.append(len(line))
        elif k == 0 or line[k] - target < target - line[k - 1]:
            indices.append(k + 1)
        else:
            indices.append(k)
    indices.append(1)
    return TapAssignment(tuple(indices))


def ideal_taps_and_prune(profile: DelayProfile, taps: TapLine) -> PrunedCandidates:
    line = taps.for_corner(profile.corner)
    m = len(line)
    reference = profile.reference_natural + line[0]
    ideal: list[int] = []
    candidates: list[tuple[int, ...]] = []
    clamped: list[bool] = []
    for node, natural in enumerate(profile.natural, start=1):
        target = reference - natural
        ideal.append(target)
        if node == profile.n:
            candidates.append((1,))
            clamped.append(False)
        elif target < line[0]:
            candidates.append((1,))
            clamped.append(True)
        elif target > line[-1]:
            candidates.append((m,))
            clamped.append(True)
        else:
            lower = bisect_right(line, target)
            candidates.append((m,) if lower == m else (lower, lower + 1))
            clamped.append(False)
    pruned = PrunedCandidates(tuple(ideal), tuple(candidates), tuple(clamped))
    if pruned.clamped_nodes:
        logger.warning(
            "Ideal tap delay outside the delay line for node(s) %s; candidates clamped",
            ", ".join(map(str, pruned.clamped_nodes)),
        )
    return pruned


def _window_starts(extent: int, size: int, stride: int) -> tuple[list[int], int]:
    if size >= extent:
        return [0], extent
    starts = list(range(0, extent - size + 1, stride))
    if starts[-1] != extent - size:
        starts.append(extent - size)
    return starts, size


def window_pairs(region: RegionModel, window: WindowSpec) -> PairSet:
    """Pairs of blocks that share at least one window placement.

    A window larger than the grid is clamped to the grid, giving every pair.
    """
    floorplan = region.floorplan
    col_starts, width = _window_starts(floorplan.grid_cols, window.cols, window.stride_cols)
    row_starts, height = _window_starts(floorplan.grid_rows, window.rows, window.stride_rows)
    pairs: set[tuple[int, int]] = set()
    for r0 in row_starts:
        for c0 in col_starts:
            members = sorted(
                node.node_id
                for node in region.nodes
                if node.col < c0 + width
                and node.col + node.width > c0
                and node.row < r0 + height
                and node.row + node.height > r0
            )
            pairs.update(
                (x, y) for i, x in enumerate(members) for y in members[i + 1 :]
            )
    pair_set = PairSet(n=region.n, pairs=frozenset(pairs))
    logger.debug(
        "Window %dx%d stride %dx%d: %d pair(s), N' = %d",
        window.cols,
        window.rows,
        window.stride_cols,
        window.stride_rows,
        len(pair_set),
        pair_set.max_neighbours,
    )
    return pair_set


@dataclass
class _BinaryProblem:
    """Pruned space as one binary label per two-candidate node (0 = lower tap)."""

    free: list[int]
    unary: dict[int, list[int]] = field(default_factory=dict)
    # (u, v) with u < v -> costs for labels (0,0), (0,1), (1,0), (1,1)
    pairwise: dict[tuple[int, int], tuple[int, int, int, int]] = field(default_factory=dict)
    constant: int = 0

    def adjacency(self) -> dict[int, set[int]]:
        adjacent: dict[int, set[int]] = {x: set() for x in self.free}
        for u, v in self.pairwise:
            adjacent[u].add(v)
            adjacent[v].add(u)
        return adjacent

    def theta(self, u: int, bu: int, v: int, bv: int) -> int:
        if u < v:
            return self.pairwise[(u, v)][2 * bu + bv]
        return self.pairwise[(v, u)][2 * bv + bu]

    def energy(self, labels: dict[int, int]) -> int:
        total = self.constant + sum(self.unary[x][labels[x]] for x in self.free)
        total += sum(table[2 * labels[u] + labels[v]] for (u, v), table in self.pairwise.items())
        return total


def _binary_problem(
    profile: DelayProfile, line: Sequence[int], candidates: PrunedCandidates, pairs: PairSet | None
) -> _BinaryProblem:
    levels = {
        node: tuple(profile.at(node) + line[i - 1] for i in candidates.at(node))
        for node in range(1, profile.n + 1)
    }
    problem = _BinaryProblem(free=[node for node, options in levels.items() if len(options) == 2])
    problem.unary = {node: [0, 0] for node in problem.free}
    free = set(problem.free)
    pair_list = (
        ((x, y) for x in range(1, profile.n + 1) for y in range(x + 1, profile.n + 1))
        if pairs is None
        else pairs.sorted()
    )
    for x, y in pair_list:
        if x in free and y in free:
            problem.pairwise[(x, y)] = tuple(
                abs(levels[x][a] - levels[y][b]) for a in (0, 1) for b in (0, 1)
            )
        elif x in free:
            for b in (0, 1):
                problem.unary[x][b] += abs(levels[x][b] - levels[y][0])
        elif y in free:
            for b in (0, 1):
                problem.unary[y][b] += abs(levels[y][b] - levels[x][0])
        else:
            problem.constant += abs(levels[x][0] - levels[y][0])
    return problem


def _frontier_width(order: list[int], adjacent: dict[int, set[int]]) -> int:
    """Largest set of swept nodes still waiting on an unswept neighbour."""
    position = {node: k for k, node in enumerate(order)}
    last = {node: max([position[v] for v in adjacent[node]] + [position[node]]) for node in order}
    width = 0
    for k in range(len(order)):
        width = max(width, sum(1 for node in order[:k] if last[node] >= k))
    return width


def _solve_dp(problem: _BinaryProblem, order: list[int]) -> tuple[dict[int, int], int]:
    adjacent = problem.adjacency()
    position = {node: k for k, node in enumerate(order)}
    last = {node: max([position[v] for v in adjacent[node]] + [position[node]]) for node in order}
    # Lexicographic tie-break folded into the integer objective: node ids weigh
    # as binary digits below one unit of cost, smallest id most significant.
    scale = 1 << len(order)
    weight = {node: 1 << (len(order) - 1 - rank) for rank, node in enumerate(sorted(order))}

    states: dict[tuple[int, ...], tuple[int, int]] = {(): (0, 0)}
    frontier: list[int] = []
    examined = 0
    for k, node in enumerate(order):
        linked = [i for i, other in enumerate(frontier) if other in adjacent[node]]
        extended = [*frontier, node]
        keep = [i for i, other in enumerate(extended) if last[other] > k]
        successors: dict[tuple[int, ...], tuple[int, int]] = {}
        for key, (total, bits) in states.items():
            for label in (0, 1):
                examined += 1
                cost = problem.unary[node][label] + sum(
                    problem.theta(frontier[i], key[i], node, label) for i in linked
                )
                candidate = (total + cost * scale + (weight[node] if label else 0), bits | (label << k))
                full = (*key, label)
                next_key = tuple(full[i] for i in keep)
                best = successors.get(next_key)
                if best is None or candidate[0] < best[0]:
                    successors[next_key] = candidate
        states = successors
        frontier = [extended[i] for i in keep]
    _, bits = min(states.values())
    return {node: (bits >> k) & 1 for k, node in enumerate(order)}, examined


def _solve_mincut(problem: _BinaryProblem) -> tuple[dict[int, int], int]:
    """Exact minimiser by s-t minimum cut; label 1 (upper tap) is the sink side.

    |a_x - a_y| is submodular in the ordered candidates, so every pairwise term
    becomes a non-negative arc. The smallest sink side of a minimum cut is the
    componentwise-smallest optimum.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(["s", "t", *problem.free])

    def add_capacity(u: object, v: object, amount: int) -> None:
        if graph.has_edge(u, v):
            graph[u][v]["capacity"] += amount
        else:
            graph.add_edge(u, v, capacity=amount)

    linear = {node: problem.unary[node][1] - problem.unary[node][0] for node in problem.free}
    for (u, v), (a, b, c, d) in problem.pairwise.items():
        # E = a + (c - a) x_u + (d - c) x_v + (b + c - a - d) (1 - x_u) x_v
        linear[u] += c - a
        linear[v] += d - c
        lam = b + c - a - d
        if lam < 0:
            raise AssertionError(f"pair ({u}, {v}) is not submodular")
        if lam:
            add_capacity(u, v, lam)
    for node, coefficient in linear.items():
        if coefficient > 0:
            add_capacity("s", node, coefficient)
        elif coefficient < 0:
            add_capacity(node, "t", -coefficient)

    residual = edmonds_karp(graph, "s", "t")
    reaches_sink = {"t"}
    queue = deque(["t"])
    while queue:
        head = queue.popleft()
        for tail in residual.predecessors(head):
            arc = residual[tail][head]
            if tail not in reaches_sink and arc["capacity"] - arc["flow"] > 0:
                reaches_sink.add(tail)
                queue.append(tail)
    labels = {node: 1 if node in reaches_sink else 0 for node in problem.free}
    return labels, graph.number_of_nodes()


def _solve_bnb(
    problem: _BinaryProblem, incumbent: dict[int, int], node_limit: int
) -> tuple[dict[int, int], int]:
    order = sorted(problem.free)
    adjacent = problem.adjacency()
    position = {node: k for k, node in enumerate(order)}
    # Pairwise minima among nodes at positions >= k, summed.
    tail_pairs = [0] * (len(order) + 1)
    for (u, v), table in problem.pairwise.items():
        tail_pairs[min(position[u], position[v])] += min(table)
    for k in range(len(order) - 1, -1, -1):
        tail_pairs[k] += tail_pairs[k + 1]

    best_cost = problem.energy(incumbent)
    best_seq = tuple(incumbent[node] for node in order)
    labels: dict[int, int] = {}
    explored = 0

    def remaining_bound(k: int) -> int:
        bound = tail_pairs[k]
        for node in order[k:]:
            bound += min(
                problem.unary[node][b]
                + sum(problem.theta(d, labels[d], node, b) for d in adjacent[node] if position[d] < k)
                for b in (0, 1)
            )
        return bound

    def visit(k: int, partial: int) -> None:
        nonlocal best_cost, best_seq, explored
        explored += 1
        if explored > node_limit:
            raise SearchLimitExceeded(
                f"Branch-and-bound exceeded its node limit of {node_limit}",
                [f"{len(order)} binary decision(s); raise RCT_BNB_NODE_LIMIT or use the mincut strategy"],
            )
        if k == len(order):
            seq = tuple(labels[node] for node in order)
            if (partial, seq) < (best_cost, best_seq):
                best_cost, best_seq = partial, seq
            return
        node = order[k]
        for label in (0, 1):
            labels[node] = label
            cost = partial + problem.unary[node][label] + sum(
                problem.theta(d, labels[d], node, label) for d in adjacent[node] if position[d] < k
            )
            if cost + remaining_bound(k + 1) <= best_cost:
                visit(k + 1, cost)
        del labels[node]

    visit(0, problem.constant)
    return dict(zip(order, best_seq, strict=True)), explored


def global_optimize(
    profile: DelayProfile,
    taps: TapLine,
    candidates: PrunedCandidates,
    pairs: PairSet | None = None,
    *,
    strategy: str = "auto",
    order: Sequence[int] | None = None,
    settings: Settings | None = None,
) -> SearchResult:
    """Exact minimiser of the pair-set mean over the pruned candidate space.

    ``pairs=None`` balances every pair (G_abs_mean). ``order`` is the sweep
    order for the column DP; node ids are used when it is not given.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r} (expected one of {', '.join(STRATEGIES)})")
    settings = settings or Settings()
    line = taps.for_corner(profile.corner)
    problem = _binary_problem(profile, line, candidates, pairs)

    free = set(problem.free)
    sweep = [node for node in (order or range(1, profile.n + 1)) if node in free]
    width = _frontier_width(sweep, problem.adjacency()) if sweep else 0

    if not problem.free:
        chosen, labels, examined = "trivial", {}, 1
    else:
        chosen = strategy
        if strategy == "auto":
            chosen = "dp" if width <= settings.dp_max_frontier else settings.fallback_strategy
        if chosen == "dp":
            if width > settings.dp_max_frontier:
                raise SearchLimitExceeded(
                    f"Sweep frontier of {width} node(s) exceeds RCT_DP_MAX_FRONTIER={settings.dp_max_frontier}"
                )
            labels, examined = _solve_dp(problem, sweep)
        elif chosen == "mincut":
            labels, examined = _solve_mincut(problem)
        else:
            local = local_optimize(profile, taps)
            incumbent = {
                node: candidates.at(node).index(local.indices[node - 1]) for node in problem.free
            }
            labels, examined = _solve_bnb(problem, incumbent, settings.bnb_node_limit)

    assignment = TapAssignment(
        tuple(candidates.at(node)[labels.get(node, 0)] for node in range(1, profile.n + 1))
    )
    arrival = tuple(t + line[i - 1] for t, i in zip(profile.natural, assignment.indices, strict=True))
    result = SearchResult(
        assignment=assignment,
        cost=pair_mean(arrival, pairs),
        pair_sum=pair_sum(arrival, pairs),
        method="global",
        strategy=chosen,
        examined=examined,
        full_space=len(line) ** (profile.n - 1),
        pruned_space=candidates.space_size,
        frontier=width if chosen == "dp" else None,
    )
    logger.info(
        "Global search (%s): %d free node(s), frontier %d, %d state(s) examined, pruned space %d of %d",
        chosen,
        len(problem.free),
        width,
        examined,
        result.pruned_space,
        result.full_space,
    )
    return result
