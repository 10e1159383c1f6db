"""Constructions of equivariant processes on the d-regular tree and the
machinery to measure the joint law of two vertices at distance k.

Local rules are functions of *canonicalized* labeled rooted balls, which
makes them invariant under root-preserving automorphisms by construction.
Measurements come from exact enumeration of the product measure where
that is affordable, and from seeded Monte Carlo otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    LocalAlgorithmError,
    TruncationError,
)
from .information import (
    DEFAULT_BOOTSTRAP_RESAMPLES,
    JointDistribution,
    MeasuredQuantity,
    UndefinedQuantityError,
    _bootstrap_stderr,
    _plugin_entropy,
    joint_from_counts,
    symmetric_binary_joint,
)
from .tree import (
    BallRegion,
    ball_size,
    dist,
    listing_ratio,
    origin,
    region_from_balls,
    vertex_at_distance,
)

DEFAULT_ENUM_BUDGET = 2**24
DEFAULT_REGION_VERTEX_BUDGET = 60_000
DEFAULT_ROUND_CAP = 10_000
MC_CHUNK = 10_000


# ---------------------------------------------------------------------------
# Block-factor rules on canonicalized rooted balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockFactorRule:
    """A radius-R local rule applied to canonical forms of labeled balls.

    ``fn`` receives the canonical code of the rooted labeled ball: a pair
    ``(root_label, sorted_child_codes)`` built recursively, so any two
    label patterns related by a root-preserving automorphism give the
    same code and therefore the same output.
    """

    name: str
    radius: int
    input_values: tuple
    input_probs: tuple[float, ...]
    output_values: tuple
    fn: Callable

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        if len(self.input_values) != len(self.input_probs):
            raise ValueError("input values and probabilities differ in length")
        p = np.asarray(self.input_probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("input probabilities must be a distribution")
        if len(self.output_values) < 1:
            raise ValueError("output alphabet must be nonempty")


def canonical_ball_code(labels, root: int, children: Sequence[tuple[int, ...]]):
    """Canonical form of a labeled rooted ball: child subtrees sorted by code."""
    kids = children[root]
    if not kids:
        return (labels[root], ())
    return (
        labels[root],
        tuple(sorted(canonical_ball_code(labels, c, children) for c in kids)),
    )


def _code_label_sum(code) -> int:
    label, kids = code
    return label + sum(_code_label_sum(c) for c in kids)


def _code_size(code) -> int:
    label, kids = code
    return 1 + sum(_code_size(c) for c in kids)


def identity_rule(d: int) -> BlockFactorRule:
    """Output the root's own label; distinct vertices stay independent."""
    return BlockFactorRule(
        name="identity",
        radius=0,
        input_values=(0, 1),
        input_probs=(0.5, 0.5),
        output_values=(0, 1),
        fn=lambda code: code[0],
    )


def majority_rule(d: int) -> BlockFactorRule:
    """Majority of the d+1 binary labels in the radius-1 ball, ties -> root."""

    def fn(code):
        ones = _code_label_sum(code)
        total = _code_size(code)
        if 2 * ones > total:
            return 1
        if 2 * ones < total:
            return 0
        return code[0]

    return BlockFactorRule(
        name="majority",
        radius=1,
        input_values=(0, 1),
        input_probs=(0.5, 0.5),
        output_values=(0, 1),
        fn=fn,
    )


def parity_rule(d: int) -> BlockFactorRule:
    """Parity of all binary labels in the radius-1 ball."""
    return BlockFactorRule(
        name="parity",
        radius=1,
        input_values=(0, 1),
        input_probs=(0.5, 0.5),
        output_values=(0, 1),
        fn=lambda code: _code_label_sum(code) % 2,
    )


RULES: dict[str, Callable[[int], BlockFactorRule]] = {
    "identity": identity_rule,
    "majority": majority_rule,
    "parity": parity_rule,
}


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessMeasurement:
    """Joint law of (X_u, X_v) at distance k plus derived information
    quantities.  The joint is transpose-symmetric (the two vertices can be
    swapped by an automorphism): exactly for enumeration, within noise for
    Monte Carlo.  ``joint`` is None when the state space is too large to
    materialize and only derived quantities are reported."""

    d: int
    k: int
    method: str
    joint: Optional[JointDistribution]
    entropy_v: MeasuredQuantity
    mi: MeasuredQuantity
    nmi: MeasuredQuantity
    corr: Optional[MeasuredQuantity]
    samples: Optional[int] = None
    seed: Optional[int] = None
    extra: tuple[tuple[str, float], ...] = ()

    def to_row(self) -> dict:
        row = {
            "d": self.d,
            "k": self.k,
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
            "H": self.entropy_v.value,
            "H_stderr": self.entropy_v.stderr,
            "I": self.mi.value,
            "I_stderr": self.mi.stderr,
            "nmi": self.nmi.value,
            "nmi_stderr": self.nmi.stderr,
            "corr": None if self.corr is None else self.corr.value,
            "corr_stderr": None if self.corr is None else self.corr.stderr,
        }
        row.update(self.extra)
        return row

    def to_json(self) -> str:
        payload = dict(self.to_row())
        if self.joint is not None:
            payload["joint"] = [list(r) for r in self.joint.matrix]
            payload["provenance"] = self.joint.provenance.to_json_obj()
        payload["schema"] = 1
        return json.dumps(payload, sort_keys=True)


def exchangeability_gap(pm: ProcessMeasurement) -> Optional[float]:
    if pm.joint is None:
        return None
    m = pm.joint.as_array
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(abs(m - m.T).max())


def measurement_from_joint(
    d: int,
    k: int,
    J: JointDistribution,
    x_values: Sequence[float],
    y_values: Sequence[float],
    method: str,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    extra: tuple[tuple[str, float], ...] = (),
) -> ProcessMeasurement:
    """Derive H, I, I/H and the value correlation (with bootstrap stderr
    for empirical joints) from a joint law."""

    def h_stat(m: np.ndarray) -> float:
        return _plugin_entropy(m.sum(axis=0))

    def mi_stat(m: np.ndarray) -> float:
        return (
            _plugin_entropy(m.sum(axis=1))
            + _plugin_entropy(m.sum(axis=0))
            - _plugin_entropy(m.ravel())
        )

    def nmi_stat(m: np.ndarray) -> float:
        h = h_stat(m)
        if h == 0.0:
            raise UndefinedQuantityError("zero-entropy marginal")
        return mi_stat(m) / h

    arr = J.as_array
    quantities = {}
    for key, stat in (("H", h_stat), ("I", mi_stat), ("nmi", nmi_stat)):
        quantities[key] = MeasuredQuantity(stat(arr), _bootstrap_stderr(J, stat), "plug-in")

    fx = np.asarray(x_values, dtype=float)
    gy = np.asarray(y_values, dtype=float)

    def corr_stat(m: np.ndarray) -> float:
        px = m.sum(axis=1)
        py = m.sum(axis=0)
        ef = float(px @ fx)
        eg = float(py @ gy)
        var_f = float(px @ (fx - ef) ** 2)
        var_g = float(py @ (gy - eg) ** 2)
        if var_f <= 0 or var_g <= 0:
            raise UndefinedQuantityError("zero variance")
        return float((fx - ef) @ m @ (gy - eg)) / math.sqrt(var_f * var_g)

    try:
        corr = MeasuredQuantity(corr_stat(arr), _bootstrap_stderr(J, corr_stat), "plug-in")
    except UndefinedQuantityError:
        corr = None

    return ProcessMeasurement(
        d=d,
        k=k,
        method=method,
        joint=J,
        entropy_v=quantities["H"],
        mi=quantities["I"],
        nmi=quantities["nmi"],
        corr=corr,
        samples=samples,
        seed=seed,
        extra=tuple(extra),
    )


@dataclass(frozen=True)
class _RegionSetup:
    region: BallRegion
    children_u: tuple[tuple[int, ...], ...]
    children_v: tuple[tuple[int, ...], ...]
    root_u: int
    root_v: int


def _rooted_children(
    region: BallRegion, root: int, radius: int, neighbors: Sequence[tuple[int, ...]]
) -> tuple[tuple[int, ...], ...]:
    children: list[tuple[int, ...]] = [() for _ in region.vertices]
    depth = {root: 0}
    frontier = [root]
    for level in range(radius):
        nxt = []
        for x in frontier:
            kids = tuple(
                nb for nb in neighbors[x] if nb not in depth
            )
            children[x] = kids
            for nb in kids:
                depth[nb] = level + 1
                nxt.append(nb)
        frontier = nxt
    return tuple(children)


def _two_ball_region(d: int, radius: int, k: int, budget_vertices: int) -> _RegionSetup:
    u = origin(d)
    v = vertex_at_distance(u, k)
    region = region_from_balls([(u, radius), (v, radius)], budget=budget_vertices)
    neighbors: list[list[int]] = [[] for _ in region.vertices]
    for a, b in region.adjacency:
        neighbors[a].append(b)
        neighbors[b].append(a)
    neighbors_t = tuple(tuple(sorted(ns)) for ns in neighbors)
    root_u = region.index_of(u)
    root_v = region.index_of(v)
    return _RegionSetup(
        region=region,
        children_u=_rooted_children(region, root_u, radius, neighbors_t),
        children_v=_rooted_children(region, root_v, radius, neighbors_t),
        root_u=root_u,
        root_v=root_v,
    )


def exact_joint(
    rule: BlockFactorRule,
    d: int,
    k: int,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> ProcessMeasurement:
    """Exact joint law of (X_u, X_v) by summing the product measure over
    all label configurations on the union of the two radius-R balls."""
    if k < 0:
        raise ValueError("k must be >= 0")
    setup = _two_ball_region(d, rule.radius, k, DEFAULT_REGION_VERTEX_BUDGET)
    n_vertices = len(setup.region.vertices)
    n_values = len(rule.input_values)
    total = n_values**n_vertices
    if total > budget:
        raise BudgetExceededError(
            f"{total} label configurations exceed the budget of {budget}; "
            "use mc_joint for a sampled estimate"
        )
    out_index = {val: i for i, val in enumerate(rule.output_values)}
    m = len(rule.output_values)
    joint = np.zeros((m, m), dtype=float)
    probs = rule.input_probs
    for assignment in iproduct(range(n_values), repeat=n_vertices):
        weight = 1.0
        for idx in assignment:
            weight *= probs[idx]
        if weight == 0.0:
            continue
        labels = [rule.input_values[i] for i in assignment]
        xu = rule.fn(canonical_ball_code(labels, setup.root_u, setup.children_u))
        xv = rule.fn(canonical_ball_code(labels, setup.root_v, setup.children_v))
        joint[out_index[xu], out_index[xv]] += weight
    total_mass = joint.sum()
    joint /= total_mass
    gap = float(abs(joint - joint.T).max())
    if gap > 1e-12:
        raise AssertionError(f"exact joint not exchangeable: transpose gap {gap}")
    J = JointDistribution.from_array(joint)
    values = _numeric_values(rule.output_values)
    return measurement_from_joint(d, k, J, values, values, "exact-enumeration")


def _numeric_values(output_values: tuple) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in output_values)
    except (TypeError, ValueError):
        return tuple(float(i) for i in range(len(output_values)))


def mc_joint(
    rule: BlockFactorRule,
    d: int,
    k: int,
    samples: int,
    seed: int,
) -> ProcessMeasurement:
    """Sampled joint law of (X_u, X_v): each replica draws fresh labels on
    the union region from a counter-based stream keyed by the seed."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    setup = _two_ball_region(d, rule.radius, k, DEFAULT_REGION_VERTEX_BUDGET)
    n_vertices = len(setup.region.vertices)
    rng = np.random.Generator(np.random.Philox(key=seed))
    m = len(rule.output_values)
    out_index = {val: i for i, val in enumerate(rule.output_values)}
    counts = np.zeros((m, m), dtype=np.int64)
    remaining = samples
    while remaining > 0:
        chunk = min(MC_CHUNK, remaining)
        draws = rng.choice(len(rule.input_values), size=(chunk, n_vertices), p=rule.input_probs)
        for row in draws:
            labels = [rule.input_values[i] for i in row]
            xu = rule.fn(canonical_ball_code(labels, setup.root_u, setup.children_u))
            xv = rule.fn(canonical_ball_code(labels, setup.root_v, setup.children_v))
            counts[out_index[xu], out_index[xv]] += 1
        remaining -= chunk
    J = joint_from_counts(counts, seed)
    values = _numeric_values(rule.output_values)
    return measurement_from_joint(
        d, k, J, values, values, "monte-carlo", samples=samples, seed=seed
    )


# ---------------------------------------------------------------------------
# Finite graphs and the round-based sparse-set / coloring algorithms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGraphInstance:
    """A finite graph for running local algorithms (d-regular when built
    by the configuration model; tree balls have leaves of smaller degree)."""

    n: int
    d: int
    adjacency: tuple[tuple[int, ...], ...]
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency length does not match vertex count")

    @property
    def is_regular(self) -> bool:
        return all(len(nbrs) == self.d for nbrs in self.adjacency)

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for nbrs in self.adjacency:
            hist[len(nbrs)] = hist.get(len(nbrs), 0) + 1
        return hist

    def edges(self) -> list[tuple[int, int]]:
        return [
            (u, v)
            for u, nbrs in enumerate(self.adjacency)
            for v in nbrs
            if u < v
        ]


def random_regular_graph(
    n: int, d: int, seed: int, max_attempts: int = 5000
) -> FiniteGraphInstance:
    """Uniform pairing of stubs, resampled until the result is simple."""
    if (n * d) % 2 != 0:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    if n <= d:
        raise ValueError(f"need n > d, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_attempts):
        perm = rng.permutation(stubs)
        a = perm[0::2]
        b = perm[1::2]
        if np.any(a == b):
            continue
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        keys = lo.astype(np.int64) * n + hi
        if len(np.unique(keys)) != len(keys):
            continue
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for u, v in zip(lo.tolist(), hi.tolist()):
            adjacency[u].append(v)
            adjacency[v].append(u)
        return FiniteGraphInstance(
            n, d, tuple(tuple(sorted(ns)) for ns in adjacency), seed
        )
    raise LocalAlgorithmError(
        f"no simple d-regular pairing found in {max_attempts} attempts"
    )


def tree_ball_graph(d: int, radius: int) -> FiniteGraphInstance:
    """The ball of the d-regular tree as a finite graph (leaves included)."""
    region = region_from_balls([(origin(d), radius)])
    adjacency: list[list[int]] = [[] for _ in region.vertices]
    for a, b in region.adjacency:
        adjacency[a].append(b)
        adjacency[b].append(a)
    return FiniteGraphInstance(
        len(region.vertices), d, tuple(tuple(sorted(ns)) for ns in adjacency), None
    )


def short_cycle_count(G: FiniteGraphInstance, max_length: int = 6) -> int:
    """Number of simple cycles of length at most ``max_length``."""
    import networkx as nx

    graph = nx.Graph(G.edges())
    graph.add_nodes_from(range(G.n))
    return sum(1 for _ in nx.simple_cycles(graph, length_bound=max_length))


def _within_distance(
    adjacency: Sequence[Sequence[int]], sources: Sequence[int], radius: int
) -> set[int]:
    seen = set(sources)
    frontier = list(sources)
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for nb in adjacency[x]:
                if nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt
    return seen


@dataclass(frozen=True)
class SparseSetResult:
    graph: FiniteGraphInstance
    separation: int
    labels: tuple[int, ...]
    rounds: int
    seed: int

    @property
    def ones(self) -> tuple[int, ...]:
        return tuple(i for i, lab in enumerate(self.labels) if lab == 1)


def check_sparse_set(
    G: FiniteGraphInstance, labels: Sequence[int], separation: int
) -> tuple[bool, bool]:
    """(separation holds, domination holds) for a 0/1 labeling."""
    ones = [i for i, lab in enumerate(labels) if lab == 1]
    sep_ok = True
    for v in ones:
        near = _within_distance(G.adjacency, [v], separation)
        if any(w != v and labels[w] == 1 for w in near):
            sep_ok = False
            break
    dom_ok = len(_within_distance(G.adjacency, ones, separation)) == G.n if ones else G.n == 0
    return sep_ok, dom_ok


def sparse_set_labeling(
    G: FiniteGraphInstance, separation: int, seed: int, round_cap: int = DEFAULT_ROUND_CAP
) -> SparseSetResult:
    """Round-based 0/1 labeling: 1-labels pairwise further than ``separation``
    apart, yet every vertex has a 1-label within that distance.

    Odd steps: every undefined vertex proposes with probability 1/2 and
    the proposal sticks iff no other proposer sits within the separation
    distance.  Even steps: undefined vertices that see a 1-label within
    the separation distance become 0.  Both properties are re-checked on
    the final labeling before returning.
    """
    if separation < 1:
        raise ValueError("separation must be >= 1")
    rng = np.random.default_rng(seed)
    labels = np.full(G.n, -1, dtype=np.int64)
    covered: set[int] = set()
    rounds = 0
    while np.any(labels == -1):
        rounds += 1
        if rounds > round_cap:
            raise LocalAlgorithmError(
                f"round cap {round_cap} exceeded; waiting times grow like "
                f"2^|B_L|, so large separations need a larger cap"
            )
        undefined = np.flatnonzero(labels == -1)
        coins = rng.random(len(undefined)) < 0.5
        proposers = undefined[coins]
        proposer_set = set(proposers.tolist())
        fixed = []
        for p in proposers.tolist():
            near = _within_distance(G.adjacency, [p], separation)
            if not any(w != p and w in proposer_set for w in near):
                fixed.append(p)
        labels[fixed] = 1
        if fixed:
            covered |= _within_distance(G.adjacency, fixed, separation)
            for v in np.flatnonzero(labels == -1).tolist():
                if v in covered:
                    labels[v] = 0
    sep_ok, dom_ok = check_sparse_set(G, labels.tolist(), separation)
    if not (sep_ok and dom_ok):
        raise LocalAlgorithmError(
            f"labeling violates its contract: separation={sep_ok}, domination={dom_ok}"
        )
    return SparseSetResult(G, separation, tuple(labels.tolist()), rounds, seed)


@dataclass(frozen=True)
class SparseColoringResult:
    graph: FiniteGraphInstance
    separation: int
    colors: tuple[int, ...]
    color_count: int
    rounds: int
    seed: int


def check_sparse_coloring(
    G: FiniteGraphInstance, colors: Sequence[int], separation: int
) -> bool:
    for v in range(G.n):
        near = _within_distance(G.adjacency, [v], separation)
        if any(w != v and colors[w] == colors[v] for w in near):
            return False
    return True


def sparse_coloring(
    G: FiniteGraphInstance, separation: int, seed: int, round_cap: int = DEFAULT_ROUND_CAP
) -> SparseColoringResult:
    """Repeated sparse-set phases, one color per phase, until every vertex
    is colored.  Same-color vertices end up further than ``separation``
    apart, and the number of colors never exceeds the tree ball size."""
    if separation < 1:
        raise ValueError("separation must be >= 1")
    rng = np.random.default_rng(seed)
    colors = np.zeros(G.n, dtype=np.int64)
    max_colors = ball_size(G.d, separation)
    rounds_total = 0
    color = 0
    while np.any(colors == 0):
        color += 1
        if color > max_colors:
            raise LocalAlgorithmError(
                f"more than {max_colors} colors needed; dynamics are broken"
            )
        # Within a phase: -1 undecided, 0 excluded or already colored.
        status = np.where(colors == 0, -1, 0)
        covered: set[int] = set()
        phase_rounds = 0
        while np.any(status == -1):
            phase_rounds += 1
            rounds_total += 1
            if phase_rounds > round_cap:
                raise LocalAlgorithmError(
                    f"per-phase round cap {round_cap} exceeded; waiting times "
                    f"grow like 2^|B_L|, so large separations need a larger cap"
                )
            undecided = np.flatnonzero(status == -1)
            coins = rng.random(len(undecided)) < 0.5
            proposers = undecided[coins]
            proposer_set = set(proposers.tolist())
            fixed = []
            for p in proposers.tolist():
                near = _within_distance(G.adjacency, [p], separation)
                if not any(w != p and w in proposer_set for w in near):
                    colors[p] = color
                    status[p] = 0
                    fixed.append(p)
            if fixed:
                covered |= _within_distance(G.adjacency, fixed, separation)
                for v in np.flatnonzero(status == -1).tolist():
                    if v in covered:
                        status[v] = 0
    if not check_sparse_coloring(G, colors.tolist(), separation):
        raise LocalAlgorithmError("coloring violates its separation contract")
    return SparseColoringResult(
        G, separation, tuple(colors.tolist()), int(colors.max()), rounds_total, seed
    )


# ---------------------------------------------------------------------------
# The label-listing process
# ---------------------------------------------------------------------------


def listing_normalized_mi(d: int, radius: int, k: int) -> float:
    """Large-alphabet limit of I/H for the rule that lists all labels in
    the radius-R ball: the shared fraction of the two lists."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(listing_ratio(d, radius, k))


def _vertices_at_distance(G: FiniteGraphInstance, u: int, k: int) -> list[int]:
    depth = {u: 0}
    frontier = [u]
    for level in range(1, k + 1):
        nxt = []
        for x in frontier:
            for nb in G.adjacency[x]:
                if nb not in depth:
                    depth[nb] = level
                    nxt.append(nb)
        frontier = nxt
    return frontier


def listing_finite_N_mi(
    d: int,
    radius: int,
    k: int,
    n_labels: int,
    coloring: SparseColoringResult,
    bootstrap_resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
) -> ProcessMeasurement:
    """Finite-alphabet listing process: each vertex reports the multiset
    of (color, label) pairs in its radius-R ball, labels i.i.d. uniform on
    {1..n_labels}.

    Colors within distance 2R+k are distinct, so matching colors identify
    shared ball vertices exactly and the label contribution to every
    entropy is a closed-form multiple of log(n_labels).  The color
    patterns' own contribution is estimated empirically over all vertex
    pairs at distance k of the colored graph; the ratio approaches the
    listing fraction as n_labels grows.
    """
    if n_labels < 2:
        raise ValueError("need at least 2 labels")
    if coloring.separation < 2 * radius + k:
        raise ValueError(
            f"coloring separation {coloring.separation} < 2R+k = {2 * radius + k}"
        )
    G = coloring.graph
    colors = coloring.colors
    patterns: dict[frozenset, int] = {}
    pair_rows = []
    ball_sizes = []
    shared_sizes = []
    for u in range(G.n):
        pat_u = frozenset(colors[w] for w in _within_distance(G.adjacency, [u], radius))
        for v in _vertices_at_distance(G, u, k):
            pat_v = frozenset(
                colors[w] for w in _within_distance(G.adjacency, [v], radius)
            )
            iu = patterns.setdefault(pat_u, len(patterns))
            iv = patterns.setdefault(pat_v, len(patterns))
            pair_rows.append((iu, iv))
            ball_sizes.append(len(pat_v))
            shared_sizes.append(len(pat_u & pat_v))
    if not pair_rows:
        raise ValueError(f"graph has no vertex pairs at distance {k}")

    pairs = np.asarray(pair_rows, dtype=np.int64)
    sizes = np.asarray(ball_sizes, dtype=float)
    shared = np.asarray(shared_sizes, dtype=float)
    log_n = math.log(n_labels)

    def ratio_from(idx: np.ndarray) -> tuple[float, float, float]:
        sel = pairs[idx]
        joint_counts: dict[tuple[int, int], int] = {}
        for a, b in sel.tolist():
            joint_counts[(a, b)] = joint_counts.get((a, b), 0) + 1
        total = len(idx)
        pj = np.asarray(list(joint_counts.values()), dtype=float) / total
        first: dict[int, float] = {}
        second: dict[int, float] = {}
        for (a, b), c in joint_counts.items():
            first[a] = first.get(a, 0) + c / total
            second[b] = second.get(b, 0) + c / total
        h_joint = _plugin_entropy(pj)
        h_u = _plugin_entropy(np.asarray(list(first.values())))
        h_v = _plugin_entropy(np.asarray(list(second.values())))
        mi_pat = h_u + h_v - h_joint
        mi_total = mi_pat + float(shared[idx].mean()) * log_n
        h_total = h_v + float(sizes[idx].mean()) * log_n
        return mi_total / h_total, mi_total, h_total

    all_idx = np.arange(len(pairs))
    nmi_value, mi_value, h_value = ratio_from(all_idx)
    rng = np.random.default_rng([0xC0105, coloring.seed])
    resampled = [
        ratio_from(rng.integers(0, len(pairs), size=len(pairs)))[0]
        for _ in range(bootstrap_resamples)
    ]
    nmi_stderr = float(np.std(resampled, ddof=1))

    return ProcessMeasurement(
        d=d,
        k=k,
        method="monte-carlo",
        joint=None,
        entropy_v=MeasuredQuantity(h_value, 0.0, "plug-in"),
        mi=MeasuredQuantity(mi_value, 0.0, "plug-in"),
        nmi=MeasuredQuantity(nmi_value, nmi_stderr, "plug-in"),
        corr=None,
        samples=len(pairs),
        seed=coloring.seed,
        extra=(("n_labels", float(n_labels)), ("R", float(radius))),
    )


# ---------------------------------------------------------------------------
# The Gaussian linear factor with sign output
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSignSpec:
    """Coefficients of the linear Gaussian factor Y_v = sum over vertices
    of alpha(dist) * Z_w, truncated at ``truncation_radius``, followed by
    sign().  alpha(0) = 0 and alpha(j) = j^(-1/2-eps) / (d-1)^(j/2)."""

    d: int
    eps: float
    truncation_radius: int
    tail_tol: Optional[float] = 1e-3

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("d must be >= 3")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.truncation_radius < 1:
            raise ValueError("truncation radius must be >= 1")

    def alpha(self, j: int) -> float:
        if j == 0:
            return 0.0
        return j ** (-0.5 - self.eps) / (self.d - 1) ** (j / 2)


def gaussian_cov_tail_bound(spec: GaussianSignSpec, k: int) -> float:
    """Upper bound on the covariance mass beyond the truncation radius
    (integral tail bounds on the off-path geometric sums)."""
    d, eps, D = spec.d, spec.eps, spec.truncation_radius
    if k == 0:
        return d / (d - 1) * D ** (-2 * eps) / (2 * eps)
    if D <= k:
        return float("inf")
    interior = sum(
        (D - max(j, k - j)) ** (-2 * eps) for j in range(1, k) if D > max(j, k - j)
    )
    ends = 2 * (D - k) ** (-2 * eps)
    return (d - 1) ** (-k / 2) / (2 * eps) * ((d - 2) / (d - 1) * interior + ends)


def _require_tail(spec: GaussianSignSpec, k: int, value: float) -> None:
    if spec.tail_tol is None:
        return
    bound = gaussian_cov_tail_bound(spec, k)
    if bound > spec.tail_tol * abs(value):
        if math.isinf(bound):
            needed = f"well beyond k={k}"
        else:
            scale = bound / (spec.tail_tol * abs(value))
            needed = str(
                math.ceil(k + (spec.truncation_radius - k) * scale ** (1 / (2 * spec.eps)))
            )
        raise TruncationError(
            f"tail bound {bound:.3g} exceeds {spec.tail_tol:.3g} * value "
            f"{value:.3g}; raise the truncation radius to about {needed}"
        )


def gaussian_cov(spec: GaussianSignSpec, k: int) -> float:
    """Truncated covariance of the linear factor at two vertices at
    distance k, summed over classes of vertices with equal distance pairs.

    A vertex hanging n >= 1 steps off the path at interior position j has
    distances (j+n, k-j+n) and the class has (d-2)(d-1)^(n-1) members;
    behind either endpoint the classes have (d-1)^n members.  The
    geometric class sizes cancel against the coefficient decay, which
    keeps every term O(1) in magnitude.
    """
    d, eps, D = spec.d, spec.eps, spec.truncation_radius
    if k < 0:
        raise ValueError("k must be >= 0")
    if D < k:
        raise ValueError(f"truncation radius {D} < k = {k}")
    if k == 0:
        j = np.arange(1, D + 1, dtype=float)
        value = d / (d - 1) * float(np.sum(j ** (-1 - 2 * eps)))
        _require_tail(spec, 0, value)
        return value

    scale = (d - 1) ** (-k / 2)
    total = 0.0
    # On-path vertices: distances (j, k-j); the endpoints carry alpha(0)=0.
    for j in range(1, k):
        total += scale * (j * (k - j)) ** (-0.5 - eps)
    # Interior off-path classes.
    for j in range(1, k):
        n_max = D - max(j, k - j)
        if n_max < 1:
            continue
        n = np.arange(1, n_max + 1, dtype=float)
        total += (
            (d - 2)
            / (d - 1)
            * scale
            * float(np.sum((j + n) ** (-0.5 - eps) * (k - j + n) ** (-0.5 - eps)))
        )
    # Behind each endpoint: distances (n, k+n).
    n_max = D - k
    if n_max >= 1:
        n = np.arange(1, n_max + 1, dtype=float)
        total += 2 * scale * float(np.sum(n ** (-0.5 - eps) * (n + k) ** (-0.5 - eps)))
    _require_tail(spec, k, total)
    return total


def sign_corr(rho: float) -> float:
    """Correlation of the signs of a standard bivariate normal pair with
    correlation rho: (2/pi) * arcsin(rho)."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    return 2.0 / math.pi * math.asin(rho)


def gaussian_sign_closed_form(spec: GaussianSignSpec, k: int) -> dict:
    """Closed-form path: truncated covariance -> arcsine law -> binary MI.

    The reported remainder bounds propagate the covariance truncation
    tails through the arcsine and MI maps.
    """
    from .information import binary_symmetric_mi

    cov0 = gaussian_cov(spec, 0)
    covk = gaussian_cov(spec, k) if k > 0 else cov0
    rho = max(-1.0, min(1.0, covk / cov0))
    corr = sign_corr(rho)
    q = (1.0 + corr) / 2.0
    mi = binary_symmetric_mi(q)
    tail0 = gaussian_cov_tail_bound(spec, 0)
    tailk = gaussian_cov_tail_bound(spec, k) if k > 0 else tail0
    rho_rem = (tailk + abs(rho) * tail0) / cov0
    corr_rem = 2.0 / math.pi * rho_rem / max(math.sqrt(1.0 - min(rho * rho, 1.0 - 1e-12)), 1e-6)
    if 0.0 < q < 1.0:
        mi_rem = abs(math.log(q / (1.0 - q))) / 2.0 * corr_rem + corr_rem**2
    else:
        mi_rem = math.log(2.0)
    return {
        "cov0": cov0,
        "covk": covk,
        "rho": rho,
        "corr": corr,
        "q": q,
        "mi": mi,
        "rho_remainder": rho_rem,
        "corr_remainder": corr_rem,
        "mi_remainder": mi_rem,
    }


def gaussian_sign_measure(
    spec: GaussianSignSpec,
    k: int,
    samples: int,
    seed: Optional[int] = None,
    region_budget: int = DEFAULT_REGION_VERTEX_BUDGET,
) -> ProcessMeasurement:
    """Measurement of the sign process at distance k.

    With samples == 0, returns the closed-form law.  Otherwise simulates
    the truncated linear factor on the explicit union of the two
    truncation balls (so the Monte Carlo path shares nothing with the
    arcsine/binary-MI closed form beyond the coefficient definitions).
    """
    closed = gaussian_sign_closed_form(spec, k)
    extra = (
        ("rho", closed["rho"]),
        ("closed_form_corr", closed["corr"]),
        ("closed_form_mi", closed["mi"]),
        ("mi_remainder", closed["mi_remainder"]),
        ("corr_remainder", closed["corr_remainder"]),
    )
    if samples == 0:
        J = symmetric_binary_joint(closed["q"])
        pm = measurement_from_joint(
            spec.d, k, J, (1.0, -1.0), (1.0, -1.0), "closed-form", extra=extra
        )
        return ProcessMeasurement(
            d=pm.d,
            k=pm.k,
            method="closed-form",
            joint=pm.joint,
            entropy_v=MeasuredQuantity(pm.entropy_v.value, 0.0, "closed-form"),
            mi=MeasuredQuantity(closed["mi"], 0.0, "closed-form"),
            nmi=MeasuredQuantity(closed["mi"] / math.log(2.0), 0.0, "closed-form"),
            corr=MeasuredQuantity(closed["corr"], 0.0, "closed-form"),
            samples=None,
            seed=None,
            extra=extra,
        )
    if samples < 1:
        raise ValueError("samples must be >= 0")
    if seed is None:
        raise ValueError("Monte Carlo requires a seed")
    D = spec.truncation_radius
    u = origin(spec.d)
    v = vertex_at_distance(u, k)
    region = region_from_balls([(u, D), (v, D)], budget=region_budget)
    w_u = np.empty(len(region.vertices))
    w_v = np.empty(len(region.vertices))
    for i, w in enumerate(region.vertices):
        du = dist(u, w)
        dv = dist(v, w)
        w_u[i] = spec.alpha(du) if du <= D else 0.0
        w_v[i] = spec.alpha(dv) if dv <= D else 0.0
    rng = np.random.Generator(np.random.Philox(key=seed))
    counts = np.zeros(4, dtype=np.int64)
    remaining = samples
    while remaining > 0:
        chunk = min(MC_CHUNK, remaining)
        z = rng.standard_normal((chunk, len(region.vertices)))
        yu = z @ w_u
        yv = z @ w_v
        su = (yu < 0).astype(np.int64)  # sign(0) counts as +1, index 0
        sv = (yv < 0).astype(np.int64)
        counts += np.bincount(2 * su + sv, minlength=4)
        remaining -= chunk
    J = joint_from_counts(counts.reshape(2, 2), seed)
    return measurement_from_joint(
        spec.d,
        k,
        J,
        (1.0, -1.0),
        (1.0, -1.0),
        "monte-carlo",
        samples=samples,
        seed=seed,
        extra=extra,
    )
