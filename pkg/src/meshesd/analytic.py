"""Steady-state model of the distributed control-slot scheduler.

Every node holds off 2^(x+base) transmission opportunities after a successful
control transmission, then competes against its 2-hop neighborhood. The
expected number of contention slots E[S_k] obeys a coupled system: each
slower-or-equal neighbor j is met with probability (own cycle)/(j's cycle),
each faster neighbor and each unknown neighbor costs one full slot. The
system is solved by damped-free Jacobi fixed-point iteration, which in
practice contracts quickly (ratio denominators are at least 2^base + 1).

The expected transmission interval is then E[tau_k] = 2^(x_k+base) + E[S_k].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .topology import MeshGraph

MAX_EXPONENT = 7  # 3-bit field
DEFAULT_BASE = 4
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10000


def holdoff_time(x: int, base: int = DEFAULT_BASE) -> int:
    """Mandatory waiting period, in slots, after a successful transmission."""
    if not (0 <= x <= MAX_EXPONENT):
        raise ValueError(f"holdoff exponent {x} outside 0..{MAX_EXPONENT}")
    if base < 0:
        raise ValueError(f"base must be >= 0, got {base}")
    return 2 ** (x + base)


def expected_interval(x: int, es_k: float, base: int = DEFAULT_BASE) -> float:
    """Expected slots between successive wins: holdoff plus contention."""
    if es_k < 1.0:
        raise ValueError(f"expected contention must be >= 1, got {es_k}")
    return holdoff_time(x, base) + es_k


@dataclass(frozen=True)
class SchedulerConfig:
    """Per-node holdoff exponents plus the shared base offset."""

    exponents: tuple[int, ...]
    base: int = DEFAULT_BASE

    def __post_init__(self):
        if self.base < 0:
            raise ValueError(f"base must be >= 0, got {self.base}")
        for k, x in enumerate(self.exponents):
            if not (0 <= x <= MAX_EXPONENT):
                raise ValueError(
                    f"exponent {x} at node {k} outside 0..{MAX_EXPONENT}"
                )

    @classmethod
    def uniform(cls, node_count: int, x: int, base: int = DEFAULT_BASE) -> SchedulerConfig:
        return cls(exponents=(x,) * node_count, base=base)

    def holdoff(self, k: int) -> int:
        return holdoff_time(self.exponents[k], self.base)


@dataclass(frozen=True)
class NeighborhoodKnowledge:
    """Which 2-hop neighbors each node has schedule information for.

    `known[k]` is the subset of k's 2-hop neighborhood with known schedules;
    `unknown_count[k]` counts neighbors it must treat as always competing.
    """

    known: tuple[frozenset[int], ...]
    unknown_count: tuple[int, ...]

    @classmethod
    def full(cls, g: MeshGraph) -> NeighborhoodKnowledge:
        """Every 2-hop neighbor known; the default for experiments."""
        return cls(
            known=tuple(g.two_hop_neighborhood(k) for k in range(g.node_count)),
            unknown_count=(0,) * g.node_count,
        )

    def validate(self, g: MeshGraph) -> None:
        for k in range(g.node_count):
            n2 = g.two_hop_neighborhood(k)
            if k in self.known[k]:
                raise ValueError(f"node {k} lists itself as known neighbor")
            if not self.known[k] <= n2:
                raise ValueError(f"known set of node {k} exceeds its 2-hop neighborhood")
            if self.unknown_count[k] < 0:
                raise ValueError(f"negative unknown count at node {k}")
            if self.unknown_count[k] + len(self.known[k]) > len(n2):
                raise ValueError(f"knowledge of node {k} exceeds its 2-hop neighborhood")


@dataclass(frozen=True)
class ExpectedSchedule:
    """Solved contention slots and transmission intervals, per node."""

    es: tuple[float, ...]
    etau: tuple[float, ...]
    converged: bool
    iterations: int
    residual: float = field(default=math.nan)


def contention_rhs(
    g: MeshGraph,
    cfg: SchedulerConfig,
    nk: NeighborhoodKnowledge,
    es: list[float] | tuple[float, ...],
) -> list[float]:
    """One evaluation of the coupled contention system at the point `es`."""
    x = cfg.exponents
    hold = [cfg.holdoff(k) for k in range(g.node_count)]
    out = []
    for k in range(g.node_count):
        total = 0.0
        slower_equal = 0.0
        faster = 0
        for j in sorted(nk.known[k]):
            if x[j] >= x[k]:
                slower_equal += (hold[k] + es[k]) / (hold[j] + es[j])
            else:
                faster += 1
        total = slower_equal + faster + nk.unknown_count[k] + 1
        out.append(total)
    return out


def solve_expected_contention(
    g: MeshGraph,
    cfg: SchedulerConfig,
    nk: NeighborhoodKnowledge | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ExpectedSchedule:
    """Solve the contention fixed point by Jacobi iteration.

    All E[S] values are updated simultaneously from the previous iterate,
    starting from the analytic lower bound 1 + #faster-neighbors + #unknown.
    Stops when successive iterates differ by less than `tol` in max-norm;
    returns the best iterate with converged=False if max_iter is exhausted.
    Raises ArithmeticError if the iteration produces non-finite values.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    n = g.node_count
    if len(cfg.exponents) != n:
        raise ValueError(
            f"config covers {len(cfg.exponents)} nodes, graph has {n}"
        )
    if nk is None:
        nk = NeighborhoodKnowledge.full(g)
    nk.validate(g)

    x = cfg.exponents
    es = [
        1.0
        + sum(1 for j in nk.known[k] if x[j] < x[k])
        + nk.unknown_count[k]
        for k in range(n)
    ]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new = contention_rhs(g, cfg, nk, es)
        if not all(math.isfinite(v) for v in new):
            raise ArithmeticError("contention fixed point diverged to non-finite values")
        delta = max((abs(a - b) for a, b in zip(new, es)), default=0.0)
        es = new
        if delta < tol:
            converged = True
            break

    rhs = contention_rhs(g, cfg, nk, es)
    residual = max((abs(a - b) for a, b in zip(rhs, es)), default=0.0)
    etau = tuple(expected_interval(x[k], es[k], cfg.base) for k in range(n))
    return ExpectedSchedule(
        es=tuple(es),
        etau=etau,
        converged=converged,
        iterations=iterations,
        residual=residual,
    )
