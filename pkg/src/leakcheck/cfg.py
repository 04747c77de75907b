"""Single-pass traversal plans over a function's control-flow graph.

Strongly connected components are condensed into a DAG which is visited in
topological order; blocks inside a component follow reverse postorder from
the component's entry block.  Every reachable block appears exactly once, so
each block generates constraints once and loops are walked a single time.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .graphs import tarjan_scc
from .ir import Finding, Function, successors


@dataclass(frozen=True)
class TraversalPlan:
    order: tuple[int, ...]
    merge_blocks: frozenset[int]
    back_edges: frozenset[tuple[int, int]]
    predecessors: dict[int, tuple[int, ...]] = field(compare=False)
    findings: tuple[Finding, ...] = ()

    def describe(self) -> list[str]:
        return [
            f"order: {' '.join(f'bb{b}' for b in self.order)}",
            f"merge: {' '.join(f'bb{b}' for b in sorted(self.merge_blocks)) or '-'}",
            f"back edges: {' '.join(f'bb{u}->bb{v}' for u, v in sorted(self.back_edges)) or '-'}",
        ]


def _reachable(succ: dict[int, list[int]]) -> set[int]:
    seen = {0}
    stack = [0]
    while stack:
        for w in succ[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def build_traversal_plan(f: Function) -> TraversalPlan:
    n = len(f.blocks)
    succ = {b: sorted({t for t in successors(f.blocks[b].term) if 0 <= t < n}) for b in range(n)}
    reach = _reachable(succ)
    findings = tuple(
        Finding("block unreachable from entry", f"fn {f.name} bb{b}") for b in range(n) if b not in reach
    )
    nodes = sorted(reach)
    succ = {b: [t for t in succ[b] if t in reach] for b in nodes}
    preds: dict[int, list[int]] = {b: [] for b in nodes}
    for b in nodes:
        for t in succ[b]:
            preds[t].append(b)

    sccs = tarjan_scc(nodes, lambda b: succ[b])
    comp_of = {b: i for i, comp in enumerate(sccs) for b in comp}
    members = [sorted(c) for c in sccs]
    indeg = [0] * len(sccs)
    dag: list[set[int]] = [set() for _ in sccs]
    for b in nodes:
        for t in succ[b]:
            cu, cv = comp_of[b], comp_of[t]
            if cu != cv and cv not in dag[cu]:
                dag[cu].add(cv)
                indeg[cv] += 1

    order: list[int] = []
    placed: set[int] = set()
    ready = [(members[i][0], i) for i in range(len(sccs)) if indeg[i] == 0]
    heapq.heapify(ready)
    while ready:
        _, c = heapq.heappop(ready)
        comp = set(members[c])
        entries = [b for b in members[c] if b == 0 or any(p in placed for p in preds[b])]
        entry = entries[0] if entries else members[c][0]
        # reverse postorder restricted to the component
        post: list[int] = []
        seen = {entry}
        work = [(entry, iter(succ[entry]))]
        while work:
            v, it = work[-1]
            for w in it:
                if w in comp and w not in seen:
                    seen.add(w)
                    work.append((w, iter(succ[w])))
                    break
            else:
                work.pop()
                post.append(v)
        for b in reversed(post):
            order.append(b)
            placed.add(b)
        for d in sorted(dag[c]):
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(ready, (members[d][0], d))

    pos = {b: i for i, b in enumerate(order)}
    back = frozenset((u, v) for u in nodes for v in succ[u] if pos[v] <= pos[u])
    merge = frozenset(b for b in nodes if len(preds[b]) >= 2)
    return TraversalPlan(tuple(order), merge, back, {b: tuple(preds[b]) for b in nodes}, findings)
