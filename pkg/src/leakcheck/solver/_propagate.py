"""Pure-Python fixed-point propagation (fallback when the extension is absent)."""

from __future__ import annotations

from collections import deque


def propagate(dom, active, table, op, tgt, sstart, slen, srcs, cgroup, wstart, wlist, seed) -> int:
    """Revise fold constraints to generalized arc consistency.

    ``dom`` is updated in place.  Returns 1 on a fixed point, 0 when some
    domain becomes empty.
    """
    queue = deque()
    queued = set()
    for c in seed:
        if active[cgroup[c]] and c not in queued:
            queued.add(c)
            queue.append(c)
    fwd = []
    bwd = []
    while queue:
        c = queue.popleft()
        queued.discard(c)
        o = op[c] * 64
        ident = 4 if o == 0 else 1
        start = sstart[c]
        k = slen[c]
        fwd.clear()
        acc = ident
        fwd.append(acc)
        for j in range(k):
            acc = table[o + acc * 8 + dom[srcs[start + j]]]
            fwd.append(acc)
        changed = []
        t = tgt[c]
        nt = dom[t] & acc
        if nt == 0:
            return 0
        if nt != dom[t]:
            dom[t] = nt
            changed.append(t)
        bwd.clear()
        bwd.extend([ident] * (k + 1))
        acc = ident
        for j in range(k - 1, -1, -1):
            acc = table[o + dom[srcs[start + j]] * 8 + acc]
            bwd[j] = acc
        for j in range(k):
            s = srcs[start + j]
            d = dom[s]
            nd = 0
            left = fwd[j]
            right = bwd[j + 1]
            for v in (1, 2, 4):
                if d & v and table[o + table[o + left * 8 + v] * 8 + right] & nt:
                    nd |= v
            if nd == 0:
                return 0
            if nd != d:
                dom[s] = nd
                changed.append(s)
        for v in changed:
            for i in range(wstart[v], wstart[v + 1]):
                w = wlist[i]
                if w not in queued and active[cgroup[w]]:
                    queued.add(w)
                    queue.append(w)
    return 1
