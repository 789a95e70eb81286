"""Pure-Python unit propagation kernel over integer-coded Horn clauses.

Atoms are 0..n_atoms-1 and -1 stands for bot. `bodies` hold distinct atoms.
Returns (status, target, fired, processed): status 0 means a target unit was
taken (target is its position), 1 means bot was taken, 2 means the unit queue
drained. `fired` lists the clauses whose heads entered the queue, in order;
`processed` lists the units moved to W."""

from __future__ import annotations

from collections import deque


def propagate(n_atoms: int, units: list, bodies: list, heads: list, target_pos: list):
    n = len(bodies)
    remaining = [len(b) for b in bodies]
    occ: list[list[int]] = [[] for _ in range(n_atoms)]
    hocc: list[list[int]] = [[] for _ in range(n_atoms)]
    for c in range(n):
        for a in bodies[c]:
            occ[a].append(c)
        if heads[c] >= 0:
            hocc[heads[c]].append(c)
    alive = [True] * n
    pos = list(range(n))
    nextpos = n
    done = [False] * n_atoms
    queue = deque(units)
    fired: list[int] = []
    processed: list[int] = []
    while queue:
        u = queue.popleft()
        if u < 0:
            return 1, -1, fired, processed
        t = target_pos[u]
        if t >= 0:
            return 0, t, fired, processed
        if done[u]:
            continue
        hits = [c for c in occ[u] if alive[c]]
        hits += [c for c in hocc[u] if alive[c] and remaining[c] > 0]
        hits = sorted(set(hits), key=pos.__getitem__)
        for c in hits:
            if heads[c] == u:
                alive[c] = False
                continue
            remaining[c] -= 1
            if remaining[c] == 0:
                alive[c] = False
                queue.append(heads[c])
                fired.append(c)
            else:
                pos[c] = nextpos
                nextpos += 1
        done[u] = True
        processed.append(u)
    return 2, -1, fired, processed
