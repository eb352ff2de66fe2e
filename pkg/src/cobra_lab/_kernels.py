"""numba hot loops.

Every kernel takes CSR adjacency (``indptr``, ``indices``) and a
``numpy.random.Generator``; neighbour draws use ``floor(random() * degree)``.
Timeouts are reported as -1.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def _draw(indptr, indices, v, rng):
    lo = indptr[v]
    return indices[lo + int(rng.random() * (indptr[v + 1] - lo))]


@numba.njit(cache=True)
def cobra_run(indptr, indices, k, start, target, cap, rng, first):
    """Run a k-cobra walk from ``start``.

    Stops when ``target`` becomes active (``target >= 0``) or when every
    vertex has been active (``target < 0``). ``first[v]`` receives the first
    round ``v`` was active, -1 if never. Returns the stopping round or -1.
    """
    n = indptr.shape[0] - 1
    cur = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        first[v] = -1
    cur[0] = start
    size = 1
    first[start] = 0
    seen = 1
    if start == target or (target < 0 and seen == n):
        return 0
    t = 0
    while t < cap:
        t += 1
        m = 0
        for i in range(size):
            v = cur[i]
            lo = indptr[v]
            d = indptr[v + 1] - lo
            for _ in range(k):
                w = indices[lo + int(rng.random() * d)]
                if stamp[w] != t:
                    stamp[w] = t
                    nxt[m] = w
                    m += 1
                    if first[w] < 0:
                        first[w] = t
                        seen += 1
        cur, nxt = nxt, cur
        size = m
        if target >= 0:
            if stamp[target] == t:
                return t
        elif seen == n:
            return t
    return -1


@numba.njit(cache=True)
def walt_advance(indptr, indices, pos, lazy, rng, cnt, rank, dst1, dst2, src):
    """One W_alt round in place; pebble ``i`` has priority ``i``.

    ``cnt`` and ``rank`` are per-vertex scratch arrays that must be zero on
    entry and are zeroed again on exit; ``src`` is per-pebble scratch.
    Returns False when the lazy coin kept every pebble still.
    """
    if lazy and rng.random() < 0.5:
        return False
    m = pos.shape[0]
    for i in range(m):
        src[i] = pos[i]
        cnt[pos[i]] += 1
    for i in range(m):
        v = src[i]
        if cnt[v] <= 2:
            pos[i] = _draw(indptr, indices, v, rng)
        else:
            r = rank[v]
            rank[v] = r + 1
            if r == 0:
                dst1[v] = _draw(indptr, indices, v, rng)
                pos[i] = dst1[v]
            elif r == 1:
                dst2[v] = _draw(indptr, indices, v, rng)
                pos[i] = dst2[v]
            else:
                pos[i] = dst1[v] if rng.random() < 0.5 else dst2[v]
    for i in range(m):
        cnt[src[i]] = 0
        rank[src[i]] = 0
    return True


@numba.njit(cache=True)
def walt_cover(indptr, indices, pos, lazy, cap, rng):
    """Rounds until every vertex has held a pebble; -1 on timeout."""
    n = indptr.shape[0] - 1
    m = pos.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    seen = 0
    for i in range(m):
        if not visited[pos[i]]:
            visited[pos[i]] = True
            seen += 1
    if seen == n:
        return 0
    cnt = np.zeros(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    dst1 = np.zeros(n, dtype=np.int64)
    dst2 = np.zeros(n, dtype=np.int64)
    src = np.empty(m, dtype=np.int64)
    t = 0
    while t < cap:
        t += 1
        if not walt_advance(indptr, indices, pos, lazy, rng, cnt, rank, dst1, dst2, src):
            continue
        for i in range(m):
            v = pos[i]
            if not visited[v]:
                visited[v] = True
                seen += 1
        if seen == n:
            return t
    return -1


@numba.njit(cache=True)
def tensor_pair_sample(indptr, indices, i0, j0, steps, trials, lazy, rng, counts):
    """Two priority-ordered W_alt pebbles; accumulate the joint position at
    time ``steps`` into ``counts[i, j]``. When co-located the higher-order
    pebble copies the lower one's move with probability 1/2."""
    for _ in range(trials):
        i = i0
        j = j0
        moves = rng.binomial(steps, 0.5) if lazy else steps
        for _ in range(moves):
            ni = _draw(indptr, indices, i, rng)
            if i == j and rng.random() < 0.5:
                nj = ni
            else:
                nj = _draw(indptr, indices, j, rng)
            i = ni
            j = nj
        counts[i, j] += 1


@numba.njit(cache=True)
def chain_hit(cum_indptr, cum_states, cum_probs, start, target, cap, rng):
    """Hitting time of ``target`` for a chain stored as CSR rows of
    cumulative probabilities."""
    if start == target:
        return 0
    x = start
    t = 0
    while t < cap:
        t += 1
        u = rng.random()
        lo = cum_indptr[x]
        hi = cum_indptr[x + 1]
        nx = cum_states[hi - 1]
        for e in range(lo, hi):
            if u < cum_probs[e]:
                nx = cum_states[e]
                break
        x = nx
        if x == target:
            return t
    return -1


# ---------------------------------------------------------------------------
# tracked pebble on the grid [0, side]^d

POLICY_DGRID = 0
POLICY_CLOSEST = 1


@numba.njit(cache=True)
def _grid_move(pos, side, rng):
    d = pos.shape[0]
    deg = 0
    for i in range(d):
        if pos[i] > 0:
            deg += 1
        if pos[i] < side:
            deg += 1
    r = int(rng.random() * deg)
    for i in range(d):
        if pos[i] > 0:
            if r == 0:
                return i, -1
            r -= 1
        if pos[i] < side:
            if r == 0:
                return i, 1
            r -= 1
    return d - 1, 1


@numba.njit(cache=True)
def tracked_step(pos, target, side, policy, rng):
    """Advance the tracked pebble one round in place; returns the moved
    dimension and signed displacement."""
    da, sa = _grid_move(pos, side, rng)
    db, sb = _grid_move(pos, side, rng)
    za = abs(pos[da] - target[da])
    zb = abs(pos[db] - target[db])
    closer_a = abs(pos[da] + sa - target[da]) < za
    closer_b = abs(pos[db] + sb - target[db]) < zb
    pick_a = True
    if policy == POLICY_DGRID:
        if da == db:
            if closer_a != closer_b:
                pick_a = closer_a
            else:
                pick_a = rng.random() < 0.5
        elif za == 0 and zb != 0:
            pick_a = False
        elif zb == 0 and za != 0:
            pick_a = True
        elif closer_a != closer_b:
            pick_a = closer_a
        else:
            pick_a = rng.random() < 0.5
    else:
        # closest pebble; ties go to the move leaving more mismatched coordinates
        ga = -1 if closer_a else 1
        gb = -1 if closer_b else 1
        if ga != gb:
            pick_a = ga < gb
        else:
            nz_a = 0
            nz_b = 0
            for i in range(pos.shape[0]):
                ca = pos[i] + (sa if i == da else 0)
                cb = pos[i] + (sb if i == db else 0)
                if ca != target[i]:
                    nz_a += 1
                if cb != target[i]:
                    nz_b += 1
            if nz_a != nz_b:
                pick_a = nz_a > nz_b
            else:
                pick_a = rng.random() < 0.5
    if pick_a:
        pos[da] += sa
        return da, sa
    pos[db] += sb
    return db, sb


@numba.njit(cache=True)
def tracked_two_step_counts(pos0, target, side, policy, samples, rng):
    """Histogram of the Manhattan distance change over two rounds, indexed
    by change + 2 (so slots 0, 2, 4 hold -2, 0, +2)."""
    d = pos0.shape[0]
    out = np.zeros(5, dtype=np.int64)
    base = 0
    for i in range(d):
        base += abs(pos0[i] - target[i])
    pos = np.empty(d, dtype=np.int64)
    for _ in range(samples):
        for i in range(d):
            pos[i] = pos0[i]
        tracked_step(pos, target, side, policy, rng)
        tracked_step(pos, target, side, policy, rng)
        dist = 0
        for i in range(d):
            dist += abs(pos[i] - target[i])
        out[dist - base + 2] += 1
    return out


@numba.njit(cache=True)
def tracked_dimension_counts(pos0, target, side, policy, dim, samples, rng):
    """One-round outcomes for coordinate ``dim``: (changed, decreased, increased)."""
    d = pos0.shape[0]
    pos = np.empty(d, dtype=np.int64)
    z0 = abs(pos0[dim] - target[dim])
    changed = 0
    dec = 0
    inc = 0
    for _ in range(samples):
        for i in range(d):
            pos[i] = pos0[i]
        tracked_step(pos, target, side, policy, rng)
        z = abs(pos[dim] - target[dim])
        if z != z0:
            changed += 1
            if z < z0:
                dec += 1
            else:
                inc += 1
    return changed, dec, inc


@numba.njit(cache=True)
def reflected_biased_occupancy(up, burn_in, steps, width, rng):
    """Occupancy counts of the walk on {0, 1, ...} that steps up with
    probability ``up`` and down otherwise, holding at 0 instead of stepping
    below it."""
    counts = np.zeros(width, dtype=np.int64)
    x = 0
    for t in range(burn_in + steps):
        if rng.random() < up:
            x += 1
        elif x > 0:
            x -= 1
        if t >= burn_in and x < width:
            counts[x] += 1
    return counts
