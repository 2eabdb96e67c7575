"""Array kernels for the worker loops.

One worker's state is a bundle of flat arrays:

* ``slot_u``/``slot_v``: endpoints (dense node ids) of each storage slot;
* ``index``: edge key ``a * n + b`` (``a < b``) -> slot;
* ``head``/``nxt``/``prv``: per-node doubly linked lists of half-edges, where
  half-edge ``2s`` hangs off ``slot_u[s]`` and ``2s + 1`` off ``slot_v[s]``;
* ``deg``: stored degree per node, used to scan the smaller neighbourhood;
* ``local``/``glob``: the worker's running estimates;
* ``st``: integer counters, addressed by the ``ST_*`` constants;
* ``seg_seen``: offers seen by each finalized segment (adaptive pool only);
* ``rng``: one-word splitmix64 state.

Adaptive-pool segment ``g`` owns slots ``[g*k, (g+1)*k)``; the live reservoir
is the segment numbered ``st[ST_GROUP]``, so rotation only bumps a counter.
The Random Pairing sampler uses slots ``[0, size)`` with swap-removal.

Everything here is compiled with numba unless ``DTC_DISABLE_NUMBA`` is set.
"""

import numpy as np

from . import core_sampling as _cs
from ._jit import USE_NUMBA, jit
from .routing import GOLDEN, MASK64, MIX1, MIX2, mix64

ST_SIZE = 0
ST_SEEN = 1
ST_GROUP = 2
ST_REMAINING = 3
ST_NG = 4
ST_NB = 5
ST_OFFERS = 6
ST_DELIVERED = 7
ST_PEAK = 8
ST_EXHAUSTED_AT = 9
ST_ERROR = 10
ST_ROTATIONS = 11
NSTAT = 12

_G = np.uint64(GOLDEN)
_M1 = np.uint64(MIX1)
_M2 = np.uint64(MIX2)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV53 = 1.0 / 9007199254740992.0


def _rand_compiled(rng):
    x = rng[0]
    rng[0] = x + _G
    z = x + _G
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return np.float64(z >> _S11) * _INV53


def _rand_interpreted(rng):
    x = int(rng[0])
    rng[0] = (x + GOLDEN) & MASK64
    return (mix64(x) >> 11) * _INV53


_rand = jit(_rand_compiled) if USE_NUMBA else _rand_interpreted

_pair_reservoir = jit(_cs.reservoir_pair_probability)
_incl_reservoir = jit(_cs.reservoir_inclusion_probability)
_pair_segment = jit(_cs.segment_pair_probability)
_pair_pairing = jit(_cs.pairing_pair_probability)


@jit
def _push_half(h, node, head, nxt, prv):
    first = head[node]
    nxt[h] = first
    prv[h] = -1
    if first != -1:
        prv[first] = h
    head[node] = h


@jit
def _drop_half(h, node, head, nxt, prv):
    p = prv[h]
    q = nxt[h]
    if p != -1:
        nxt[p] = q
    else:
        head[node] = q
    if q != -1:
        prv[q] = p


@jit
def _place(s, a, b, n, slot_u, slot_v, index, head, nxt, prv, deg):
    slot_u[s] = a
    slot_v[s] = b
    index[a * n + b] = s
    _push_half(2 * s, a, head, nxt, prv)
    _push_half(2 * s + 1, b, head, nxt, prv)
    deg[a] += 1
    deg[b] += 1


@jit
def _unplace(s, n, slot_u, slot_v, index, head, nxt, prv, deg):
    a = slot_u[s]
    b = slot_v[s]
    index.pop(a * n + b)
    _drop_half(2 * s, a, head, nxt, prv)
    _drop_half(2 * s + 1, b, head, nxt, prv)
    deg[a] -= 1
    deg[b] -= 1


@jit
def _delivered(hu, hv, wid):
    return hu != hv or hu == wid


@jit
def ar_run(us, vs, signs, hu, hv, start, stop, wid, n, k, trigger,
           slot_u, slot_v, index, head, nxt, prv, deg, local, glob, st, seg_seen, rng):
    """Adaptive-resampling worker over events ``[start, stop)``."""
    for i in range(start, stop):
        if not _delivered(hu[i], hv[i], wid):
            continue
        if signs[i] < 0:
            st[ST_ERROR] = i
            return
        st[ST_DELIVERED] += 1
        u = us[i]
        v = vs[i]
        a = u
        b = v
        if deg[a] > deg[b]:
            a = v
            b = u
        cur = st[ST_GROUP]
        seen = st[ST_SEEN]
        h = head[a]
        while h != -1:
            s = h >> 1
            c = slot_v[s] if (h & 1) == 0 else slot_u[s]
            if c != b:
                key = b * n + c if b < c else c * n + b
                if key in index:
                    s2 = index[key]
                    g1 = s // k
                    g2 = s2 // k
                    if g1 == cur and g2 == cur:
                        p = _pair_reservoir(k, seen)
                    elif g1 == cur:
                        p = _incl_reservoir(k, seen) * (k / seg_seen[g2])
                    elif g2 == cur:
                        p = _incl_reservoir(k, seen) * (k / seg_seen[g1])
                    elif g1 == g2:
                        p = _pair_segment(k, seg_seen[g1])
                    else:
                        p = (k / seg_seen[g1]) * (k / seg_seen[g2])
                    inc = 1.0 / p
                    glob[0] += inc
                    local[u] += inc
                    local[v] += inc
                    local[c] += inc
            h = nxt[h]
        if hu[i] != wid and hv[i] != wid:
            continue
        st[ST_OFFERS] += 1
        st[ST_SEEN] += 1
        base = cur * k
        if st[ST_SIZE] < k:
            _place(base + st[ST_SIZE], u, v, n, slot_u, slot_v, index, head, nxt, prv, deg)
            st[ST_SIZE] += 1
        elif _rand(rng) < k / st[ST_SEEN]:
            s = base + int(_rand(rng) * k)
            _unplace(s, n, slot_u, slot_v, index, head, nxt, prv, deg)
            _place(s, u, v, n, slot_u, slot_v, index, head, nxt, prv, deg)
        if st[ST_SEEN] >= trigger and st[ST_SIZE] >= k:
            if st[ST_REMAINING] >= k:
                seg_seen[cur] = st[ST_SEEN]
                st[ST_GROUP] += 1
                st[ST_REMAINING] -= k
                st[ST_SIZE] = 0
                st[ST_SEEN] = 0
                st[ST_ROTATIONS] += 1
            elif st[ST_EXHAUSTED_AT] < 0:
                st[ST_EXHAUSTED_AT] = st[ST_OFFERS]
        stored = st[ST_GROUP] * k + st[ST_SIZE]
        if stored > st[ST_PEAK]:
            st[ST_PEAK] = stored


@jit
def _fd_sample(sign, u, v, n, k, slot_u, slot_v, index, head, nxt, prv, deg, st, rng):
    """One Random Pairing step; returns False on an integrity violation."""
    st[ST_OFFERS] += 1
    if sign > 0:
        st[ST_SEEN] += 1
        if st[ST_NG] + st[ST_NB] == 0:
            if st[ST_SIZE] < k:
                _place(st[ST_SIZE], u, v, n, slot_u, slot_v, index, head, nxt, prv, deg)
                st[ST_SIZE] += 1
            elif _rand(rng) < k / st[ST_SEEN]:
                s = int(_rand(rng) * k)
                _unplace(s, n, slot_u, slot_v, index, head, nxt, prv, deg)
                _place(s, u, v, n, slot_u, slot_v, index, head, nxt, prv, deg)
        elif _rand(rng) < st[ST_NB] / (st[ST_NB] + st[ST_NG]):
            _place(st[ST_SIZE], u, v, n, slot_u, slot_v, index, head, nxt, prv, deg)
            st[ST_SIZE] += 1
            st[ST_NB] -= 1
        else:
            st[ST_NG] -= 1
        if st[ST_SIZE] > st[ST_PEAK]:
            st[ST_PEAK] = st[ST_SIZE]
        return True
    if st[ST_SEEN] == 0:
        return False
    st[ST_SEEN] -= 1
    key = u * n + v
    if key not in index:
        st[ST_NG] += 1
        return True
    s = index[key]
    _unplace(s, n, slot_u, slot_v, index, head, nxt, prv, deg)
    last = st[ST_SIZE] - 1
    if s != last:
        a = slot_u[last]
        b = slot_v[last]
        _unplace(last, n, slot_u, slot_v, index, head, nxt, prv, deg)
        _place(s, a, b, n, slot_u, slot_v, index, head, nxt, prv, deg)
    st[ST_SIZE] = last
    st[ST_NB] += 1
    return True


@jit
def fd_run(us, vs, signs, hu, hv, start, stop, wid, n, k,
           slot_u, slot_v, index, head, nxt, prv, deg, local, glob, st, rng):
    """Random Pairing worker over events ``[start, stop)``."""
    for i in range(start, stop):
        if not _delivered(hu[i], hv[i], wid):
            continue
        st[ST_DELIVERED] += 1
        u = us[i]
        v = vs[i]
        sign = signs[i]
        inc = sign / _pair_pairing(k, st[ST_SEEN] + st[ST_NG] + st[ST_NB])
        a = u
        b = v
        if deg[a] > deg[b]:
            a = v
            b = u
        h = head[a]
        while h != -1:
            s = h >> 1
            c = slot_v[s] if (h & 1) == 0 else slot_u[s]
            if c != b:
                key = b * n + c if b < c else c * n + b
                if key in index:
                    glob[0] += inc
                    local[u] += inc
                    local[v] += inc
                    local[c] += inc
            h = nxt[h]
        if hu[i] != wid and hv[i] != wid:
            continue
        if not _fd_sample(sign, u, v, n, k, slot_u, slot_v, index, head, nxt, prv, deg, st, rng):
            st[ST_ERROR] = i
            return


@jit
def pairing_membership_mc(ev_u, ev_v, ev_sign, q_u, q_v, n, k, trials,
                          slot_u, slot_v, index, head, nxt, prv, deg, st, rng):
    """Run the Random Pairing step over one event list ``trials`` times.

    Returns, for each queried edge, the number of trials in which it is held
    by the sampler after the last event.
    """
    hits = np.zeros(q_u.shape[0], dtype=np.int64)
    for _ in range(trials):
        for i in range(ev_u.shape[0]):
            if not _fd_sample(ev_sign[i], ev_u[i], ev_v[i], n, k,
                              slot_u, slot_v, index, head, nxt, prv, deg, st, rng):
                hits[:] = -1
                return hits
        for j in range(q_u.shape[0]):
            if q_u[j] * n + q_v[j] in index:
                hits[j] += 1
        for s in range(st[ST_SIZE]):
            _unplace(s, n, slot_u, slot_v, index, head, nxt, prv, deg)
        for j in range(NSTAT):
            st[j] = 0
    return hits
