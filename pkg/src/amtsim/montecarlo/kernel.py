"""Fused numba kernels: draw a replication, decide, and price it in one pass.

Agents are described by a type table (family, parameters, cap, transform)
and an ``agent_type`` index vector.  Agent ``j`` in replication ``r`` always
consumes uniform ``j`` of substream ``(seed, stream, r)``; that is the whole
reproducibility contract.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..distributions import _scalar as sc
from .rng import split_seed, uniform_pair

# per-replication output columns of ``run_free``
Q, SUM_V, SUM_T, SUM_PSI, FAIL = range(5)
N_FREE = 5

# per-(replication, pinned value) output columns of ``run_pinned``
PQ, PSUM_V, PSUM_T, PT_PIN, PV_PARTNER = range(5)
N_PINNED = 5

_BISECT_TOL = 1e-12


@njit(cache=True, error_model="numpy")
def _pivotal(T, others, hc, hp, fam, p, tx, tF, td, cap, Fcap, hi, v_own):
    """Pivotal value of one agent given the others' transform sum.

    Returns NaN if the bracket is broken by an undefined transform value.
    """
    y = T - others
    h0 = sc.h_eval(hc, hp, fam, p, tx, tF, td, cap, Fcap, 0.0)
    if h0 >= y:
        return 0.0
    top = min(v_own, hi)
    htop = sc.h_eval(hc, hp, fam, p, tx, tF, td, cap, Fcap, top)
    if math.isnan(htop):
        return math.nan
    if htop < y:
        # only reachable through rounding when q was decided on the full sum
        return top
    scale = max(1.0, abs(top))
    x = sc.h_inverse(hc, hp, fam, p, tx, tF, td, cap, Fcap, y, 0.0, top, _BISECT_TOL * scale)
    if x > top:
        x = top
    if x < 0.0:
        x = 0.0
    return x


@njit(cache=True, error_model="numpy")
def _h_at_zero(fam, par, cap, Fcap, hc, hp, tx, tF, td):
    out = np.empty(fam.size)
    for t in range(fam.size):
        out[t] = sc.h_eval(hc[t], hp[t], fam[t], par[t], tx, tF, td, cap[t], Fcap[t], 0.0)
        if math.isnan(out[t]):
            # psi -> -inf where the density vanishes at the bottom of the support
            out[t] = -math.inf
    return out


@njit(cache=True, error_model="numpy")
def _draw(k0, k1, stream, rep, members, moff, fam, par, cap, Fcap, hc, hp, tx, tF, td,
          want_psi, ubuf, vbuf, hbuf, pbuf):
    n = ubuf.size
    for j in range((n + 1) // 2):
        u0, u1 = uniform_pair(k0, k1, stream, rep, j)
        ubuf[2 * j] = u0
        if 2 * j + 1 < n:
            ubuf[2 * j + 1] = u1
    for t in range(moff.size - 1):
        idx = members[moff[t]:moff[t + 1]]
        sc.batch_quantile(fam[t], par[t], tx, tF, td, cap[t], Fcap[t], ubuf, idx, vbuf)
        sc.batch_h(hc[t], hp[t], fam[t], par[t], tx, tF, td, cap[t], Fcap[t], vbuf, idx, hbuf)
        if want_psi:
            sc.batch_psi(fam[t], par[t], tx, tF, td, cap[t], Fcap[t], vbuf, idx, pbuf)


@njit(cache=True, nogil=True, error_model="numpy")
def run_free(seed, stream, rep0, out, T, agent_type, members, moff, fam, par, cap, Fcap, hi,
             hc, hp, tx, tF, td, want_transfers, want_psi, ubuf, vbuf, hbuf, pbuf):
    """Simulate replications ``rep0 .. rep0+len(out)-1`` of the full profile.

    ``out`` rows get (q, sum v, sum t, sum psi, failed).  The four buffers
    are caller-owned scratch vectors of length n; ``members``/``moff`` list
    the agents of each type contiguously.
    """
    k0, k1 = split_seed(seed)
    n = agent_type.size
    h0 = _h_at_zero(fam, par, cap, Fcap, hc, hp, tx, tF, td)
    for r in range(out.shape[0]):
        rep = np.uint64(rep0) + np.uint64(r)
        _draw(k0, k1, stream, rep, members, moff, fam, par, cap, Fcap, hc, hp, tx, tF, td,
              want_psi, ubuf, vbuf, hbuf, pbuf)
        sv = 0.0
        sh = 0.0
        sp = 0.0
        lift = -math.inf
        for j in range(n):
            sv += vbuf[j]
            sh += hbuf[j]
            lift = max(lift, hbuf[j] - h0[agent_type[j]])
        bad = math.isnan(sh)
        if want_psi:
            for j in range(n):
                sp += pbuf[j]
            bad = bad or math.isnan(sp)
        q = 1.0 if sh >= T else 0.0
        st = 0.0
        if want_transfers and q == 1.0 and sh - T < lift:
            # v-hat_j > 0 only if lowering v_j to 0 drops the sum below T
            for j in range(n):
                if sh - hbuf[j] + h0[agent_type[j]] < T:
                    t = agent_type[j]
                    pv = _pivotal(T, sh - hbuf[j], hc[t], hp[t], fam[t], par[t], tx, tF, td,
                                  cap[t], Fcap[t], hi[t], vbuf[j])
                    if math.isnan(pv):
                        bad = True
                    st += pv
        out[r, Q] = q
        out[r, SUM_V] = sv
        out[r, SUM_T] = st
        out[r, SUM_PSI] = sp
        out[r, FAIL] = 1.0 if bad else 0.0


@njit(cache=True, nogil=True, error_model="numpy")
def run_pinned(seed, stream, rep0, out, fail, pin, partner, zs, T, agent_type, members, moff, fam, par,
               cap, Fcap, hi, hc, hp, tx, tF, td, ubuf, vbuf, hbuf, pbuf):
    """Replications with agent ``pin`` forced to each value in ``zs``.

    The other agents keep the draws they have in the free profile, so every
    pinned value faces the same opponents.  ``out[r, k]`` holds (q, sum v,
    sum t, pinned agent's transfer, valuation of agent ``partner``).
    """
    k0, k1 = split_seed(seed)
    n = agent_type.size
    K = zs.size
    tp = agent_type[pin]
    h0 = _h_at_zero(fam, par, cap, Fcap, hc, hp, tx, tF, td)
    hz = np.empty(K)
    for k in range(K):
        hz[k] = sc.h_eval(hc[tp], hp[tp], fam[tp], par[tp], tx, tF, td, cap[tp], Fcap[tp], zs[k])
    for r in range(out.shape[0]):
        rep = np.uint64(rep0) + np.uint64(r)
        _draw(k0, k1, stream, rep, members, moff, fam, par, cap, Fcap, hc, hp, tx, tF, td,
              False, ubuf, vbuf, hbuf, pbuf)
        vbuf[pin] = 0.0
        hbuf[pin] = 0.0
        sv = 0.0
        sh = 0.0
        lift = -math.inf
        for j in range(n):
            if j != pin:
                sv += vbuf[j]
                sh += hbuf[j]
                lift = max(lift, hbuf[j] - h0[agent_type[j]])
        bad = math.isnan(sh)
        for k in range(K):
            s = sh + hz[k]
            q = 1.0 if s >= T else 0.0
            st = 0.0
            ti = 0.0
            if q == 1.0:
                # the pinned agent's pivotal value depends on the others only
                ti = _pivotal(T, sh, hc[tp], hp[tp], fam[tp], par[tp], tx, tF, td, cap[tp],
                              Fcap[tp], hi[tp], zs[k])
                if math.isnan(ti):
                    bad = True
                st = ti
                if s - T < lift:
                    for j in range(n):
                        if j != pin and s - hbuf[j] + h0[agent_type[j]] < T:
                            t = agent_type[j]
                            pv = _pivotal(T, s - hbuf[j], hc[t], hp[t], fam[t], par[t], tx, tF,
                                          td, cap[t], Fcap[t], hi[t], vbuf[j])
                            if math.isnan(pv):
                                bad = True
                            st += pv
            out[r, k, PQ] = q
            out[r, k, PSUM_V] = sv + zs[k]
            out[r, k, PSUM_T] = st
            out[r, k, PT_PIN] = ti
            out[r, k, PV_PARTNER] = vbuf[partner] if partner >= 0 else math.nan
        fail[r] = 1.0 if bad else 0.0
