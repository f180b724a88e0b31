"""Min-sum belief propagation with ordered-statistics post-processing.

The message-passing and OSD kernels are numba-compiled and callable from
other compiled loops (see :func:`exhaustive_weight_sweep`).  OSD uses the
combination-sweep variant: after solving on the most-likely information set
(OSD-0) it tries every single flip among the first ``order`` non-pivot
positions and every pair of flips among them, keeping the candidate of least
soft weight (sum of channel log-likelihood ratios over its support).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .. import gf2
from ..gf2 import _eliminate

DEFAULT_ALPHA = 0.625
DEFAULT_MAX_ITERS = 30
DEFAULT_OSD_ORDER = 30
MIN_PRIOR = 1e-12

__all__ = [
    "DecodeOutcome",
    "BpOsdDecoder",
    "bp_decode",
    "osd_postprocess",
    "exhaustive_weight_sweep",
    "SyndromeMismatch",
]


class SyndromeMismatch(AssertionError):
    """A decoder returned a correction that does not reproduce the syndrome."""


@dataclass(frozen=True)
class DecodeOutcome:
    correction: np.ndarray
    converged: bool
    iterations: int
    soft_weight: float
    posterior: np.ndarray | None = None
    used_osd: bool = False


def tanner_arrays(H: np.ndarray):
    """CSR-style edge lists: check -> variables and variable -> edge ids."""
    H = gf2.as_binary(np.atleast_2d(H))
    m, n = H.shape
    rows, cols = np.nonzero(H)
    chk_ptr = np.searchsorted(rows, np.arange(m + 1)).astype(np.int64)
    chk_var = cols.astype(np.int64)
    order = np.argsort(cols, kind="stable")
    var_edge = order.astype(np.int64)
    var_ptr = np.searchsorted(cols[order], np.arange(n + 1)).astype(np.int64)
    return chk_ptr, chk_var, var_ptr, var_edge


def channel_llrs(priors) -> np.ndarray:
    p = np.clip(np.asarray(priors, dtype=np.float64), MIN_PRIOR, 0.5)
    return np.log((1.0 - p) / p)


@numba.njit(cache=True)
def _bp(chk_ptr, chk_var, var_ptr, var_edge, syndrome, llr, alpha, max_iters, hard, post):
    m = chk_ptr.size - 1
    n = var_ptr.size - 1
    for v in range(n):
        post[v] = llr[v]
        hard[v] = 0
    has_defect = False
    for c in range(m):
        if syndrome[c]:
            has_defect = True
            break
    if not has_defect:
        return 0, True
    n_edges = chk_var.size
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    for e in range(n_edges):
        v2c[e] = llr[chk_var[e]]
    for it in range(1, max_iters + 1):
        for c in range(m):
            sign = -1.0 if syndrome[c] else 1.0
            min1 = np.inf
            min2 = np.inf
            arg = -1
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                x = v2c[e]
                if x < 0:
                    sign = -sign
                a = abs(x)
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg = e
                elif a < min2:
                    min2 = a
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                s = -sign if v2c[e] < 0 else sign
                c2v[e] = alpha * s * (min2 if e == arg else min1)
        for v in range(n):
            tot = llr[v]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                tot += c2v[var_edge[k]]
            post[v] = tot
            hard[v] = 1 if tot < 0 else 0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edge[k]
                v2c[e] = tot - c2v[e]
        ok = True
        for c in range(m):
            par = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[chk_var[e]]
            if par != syndrome[c]:
                ok = False
                break
        if ok:
            return it, True
    return max_iters, False


@numba.njit(cache=True)
def _osd(chk_ptr, chk_var, n, syndrome, post, weights, order, out):
    """OSD-CS; writes the correction into ``out`` and returns (feasible, soft weight)."""
    m = chk_ptr.size - 1
    perm = np.argsort(post, kind="mergesort")
    inv = np.empty(n, dtype=np.int64)
    for i in range(n):
        inv[perm[i]] = i
    n_words = (n + 1 + 63) // 64
    A = np.zeros((m, n_words), dtype=np.uint64)
    one = np.uint64(1)
    for c in range(m):
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            pos = inv[chk_var[e]]
            A[c, pos >> 6] ^= one << np.uint64(pos & 63)
        if syndrome[c]:
            A[c, n >> 6] |= one << np.uint64(n & 63)
    rank, piv = _eliminate(A, n, True)
    sbit = one << np.uint64(n & 63)
    for r in range(rank, m):
        if A[r, n >> 6] & sbit:
            for v in range(n):
                out[v] = 0
            return False, np.inf
    base = np.zeros(rank, dtype=np.uint8)
    piv_w = np.empty(rank)
    for r in range(rank):
        base[r] = 1 if A[r, n >> 6] & sbit else 0
        piv_w[r] = weights[perm[piv[r]]]
    is_piv = np.zeros(n, dtype=np.bool_)
    for r in range(rank):
        is_piv[piv[r]] = True
    n_free = min(order, n - rank)
    free = np.empty(n_free, dtype=np.int64)
    k = 0
    for pos in range(n):
        if k == n_free:
            break
        if not is_piv[pos]:
            free[k] = pos
            k += 1
    cols = np.zeros((n_free, rank), dtype=np.uint8)
    for f in range(n_free):
        pos = free[f]
        bit = one << np.uint64(pos & 63)
        for r in range(rank):
            if A[r, pos >> 6] & bit:
                cols[f, r] = 1

    best = 0.0
    for r in range(rank):
        if base[r]:
            best += piv_w[r]
    best_a = -1
    best_b = -1
    for a in range(n_free):
        wa = weights[perm[free[a]]]
        cost = wa
        for r in range(rank):
            if base[r] ^ cols[a, r]:
                cost += piv_w[r]
        if cost < best:
            best, best_a, best_b = cost, a, -1
        for b in range(a + 1, n_free):
            cost = wa + weights[perm[free[b]]]
            for r in range(rank):
                if base[r] ^ cols[a, r] ^ cols[b, r]:
                    cost += piv_w[r]
            if cost < best:
                best, best_a, best_b = cost, a, b
    for v in range(n):
        out[v] = 0
    for r in range(rank):
        bit = base[r]
        if best_a >= 0:
            bit ^= cols[best_a, r]
        if best_b >= 0:
            bit ^= cols[best_b, r]
        out[perm[piv[r]]] = bit
    if best_a >= 0:
        out[perm[free[best_a]]] = 1
    if best_b >= 0:
        out[perm[free[best_b]]] = 1
    return True, best


@numba.njit(cache=True)
def _syndrome_of(chk_ptr, chk_var, x, out):
    m = chk_ptr.size - 1
    for c in range(m):
        par = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            par ^= x[chk_var[e]]
        out[c] = par


@numba.njit(cache=True)
def _bp_osd(chk_ptr, chk_var, var_ptr, var_edge, syndrome, llr, alpha, max_iters, order, use_osd, out, post):
    """Returns (iterations, converged, used_osd, feasible, soft_weight)."""
    n = var_ptr.size - 1
    iters, conv = _bp(chk_ptr, chk_var, var_ptr, var_edge, syndrome, llr, alpha, max_iters, out, post)
    if conv:
        w = 0.0
        for v in range(n):
            if out[v]:
                w += llr[v]
        return iters, True, False, True, w
    if not use_osd:
        return iters, False, False, True, np.inf
    feasible, w = _osd(chk_ptr, chk_var, n, syndrome, post, llr, order, out)
    return iters, False, True, feasible, w


class BpOsdDecoder:
    """BP (min-sum) with OSD-CS fallback for a fixed check matrix and priors."""

    def __init__(
        self,
        H,
        priors,
        alpha: float = DEFAULT_ALPHA,
        max_iters: int = DEFAULT_MAX_ITERS,
        osd_order: int = DEFAULT_OSD_ORDER,
        use_osd: bool = True,
    ):
        self.H = gf2.as_binary(np.atleast_2d(H))
        m, n = self.H.shape
        priors = np.broadcast_to(np.asarray(priors, dtype=np.float64), (n,))
        if np.any(priors <= 0) or np.any(priors > 0.5):
            raise ValueError("priors must lie in (0, 0.5]")
        self.llr = channel_llrs(priors)
        self.arrays = tanner_arrays(self.H)
        self.alpha = float(alpha)
        self.max_iters = int(max_iters)
        self.osd_order = int(osd_order)
        self.use_osd = use_osd

    def decode(self, syndrome) -> DecodeOutcome:
        syndrome = np.ascontiguousarray(gf2.as_binary(syndrome).ravel())
        if syndrome.size != self.H.shape[0]:
            raise ValueError("syndrome length does not match H")
        n = self.H.shape[1]
        out = np.zeros(n, dtype=np.uint8)
        post = np.zeros(n)
        iters, conv, used_osd, feasible, w = _bp_osd(
            *self.arrays, syndrome, self.llr, self.alpha, self.max_iters,
            self.osd_order, self.use_osd, out, post,
        )
        if not feasible:
            raise SyndromeMismatch("syndrome is outside the column space of H")
        check = np.empty_like(syndrome)
        _syndrome_of(self.arrays[0], self.arrays[1], out, check)
        if (conv or used_osd) and not np.array_equal(check, syndrome):
            raise SyndromeMismatch("decoder output does not reproduce the syndrome")
        return DecodeOutcome(out, bool(conv), int(iters), float(w), post, bool(used_osd))

    def config(self) -> dict:
        return {
            "variant": "bp_osd_cs",
            "alpha": self.alpha,
            "max_iters": self.max_iters,
            "lambda": self.osd_order,
        }


def bp_decode(H, syndrome, priors, max_iters: int = DEFAULT_MAX_ITERS, alpha: float = DEFAULT_ALPHA) -> DecodeOutcome:
    """Plain min-sum BP; ``converged`` tells whether the hard decision matches."""
    return BpOsdDecoder(H, priors, alpha=alpha, max_iters=max_iters, use_osd=False).decode(syndrome)


def osd_postprocess(H, syndrome, soft_reliabilities, order: int = DEFAULT_OSD_ORDER, priors=None) -> DecodeOutcome:
    """OSD-CS given per-bit posterior LLRs (lower = more likely flipped)."""
    H = gf2.as_binary(np.atleast_2d(H))
    n = H.shape[1]
    syndrome = np.ascontiguousarray(gf2.as_binary(syndrome).ravel())
    weights = channel_llrs(np.full(n, 0.1) if priors is None else priors)
    chk_ptr, chk_var, _, _ = tanner_arrays(H)
    out = np.zeros(n, dtype=np.uint8)
    feasible, w = _osd(chk_ptr, chk_var, n, syndrome, np.asarray(soft_reliabilities, dtype=np.float64), weights, order, out)
    if not feasible:
        raise SyndromeMismatch("syndrome is outside the column space of H")
    if not np.array_equal(gf2.matmul(H, out), syndrome):
        raise SyndromeMismatch("OSD output does not reproduce the syndrome")
    return DecodeOutcome(out, False, 0, float(w), None, True)


@numba.njit(cache=True)
def _sweep(chk_ptr, chk_var, var_ptr, var_edge, llr, alpha, max_iters, order, logicals, weight, start, stop):
    """Decode every weight-``weight`` error whose first index lies in [start, stop)."""
    m = chk_ptr.size - 1
    n = var_ptr.size - 1
    K = logicals.shape[0]
    idx = np.empty(weight, dtype=np.int64)
    err = np.zeros(n, dtype=np.uint8)
    synd = np.zeros(m, dtype=np.uint8)
    check = np.zeros(m, dtype=np.uint8)
    out = np.zeros(n, dtype=np.uint8)
    post = np.zeros(n)
    total = 0
    failures = 0
    mismatches = 0
    used = 0
    for i in range(weight):
        idx[i] = start + i
    while idx[0] < stop and idx[weight - 1] < n:
        for i in range(weight):
            err[idx[i]] = 1
        _syndrome_of(chk_ptr, chk_var, err, synd)
        iters, conv, used_osd, feasible, w = _bp_osd(
            chk_ptr, chk_var, var_ptr, var_edge, synd, llr, alpha, max_iters, order, True, out, post
        )
        used += used_osd
        _syndrome_of(chk_ptr, chk_var, out, check)
        bad = not feasible
        for c in range(m):
            if check[c] != synd[c]:
                bad = True
                break
        if bad:
            mismatches += 1
        fail = False
        for r in range(K):
            par = 0
            for v in range(n):
                par ^= logicals[r, v] & (err[v] ^ out[v])
            if par:
                fail = True
                break
        failures += fail
        total += 1
        for i in range(weight):
            err[idx[i]] = 0
        # next combination in lexicographic order
        j = weight - 1
        while j >= 0 and idx[j] == n - weight + j:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for t in range(j + 1, weight):
            idx[t] = idx[t - 1] + 1
    return total, failures, mismatches, used


def exhaustive_weight_sweep(
    decoder: BpOsdDecoder, opposite_logicals: np.ndarray, weight: int, start: int = 0, stop: int | None = None
) -> dict:
    """Decode every error of exactly ``weight`` (first qubit in [start, stop)).

    A decode fails when the residual error anticommutes with an opposite
    logical.  Returns counts of errors, failures, syndrome mismatches and OSD
    invocations.
    """
    n = decoder.H.shape[1]
    stop = n if stop is None else stop
    if weight == 0:
        return {"errors": 1, "failures": 0, "mismatches": 0, "osd_calls": 0}
    total, fails, mism, used = _sweep(
        *decoder.arrays, decoder.llr, decoder.alpha, decoder.max_iters, decoder.osd_order,
        np.ascontiguousarray(opposite_logicals, dtype=np.uint8), weight, start, stop,
    )
    return {"errors": int(total), "failures": int(fails), "mismatches": int(mism), "osd_calls": int(used)}
