"""Sliding-window decoding over repeated noisy syndrome rounds.

Round r measures s_r = H E_r + m_r, where E_r is the accumulated data error
and m_r the measurement flips.  A window starting at round t decodes the
detection vectors

    D_t = s_t + H C        (C = corrections committed so far)
    D_r = s_r + s_{r-1}    for t < r < t + w

on the extended matrix whose block row r holds H over the round-r data
variables, I over the round-r measurement variables and I over the
round-(r-1) measurement variables.  Only the round-t data correction is
committed; the window covering the last round commits all of its rounds, so
a window at least as long as the history is whole-history decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import gf2
from .bp_osd import BpOsdDecoder
from .matching import MatchingDecoder

__all__ = ["window_matrix", "SlidingWindowDecoder", "SpacetimeInstance", "sliding_window_decode"]


def window_matrix(H, w: int) -> np.ndarray:
    """Extended check matrix for w rounds: [data blocks | measurement blocks]."""
    H = gf2.as_binary(np.atleast_2d(H))
    m, n = H.shape
    A = np.zeros((w * m, w * n + w * m), dtype=np.uint8)
    eye = np.eye(m, dtype=np.uint8)
    for r in range(w):
        rows = slice(r * m, (r + 1) * m)
        A[rows, r * n : (r + 1) * n] = H
        A[rows, w * n + r * m : w * n + (r + 1) * m] = eye
        if r:
            A[rows, w * n + (r - 1) * m : w * n + r * m] = eye
    return A


class SlidingWindowDecoder:
    """Decodes windows of up to ``w`` rounds with BP+OSD or matching.

    When every measurement prior is zero the rounds decouple and each round
    is decoded on its own, so the output equals per-round decoding exactly.
    """

    def __init__(self, H, w: int, data_priors, meas_priors, decoder: str = "bp_osd", floor: float = 1e-9, **options):
        if w < 1:
            raise ValueError("window size must be >= 1")
        self.H = gf2.as_binary(np.atleast_2d(H))
        m, n = self.H.shape
        self.w = w
        self.data_priors = np.broadcast_to(np.asarray(data_priors, dtype=float), (n,)).copy()
        self.meas_priors = np.broadcast_to(np.asarray(meas_priors, dtype=float), (m,)).copy()
        self.noiseless = not np.any(self.meas_priors > 0)
        if decoder not in ("bp_osd", "mwpm"):
            raise ValueError(f"unknown decoder {decoder!r}")
        self.kind = decoder
        self.floor = floor
        self.options = options
        self._cache: dict[int, object] = {}

    def _decoder(self, length: int):
        if length not in self._cache:
            if self.noiseless:
                A, priors = self.H, self.data_priors
            else:
                A = window_matrix(self.H, length)
                priors = np.concatenate([np.tile(self.data_priors, length), np.tile(self.meas_priors, length)])
            priors = np.clip(priors, self.floor, 0.5)
            if self.kind == "bp_osd":
                self._cache[length] = BpOsdDecoder(A, priors, **self.options)
            else:
                self._cache[length] = MatchingDecoder(A, priors, **self.options)
        return self._cache[length]

    def decode_rounds(self, detections) -> np.ndarray:
        """Data corrections (rounds x n) explaining the window's detection vectors."""
        detections = [gf2.as_binary(d).ravel() for d in detections]
        L = len(detections)
        n = self.H.shape[1]
        if not 1 <= L <= self.w:
            raise ValueError(f"window holds 1..{self.w} rounds, got {L}")
        if self.noiseless:
            # measurement flips are impossible, so differences are pure data syndromes
            dec = self._decoder(1)
            return np.array([dec.decode(d).correction for d in detections], dtype=np.uint8)
        out = self._decoder(L).decode(np.concatenate(detections)).correction
        return out[: L * n].reshape(L, n)

    def commit(self, detections, final: bool) -> np.ndarray:
        rounds = self.decode_rounds(detections)
        return np.bitwise_xor.reduce(rounds, axis=0) if final else rounds[0]


@dataclass
class SpacetimeInstance:
    H: np.ndarray
    window: int
    rounds: list[np.ndarray]
    data_priors: np.ndarray | float = 0.01
    meas_priors: np.ndarray | float = 0.01
    options: dict = field(default_factory=dict)

    @property
    def extended_matrix(self) -> np.ndarray:
        return window_matrix(self.H, min(self.window, len(self.rounds)))


def sliding_window_decode(instance: SpacetimeInstance, decoder: str = "bp_osd") -> list[np.ndarray]:
    """Committed data correction at each step (zeros after the final window)."""
    H = gf2.as_binary(instance.H)
    R = len(instance.rounds)
    dec = SlidingWindowDecoder(H, instance.window, instance.data_priors, instance.meas_priors, decoder, **instance.options)
    rounds = [gf2.as_binary(s).ravel() for s in instance.rounds]
    committed = np.zeros(H.shape[1], dtype=np.uint8)
    out = [np.zeros(H.shape[1], dtype=np.uint8) for _ in range(R)]
    for t in range(R):
        hi = min(t + instance.window, R)
        detections = [rounds[t] ^ gf2.matmul(H, committed)]
        detections += [rounds[r] ^ rounds[r - 1] for r in range(t + 1, hi)]
        corr = dec.commit(detections, final=hi == R)
        out[t] = corr
        committed ^= corr
        if hi == R:
            break
    return out
