"""CSS codes from hypergraph products of two classical codes.

Index conventions for ``hgp(code1, code2)`` with code_i of shape m_i x n_i:

* primary qubit (i, j)   -> i * n2 + j           (bit i of code1, bit j of code2)
* secondary qubit (a, b) -> n1 * n2 + a * m2 + b (check a of code1, check b of code2)
* X-check (a, j)         -> a * n2 + j
* Z-check (i, b)         -> i * m2 + b

2D coordinates are (y, x) = (code1 coordinate, code2 coordinate): code1 runs
down the rows with the origin at the upper left, code2 along the columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import gf2
from .classical import ClassicalCode, min_distance

PRIMARY, SECONDARY = 0, 1
DEFAULT_RANGE_THRESHOLD = 2.0

__all__ = [
    "CssCode",
    "EdgeCensus",
    "ProvenanceError",
    "hgp",
    "css_parameters",
    "edge_census",
    "quantum_tanner_transform",
    "validate",
    "product_logicals",
]


class ProvenanceError(ValueError):
    """The operation needs product structure the code does not carry."""


@dataclass(frozen=True, eq=False)
class CssCode:
    HX: np.ndarray
    HZ: np.ndarray
    qubit_coords: np.ndarray | None = None
    xcheck_coords: np.ndarray | None = None
    zcheck_coords: np.ndarray | None = None
    sublattice: np.ndarray | None = None
    logicals: tuple[np.ndarray, np.ndarray] | None = None
    parents: tuple[ClassicalCode, ClassicalCode] | None = None
    kind: str = "custom"
    name: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        HX = gf2.as_binary(np.atleast_2d(self.HX))
        HZ = gf2.as_binary(np.atleast_2d(self.HZ))
        if HX.shape[1] != HZ.shape[1]:
            raise ValueError("HX and HZ act on different numbers of qubits")
        object.__setattr__(self, "HX", HX)
        object.__setattr__(self, "HZ", HZ)
        if self.sublattice is None:
            object.__setattr__(self, "sublattice", np.zeros(HX.shape[1], dtype=np.uint8))

    @property
    def n_qubits(self) -> int:
        return self.HX.shape[1]

    N = n_qubits

    @property
    def K(self) -> int:
        if "K" not in self.meta:
            self.meta["K"] = self.n_qubits - gf2.rank(self.HX) - gf2.rank(self.HZ)
        return self.meta["K"]

    @property
    def has_coords(self) -> bool:
        return self.qubit_coords is not None

    def describe(self) -> str:
        return self.name or f"[[{self.n_qubits},{self.K}]]"

    def check_matrix(self, sector: str) -> np.ndarray:
        """Checks that detect errors of the given Pauli type ('X' errors -> HZ)."""
        return {"X": self.HZ, "Z": self.HX}[sector.upper()]

    def stabilizers(self, sector: str) -> np.ndarray:
        """Stabilizer generators of the given Pauli type."""
        return {"X": self.HX, "Z": self.HZ}[sector.upper()]

    def logical_ops(self, sector: str) -> np.ndarray:
        if self.logicals is None:
            raise ProvenanceError("code carries no logical basis")
        return {"X": self.logicals[0], "Z": self.logicals[1]}[sector.upper()]


@dataclass(frozen=True)
class EdgeCensus:
    total_edges: int
    long_range_edges: int
    threshold: float
    edges: list[tuple[str, int, int, float, str]]

    def histogram(self) -> dict[float, int]:
        out: dict[float, int] = {}
        for *_, rng, _ in self.edges:
            out[rng] = out.get(rng, 0) + 1
        return dict(sorted(out.items()))


def product_logicals(code1: ClassicalCode, code2: ClassicalCode) -> tuple[np.ndarray, np.ndarray]:
    """Paired logical bases supported on the primary sublattice.

    With standard-form generators (pivot columns p), logical (r, s) has
    Z = G1[r] (x) e_{p2(s)} and X = e_{p1(r)} (x) G2[s], so X_(r,s) and
    Z_(r,s) meet on the single qubit (p1(r), p2(s)) and the pairing matrix
    GX GZ^T is the identity.  Row order is r * k2 + s.
    """
    G1, p1 = gf2.standard_form(code1.generator)
    G2, p2 = gf2.standard_form(code2.generator)
    k1, k2 = G1.shape[0], G2.shape[0]
    n1, n2 = code1.n, code2.n
    n_total = n1 * n2 + code1.m * code2.m
    GX = np.zeros((k1 * k2, n_total), dtype=np.uint8)
    GZ = np.zeros((k1 * k2, n_total), dtype=np.uint8)
    for r in range(k1):
        for s in range(k2):
            row = r * k2 + s
            GZ[row, : n1 * n2] = np.kron(G1[r], np.eye(n2, dtype=np.uint8)[p2[s]])
            GX[row, : n1 * n2] = np.kron(np.eye(n1, dtype=np.uint8)[p1[r]], G2[s])
    return GX, GZ


def generic_logicals(HX: np.ndarray, HZ: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symplectically paired logical bases for any CSS code (GX GZ^T = I)."""
    def complement(stab, checks):
        ker = gf2.nullspace(checks) if checks.shape[0] else np.eye(checks.shape[1], dtype=np.uint8)
        base = stab.copy()
        r = gf2.rank(base) if base.shape[0] else 0
        out = []
        for v in ker:
            trial = np.vstack([base, v[None]]) if base.shape[0] else v[None]
            if gf2.rank(trial) > r:
                base, r = trial, r + 1
                out.append(v)
        return np.array(out, dtype=np.uint8).reshape(-1, checks.shape[1])

    LX = complement(HX, HZ)
    LZ = complement(HZ, HX)
    pairing = gf2.matmul(LX, LZ.T)
    LZ = gf2.matmul(gf2.inverse(pairing).T, LZ) if LX.shape[0] else LZ
    return LX, LZ


def hgp(code1: ClassicalCode, code2: ClassicalCode, name: str = "") -> CssCode:
    H1, H2 = code1.H, code2.H
    m1, n1 = H1.shape
    m2, n2 = H2.shape
    I = lambda k: np.eye(k, dtype=np.uint8)  # noqa: E731
    HX = np.hstack([np.kron(H1, I(n2)), np.kron(I(m1), H2.T)]).astype(np.uint8)
    HZ = np.hstack([np.kron(I(n1), H2), np.kron(H1.T, I(m2))]).astype(np.uint8)

    b1, c1 = code1.bit_coords, code1.check_coords
    b2, c2 = code2.bit_coords, code2.check_coords
    grid = lambda ys, xs: np.array([(y, x) for y in ys for x in xs], dtype=float).reshape(-1, 2)  # noqa: E731
    qubit_coords = np.vstack([grid(b1, b2), grid(c1, c2)])
    sub = np.concatenate([np.full(n1 * n2, PRIMARY), np.full(m1 * m2, SECONDARY)]).astype(np.uint8)

    k1t = m1 - gf2.rank(H1)
    k2t = m2 - gf2.rank(H2)
    if k1t * k2t == 0:
        logicals = product_logicals(code1, code2)
    else:
        logicals = generic_logicals(HX, HZ)
    label = name or f"HGP({code1.describe()}, {code2.describe()})"
    return CssCode(
        HX,
        HZ,
        qubit_coords=qubit_coords,
        xcheck_coords=grid(c1, b2),
        zcheck_coords=grid(b1, c2),
        sublattice=sub,
        logicals=logicals,
        parents=(code1, code2),
        kind="hgp",
        name=label,
        meta={"canonical_logicals": k1t * k2t == 0},
    )


def _transpose_distance(code: ClassicalCode) -> float:
    t = ClassicalCode(code.H.T.copy())
    return math.inf if t.k == 0 else min_distance(t)


def css_parameters(code: CssCode) -> tuple[int, int, float | None]:
    """(N, K, D_formula); K by rank, D from parent distances when available."""
    N, K = code.n_qubits, code.K
    if code.parents is None or code.kind != "hgp":
        return N, K, None
    c1, c2 = code.parents
    dists = [min_distance(c1) if c1.k else math.inf, min_distance(c2) if c2.k else math.inf]
    dists += [_transpose_distance(c1), _transpose_distance(c2)]
    D = min(dists)
    return N, K, (int(D) if D != math.inf else None)


def edge_census(code: CssCode, range_threshold: float = DEFAULT_RANGE_THRESHOLD) -> EdgeCensus:
    """Count Tanner edges and those whose Chebyshev length exceeds the threshold."""
    if not code.has_coords or code.xcheck_coords is None or code.zcheck_coords is None:
        raise ValueError("edge census needs qubit and check coordinates")
    edges = []
    lr = 0
    for sector, H, ccoords in (("X", code.HX, code.xcheck_coords), ("Z", code.HZ, code.zcheck_coords)):
        rows, cols = np.nonzero(H)
        spans = np.abs(ccoords[rows] - code.qubit_coords[cols]).max(axis=1) if rows.size else []
        for r, q, span in zip(rows.tolist(), cols.tolist(), np.asarray(spans).tolist()):
            tag = "long_range" if span > range_threshold else "local"
            lr += tag == "long_range"
            edges.append((sector, r, q, float(span), tag))
    return EdgeCensus(int(code.HX.sum() + code.HZ.sum()), lr, range_threshold, edges)


def quantum_tanner_transform(code: CssCode) -> CssCode:
    """Gauge-fix every secondary qubit to get a code on the primary sublattice.

    Secondary qubits are fixed in a checkerboard pattern: qubit (a, b) with
    (rank of a + rank of b) even is fixed in Z (the X-checks touching it are
    merged onto one pivot check, which is dropped), odd ones are fixed in X
    likewise.  Ranks are the positions of the checks along each parent's 1D
    layout and qubits are processed in lexicographic coordinate order.
    """
    if code.kind != "hgp" or code.parents is None:
        raise ProvenanceError("quantum Tanner transform needs an HGP code")
    c1, c2 = code.parents
    n1, n2, m1, m2 = c1.n, c2.n, c1.m, c2.m
    rank1 = np.argsort(np.argsort(c1.check_coords, kind="stable"), kind="stable")
    rank2 = np.argsort(np.argsort(c2.check_coords, kind="stable"), kind="stable")

    HX = [row.copy() for row in code.HX]
    HZ = [row.copy() for row in code.HZ]
    xc = [[tuple(p)] for p in code.xcheck_coords]
    zc = [[tuple(p)] for p in code.zcheck_coords]

    order = sorted(
        ((a, b) for a in range(m1) for b in range(m2)),
        key=lambda ab: (c1.check_coords[ab[0]], c2.check_coords[ab[1]]),
    )
    for a, b in order:
        q = n1 * n2 + a * m2 + b
        merge_rows, merge_coords = (HX, xc) if (rank1[a] + rank2[b]) % 2 == 0 else (HZ, zc)
        touching = [r for r, row in enumerate(merge_rows) if row[q]]
        if not touching:
            continue
        pivot = touching[0]
        for r in touching[1:]:
            merge_rows[r] ^= merge_rows[pivot]
            merge_coords[r] = merge_coords[r] + merge_coords[pivot]
        del merge_rows[pivot]
        del merge_coords[pivot]

    keep = slice(0, n1 * n2)

    def finish(rows, coords):
        mat = np.array(rows, dtype=np.uint8).reshape(-1, code.n_qubits)[:, keep]
        nz = mat.any(axis=1)
        pts = np.array([np.mean(c, axis=0) for c in coords]).reshape(-1, 2)
        return mat[nz], pts[nz]

    new_hx, new_xc = finish(HX, xc)
    new_hz, new_zc = finish(HZ, zc)
    logicals = None
    if code.logicals is not None:
        GX, GZ = code.logicals
        if not (GX[:, n1 * n2 :].any() or GZ[:, n1 * n2 :].any()):
            logicals = (GX[:, keep].copy(), GZ[:, keep].copy())
    out = CssCode(
        new_hx,
        new_hz,
        qubit_coords=code.qubit_coords[keep].copy(),
        xcheck_coords=new_xc,
        zcheck_coords=new_zc,
        sublattice=np.zeros(n1 * n2, dtype=np.uint8),
        logicals=logicals,
        parents=code.parents,
        kind="tanner",
        name=f"Tanner({code.describe()})",
    )
    if gf2.matmul(out.HZ, out.HX.T).any():
        raise AssertionError("Tanner transform produced anticommuting checks")
    if out.K != code.K:
        raise AssertionError(f"Tanner transform changed K: {code.K} -> {out.K}")
    if logicals is None:
        object.__setattr__(out, "logicals", generic_logicals(out.HX, out.HZ))
    return out


def validate(code: CssCode) -> list[str]:
    """Every violated CSS invariant, as human-readable strings (empty = ok)."""
    problems = []
    if code.n_qubits == 0:
        return problems
    comm = gf2.matmul(code.HZ, code.HX.T)
    for z, x in zip(*np.nonzero(comm)):
        problems.append(f"Z-check {z} anticommutes with X-check {x}")
    if code.logicals is not None:
        GX, GZ = code.logicals
        for r, c in zip(*np.nonzero(gf2.matmul(code.HX, GZ.T))):
            problems.append(f"logical Z {c} anticommutes with X-check {r}")
        for r, c in zip(*np.nonzero(gf2.matmul(code.HZ, GX.T))):
            problems.append(f"logical X {c} anticommutes with Z-check {r}")
        if GX.shape[0] != code.K or GZ.shape[0] != code.K:
            problems.append(f"logical basis has {GX.shape[0]}/{GZ.shape[0]} rows, K = {code.K}")
        elif code.K and gf2.rank(gf2.matmul(GX, GZ.T)) != code.K:
            problems.append("logical pairing matrix is singular")
    return problems
