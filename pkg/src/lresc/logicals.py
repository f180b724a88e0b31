"""Logical operators of product codes: bases, tunnelling, strings, distance.

Sectors name the Pauli type of an operator: an ``"X"`` logical is an X-type
operator (it commutes with the Z-checks HZ and is paired with Z logicals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import gf2
from .classical import BudgetExceeded
from .hgp import CssCode, ProvenanceError, product_logicals

EXHAUSTIVE_BUDGET = 200_000_000

__all__ = [
    "PauliString",
    "LogicalBasis",
    "TunnelingReport",
    "canonical_logicals",
    "tunneling_check",
    "segment_string",
    "string_stabilizer",
    "contractible_loop",
    "logical_weight_search",
    "distance_lower_bound_exhaustive",
    "is_logical",
]


@dataclass(frozen=True, eq=False)
class PauliString:
    x_part: np.ndarray
    z_part: np.ndarray

    def __post_init__(self):
        if self.x_part.shape != self.z_part.shape:
            raise ValueError("x and z parts differ in length")

    @classmethod
    def of(cls, sector: str, vec: np.ndarray) -> PauliString:
        zero = np.zeros_like(vec)
        return cls(vec, zero) if sector.upper() == "X" else cls(zero, vec)

    @property
    def weight(self) -> int:
        return int((self.x_part | self.z_part).sum())

    def support(self) -> list[int]:
        return np.nonzero(self.x_part | self.z_part)[0].tolist()


@dataclass(frozen=True, eq=False)
class LogicalBasis:
    GX: np.ndarray
    GZ: np.ndarray

    @property
    def K(self) -> int:
        return self.GX.shape[0]

    def pairing(self) -> np.ndarray:
        return gf2.matmul(self.GX, self.GZ.T)

    def check(self, code: CssCode) -> None:
        if gf2.matmul(code.HX, self.GZ.T).any():
            raise AssertionError("a Z logical anticommutes with an X-check")
        if gf2.matmul(code.HZ, self.GX.T).any():
            raise AssertionError("an X logical anticommutes with a Z-check")
        if self.K != code.K or gf2.rank(self.pairing()) != self.K:
            raise AssertionError("logical pairing is not invertible")


def _lresc_parents(code: CssCode):
    if code.parents is None or code.kind not in ("hgp", "tanner"):
        raise ProvenanceError("operation needs a product code")
    return code.parents


def canonical_logicals(code: CssCode) -> LogicalBasis:
    """Product logicals Z_(r,s) = G1[r] (x) e_p(s), X_(r,s) = e_p(r) (x) G2[s]."""
    c1, c2 = _lresc_parents(code)
    if c1.m - gf2.rank(c1.H) and c2.m - gf2.rank(c2.H):
        raise ProvenanceError("parents with redundant checks have extra logicals")
    GX, GZ = product_logicals(c1, c2)
    n = code.n_qubits
    basis = LogicalBasis(GX[:, :n].copy(), GZ[:, :n].copy())
    basis.check(code)
    return basis


def is_logical(code: CssCode, sector: str, vec) -> bool:
    """Zero syndrome and not a stabilizer (anticommutes with some opposite logical)."""
    vec = gf2.as_binary(vec)
    if gf2.matmul(code.check_matrix(sector), vec).any():
        return False
    other = code.logical_ops("Z" if sector.upper() == "X" else "X")
    return bool(gf2.matmul(other, vec).any())


# ---------------------------------------------------------------------------
# tunnelling through long-range boundaries


@dataclass
class TunnelingReport:
    sector: str
    axis: str
    index: int
    single_patch: list[dict[str, Any]] = field(default_factory=list)
    codeword_strings: list[dict[str, Any]] = field(default_factory=list)
    relocations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not (self.single_patch or self.codeword_strings or self.relocations)

    @property
    def ok(self) -> bool:
        return (
            all(e["confined"] for e in self.single_patch)
            and all(e["syndrome_zero"] for e in self.codeword_strings)
            and all(e["equivalent"] for e in self.relocations)
        )


def _geometry(code: CssCode, sector: str, axis: str):
    """Which parent the string runs along and which parent indexes its line."""
    c1, c2 = _lresc_parents(code)
    sector, axis = sector.upper(), axis.lower()
    if sector not in ("X", "Z") or axis not in ("horizontal", "vertical"):
        raise ValueError("sector must be X|Z and axis horizontal|vertical")
    # 'horizontal' crosses horizontal boundaries: the string runs down code1
    along, across = (c1, c2) if axis == "horizontal" else (c2, c1)
    return c1, c2, along, across


def segment_string(code: CssCode, axis: str, segment: int, line: int, segments=None) -> np.ndarray:
    """Primary-sublattice string covering the given outer segments of one line.

    For axis 'horizontal' the string runs down column ``line`` through the
    repetition segments of code1; for 'vertical' it runs along row ``line``.
    """
    c1, c2 = code.parents
    along = c1 if axis == "horizontal" else c2
    c = along.concat.c
    v = np.zeros(along.n, dtype=np.uint8)
    for s in [segment] if segments is None else segments:
        v[s * c : (s + 1) * c] = 1
    out = np.zeros(code.n_qubits, dtype=np.uint8)
    if axis == "horizontal":
        e = np.zeros(c2.n, dtype=np.uint8)
        e[line] = 1
        out[: c1.n * c2.n] = np.kron(v, e)
    else:
        e = np.zeros(c1.n, dtype=np.uint8)
        e[line] = 1
        out[: c1.n * c2.n] = np.kron(e, v)
    return out


def tunneling_check(code: CssCode, sector: str, axis: str, patch_row_or_col: int) -> TunnelingReport:
    """Check the tunnelling rules for strings of one sector along one axis.

    The string line is the first bit of segment ``patch_row_or_col`` of the
    transverse parent.  Verifies (a) a single-segment string is flagged only
    by long-range checks, (b) strings patterned on each outer codeword have
    zero syndrome, and (c) multiplying a codeword string by the stabilizers
    built from an outer check moves it onto the other segments of that check.
    """
    c1, c2, along, across = _geometry(code, sector, axis)
    report = TunnelingReport(sector.upper(), axis.lower(), patch_row_or_col)
    if along.concat is None or across.concat is None or code.kind != "hgp":
        return report
    outer = along.concat.outer
    c_across = across.concat.c
    line = patch_row_or_col * c_across
    checks = code.check_matrix(sector)
    n1, n2, m1, m2 = c1.n, c2.n, c1.m, c2.m

    def check_is_long_range(row: int) -> bool:
        # Z-type strings are flagged by X-checks (a, j); X-type by Z-checks (i, b)
        if sector.upper() == "Z":
            a, j = divmod(row, n2)
            return a < c1.concat.outer.m if axis == "horizontal" else False
        i, b = divmod(row, m2)
        return b < c2.concat.outer.m if axis == "vertical" else False

    for s in range(outer.n):
        vec = segment_string(code, axis, s, line)
        synd = np.nonzero(gf2.matmul(checks, vec))[0].tolist()
        report.single_patch.append(
            {
                "segment": s,
                "syndrome": synd,
                "confined": bool(synd) and all(check_is_long_range(r) for r in synd),
            }
        )
    gens = outer.generator
    for r, row in enumerate(gens):
        segs = np.nonzero(row)[0].tolist()
        vec = segment_string(code, axis, 0, line, segments=segs)
        report.codeword_strings.append(
            {
                "row": r,
                "segments": segs,
                "extra_patches": len(segs) - 1,
                "syndrome_zero": not gf2.matmul(checks, vec).any(),
            }
        )
    # sideways moves: the transverse parent's outer checks touching this line
    stabs = code.stabilizers(sector)
    across_outer = across.concat.outer
    seg = patch_row_or_col
    string = segment_string(code, axis, 0, line, segments=np.nonzero(gens[0])[0].tolist())
    for a in np.nonzero(across_outer.H[:, seg])[0].tolist():
        if across.concat.index(a, seg) != 0:
            continue
        moved = np.zeros_like(string)
        for t in np.nonzero(across_outer.H[a])[0].tolist():
            if t != seg:
                moved ^= segment_string(
                    code, axis, 0, t * c_across + across.concat.index(a, t),
                    segments=np.nonzero(gens[0])[0].tolist(),
                )
        report.relocations.append(
            {
                "outer_check": a,
                "to_segments": [t for t in np.nonzero(across_outer.H[a])[0].tolist() if t != seg],
                "equivalent": gf2.rowspace_contains(stabs, string ^ moved),
            }
        )
    return report


# ---------------------------------------------------------------------------
# stabilizer strings


def string_stabilizer(code: CssCode, h_row: int, g_row: int, sector: str) -> PauliString:
    """Primary-sublattice stabilizer built from a parent check and a codeword.

    Z type: codeword ``g_row`` of code1 down the rows times check ``h_row``
    of code2 along the columns, i.e. G1[g] (x) H2[h].  X type: H1[h] (x) G2[g].
    Rows are 0-indexed.
    """
    c1, c2 = _lresc_parents(code)
    sector = sector.upper()
    if sector == "Z":
        G, H = c1.generator, c2.H
    elif sector == "X":
        G, H = c2.generator, c1.H
    else:
        raise ValueError("sector must be X or Z")
    if not (0 <= g_row < G.shape[0] and 0 <= h_row < H.shape[0]):
        raise IndexError("row index out of range")
    vec = np.zeros(code.n_qubits, dtype=np.uint8)
    prim = np.kron(G[g_row], H[h_row]) if sector == "Z" else np.kron(H[h_row], G[g_row])
    vec[: c1.n * c2.n] = prim
    if gf2.matmul(code.check_matrix(sector), vec).any():
        raise AssertionError("string stabilizer has nonzero syndrome")
    if not gf2.rowspace_contains(code.stabilizers(sector), vec):
        raise AssertionError("string stabilizer is not in the stabilizer group")
    return PauliString.of(sector, vec)


def contractible_loop(code: CssCode, h_row: int, columns, sector: str = "X") -> PauliString:
    """Product of the checks (h_row, j) for j in ``columns`` (X) or (i, h_row) for i (Z).

    With h_row an outer check of code1 this is a closed loop that passes
    through the long-range boundaries of that check.
    """
    c1, c2 = _lresc_parents(code)
    sector = sector.upper()
    vec = np.zeros(code.n_qubits, dtype=np.uint8)
    if sector == "X":
        for j in columns:
            vec ^= code.HX[h_row * c2.n + j]
    else:
        for i in columns:
            vec ^= code.HZ[i * c2.m + h_row]
    if gf2.matmul(code.check_matrix(sector), vec).any():
        raise AssertionError("loop has nonzero syndrome")
    return PauliString.of(sector, vec)


# ---------------------------------------------------------------------------
# distance


def _int_rows(m: np.ndarray) -> list[int]:
    return gf2.int_rows(m) if m.shape[0] else []


def _popcount(x: int) -> int:
    return x.bit_count()


@dataclass(frozen=True)
class WeightSearchResult:
    weight: int
    witness: np.ndarray
    restarts: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "weight": self.weight,
            "support": np.nonzero(self.witness)[0].tolist(),
            "restarts": self.restarts,
        }


def logical_weight_search(
    code: CssCode, sector: str, budget: int = 64, seed: int | None = 0
) -> WeightSearchResult:
    """Upper bound on the sector distance by greedy stabilizer-coset reduction.

    Each restart takes a random nonzero combination of logical representatives
    (the basis rows themselves first), adds a random subset of stabilizers and
    then sweeps the stabilizer rows in weight order, accepting strict weight
    decreases until none remain.  The best witness is verified before return.
    """
    sector = sector.upper()
    logicals = _int_rows(code.logical_ops(sector))
    stabs_m = code.stabilizers(sector)
    order = np.argsort(stabs_m.sum(axis=1), kind="stable")
    stabs = [s for s in _int_rows(stabs_m[order]) if s]
    rng = np.random.default_rng(seed)
    n = code.n_qubits
    best, best_w = 0, math.inf

    def reduce(v: int) -> int:
        improved = True
        while improved:
            improved = False
            for s in stabs:
                u = v ^ s
                if _popcount(u) < _popcount(v):
                    v, improved = u, True
        return v

    starts = list(logicals)
    for t in range(max(budget, len(starts))):
        if t < len(starts):
            v = starts[t]
        else:
            coeffs = rng.integers(0, 2, len(logicals))
            if not coeffs.any():
                coeffs[rng.integers(len(logicals))] = 1
            v = 0
            for c, lrow in zip(coeffs, logicals):
                if c:
                    v ^= lrow
            for s, c in zip(stabs, rng.random(len(stabs)) < 0.5):
                if c:
                    v ^= s
        v = reduce(v)
        if _popcount(v) < best_w:
            best, best_w = v, _popcount(v)
    witness = gf2.int_to_vector(best, n)
    if not is_logical(code, sector, witness):
        raise AssertionError("weight search produced a non-logical witness")
    return WeightSearchResult(int(best_w), witness, max(budget, len(starts)))


def distance_lower_bound_exhaustive(code: CssCode, sector: str, max_weight: int) -> bool:
    """Certify that no logical of the sector has weight <= max_weight.

    Enumerates every (t-1)-subset of qubits and looks up the last qubit whose
    check column cancels the partial syndrome, so only zero-syndrome
    candidates of weight t are visited; each must commute with every
    opposite logical (be a stabilizer).  Returns True when certified and
    raises if a low-weight logical exists.
    """
    sector = sector.upper()
    n = code.n_qubits
    if max_weight <= 0:
        return True
    total = sum(math.comb(n, t - 1) for t in range(1, max_weight + 1))
    if total > EXHAUSTIVE_BUDGET:
        raise BudgetExceeded(f"{total} candidates exceed budget {EXHAUSTIVE_BUDGET}")
    cols = gf2.int_rows(code.check_matrix(sector).T)
    opposite = _int_rows(code.logical_ops("Z" if sector == "X" else "X"))
    by_syndrome: dict[int, list[int]] = {}
    for j, s in enumerate(cols):
        by_syndrome.setdefault(s, []).append(j)

    def is_stabilizer(support: int) -> bool:
        return all(_popcount(support & lrow) % 2 == 0 for lrow in opposite)

    def walk(start: int, depth: int, synd: int, support: int) -> None:
        # place the final qubit through the syndrome lookup
        for j in by_syndrome.get(synd, ()):
            if j >= start and not is_stabilizer(support | (1 << j)):
                raise AssertionError(f"logical of weight {depth + 1}: {support | (1 << j):#x}")
        if depth + 1 < max_weight:
            for j in range(start, n):
                walk(j + 1, depth + 1, synd ^ cols[j], support | (1 << j))

    walk(0, 0, 0, 0)
    return True
