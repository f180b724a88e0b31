"""Classical parent codes: constructions, concatenation, audits.

A :class:`ClassicalCode` carries its parity-check matrix, an optional
generator matrix, a 1D embedding (bits on integer positions, checks on
half-integers for the built-in layouts) and the set of Tanner edges tagged
long-range under that embedding.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numba
import numpy as np

from . import gf2

LONG_RANGE_THRESHOLD = 2.0
ENUMERATION_BUDGET = 10_000_000
MAX_DISTANCE_K = 24

__all__ = [
    "ClassicalCode",
    "ConcatSpec",
    "BudgetExceeded",
    "repetition",
    "hadamard_family",
    "random_ldpc",
    "from_parity_checks",
    "code_523",
    "code_624",
    "concatenate",
    "min_distance",
    "rebalance_attachments",
    "decompose_checks",
    "expansion_audit",
    "confinement_probe",
    "domain_wall_profile",
    "codewords",
    "to_alist",
    "from_alist",
]


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


@dataclass(frozen=True, eq=False)
class ClassicalCode:
    H: np.ndarray
    G: np.ndarray | None = None
    bit_coords: np.ndarray | None = None
    check_coords: np.ndarray | None = None
    name: str = ""
    concat: ConcatSpec | None = None
    threshold: float = LONG_RANGE_THRESHOLD

    def __post_init__(self):
        H = gf2.as_binary(np.atleast_2d(self.H))
        if H.ndim != 2:
            raise ValueError("H must be a matrix")
        object.__setattr__(self, "H", H)
        m, n = H.shape
        if self.bit_coords is None:
            object.__setattr__(self, "bit_coords", np.arange(n, dtype=float))
        if self.check_coords is None:
            coords = np.array(
                [self.bit_coords[np.nonzero(row)[0]].mean() if row.any() else 0.0 for row in H],
                dtype=float,
            )
            object.__setattr__(self, "check_coords", coords)
        if len(self.bit_coords) != n or len(self.check_coords) != m:
            raise ValueError("coordinate arrays do not match H")
        if self.G is not None:
            G = gf2.as_binary(np.atleast_2d(self.G))
            if G.shape[1] != n:
                raise ValueError("G and H widths differ")
            if gf2.matmul(H, G.T).any():
                raise ValueError("H G^T != 0")
            if gf2.rank(G) != n - gf2.rank(H):
                raise ValueError("G does not span ker(H)")
            object.__setattr__(self, "G", G)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @cached_property
    def k(self) -> int:
        return self.n - gf2.rank(self.H)

    @cached_property
    def generator(self) -> np.ndarray:
        """G if supplied, else a basis of ker(H) in reduced row echelon form."""
        if self.G is not None:
            return self.G
        ns = gf2.nullspace(self.H)
        if ns.shape[0] == 0:
            return ns
        return gf2.standard_form(ns)[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Tanner edges as (check, bit), row-major."""
        return gf2.positions(self.H)

    def edge_range(self, check: int, bit: int) -> float:
        return abs(float(self.check_coords[check]) - float(self.bit_coords[bit]))

    @property
    def long_range_edges(self) -> list[tuple[int, int]]:
        return [e for e in self.edges if self.edge_range(*e) > self.threshold]

    @property
    def edge_tags(self) -> dict[tuple[int, int], str]:
        lr = set(self.long_range_edges)
        return {e: ("long_range" if e in lr else "local") for e in self.edges}

    @property
    def transpose(self) -> ClassicalCode:
        return ClassicalCode(self.H.T.copy(), name=f"{self.name}^T" if self.name else "")

    def describe(self) -> str:
        return self.name or f"[{self.n},{self.k}]"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "H": to_alist(self.H),
            "G": self.generator.tolist(),
            "bit_coords": self.bit_coords.tolist(),
            "check_coords": self.check_coords.tolist(),
            "threshold": self.threshold,
            "edges": [
                {"check": c, "bit": b, "tag": tag} for (c, b), tag in self.edge_tags.items()
            ],
        }
        if self.concat is not None:
            out["concat"] = self.concat.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ClassicalCode:
        concat = ConcatSpec.from_dict(d["concat"]) if d.get("concat") else None
        G = np.array(d["G"], dtype=np.uint8) if d.get("G") else None
        return cls(
            H=from_alist(d["H"]),
            G=G,
            bit_coords=np.array(d["bit_coords"], dtype=float),
            check_coords=np.array(d["check_coords"], dtype=float),
            name=d.get("name", ""),
            concat=concat,
            threshold=d.get("threshold", LONG_RANGE_THRESHOLD),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True, eq=False)
class ConcatSpec:
    """Outer code whose bits are length-``c`` repetition segments.

    ``attach`` maps an outer Tanner edge (check, bit) to the inner index of the
    segment bit that carries it; missing edges attach at index 0.
    """

    outer: ClassicalCode
    c: int
    attach: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("repetition length c must be >= 1")
        edges = set(self.outer.edges)
        for edge, idx in self.attach.items():
            if edge not in edges:
                raise ValueError(f"{edge} is not an outer Tanner edge")
            if not 0 <= idx < self.c:
                raise ValueError(f"attach index {idx} outside [0, {self.c})")

    def index(self, check: int, bit: int) -> int:
        return self.attach.get((check, bit), 0)

    @property
    def is_default(self) -> bool:
        return all(v == 0 for v in self.attach.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "outer": self.outer.to_dict(),
            "c": self.c,
            "attach": [[a, b, i] for (a, b), i in sorted(self.attach.items())],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ConcatSpec:
        return cls(
            outer=ClassicalCode.from_dict(d["outer"]),
            c=int(d["c"]),
            attach={(a, b): i for a, b, i in d["attach"]},
        )


# ---------------------------------------------------------------------------
# constructions


def repetition(c: int) -> ClassicalCode:
    if c < 1:
        raise ValueError("repetition length must be >= 1")
    H = np.zeros((c - 1, c), dtype=np.uint8)
    for t in range(c - 1):
        H[t, t] = H[t, t + 1] = 1
    return ClassicalCode(
        H,
        G=np.ones((1, c), dtype=np.uint8),
        bit_coords=np.arange(c, dtype=float),
        check_coords=np.arange(c - 1, dtype=float) + 0.5,
        name=f"rep({c})",
    )


def from_parity_checks(H, G=None, name: str = "") -> ClassicalCode:
    return ClassicalCode(np.asarray(H, dtype=np.uint8), G=G, name=name)


def code_523() -> ClassicalCode:
    """The [5,2,3] outer code used for the anyon and weight-balancing pictures."""
    H = [[1, 1, 0, 1, 0], [0, 1, 0, 0, 1], [0, 0, 1, 1, 0]]
    G = [[1, 0, 1, 1, 0], [0, 1, 1, 1, 1]]
    return from_parity_checks(H, G=np.array(G, dtype=np.uint8), name="[5,2,3]")


def code_624() -> ClassicalCode:
    """A [6,2,4] code with four independent weight-3 checks.

    Its codewords are 111100, 001111 and 110011.
    """
    H = [
        [1, 0, 1, 0, 1, 0],
        [1, 0, 0, 1, 1, 0],
        [0, 1, 1, 0, 1, 0],
        [0, 1, 1, 0, 0, 1],
    ]
    G = [[1, 1, 1, 1, 0, 0], [0, 0, 1, 1, 1, 1]]
    return from_parity_checks(H, G=np.array(G, dtype=np.uint8), name="[6,2,4]")


def hadamard_family(k: int) -> ClassicalCode:
    """Shortened Hadamard (simplex) code [2^k - 1, k, 2^(k-1)].

    Column j of G is the binary expansion of j + 1, so k = 2 gives
    G = (101; 011) and H = (111).
    """
    if not 2 <= k <= 5:
        raise ValueError("hadamard_family supports 2 <= k <= 5")
    n = 2**k - 1
    G = np.array([[((j + 1) >> r) & 1 for j in range(n)] for r in range(k)], dtype=np.uint8)
    H = gf2.rref(gf2.nullspace(G))[0]
    return ClassicalCode(H, G=G, name=f"hadamard({k})")


def random_ldpc(
    n: int, m: int, col_weight: int, seed: int | None = None, max_attempts: int = 10_000
) -> ClassicalCode:
    """Regular LDPC code from a configuration model without double edges."""
    if col_weight < 3:
        raise ValueError("col_weight must be >= 3")
    if (col_weight * n) % m:
        raise ValueError("col_weight * n must be divisible by m")
    row_weight = col_weight * n // m
    if row_weight > n:
        raise ValueError("row weight exceeds n")
    rng = np.random.default_rng(seed)
    bit_sockets = np.repeat(np.arange(n), col_weight)
    check_sockets = np.repeat(np.arange(m), row_weight)
    for _ in range(max_attempts):
        perm = rng.permutation(check_sockets)
        pairs = set(zip(perm.tolist(), bit_sockets.tolist()))
        if len(pairs) == len(bit_sockets):
            H = gf2.from_positions(m, n, pairs)
            return ClassicalCode(H, name=f"ldpc({n},{m},{col_weight};seed={seed})")
    raise RuntimeError(f"no simple ({col_weight},{row_weight})-regular graph in {max_attempts} draws")


def _concat_layout(outer: ClassicalCode, c: int, attach_index) -> tuple[np.ndarray, np.ndarray]:
    """Canonical 1D layout of a concatenated code.

    Each outer check sits in the gap just after the lowest segment it touches.
    A segment is laid out reversed when it has checks on its right only, so
    its attach bit faces them.  Walking left to right, bits take the next
    integer position and checks the next half-integer.
    """
    n_out = outer.n
    gaps: dict[int, list[int]] = {g: [] for g in range(n_out + 1)}
    for a in range(outer.m):
        segs = np.nonzero(outer.H[a])[0]
        gaps[int(segs[0]) + 1 if segs.size else n_out].append(a)

    order: list[tuple[str, int]] = []
    for s in range(n_out):
        order += [("outer", a) for a in gaps[s]]
        reverse = bool(gaps[s + 1]) and not gaps[s]
        idx = list(range(c))[::-1] if reverse else list(range(c))
        for pos, t in enumerate(idx):
            order.append(("bit", s * c + t))
            if pos < c - 1:
                lo = min(t, idx[pos + 1])
                order.append(("inner", s * (c - 1) + lo))
    order += [("outer", a) for a in gaps[n_out]]

    bit_coords = np.zeros(n_out * c)
    check_coords = np.zeros(outer.m + n_out * (c - 1))
    pos = -0.5
    for kind, i in order:
        if kind == "bit":
            pos = math.floor(pos) + 1.0
            bit_coords[i] = pos
        else:
            pos = math.floor(pos) + 0.5 if math.floor(pos) + 0.5 > pos else math.floor(pos) + 1.5
            check_coords[i if kind == "outer" else outer.m + i] = pos
    return bit_coords, check_coords


def concatenate(spec: ConcatSpec) -> ClassicalCode:
    """[n', k', d'] outer code -> [n'c, k', d'c] concatenated code.

    Rows are ordered outer checks first, then the c - 1 inner checks of each
    segment in turn; bit s*c + t is inner bit t of segment s.
    """
    outer, c = spec.outer, spec.c
    if c == 1:
        return outer
    n_out, m_out = outer.n, outer.m
    H = np.zeros((m_out + n_out * (c - 1), n_out * c), dtype=np.uint8)
    for a, s in outer.edges:
        H[a, s * c + spec.index(a, s)] = 1
    for s in range(n_out):
        for t in range(c - 1):
            row = m_out + s * (c - 1) + t
            H[row, s * c + t] = H[row, s * c + t + 1] = 1
    G = np.kron(outer.generator, np.ones((1, c), dtype=np.uint8)).astype(np.uint8)
    bit_coords, check_coords = _concat_layout(outer, c, spec.index)
    name = outer.name or f"[{n_out},{outer.k}]"
    return ClassicalCode(
        H,
        G=G,
        bit_coords=bit_coords,
        check_coords=check_coords,
        name=f"{name}({c})",
        concat=spec,
    )


def rebalance_attachments(spec: ConcatSpec) -> ConcatSpec:
    """Spread each segment's outer checks over distinct inner bits."""
    degrees = spec.outer.H.sum(axis=0)
    max_deg = int(degrees.max()) if degrees.size else 0
    if spec.c < max_deg:
        raise ValueError(f"c = {spec.c} is smaller than the max outer bit degree {max_deg}")
    attach = {}
    for s in range(spec.outer.n):
        for t, a in enumerate(np.nonzero(spec.outer.H[:, s])[0]):
            attach[(int(a), s)] = t
    return ConcatSpec(spec.outer, spec.c, attach)


def decompose_checks(code: ClassicalCode, max_weight: int = 3) -> ClassicalCode:
    """Split every check heavier than 3 into a chain of weight-3 checks.

    A weight-w check on x1..xw becomes x1+x2+a1, a1+x3+a2, ..., a_{w-3}+x_{w-1}+x_w
    with w - 3 new auxiliary bits appended after the original bits.
    """
    if max_weight != 3:
        raise ValueError("only max_weight = 3 is supported")
    n = code.n
    rows: list[list[int]] = []
    row_coords: list[float] = []
    aux_coords: list[float] = []
    for a, row in enumerate(code.H):
        support = np.nonzero(row)[0].tolist()
        w = len(support)
        if w <= 3:
            rows.append(support)
            row_coords.append(float(code.check_coords[a]))
            continue
        aux = list(range(n + len(aux_coords), n + len(aux_coords) + w - 3))
        aux_coords += [float(code.check_coords[a])] * (w - 3)
        rows.append([support[0], support[1], aux[0]])
        for i in range(1, w - 3):
            rows.append([aux[i - 1], support[i + 1], aux[i]])
        rows.append([aux[-1], support[-2], support[-1]])
        row_coords += [float(code.check_coords[a])] * (w - 2)
    n_new = n + len(aux_coords)
    H = gf2.from_positions(len(rows), n_new, [(r, b) for r, supp in enumerate(rows) for b in supp])
    if n_new == n:
        return code
    return ClassicalCode(
        H,
        bit_coords=np.concatenate([code.bit_coords, aux_coords]),
        check_coords=np.array(row_coords),
        name=f"{code.describe()}/3",
        threshold=code.threshold,
    )


# ---------------------------------------------------------------------------
# distance and enumeration


@numba.njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@numba.njit(cache=True)
def _gray_min_weight(rows):
    k, words = rows.shape
    cur = np.zeros(words, dtype=np.uint64)
    best = np.int64(1) << 62
    for i in range(1, np.int64(1) << k):
        flip = 0
        while not (i >> flip) & 1:
            flip += 1
        w = 0
        for t in range(words):
            cur[t] ^= rows[flip, t]
            w += _popcount(cur[t])
        if w < best:
            best = w
    return best


def min_distance(code: ClassicalCode) -> int:
    """Exact minimum weight of a nonzero codeword (enumerates 2^k - 1 words)."""
    G = code.generator
    k = G.shape[0]
    if k == 0:
        return math.inf  # type: ignore[return-value]
    if k > MAX_DISTANCE_K:
        raise BudgetExceeded(f"k = {k} > {MAX_DISTANCE_K}; exhaustive distance refused")
    return int(_gray_min_weight(gf2.pack_rows(G)))


def codewords(code: ClassicalCode) -> set[tuple[int, ...]]:
    """All codewords (including zero) as tuples; small k only."""
    G = code.generator
    if G.shape[0] > 20:
        raise BudgetExceeded("too many codewords to list")
    out = set()
    for coeffs in itertools.product([0, 1], repeat=G.shape[0]):
        out.add(tuple((np.array(coeffs, dtype=np.int64) @ G % 2).tolist()))
    return out


def _column_masks(H: np.ndarray) -> list[int]:
    return gf2.int_rows(H.T)


def _check_budget(n: int, max_size: int) -> None:
    total = sum(math.comb(n, i) for i in range(1, max_size + 1))
    if total > ENUMERATION_BUDGET:
        raise BudgetExceeded(f"{total} subsets exceed budget {ENUMERATION_BUDGET}")


@dataclass(frozen=True)
class ExpansionReport:
    min_ratio: dict[int, float]
    max_bit_degree: int

    @property
    def delta(self) -> float:
        return 1.0 - min(self.min_ratio.values())


def expansion_audit(code: ClassicalCode, max_subset: int) -> ExpansionReport:
    """Exact min of |N(S)| / (Delta_B |S|) over bit subsets S of each size."""
    _check_budget(code.n, max_subset)
    masks = _column_masks(code.H)
    delta_b = int(code.H.sum(axis=0).max())
    out = {}
    for size in range(1, max_subset + 1):
        best = math.inf
        for subset in itertools.combinations(masks, size):
            nbrs = 0
            for msk in subset:
                nbrs |= msk
            best = min(best, nbrs.bit_count())
        out[size] = best / (delta_b * size)
    return ExpansionReport(out, delta_b)


def confinement_probe(code: ClassicalCode, max_error_weight: int) -> dict[int, int]:
    """Exact min syndrome weight over all errors of each weight t."""
    _check_budget(code.n, max_error_weight)
    masks = _column_masks(code.H)
    n = code.n
    best = {t: math.inf for t in range(1, max_error_weight + 1)}

    def walk(start: int, depth: int, synd: int) -> None:
        for j in range(start, n):
            s = synd ^ masks[j]
            w = s.bit_count()
            if w < best[depth]:
                best[depth] = w
            if depth < max_error_weight:
                walk(j + 1, depth + 1, s)

    walk(0, 1, 0)
    return {t: int(v) for t, v in best.items()}


def domain_wall_profile(code: ClassicalCode, order) -> list[int]:
    """Syndrome weight after flipping the bits of ``order`` one at a time."""
    e = np.zeros(code.n, dtype=np.uint8)
    out = []
    for b in order:
        e[b] ^= 1
        out.append(int(gf2.matmul(code.H, e).sum()))
    return out


# ---------------------------------------------------------------------------
# alist


def to_alist(H: np.ndarray) -> str:
    """MacKay alist text: 'n m', max degrees, degree lists, 1-indexed adjacency."""
    H = gf2.as_binary(np.atleast_2d(H))
    m, n = H.shape
    cols = [np.nonzero(H[:, j])[0] + 1 for j in range(n)]
    rows = [np.nonzero(H[i])[0] + 1 for i in range(m)]
    max_c = max((len(c) for c in cols), default=0)
    max_r = max((len(r) for r in rows), default=0)
    lines = [f"{n} {m}", f"{max_c} {max_r}"]
    lines.append(" ".join(str(len(c)) for c in cols))
    lines.append(" ".join(str(len(r)) for r in rows))
    for c in cols:
        lines.append(" ".join(str(x) for x in list(c) + [0] * (max_c - len(c))))
    for r in rows:
        lines.append(" ".join(str(x) for x in list(r) + [0] * (max_r - len(r))))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> np.ndarray:
    lines = [ln.split() for ln in text.strip("\n").split("\n")]
    n, m = int(lines[0][0]), int(lines[0][1])
    H = np.zeros((m, n), dtype=np.uint8)
    col_lines = lines[4 : 4 + n]
    row_lines = lines[4 + n : 4 + n + m]
    for j, ln in enumerate(col_lines):
        for x in ln:
            if int(x):
                H[int(x) - 1, j] = 1
    for i, ln in enumerate(row_lines):
        for x in ln:
            if int(x) and not H[i, int(x) - 1]:
                raise ValueError(f"alist row {i + 1} disagrees with column lists")
    return H


def with_threshold(code: ClassicalCode, threshold: float) -> ClassicalCode:
    return replace(code, threshold=threshold)
