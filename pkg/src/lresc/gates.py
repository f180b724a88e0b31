"""Logical gates inherited from codespace-preserving bit permutations.

Conventions.  Codewords are rows, so a classical map acts on the right:
x -> x U.  ``U`` preserves the code when G U = V G for some V, and then
H U = W H.  On logical coefficient rows u (codeword u G) the action is u -> u V.

An elementary op ``("add", i, j)`` is the matrix I + E[i, j]; acting on the
right it adds entry i into entry j, which on X-type Pauli supports is
CNOT(i -> j).  ``("swap", i, j)`` exchanges i and j.  Sequences compose left
to right: U = E_1 E_2 ... E_k, with E_1 applied first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import gf2
from .classical import ClassicalCode, ConcatSpec, concatenate
from .hgp import CssCode

__all__ = [
    "GadgetRejected",
    "LinearGadget",
    "CssGadget",
    "permutation_matrix",
    "elementary_matrix",
    "compose",
    "decompose_elementary",
    "verify_codespace_transform",
    "lift_to_concat",
    "lift_to_hgp",
    "extract_logical_action",
    "cnot_action",
    "bit_swap_gadgets",
    "logical_cnot_gadget",
]


class GadgetRejected(ValueError):
    """The proposed map does not preserve the code (or its lifted stabilizers)."""


Op = tuple[str, int, int]


def permutation_matrix(n: int, i: int, j: int) -> np.ndarray:
    """Transposition of (0-indexed) bits i and j."""
    P = np.eye(n, dtype=np.uint8)
    P[[i, j]] = P[[j, i]]
    return P


def elementary_matrix(n: int, op: Op) -> np.ndarray:
    kind, i, j = op
    if kind == "swap":
        return permutation_matrix(n, i, j)
    if kind == "add":
        if i == j:
            raise ValueError("add needs distinct indices")
        E = np.eye(n, dtype=np.uint8)
        E[i, j] = 1
        return E
    raise ValueError(f"unknown elementary op {kind!r}")


def compose(n: int, ops: list[Op]) -> np.ndarray:
    out = np.eye(n, dtype=np.uint8)
    for op in ops:
        out = gf2.matmul(out, elementary_matrix(n, op))
    return out


def decompose_elementary(U) -> list[Op]:
    """Factor an invertible U into swaps and adds by Gaussian elimination.

    Row operations R_1, R_2, ... reducing U to the identity give
    U = R_1 R_2 ... R_k because each elementary matrix is its own inverse.
    """
    U = gf2.as_binary(np.atleast_2d(U)).copy()
    n = U.shape[0]
    if U.shape != (n, n) or gf2.rank(U) != n:
        raise gf2.RankDeficientError("decompose_elementary needs an invertible matrix")
    ops: list[Op] = []
    for col in range(n):
        if not U[col, col]:
            piv = col + int(np.nonzero(U[col:, col])[0][0])
            U[[col, piv]] = U[[piv, col]]
            ops.append(("swap", col, piv))
        for r in range(n):
            if r != col and U[r, col]:
                U[r] ^= U[col]
                ops.append(("add", r, col))
    return ops


@dataclass(frozen=True, eq=False)
class LinearGadget:
    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    elementary_seq: list[Op]
    code: ClassicalCode

    def check(self) -> None:
        U, G, H = self.U, self.code.generator, self.code.H
        n = U.shape[0]
        if not np.array_equal(gf2.matmul(U, U.T), np.eye(n, dtype=np.uint8)):
            raise GadgetRejected("U is not orthogonal")
        if not np.array_equal(compose(n, self.elementary_seq), U):
            raise GadgetRejected("elementary sequence does not reproduce U")
        if not np.array_equal(gf2.matmul(G, U), gf2.matmul(self.V, G)):
            raise GadgetRejected("G U != V G")
        if not np.array_equal(gf2.matmul(H, U), gf2.matmul(self.W, H)):
            raise GadgetRejected("H U != W H")


def _solve_left(A: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """X with X A = B (row by row), or None."""
    rows = []
    for b in B:
        x = gf2.solve(A.T, b)
        if x is None:
            return None
        rows.append(x)
    return np.array(rows, dtype=np.uint8).reshape(B.shape[0], A.shape[0])


def verify_codespace_transform(code: ClassicalCode, U) -> LinearGadget:
    U = gf2.as_binary(np.atleast_2d(U))
    n = code.n
    if U.shape != (n, n):
        raise GadgetRejected(f"U must be {n}x{n}")
    if not np.array_equal(gf2.matmul(U, U.T), np.eye(n, dtype=np.uint8)):
        raise GadgetRejected("U is not orthogonal over GF(2)")
    G, H = code.generator, code.H
    V = _solve_left(G, gf2.matmul(G, U))
    if V is None:
        raise GadgetRejected("G U leaves the row space of G")
    W = _solve_left(H, gf2.matmul(H, U))
    if W is None:
        raise GadgetRejected("H U leaves the row space of H")
    gadget = LinearGadget(U, V, W, decompose_elementary(U), code)
    gadget.check()
    return gadget


def lift_to_concat(gadget: LinearGadget, c: int, spec: ConcatSpec | None = None) -> LinearGadget:
    """Segment-transversal version on the concatenated code.

    U -> U (x) I_c, V unchanged, W -> diag(W, U (x) I_{c-1}).  Needs the
    default attachment (every outer check on inner bit 0).
    """
    if spec is None:
        spec = ConcatSpec(gadget.code, c)
    if spec.c != c or spec.outer is not gadget.code and not np.array_equal(spec.outer.H, gadget.code.H):
        raise GadgetRejected("concatenation spec does not match the gadget's code")
    if not spec.is_default:
        raise GadgetRejected("rebalanced attachments break the segment-transversal lift")
    if c == 1:
        return gadget
    code = concatenate(spec)
    n_out, m_out = gadget.code.n, gadget.code.m
    Uc = gf2.kron(gadget.U, np.eye(c, dtype=np.uint8))
    Wc = np.zeros((code.m, code.m), dtype=np.uint8)
    Wc[:m_out, :m_out] = gadget.W
    Wc[m_out:, m_out:] = gf2.kron(gadget.U, np.eye(c - 1, dtype=np.uint8))
    seq = [(kind, i * c + t, j * c + t) for kind, i, j in gadget.elementary_seq for t in range(c)]
    lifted = LinearGadget(Uc, gadget.V.copy(), Wc, seq, code)
    if n_out * c != code.n:
        raise AssertionError("size mismatch")
    lifted.check()
    return lifted


@dataclass(frozen=True, eq=False)
class CssGadget:
    UX: np.ndarray
    UZ: np.ndarray
    physical_circuit: list[tuple[str, int, int]]
    axis: str
    transcript: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "axis": self.axis,
            "circuit": [list(g) for g in self.physical_circuit],
            "verification": self.transcript,
        }


def _circuit_matrix(n: int, circuit) -> np.ndarray:
    out = np.eye(n, dtype=np.uint8)
    for gate, a, b in circuit:
        if gate == "SWAP":
            out[:, [a, b]] = out[:, [b, a]]
        else:  # CNOT a -> b: column b += column a
            out[:, b] ^= out[:, a]
    return out


def lift_to_hgp(gadget: LinearGadget, code: CssCode, axis: str, target_sector: str | None = None) -> CssGadget:
    """Patch-transversal gadget on a product code.

    axis 'rows': the map acts on the first parent (qubit rows are permuted),
    UX = diag(U (x) I_n2, W (x) I_m2); it transforms the Z logicals.
    axis 'columns': the map acts on the second parent,
    UX = diag(I_n1 (x) U, I_m1 (x) W^{-T}); it transforms the X logicals.
    In both cases UZ = UX^{-T}.
    """
    if code.parents is None or code.kind != "hgp":
        raise GadgetRejected("lift_to_hgp needs an HGP code")
    axis = axis.lower()
    expected = {"rows": "Z", "columns": "X"}
    if axis not in expected:
        raise ValueError("axis must be 'rows' or 'columns'")
    if target_sector is not None and target_sector.upper() != expected[axis]:
        raise GadgetRejected(f"axis {axis} transforms {expected[axis]} logicals")
    c1, c2 = code.parents
    parent = c1 if axis == "rows" else c2
    if not np.array_equal(parent.H, gadget.code.H):
        raise GadgetRejected("gadget was verified on a different parent code")
    n1, n2, m1, m2 = c1.n, c2.n, c1.m, c2.m
    try:
        W_inv_T = gf2.inverse(gadget.W).T.copy()
    except gf2.RankDeficientError as exc:
        raise GadgetRejected("W is singular") from exc

    N = code.n_qubits
    circuit: list[tuple[str, int, int]] = []

    def emit(ops, index, copies):
        for kind, i, j in ops:
            for t in range(copies):
                a, b = index(i, t), index(j, t)
                circuit.append(("SWAP", a, b) if kind == "swap" else ("CNOT", a, b))

    if axis == "rows":
        prim = gf2.kron(gadget.U, np.eye(n2, dtype=np.uint8))
        sec = gf2.kron(gadget.W, np.eye(m2, dtype=np.uint8))
        emit(gadget.elementary_seq, lambda i, t: i * n2 + t, n2)
        emit(decompose_elementary(gadget.W), lambda a, t: n1 * n2 + a * m2 + t, m2)
    else:
        prim = gf2.kron(np.eye(n1, dtype=np.uint8), gadget.U)
        sec = gf2.kron(np.eye(m1, dtype=np.uint8), W_inv_T)
        emit(gadget.elementary_seq, lambda j, t: t * n2 + j, n1)
        emit(decompose_elementary(W_inv_T), lambda b, t: n1 * n2 + t * m2 + b, m1)
    UX = np.zeros((N, N), dtype=np.uint8)
    UX[: n1 * n2, : n1 * n2] = prim
    UX[n1 * n2 :, n1 * n2 :] = sec
    UZ = gf2.inverse(UX).T.copy()

    if not np.array_equal(_circuit_matrix(N, circuit), UX):
        raise AssertionError("physical circuit does not realise UX")
    x_ok = gf2.row_equivalent(gf2.matmul(code.HX, UX), code.HX)
    z_ok = gf2.row_equivalent(gf2.matmul(code.HZ, UZ), code.HZ)
    if not (x_ok and z_ok):
        raise GadgetRejected(f"stabilizers not preserved (X: {x_ok}, Z: {z_ok})")
    transcript = {
        "HX_preserved": x_ok,
        "HZ_preserved": z_ok,
        "UX_UZT_identity": bool(np.array_equal(gf2.matmul(UX, UZ.T), np.eye(N, dtype=np.uint8))),
        "n_swap": sum(g[0] == "SWAP" for g in circuit),
        "n_cnot": sum(g[0] == "CNOT" for g in circuit),
    }
    return CssGadget(UX, UZ, circuit, axis, transcript)


def _reduce_to_logicals(images: np.ndarray, basis: np.ndarray, dual: np.ndarray, stabs: np.ndarray):
    """Coefficients A with images = A basis (mod stabilizers)."""
    # the pairing basis . dual^T is the identity, so coefficients are overlaps
    pairing = gf2.matmul(basis, dual.T)
    A = gf2.matmul(gf2.matmul(images, dual.T), gf2.inverse(pairing))
    residue = images ^ gf2.matmul(A, basis)
    for row in residue:
        if row.any() and not gf2.rowspace_contains(stabs, row):
            raise GadgetRejected("image leaves the logical + stabilizer span")
    return A


def extract_logical_action(gadget: CssGadget, code: CssCode) -> tuple[np.ndarray, np.ndarray]:
    """(A_X, A_Z): row r gives the image of logical r in the logical basis."""
    if code.logicals is None:
        raise GadgetRejected("code has no logical basis")
    GX, GZ = code.logicals
    AX = _reduce_to_logicals(gf2.matmul(GX, gadget.UX), GX, GZ, code.HX)
    AZ = _reduce_to_logicals(gf2.matmul(GZ, gadget.UZ), GZ, GX, code.HZ)
    K = GX.shape[0]
    if not np.array_equal(gf2.matmul(AX, AZ.T), np.eye(K, dtype=np.uint8)):
        raise AssertionError("logical actions are not symplectically consistent")
    return AX, AZ


def cnot_action(K: int, pairs) -> tuple[np.ndarray, np.ndarray]:
    """(A_X, A_Z) of a product of CNOTs given as 1-indexed (control, target)."""
    AX = np.eye(K, dtype=np.uint8)
    for ctrl, tgt in pairs:
        AX = gf2.matmul(AX, elementary_matrix(K, ("add", ctrl - 1, tgt - 1)))
    return AX, gf2.inverse(AX).T.copy()


def bit_swap_gadgets(code: ClassicalCode) -> list[LinearGadget]:
    """Every single transposition of bits that preserves the code."""
    out = []
    for i in range(code.n):
        for j in range(i + 1, code.n):
            try:
                out.append(verify_codespace_transform(code, permutation_matrix(code.n, i, j)))
            except GadgetRejected:
                continue
    return out


def logical_cnot_gadget(code: ClassicalCode, control: int, target: int) -> LinearGadget:
    """Bit permutation realising logical CNOT(control -> target) (1-indexed).

    Works when the generator columns are distinct (e.g. the shortened
    Hadamard family): the logical map V acts on each column of G, and U is
    the induced column permutation.  The result is verified, not assumed.
    """
    G = code.generator
    k, n = G.shape
    V = elementary_matrix(k, ("add", control - 1, target - 1))
    cols = {tuple(G[:, j].tolist()): j for j in range(n)}
    if len(cols) != n:
        raise GadgetRejected("generator columns are not distinct")
    U = np.zeros((n, n), dtype=np.uint8)
    VG = gf2.matmul(V, G)
    for j in range(n):
        src = cols.get(tuple(VG[:, j].tolist()))
        if src is None:
            raise GadgetRejected("logical map does not permute the columns")
        U[src, j] = 1
    gadget = verify_codespace_transform(code, U)
    if not np.array_equal(gadget.V, V):
        raise AssertionError("induced permutation realises a different logical map")
    return gadget
