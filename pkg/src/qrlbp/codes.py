"""CSS code containers, constructors, alist I/O and outcome classification."""

from __future__ import annotations

import enum
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .gf2 import BitMatrix, BitVec, in_row_space, mat_vec_mul, rank, symplectic_check


class AlistError(ValueError):
    pass


@dataclass(frozen=True)
class CssCode:
    """A CSS code given by two orthogonal check matrices.

    ``h_a`` produces the syndrome of the stream decoded in the X-only
    setting; ``h_b`` is the dual-stream check matrix whose rows are the
    stabilizers that make a stream-a residual harmless.
    """

    h_a: BitMatrix
    h_b: BitMatrix
    name: str = "code"

    def __post_init__(self):
        if self.h_a.n_cols != self.h_b.n_cols:
            raise ValueError(
                f"check matrices disagree on n: {self.h_a.n_cols} vs {self.h_b.n_cols}"
            )
        if not symplectic_check(self.h_a, self.h_b):
            raise ValueError(f"{self.name}: h_a @ h_b.T != 0, not a valid CSS code")

    @property
    def n(self) -> int:
        return self.h_a.n_cols

    @property
    def k(self) -> int:
        return self.n - rank(self.h_a) - rank(self.h_b)


class Outcome(enum.Enum):
    CONVERGED = "converged"
    LOGICAL_ERROR = "logical_error"
    NONCONVERGENCE = "nonconvergence"


@dataclass(frozen=True)
class DecodeOutcome:
    kind: Outcome
    iterations_used: int = 0
    decimations_used: int = 0

    @property
    def failed(self) -> bool:
        return self.kind is not Outcome.CONVERGED


# ---------------------------------------------------------------------------
# alist


def load_alist(path: str | Path, warn_list: list[int] | None = None) -> BitMatrix:
    """Read an alist file.

    Degree-0 columns are legal; their indices are appended to ``warn_list``
    when given and reported through :mod:`warnings`.
    """
    text = Path(path).read_text()
    # (line number, integer tokens) for every non-blank line
    lines: list[tuple[int, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        try:
            lines.append((lineno, [int(t) for t in tokens]))
        except ValueError:
            raise AlistError(f"line {lineno}: non-integer token in {raw!r}") from None

    def take(what: str) -> tuple[int, list[int]]:
        if not lines:
            raise AlistError(f"unexpected end of file while reading {what}")
        return lines.pop(0)

    lineno, header = take("header")
    if len(header) != 2 or min(header) < 0:
        raise AlistError(f"line {lineno}: header must be 'n m'")
    n, m = header
    lineno, maxdeg = take("max degrees")
    if len(maxdeg) != 2:
        raise AlistError(f"line {lineno}: expected 'max_col_degree max_row_degree'")
    lineno, col_deg = take("column degrees")
    if len(col_deg) != n:
        raise AlistError(f"line {lineno}: expected {n} column degrees, got {len(col_deg)}")
    lineno, row_deg = take("row degrees")
    if len(row_deg) != m:
        raise AlistError(f"line {lineno}: expected {m} row degrees, got {len(row_deg)}")
    if max(col_deg, default=0) > maxdeg[0] or max(row_deg, default=0) > maxdeg[1]:
        raise AlistError(f"line {lineno}: degree exceeds declared maximum")

    def read_lists(count: int, degs: list[int], bound: int, what: str) -> list[list[int]]:
        out = []
        for idx in range(count):
            lineno, entries = take(f"{what} {idx + 1}")
            nz = [e for e in entries if e != 0]
            if len(nz) != degs[idx]:
                raise AlistError(
                    f"line {lineno}: {what} {idx + 1} lists {len(nz)} entries, degree says {degs[idx]}"
                )
            for e in nz:
                if not 1 <= e <= bound:
                    raise AlistError(f"line {lineno}: index {e} out of range 1..{bound}")
            if len(set(nz)) != len(nz):
                raise AlistError(f"line {lineno}: repeated index in {what} {idx + 1}")
            out.append([e - 1 for e in nz])
        return out

    cols = read_lists(n, col_deg, m, "column")
    rows = read_lists(m, row_deg, n, "row")

    from_cols = {(j, i) for i, js in enumerate(cols) for j in js}
    from_rows = {(j, i) for j, is_ in enumerate(rows) for i in is_}
    if from_cols != from_rows:
        bad = sorted(from_cols ^ from_rows)[0]
        raise AlistError(
            f"row and column lists disagree (first mismatch at row {bad[0] + 1}, column {bad[1] + 1})"
        )

    empty = [i for i, d in enumerate(col_deg) if d == 0]
    if empty:
        if warn_list is not None:
            warn_list.extend(empty)
        warnings.warn(f"{path}: {len(empty)} degree-0 column(s): {empty[:10]}", stacklevel=2)

    packed = [0] * m
    for j, i in from_rows:
        packed[j] |= 1 << i
    return BitMatrix(packed, n)


def dump_alist(h: BitMatrix) -> str:
    m, n = h.shape
    arr = h.to_array()
    cols = [np.flatnonzero(arr[:, i]) + 1 for i in range(n)]
    rows = [np.flatnonzero(arr[j]) + 1 for j in range(m)]
    max_c = max((len(c) for c in cols), default=0)
    max_r = max((len(r) for r in rows), default=0)

    def pad(idx, width):
        vals = [int(v) for v in idx] + [0] * (width - len(idx))
        return " ".join(map(str, vals))

    out = [f"{n} {m}", f"{max_c} {max_r}"]
    out.append(" ".join(str(len(c)) for c in cols))
    out.append(" ".join(str(len(r)) for r in rows))
    out += [pad(c, max_c) for c in cols]
    out += [pad(r, max_r) for r in rows]
    return "\n".join(out) + "\n"


def save_alist(h: BitMatrix, path: str | Path) -> None:
    Path(path).write_text(dump_alist(h))


# ---------------------------------------------------------------------------
# constructors


def _shift(size: int, power: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.uint8), power % size, axis=1)


_TERM = re.compile(r"^(?:x(\d*))?(?:y(\d*))?$")


def parse_poly(text: str) -> list[tuple[int, int]]:
    """Parse ``"x3+y+y2"`` style bivariate monomial sums into exponent pairs.

    ``"1"`` is the identity; ``"x"`` means ``x1``. Exponent ranges are
    checked by :func:`build_bb_code`.
    """
    terms = []
    for raw in text.replace(" ", "").split("+"):
        if raw == "1":
            terms.append((0, 0))
            continue
        match = _TERM.match(raw)
        if not raw or not match:
            raise ValueError(f"bad monomial {raw!r} in {text!r}")
        xs, ys = match.groups()
        a = 0 if xs is None else int(xs or 1)
        b = 0 if ys is None else int(ys or 1)
        terms.append((a, b))
    return terms


def bb_matrix(l: int, m: int, poly: Sequence[tuple[int, int]]) -> np.ndarray:
    out = np.zeros((l * m, l * m), dtype=np.uint8)
    for a, b in poly:
        if not (0 <= a < l and 0 <= b < m):
            raise ValueError(f"exponent pair {(a, b)} outside torus ({l}, {m})")
        # x = S_l (x) I_m, y = I_l (x) S_m
        out ^= np.kron(_shift(l, a), _shift(m, b))
    return out


def build_bb_code(
    l: int,
    m: int,
    poly_a: Sequence[tuple[int, int]] | str,
    poly_b: Sequence[tuple[int, int]] | str,
    name: str | None = None,
) -> CssCode:
    if l < 1 or m < 1:
        raise ValueError("torus dimensions must be positive")
    if isinstance(poly_a, str):
        poly_a = parse_poly(poly_a)
    if isinstance(poly_b, str):
        poly_b = parse_poly(poly_b)
    A = bb_matrix(l, m, poly_a)
    B = bb_matrix(l, m, poly_b)
    h_a = np.hstack([A, B])
    h_b = np.hstack([B.T, A.T])
    return CssCode(
        BitMatrix.from_array(h_a),
        BitMatrix.from_array(h_b),
        name or f"bb{2 * l * m}",
    )


HAMMING_7 = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)


def steane_code() -> CssCode:
    h = BitMatrix.from_array(HAMMING_7)
    return CssCode(h, h, "steane")


def toric_code(L: int) -> CssCode:
    """Toric code on an ``L x L`` periodic lattice, ``n = 2 L^2``.

    Horizontal edge of vertex ``(r, c)`` is qubit ``r*L + c``; vertical edge
    is ``L^2 + r*L + c``. ``h_a`` holds plaquettes, ``h_b`` stars.
    """
    n = 2 * L * L
    horiz = lambda r, c: (r % L) * L + (c % L)  # noqa: E731
    vert = lambda r, c: L * L + (r % L) * L + (c % L)  # noqa: E731
    plaq = np.zeros((L * L, n), dtype=np.uint8)
    star = np.zeros((L * L, n), dtype=np.uint8)
    for r in range(L):
        for c in range(L):
            f = r * L + c
            for q in (horiz(r, c), horiz(r + 1, c), vert(r, c), vert(r, c + 1)):
                plaq[f, q] = 1
            for q in (horiz(r, c), horiz(r, c - 1), vert(r, c), vert(r - 1, c)):
                star[f, q] = 1
    return CssCode(BitMatrix.from_array(plaq), BitMatrix.from_array(star), f"toric{L}")


def toy_codes() -> list[CssCode]:
    return [steane_code(), toric_code(3)]


# Registry used by the CLI. BB polynomials are the published ones for each size.
REGISTRY = {
    "steane": steane_code,
    "toric3": lambda: toric_code(3),
    "toric5": lambda: toric_code(5),
    "bb72": lambda: build_bb_code(6, 6, "x3+y+y2", "y3+x+x2", "bb72"),
    "bb144": lambda: build_bb_code(12, 6, "x3+y+y2", "y3+x+x2", "bb144"),
    "bb288": lambda: build_bb_code(12, 12, "x3+y2+y7", "y3+x+x2", "bb288"),
}


def get_code(name: str) -> CssCode:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown code {name!r}; known: {sorted(REGISTRY)}") from None


# ---------------------------------------------------------------------------
# classification


def _bits(v, n: int) -> BitVec:
    v = v if isinstance(v, BitVec) else BitVec.from_array(v)
    if v.n != n:
        raise ValueError(f"vector length {v.n} != n={n}")
    return v


def classify_binary(
    code: CssCode, e_true, e_hat, converged: bool, iterations: int = 0, decimations: int = 0
) -> DecodeOutcome:
    e_true, e_hat = _bits(e_true, code.n), _bits(e_hat, code.n)
    if not converged:
        kind = Outcome.NONCONVERGENCE
    elif in_row_space(code.h_b, e_true ^ e_hat):
        kind = Outcome.CONVERGED
    else:
        kind = Outcome.LOGICAL_ERROR
    return DecodeOutcome(kind, iterations, decimations)


def classify_quaternary(
    code: CssCode,
    true_pair: tuple,
    hat_pair: tuple,
    converged: bool,
    iterations: int = 0,
    decimations: int = 0,
) -> DecodeOutcome:
    """Stream a (checked by ``h_a``) must differ by rows of ``h_b`` and vice versa."""
    ta, tb = (_bits(v, code.n) for v in true_pair)
    ha, hb = (_bits(v, code.n) for v in hat_pair)
    if not converged:
        kind = Outcome.NONCONVERGENCE
    elif in_row_space(code.h_b, ta ^ ha) and in_row_space(code.h_a, tb ^ hb):
        kind = Outcome.CONVERGED
    else:
        kind = Outcome.LOGICAL_ERROR
    return DecodeOutcome(kind, iterations, decimations)


def syndrome_matches(h: BitMatrix, e_hat, s) -> bool:
    return mat_vec_mul(h, e_hat) == (s if isinstance(s, BitVec) else BitVec.from_array(s))
