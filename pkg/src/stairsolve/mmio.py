
import logging
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from stairsolve.errors import MatrixMarketParseError
from stairsolve.sparse import SparseMatrix, as_sparse

logger = logging.getLogger("MatrixMarket")

HEADER = "%%MatrixMarket matrix coordinate real general"
_FIELDS = ("real", "integer")


def _parse_header(line: str) -> None:
    tokens = line.lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
        raise MatrixMarketParseError("missing %%MatrixMarket banner", 1)
    _, obj, fmt, fld, symmetry = tokens
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketParseError(f"unsupported object/format '{obj} {fmt}'", 1)
    if fld not in _FIELDS:
        raise MatrixMarketParseError(f"unsupported field '{fld}'", 1)
    if symmetry != "general":
        raise MatrixMarketParseError(f"unsupported symmetry '{symmetry}'", 1)


def load_matrix_market(path: str | Path) -> SparseMatrix:
    path = Path(path)
    with open(path, encoding="ascii") as f:
        lines = f.read().splitlines()
    if not lines:
        raise MatrixMarketParseError("empty file", 1)
    _parse_header(lines[0])

    shape: tuple[int, int, int] | None = None
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        tokens = line.split()
        if shape is None:
            try:
                n_rows, n_cols, nnz = (int(t) for t in tokens)
            except ValueError:
                raise MatrixMarketParseError(f"bad size line '{line}'", lineno) from None
            if n_rows < 0 or n_cols < 0 or nnz < 0:
                raise MatrixMarketParseError("negative dimensions", lineno)
            shape = (n_rows, n_cols, nnz)
            continue
        if len(rows) == shape[2]:
            raise MatrixMarketParseError(f"more than the declared {shape[2]} entries", lineno)
        if len(tokens) != 3:
            raise MatrixMarketParseError(f"expected 'row col value', got '{line}'", lineno)
        try:
            i, j, v = int(tokens[0]), int(tokens[1]), float(tokens[2])
        except ValueError:
            raise MatrixMarketParseError(f"bad entry '{line}'", lineno) from None
        if not (1 <= i <= shape[0] and 1 <= j <= shape[1]):
            raise MatrixMarketParseError(f"index ({i}, {j}) out of range", lineno)
        if not np.isfinite(v):
            raise MatrixMarketParseError(f"non-finite value '{tokens[2]}'", lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)

    if shape is None:
        raise MatrixMarketParseError("missing size line", len(lines) + 1)
    if len(rows) != shape[2]:
        raise MatrixMarketParseError(
            f"declared {shape[2]} entries, found {len(rows)}", len(lines) + 1
        )
    logger.debug(f"loaded {path}: {shape[0]}x{shape[1]}, {shape[2]} entries")
    return as_sparse(sp.coo_matrix((vals, (rows, cols)), shape=shape[:2]))


def write_matrix_market(matrix, path: str | Path, comment: str | None = None) -> None:
    m = as_sparse(matrix)
    n_rows, n_cols = m.shape
    col_of = np.repeat(np.arange(n_cols), np.diff(m.indptr))
    with open(Path(path), "w", encoding="ascii") as f:
        f.write(HEADER + "\n")
        if comment:
            for line in comment.splitlines():
                f.write(f"% {line}\n")
        f.write(f"{n_rows} {n_cols} {m.nnz}\n")
        for i, j, v in zip(m.indices, col_of, m.data):
            f.write(f"{i + 1} {j + 1} {v:.16e}\n")
