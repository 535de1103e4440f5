"""Matrix Market coordinate format for sparse designs.

Only "matrix coordinate real general" is supported.  Indices are 1-based
on disk and 0-based in memory.  The writer emits entries in column-major
order with full-precision values, so a given matrix always produces the
same bytes.
"""

from __future__ import annotations

from .errors import ParseError
from .sparse import SparseDesign, from_triplets

_BANNER = "%%MatrixMarket matrix coordinate real general"


def write_matrix_market(path: str, M: SparseDesign) -> None:
    with open(path, "w") as fh:
        fh.write(_BANNER + "\n")
        fh.write(f"{M.n_rows} {M.n_cols} {M.nnz}\n")
        for j in range(M.n_cols):
            lo, hi = M.col_ptr[j], M.col_ptr[j + 1]
            for k in range(lo, hi):
                fh.write(f"{M.row_idx[k] + 1} {j + 1} {float(M.values[k])!r}\n")


def read_matrix_market(path: str) -> SparseDesign:
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError(path, 1, "empty file")
    banner = lines[0].strip()
    if not banner.lower().startswith("%%matrixmarket"):
        raise ParseError(path, 1, f"missing MatrixMarket banner, got {banner!r}")
    fields = banner.lower().split()
    if fields[1:] != ["matrix", "coordinate", "real", "general"]:
        raise ParseError(
            path, 1,
            "only 'matrix coordinate real general' is supported, "
            f"got {banner!r}",
        )
    # skip % comment lines after the banner
    k = 1
    while k < len(lines) and (
        lines[k].lstrip().startswith("%") or not lines[k].strip()
    ):
        k += 1
    if k == len(lines):
        raise ParseError(path, len(lines), "missing size line")
    parts = lines[k].split()
    if len(parts) != 3:
        raise ParseError(
            path, k + 1, f"size line must be 'rows cols nnz', got {lines[k]!r}"
        )
    try:
        n, p, nnz = (int(s) for s in parts)
    except ValueError:
        raise ParseError(
            path, k + 1, f"size line must hold three integers, got {lines[k]!r}"
        ) from None
    entries = []
    lineno = k + 1
    for raw in lines[k + 1:]:
        lineno += 1
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise ParseError(
                path, lineno, f"expected 'row col value', got {raw.strip()!r}"
            )
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(
                path, lineno, f"could not parse entry {raw.strip()!r}"
            ) from None
        if not (1 <= i <= n and 1 <= j <= p):
            raise ParseError(
                path, lineno,
                f"entry ({i}, {j}) out of range for a {n}x{p} matrix",
            )
        entries.append((i - 1, j - 1, v))
    if len(entries) != nnz:
        raise ParseError(
            path, lineno,
            f"size line declared {nnz} entries but file holds {len(entries)}",
        )
    return from_triplets(n, p, entries)
