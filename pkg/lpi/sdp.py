"""
SDP Instance Module
Standard-form semidefinite program produced by the LPI compiler, with SDPA
sparse (.dat-s) export and import
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union
import logging

import numpy as np
from scipy import sparse

# Setup logging
logger = logging.getLogger(__name__)


@dataclass
class SDPInstance:
    """
    minimize    c . y + c0
    subject to  A y = b
                G y >= h
                X_k = [y[index_k[i, j]]]  is PSD for every block k

    Each index map is a symmetric integer array; every scalar variable belongs
    to at most one PSD block. Variables outside all blocks are free.
    """

    n_vars: int
    c: np.ndarray
    c0: float
    A: sparse.csr_matrix
    b: np.ndarray
    G: sparse.csr_matrix
    h: np.ndarray
    psd_blocks: List[np.ndarray] = field(default_factory=list)
    names: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_equalities(self) -> int:
        return self.A.shape[0]

    @property
    def n_inequalities(self) -> int:
        return self.G.shape[0]

    @property
    def block_sizes(self) -> List[int]:
        return [blk.shape[0] for blk in self.psd_blocks]

    def free_indices(self) -> np.ndarray:
        """Variables not tied to a PSD block."""
        used = np.zeros(self.n_vars, dtype=bool)
        for blk in self.psd_blocks:
            used[blk.reshape(-1)] = True
        return np.flatnonzero(~used)

    def objective(self, y: np.ndarray) -> float:
        return float(self.c @ y + self.c0)

    def residuals(self, y: np.ndarray) -> Dict[str, float]:
        """Constraint violations of a candidate point."""
        eq = self.A @ y - self.b
        ineq = np.minimum(self.G @ y - self.h, 0.0)
        psd = [
            float(min(np.linalg.eigvalsh(y[blk]).min(), 0.0)) if blk.size else 0.0
            for blk in self.psd_blocks
        ]
        return {
            "equality": float(np.max(np.abs(eq), initial=0.0)),
            "inequality": float(-np.min(ineq, initial=0.0)),
            "psd": float(-min(psd + [0.0])),
        }

    def summary(self) -> str:
        return (
            f"SDP: {self.n_vars} vars, {self.n_equalities} equalities, "
            f"{self.n_inequalities} inequalities, PSD blocks {self.block_sizes}"
        )


# =============================================================================
# SDPA SPARSE FORMAT
# =============================================================================

@dataclass
class SDPAProblem:
    """
    SDPA dual-form problem:

        minimize    sum_i c_i y_i
        subject to  sum_i F_i y_i - F_0 is PSD

    Blocks with negative size are diagonal (LP) blocks.
    """

    c: np.ndarray
    block_struct: List[int]
    entries: List[Tuple[int, int, int, int, float]]   # (matno, blkno, i, j, value), 1-based
    c0: float = 0.0

    @property
    def n_vars(self) -> int:
        return self.c.size

    def dense_blocks(self) -> List[List[np.ndarray]]:
        """F_0..F_m per block as dense symmetric matrices."""
        out = [[np.zeros((abs(s), abs(s))) for s in self.block_struct] for _ in range(self.n_vars + 1)]
        for mat, blk, i, j, value in self.entries:
            F = out[mat][blk - 1]
            F[i - 1, j - 1] = value
            F[j - 1, i - 1] = value
        return out


def to_sdpa(instance: SDPInstance) -> SDPAProblem:
    """
    Convert to SDPA dual form.

    Each PSD block keeps its size; equalities become pairs of opposite LP
    inequalities and all LP rows share one diagonal block.
    """
    entries: List[Tuple[int, int, int, int, float]] = []
    block_struct: List[int] = []

    for k, index in enumerate(instance.psd_blocks, start=1):
        q = index.shape[0]
        block_struct.append(q)
        for i in range(q):
            for j in range(i, q):
                entries.append((int(index[i, j]) + 1, k, i + 1, j + 1, 1.0))

    lp_rows = []
    A = instance.A.tocsr()
    for r in range(A.shape[0]):
        row = A.getrow(r)
        lp_rows.append((row, instance.b[r]))
        lp_rows.append((-row, -instance.b[r]))
    G = instance.G.tocsr()
    for r in range(G.shape[0]):
        lp_rows.append((G.getrow(r), instance.h[r]))

    if lp_rows:
        blk = len(block_struct) + 1
        block_struct.append(-len(lp_rows))
        for pos, (row, rhs) in enumerate(lp_rows, start=1):
            for var, value in zip(row.indices, row.data):
                if value != 0.0:
                    entries.append((int(var) + 1, blk, pos, pos, float(value)))
            if rhs != 0.0:
                entries.append((0, blk, pos, pos, float(rhs)))

    entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
    return SDPAProblem(np.asarray(instance.c, dtype=float), block_struct, entries, float(instance.c0))


def write_sdpa(instance: SDPInstance, path: Union[str, Path], comment: str = "") -> Path:
    """
    Write an instance in SDPA sparse format.

    Returns:
        The path written
    """
    problem = to_sdpa(instance)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.extend(f'" {line}' for line in comment.splitlines())
    lines.append(f'" objective offset {problem.c0!r}')
    lines.append(f"{problem.n_vars} = mDIM")
    lines.append(f"{len(problem.block_struct)} = nBLOCK")
    lines.append(" ".join(str(s) for s in problem.block_struct) + " = bLOCKsTRUCT")
    lines.append(" ".join(repr(float(v)) for v in problem.c))
    for mat, blk, i, j, value in problem.entries:
        lines.append(f"{mat} {blk} {i} {j} {value!r}")
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote SDPA file {path} ({problem.n_vars} vars, blocks {problem.block_struct})")
    return path


def _strip(line: str) -> str:
    for sep in ("=", ","):
        line = line.replace(sep, " ")
    return line.replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ")


def read_sdpa(path: Union[str, Path]) -> SDPAProblem:
    """
    Read an SDPA sparse file.

    Raises:
        FileNotFoundError: If the file is missing
        ValueError: On malformed content
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No such SDPA file: {path}")
    c0 = 0.0
    body: List[str] = []
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line[0] in ('"', "*"):
            if "objective offset" in line:
                c0 = float(line.split()[-1])
            continue
        body.append(line)
    if len(body) < 4:
        raise ValueError(f"{path} is not a valid SDPA file")
    try:
        m = int(_strip(body[0]).split()[0])
        n_blocks = int(_strip(body[1]).split()[0])
        struct_tokens = _strip(body[2]).split()
        block_struct = [int(float(t)) for t in struct_tokens[:n_blocks]]
        c = np.array([float(t) for t in _strip(body[3]).split()[:m]])
        entries = []
        for line in body[4:]:
            tokens = _strip(line).split()
            entries.append((int(tokens[0]), int(tokens[1]), int(tokens[2]), int(tokens[3]), float(tokens[4])))
    except (IndexError, ValueError) as e:
        raise ValueError(f"Malformed SDPA file {path}: {e}") from e
    if c.size != m:
        raise ValueError(f"Expected {m} objective coefficients, found {c.size}")
    return SDPAProblem(c, block_struct, entries, c0)
