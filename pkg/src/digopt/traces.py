"""Per-iteration trace records and their CSV interchange format."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple


class PushSumRow(NamedTuple):
    k: int
    consensus_error: float
    min_ratio: float
    max_ratio: float
    vinv_norm: float


class OptimizerRow(NamedTuple):
    k: int
    rounds: int
    grad_norm: float
    fval: float
    cons_x: float
    cons_y: float


@dataclass
class RunTrace:
    """Trace of one optimizer run plus the metadata identifying it.

    ``meta`` carries measured network metrics (beta_pi, kappa_pi), the run
    parameters (n, gamma, R, seed) and the total round budget.  Rows are
    strictly increasing in k; a run cut short by the divergence guard is
    flagged and keeps only its finite prefix.
    """

    rows: list[OptimizerRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    diverged: bool = False

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def final(self) -> OptimizerRow:
        return self.rows[-1]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(fh, header: tuple[str, ...], rows, meta: dict | None = None) -> None:
    """Write rows in the interchange format: LF endings, repr floats.

    Metadata goes first as ``# key=value`` comment lines so the body stays
    byte-identical across reruns of the same configuration.
    """
    for key in sorted(meta or {}):
        fh.write(f"# {key}={_fmt((meta or {})[key])}\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_csv_path(path, header, rows, meta=None) -> None:
    with open(path, "w", newline="\n") as fh:
        write_csv(fh, header, rows, meta)


OPTIMIZER_HEADER = ("k", "rounds", "grad_norm", "fval", "cons_x", "cons_y")
PUSHSUM_HEADER = ("k", "consensus_error", "min_ratio", "max_ratio", "vinv_norm")
