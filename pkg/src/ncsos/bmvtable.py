"""Status table for ``S_{m,k}(X^2, Y^2)`` and the descent closure for trace positivity."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

TRIVIAL_IN = "trivial-in"
PROVEN_IN = "proven-in"
NUMERIC_IN = "numeric-in"
PROVEN_OUT = "proven-out"
NUMERIC_OUT = "numeric-out"
UNKNOWN = "unknown"

SYMBOL = {
    TRIVIAL_IN: ".",
    PROVEN_IN: "⊕",
    NUMERIC_IN: "+",
    PROVEN_OUT: "⊖",
    NUMERIC_OUT: "−",
    UNKNOWN: "?",
}
# accepted spellings in data files
_FROM_SYMBOL = {"⊕": PROVEN_IN, "+": NUMERIC_IN, "⊖": PROVEN_OUT, "-": NUMERIC_OUT, "−": NUMERIC_OUT,
                "?": UNKNOWN, ".": TRIVIAL_IN}

PROVEN = "proven"
OPEN = "open"


def _check_pair(m: int, k: int) -> None:
    if not (isinstance(m, int) and isinstance(k, int)) or m < 0 or not (0 <= k <= m):
        raise ValueError(f"invalid pair (m={m}, k={k}): need 0 <= k <= m")


def is_trivial(m: int, k: int) -> bool:
    """Every word has nonnegative trace when one letter occurs at most twice."""
    _check_pair(m, k)
    return k <= 2 or m - k <= 2


def status_from_symbol(sym: str) -> str:
    try:
        return _FROM_SYMBOL[sym]
    except KeyError:
        raise ValueError(f"unknown status symbol {sym!r}") from None


@dataclass(frozen=True)
class StatusTable:
    """Cone-membership statuses plus the set of pairs where trace positivity is proven.

    ``theta2`` holds explicit entries only; trivial pairs and the symmetry
    ``k <-> m-k`` are applied on lookup.  ``proven_bmv`` lists nontrivial
    pairs proven directly or by descent.
    """

    theta2: Mapping[tuple[int, int], str] = field(default_factory=dict)
    sources: Mapping[tuple[int, int], str] = field(default_factory=dict)
    proven_bmv: frozenset = frozenset()

    def theta2_status(self, m: int, k: int) -> str:
        if is_trivial(m, k):
            return TRIVIAL_IN
        st = self.theta2.get((m, k)) or self.theta2.get((m, m - k))
        return st or UNKNOWN

    def source(self, m: int, k: int) -> str | None:
        return self.sources.get((m, k)) or self.sources.get((m, m - k))

    def bmv_status(self, m: int, k: int) -> str:
        if is_trivial(m, k) or (m, k) in self.proven_bmv or (m, m - k) in self.proven_bmv:
            return PROVEN
        return OPEN

    def with_theta2(self, m: int, k: int, status: str, source: str = "this-artifact") -> "StatusTable":
        _check_pair(m, k)
        if status not in SYMBOL:
            raise ValueError(f"unknown status {status!r}")
        th = dict(self.theta2)
        src = dict(self.sources)
        th[(m, k)] = status
        src[(m, k)] = source
        return StatusTable(th, src, self.proven_bmv)

    def max_m(self) -> int:
        ms = [m for m, _ in self.theta2] + [m for m, _ in self.proven_bmv]
        return max(ms, default=0)

    def theta2_in_pairs(self) -> set[tuple[int, int]]:
        """Nontrivial pairs with ``S_{m,k}(X^2,Y^2)`` proven in the cone (both orientations)."""
        out = set()
        for (m, k), st in self.theta2.items():
            if st == PROVEN_IN:
                out.add((m, k))
                out.add((m, m - k))
        return out


def load_known(path=None) -> StatusTable:
    """Read a known-results JSON list of ``{m, k, theta2, source}``."""
    if path is None:
        text = resources.files("ncsos.data").joinpath("known_results.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return table_from_entries(json.loads(text))


def load_known_original() -> StatusTable:
    text = resources.files("ncsos.data").joinpath("known_results_original.json").read_text(encoding="utf-8")
    return table_from_entries(json.loads(text))


def table_from_entries(entries: Iterable[Mapping]) -> StatusTable:
    th, src = {}, {}
    for e in entries:
        try:
            m, k = int(e["m"]), int(e["k"])
            st = status_from_symbol(str(e["theta2"]))
        except (KeyError, TypeError, ValueError) as err:
            raise ValueError(f"malformed known-results entry {e!r}") from err
        _check_pair(m, k)
        th[(m, k)] = st
        src[(m, k)] = str(e.get("source", ""))
    return StatusTable(th, src)


def entries_from_table(t: StatusTable) -> list[dict]:
    out = []
    for (m, k) in sorted(t.theta2):
        sym = SYMBOL[t.theta2[(m, k)]]
        out.append({"m": m, "k": k, "theta2": "-" if sym == "−" else sym, "source": t.sources.get((m, k), "")})
    return out


def _dominated(m: int, k: int, M: int, K: int) -> bool:
    return K >= k and M - K >= m - k


def descent_closure(proven_bmv: Iterable[tuple[int, int]], table: StatusTable | None = None) -> StatusTable:
    """Close ``proven_bmv`` under descent and the symmetry ``k <-> m-k``.

    A failure at ``(m,k)`` would propagate to every ``(M,K)`` with ``K >= k``
    and ``M-K >= m-k``; contrapositively, a proof at ``(M,K)`` gives one at
    every such ``(m,k)``.
    """
    gens = set()
    for m, k in proven_bmv:
        _check_pair(m, k)
        gens.add((m, k))
        gens.add((m, m - k))
    derived = set()
    top = max((m for m, _ in gens), default=0)
    for m in range(top + 1):
        for k in range(m + 1):
            if is_trivial(m, k):
                continue
            if any(_dominated(m, k, M, K) for M, K in gens):
                derived.add((m, k))
    base = table or StatusTable()
    return StatusTable(dict(base.theta2), dict(base.sources), frozenset(derived))


def render_row(t: StatusTable, m: int) -> str:
    return " ".join(SYMBOL[t.theta2_status(m, k)] for k in range(m + 1))


def render_table(t: StatusTable, m_max: int) -> str:
    """One line per ``m = 0..m_max``: row label, then one symbol per ``k``."""
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    width = len(str(m_max))
    return "\n".join(f"{m:>{width}} | {render_row(t, m)}" for m in range(m_max + 1))


def render_bmv(t: StatusTable, m_max: int) -> str:
    """Trace-positivity triangle: ``P`` proven, ``o`` open."""
    width = len(str(m_max))
    lines = []
    for m in range(m_max + 1):
        lines.append(f"{m:>{width}} | " + " ".join("P" if t.bmv_status(m, k) == PROVEN else "o"
                                                    for k in range(m + 1)))
    return "\n".join(lines)


def bmv_proven_up_to(t: StatusTable) -> int:
    """Largest ``M`` such that every pair with ``m <= M`` is proven."""
    m = 0
    while all(t.bmv_status(m, k) == PROVEN for k in range(m + 1)):
        m += 1
        if m > 10_000:
            break
    return m - 1
