"""Cutting-pattern enumeration and low-waste pattern selection.

A cutting pattern says how many pieces of each type are sliced from one
full-length object.  Only maximal patterns are enumerated: a pattern whose
leftover could still hold another piece is dominated on waste, and any
surplus pieces it would have produced can instead flow into piece stock.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, PatternError
from .instance import Instance


@dataclass(frozen=True)
class CuttingPattern:
    """One way to cut an object on machine ``m`` into grammage-``k`` pieces.

    ``counts[p]`` is the number of pieces of type ``pieces[p]`` cut;
    ``waste`` is the unused length in cm.
    """

    k: int
    m: int
    pieces: tuple[int, ...]
    counts: tuple[int, ...]
    waste: int

    def full_counts(self, nf: int) -> np.ndarray:
        """Counts expanded to a length-``nf`` vector over all piece types."""
        out = np.zeros(nf, dtype=np.int64)
        out[list(self.pieces)] = self.counts
        return out


def enumerate_patterns(inst: Instance, m: int, k: int) -> list[CuttingPattern]:
    """All maximal cutting patterns for machine ``m`` and grammage ``k``.

    A pattern is maximal when its waste is shorter than every piece of the
    grammage.  The result is ordered by ascending waste, ties broken by
    lexicographically descending count vector, so the order is deterministic
    and the lowest-waste patterns come first.

    Raises:
        PatternError: if no piece of grammage ``k`` fits the object.
    """
    pieces = inst.pieces_of(k)
    if pieces.size == 0:
        raise PatternError(f"grammage {k} has no piece types")
    length = int(inst.L[m])
    lengths = [int(inst.ell[i]) for i in pieces]
    if min(lengths) > length:
        raise PatternError(
            f"no piece of grammage {k} fits the length-{length} object of machine {m}"
        )
    shortest = min(lengths)
    found: list[tuple[int, tuple[int, ...]]] = []
    n = len(lengths)
    counts = [0] * n

    def descend(idx: int, remaining: int) -> None:
        if idx == n:
            if remaining < shortest:
                found.append((remaining, tuple(counts)))
            return
        piece_len = lengths[idx]
        for a in range(remaining // piece_len, -1, -1):
            counts[idx] = a
            descend(idx + 1, remaining - a * piece_len)
        counts[idx] = 0

    descend(0, length)
    found.sort(key=lambda item: (item[0], tuple(-a for a in item[1])))
    pieces_t = tuple(int(i) for i in pieces)
    return [
        CuttingPattern(k=k, m=m, pieces=pieces_t, counts=cnt, waste=waste)
        for waste, cnt in found
    ]


def select_heuristic(patterns: list[CuttingPattern], n: int) -> list[CuttingPattern]:
    """First ``min(n, len(patterns))`` patterns of the deterministic order.

    Assumes ``patterns`` is already sorted as produced by
    :func:`enumerate_patterns`; the same selection is reused in every period.
    """
    if n < 1:
        raise ValueError("pattern selection size must be at least 1")
    return list(patterns[:n])


@dataclass(frozen=True)
class PatternSet:
    """Ordered cutting patterns for every (grammage, machine) pair."""

    K: int
    M: int
    by_km: tuple[tuple[tuple[CuttingPattern, ...], ...], ...]  # [k][m] -> patterns

    @classmethod
    def build(cls, inst: Instance, limit: int | None = None) -> "PatternSet":
        """Enumerate maximal patterns for every (k, m); optionally keep only
        the ``limit`` lowest-waste patterns per pair."""
        rows = []
        for k in range(inst.K):
            per_m = []
            for m in range(inst.M):
                pats = enumerate_patterns(inst, m, k)
                if limit is not None:
                    pats = select_heuristic(pats, limit)
                per_m.append(tuple(pats))
            rows.append(tuple(per_m))
        return cls(K=inst.K, M=inst.M, by_km=tuple(rows))

    def for_km(self, k: int, m: int) -> tuple[CuttingPattern, ...]:
        return self.by_km[k][m]

    def count(self, k: int, m: int) -> int:
        return len(self.by_km[k][m])

    def total(self) -> int:
        return sum(len(p) for row in self.by_km for p in row)

    def validate(self) -> None:
        """Check that every (k, m) list is nonempty and duplicate-free."""
        for k in range(self.K):
            for m in range(self.M):
                pats = self.by_km[k][m]
                if not pats:
                    raise ConfigurationError(f"empty pattern list for grammage {k}, machine {m}")
                if len({p.counts for p in pats}) != len(pats):
                    raise ConfigurationError(f"duplicate patterns for grammage {k}, machine {m}")


def write_patterns_csv(patterns: PatternSet, nf: int, path: str | Path) -> None:
    """Export a pattern set as CSV rows (k, m, j, a_1..a_Nf, waste_cm)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "m", "j"] + [f"a_{i + 1}" for i in range(nf)] + ["waste_cm"])
        for k in range(patterns.K):
            for m in range(patterns.M):
                for j, pat in enumerate(patterns.for_km(k, m)):
                    row = [k, m, j] + pat.full_counts(nf).tolist() + [pat.waste]
                    writer.writerow(row)
