"""Clause databases, Tseitin gates and DIMACS serialisation.

Clauses are stored in one flat ``array('i')`` with ``0`` terminators (the
DIMACS layout), which keeps multi-million-clause instances compact.
"""

from __future__ import annotations

import io
import os
from array import array
from typing import Hashable, Iterable, Iterator, Optional

import numpy as np

from .errors import ModelInconsistent, ParseError

__all__ = ["CnfBuilder", "CnfInstance", "Model", "read_dimacs", "write_dimacs"]


class Model:
    """A total assignment over variables ``1..V`` (index 0 unused)."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=bool)

    @classmethod
    def from_literals(cls, num_vars: int, literals: Iterable[int]) -> "Model":
        """Positive literals set true; anything unmentioned defaults to false."""
        values = np.zeros(num_vars + 1, dtype=bool)
        for lit in literals:
            if 0 < lit <= num_vars:
                values[lit] = True
        return cls(values)

    @property
    def num_vars(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, lit: int) -> bool:
        return bool(self.values[lit]) if lit > 0 else not self.values[-lit]

    def __eq__(self, other):
        return isinstance(other, Model) and np.array_equal(self.values, other.values)

    def true_vars(self) -> list:
        return [int(i) for i in np.flatnonzero(self.values[1:]) + 1]


class CnfInstance:
    """An immutable CNF with a map from indices back to what they encode."""

    def __init__(self, num_vars: int, lits: array, num_clauses: int,
                 index: dict, gates: dict, meta: Optional[dict] = None):
        self.num_vars = num_vars
        self.lits = lits
        self.num_clauses = num_clauses
        self.index = index          # encoding variable -> CNF index
        self.gates = gates          # (kind, literals) -> CNF index
        self.meta = dict(meta or {})
        self._names = None

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]], num_vars: Optional[int] = None,
                     meta=None) -> "CnfInstance":
        b = CnfBuilder()
        top = 0
        for c in clauses:
            c = list(c)
            top = max([top] + [abs(l) for l in c])
            b.add(*c)
        b.num_vars = max(top, num_vars or 0)
        return b.build(meta)

    def clauses(self) -> Iterator[tuple]:
        cur = []
        for lit in self.lits:
            if lit:
                cur.append(lit)
            else:
                yield tuple(cur)
                cur = []

    def stats(self) -> dict:
        return {"variables": self.num_vars, "clauses": self.num_clauses}

    def names(self) -> dict:
        """CNF index -> list of descriptions (shared indices have several)."""
        if self._names is None:
            names = {}
            for key, i in self.index.items():
                names.setdefault(i, []).append(describe(key))
            for (kind, lits), i in self.gates.items():
                names.setdefault(i, []).append(f"aux {kind}({', '.join(map(str, lits))})")
            self._names = names
        return self._names

    def var_map_lines(self) -> Iterator[str]:
        names = self.names()
        for i in range(1, self.num_vars + 1):
            yield f"{i}\t{' = '.join(names.get(i, ['fresh']))}"

    def unsatisfied(self, model: Model) -> list:
        """Indices of clauses the model falsifies (vectorised)."""
        if len(model.values) != self.num_vars + 1:
            raise ModelInconsistent(
                f"model covers {len(model.values) - 1} variables, instance has {self.num_vars}")
        if not self.num_clauses:
            return []
        lits = np.frombuffer(self.lits, dtype=np.int32) if len(self.lits) else np.zeros(0, np.int32)
        ends = np.flatnonzero(lits == 0)
        truth = model.values[np.abs(lits)] ^ (lits < 0)
        truth[ends] = False
        csum = np.concatenate(([0], np.cumsum(truth, dtype=np.int64)))
        starts = np.concatenate(([0], ends[:-1] + 1))
        sat = csum[ends + 1] - csum[starts] > 0
        return [int(i) for i in np.flatnonzero(~sat)]

    def check(self, model: Model) -> None:
        bad = self.unsatisfied(model)
        if bad:
            raise ModelInconsistent(f"model violates {len(bad)} clause(s), first is #{bad[0]}")


def describe(key) -> str:
    d = getattr(key, "describe", None)
    return d() if d else str(key)


class CnfBuilder:
    """Allocates variables and collects clauses.

    Keys are arbitrary hashables; gate outputs are hash-consed on their
    kind and (sorted) input literals so identical definitions share one
    auxiliary variable.
    """

    def __init__(self):
        self.num_vars = 0
        self.lits = array("i")
        self.num_clauses = 0
        self.index = {}
        self.gates = {}

    def new_var(self, key: Optional[Hashable] = None) -> int:
        self.num_vars += 1
        if key is not None:
            if key in self.index:
                raise KeyError(f"duplicate variable {key!r}")
            self.index[key] = self.num_vars
        return self.num_vars

    def var(self, key: Hashable) -> int:
        i = self.index.get(key)
        return i if i is not None else self.new_var(key)

    def alias(self, key: Hashable, i: int) -> int:
        """Register ``key`` as another name for existing variable ``i``."""
        self.index[key] = i
        return i

    def add(self, *lits: int) -> None:
        self.lits.extend(lits)
        self.lits.append(0)
        self.num_clauses += 1

    def and_gate(self, lits) -> int:
        """Literal equivalent to the conjunction of ``lits`` (two or more)."""
        key = ("and", tuple(sorted(lits)))
        out = self.gates.get(key)
        if out is None:
            out = self.gates[key] = self.new_var()
            add = self.add
            for l in lits:
                add(-out, l)
            add(out, *[-l for l in lits])
        return out

    def or_gate(self, lits) -> int:
        """Literal equivalent to the disjunction of ``lits`` (two or more)."""
        key = ("or", tuple(sorted(lits)))
        out = self.gates.get(key)
        if out is None:
            out = self.gates[key] = self.new_var()
            add = self.add
            add(-out, *lits)
            for l in lits:
                add(out, -l)
        return out

    def iff_or(self, v: int, lits) -> None:
        """``v <-> OR(lits)``; an empty disjunction forces ``v`` false."""
        self.add(-v, *lits)
        for l in lits:
            self.add(v, -l)

    def iff_and(self, v: int, lits) -> None:
        """``v <-> AND(lits)``; an empty conjunction forces ``v`` true."""
        for l in lits:
            self.add(-v, l)
        self.add(v, *[-l for l in lits])

    def build(self, meta=None) -> CnfInstance:
        return CnfInstance(self.num_vars, self.lits, self.num_clauses,
                           self.index, self.gates, meta)


# ---------------------------------------------------------------------------
# DIMACS

def dimacs_text(instance: CnfInstance) -> str:
    head = f"p cnf {instance.num_vars} {instance.num_clauses}\n"
    if not instance.num_clauses:
        return head
    lits = np.frombuffer(instance.lits, dtype=np.int32)
    zeros = lits == 0
    if zeros[0] or np.any(zeros[1:] & zeros[:-1]):
        return head + "".join(" ".join(map(str, c + (0,))) + "\n" for c in instance.clauses())
    body = " ".join(map(str, instance.lits))
    # every " 0 " token is a terminator; no clause is empty on this path
    return head + (body + " ").replace(" 0 ", " 0\n")


def write_dimacs(instance: CnfInstance, destination) -> int:
    """Write strict DIMACS to a path or binary/text stream; returns bytes written."""
    data = dimacs_text(instance).encode("ascii")
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    elif isinstance(destination, io.TextIOBase):
        destination.write(data.decode("ascii"))
    else:
        destination.write(data)
    return len(data)


def read_dimacs(source) -> CnfInstance:
    """Parse DIMACS text (or a path to it) into an instance without names."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source) as fh:
            text = fh.read()
    else:
        text = source
    header = None
    tokens = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad DIMACS header {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        tokens.extend(line.split())
    if header is None:
        raise ParseError("missing DIMACS header")
    try:
        lits = array("i", map(int, tokens))
    except ValueError:
        raise ParseError("non-integer token in DIMACS body") from None
    if lits and lits[-1] != 0:
        raise ParseError("last clause is not 0-terminated")
    num_clauses = lits.count(0)
    if num_clauses != header[1]:
        raise ParseError(f"header says {header[1]} clauses, found {num_clauses}")
    if any(abs(l) > header[0] for l in lits):
        raise ParseError("literal exceeds declared variable count")
    return CnfInstance(header[0], lits, num_clauses, {}, {})
