"""SAT backends: an external DIMACS solver process and a built-in CDCL fallback."""

from __future__ import annotations

import heapq
import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .cnf import CnfInstance, Model, write_dimacs
from .errors import SpawnError

__all__ = [
    "Satisfiable", "Unsatisfiable", "Unknown", "SolverResult",
    "solve_external", "solve_builtin", "solve", "default_solver_command",
]

ENV_SOLVER = "NONTERM_SAT_SOLVER"


@dataclass(frozen=True)
class Satisfiable:
    model: Model
    status = "SAT"


@dataclass(frozen=True)
class Unsatisfiable:
    status = "UNSAT"


@dataclass(frozen=True)
class Unknown:
    reason: str          # "timeout" or "solver-error"
    detail: str = ""
    status = "UNKNOWN"


SolverResult = Union[Satisfiable, Unsatisfiable, Unknown]


def _wheel_kissat() -> Optional[str]:
    # the passagemath-kissat wheel ships the binary under sage_wheels/bin
    try:
        import sage_wheels
    except ImportError:
        return None
    for base in getattr(sage_wheels, "__path__", []):
        cand = Path(base) / "bin" / "kissat"
        if cand.is_file() and os.access(cand, os.X_OK):
            return str(cand)
    return None


def default_solver_command() -> Optional[list]:
    """``$NONTERM_SAT_SOLVER``, else ``kissat`` on PATH, else the wheel binary."""
    env = os.environ.get(ENV_SOLVER)
    if env:
        return shlex.split(env)
    found = shutil.which("kissat") or _wheel_kissat()
    return [found] if found else None


def _command(command) -> list:
    if command is None:
        cmd = default_solver_command()
        if cmd is None:
            raise SpawnError("no external SAT solver found (set NONTERM_SAT_SOLVER)")
        return cmd
    if isinstance(command, str):
        return shlex.split(command)
    return list(command)


def parse_solver_output(text: str, num_vars: int, returncode: Optional[int] = None) -> SolverResult:
    """Interpret SAT-competition output.

    Literals beyond ``num_vars`` are ignored; variables never mentioned in a
    ``v`` line default to false.
    """
    status = None
    lits = []
    for line in text.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            try:
                lits.extend(int(tok) for tok in line[2:].split())
            except ValueError:
                return Unknown("solver-error", f"bad value line {line!r}")
    if status is None:
        status = {10: "SATISFIABLE", 20: "UNSATISFIABLE"}.get(returncode)
    if status == "SATISFIABLE":
        if returncode not in (None, 0, 10):
            return Unknown("solver-error", f"SAT status but exit code {returncode}")
        if not lits and num_vars:
            return Unknown("solver-error", "SAT status without a model")
        return Satisfiable(Model.from_literals(num_vars, lits))
    if status == "UNSATISFIABLE":
        if returncode not in (None, 0, 20):
            return Unknown("solver-error", f"UNSAT status but exit code {returncode}")
        return Unsatisfiable()
    if status == "UNKNOWN":
        return Unknown("solver-error", "solver answered UNKNOWN")
    tail = text.strip().splitlines()[-1:] or [""]
    return Unknown("solver-error", f"no result line (exit {returncode}): {tail[0][:200]}")


def solve_external(instance: CnfInstance, command=None,
                   timeout: Optional[float] = None) -> SolverResult:
    """Run an external solver on a temporary DIMACS file.

    The wall-clock ``timeout`` kills the process and discards its output.
    """
    cmd = _command(command)
    fd, path = tempfile.mkstemp(suffix=".cnf", prefix="nonterm-")
    try:
        with os.fdopen(fd, "wb") as fh:
            write_dimacs(instance, fh)
        try:
            proc = subprocess.Popen(cmd + [path], stdout=subprocess.PIPE,
                                    stderr=subprocess.PIPE, text=True)
        except (FileNotFoundError, PermissionError, NotADirectoryError) as e:
            raise SpawnError(f"cannot run solver {cmd[0]!r}: {e}") from e
        try:
            out, err = proc.communicate(timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return Unknown("timeout", f"solver exceeded {timeout:g} s")
        result = parse_solver_output(out, instance.num_vars, proc.returncode)
        if isinstance(result, Unknown) and err.strip():
            result = Unknown(result.reason, f"{result.detail}; stderr: {err.strip()[:200]}")
        return result
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass


# ---------------------------------------------------------------------------
# built-in CDCL
#
# Literals are encoded as 2*v (positive) and 2*v+1 (negative).  Two watched
# literals, first-UIP learning with local minimisation, VSIDS with a lazy
# heap, phase saving and Luby restarts.


def _luby(i):
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class _Cdcl:
    def __init__(self, num_vars):
        self.n = num_vars
        self.value = [0] * (2 * num_vars + 2)   # 1 true, -1 false, 0 unassigned
        self.level = [0] * (num_vars + 1)
        self.reason = [None] * (num_vars + 1)
        self.trail = []
        self.lim = []
        self.qhead = 0
        self.watches = [[] for _ in range(2 * num_vars + 2)]
        self.clauses = []
        self.learnts = []
        self.activity = [0.0] * (num_vars + 1)
        self.inc = 1.0
        self.phase = [1] * (num_vars + 1)       # 1 = assign false first
        self.heap = [(0.0, v) for v in range(1, num_vars + 1)]
        self.in_heap = bytearray([1]) * (num_vars + 1)
        self.conflicts = 0
        self.ok = True

    def add_clause(self, lits):
        c = sorted({(l << 1) if l > 0 else ((-l) << 1) | 1 for l in lits})
        for a, b in zip(c, c[1:]):
            if a ^ 1 == b:
                return           # tautology
        value = self.value
        c = [l for l in c if value[l] != -1]
        if any(value[l] == 1 for l in c):
            return
        if not c:
            self.ok = False
        elif len(c) == 1:
            self._assign(c[0], None)
            if self._propagate() is not None:
                self.ok = False
        else:
            self.clauses.append(c)
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def _assign(self, lit, reason):
        self.value[lit] = 1
        self.value[lit ^ 1] = -1
        v = lit >> 1
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        value = self.value
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            false_lit = trail[self.qhead] ^ 1
            self.qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if value[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if value[c[k]] != -1:
                        c[1], c[k] = c[k], false_lit
                        watches[c[1]].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if value[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return c
                    self._assign(first, c)
            del ws[j:]
        return None

    def _bump(self, v):
        act = self.activity
        act[v] += self.inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(1, self.n + 1) if self.value[2 * u] == 0]
            heapq.heapify(self.heap)
            self.in_heap = bytearray(self.value[2 * u] == 0 for u in range(self.n + 1))
        elif self.value[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _analyze(self, confl):
        seen = self.seen
        level = self.level
        reason = self.reason
        trail = self.trail
        cur = len(self.lim)
        learnt = [0]
        path = 0
        p = None
        idx = len(trail) - 1
        while True:
            for q in (confl if p is None else confl[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or any(not seen[x >> 1] and level[x >> 1] > 0 for x in r[1:]):
                keep.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = 0
        if len(keep) == 1:
            return keep, 0
        best = max(range(1, len(keep)), key=lambda i: level[keep[i] >> 1])
        keep[1], keep[best] = keep[best], keep[1]
        return keep, level[keep[1] >> 1]

    def _backtrack(self, lvl):
        if len(self.lim) <= lvl:
            return
        value = self.value
        act = self.activity
        phase = self.phase
        in_heap = self.in_heap
        stop = self.lim[lvl]
        for lit in self.trail[stop:]:
            v = lit >> 1
            value[lit] = value[lit ^ 1] = 0
            self.reason[v] = None
            phase[v] = lit & 1
            if not in_heap[v]:
                in_heap[v] = 1
                heapq.heappush(self.heap, (-act[v], v))
        del self.trail[stop:]
        del self.lim[lvl:]
        self.qhead = len(self.trail)

    def _decide(self):
        value = self.value
        if len(self.heap) > 4 * self.n + 1000:
            act = self.activity
            self.heap = [(-act[v], v) for v in range(1, self.n + 1) if value[2 * v] == 0]
            heapq.heapify(self.heap)
            self.in_heap = bytearray(value[2 * v] == 0 for v in range(self.n + 1))
        heap = self.heap
        while heap:
            _, v = heapq.heappop(heap)
            self.in_heap[v] = 0
            if value[2 * v] == 0:
                return 2 * v | self.phase[v]
        return None

    def _reduce(self):
        # called at level 0: keep the shorter half of the learnt clauses
        self.learnts.sort(key=len)
        self.learnts = self.learnts[:len(self.learnts) // 2]
        watches = [[] for _ in range(2 * self.n + 2)]
        value = self.value
        live = []
        for c in self.clauses:
            if not any(value[l] == 1 for l in c):
                live.append(c)
        self.clauses = live
        kept = [c for c in self.learnts if not any(value[l] == 1 for l in c)]
        self.learnts = kept
        for c in live + kept:
            # level-0 false literals stay; watches must avoid them
            c.sort(key=lambda l: value[l] == -1)
            watches[c[0]].append(c)
            watches[c[1]].append(c)
        self.watches = watches

    def solve(self, conflict_limit=None, deadline=None):
        if not self.ok:
            return False
        self.seen = bytearray(self.n + 1)
        if self._propagate() is not None:
            return False
        restart_no = 1
        budget = 100 * _luby(restart_no)
        since = 0
        max_learnts = max(2000, len(self.clauses) // 3)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since += 1
                if not self.lim:
                    return False
                learnt, lvl = self._analyze(confl)
                self._backtrack(lvl)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                self.inc *= 1.05
                continue
            if conflict_limit is not None and self.conflicts >= conflict_limit:
                return None
            if deadline is not None and time.monotonic() > deadline:
                return None
            if since >= budget:
                since = 0
                restart_no += 1
                budget = 100 * _luby(restart_no)
                self._backtrack(0)
                if len(self.learnts) > max_learnts:
                    self._reduce()
                    max_learnts = int(max_learnts * 1.1)
                continue
            lit = self._decide()
            if lit is None:
                return True
            self.lim.append(len(self.trail))
            self._assign(lit, None)


def solve_builtin(instance: CnfInstance, conflict_limit: Optional[int] = None,
                  timeout: Optional[float] = None) -> SolverResult:
    """Complete CDCL search; ``Unknown('timeout')`` once ``conflict_limit``
    conflicts or ``timeout`` seconds are used up before an answer."""
    s = _Cdcl(instance.num_vars)
    for clause in instance.clauses():
        s.add_clause(clause)
        if not s.ok:
            return Unsatisfiable()
    deadline = time.monotonic() + timeout if timeout is not None else None
    answer = s.solve(conflict_limit, deadline)
    if answer is None:
        return Unknown("timeout", f"stopped after {s.conflicts} conflicts")
    if not answer:
        return Unsatisfiable()
    values = [False] * (instance.num_vars + 1)
    for v in range(1, instance.num_vars + 1):
        values[v] = s.value[2 * v] == 1
    return Satisfiable(Model(values))


def solve(instance: CnfInstance, command: Union[str, Sequence[str], None] = None,
          builtin: bool = False, timeout: Optional[float] = None,
          conflict_limit: Optional[int] = None) -> SolverResult:
    """Dispatch to the external solver, falling back to the built-in one
    when none is configured or ``builtin`` is set."""
    if builtin or (command is None and default_solver_command() is None):
        return solve_builtin(instance, conflict_limit, timeout)
    return solve_external(instance, command, timeout)
