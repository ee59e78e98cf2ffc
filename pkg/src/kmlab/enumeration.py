"""Budgeted enumeration of minimal programs.

The program tree is walked depth first.  A node is expanded only while its
run asks for more input, so every subtree below a program that has stopped
reading is pruned.  The walk records *productive* nodes only: a node is a
minimal program for ``out[:j]`` exactly when its parent had emitted fewer
than ``j`` symbols.  Km, M and K for every covered string then follow by a
min / sum / min reduction that is independent of walk order.

Two walk modes exist.  A *survey* of depth ``n`` covers every string of
length at most ``n``.  A *path* walk along ``omega`` covers the prefixes of
``omega`` and their one-symbol deviations ``omega[:j] + (a,)``; subtrees
whose output left ``omega`` are not expanded further.
"""
import hashlib
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import refvm
from .machine import HALTED, INF, NEEDS_INPUT, RUNNING, RefVM, fmt, symbols


@dataclass(frozen=True)
class Budget:
    """Program-length and step limits.

    ``sub_len`` bounds the programs handed to an embedded machine: below a
    delegation prefix ``p`` the walk continues to ``len(p) + sub_len`` bits
    instead of ``max_len``.  Any such limit describes a prefix-closed set of
    programs, so all estimates stay one-sided and budget-monotone.
    """

    max_len: int
    max_steps: int
    sub_len: int | None = None

    def __post_init__(self):
        if self.max_len < 0 or self.max_steps < 0:
            raise ValueError("budget components must be >= 0")
        if self.sub_len is not None and self.sub_len < 0:
            raise ValueError("sub_len must be >= 0")

    def __str__(self):
        extra = f",sub={self.sub_len}" if self.sub_len is not None else ""
        return f"L={self.max_len},T={self.max_steps}{extra}"


@dataclass(frozen=True)
class Node:
    program: tuple
    output: tuple          # truncated to cap + 1 symbols
    parent_outlen: int     # -1 for the walk root
    status: str

    @property
    def length(self):
        return len(self.program)


@dataclass(frozen=True)
class MinimalProgramSet:
    target: tuple
    programs: tuple
    budget: Budget

    def __len__(self):
        return len(self.programs)

    def __iter__(self):
        return iter(self.programs)


@dataclass(frozen=True)
class ComplexityEstimate:
    """A one-sided, budget-stamped complexity bound.

    For ``Km`` and ``K`` ``value`` is a length in bits (or ``inf``) and the
    bound is an upper one.  For ``KM`` ``value`` is the measure ``M`` as an
    exact dyadic Fraction and the bound on ``M`` is a lower one.
    """

    kind: str
    value: object
    budget: Budget

    @property
    def direction(self):
        return "lower" if self.kind == "KM" else "upper"

    @property
    def bits(self):
        """Length in bits: exact int when dyadic-pure, else a float, ``inf`` for 0."""
        if self.kind != "KM":
            return self.value
        return neg_log2(self.value)

    @property
    def measure(self):
        if self.kind == "KM":
            return self.value
        return Fraction(0) if self.value == INF else Fraction(1, 2 ** self.value)


def neg_log2(q):
    q = Fraction(q)
    if q <= 0:
        return INF
    if q.numerator == 1 and q.denominator & (q.denominator - 1) == 0:
        return q.denominator.bit_length() - 1
    return -math.log2(q)


# ---------------------------------------------------------------- walking

_EMPTY = np.zeros(0, dtype=np.uint8)


def _unpack(key, n):
    return tuple((int(key) >> (n - 1 - i)) & 1 for i in range(n))


def _walk_refvm(prefix, par, L, T, cap, target):
    if L > refvm.MAX_KEY_BITS:
        raise ValueError(f"refvm walks are limited to {refvm.MAX_KEY_BITS}-bit programs")
    if target is None:
        if cap > refvm.MAX_KEY_BITS - 1:
            raise ValueError("survey depth too large for the refvm kernel")
        tarr, tlen = _EMPTY, -1
    else:
        if any(v > 1 for v in target):
            return []  # refvm output is binary
        tarr, tlen = np.array(target, dtype=np.uint8), len(target)
    root = np.array(prefix, dtype=np.uint8)
    r_len, r_par, r_out, r_st, r_key, r_prog, r_last, _ = refvm.vm_walk(
        root, L, T, cap, tarr, tlen, par)
    nodes = []
    for i in range(len(r_len)):
        n, outlen, st = int(r_len[i]), int(r_out[i]), int(r_st[i])
        pp = int(r_par[i])
        if not (pp < 0 or outlen > pp or st == refvm.HALTED):
            continue
        if target is None:
            out = _unpack(r_key[i], outlen)
        elif outlen == 0:
            out = ()
        else:
            out = tuple(target[:outlen - 1]) + (int(r_last[i]),)
        status = HALTED if st == refvm.HALTED else (
            NEEDS_INPUT if st == refvm.NEEDS_INPUT else RUNNING)
        nodes.append(Node(_unpack(r_prog[i], n), out, pp, status))
    return nodes


def _clip(out, cap, target):
    """Truncate an output for recording; returns (output, left_the_window)."""
    if target is None:
        if len(out) > cap:
            return out[:cap + 1], True
        return out, False
    n = min(len(out), len(target))
    for j in range(n):
        if out[j] != target[j]:
            return out[:j + 1], True
    if len(out) > len(target):
        return out[:len(target) + 1], True
    return out, False


class _Walker:
    def __init__(self, budget, cap, target, split):
        self.budget = budget
        self.cap = cap
        self.target = target
        self.split = split
        self.tasks = []
        self._memo = {}

    def walk(self, machine, prefix, par, L, absp=()):
        """Records below ``prefix``; ``absp`` is prepended to every program
        (the delegation path that led to ``machine``)."""
        if isinstance(machine, RefVM) and self.split <= len(absp):
            nodes = _walk_refvm(prefix, par, L, self.budget.max_steps, self.cap, self.target)
            if absp:
                nodes = [Node(absp + n.program, n.output, n.parent_outlen, n.status)
                         for n in nodes]
            return nodes
        T = self.budget.max_steps
        root = tuple(prefix)
        nodes = []
        stack = [(root, par)]
        while stack:
            p, pr = stack.pop()
            sub = machine.delegate(p)
            if sub is not None:
                sub_L = self.budget.sub_len if self.budget.sub_len is not None else L - len(p)
                nodes.extend(self._delegated(sub, pr, sub_L, absp + p))
                continue
            if self.split and len(absp) + len(p) == self.split and p != root:
                self.tasks.append((machine, p, pr, L, absp))
                continue
            res = machine.run(p, T)
            out, left = _clip(res.output, self.cap, self.target)
            status = res.status
            if left and status == HALTED:
                status = RUNNING
            if pr < 0 or len(out) > pr or status == HALTED:
                nodes.append(Node(absp + p, out, pr, status))
            if res.status == NEEDS_INPUT and not left and len(p) < L:
                stack.append((p + (1,), len(out)))
                stack.append((p + (0,), len(out)))
        return nodes

    def _delegated(self, sub, par, L, absp):
        # many prefixes can lead to the same embedded machine; its subtree
        # depends only on (machine, length limit, parent output length)
        if self.split > len(absp):
            return self.walk(sub, (), par, L, absp)
        key = (sub.tag, L, par)
        rel = self._memo.get(key)
        if rel is None:
            rel = self._memo[key] = self.walk(sub, (), par, L)
        return [Node(absp + n.program, n.output, n.parent_outlen, n.status) for n in rel]


def walk(machine, budget, *, depth=None, target=None, workers=1, split_depth=None):
    """All productive nodes of the budgeted program tree, sorted by program.

    Exactly one of ``depth`` (survey) and ``target`` (path) must be given.
    With ``workers > 1`` the tree is cut at ``split_depth`` and the disjoint
    subtrees are walked concurrently; the result does not depend on it.
    """
    if (depth is None) == (target is None):
        raise ValueError("give exactly one of depth and target")
    if target is not None:
        target = symbols(target)
        cap = len(target)
    else:
        if depth < 0:
            raise ValueError("depth must be >= 0")
        cap = depth
    split = 0
    if workers > 1:
        split = split_depth if split_depth is not None else max(1, min(budget.max_len, 6))
    w = _Walker(budget, cap, target, split)
    nodes = w.walk(machine, (), -1, budget.max_len)
    if w.tasks:
        def job(task):
            m, p, pr, L, absp = task
            return _Walker(budget, cap, target, 0).walk(m, p, pr, L, absp)

        with ThreadPoolExecutor(max_workers=workers) as ex:
            for sub_nodes in ex.map(job, w.tasks):
                nodes.extend(sub_nodes)
    return sorted(nodes, key=lambda n: (len(n.program), n.program))


# ------------------------------------------------------------ aggregation

class _Table:
    """Km, M (numerators over 2^D) and K for a set of covered strings."""

    def __init__(self):
        self.km = {}
        self.mass = {}      # x -> (numerator, D)
        self.k = {}
        self.minimal = {}   # x -> list of programs

    def absorb(self, nodes, cap):
        D = max((n.length for n in nodes), default=0)
        mass = {}
        for nd in nodes:
            lo = max(nd.parent_outlen + 1, 0)
            hi = min(len(nd.output), cap)
            w = 1 << (D - nd.length)
            for j in range(lo, hi + 1):
                x = nd.output[:j]
                if nd.length < self.km.get(x, INF):
                    self.km[x] = nd.length
                mass[x] = mass.get(x, 0) + w
                self.minimal.setdefault(x, []).append(nd.program)
            if nd.status == HALTED and len(nd.output) <= cap:
                x = nd.output
                if nd.length < self.k.get(x, INF):
                    self.k[x] = nd.length
        for x, num in mass.items():
            self.mass[x] = Fraction(num, 1 << D)


class Estimator:
    """Exact budgeted Km, M and K for one machine and budget.

    Strings are covered lazily: querying an uncovered string triggers a
    path walk along it.  ``survey(n)`` covers all strings up to length n and
    ``along(omega)`` covers omega's prefixes and their deviations in one go.
    """

    def __init__(self, machine, budget, workers=1):
        self.machine = machine
        self.budget = budget
        self.workers = workers
        self._survey = -1
        self._paths = []
        self._t = _Table()
        self._lock = threading.Lock()
        self.nodes_walked = 0

    def survey(self, depth):
        with self._lock:
            if depth <= self._survey:
                return self
            nodes = walk(self.machine, self.budget, depth=depth, workers=self.workers)
            self._absorb(nodes, depth)
            self._survey = depth
        return self

    def along(self, omega):
        omega = symbols(omega)
        with self._lock:
            if not self._covers_path(omega):
                nodes = walk(self.machine, self.budget, target=omega, workers=self.workers)
                self._absorb(nodes, len(omega))
                self._paths.append(omega)
        return self

    def _absorb(self, nodes, cap):
        t = _Table()
        t.absorb(nodes, cap)
        # a later walk may cover strings seen before; its values are the
        # complete ones for that string, so they replace the old entries
        for name in ("km", "mass", "k", "minimal"):
            getattr(self._t, name).update(getattr(t, name))
        self.nodes_walked += len(nodes)

    def _covers_path(self, omega):
        return any(len(w) >= len(omega) and w[:len(omega)] == omega for w in self._paths)

    def covers(self, x, halting=False):
        x = symbols(x)
        if len(x) <= self._survey:
            return True
        for w in self._paths:
            if len(w) < len(x):
                continue
            if w[:len(x)] == x:
                return True
            if not halting and w[:len(x) - 1] == x[:-1]:
                return True
        return False

    def _ensure(self, x, halting=False):
        if not self.covers(x, halting):
            self.along(x)

    def km(self, x):
        x = symbols(x)
        self._ensure(x)
        return self._t.km.get(x, INF)

    def M(self, x):
        x = symbols(x)
        self._ensure(x)
        return self._t.mass.get(x, Fraction(0))

    def k(self, x):
        x = symbols(x)
        self._ensure(x, halting=True)
        return self._t.k.get(x, INF)

    def minimal(self, x):
        x = symbols(x)
        self._ensure(x)
        return tuple(sorted(self._t.minimal.get(x, ()), key=lambda p: (len(p), p)))

    def shortest(self, x):
        """Lexicographically first program among the shortest minimal ones."""
        progs = self.minimal(x)
        return progs[0] if progs else None


_ESTIMATORS = {}
_EST_LOCK = threading.Lock()


def estimator(machine, budget, workers=1):
    """Shared Estimator per (machine, budget)."""
    key = (machine_hash(machine), budget)
    with _EST_LOCK:
        est = _ESTIMATORS.get(key)
        if est is None:
            est = _ESTIMATORS[key] = Estimator(machine, budget, workers)
    return est


def clear_cache():
    with _EST_LOCK:
        _ESTIMATORS.clear()


def machine_hash(machine):
    return hashlib.sha1(machine.tag.encode()).hexdigest()[:12]


def enumerate_minimal(machine, x, budget):
    x = symbols(x)
    return MinimalProgramSet(x, estimator(machine, budget).minimal(x), budget)


def km_upper(machine, x, budget):
    return ComplexityEstimate("Km", estimator(machine, budget).km(x), budget)


def M_lower(machine, x, budget):
    return ComplexityEstimate("KM", estimator(machine, budget).M(x), budget)


def k_upper(machine, x, budget):
    if not machine.supports_halt:
        raise ValueError(f"{machine.tag} has no halting semantics")
    return ComplexityEstimate("K", estimator(machine, budget).k(x), budget)


class EstimateCache:
    """Text cache of estimates, one ``machine-hash, x, kind, value, L, T`` per
    line, with ``sub_len`` as an optional seventh field."""

    def __init__(self, path):
        self.path = path
        self.entries = {}
        if os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    h, x, kind, value, L, T, *sub = (f.strip() for f in line.split(","))
                    sub = int(sub[0]) if sub else None
                    self.entries[(h, x, kind, int(L), int(T), sub)] = _parse_value(kind, value)

    def get(self, machine, x, kind, budget):
        return self.entries.get(self._key(machine, x, kind, budget))

    def put(self, machine, x, est):
        self.entries[self._key(machine, x, est.kind, est.budget)] = est.value

    def _key(self, machine, x, kind, budget):
        return (machine_hash(machine), fmt(symbols(x)), kind, budget.max_len,
                budget.max_steps, budget.sub_len)

    def save(self):
        with open(self.path, "w") as fh:
            for (h, x, kind, L, T, sub), v in sorted(self.entries.items(),
                                                     key=lambda kv: str(kv[0])):
                tail = "" if sub is None else f", {sub}"
                fh.write(f"{h}, {x}, {kind}, {_fmt_value(v)}, {L}, {T}{tail}\n")


def _fmt_value(v):
    if v == INF:
        return "inf"
    return str(v)


def _parse_value(kind, s):
    if s == "inf":
        return INF
    return Fraction(s) if kind == "KM" else int(s)
