"""Monotone machines: the evaluator contract, the reference VM wrapper and
the constructed counterexample machines.

Strings are tuples of ints.  Every public entry point also accepts a str of
digits (``"0101"``) and converts it with :func:`symbols`.
"""
import math
import shlex
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import refvm

INF = math.inf

RUNNING = "running"
HALTED = "halted"
NEEDS_INPUT = "needs-input"
BUDGET_EXHAUSTED = "budget-exhausted"

_VM_STATUS = {
    refvm.NEEDS_INPUT: NEEDS_INPUT,
    refvm.HALTED: HALTED,
    refvm.BUDGET: BUDGET_EXHAUSTED,
    refvm.CAPPED: RUNNING,
}


@dataclass(frozen=True)
class Alphabet:
    size: int = 2

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("alphabet needs at least two symbols")

    @property
    def symbols(self):
        return tuple(range(self.size))

    def strings(self, n):
        """All strings of length exactly n, in lexicographic order."""
        return [tuple(s) for s in product(range(self.size), repeat=n)]

    def strings_upto(self, n):
        return [x for k in range(n + 1) for x in self.strings(k)]


def symbols(x):
    """Coerce ``"0101"``, ``[0, 1]`` or a tuple to a tuple of ints."""
    if isinstance(x, tuple):
        return x
    if isinstance(x, str):
        if x in ("", "eps", "ε"):
            return ()
        return tuple(int(c) for c in x)
    return tuple(int(c) for c in x)


bits = symbols


def fmt(x):
    """Render a symbol string for humans; ε for the empty string."""
    if not x:
        return "ε"
    if all(0 <= s < 10 for s in x):
        return "".join(map(str, x))
    return ",".join(map(str, x))


@dataclass(frozen=True)
class StepOutcome:
    output: tuple
    consumed: int
    steps_used: int
    status: str


class MonotoneMachine:
    """Evaluator contract ``run(p, T) -> StepOutcome``.

    Subclasses may also provide

    * ``delegate(p)``: a machine ``V`` such that this machine behaves as
      ``V`` on every program ``p + q`` (``U(p q) = V(q)``), else None;
    * ``km_closed_form(x)``: the exact monotone complexity, or None when
      no closed form is available for this configuration.
    """

    tag = "machine"
    alphabet = Alphabet(2)
    supports_halt = False

    def run(self, p, T):
        return self._run(bits(p), T)

    def _run(self, p, T):
        raise NotImplementedError

    def delegate(self, p):
        return None

    def km_closed_form(self, x):
        return None

    def __repr__(self):
        return f"<{type(self).__name__} {self.tag}>"


def run(machine, p, T):
    if T < 0:
        raise ValueError("step budget must be >= 0")
    return machine.run(p, T)


def outputs_prefix(machine, p, x, T):
    """True iff the run on ``p`` within ``T`` steps has emitted ``x``.

    ``needs-input`` outcomes count as soon as the prefix condition holds.
    """
    p, x = bits(p), symbols(x)
    res = machine.run(p, T)
    return res.consumed <= len(p) and res.output[:len(x)] == x


class RefVM(MonotoneMachine):
    """The reference bytecode VM from :mod:`kmlab.refvm`."""

    tag = "refvm"
    supports_halt = True

    def _run(self, p, T):
        prog = np.array(p, dtype=np.uint8)
        out = np.zeros(T + 2, dtype=np.uint8)
        status, consumed, steps, outlen = refvm.vm_run(
            prog, len(p), T, out, T + 1, _EMPTY, -1)
        return StepOutcome(tuple(int(v) for v in out[:outlen]), int(consumed),
                           int(steps), _VM_STATUS[int(status)])

    def __eq__(self, other):
        return isinstance(other, RefVM)

    def __hash__(self):
        return hash("refvm")


_EMPTY = np.zeros(0, dtype=np.uint8)
_REFVM = RefVM()


def reference_universal():
    return _REFVM


def _silent(consumed, T, output=()):
    return StepOutcome(tuple(output), consumed, T, BUDGET_EXHAUSTED)


def _emit(output, T, consumed, tail_status):
    """Emit ``output`` one symbol per step, then end in ``tail_status``."""
    if len(output) > T:
        return StepOutcome(tuple(output[:T]), consumed, T, BUDGET_EXHAUSTED)
    if tail_status == BUDGET_EXHAUSTED:
        return StepOutcome(tuple(output), consumed, T, BUDGET_EXHAUSTED)
    return StepOutcome(tuple(output), consumed, len(output), tail_status)


def _shift(res, k):
    return StepOutcome(res.output, res.consumed + k, res.steps_used, res.status)


class V5Machine(MonotoneMachine):
    """``U(0^s) = 0^inf``, ``U(q) = 0^(t-1) 1`` then silence for the s-bit
    big-endian integer ``t = q`` in 1..2^s-2, and ``U(1^s p) = U'(p)``
    when an embedded machine is given (silence otherwise)."""

    def __init__(self, s, uprime=None):
        if s < 2:
            raise ValueError("v5 machine needs s >= 2")
        self.s = s
        self.uprime = uprime
        self.tag = f"builtin:v5 s={s} uprime={'on' if uprime else 'off'}"

    def _run(self, p, T):
        s = self.s
        if len(p) < s:
            return StepOutcome((), len(p), 0, NEEDS_INPUT)
        q = p[:s]
        if not any(q):
            return _emit((0,) * T, T, s, BUDGET_EXHAUSTED)
        if all(q):
            if self.uprime is None:
                return _silent(s, T)
            return _shift(self.uprime.run(p[s:], T), s)
        t = int("".join(map(str, q)), 2)
        return _emit((0,) * (t - 1) + (1,), T, s, BUDGET_EXHAUSTED)

    def delegate(self, p):
        if self.uprime is not None and len(p) == self.s and all(p):
            return self.uprime
        return None

    def km_closed_form(self, x):
        if self.uprime is not None:
            return None
        x = symbols(x)
        if not x:
            return 0
        if not any(x):
            return self.s
        t = len(x)
        if x[-1] == 1 and not any(x[:-1]) and t <= 2 ** self.s - 2:
            return self.s
        return INF


class CopyMachine(MonotoneMachine):
    """Leading 1: copy the rest of the tape to the output, withholding
    everything since the last emitted symbol until a 0 is read, so
    ``U(1 x 0) = x 0``.  ``U(0^(s+1) p) = U'(p)`` when an embedded machine
    is given; any other program starting with 0 is silent."""

    def __init__(self, s=8, uprime=None):
        if s < 0:
            raise ValueError("s must be >= 0")
        self.s = s
        self.uprime = uprime
        self.tag = f"builtin:copy s={s} uprime={'on' if uprime else 'off'}"

    def _run(self, p, T):
        if not p:
            return StepOutcome((), 0, 0, NEEDS_INPUT)
        if p[0] == 0:
            if self.uprime is None:
                return _silent(1, T)
            k = self.s + 1
            head = p[:k]
            if any(head):
                return _silent(head.index(1) + 1, T)
            if len(p) < k:
                return StepOutcome((), len(p), 0, NEEDS_INPUT)
            return _shift(self.uprime.run(p[k:], T), k)
        out = []
        last = 0
        for i in range(1, len(p)):
            if p[i] == 0:
                out.extend(p[last + 1:i + 1])
                last = i
                if len(out) >= T:
                    return StepOutcome(tuple(out[:T]), i + 1, T, BUDGET_EXHAUSTED)
        return StepOutcome(tuple(out), len(p), len(out), NEEDS_INPUT)

    def delegate(self, p):
        k = self.s + 1
        if self.uprime is not None and len(p) == k and not any(p):
            return self.uprime
        return None

    def km_closed_form(self, x):
        if self.uprime is not None:
            return None
        x = symbols(x)
        if not x:
            return 0
        return len(x) + (1 if x[-1] == 0 else 2)


class BlockMachine(MonotoneMachine):
    """Block decoder for a set ``X0`` of outcome symbols (1 excluded).

    ``Q`` is the first ``|X0|`` s-bit words in lexicographic order and
    ``b`` maps them onto sorted ``X0``.  Decoding: ``d(q) = b(q) 1^s`` for
    ``q`` in ``Q`` and ``d(z) = 1 z`` otherwise.  With leading bit 1 the
    machine decodes successive s-bit blocks, withholding output until a
    block from ``Q`` arrives.  ``U(0 z p) = U'(p)`` for ``z`` of 3s bits
    when an embedded machine is given; otherwise ``U(0 p)`` is silent.
    """

    def __init__(self, x0, s, uprime=None, alphabet_size=None):
        x0 = tuple(sorted(set(symbols(x0))))
        if not x0:
            raise ValueError("X0 must be nonempty")
        if 1 in x0:
            raise ValueError("symbol 1 is the designated outcome and cannot be in X0")
        if s < 1 or len(x0) > 2 ** s - 1:
            raise ValueError("need |X0| <= 2^s - 1")
        size = alphabet_size or max(2, max(x0) + 1)
        if max(x0) >= size:
            raise ValueError("X0 symbol outside alphabet")
        self.x0, self.s, self.uprime = x0, s, uprime
        self.alphabet = Alphabet(size)
        self.Q = [tuple(w) for w in product((0, 1), repeat=s)][:len(x0)]
        self._b = dict(zip(self.Q, x0))
        self._c = {sym: q for q, sym in self._b.items()}
        self.tag = (f"builtin:block s={s} x0={''.join(map(str, x0))}"
                    f" uprime={'on' if uprime else 'off'}")

    def decode(self, z):
        z = tuple(z)
        if z in self._b:
            return (self._b[z],) + (1,) * self.s
        return (1,) + z

    def encode(self, x):
        """Inverse block code ``c`` on strings of whole blocks from ``A``."""
        x, n = symbols(x), self.s + 1
        if len(x) % n:
            raise ValueError("not a whole number of blocks")
        out = ()
        for i in range(0, len(x), n):
            blk = x[i:i + n]
            if blk[0] == 1:
                z = blk[1:]
                if z in self._b or any(v > 1 for v in z):
                    raise ValueError(f"block {blk} not in A")
                out += z
            else:
                if blk[0] not in self._c or blk[1:] != (1,) * self.s:
                    raise ValueError(f"block {blk} not in A")
                out += self._c[blk[0]]
        return out

    def blocks(self):
        """The block alphabet A (all 2^s admissible blocks)."""
        return [self.decode(z) for z in product((0, 1), repeat=self.s)]

    def _run(self, p, T):
        if not p:
            return StepOutcome((), 0, 0, NEEDS_INPUT)
        s = self.s
        if p[0] == 0:
            if self.uprime is None:
                return _silent(1, T)
            k = 1 + 3 * s
            if len(p) < k:
                return StepOutcome((), len(p), 0, NEEDS_INPUT)
            return _shift(self.uprime.run(p[k:], T), k)
        out, pending = [], []
        i = 1
        while i + s <= len(p):
            z = p[i:i + s]
            i += s
            pending.extend(self.decode(z))
            if z in self._b:
                out.extend(pending)
                pending = []
                if len(out) >= T:
                    return StepOutcome(tuple(out[:T]), i, T, BUDGET_EXHAUSTED)
        return StepOutcome(tuple(out), len(p), len(out), NEEDS_INPUT)

    def delegate(self, p):
        if self.uprime is not None and len(p) == 1 + 3 * self.s and p[0] == 0:
            return self.uprime
        return None

    def km_closed_form(self, x):
        if self.uprime is not None:
            return None
        x = symbols(x)
        if not x:
            return 0
        n, s = self.s + 1, self.s
        full, rest = divmod(len(x), n)
        last_q = False
        for i in range(full):
            blk = x[i * n:(i + 1) * n]
            try:
                self.encode(blk)
            except ValueError:
                return INF
            last_q = blk[0] != 1
        r = x[full * n:]
        if not r:
            return 1 + s * full if last_q else 1 + s * (full + 1)
        if r[0] in self._c:
            return 1 + s * (full + 1) if all(v == 1 for v in r[1:]) else INF
        if r[0] == 1:
            tail = r[1:]
            if any(v > 1 for v in tail):
                return INF
            ok = any(z[:len(tail)] == tail and z not in self._b
                     for z in product((0, 1), repeat=s))
            return 1 + s * (full + 2) if ok else INF
        return INF


def counterexample_v5(s, uprime=None):
    return V5Machine(s, uprime)


def counterexample_copy(uprime=None, s=8):
    return CopyMachine(s, uprime)


def block_machine(X0, s, uprime=None, alphabet_size=None):
    return BlockMachine(X0, s, uprime, alphabet_size)


def parse_machine(spec):
    """Parse a machine spec string.

    ``refvm`` | ``builtin:v5 s=<int> uprime=<on|off>`` |
    ``builtin:copy s=<int> uprime=<on|off>`` |
    ``builtin:block s=<int> x0=<symbols> [uprime=<on|off>]``
    """
    parts = shlex.split(spec.strip())
    if not parts:
        raise ValueError("empty machine spec")
    head, opts = parts[0], {}
    for tok in parts[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed option {tok!r} in machine spec")
        opts[key] = val
    if head == "refvm":
        if opts:
            raise ValueError("refvm takes no options")
        return _REFVM
    if not head.startswith("builtin:"):
        raise ValueError(f"unknown machine {head!r}")
    kind = head[len("builtin:"):]
    up = opts.pop("uprime", "off")
    if up not in ("on", "off"):
        raise ValueError("uprime must be on or off")
    uprime = _REFVM if up == "on" else None
    if "s" not in opts and kind != "copy":
        raise ValueError(f"{head} needs s=<int>")
    try:
        s = int(opts.pop("s", 8))
    except ValueError:
        raise ValueError(f"{head}: s must be an integer") from None
    if kind == "v5":
        m = V5Machine(s, uprime)
    elif kind == "copy":
        m = CopyMachine(s, uprime)
    elif kind == "block":
        if "x0" not in opts:
            raise ValueError("builtin:block needs x0=<symbols>")
        m = BlockMachine(symbols(opts.pop("x0")), s, uprime)
    else:
        raise ValueError(f"unknown builtin machine {kind!r}")
    if opts:
        raise ValueError(f"unexpected options {sorted(opts)} for {head}")
    return m
