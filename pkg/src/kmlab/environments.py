"""Sequence environments: fixed computable sequences and computable measures."""
from fractions import Fraction

import numpy as np

from .machine import Alphabet, BlockMachine, reference_universal, symbols
from .predictive import PosteriorVector, UndefinedContext

RNG_ALGORITHM = "numpy.PCG64"


class Environment:
    """Base class.  ``measure(x)`` is exact; ``sample(n)`` is seeded."""

    kind = "probabilistic"

    def __init__(self, spec, alphabet=Alphabet(2), seed=0):
        self.spec = spec
        self.alphabet = alphabet
        self.seed = seed

    def measure(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.measure(symbols(x))

    def posterior(self, context):
        context = symbols(context)
        den = self.measure(context)
        if den == 0:
            raise UndefinedContext(f"mu({context}) = 0")
        return PosteriorVector(context, tuple(self.measure(context + (a,)) / den
                                              for a in self.alphabet.symbols), True)

    def rng(self):
        return np.random.Generator(np.random.PCG64(self.seed))

    def sample(self, n):
        raise NotImplementedError

    def as_predictive(self):
        from .predictive import explicit
        return explicit(self.measure, self.alphabet, name=self.spec)

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec} seed={self.seed}>"


class Deterministic(Environment):
    kind = "deterministic"

    def __init__(self, generator, spec="det", alphabet=Alphabet(2), seed=0):
        super().__init__(spec, alphabet, seed)
        self._gen = generator
        self._seq = ()

    def prefix(self, n):
        if len(self._seq) < n:
            seq = tuple(int(v) for v in self._gen(n))
            if len(seq) < n:
                raise ValueError(f"{self.spec}: sequence ends after {len(seq)} symbols")
            if any(not 0 <= v < self.alphabet.size for v in seq):
                raise ValueError(f"{self.spec}: symbol outside alphabet")
            self._seq = seq[:max(n, len(self._seq))]
        return self._seq[:n]

    def measure(self, x):
        return Fraction(int(self.prefix(len(x)) == tuple(x)))

    def sample(self, n):
        return self.prefix(n)


def deterministic(generator, spec="det", alphabet=Alphabet(2)):
    """Environment emitting ``generator(n)[:n]``; generator returns >= n symbols."""
    return Deterministic(generator, spec, alphabet)


def zeros():
    return deterministic(lambda n: (0,) * n, "det:zeros")


def cycle(pattern, alphabet=Alphabet(2)):
    pattern = symbols(pattern)
    if not pattern:
        raise ValueError("empty cycle pattern")
    return deterministic(lambda n: (pattern * (n // len(pattern) + 1))[:n],
                         f"det:cycle={''.join(map(str, pattern))}", alphabet)


def program_output(prog, machine=None):
    """The sequence written by ``prog`` on the reference machine."""
    prog = symbols(prog)
    machine = machine or reference_universal()

    def gen(n):
        T = max(16, 2 * n)
        while True:
            res = machine.run(prog, T)
            if len(res.output) >= n or res.status != "budget-exhausted":
                return res.output
            T *= 2
            if T > 1 << 26:
                return res.output

    return deterministic(gen, f"det:prog={''.join(map(str, prog))}")


class Bernoulli(Environment):
    def __init__(self, theta, seed=0):
        theta = Fraction(theta)
        if not 0 < theta < 1:
            raise ValueError("theta must lie in (0,1)")
        super().__init__(f"bernoulli:{theta.numerator}/{theta.denominator}", Alphabet(2), seed)
        self.theta = theta

    def measure(self, x):
        ones = sum(x)
        return self.theta ** ones * (1 - self.theta) ** (len(x) - ones)

    def sample(self, n):
        r = self.rng().integers(0, self.theta.denominator, size=n)
        return tuple(int(v) for v in (r < self.theta.numerator))


def bernoulli(theta, seed=0):
    return Bernoulli(theta, seed)


class BlockMeasure(Environment):
    """Product measure over (s+1)-blocks, uniform on the block alphabet A of
    the matching block machine."""

    def __init__(self, X0, s, seed=0):
        self.machine = BlockMachine(X0, s)
        x0 = self.machine.x0
        super().__init__(f"block:s={s},x0={''.join(map(str, x0))}",
                         self.machine.alphabet, seed)
        self.s = s
        self.blocks = self.machine.blocks()
        self._set = frozenset(self.blocks)

    def measure(self, x):
        n = self.s + 1
        full, rest = divmod(len(x), n)
        w = Fraction(1)
        unit = Fraction(1, len(self.blocks))
        for i in range(full):
            if tuple(x[i * n:(i + 1) * n]) not in self._set:
                return Fraction(0)
            w *= unit
        if rest:
            r = tuple(x[full * n:])
            w *= unit * sum(1 for b in self.blocks if b[:rest] == r)
        return w

    def sample(self, n):
        nb = -(-n // (self.s + 1))
        idx = self.rng().integers(0, len(self.blocks), size=nb)
        seq = ()
        for i in idx:
            seq += self.blocks[int(i)]
        return seq[:n]


def block_measure(X0, s, seed=0):
    return BlockMeasure(X0, s, seed)


def parse_env(spec, seed=0):
    """``det:zeros`` | ``det:alt`` | ``det:cycle=<symbols>`` | ``det:prog=<bits>``
    | ``bernoulli:<num>/<den>`` | ``block:s=<int>,x0=<symbols>``"""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    if kind == "det":
        if arg == "zeros":
            return zeros()
        if arg == "alt":
            return cycle("01")
        key, _, val = arg.partition("=")
        if key == "cycle":
            return cycle(val)
        if key == "prog":
            if not val or set(val) - {"0", "1"}:
                raise ValueError("det:prog needs a bit string")
            return program_output(val)
        raise ValueError(f"unknown deterministic environment {arg!r}")
    if kind == "bernoulli":
        try:
            theta = Fraction(arg)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad Bernoulli parameter {arg!r}") from None
        return bernoulli(theta, seed)
    if kind == "block":
        opts = {}
        for part in arg.split(","):
            k, sep, v = part.partition("=")
            if not sep:
                raise ValueError(f"malformed block option {part!r}")
            opts[k.strip()] = v.strip()
        if set(opts) != {"s", "x0"}:
            raise ValueError("block environment needs s=<int>,x0=<symbols>")
        return block_measure(symbols(opts["x0"]), int(opts["s"]), seed)
    raise ValueError(f"unknown environment {spec!r}")

