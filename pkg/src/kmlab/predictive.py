"""Predictive functions, chain-rule posteriors and their property checks."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .enumeration import estimator
from .machine import INF, Alphabet, symbols


class UndefinedContext(ZeroDivisionError):
    """Posterior requested for a context of zero mass."""


class NoContinuation(LookupError):
    """The selected shortest program does not extend the context in budget."""


class PredictiveFn:
    """Exact-rational evaluator ``x -> b(x) >= 0`` with chain-rule posteriors.

    ``tag`` is one of from-Km, from-M, from-K, simple-MDL, explicit-measure.
    """

    def __init__(self, fn, alphabet=Alphabet(2), tag="explicit-measure",
                 claims=(), prepare=None, along=None, name=None):
        self._fn = fn
        self.alphabet = alphabet
        self.tag = tag
        self.claims = frozenset(claims)
        self._prepare = prepare
        self._along = along
        self.name = name or tag
        self._memo = {}

    def __call__(self, x):
        x = symbols(x)
        v = self._memo.get(x)
        if v is None:
            v = Fraction(self._fn(x))
            if v < 0:
                raise ValueError(f"negative value {v} at {x}")
            self._memo[x] = v  # write-once: recomputation gives the same value
        return v

    def prepare(self, depth):
        """Hint that every string up to ``depth`` is about to be evaluated."""
        if self._prepare is not None:
            self._prepare(depth)
        return self

    def along(self, omega):
        """Hint that posteriors along ``omega`` are about to be evaluated."""
        if self._along is not None:
            self._along(symbols(omega))
        return self

    def posterior(self, context, sym):
        return posterior(self, context, sym)

    def __repr__(self):
        return f"<PredictiveFn {self.name}>"


def _two_pow(k):
    return Fraction(0) if k == INF else Fraction(1, 1 << k)


def from_km(machine, budget, workers=1):
    """m(x) = 2^-Km(x) at the given budget."""
    est = estimator(machine, budget, workers)
    return PredictiveFn(lambda x: _two_pow(est.km(x)), machine.alphabet, "from-Km",
                        claims={"monotone"}, prepare=est.survey, along=est.along,
                        name=f"m[{machine.tag}]")


def from_M(machine, budget, workers=1):
    est = estimator(machine, budget, workers)
    return PredictiveFn(est.M, machine.alphabet, "from-M",
                        claims={"monotone", "semimeasure"}, prepare=est.survey,
                        along=est.along, name=f"M[{machine.tag}]")


def from_K(machine, budget, workers=1):
    if not machine.supports_halt:
        raise ValueError(f"{machine.tag} has no halting semantics")
    est = estimator(machine, budget, workers)
    return PredictiveFn(lambda x: _two_pow(est.k(x)), machine.alphabet, "from-K",
                        prepare=est.survey, along=est.along, name=f"k[{machine.tag}]")


def explicit(fn, alphabet=Alphabet(2), name=None):
    return PredictiveFn(fn, alphabet, "explicit-measure",
                        claims={"monotone", "semimeasure"}, name=name)


def simple_mdl(machine, budget, lazy=False):
    """Deterministic predictor following the shortest program for the context.

    Among the minimal programs for ``x_<t`` the shortest (then
    lexicographically first) one is run; its next output symbol gets
    posterior 1.  When that program emits nothing beyond ``x_<t`` within the
    budget :class:`NoContinuation` is raised, unless ``lazy`` is set, in
    which case the shortest minimal program among the one-symbol extensions
    decides instead.
    """
    est = estimator(machine, budget)
    T = budget.max_steps

    def next_symbol(ctx):
        p = est.shortest(ctx)
        if p is None:
            raise NoContinuation(f"no program outputs {ctx} within budget")
        out = machine.run(p, T).output
        if len(out) > len(ctx):
            return out[len(ctx)]
        if not lazy:
            raise NoContinuation(f"shortest program for {ctx} does not continue")
        best = None
        for a in machine.alphabet.symbols:
            q = est.shortest(ctx + (a,))
            if q is not None and (best is None or (len(q), q) < (len(best[1]), best[1])):
                best = (a, q)
        if best is None:
            raise NoContinuation(f"no extension of {ctx} within budget")
        return best[0]

    choice = {}

    def step(ctx):
        if ctx not in choice:
            choice[ctx] = next_symbol(ctx)
        return choice[ctx]

    def joint(x):
        for t in range(len(x)):
            if step(x[:t]) != x[t]:
                return Fraction(0)
        return Fraction(1)

    fn = PredictiveFn(joint, machine.alphabet, "simple-MDL",
                      claims={"monotone", "semimeasure", "deterministic"},
                      prepare=est.survey, along=est.along,
                      name=f"mdl[{machine.tag}]")
    fn.next_symbol = step
    return fn


# --------------------------------------------------------------- posteriors

@dataclass(frozen=True)
class PosteriorVector:
    context: tuple
    values: tuple
    normalized: bool = False

    def __post_init__(self):
        if self.normalized and sum(self.values) != 1:
            raise ValueError("normalized posterior must sum to 1")

    def __getitem__(self, a):
        return self.values[a]

    def __len__(self):
        return len(self.values)


def posterior(b, context, sym):
    context = symbols(context)
    den = b(context)
    if den == 0:
        raise UndefinedContext(f"b({context}) = 0")
    return b(context + (sym,)) / den


def posterior_vector(b, context):
    context = symbols(context)
    return PosteriorVector(context, tuple(posterior(b, context, a)
                                          for a in b.alphabet.symbols))


def normalize(b, context):
    """Posteriors rescaled to sum to 1; uniform when they sum to 0.

    A context of zero mass still raises :class:`UndefinedContext`.
    """
    context = symbols(context)
    n = b.alphabet.size
    raw = posterior_vector(b, context).values
    total = sum(raw)
    if total == 0:
        return PosteriorVector(context, (Fraction(1, n),) * n, True)
    return PosteriorVector(context, tuple(v / total for v in raw), True)


def normalized(b):
    """The normalized function b_norm(x) = prod_t normalize(b, x_<t)[x_t]."""
    def joint(x):
        v = Fraction(1)
        for t in range(len(x)):
            v *= normalize(b, x[:t])[x[t]]
            if v == 0:
                break
        return v
    return PredictiveFn(joint, b.alphabet, "explicit-measure",
                        claims={"monotone", "semimeasure"}, prepare=b.prepare,
                        along=b.along, name=f"norm({b.name})")


# ------------------------------------------------------------------- checks

@dataclass
class SemimeasureReport:
    depth: int
    root_value: Fraction
    violations: list = field(default_factory=list)   # (context, sum, b(context))
    gaps: dict = field(default_factory=dict)          # j -> g_j

    @property
    def root_ok(self):
        return self.root_value <= 1

    @property
    def ok(self):
        return self.root_ok and not self.violations


def _strings(alphabet, n):
    return [tuple(s) for k in range(n + 1) for s in product(range(alphabet.size), repeat=k)]


def check_semimeasure(b, depth):
    b.prepare(depth)
    A = b.alphabet
    rep = SemimeasureReport(depth, b(()))
    for ctx in _strings(A, depth - 1):
        s = sum(b(ctx + (a,)) for a in A.symbols)
        if s > b(ctx):
            rep.violations.append((ctx, s, b(ctx)))
    for j in range(1, depth + 1):
        rep.gaps[j] = 1 - sum(b(x) for x in A.strings(j))
    return rep


def check_monotone(b, depth):
    """All pairs (x, y), y nonempty, l(xy) <= depth, with b(xy) > b(x)."""
    b.prepare(depth)
    out = []
    for x in _strings(b.alphabet, depth - 1):
        bx = b(x)
        for k in range(1, depth - len(x) + 1):
            for y in b.alphabet.strings(k):
                if b(x + y) > bx:
                    out.append((x, y))
    return out


def dominance_ratio(b, nu, strings):
    ratios = []
    for x in strings:
        x = symbols(x)
        d = nu(x)
        if d <= 0:
            raise ValueError(f"reference function vanishes at {x}")
        ratios.append(b(x) / d)
    if not ratios:
        raise ValueError("empty string set")
    return min(ratios)
