"""Loss matrices, the loss-minimizing predictor and per-step traces."""
from dataclasses import dataclass, field
from fractions import Fraction

from .machine import Alphabet
from .predictive import UndefinedContext, NoContinuation, normalize, posterior_vector

DEFAULT_EPS = Fraction(1, 1000)


@dataclass(frozen=True)
class LossMatrix:
    """``rows[x][y]`` is the loss of action y when the outcome is x."""

    rows: tuple
    name: str = "custom"

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) < 1 or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise ValueError("loss matrix must be rectangular with |Y| >= 1")
        for r in rows:
            for v in r:
                if not 0 <= v <= 1:
                    raise ValueError(f"loss entry {v} outside [0,1]")

    @property
    def n_outcomes(self):
        return len(self.rows)

    @property
    def n_actions(self):
        return len(self.rows[0])

    def __getitem__(self, xy):
        x, y = xy
        return self.rows[x][y]

    def expected(self, probs):
        """Expected loss of every action under the weights ``probs``."""
        return tuple(sum(Fraction(p) * self.rows[x][y] for x, p in enumerate(probs))
                     for y in range(self.n_actions))

    def to_text(self):
        return "\n".join(" ".join(str(v) for v in r) for r in self.rows)


def error_loss(alphabet=Alphabet(2)):
    n = alphabet.size if isinstance(alphabet, Alphabet) else int(alphabet)
    return LossMatrix(tuple(tuple(0 if x == y else 1 for y in range(n)) for x in range(n)),
                      "error")


def fig1_loss(eps=0):
    """Three actions on binary outcomes: l_x0 = x, l_x1 = 3/8 (or 1/3+eps),
    l_x2 = 2/3 (1-x)."""
    mid = Fraction(3, 8) if eps == 0 else Fraction(1, 3) + Fraction(eps)
    return LossMatrix(((0, mid, Fraction(2, 3)), (1, mid, 0)),
                      "fig1" if eps == 0 else f"fig1 eps={Fraction(eps)}")


def copy_loss():
    return LossMatrix(((0, Fraction(2, 3)), (1, 0)), "copyloss")


BUILTIN_LOSSES = {"error": error_loss, "fig1": fig1_loss, "copyloss": copy_loss}


def parse_loss(text, alphabet=Alphabet(2)):
    """Builtin name (``error``, ``fig1``, ``fig1 eps=1/1000``, ``copyloss``)
    or rows of rationals, one row per outcome, rows separated by newlines
    or ``|``."""
    text = text.strip()
    head, _, rest = text.partition(" ")
    if head == "error":
        return error_loss(alphabet)
    if head == "fig1":
        eps = 0
        if rest.strip():
            key, _, val = rest.strip().partition("=")
            if key != "eps":
                raise ValueError(f"unknown fig1 option {rest!r}")
            eps = Fraction(val)
        return fig1_loss(eps)
    if head == "copyloss":
        return copy_loss()
    rows = [r.split() for r in text.replace("|", "\n").splitlines() if r.strip()]
    try:
        return LossMatrix(tuple(tuple(Fraction(v) for v in r) for r in rows))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"bad loss matrix: {e}") from None


def act(post, loss):
    """Action minimizing the expected loss; lowest index wins ties."""
    vals = post.values if hasattr(post, "values") else tuple(post)
    if any(v < 0 for v in vals):
        raise ValueError("posterior values must be >= 0")
    exp = loss.expected(vals)
    return min(range(loss.n_actions), key=lambda y: (exp[y], y))


def argmin_set(post, loss):
    vals = post.values if hasattr(post, "values") else tuple(post)
    exp = loss.expected(vals)
    best = min(exp)
    return frozenset(y for y, v in enumerate(exp) if v == best)


def inst_loss(mu_post, y, loss):
    vals = mu_post.values if hasattr(mu_post, "values") else tuple(mu_post)
    return loss.expected(vals)[y]


def is_nondegenerate(loss):
    common = set(range(loss.n_actions))
    for r in loss.rows:
        best = min(r)
        common &= {y for y, v in enumerate(r) if v == best}
    return not common


def loss_ratio(l_pred, l_opt):
    """l_pred / l_opt with 0/0 read as 1."""
    if l_opt == 0:
        return Fraction(1) if l_pred == 0 else float("inf")
    return Fraction(l_pred) / l_opt


@dataclass(frozen=True)
class TraceStep:
    t: int
    context: tuple
    symbol: int
    posterior: tuple
    action: int
    loss: Fraction
    opt_action: int
    opt_loss: Fraction

    @property
    def ratio(self):
        return loss_ratio(self.loss, self.opt_loss)


@dataclass
class PredictorTrace:
    steps: list = field(default_factory=list)
    stopped: str | None = None   # reason when the trace ended early

    def __len__(self):
        return len(self.steps)

    @property
    def ratios(self):
        return [s.ratio for s in self.steps]

    @property
    def errors(self):
        """Number of steps whose action differs from the realized symbol."""
        return sum(s.action != s.symbol for s in self.steps)


def run_predictor(rho, env, loss, horizon, normalized=True):
    """Run Lambda_rho against ``env`` for ``horizon`` steps.

    The posterior used for acting is the normalized one; scaling does not
    change the argmin, so ``normalized=False`` gives the same actions and
    only changes the recorded vector.
    """
    xs = env.sample(horizon)
    rho.along(xs)
    trace = PredictorTrace()
    for t in range(horizon):
        ctx = tuple(xs[:t])
        try:
            if normalized:
                post = normalize(rho, ctx)
            else:
                post = posterior_vector(rho, ctx)
        except (UndefinedContext, NoContinuation) as e:
            trace.stopped = f"t={t + 1}: {e}"
            break
        mu = env.posterior(ctx)
        y = act(post, loss)
        y_opt = act(mu, loss)
        l, l_opt = inst_loss(mu, y, loss), inst_loss(mu, y_opt, loss)
        assert l_opt <= l
        trace.steps.append(TraceStep(t + 1, ctx, xs[t], post.values, y, l, y_opt, l_opt))
    return trace
