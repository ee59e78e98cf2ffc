"""One runnable check per bound or counterexample construction.

Every check returns a :class:`TheoremReport` holding the measured values of
each (in)equality it tests.  The verdict is recomputed from those values,
so a report can be audited without rerunning anything.
"""
import copy
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from . import decision as D
from . import environments as V
from . import predictive as P
from .enumeration import Budget, estimator
from .machine import (INF, BlockMachine, CopyMachine, V5Machine,
                      reference_universal, symbols)

FLOAT_TOL = 1e-12

_RELATIONS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    # irrational right-hand sides are carried as floats
    "<=~": lambda a, b: float(a) <= float(b) + FLOAT_TOL,
}


@dataclass(frozen=True)
class Check:
    name: str
    lhs: object
    rel: str
    rhs: object

    @property
    def holds(self):
        return bool(_RELATIONS[self.rel](self.lhs, self.rhs))


@dataclass
class TheoremReport:
    theorem: str
    params: dict
    checks: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    runtime: float = 0.0
    note: str = ""

    @property
    def verdict(self):
        return all(c.holds for c in self.checks)

    @property
    def lhs(self):
        return self.checks[0].lhs if self.checks else None

    @property
    def rhs(self):
        return self.checks[0].rhs if self.checks else None

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, name, lhs, rel, rhs):
        self.checks.append(Check(name, lhs, rel, rhs))

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "verdict": "pass" if self.verdict else "fail",
            "params": {k: _render(v) for k, v in self.params.items()},
            "checks": [{"name": c.name, "lhs": _render(c.lhs), "rel": c.rel,
                        "rhs": _render(c.rhs), "holds": c.holds} for c in self.checks],
            "measured": {k: _render(v) for k, v in self.measured.items()},
            "runtime_s": round(self.runtime, 3),
            "note": self.note,
        }


def _render(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else v.numerator
    if isinstance(v, float):
        return "inf" if v == INF else repr(v)
    if isinstance(v, tuple) and all(isinstance(s, int) and 0 <= s < 10 for s in v):
        return "".join(map(str, v)) or "ε"   # a symbol string
    if isinstance(v, (list, tuple)):
        return [_render(s) for s in v]
    if isinstance(v, dict):
        return {str(k): _render(x) for k, x in v.items()}
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return str(v)


class _timed:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime = time.perf_counter() - self.t0


def _pow2(k):
    return Fraction(0) if k == INF else Fraction(1, 1 << k)


def _m_posteriors(machine, x, budget):
    """From-Km posteriors of every symbol along x; raises on zero mass."""
    est = estimator(machine, budget).along(x)
    rows = []
    for t in range(len(x)):
        ctx = x[:t]
        k0 = est.km(ctx)
        if k0 == INF:
            raise P.UndefinedContext(f"Km({ctx}) = inf within budget")
        rows.append({a: _pow2(est.km(ctx + (a,))) / _pow2(k0)
                     for a in machine.alphabet.symbols})
    return est, rows


# ---------------------------------------------------------------- bounds

def verify_vi1(machine, x, budget):
    """On-sequence bound, the count of non-1 posteriors, and telescoping."""
    x = symbols(x)
    rep = TheoremReport("vi1", {"machine": machine.tag, "x": x, "budget": str(budget)})
    with _timed(rep):
        est, rows = _m_posteriors(machine, x, budget)
        km = est.km(x)
        on = [rows[t][x[t]] for t in range(len(x))]
        lhs = sum((abs(1 - v) for v in on), Fraction(0))
        rep.add("sum |1-m| <= Km/2", lhs, "<=", Fraction(km, 2) if km != INF else INF)
        count = sum(v != 1 for v in on)
        rep.add("#{m != 1} <= Km", count, "<=", km)
        if all(v > 0 for v in on):
            tele = sum(-int(math.log2(v)) for v in on) if on else 0
            rep.add("sum -log m = Km - Km(eps)", tele, "==", km - est.km(()))
        rep.add("prefix violations", _prefix_violations(
            on, [est.km(x[:n]) for n in range(len(x) + 1)],
            lambda part, k: sum(abs(1 - v) for v in part) <= Fraction(k, 2)), "==", 0)
        rep.measured["Km"] = km
    return rep


def _prefix_violations(values, kms, ok):
    bad = 0
    for n in range(1, len(values) + 1):
        if kms[n] != INF and not ok(values[:n], kms[n]):
            bad += 1
    return bad


def verify_vi3(machine, x, budget):
    """Off-sequence m-mass against 2^Km."""
    x = symbols(x)
    rep = TheoremReport("vi3", {"machine": machine.tag, "x": x, "budget": str(budget)})
    with _timed(rep):
        est, rows = _m_posteriors(machine, x, budget)
        km = est.km(x)
        off = [sum((v for a, v in rows[t].items() if a != x[t]), Fraction(0))
               for t in range(len(x))]
        lhs = sum(off, Fraction(0))
        rep.add("off-sequence m-mass <= 2^Km", lhs, "<=", INF if km == INF else 2 ** km)
        rep.add("prefix violations", _prefix_violations(
            off, [est.km(x[:n]) for n in range(len(x) + 1)],
            lambda part, k: sum(part) <= 2 ** k), "==", 0)
        rep.measured["Km"] = km
    return rep


def verify_iii_counting(machine, x, budget):
    """Steps where m is locally a semimeasure number at most Km.

    A step whose deviation has no program within the budget (m = 0 there)
    cannot be classified: with an unbounded budget that deviation gets
    positive mass.  Such steps are counted separately and left out of the
    bound.
    """
    x = symbols(x)
    rep = TheoremReport("iii_counting", {"machine": machine.tag, "x": x,
                                         "budget": str(budget)})
    with _timed(rep):
        est = estimator(machine, budget).along(x)
        steps, undetermined = [], []
        for t in range(len(x)):
            ctx = x[:t]
            ks = [est.km(ctx + (a,)) for a in machine.alphabet.symbols]
            if INF in ks:
                undetermined.append(t + 1)
                continue
            if sum(_pow2(k) for k in ks) <= _pow2(est.km(ctx)):
                steps.append(t + 1)
        km = est.km(x)
        rep.add("#{sum_a m(x_<t a) <= m(x_<t)} <= Km", len(steps), "<=", km)
        rep.measured["non_violating_steps"] = steps
        rep.measured["undetermined_steps"] = len(undetermined)
    return rep


# ------------------------------------------------------- counterexamples

def _harmonic(n):
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def verify_vi5(s):
    """The v5 counterexample along 0^inf, t = 1..2^s-2.

    Checked as stated: every m(1|0_<t) = 1, so the off-sequence m-mass is
    2^s - 2, and M(1|0_<t) = 1/(2^s - t).  The context at t = 1 is the
    empty string, whose Km is 0 and whose M is 1, so both statements fail
    at t = 1 (m(1|eps) = M(1|eps) = 2^-s) and hold for every t >= 2.  The
    t >= 2 forms are checked separately so the two effects stay visible.
    """
    if not 2 <= s <= 8:
        raise ValueError("s must lie in 2..8")
    rep = TheoremReport("vi5", {"s": s})
    with _timed(rep):
        m = V5Machine(s)
        n = 2 ** s - 2
        budget = Budget(s, 2 ** s + 1)
        est = estimator(m, budget).along((0,) * (n + 1))
        zs = [(0,) * (t - 1) for t in range(1, n + 1)]
        mpost = [_pow2(est.km(z + (1,))) / _pow2(est.km(z)) for z in zs]
        Mpost = [est.M(z + (1,)) / est.M(z) for z in zs]
        mass = sum(mpost, Fraction(0))
        rep.add("off-sequence m-mass == 2^s-2", mass, "==", n)
        rep.add("#{t: M(1|0_<t) != 1/(2^s-t)}",
                sum(Mpost[t - 1] != Fraction(1, 2 ** s - t) for t in range(1, n + 1)), "==", 0)
        rep.add("off-sequence m-mass over t>=2 == 2^s-3", mass - mpost[0], "==", n - 1)
        rep.add("#{t>=2: m(1|0_<t) != 1}", sum(v != 1 for v in mpost[1:]), "==", 0)
        rep.add("#{t>=2: M(1|0_<t) != 1/(2^s-t)}",
                sum(Mpost[t - 1] != Fraction(1, 2 ** s - t) for t in range(2, n + 1)), "==", 0)
        rep.add("m(1|eps) == M(1|eps) == 2^-s", (mpost[0], Mpost[0]), "==",
                (Fraction(1, 2 ** s), Fraction(1, 2 ** s)))
        rep.measured["m_mass"] = mass
        rep.measured["M_mass"] = sum(Mpost, Fraction(0))
        rep.measured["H_{2^s-1}-1"] = _harmonic(2 ** s - 1) - 1
        rep.measured["H_{2^s-2}-1+2^-s"] = _harmonic(2 ** s - 2) - 1 + Fraction(1, 2 ** s)
        rep.measured["M_mass_float"] = float(sum(Mpost, Fraction(0)))
        rep.measured["s_ln2"] = s * math.log(2)
    return rep


def _in_dyadic_range(v):
    """v in {2^-j : j >= 0}."""
    return 0 < v <= 1 and v.numerator == 1 and v.denominator & (v.denominator - 1) == 0


def _in_norm_range(v):
    """v in {1/(1+2^z) : z integer}."""
    if not 0 < v < 1:
        return False
    r = (1 - v) / v   # must be 2^z
    num, den = r.numerator, r.denominator
    return (num == 1 and den & (den - 1) == 0) or (den == 1 and num & (num - 1) == 0)


def default_range_configs():
    """Universal configurations: every string up to length 6 has finite Km."""
    ref = reference_universal()
    return [
        (ref, Budget(16, 10_000)),
        (V5Machine(4, ref), Budget(20, 10_000, sub_len=16)),
        (CopyMachine(2, ref), Budget(10, 10_000, sub_len=16)),
        (BlockMachine((0,), 2, ref), Budget(13, 10_000, sub_len=16)),
    ]


def verify_vi6(variant="raw", configs=None, depth=6):
    """Range of from-Km posteriors and the resulting gap to 3/8 (raw) or
    5/12 (normalized), over every context up to ``depth``."""
    if variant not in ("raw", "normalized"):
        raise ValueError("variant must be raw or normalized")
    configs = configs if configs is not None else default_range_configs()
    rep = TheoremReport("vi6", {"variant": variant, "depth": depth,
                                "machines": [m.tag for m, _ in configs]})
    target, gap = ((Fraction(3, 8), Fraction(1, 8)) if variant == "raw"
                   else (Fraction(5, 12), Fraction(1, 12)))
    with _timed(rep):
        seen, outside, zeros, undefined = set(), 0, 0, 0
        dist = Fraction(1)
        for machine, budget in configs:
            if machine.alphabet.size != 2:
                raise ValueError("binary alphabet required")
            est = estimator(machine, budget).survey(depth)
            for n in range(depth):
                for ctx in product((0, 1), repeat=n):
                    k0 = est.km(ctx)
                    if k0 == INF:
                        undefined += 1
                        continue
                    raw = [_pow2(est.km(ctx + (a,))) / _pow2(k0) for a in (0, 1)]
                    if variant == "raw":
                        vals = raw
                    else:
                        tot = sum(raw)
                        vals = [v / tot for v in raw] if tot else [Fraction(1, 2)] * 2
                    for v in vals:
                        if v == 0:
                            zeros += 1
                        elif not (_in_dyadic_range(v) if variant == "raw"
                                  else _in_norm_range(v) or v == Fraction(1, 2)):
                            outside += 1
                        seen.add(v)
                        dist = min(dist, abs(v - target))
        rep.add("values outside range", outside, "==", 0)
        rep.add(f"min |value - {target}|", dist, ">=", gap)
        rep.measured["zero_values"] = zeros
        rep.measured["undefined_contexts"] = undefined
        rep.measured["distinct_values"] = sorted(seen)
    return rep


def verify_vii3(eps=0, zrange=40):
    """Three-action fig1 loss with mu(1) = 2/5: every posterior from the
    normalized range 1/(1+2^z) acts suboptimally, by the exact ratio 16/15."""
    loss = D.fig1_loss(eps)
    mu1 = Fraction(2, 5)
    mu = (1 - mu1, mu1)
    rep = TheoremReport("vii3", {"eps": Fraction(eps), "mu1": mu1})
    with _timed(rep):
        y_mu = D.act(mu, loss)
        l_opt = D.inst_loss(mu, y_mu, loss)
        rep.add("Lambda_mu action", y_mu, "==", 1)
        range_pts = sorted({Fraction(1, 1 + Fraction(2) ** z) for z in range(-zrange, zrange + 1)})
        actions, ratios = set(), set()
        for r in range_pts:
            y = D.act((1 - r, r), loss)
            actions.add(y)
            ratios.add(D.loss_ratio(D.inst_loss(mu, y, loss), l_opt))
        rep.add("#range actions outside {0,2}", len(actions - {0, 2}), "==", 0)
        expected = Fraction(2, 5) / loss[0, 1]
        rep.add("min ratio over range", min(ratios), "==", expected)
        rep.add("max ratio over range", max(ratios), "==", expected)
        rep.add("ratio > 1", min(ratios), ">", 1)
        rep.add("ratio at rho = mu", D.loss_ratio(l_opt, l_opt), "==", 1)
        rep.measured["ratio"] = min(ratios)
        rep.measured["range_actions"] = sorted(actions)
    return rep


def verify_vii5_simple(s=8, samples=10_000, seed=0, uprime=False, horizon=20):
    """Copy machine, copy loss, fair coin: Lambda_m pays 3/2 times the
    optimal loss on every step where the copy branch gives the shortest
    codes; the frequency of such steps is measured."""
    ref = reference_universal() if uprime else None
    m = CopyMachine(s, ref)
    # copy-branch codes are at most len(x) + 2 bits; an embedded program
    # can only compete below that, so sub_len = horizon + 1 - s is exact
    budget = Budget(horizon + 2, 4 * horizon + 16,
                    sub_len=max(0, horizon + 1 - s) if uprime else None)
    loss = D.copy_loss()
    rep = TheoremReport("vii5_simple", {"s": s, "samples": samples, "seed": seed,
                                       "uprime": "on" if uprime else "off",
                                       "horizon": horizon, "budget": str(budget),
                                       "rng": V.RNG_ALGORITHM})
    with _timed(rep):
        rho = P.from_km(m, budget)
        runs = -(-samples // horizon)
        ss = np.random.SeedSequence(seed)
        hits = total = 0
        off_ratios = set()
        mu_ratios = set()
        for child in ss.spawn(runs):
            env = V.bernoulli(Fraction(1, 2), seed=int(child.generate_state(1)[0]))
            n = min(horizon, samples - total)
            tr = D.run_predictor(rho, env, loss, n)
            if tr.stopped:
                raise RuntimeError(tr.stopped)
            for st in tr.steps:
                total += 1
                if st.ratio == Fraction(3, 2):
                    hits += 1
                else:
                    off_ratios.add(st.ratio)
                mu_ratios.add(D.loss_ratio(st.opt_loss, st.opt_loss))
        freq = Fraction(hits, total) if total else Fraction(1)
        p0 = 1 - Fraction(1, 2 ** s)
        if uprime:
            sigma = math.sqrt(float(p0 * (1 - p0)) / max(total, 1))
            rep.add("3/2 frequency >= 1-2^-s - 3 sigma", float(freq), ">=", float(p0) - 3 * sigma)
        else:
            rep.add("3/2 frequency", freq, "==", 1)
        rep.add("Lambda_mu ratio", max(mu_ratios, default=Fraction(1)), "==", 1)
        rep.measured.update(steps=total, hits=hits, frequency=freq,
                            other_ratios=sorted(off_ratios, key=float))
    return rep


def verify_vii5_general(s=3, X0=(0,), loss=None, blocks=4, samples=16, seed=0):
    """Block machine against its block measure at block boundaries.

    Outcome 1 is the designated symbol.  ``Y0`` is the argmin set for the
    uniform weight on X0, ``Y1`` the one for certainty of 1; the loss must
    be non-degenerate.
    """
    bm = BlockMachine(symbols(X0), s)
    A = bm.alphabet
    loss = loss if loss is not None else D.error_loss(A)
    if loss.n_outcomes != A.size:
        raise ValueError("loss rows must match the alphabet")
    if not D.is_nondegenerate(loss):
        raise ValueError("loss is degenerate")
    env = V.block_measure(bm.x0, s, seed)
    rep = TheoremReport("vii5_general", {"s": s, "X0": bm.x0, "loss": loss.name,
                                         "blocks": blocks, "samples": samples,
                                         "seed": seed, "rng": V.RNG_ALGORITHM})
    with _timed(rep):
        m = P.PredictiveFn(lambda x: _pow2(bm.km_closed_form(x)), A, "from-Km",
                           name=f"m[{bm.tag}] closed form")
        w0 = tuple(Fraction(1, len(bm.x0)) if a in bm.x0 else 0 for a in A.symbols)
        w1 = tuple(Fraction(int(a == 1)) for a in A.symbols)
        Y0, Y1 = D.argmin_set(w0, loss), D.argmin_set(w1, loss)
        rep.add("|Y0 & Y1|", len(Y0 & Y1), "==", 0)
        target = Fraction(1) / (len(bm.x0) + Fraction(1, 2 ** s))
        rng = env.rng()
        bad_norm = bad_y0 = bad_y1 = 0
        ratios = set()
        n = s + 1
        ctxs = {()}
        for _ in range(samples):
            k = int(rng.integers(1, blocks + 1))
            idx = rng.integers(0, len(env.blocks), size=k)
            seq = ()
            for i in idx:
                seq += env.blocks[int(i)]
            ctxs.update(seq[:j * n] for j in range(k + 1))
        ctxs = sorted(ctxs, key=lambda c: (len(c), c))
        for ctx in ctxs:
            post = P.normalize(m, ctx)
            if any(post[a] != target for a in bm.x0):
                bad_norm += 1
            mu = env.posterior(ctx)
            y, y_mu = D.act(post, loss), D.act(mu, loss)
            bad_y0 += y not in Y0
            bad_y1 += y_mu not in Y1
            ratios.add(D.loss_ratio(D.inst_loss(mu, y, loss), D.inst_loss(mu, y_mu, loss)))
        rep.add("#{m_norm(x0|x) != 1/(|X0|+2^-s)}", bad_norm, "==", 0)
        rep.add("#{act(m_norm) not in Y0}", bad_y0, "==", 0)
        rep.add("#{act(mu) not in Y1}", bad_y1, "==", 0)
        rep.add("min ratio", min(ratios), ">", 1)
        rep.measured.update(contexts=len(ctxs), Y0=sorted(Y0), Y1=sorted(Y1),
                            m_norm_x0=target, ratios=sorted(ratios))
    return rep


# ------------------------------------------------------ general theorems

def verify_thm52(b, a, c, x, machine, budget):
    """Convergence bounds for a function sandwiched as a*M <= b <= c*M."""
    x = symbols(x)
    a, c = Fraction(a), Fraction(c)
    rep = TheoremReport("thm52", {"b": b.name, "a": a, "c": c, "x": x,
                                  "machine": machine.tag, "budget": str(budget)})
    with _timed(rep):
        est = estimator(machine, budget).along(x)
        b.along(x)
        A = machine.alphabet.symbols
        for n in range(len(x) + 1):
            p = x[:n]
            if not a * est.M(p) <= b(p):
                raise ValueError(f"precondition a*M <= b fails at {p}")
            for q in [p] + ([x[:n - 1] + (s,) for s in A] if n else []):
                if not b(q) <= c * est.M(q):
                    raise ValueError(f"precondition b <= c*M fails at {q}")
        if b(()) > 1:
            raise ValueError("precondition b(eps) <= 1 fails")
        Mx = est.M(x)
        bits = -math.log2(Mx) if Mx > 0 else INF
        on = off = Fraction(0)
        for t in range(len(x)):
            ctx = x[:t]
            on += 1 - P.posterior(b, ctx, x[t])
            off += sum((P.posterior(b, ctx, s) for s in A if s != x[t]), Fraction(0))
        rep.add("(a) sum 1-b(x_t|x_<t)", on, "<=~", math.log(2) * bits + math.log(1 / a))
        rep.add("(b) off-sequence b-mass", off, "<=~", float(c / a) * math.log(2) * bits)
        rep.measured["-log M"] = bits
    return rep


def verify_thm51(trials=10_000, seed=0):
    """Randomized: semimeasures are monotone, and the loss of Lambda_b
    exceeds the optimal one by at most the L1 distance of posteriors."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rep = TheoremReport("thm51", {"trials": trials, "seed": seed, "rng": V.RNG_ALGORITHM})
    with _timed(rep):
        mono_bad = lo_bad = hi_bad = 0
        tight = Fraction(0)
        for _ in range(trials):
            nx = int(rng.integers(2, 4))
            ny = int(rng.integers(1, 4))
            depth = int(rng.integers(1, 5))
            mono_bad += _random_semimeasure_violations(rng, nx, depth)
            loss = D.LossMatrix(tuple(tuple(Fraction(int(v), 8) for v in rng.integers(0, 9, ny))
                                      for _ in range(nx)))
            mu = _random_simplex(rng, nx, normalized=True)
            bv = _random_simplex(rng, nx, normalized=bool(rng.integers(0, 2)))
            l_b = D.inst_loss(mu, D.act(bv, loss), loss)
            l_mu = D.inst_loss(mu, D.act(mu, loss), loss)
            bound = sum((abs(p - q) for p, q in zip(bv, mu)), Fraction(0))
            diff = l_b - l_mu
            lo_bad += diff < 0
            hi_bad += diff > bound
            if bound and diff / bound > tight:
                tight = diff / bound
        rep.add("(a) monotonicity violations", mono_bad, "==", 0)
        rep.add("(d) negative loss differences", lo_bad, "==", 0)
        rep.add("(d) bound violations", hi_bad, "==", 0)
        # hand-made worst case: error loss, mu = (0,1), b = (1/2,1/2)
        loss = D.error_loss(2)
        mu, bv = (Fraction(0), Fraction(1)), (Fraction(1, 2), Fraction(1, 2))
        diff = D.inst_loss(mu, D.act(bv, loss), loss) - D.inst_loss(mu, D.act(mu, loss), loss)
        rep.add("worst case attains the bound", diff, "==",
                sum(abs(p - q) for p, q in zip(bv, mu)))
        rep.measured["max diff/bound seen"] = tight
    return rep


def _random_simplex(rng, n, normalized):
    w = [int(v) for v in rng.integers(0, 7, n)]
    extra = 0 if normalized else int(rng.integers(0, 7))
    tot = sum(w) + extra
    if tot == 0:
        w[0], tot = 1, 1 + extra
    return tuple(Fraction(v, tot) for v in w)


def _random_semimeasure_violations(rng, nx, depth):
    val = {(): _random_simplex(rng, 1, normalized=False)[0] or Fraction(1)}
    bad = 0
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for ctx in frontier:
            cond = _random_simplex(rng, nx, normalized=False)
            for a in range(nx):
                v = val[ctx] * cond[a]
                val[ctx + (a,)] = v
                bad += v > val[ctx]
                nxt.append(ctx + (a,))
        frontier = nxt
    return bad


def verify_k_failure(budget=Budget(16, 10_000), depth=6, zeros_upto=8):
    """Halting complexity on the reference machine: k is not monotone."""
    ref = reference_universal()
    rep = TheoremReport("k_failure", {"budget": str(budget), "depth": depth})
    with _timed(rep):
        est = estimator(ref, budget).survey(depth)
        kz = [_pow2(est.k((0,) * n)) for n in range(zeros_upto + 1)]
        rep.add("k(eps) >= k(0) >= k(00)", int(kz[0] >= kz[1] >= kz[2]), "==", 1)
        k = P.from_K(ref, budget)
        viol = P.check_monotone(k, depth)
        extra = [((0,) * n, (0,)) for n in range(depth, zeros_upto)
                 if kz[n + 1] > kz[n]]
        rep.add("#k monotonicity violations", len(viol) + len(extra), ">=", 1)
        rep.add("#m monotonicity violations", len(P.check_monotone(P.from_km(ref, budget),
                                                                   depth)), "==", 0)
        rep.measured["K(0^n)"] = [est.k((0,) * n) for n in range(zeros_upto + 1)]
        sample = sorted(viol, key=lambda v: (len(v[0]) + len(v[1]), v))[:5] + extra
        rep.measured["example_violations"] = [
            {"x": xx, "y": yy, "K(x)": est.k(xx), "K(xy)": est.k(xx + yy)} for xx, yy in sample]
    return rep


# ------------------------------------------------- empirical (not a theorem)

def empirical_ims(machine, budget, env, horizon=32, runs=8, seed=0):
    """Cumulative squared error of normalized M posteriors against mu.

    Records the running per-step average at quarter points; the verdict is
    only whether that average is nonincreasing.  Empirical, not a theorem
    check.
    """
    rep = TheoremReport("empirical_ims", {"machine": machine.tag, "env": env.spec,
                                          "budget": str(budget), "horizon": horizon,
                                          "runs": runs, "seed": seed,
                                          "rng": V.RNG_ALGORITHM},
                        note="empirical, not a theorem check")
    with _timed(rep):
        Mf = P.from_M(machine, budget)
        err = [0.0] * horizon
        cnt = [0] * horizon
        truncated = 0
        ss = np.random.SeedSequence(seed)
        for child in ss.spawn(runs):
            run_env = copy.copy(env)
            run_env.seed = int(child.generate_state(1)[0])
            xs = run_env.sample(horizon)
            Mf.along(xs)
            for t in range(horizon):
                ctx = xs[:t]
                try:
                    pm = P.normalize(Mf, ctx)
                except P.UndefinedContext:
                    truncated += 1   # budget too small for this context
                    break
                pu = run_env.posterior(ctx)
                err[t] += sum(float(a - b) ** 2 for a, b in zip(pm.values, pu.values))
                cnt[t] += 1
        steps = [t for t in range(horizon) if cnt[t]]
        total, avgs = 0.0, []
        for t in steps:
            total += err[t] / cnt[t]
            avgs.append(total / (t + 1))
        n = len(avgs)
        marks = sorted({max(1, n * q // 4) for q in range(1, 5)}) if n else []
        pts = [avgs[i - 1] for i in marks]
        rep.add("running average nonincreasing",
                sum(b > a + FLOAT_TOL for a, b in zip(pts, pts[1:])), "==", 0)
        rep.measured.update(checkpoints=marks, running_average=pts, cumulative=total,
                            truncated_runs=truncated)
    return rep


CHECKS = {
    "vi5": lambda cfg: verify_vi5(cfg.get("s", 4)),
    "vi6": lambda cfg: verify_vi6(cfg.get("variant", "raw")),
    "vi6n": lambda cfg: verify_vi6("normalized"),
    "vii3": lambda cfg: verify_vii3(Fraction(cfg.get("eps", 0))),
    "vii5_simple": lambda cfg: verify_vii5_simple(cfg.get("s", 8), cfg.get("samples", 10_000),
                                                  cfg.get("seed", 0),
                                                  cfg.get("uprime", False)),
    "vii5_general": lambda cfg: verify_vii5_general(cfg.get("s", 3),
                                                    symbols(cfg.get("x0", "0")),
                                                    seed=cfg.get("seed", 0)),
    "thm51": lambda cfg: verify_thm51(cfg.get("trials", 10_000), cfg.get("seed", 0)),
    "k_failure": lambda cfg: verify_k_failure(),
}
