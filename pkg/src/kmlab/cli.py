"""Command-line front end: ``kmlab estimate | predict | verify``."""
import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction

from . import decision as D
from . import environments as V
from . import predictive as P
from . import verify as W
from ._jit import backend
from .enumeration import Budget, estimator, neg_log2
from .machine import INF, fmt, parse_machine, symbols

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _frac(v):
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _num(v):
    return "inf" if v == INF else str(v)


def parse_strings(text):
    """Comma-separated strings.  ``eps`` is the empty string, ``0^5`` means
    ``00000`` and ``0^k,k<=14`` expands to every power 0..14."""
    toks = [t.strip() for t in text.split(",")] if text.strip() else [""]
    out, i = [], 0
    while i < len(toks):
        tok = toks[i]
        rng = re.fullmatch(r"(\d+)\^k", tok)
        if rng and i + 1 < len(toks):
            m = re.fullmatch(r"k(?:<=|≤)(\d+)", toks[i + 1])
            if m:
                out.extend(symbols(rng.group(1) * k) for k in range(int(m.group(1)) + 1))
                i += 2
                continue
        pw = re.fullmatch(r"(\d+)\^(\d+)", tok)
        if pw:
            out.append(symbols(pw.group(1) * int(pw.group(2))))
        elif re.fullmatch(r"\d*|eps|ε", tok):
            out.append(symbols(tok))
        else:
            raise UsageError(f"cannot parse string {tok!r} (column {text.find(tok) + 1})")
        i += 1
    return out


def _budget(cfg):
    return Budget(cfg["max_len"], cfg["steps"], cfg.get("sub_len"))


def _header(cfg):
    return "# config: " + json.dumps(cfg, sort_keys=True, ensure_ascii=False) + "\n"


def _write(cfg, text):
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _machine(cfg):
    try:
        return parse_machine(cfg["machine"])
    except ValueError as e:
        raise UsageError(f"machine spec {cfg['machine']!r}: {e}") from None


def cmd_estimate(cfg):
    m = _machine(cfg)
    budget = _budget(cfg)
    if budget.max_len == 0 or budget.max_steps == 0:
        print("warning: zero budget, every estimate beyond the empty string is trivial",
              file=sys.stderr)
    strings = parse_strings(cfg.get("strings") or "")
    if cfg.get("depth") is not None:
        strings += m.alphabet.strings_upto(cfg["depth"])
    est = estimator(m, budget, cfg.get("workers", 1))
    if cfg.get("depth") is not None:
        est.survey(cfg["depth"])
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "Km_upper", "M_lower", "neg_log2_M", "K_upper", "L", "T"])
    for x in strings:
        M = est.M(x)
        k = _num(est.k(x)) if m.supports_halt else "n/a"
        nl = neg_log2(M)
        w.writerow([fmt(x), _num(est.km(x)), _frac(M),
                    nl if isinstance(nl, int) else ("inf" if nl == INF else f"{nl:.6f}"),
                    k, budget.max_len, budget.max_steps])
    _write(cfg, buf.getvalue())
    return EXIT_OK


def _predictor(kind, m, budget):
    if kind == "km":
        return P.from_km(m, budget)
    if kind == "M":
        return P.from_M(m, budget)
    if kind == "k":
        return P.from_K(m, budget)
    if kind == "mdl":
        return P.simple_mdl(m, budget)
    raise UsageError(f"unknown predictor {kind!r}")


def cmd_predict(cfg):
    try:
        env = V.parse_env(cfg["env"], cfg.get("seed", 0))
        loss = D.parse_loss(cfg["loss"], env.alphabet)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if cfg.get("predictor") == "mu":
        rho = env.as_predictive()
    else:
        rho = _predictor(cfg.get("predictor", "km"), _machine(cfg), _budget(cfg))
    if loss.n_outcomes != env.alphabet.size:
        raise UsageError("loss rows do not match the environment alphabet")
    tr = D.run_predictor(rho, env, loss, cfg["horizon"])
    n = env.alphabet.size
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x_t"] + [f"post_{a}" for a in range(n)]
               + ["y_t", "l_t", "l_t_opt", "ratio", "ratio_float"])
    for st in tr.steps:
        r = st.ratio
        w.writerow([st.t, st.symbol] + [_frac(v) for v in st.posterior]
                   + [st.action, _frac(st.loss), _frac(st.opt_loss),
                      _frac(r) if r != INF else "inf", f"{float(r):.6f}"])
    if tr.stopped:
        buf.write(f"# stopped: {tr.stopped}\n")
    _write(cfg, buf.getvalue())
    return EXIT_OK


def cmd_verify(cfg):
    names = cfg.get("checks") or []
    if isinstance(names, str):
        names = [c for c in names.split(",") if c]
    if not names:
        raise UsageError("no checks requested")
    unknown = [c for c in names if c not in W.CHECKS]
    if unknown:
        raise UsageError(f"unknown check(s) {', '.join(unknown)}; "
                         f"known: {', '.join(sorted(W.CHECKS))}")
    lines, ok = [], True
    for name in names:
        rep = W.CHECKS[name](cfg)
        d = rep.to_dict()
        if not cfg.get("timing"):
            d.pop("runtime_s")
        lines.append(json.dumps(d, sort_keys=True, ensure_ascii=False))
        ok &= rep.verdict
    text = _header(cfg) + "\n".join(lines) + "\n"
    _write(cfg, text)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"estimate": cmd_estimate, "predict": cmd_predict, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="kmlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--machine", default="refvm", help="machine spec, e.g. 'builtin:v5 s=4 uprime=off'")
        sp.add_argument("--max-len", type=int, default=16, dest="max_len")
        sp.add_argument("--steps", type=int, default=10_000)
        sp.add_argument("--sub-len", type=int, default=None, dest="sub_len",
                        help="program length limit below an embedded-machine prefix")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
        sp.add_argument("--config", default=None, help="JSON file; its keys override flags")

    e = sub.add_parser("estimate", help="Km, M and K estimates for strings")
    common(e)
    e.add_argument("--strings", default="", help="e.g. '0^k,k<=14' or '0,01,eps'")
    e.add_argument("--depth", type=int, default=None, help="also every string up to this length")
    e.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("predict", help="per-step trace of a loss-minimizing predictor")
    common(r)
    r.add_argument("--env", default="bernoulli:1/2")
    r.add_argument("--loss", default="error")
    r.add_argument("--horizon", type=int, default=16)
    r.add_argument("--predictor", default="km", choices=["km", "M", "k", "mdl", "mu"])

    v = sub.add_parser("verify", help="run theorem checks")
    common(v)
    v.add_argument("names", nargs="*", help="check names (same as --checks)")
    v.add_argument("--checks", default=None, help="comma-separated check names")
    v.add_argument("--s", type=int, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--eps", default=None)
    v.add_argument("--uprime", action="store_true")
    v.add_argument("--x0", default=None)
    v.add_argument("--timing", action="store_true", help="include runtimes (breaks byte-identity)")
    return p


def resolve(args):
    cfg = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if args.command == "verify":
        names = list(cfg.pop("names", []))
        if cfg.get("checks"):
            names += [c for c in cfg["checks"].split(",") if c]
        cfg["checks"] = names
        if not cfg.get("uprime"):
            cfg.pop("uprime", None)
        if not cfg.get("timing"):
            cfg.pop("timing", None)
    if args.config:
        try:
            with open(args.config) as fh:
                over = json.load(fh)
        except json.JSONDecodeError as e:
            raise UsageError(f"{args.config}: line {e.lineno}, column {e.colno}: {e.msg}") from None
        except OSError as e:
            raise UsageError(str(e)) from None
        if not isinstance(over, dict):
            raise UsageError(f"{args.config}: top level must be an object")
        cfg.update({k.replace("-", "_"): v for k, v in over.items()})
    cfg["backend"] = backend()
    return cfg


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        cfg = resolve(args)
        return COMMANDS[cfg["command"]](cfg)
    except UsageError as e:
        print(f"kmlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as e:
        print(f"kmlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
