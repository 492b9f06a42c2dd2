"""Command-line front end.

Every command builds an :class:`Artifact` (inputs, a formula tag, a summary
and a table) and writes it as JSON or CSV.  Floats are rounded to 12
significant digits and rows come out in a fixed order, so identical
invocations produce byte-identical files.

Exit codes: 0 success, 2 usage error, 3 failed precondition, 4 budget
exhausted before reaching the requested tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .approx import (
    expansion_prediction,
    measure,
    relative_entropy,
    uniform_state,
)
from .codec import average_energy, code_from_block_state, code_from_eigenvalues, energy_sandwich
from .errors import PreconditionError, SchurCodeError, SpectrumError
from .minimax import jn_prior, minimax_value, sigma_j_state
from .schur import Spectrum
from .young import count_diagrams, dim_su, dim_sym, enumerate_diagrams

SCHEMA = 1
THREADS_ENV = "SCHURCODE_THREADS"


def fmt(x):
    """Round floats to 12 significant digits; leave exact values alone."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return fmt(float(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return str(x)


def _csv_cell(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, list):
        return ";".join(_csv_cell(v) for v in x)
    return "" if x is None else str(x)


@dataclass
class Artifact:
    command: str
    inputs: dict
    anchor: str
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "anchor": self.anchor,
            "inputs": fmt(self.inputs),
            "summary": fmt(self.summary),
            "rows": fmt(self.rows),
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema: {SCHEMA}\n# command: {self.command}\n# anchor: {self.anchor}\n")
        for key, val in fmt(self.inputs).items():
            buf.write(f"# input.{key}: {_csv_cell(val)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        if self.rows:
            for key, val in fmt(self.summary).items():
                buf.write(f"# summary.{key}: {_csv_cell(val)}\n")
            header = list(self.rows[0])
            writer.writerow(header)
            for row in fmt(self.rows):
                writer.writerow([_csv_cell(row[h]) for h in header])
        else:
            writer.writerow(["key", "value"])
            for key, val in fmt(self.summary).items():
                writer.writerow([key, _csv_cell(val)])
        return buf.getvalue()

    def render(self, form: str) -> str:
        return self.to_csv() if form == "csv" else self.to_json()


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise SchurCodeError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return 1


def _pmap(fn, items):
    items = list(items)
    workers = _threads()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _spectrum(text: str, d: int | None = None, ordered: bool = False) -> Spectrum:
    p = Spectrum.parse(text)
    if d is not None and p.d != d:
        raise SpectrumError(f"spectrum has {p.d} entries but d = {d}")
    if ordered and not p.strictly_decreasing:
        raise SpectrumError(f"spectrum must be strictly decreasing, got {text}")
    return p


def _state(prior: str, n: int, d: int):
    if prior == "uniform":
        return uniform_state(n, d)
    return sigma_j_state(n, d)


# -- commands -----------------------------------------------------------------


def cmd_diagrams(args) -> Artifact:
    inputs = {"n": args.n, "d": args.d, "count": args.count}
    art = Artifact("diagrams", inputs, "young-diagrams: non-increasing rows, sum n, depth <= d")
    art.summary["count"] = count_diagrams(args.n, args.d)
    if not args.count:
        art.rows = [{"diagram": str(lam), "length": lam.length} for lam in enumerate_diagrams(args.n, args.d)]
    return art


def cmd_dims(args) -> Artifact:
    inputs = {"n": args.n, "d": args.d, "exact": args.exact}
    art = Artifact("dims", inputs, "weyl-dimension dim U and hook-length dimension dim V")
    total = 0
    for lam in enumerate_diagrams(args.n, args.d):
        du = dim_su(lam)
        dv = dim_sym(lam, exact=True if args.exact else None)
        art.rows.append({
            "diagram": str(lam),
            "dim_u": du.exact,
            "dim_v": dv.exact,
            "log2_dim_u": du.log2,
            "log2_dim_v": dv.log2,
        })
        if du.exact is not None and dv.exact is not None:
            total += du.exact * dv.exact
    if all(r["dim_v"] is not None for r in art.rows):
        art.summary["sum_dim_u_dim_v"] = total
        art.summary["d_pow_n"] = args.d ** args.n
    return art


def cmd_measure(args) -> Artifact:
    p = _spectrum(args.p, args.d)
    inputs = {"n": args.n, "d": args.d, "p": args.p}
    art = Artifact("measure", inputs, "schur-weyl-measure: Q(lam) = s_lam(p) dim V_lam")
    meas = measure(p, args.n)
    for lam, w in meas.weights.items():
        row = {"diagram": str(lam), "weight": w}
        if p.exact:
            row["weight_exact"] = f"{w.numerator}/{w.denominator}"
        art.rows.append(row)
    art.summary["total"] = meas.total()
    return art


def _dyadic(lo: int, hi: int) -> list[int]:
    if lo < 0 or hi < lo:
        raise PreconditionError("need 0 <= log2-n-min <= log2-n-max")
    return [1 << k for k in range(lo, hi + 1)]


def cmd_redundancy_curve(args) -> Artifact:
    p = _spectrum(args.p, args.d, ordered=True)
    ns = _dyadic(args.log2_n_min, args.log2_n_max)
    inputs = {"d": args.d, "p": args.p, "prior": args.prior, "log2_n_min": args.log2_n_min,
              "log2_n_max": args.log2_n_max}
    art = Artifact("redundancy-curve", inputs,
                   "block-relative-entropy D(rho^n||sigma) minus ((d^2-1)/2) log2 n")
    scale = (args.d ** 2 - 1) / 2

    def one(n):
        sigma = _state(args.prior, n, args.d)
        div = relative_entropy(p, sigma)
        pred = expansion_prediction(p, n, prior=None if args.prior == "uniform" else sigma)
        pred_w = expansion_prediction(p, n, prior=None if args.prior == "uniform" else sigma, weyl=True)
        return {"n": n, "divergence": div, "compensated": div - scale * math.log2(n),
                "prediction": pred, "prediction_weyl": pred_w}

    art.rows = _pmap(one, ns)
    return art


def cmd_minimax(args) -> Artifact:
    inputs = {"d": args.d, "tol": args.tol, "seed": args.seed, "samples": args.samples}
    res = minimax_value(args.d, tol=args.tol, seed=args.seed, samples=args.samples)
    art = Artifact("minimax", inputs, "jeffreys-normalizer: log2 int 2^C(p) dp over the ordered simplex, plus C_d")
    art.summary = {
        "method": res.integral.method,
        "integral": res.integral.value,
        "integral_error": res.integral.error,
        "integral_log": res.log2_integral,
        "integral_log_error": res.integral.log2_error,
        "c_d": res.c_d,
        "c_d_weyl": res.c_d_weyl,
        "minimax": res.value,
        "minimax_weyl": res.value_weyl,
        "comparison": res.comparison,
        "improvement": res.improvement,
    }
    return art


def cmd_prior(args) -> Artifact:
    inputs = {"n": args.n, "d": args.d, "boundary": args.boundary}
    prior = jn_prior(args.n, args.d, boundary=args.boundary)
    art = Artifact("prior", inputs, "discrete-jeffreys-prior: J_n(lam) proportional to 2^C(lam/n)")
    art.summary = {"log2_normalizer": prior.log2_normalizer, "normalizer_ratio": prior.normalizer_ratio}
    art.rows = [{"diagram": str(lam), "weight": w} for lam, w in prior.weights.items()]
    return art


def _code_for(args):
    if args.prior == "spectrum":
        q = _spectrum(args.q or args.p, args.d)
        return code_from_eigenvalues(list(q.probs)), list(q.probs)
    sigma = _state(args.prior, args.n, args.d)
    return code_from_block_state(sigma), sigma


def cmd_code_build(args) -> Artifact:
    inputs = {"n": args.n, "d": args.d, "prior": args.prior, "q": args.q, "p": args.p}
    code, _ = _code_for(args)
    art = Artifact("code build", inputs, "shannon-code: lengths ceil(-log2 eigenvalue), canonical assignment")
    doc = code.to_dict()
    art.summary = {k: v for k, v in doc.items() if k != "blocks"}
    art.summary.update(max_length=code.max_length(), prefix_free=code.is_prefix_free(),
                       shannon_bounds=code.satisfies_shannon_bounds())
    art.rows = doc["blocks"]
    return art


def cmd_code_redundancy(args) -> Artifact:
    inputs = {"n": args.n, "d": args.d, "prior": args.prior, "q": args.q, "p": args.p}
    code, sigma = _code_for(args)
    p = _spectrum(args.p, args.d)
    sandwich = energy_sandwich(code, sigma, p)
    art = Artifact("code redundancy", inputs, "energy-sandwich: nH + D <= average energy <= nH + D + 1")
    art.summary = {
        "average_energy": average_energy(code, p),
        "entropy": sandwich.entropy,
        "divergence": sandwich.divergence,
        "redundancy": sandwich.energy - sandwich.entropy,
        "slack": sandwich.slack,
        "holds": sandwich.holds(),
    }
    return art


def cmd_bound_verify(args) -> Artifact:
    from .energybound import identity_embedding, random_density, random_isometry, sigma_of_code, verify_energy_bound

    inputs = {"n": args.n, "d": args.d, "K": args.K, "seeds": args.seeds, "seed0": args.seed}
    art = Artifact("bound verify", inputs,
                   "fock-energy-bound: energy >= -Tr rho log2 sigma(U) - log2 ceil(n log2 d)")

    def one(job):
        label, seed = job
        if label == "identity":
            code = identity_embedding(args.n, args.d, K=args.K)
        else:
            code = random_isometry(args.n, args.d, args.K, seed=seed)
        rep = sigma_of_code(code)
        chk = verify_energy_bound(code, random_density(args.d ** args.n, seed), rep)
        return {
            "code": label, "seed": seed, "trace": rep.trace, "trace_bound": rep.trace_bound,
            "reconstruction_error": rep.reconstruction_error, "energy": chk.energy,
            "margin": chk.margin, "intermediate_margin": chk.intermediate_margin,
        }

    jobs = [("identity", args.seed)] + [("random", args.seed + i) for i in range(args.seeds)]
    art.rows = _pmap(one, jobs)
    art.summary = {"min_margin": min(r["margin"] for r in art.rows),
                   "max_trace_ratio": max(r["trace"] / r["trace_bound"] for r in art.rows)}
    return art


# -- parser -------------------------------------------------------------------


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default: csv for tables, json otherwise)")
    common.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="schurcode", description="Schur-Weyl universal coding computations")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagrams", parents=[common], help="enumerate or count Young diagrams")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--count", action="store_true")
    p.set_defaults(func=cmd_diagrams, default_format="csv")

    p = sub.add_parser("dims", parents=[common], help="dimension table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--exact", action="store_true", help="big-integer dim V beyond the exact limit")
    p.set_defaults(func=cmd_dims, default_format="csv")

    p = sub.add_parser("measure", parents=[common], help="Schur-Weyl weights")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--p", required=True, help="comma-separated spectrum, floats or fractions")
    p.set_defaults(func=cmd_measure, default_format="csv")

    p = sub.add_parser("redundancy-curve", parents=[common], help="D and compensated D over dyadic n")
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--prior", choices=("uniform", "jeffreys"), default="uniform")
    p.add_argument("--log2-n-min", type=int, default=4)
    p.add_argument("--log2-n-max", type=int, default=12)
    p.set_defaults(func=cmd_redundancy_curve, default_format="csv")

    p = sub.add_parser("minimax", parents=[common], help="Jeffreys normaliser and minimax constant")
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=_positive, default=200_000)
    p.set_defaults(func=cmd_minimax, default_format="json")

    p = sub.add_parser("prior", parents=[common], help="discrete Jeffreys prior table")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--d", type=_positive, required=True)
    p.add_argument("--boundary", choices=("zero", "nudge"), default="zero")
    p.set_defaults(func=cmd_prior, default_format="csv")

    p = sub.add_parser("code", help="prefix codes from block states")
    code_sub = p.add_subparsers(dest="code_command", required=True)
    for name, func in (("build", cmd_code_build), ("redundancy", cmd_code_redundancy)):
        c = code_sub.add_parser(name, parents=[common])
        c.add_argument("--n", type=_positive, default=1)
        c.add_argument("--d", type=_positive, required=True)
        c.add_argument("--prior", choices=("uniform", "jeffreys", "spectrum"), default="uniform",
                       help="state the code is built for; 'spectrum' uses --q directly (n = 1)")
        c.add_argument("--q", default=None, help="eigenvalues for --prior spectrum (default: --p)")
        c.add_argument("--p", default=None, help="source spectrum")
        c.set_defaults(func=func, default_format="json")

    p = sub.add_parser("bound", help="Fock-space energy lower bound")
    bound_sub = p.add_subparsers(dest="bound_command", required=True)
    b = bound_sub.add_parser("verify", parents=[common])
    b.add_argument("--n", type=_positive, default=2)
    b.add_argument("--d", type=_positive, default=2)
    b.add_argument("--K", type=_positive, default=10)
    b.add_argument("--seeds", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bound_verify, default_format="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is cmd_code_redundancy and args.p is None:
        parser.error("code redundancy needs --p")
    form = args.format or args.default_format
    try:
        art = args.func(args)
    except SchurCodeError as exc:
        print(f"schurcode: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"schurcode: error: {exc}", file=sys.stderr)
        return 3
    text = art.render(form)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
