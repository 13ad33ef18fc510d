"""``qcp`` command line: run, certify and bound-check ``.qcp`` protocols, and demos.

Exit codes: 0 success, 2 input error, 3 qubit cap exceeded, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__, dsl, ip
from .certificate import certify_prefixes
from .coding import bound_report, superdense_protocol
from .config import MAX_QUBITS
from .generators import random_protocol
from .model import (CapExceeded, ProtocolError, as_bits, bits_to_int, check_cap, int_to_bits,
                    messages, output_distribution, run_protocol, success_probability)

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4
RESIDUAL_LIMIT = 1e-8
BOUND_SLACK = 1e-9

REPORT_FIELDS = ("command", "protocolName", "n", "E", "m_A", "m_B", "successExact",
                 "boundRhs", "margin", "traceIdentityResidual", "reconstructionResidual",
                 "timestamp", "seed", "toolVersion")
CSV_FIELDS = ("demo", "n", "t", "epsilon", "bits", "qubits", "success", "lowerBound")


class InputError(Exception):
    pass


def _cap_default() -> int:
    env = os.environ.get("QCP_CAP_QUBITS")
    if env is None:
        return MAX_QUBITS
    try:
        return int(env)
    except ValueError:
        raise InputError(f"QCP_CAP_QUBITS must be an integer, got {env!r}") from None


def certificate_residuals(p, cap: int, xs=None) -> tuple[float, float]:
    """Worst trace-identity and reconstruction residuals over messages and round prefixes."""
    tr = rec = 0.0
    for x in (messages(p.n) if xs is None else xs):
        for c, r in certify_prefixes(p, x, cap):
            tr = max(tr, c.trace_residual())
            rec = max(rec, r)
    return tr, rec


def make_report(command: str, p, success: float | None, tr: float, rec: float,
                seed: int) -> dict:
    """``success`` is None for protocols whose outputs are not an n-bit guess."""
    b = bound_report(0.0 if success is None else success, p.n, p.m_A)
    return {
        "command": command,
        "protocolName": p.name,
        "n": p.n,
        "E": p.E,
        "m_A": p.m_A,
        "m_B": p.m_B,
        "successExact": success,
        "boundRhs": b.rhs,
        "margin": None if success is None else b.margin,
        "traceIdentityResidual": tr,
        "reconstructionResidual": rec,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "toolVersion": __version__,
    }


def _load(args):
    if getattr(args, "random", False):
        return random_protocol(args.seed, n=args.n or 2, m_A=args.m_A, m_B=args.m_B,
                               rounds=args.rounds)
    if not args.file:
        raise InputError("a protocol file (or --random) is required")
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {args.file}: {e.strerror}") from None
    try:
        return dsl.load(text)
    except dsl.ParseError as e:
        raise InputError(f"{args.file}:{e.line}:{e.column}: parse error: {e.message}"
                         + (f" (at {e.token!r})" if e.token else "")) from None
    except dsl.ValidationError as e:
        where = f"{e.line}:{e.column}: " if e.line else ""
        raise InputError(f"{args.file}:{where}invalid protocol: {e.message}") from None


def cmd_run(args, cap: int):
    p = _load(args)
    if args.input is None:
        raise InputError("--input BITS is required")
    if len(args.input) != p.n or set(args.input) - {"0", "1"}:
        raise InputError(f"--input must be {p.n} binary digits")
    x = as_bits(args.input, p.n)
    check_cap(p.num_qubits, cap)
    dist = output_distribution(run_protocol(p, x, cap), p.outputs)
    k = len(p.outputs)
    labels = ["".join(map(str, int_to_bits(i, k))) for i in range(1 << k)]
    hit = float(dist[bits_to_int(x)]) if k == p.n else None
    tr, rec = certificate_residuals(p, cap, [x])
    rep = make_report("run", p, hit, tr, rec, args.seed)
    rep["input"] = args.input
    rep["distribution"] = {lab: float(v) for lab, v in zip(labels, dist) if v > 1e-15}
    return rep, [], EXIT_OK


def cmd_certify(args, cap: int):
    p = _load(args)
    check_cap(p.num_qubits, cap)
    tr, rec = certificate_residuals(p, cap)
    success = success_probability(p, args.threads, cap) if len(p.outputs) == p.n else None
    rep = make_report("certify", p, success, tr, rec, args.seed)
    ok = tr <= RESIDUAL_LIMIT and rec <= RESIDUAL_LIMIT
    return rep, [], EXIT_OK if ok else EXIT_INVARIANT


def cmd_bound(args, cap: int):
    p = _load(args)
    if p.n < 1:
        raise InputError("bound needs n >= 1")
    check_cap(p.num_qubits, cap)
    success = success_probability(p, args.threads, cap)
    tr, rec = certificate_residuals(p, cap)
    rep = make_report("bound", p, success, tr, rec, args.seed)
    return rep, [], EXIT_OK if rep["margin"] >= -BOUND_SLACK else EXIT_INVARIANT


def _row(demo, n, t="", eps="", bits="", qubits="", success="", lower=""):
    return dict(zip(CSV_FIELDS, (demo, n, t, eps, bits, qubits, success, lower)))


def demo_superdense(args, cap):
    m = 1 if args.m is None else args.m
    if m < 1:
        raise InputError("--m must be at least 1")
    check_cap(2 * m, cap)
    p = superdense_protocol(m)
    tr, rec = certificate_residuals(p, cap)
    rep = make_report("demo superdense", p, success_probability(p, args.threads, cap),
                      tr, rec, args.seed)
    rows = [_row("superdense", p.n, bits=p.n, qubits=p.m_A, success=rep["successExact"],
                 lower=p.n / 2)]
    code = EXIT_OK if rep["margin"] >= -BOUND_SLACK and max(tr, rec) <= RESIDUAL_LIMIT \
        else EXIT_INVARIANT
    return rep, rows, code


def _ts(args, n):
    if args.t is not None:
        if not 0 <= args.t <= n:
            raise InputError(f"--t must lie in 0..{n}")
        return [args.t]
    return list(range(1, n + 1))


def _need_n(args, default=4, low=1):
    n = default if args.n is None else args.n
    if n < low:
        raise InputError(f"--n must be at least {low}")
    return n


def demo_ip_classical(args, cap):
    n = _need_n(args)
    if n > 10:
        raise InputError("--n above 10 makes exhaustive enumeration too slow")
    rows, results = [], []
    for t in _ts(args, n):
        r = ip.classical_ip_protocol(n, t)
        eps = ip.epsilon_for_t(t)
        rows.append(_row("ip-classical", n, t, eps, r.bits, "", float(r.min_success),
                         ip.ip_lower_bound(n, eps)))
        results.append({"t": t, "bits": r.bits, "success": str(r.min_success),
                        "successMin": float(r.min_success), "successMax": float(r.max_success)})
    return {"command": "demo ip-classical", "n": n, "results": results,
            "timestamp": _now(), "seed": args.seed, "toolVersion": __version__}, rows, EXIT_OK


def demo_ip_quantum(args, cap):
    n = _need_n(args)
    if n > 8:
        raise InputError("--n above 8 makes the full simulation too slow")
    rows, results = [], []
    code = EXIT_OK
    for t in _ts(args, n):
        check_cap(n - t + 2, cap)
        r = ip.quantum_ip_protocol(n, t)
        classical = ip.classical_ip_protocol(n, t) if n <= 10 else None
        rows.append(_row("ip-quantum", n, t, r.epsilon_target, r.classical_bits,
                         r.quantum_qubits, r.success_exact, r.lower_bound_qubits))
        if r.lower_bound_qubits > r.quantum_qubits + BOUND_SLACK:
            code = EXIT_INVARIANT
        results.append({
            "t": t, "bits": r.classical_bits, "qubits": r.quantum_qubits,
            "upperBoundFormula": r.upper_bound_formula, "padded": r.padded,
            "success": r.success_exact,
            "matchesClassical": None if classical is None else
            abs(r.success_exact - float(classical.min_success)) <= BOUND_SLACK,
            "lowerBound": r.lower_bound_qubits})
    return {"command": "demo ip-quantum", "n": n, "results": results,
            "timestamp": _now(), "seed": args.seed, "toolVersion": __version__}, rows, code


def demo_ip_reduction(args, cap):
    n = _need_n(args, default=2)
    eps = 0.0 if args.eps is None else args.eps
    if not 0 <= eps < 0.5:
        raise InputError("--eps must lie in [0, 0.5)")
    check_cap(2 * n + 1, cap)
    t, rep = ip.reduction_report(n, eps)
    tr, rec = certificate_residuals(t, cap)
    out = make_report("demo ip-reduction", t, rep.recovery_average, tr, rec, args.seed)
    out.update(recoveryProbability=rep.recovery_worst, recoveryAverage=rep.recovery_average,
               recoveryExpected=rep.expected, ipError=rep.ip_error, epsilon=eps)
    rows = [_row("ip-reduction", n, "", eps, "", t.m_A, rep.recovery_worst,
                 ip.ip_lower_bound(n, eps))]
    ok = out["margin"] >= -BOUND_SLACK and max(tr, rec) <= RESIDUAL_LIMIT
    return out, rows, EXIT_OK if ok else EXIT_INVARIANT


DEMOS = {"superdense": demo_superdense, "ip-classical": demo_ip_classical,
         "ip-quantum": demo_ip_quantum, "ip-reduction": demo_ip_reduction}


def cmd_demo(args, cap):
    return DEMOS[args.name](args, cap)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _common() -> argparse.ArgumentParser:
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cap-qubits", type=int, default=None)
    fmt = c.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    c.add_argument("--out", default=None)
    c.add_argument("--threads", type=int, default=1)
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="qcp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run a protocol on one input")
    r.add_argument("file")
    r.add_argument("--input")
    r.set_defaults(func=cmd_run, fmt_default="json")

    for name, func, text in (("certify", cmd_certify, "check the state-form certificate"),
                             ("bound", cmd_bound, "compare success with 2^(2 m_A) / 2^n")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("file", nargs="?")
        s.add_argument("--random", action="store_true",
                       help="use a seeded random protocol instead of a file")
        s.add_argument("--n", type=int, default=None)
        s.add_argument("--m-A", dest="m_A", type=int, default=1)
        s.add_argument("--m-B", dest="m_B", type=int, default=1)
        s.add_argument("--rounds", type=int, default=3)
        s.set_defaults(func=func, fmt_default="json")

    d = sub.add_parser("demo", parents=[common], help="built-in constructions")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--n", type=int)
    d.add_argument("--t", type=int)
    d.add_argument("--eps", type=float)
    d.add_argument("--m", type=int)
    d.set_defaults(func=cmd_demo, fmt_default="csv")
    return ap


def _render(rep: dict, rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rep, indent=2, default=_jsonable) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        w = csv.DictWriter(buf, REPORT_FIELDS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerow(rep)
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if hasattr(v, "item"):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        cap = args.cap_qubits if args.cap_qubits is not None else _cap_default()
        if args.threads < 1:
            raise InputError("--threads must be at least 1")
        rep, rows, code = args.func(args, cap)
    except InputError as e:
        print(f"qcp: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as e:
        print(f"qcp: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ProtocolError, ValueError) as e:
        print(f"qcp: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = _render(rep, rows, args.fmt or args.fmt_default)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_INVARIANT:
        print("qcp: invariant violated", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
