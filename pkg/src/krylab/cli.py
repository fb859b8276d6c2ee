"""Command line interface: ``krylab <group> <action> [options]``.

Exit codes: 0 success / all scenarios pass, 1 a scenario failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import gaps, kclass, krylov, scenarios, weak
from .errors import KrylabError
from .operators import build_example_operator, unitary_matrix
from .space import AmbientSpace, CoeffVector, SubspaceBasis, WeakNormSpec


class UsageError(KrylabError):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_kv(items) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"--param expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_space(text: str) -> AmbientSpace:
    kind, _, n = text.partition(":")
    try:
        n = int(n)
    except ValueError:
        raise UsageError(f"bad space {text!r}; use unilateral:D, bilateral:K or grid:N") from None
    makers = {"unilateral": AmbientSpace.unilateral, "bilateral": AmbientSpace.bilateral, "grid": AmbientSpace.grid}
    if kind not in makers:
        raise UsageError(f"unknown space kind {kind!r}")
    return makers[kind](n)


def _atom(space: AmbientSpace, atom: str) -> np.ndarray:
    if atom == "ones":
        return space.ones().coords
    if atom == "x" and space.kind.value == "GridL2":
        return space.grid_points().astype(complex)
    if atom.startswith("e:"):
        return space.e(int(atom[2:])).coords
    if atom.startswith("rand:"):
        rng = np.random.default_rng(int(atom[5:]))
        return rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    raise UsageError(f"unknown vector atom {atom!r}; use e:<i>, ones, x, rand:<seed>")


def parse_vector(space: AmbientSpace, text: str) -> CoeffVector:
    """``"e:1+0.5*e:3"`` style sums of atoms."""
    total = np.zeros(space.dim, dtype=complex)
    for term in text.replace(" ", "").split("+"):
        if not term:
            continue
        coef, star, atom = term.rpartition("*")
        c = complex(coef) if star else 1.0
        total = total + c * _atom(space, atom)
    return CoeffVector(space, total)


def parse_subspace(space: AmbientSpace, text: str) -> SubspaceBasis:
    """Semicolon-separated spanning vectors; ``0`` is {0} and ``H`` the whole space."""
    if text == "0":
        return SubspaceBasis.zero(space)
    if text == "H":
        return SubspaceBasis.full(space)
    return SubspaceBasis.span([parse_vector(space, t) for t in text.split(";") if t])


def parse_enclosure(text: str):
    kind, _, args = text.partition(":")
    try:
        vals = [float(a) for a in args.split(",") if a]
    except ValueError:
        raise UsageError(f"bad enclosure {text!r}") from None
    if kind == "interval" and len(vals) == 2:
        return kclass.Interval(*vals)
    if kind == "disk" and len(vals) == 3:
        return kclass.Disk(complex(vals[0], vals[1]), vals[2])
    if kind == "lid" and len(vals) == 1:
        return kclass.lid_enclosure(int(vals[0]))
    raise UsageError("enclosure must be interval:m,M or disk:re,im,r or lid:n")


def _emit(fmt: str, data: dict, rows=None, columns=None):
    if fmt == "json":
        sys.stdout.write(json.dumps(scenarios._clean(data), indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if rows is None:
        w.writerow(["key", "value"])
        for k in sorted(data):
            w.writerow([k, scenarios._fmt(data[k]) if not isinstance(data[k], (dict, list)) else json.dumps(scenarios._clean(data[k]))])
    else:
        w.writerow(columns)
        for r in rows:
            w.writerow([scenarios._fmt(v) for v in r])
    sys.stdout.write(buf.getvalue())


# ---------------------------------------------------------------------------
# commands


def cmd_scenario_list(a):
    items = scenarios.list_scenarios()
    if a.format == "json":
        _emit("json", {"scenarios": items})
    else:
        _emit("csv", {}, [(s["id"], s["expected_classification"], s["citation"]) for s in items], ["id", "expected", "citation"])
    return 0


def cmd_scenario_run(a):
    spec = scenarios.ScenarioSpec(a.id, parse_kv(a.param), a.seed)
    rep = scenarios.run_scenario(spec)
    sys.stdout.write(rep.to_json() if a.format == "json" else rep.to_csv())
    return 0 if rep.passed else 1


def cmd_suite_run(a):
    cfg = scenarios.load_config(a.config) if a.config else scenarios.DEFAULT_SUITE
    res = scenarios.run_suite(cfg, a.out, a.seed, a.jobs)
    if a.format == "json":
        _emit("json", {"runs": [{"scenario": s, "classification": c, "expected": e, "pass": p} for s, c, e, p in res.summary_rows()], "exit_code": res.exit_code})
    else:
        print(res.table())
    return res.exit_code


def cmd_krylov_diagnose(a):
    op = build_example_operator(a.op, parse_kv(a.param))
    sp = op.space
    g = parse_vector(sp, a.g)
    if a.f == "solve":
        M = unitary_matrix(op)
        fu = np.linalg.lstsq(M, sp.to_unitary(g.coords), rcond=None)[0]
        f = CoeffVector(sp, sp.from_unitary(fu))
    else:
        f = parse_vector(sp, a.f)
    rep = krylov.solvability_verdict(op, g, f, krylov.SolvabilityConfig(N_max=a.n_max))
    sys.stdout.write(rep.to_json() + "\n" if a.format == "json" else rep.to_csv())
    return 0


def cmd_gap_compute(a):
    sp = parse_space(a.space)
    U, V = parse_subspace(sp, a.U), parse_subspace(sp, a.V)
    data = {
        "delta_UV": gaps.delta(U, V),
        "delta_VU": gaps.delta(V, U),
        "delta_hat": gaps.gap_hat(U, V),
        "d_UV": gaps.d_metric(U, V),
        "d_VU": gaps.d_metric(V, U),
        "d_hat": gaps.dhat_metric(U, V),
        "principal_angles": list(gaps.principal_angles(U, V)),
    }
    _emit(a.format, data)
    return 0


def cmd_weakgap_compute(a):
    sp = parse_space(a.space)
    U, V = parse_subspace(sp, a.U), parse_subspace(sp, a.V)
    spec = WeakNormSpec.canonical(sp)
    cfg = weak.WeakGapConfig(seed=a.seed)
    fwd = weak.d_w(U, V, spec, cfg, a.strategy)
    bwd = weak.d_w(V, U, spec, cfg, a.strategy)
    data = {"d_w_UV": fwd.to_dict(), "d_w_VU": bwd.to_dict(), "dhat_w": max(fwd.value, bwd.value)}
    if a.brute_step:
        data["brute_force_UV"] = weak.brute_force_d_w(U, V, spec, a.brute_step)
    _emit(a.format, data)
    return 0


def cmd_kclass_check(a):
    op = build_example_operator(a.op, parse_kv(a.param))
    enc = parse_enclosure(a.enclosure)
    cert = kclass.check_kclass(op, enc, a.samples)
    data = cert.to_dict()
    if a.degree is not None and cert.verdict is kclass.CertVerdict.CERTIFIED and not isinstance(enc, kclass.Tube):
        poly = kclass.poly_inverse_approx(op, enc, a.degree, cert)
        data["poly"] = {"kind": poly.kind, "degree": poly.degree, "sup_bound": poly.sup_bound, "operator_bound": poly.operator_bound}
    _emit(a.format, data)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krylab", description="Krylov solvability laboratory")
    groups = p.add_subparsers(dest="group", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sc = groups.add_parser("scenario").add_subparsers(dest="action", required=True)
    s = sc.add_parser("list")
    fmt(s)
    s.set_defaults(fn=cmd_scenario_list)
    s = sc.add_parser("run")
    s.add_argument("--id", required=True)
    s.add_argument("--param", action="append", metavar="K=V")
    s.add_argument("--seed", type=int, default=0)
    fmt(s)
    s.set_defaults(fn=cmd_scenario_run)

    su = groups.add_parser("suite").add_subparsers(dest="action", required=True)
    s = su.add_parser("run")
    s.add_argument("--config", help="JSON config; the default suite when omitted")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int, default=1)
    fmt(s)
    s.set_defaults(fn=cmd_suite_run)

    kr = groups.add_parser("krylov").add_subparsers(dest="action", required=True)
    s = kr.add_parser("diagnose")
    s.add_argument("--op", required=True, help="registry operator id")
    s.add_argument("--param", action="append", metavar="K=V")
    s.add_argument("--g", required=True, help="datum, e.g. e:2 or ones")
    s.add_argument("--f", default="solve", help="solution vector or 'solve'")
    s.add_argument("--n-max", type=int, default=20)
    fmt(s)
    s.set_defaults(fn=cmd_krylov_diagnose)

    for name, fn in (("gap", cmd_gap_compute), ("weakgap", cmd_weakgap_compute)):
        g = groups.add_parser(name).add_subparsers(dest="action", required=True)
        s = g.add_parser("compute")
        s.add_argument("--space", required=True, help="unilateral:D, bilateral:K or grid:N")
        s.add_argument("--U", required=True, help="';'-separated spanning vectors, 0 or H")
        s.add_argument("--V", required=True)
        if name == "weakgap":
            s.add_argument("--strategy", choices=["auto", "grid", "heuristic"], default="auto")
            s.add_argument("--seed", type=int, default=0)
            s.add_argument("--brute-step", type=float, help="also run the brute-force oracle")
        fmt(s)
        s.set_defaults(fn=fn)

    kc = groups.add_parser("kclass").add_subparsers(dest="action", required=True)
    s = kc.add_parser("check")
    s.add_argument("--op", required=True)
    s.add_argument("--param", action="append", metavar="K=V")
    s.add_argument("--enclosure", required=True, help="interval:m,M | disk:re,im,r | lid:n")
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--degree", type=int)
    fmt(s)
    s.set_defaults(fn=cmd_kclass_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (KrylabError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"krylab: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
