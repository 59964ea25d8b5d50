"""Configuration-driven experiment runner.

Exit codes: 0 success, 2 invariant/assertion violation, 3 budget
exhaustion.  Certified columns are exact rationals rendered as "p/q"; a
parallel _float column is emitted for plotting convenience.  CSV bodies are
deterministic for a fixed seed; metadata lives on '#'-prefixed header
lines.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import hhg as hhg_mod
from .brooks import (
    brooks as make_brooks,
    defect_sample,
    homogenize,
    random_word_pairs,
)
from .extension import (
    CentralExtension,
    ExtensionElement,
    NormalisationFailure,
    CocycleIdentityFailure,
    ext_mult,
    ext_power,
    floor_linear_cocycle,
    heisenberg_cocycle,
    peripheral_analysis,
    q_alpha,
    validate_cocycle,
    zero_cocycle,
)
from .groups import BudgetExceeded, ParseError, parse_group
from .metric import (
    MetricError,
    as_fraction,
    format_fraction,
    space_from_csv,
    space_from_json,
)
from .pipeline import build_pipeline_quasiline, run_pipeline
from .quasiline import distance_bounds, tau_quasiline_bracket
from .tightspan import IterationBudgetExceeded, barycentre
from .translation import (
    LipschitzCertificate,
    abelianization_certificate,
    coordinate_sum_certificate,
    distortion_profile,
    tau_lower_certified,
    tau_upper,
    uncertified_lower,
)


class ConfigParse(ValueError):
    pass


def _load_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParse(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _emit(args, name: str, text: str) -> None:
    if args.out_dir:
        path = Path(args.out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _csv(headers: list[str], columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for h in headers:
        buf.write(f"# {h}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(str(x) for x in row) + "\n")
    return buf.getvalue()


def _parse_cocycle(spec: str):
    if spec.startswith("zero:"):
        return zero_cocycle(parse_group(spec.split(":", 1)[1]))
    if spec == "heisenberg":
        return heisenberg_cocycle()
    if spec.startswith("floor:"):
        return floor_linear_cocycle(as_fraction(spec.split(":", 1)[1]))
    raise ConfigParse(f"unknown cocycle spec {spec!r} (use zero:<group>, heisenberg, floor:<p/q>)")


def cmd_tightspan(args) -> None:
    text = Path(args.metric).read_text()
    space = space_from_json(text) if args.metric.endswith(".json") else space_from_csv(text)
    indices = [int(x) for x in args.indices.split(",") if x.strip() != ""]
    point = barycentre(indices, space, as_fraction(args.eta))
    _emit(
        args,
        "tightspan.json",
        json.dumps(
            {
                "labels": list(space.labels),
                "indices": indices,
                "barycentre": [format_fraction(v) for v in point.values],
                "certificate": format_fraction(point.certificate),
                "iterations": point.iterations,
            },
            indent=2,
        ),
    )


def cmd_tau(args) -> None:
    oracle = parse_group(args.group)
    g = oracle.parse(args.element)
    profile = distortion_profile(oracle, g, args.N, budget=args.budget)
    uppers = []
    best = None
    for n, d in profile:
        cur = Fraction(d, n)
        best = cur if best is None or cur < best else best
        uppers.append(best)
    cert = None
    if args.certify == "abelianization":
        cert = abelianization_certificate(oracle)
    elif args.certify == "coordinate-sum":
        cert = coordinate_sum_certificate()
    elif args.certify:
        raise ConfigParse(f"unknown certificate {args.certify!r}")
    if cert is not None:
        cert.validate(oracle, min(args.N, 6), budget=args.budget)
        lower = tau_lower_certified(g, cert)
        lower_col = [format_fraction(lower)] * len(profile)
        lower_name = "lower_certified"
    else:
        lower_col = [format_fraction(v) for _, v in uncertified_lower(profile, profile[0][1])]
        lower_name = "lower_uncertified"
    rows = [
        [n, d, format_fraction(u), float(u), low]
        for (n, d), u, low in zip(profile, uppers, lower_col)
    ]
    headers = [
        f"tau profile group={args.group} element={args.element} N={args.N} seed={args.seed}",
        f"final upper={format_fraction(uppers[-1])}",
    ]
    _emit(args, "tau.csv", _csv(headers, ["n", "distance", "upper", "upper_float", lower_name], rows))
    if args.barycentric:
        from .translation import barycentric_displacement

        res = barycentric_displacement(oracle, g, args.barycentric)
        _emit(
            args,
            "tau_barycentric.json",
            json.dumps(
                {
                    "n": res.n,
                    "displacement": format_fraction(res.displacement),
                    "bound": format_fraction(res.bound),
                    "scope": res.scope_note,
                },
                indent=2,
            ),
        )


def cmd_brooks(args) -> None:
    free = parse_group(f"free:{args.rank}")
    w = free.parse(args.pattern)
    q = make_brooks(w)
    out: dict = {"pattern": str(w), "defect_bound": format_fraction(q.defect_bound)}
    if args.word is not None:
        x = free.parse(args.word)
        out["word"] = str(x)
        out["value"] = format_fraction(q.evaluate(x))
    if args.sample:
        count, max_len = (int(x) for x in args.sample.split(":"))
        pairs = random_word_pairs(args.rank, count, max_len, args.seed)
        out["defect_sample"] = format_fraction(defect_sample(q, pairs, free))
        out["sample"] = {"count": count, "max_len": max_len, "seed": args.seed}
    if args.homogenize:
        gtext, n = args.homogenize.rsplit(":", 1)
        hv = homogenize(q, free, free.parse(gtext), int(n))
        out["interval"] = {
            "center": format_fraction(hv.center),
            "radius": format_fraction(hv.radius),
            "n_used": hv.n_used,
        }
    _emit(args, "brooks.json", json.dumps(out, indent=2))


def cmd_extension(args) -> None:
    cocycle = _parse_cocycle(args.cocycle)
    ext = CentralExtension(cocycle)
    out: dict = {"cocycle": cocycle.name, "base": cocycle.base.name}
    if args.op == "validate":
        out["report"] = validate_cocycle(cocycle, count=args.count, seed=args.seed)
    elif args.op == "mult":
        e1 = ExtensionElement(ext, ext.parse(args.left))
        e2 = ExtensionElement(ext, ext.parse(args.right))
        out["result"] = ext.format(ext_mult(e1, e2).raw)
    elif args.op == "power":
        e = ExtensionElement(ext, ext.parse(args.left))
        out["result"] = ext.format(ext_power(e, args.n).raw)
    elif args.op == "q_alpha":
        e = ext.parse(args.left)
        out["q_alpha"] = q_alpha(e)
    elif args.op == "peripheral":
        g = cocycle.base.parse(args.left)
        pa = peripheral_analysis(ext, g, args.search_bound, as_fraction(args.tol))
        out["peripheral"] = {
            "mode": pa.mode,
            "kappa": pa.kappa,
            "theta": pa.theta,
            "gbar": None if pa.gbar is None else ext.format(pa.gbar),
            "detail": pa.detail,
        }
    else:
        raise ConfigParse(f"unknown extension op {args.op!r}")
    _emit(args, "extension.json", json.dumps(out, indent=2))


def cmd_quasiline(args) -> None:
    eps = as_fraction(args.eps)
    C = as_fraction(args.C)
    ext, _, cfg = build_pipeline_quasiline(eps, C)
    g = ext.parse(args.element)
    rows = []
    gn = ext.identity
    for n in range(1, args.N + 1):
        gn = ext.multiply(gn, g)
        db = distance_bounds(cfg, gn)
        rows.append([n, db.lower, "" if db.upper is None else db.upper])
    bracket = tau_quasiline_bracket(cfg, g, args.N)
    headers = [
        f"quasiline eps={args.eps} C={args.C} element={args.element} N={args.N} seed={args.seed}",
        f"tau bracket [{format_fraction(bracket.lower)}, "
        f"{'' if bracket.upper is None else format_fraction(bracket.upper)}]",
    ]
    _emit(args, "quasiline.csv", _csv(headers, ["n", "lower", "upper"], rows))


def cmd_hhg(args) -> None:
    if args.structure:
        s = hhg_mod.load_structure(json.loads(Path(args.structure).read_text()))
    elif args.delta is not None:
        s = hhg_mod.make_z2_delta_epsilon(as_fraction(args.delta), as_fraction(args.epsilon))
    else:
        s = hhg_mod.make_z2_epsilon(as_fraction(args.epsilon))
    if args.action == "validate":
        report = hhg_mod.validate_structure(s, seed=args.seed)
        _emit(args, "hhg_validate.json", json.dumps({"ok": True, "report": report}, indent=2))
    elif args.action == "scan":
        report = hhg_mod.df_ratio_scan(s, args.radius, as_fraction(args.D), budget=args.budget)
        _emit(
            args,
            "hhg_scan.json",
            json.dumps(
                {
                    "ratio_constant": format_fraction(report.ratio_constant),
                    "ratio_constant_float": float(report.ratio_constant),
                    "affine_constant": format_fraction(report.affine_constant),
                    "radius": report.radius,
                    "D": format_fraction(report.D),
                    "elements": report.elements_scanned,
                },
                indent=2,
            ),
        )
    elif args.action == "tau":
        g = s.group.parse(args.element)
        brackets = hhg_mod.tau_per_domain(s, g, args.N)
        _emit(
            args,
            "hhg_tau.json",
            json.dumps(
                {
                    u: {
                        "lower": format_fraction(b.lower),
                        "upper": None if b.upper is None else format_fraction(b.upper),
                    }
                    for u, b in sorted(brackets.items())
                },
                indent=2,
            ),
        )
    elif args.action == "probe":
        witnesses = hhg_mod.discreteness_probe(
            s,
            as_fraction(args.tau0),
            box_radius=args.radius,
            cf_bound=args.cf_bound,
            n_max=args.N,
        )
        rows = [
            [
                s.group.format(w.g),
                w.power_used,
                w.domain,
                format_fraction(w.bracket.lower),
                format_fraction(w.bracket.upper),
            ]
            for w in witnesses
        ]
        headers = [f"probe tau0={args.tau0} radius={args.radius} cf_bound={args.cf_bound} seed={args.seed}"]
        _emit(args, "hhg_probe.csv", _csv(headers, ["element", "power", "domain", "tau_lower", "tau_upper"], rows))
    else:
        raise ConfigParse(f"unknown hhg action {args.action!r}")


def cmd_pipeline(args) -> None:
    report = run_pipeline(
        eps=as_fraction(args.eps),
        C=as_fraction(args.C),
        tau0=as_fraction(args.tau0),
        n_max=args.N,
        cf_bound=args.cf_bound,
        box_radius=args.radius,
        seed=args.seed,
    )
    _emit(args, "pipeline.json", json.dumps(report, indent=2))


GLOBAL_DEFAULTS = {"config": None, "seed": 0, "budget": 5 * 10**6, "out_dir": None}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value file merged in as flag defaults")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="BFS element budget")
    common.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS)

    # the global flags are accepted both before and after the subcommand;
    # SUPPRESS defaults keep the subparser from clobbering values parsed by
    # the main parser (the parent actions are shared objects)
    parser = argparse.ArgumentParser(prog="translen", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tightspan", parents=[common], help="barycentre of a tuple in a finite metric space")
    p.add_argument("--metric", required=True, help="CSV or JSON distance matrix")
    p.add_argument("--indices", required=True, help="comma-separated point indices")
    p.add_argument("--eta", default="1/1000000000")
    p.set_defaults(func=cmd_tightspan)

    p = sub.add_parser("tau", parents=[common], help="distortion profile and translation-length bounds")
    p.add_argument("--group", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--N", type=int, default=32)
    p.add_argument("--profile", action="store_true")
    p.add_argument("--barycentric", type=int, default=0, metavar="N")
    p.add_argument("--certify", default=None)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("brooks", parents=[common], help="counting quasimorphisms on free groups")
    p.add_argument("--pattern", required=True)
    p.add_argument("--word", default=None)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--sample", default=None, metavar="COUNT:MAXLEN")
    p.add_argument("--homogenize", default=None, metavar="WORD:N")
    p.set_defaults(func=cmd_brooks)

    p = sub.add_parser("extension", parents=[common], help="central-extension arithmetic")
    p.add_argument("--cocycle", required=True)
    p.add_argument("--op", required=True, choices=["validate", "mult", "power", "q_alpha", "peripheral"])
    p.add_argument("--left", default=None)
    p.add_argument("--right", default=None)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--count", type=int, default=10**4)
    p.add_argument("--search-bound", type=int, default=100)
    p.add_argument("--tol", default="1/1000")
    p.set_defaults(func=cmd_extension)

    p = sub.add_parser("quasiline", parents=[common], help="certified quasiline distance and tau brackets")
    p.add_argument("--eps", required=True)
    p.add_argument("--C", default="1")
    p.add_argument("--element", required=True)
    p.add_argument("--N", type=int, default=64)
    p.set_defaults(func=cmd_quasiline)

    p = sub.add_parser("hhg", parents=[common], help="toy hierarchical structures")
    p.add_argument("action", choices=["validate", "scan", "tau", "probe"])
    p.add_argument("--epsilon", default="2/5")
    p.add_argument("--delta", default=None)
    p.add_argument("--structure", default=None, help="structure JSON file")
    p.add_argument("--radius", type=int, default=64)
    p.add_argument("--D", default="1/2")
    p.add_argument("--element", default="a^1")
    p.add_argument("--N", type=int, default=64)
    p.add_argument("--tau0", default="1/100")
    p.add_argument("--cf-bound", type=int, default=2000)
    p.set_defaults(func=cmd_hhg)

    p = sub.add_parser("pipeline", parents=[common], help="cocycle -> r_hat -> quasiline -> structure -> probe")
    p.add_argument("--eps", required=True)
    p.add_argument("--C", default="1")
    p.add_argument("--tau0", default="1/100")
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--cf-bound", type=int, default=2000)
    p.add_argument("--radius", type=int, default=0)
    p.set_defaults(func=cmd_pipeline)

    return parser


def _merge_config(parser: argparse.ArgumentParser, args) -> None:
    """Apply key=value config entries to flags still at their defaults,
    resolving against the chosen subcommand only."""
    actions = {}
    defaults = dict(GLOBAL_DEFAULTS)
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            chosen = a.choices[args.command]
            for sub_a in chosen._actions:
                actions[sub_a.dest] = sub_a
                if sub_a.default is not argparse.SUPPRESS:
                    defaults[sub_a.dest] = sub_a.default
        else:
            actions[a.dest] = a
    for key, value in _load_config(args.config).items():
        dest = key.replace("-", "_")
        if dest not in actions:
            raise ConfigParse(f"unknown config key {key!r}")
        action = actions[dest]
        if getattr(args, dest, None) == defaults.get(dest):
            setattr(args, dest, action.type(value) if action.type else value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        if args.config:
            _merge_config(parser, args)
        args.func(args)
    except (BudgetExceeded, IterationBudgetExceeded) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (
        AssertionError,
        MetricError,
        NormalisationFailure,
        CocycleIdentityFailure,
        hhg_mod.StructureViolation,
    ) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 2
    except (ConfigParse, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
