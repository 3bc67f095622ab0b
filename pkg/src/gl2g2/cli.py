"""Command-line front end: classification runs, verification suites, and
catalog browsing, with machine-readable reports.

Exit codes for ``classify``: 0 on success (whatever the classification
outcome), 2 on input parse errors, 3 on an internal exact-vs-probabilistic
disagreement, 1 on any other engine error.  ``papercheck`` exits 0 when
every claim passes, 1 otherwise, 2 on usage errors.

JSON reports are byte-stable for a fixed seed and precision: keys are
sorted and no wall-clock data enters the document (timing goes to the
human-readable stream).  Every vanishing flag carries the canonical text
of its witness expression, or a SHA-256 hash when the text is long.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from . import extalg as E
from . import jetexpr as J
from . import odeclass as O
from . import suites as S

SCHEMA_VERSION = 1
WITNESS_TEXT_LIMIT = 2000

# published schema for the classification report (draft 2020-12)
_WITNESS_SCHEMA = {
    "type": "object",
    "properties": {
        "is_zero": {"type": "boolean"},
        "mode": {"type": "string"},
        "witness": {"type": "string"},
        "witness_sha256": {"type": "string"},
        "witness_length": {"type": "integer"},
    },
    "required": ["is_zero", "mode"],
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "engine_version": {"type": "string"},
        "seed": {"type": "integer"},
        "points": {"type": "integer"},
        "digits": {"type": "integer"},
        "ode": {
            "type": "object",
            "properties": {
                "name": {"type": "string"},
                "rhs": {"type": "string"},
                "order": {"const": 7},
            },
            "required": ["name", "rhs", "order"],
            "additionalProperties": False,
        },
        "wunschmann": {
            "type": "object",
            "properties": {("w%d" % i): _WITNESS_SCHEMA for i in range(1, 6)},
            "required": ["w1", "w2", "w3", "w4", "w5"],
            "additionalProperties": False,
        },
        "admits_gl2_structure": {"type": "boolean"},
        "fg": {
            "type": "object",
            "properties": {
                "applicable": {"type": "boolean"},
                "lambda": _WITNESS_SCHEMA,
                "tau2": _WITNESS_SCHEMA,
                "tau3": _WITNESS_SCHEMA,
                "dtheta_v7": _WITNESS_SCHEMA,
                "dtheta_v11": _WITNESS_SCHEMA,
                "dtheta_v3": {"enum": ["implied_zero", "unknown"]},
                "type_label": {
                    "type": "array",
                    "items": {"enum": ["W1", "W2", "W3", "W4"]},
                },
                "lee_form_closed": {"enum": [True, False, "unknown"]},
            },
            "required": ["applicable"],
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "engine_version", "seed", "points",
                 "digits", "ode", "wunschmann", "admits_gl2_structure", "fg"],
    "additionalProperties": False,
}

__all__ = ["main", "classification_to_dict", "SCHEMA_VERSION",
           "REPORT_SCHEMA"]


def _witness_dict(w):
    text = w.render()
    out = {"is_zero": w.is_zero, "mode": w.mode}
    if len(text) <= WITNESS_TEXT_LIMIT:
        out["witness"] = text
    else:
        out["witness_sha256"] = hashlib.sha256(text.encode()).hexdigest()
        out["witness_length"] = len(text)
    return out


def classification_to_dict(rep, seed, points, digits):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "engine_version": __version__,
        "seed": seed,
        "points": points,
        "digits": digits,
        "ode": {
            "name": rep.ode_name,
            "rhs": rep.rhs_text,
            "order": 7,
        },
        "wunschmann": {
            "w%d" % (i + 1): _witness_dict(w)
            for i, w in enumerate(rep.wunschmann.witnesses)
        },
        "admits_gl2_structure": rep.admits_structure,
        "fg": {"applicable": rep.fg_applicable},
    }
    if rep.fg is not None:
        fg = rep.fg
        doc["fg"].update({
            "lambda": _witness_dict(fg.lam),
            "tau2": _witness_dict(fg.tau2),
            "tau3": _witness_dict(fg.tau3),
            "dtheta_v7": _witness_dict(fg.dtheta_v7),
            "dtheta_v11": _witness_dict(fg.dtheta_v11),
            "dtheta_v3": fg.dtheta_v3,
            "type_label": list(fg.type_label),
            "lee_form_closed": fg.lee_form_closed
            if isinstance(fg.lee_form_closed, bool) else "unknown",
        })
    return doc


def _render_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _cmd_classify(args):
    if (args.ode is None) == (args.name is None):
        print("classify needs exactly one of --ode or --name",
              file=sys.stderr)
        return 2
    t0 = time.time()
    try:
        if args.name is not None:
            ode = O.catalog(args.name)
        else:
            ctx = J.jet_context(6)
            ode = O.OdeDefinition(7, ctx.parse(args.ode), "<cli>")
    except (J.ParseError, KeyError, ValueError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return 2
    try:
        rep = O.classify(ode, points=args.points, seed=args.seed)
    except J.InconsistencyError as exc:
        print("internal inconsistency: %s" % exc, file=sys.stderr)
        return 3
    except (J.JetError, ArithmeticError) as exc:
        print("engine error: %s" % exc, file=sys.stderr)
        return 1
    elapsed = time.time() - t0

    print("ode: %s" % (rep.ode_name or rep.rhs_text))
    for i, w in enumerate(rep.wunschmann.witnesses):
        print("  condition %d: %s  [%s]"
              % (i + 1, "vanishes" if w.is_zero else "NONZERO", w.mode))
    if rep.admits_structure:
        print("  admits the GL(2,R) structure")
        fg = rep.fg
        label = "+".join(fg.type_label) if fg.type_label else "torsion-free"
        print("  torsion type: %s" % label)
        print("  scalar part zero: %s | 14-part zero: %s | 27-part zero: %s"
              % (fg.lam.is_zero, fg.tau2.is_zero, fg.tau3.is_zero))
        print("  Lee form closed: %s (3-part of its derivative: %s)"
              % (fg.lee_form_closed, fg.dtheta_v3))
    else:
        print("  does NOT admit the GL(2,R) structure; torsion "
              "classification not applicable")
    print("  elapsed: %.2fs" % elapsed, file=sys.stderr)
    if args.json:
        doc = classification_to_dict(rep, args.seed, args.points, args.digits)
        with open(args.json, "w") as fh:
            fh.write(_render_json(doc))
        print("  report written to %s" % args.json, file=sys.stderr)
    return 0


def _cmd_papercheck(args):
    names = S.suite_names() if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in S.suite_names():
        print("unknown suite %r; available: %s, all"
              % (args.suite, ", ".join(S.suite_names())), file=sys.stderr)
        return 2
    if args.threads > 1 and len(names) > 1:
        # independent suites may run in parallel; report assembly stays
        # serialized in the suite order
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_run_suite_job,
                                    [(n, args.seed) for n in names]))
    else:
        results = [S.run_suite(n, seed=args.seed) for n in names]
    all_ok = True
    for name, result in zip(names, results):
        for claim in result.claims:
            print("%s  %s :: %s -- %s"
                  % ("PASS" if claim.passed else "FAIL", name, claim.name,
                     claim.measured))
        print("suite %s: %s (%.1fs)" % (name, result.summary(),
                                        result.elapsed))
        all_ok = all_ok and result.passed
    return 0 if all_ok else 1


def _run_suite_job(task):
    name, seed = task
    return S.run_suite(name, seed=seed)


_ODE_NOTES = {
    "trivial": "vanishing right-hand side; flat model",
    "cusp": "two-cusp sextic family",
    "submax": "submaximal symmetry; closed Lee form",
    "example2": "bidegree-(1,3) rational curves",
    "example4": "log-curve family; fractional-power right-hand side",
}

_COFRAME_NOTES = {
    "flat": "coordinate differentials",
    "cusp": "two-cusp sextic moduli coframe with conformal factor",
    "example2": "bidegree-(1,3) moduli coframe, affine gauge",
    "example4_k3": "log-curve coframe at k=3",
}


def _cmd_catalog(args):
    print("ODEs:")
    for name in O.catalog_names():
        print("  %-12s %s" % (name, _ODE_NOTES.get(name, "")))
    print("coframes:")
    for name in E.coframe_names():
        print("  %-12s %s" % (name, _COFRAME_NOTES.get(name, "")))
    print("curve families:")
    print("  %-12s %s" % ("cuspidal_sextic",
                          "(y+Q(x))^2 + P(x)^3 = 0, rational, genus 0"))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gl2g2",
        description="Classify 7th-order ODEs carrying GL(2,R) structures "
                    "and verify the geometry of the induced split-G2 "
                    "conformal structure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="run the vanishing conditions and "
                                        "the torsion-type classifier")
    p.add_argument("--ode", help="right-hand side expression in "
                                 "x, y, y1..y6 (aliases p..u)")
    p.add_argument("--name", help="catalog ODE name")
    p.add_argument("--json", help="write the machine-readable report here")
    p.add_argument("--digits", type=int, default=50)
    p.add_argument("--points", type=int, default=64,
                   help="sample count for probabilistic zero tests")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("papercheck", help="run the named verification "
                                          "suites")
    p.add_argument("--suite", default="all",
                   help="suite name or 'all' (%s)" % ", ".join(S.suite_names()))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--digits", type=int, default=50)
    p.add_argument("--threads", type=int, default=1,
                   help="run independent suites in parallel worker "
                        "processes")
    p.set_defaults(func=_cmd_papercheck)

    p = sub.add_parser("catalog", help="list the named ODEs, coframes and "
                                       "curve families")
    p.add_argument("--list", action="store_true", default=True)
    p.set_defaults(func=_cmd_catalog)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
