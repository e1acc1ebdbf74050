"""Command-line front end: ``gaudin-opers <command> problem.json``.

Problem documents are JSON objects::

    {"cartan": "A1" | [[2, -1], ...],
     "sites": [{"z": [re, im], "coweight": [1]}, ...],
     "colors": [1, ...],
     "roots": [[re, im], ...],            # verify / miura / reproduce / gaudin-check
     "starts": [[[re, im], ...], ...],    # optional explicit Newton starts
     "seed_roots": [[[re, im], ...], ...] # population: roots per color
     "direction": 1, "c": [re, im],       # reproduce
     "c_samples": [[re, im], ...],        # population
     "options": {"tol": ..., "coll_tol": ..., "starts": ..., "seed": ...,
                 "depth": ..., "cap": ...}}

A solutions document written by ``solve`` is accepted wherever a problem is,
with its solutions used as starts (or roots).  Exit status is 0 whenever the
computation ran, 2 for bad input and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys

import numpy as np

from .bethe import (BetheProblem, _numerical_rank, classify_cell, jacobian,
                    multi_start_solve, residual, residue_at_infinity)
from .errors import DimensionCapError, GaudinOpersError, ValidationError
from .gaudin import (bethe_vector, bethe_weight_drop, casimir_scalar, eigencheck,
                     eigenvalue_vs_oper, gaudin_hamiltonian, weight_basis)
from .miura import connection_from_solution, miura_scalar_oper, regularity_report
from .ratfun import poly_from_roots
from .repro import (DEFAULT_C_SAMPLES, PolyTuple, explore_population, reproduce,
                    tuple_from_solution)
from .rootdata import load_cartan

SCHEMA = "gaudin-opers/1"
logger = logging.getLogger("gaudin_opers.cli")

DEFAULTS = {
    "tol": 1e-9,        # Laurent tails, reproduction residues, eigen residual verdicts
    "coll_tol": None,   # None: 1e-6 times the site diameter
    "starts": 64,
    "seed": 0,
    "depth": 1,
    "cap": 200,         # weight-space dimension (gaudin-check) / node count (population)
}

_TOP_FIELDS = {"schema", "kind", "cartan", "sites", "colors", "roots", "starts", "seed_roots",
               "direction", "c", "c_samples", "options", "problem", "solutions",
               "starts_tried", "start_failures"}
_SITE_FIELDS = {"z", "coweight"}
_OPTION_FIELDS = set(DEFAULTS)


class InputError(GaudinOpersError):
    pass


# -- parsing ---------------------------------------------------------------------------

def _line_of(text, name):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(name), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text, name):
    line = _line_of(text, name)
    return f" (line {line})" if line else ""


def _check_fields(obj, allowed, context, text):
    if not isinstance(obj, dict):
        raise InputError(f"{context} must be a JSON object")
    for key in obj:
        if key not in allowed:
            raise InputError(f"unknown field '{key}' in {context}{_where(text, key)}")


def _complex(v, field, text=None):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise InputError(f"field '{field}' expects a number or [re, im] pair, got {v!r}{_where(text, field)}")


def _complex_list(v, field, text=None):
    if not isinstance(v, list):
        raise InputError(f"field '{field}' must be a list{_where(text, field)}")
    return np.array([_complex(x, field, text) for x in v], dtype=complex)


def cx(z):
    z = complex(z)
    return [z.real, z.imag]


def parse_document(text):
    """Parse a problem or solutions document into a dict of ready objects."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _check_fields(doc, _TOP_FIELDS, "document", text)
    if "schema" in doc and doc["schema"] != SCHEMA:
        raise InputError(f"unsupported schema {doc['schema']!r}; expected {SCHEMA!r}{_where(text, 'schema')}")
    if doc.get("kind") == "solutions" or "solutions" in doc:
        return _parse_solutions_doc(doc, text)
    out = {"problem": _parse_problem(doc, text)}
    opts = doc.get("options", {})
    _check_fields(opts, _OPTION_FIELDS, "options", text)
    out["options"] = opts
    if "roots" in doc:
        out["roots"] = _complex_list(doc["roots"], "roots", text)
    if "starts" in doc:
        out["starts"] = [_complex_list(s, "starts", text) for s in doc["starts"]]
    if "seed_roots" in doc:
        out["seed_roots"] = [_complex_list(s, "seed_roots", text) for s in doc["seed_roots"]]
    if "direction" in doc:
        if not isinstance(doc["direction"], int):
            raise InputError(f"field 'direction' must be an integer{_where(text, 'direction')}")
        out["direction"] = doc["direction"]
    if "c" in doc:
        out["c"] = _complex(doc["c"], "c", text)
    if "c_samples" in doc:
        out["c_samples"] = list(_complex_list(doc["c_samples"], "c_samples", text))
    return out


def _parse_problem(doc, text):
    for req in ("cartan", "sites"):
        if req not in doc:
            raise InputError(f"missing required field '{req}'")
    try:
        cartan = load_cartan(doc["cartan"])
    except (ValidationError, TypeError, ValueError) as exc:
        raise InputError(f"field 'cartan'{_where(text, 'cartan')}: {exc}") from exc
    sites = []
    if not isinstance(doc["sites"], list):
        raise InputError(f"field 'sites' must be a list{_where(text, 'sites')}")
    for k, site in enumerate(doc["sites"]):
        _check_fields(site, _SITE_FIELDS, f"sites[{k}]", text)
        if "z" not in site or "coweight" not in site:
            raise InputError(f"sites[{k}] needs 'z' and 'coweight'{_where(text, 'sites')}")
        sites.append((_complex(site["z"], "z", text), site["coweight"]))
    colors = doc.get("colors", [])
    if not isinstance(colors, list) or not all(isinstance(c, int) for c in colors):
        raise InputError(f"field 'colors' must be a list of integers{_where(text, 'colors')}")
    try:
        return BetheProblem(cartan, tuple(sites), tuple(colors))
    except (ValidationError, TypeError, ValueError) as exc:
        raise InputError(f"invalid problem: {exc}") from exc


def _parse_solutions_doc(doc, text):
    if "problem" not in doc:
        raise InputError("solutions document lacks 'problem'")
    inner = dict(doc["problem"])
    out = {"problem": _parse_problem(inner, text), "options": doc.get("options", {})}
    _check_fields(out["options"], _OPTION_FIELDS, "options", text)
    starts = []
    for k, sol in enumerate(doc.get("solutions", [])):
        if not isinstance(sol, dict) or "roots" not in sol:
            raise InputError(f"solutions[{k}] lacks 'roots'")
        starts.append(_complex_list(sol["roots"], "roots", text))
    out["starts"] = starts
    if len(starts) == 1:
        out["roots"] = starts[0]
    return out


def problem_to_json(problem):
    return {
        "cartan": problem.cartan.entries.tolist(),
        "sites": [{"z": cx(z), "coweight": lam.tolist()} for z, lam in problem.sites],
        "colors": list(problem.colors),
    }


# -- shared pieces ----------------------------------------------------------------------

def _label(problem, mu):
    try:
        lam, word = classify_cell(problem, mu=mu)
        return {"lam_inf": lam.tolist(), "word": list(word)}
    except GaudinOpersError as exc:
        return {"error": str(exc)}


def _regularity(problem, roots, tol):
    try:
        oper = miura_scalar_oper(connection_from_solution(problem, roots))
    except ValidationError as exc:
        return {"unsupported": str(exc)}
    reports = regularity_report(oper, roots, tol=tol) if len(roots) else []
    return {
        "type": oper.type_tag,
        "points": [{"point": cx(r.point), "erased": r.erased, "max_tail": r.max_tail,
                    "tails": [{str(k): cx(v) for k, v in sorted(t.items())} for t in r.tails]}
                   for r in reports],
    }


def _solution_json(problem, roots, res, rank, tol):
    mu = residue_at_infinity(problem)
    return {
        "roots": [cx(w) for w in roots],
        "residual": res,
        "jacobian_rank": rank,
        "mu_inf": mu.tolist(),
        "label": _label(problem, mu),
        "regularity": _regularity(problem, roots, tol),
    }


def _opt(args, doc, name):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return doc.get("options", {}).get(name, DEFAULTS[name])


# -- commands -----------------------------------------------------------------------------

def run_solve(doc, args):
    problem = doc["problem"]
    tol = _opt(args, doc, "tol")
    coll = _opt(args, doc, "coll_tol")
    explicit = doc.get("starts", [])
    n_random = 0 if explicit and getattr(args, "starts", None) is None else _opt(args, doc, "starts")
    failures = []
    sols = multi_start_solve(problem, num_starts=n_random, seed=_opt(args, doc, "seed"),
                             starts=explicit, coll_tol=coll, failures=failures)
    reasons = {}
    for _, msg in failures:
        kind = msg.split(":")[0]
        reasons[kind] = reasons.get(kind, 0) + 1
    return {
        "schema": SCHEMA, "kind": "solutions", "problem": problem_to_json(problem),
        "starts_tried": len(explicit) + n_random, "start_failures": reasons,
        "solutions": [_solution_json(problem, s.roots, s.residual, s.jacobian_rank, tol) for s in sols],
    }


def _need_roots(doc):
    problem = doc["problem"]
    roots = doc.get("roots")
    if roots is None:
        if problem.m:
            raise InputError("this command needs 'roots'")
        roots = np.zeros(0, complex)
    if len(roots) != problem.m:
        raise InputError(f"'roots' has {len(roots)} entries, 'colors' has {problem.m}")
    return roots


def run_verify(doc, args):
    problem = doc["problem"]
    roots = _need_roots(doc)
    coll = _opt(args, doc, "coll_tol")
    res = float(np.abs(residual(problem, roots, coll_tol=coll)).max(initial=0.0))
    rank = _numerical_rank(jacobian(problem, roots, coll_tol=coll)) if problem.m else 0
    out = _solution_json(problem, roots, res, rank, _opt(args, doc, "tol"))
    return {"schema": SCHEMA, "kind": "verification", "problem": problem_to_json(problem), **out}


def run_miura(doc, args):
    problem = doc["problem"]
    roots = _need_roots(doc)
    conn = connection_from_solution(problem, roots)
    oper = miura_scalar_oper(conn)
    tol = _opt(args, doc, "tol")
    poles = [complex(p) for p in conn.poles]
    reports = regularity_report(oper, poles, tol=tol)
    return {
        "schema": SCHEMA, "kind": "miura", "problem": problem_to_json(problem),
        "type": oper.type_tag, "order": oper.order,
        "poles": [{"point": cx(r.point), "is_root": i >= len(problem.sites), "erased": r.erased,
                   "tails": [{str(k): cx(v) for k, v in sorted(t.items())} for t in r.tails]}
                  for i, r in enumerate(reports)],
    }


def run_reproduce(doc, args):
    problem = doc["problem"]
    roots = _need_roots(doc)
    if "direction" not in doc:
        raise InputError("reproduce needs 'direction'")
    c = doc.get("c", 0j)
    tup = tuple_from_solution(problem, roots)
    new = reproduce(problem, tup, doc["direction"], c, tol=_opt(args, doc, "tol"))
    p2, r2 = new.as_solution()
    res = float(np.abs(residual(p2, r2)).max(initial=0.0)) if not new.is_degenerate() else None
    mu = new.mu_inf()
    return {
        "schema": SCHEMA, "kind": "reproduction", "problem": problem_to_json(problem),
        "direction": doc["direction"], "c": cx(c),
        "degrees": list(new.degrees), "colors": list(p2.colors),
        "roots": [cx(r) for r in r2], "residual": res, "degenerate": new.is_degenerate(),
        "mu_inf": mu.tolist(), "label": _label(problem, mu),
    }


def run_population(doc, args):
    problem = doc["problem"]
    if "seed_roots" in doc:
        seeds = doc["seed_roots"]
        if len(seeds) != problem.rank:
            raise InputError(f"'seed_roots' needs {problem.rank} lists (one per color)")
        polys = tuple(poly_from_roots(list(s)) for s in seeds)
        rdata = tuple([(complex(r), 1) for r in s] for s in seeds)
        base = problem.with_colors(())
        seed = PolyTuple(base, polys, rdata)
    elif "roots" in doc:
        seed = tuple_from_solution(problem, _need_roots(doc))
    else:
        seed = tuple_from_solution(problem.with_colors(()), np.zeros(0))
    samples = doc.get("c_samples", DEFAULT_C_SAMPLES)
    pop = explore_population(problem.with_colors(()), seed, _opt(args, doc, "depth"), c_samples=samples,
                             tol=_opt(args, doc, "tol"), coll_tol=_opt(args, doc, "coll_tol"),
                             max_nodes=_opt(args, doc, "cap"))
    classes = {}
    for k, node in enumerate(pop.nodes):
        classes.setdefault(node.tuple.degrees, []).append(k)
    order = sorted(classes)
    cls_of = {k: order.index(node.tuple.degrees) for k, node in enumerate(pop.nodes)}
    nodes = []
    for deg in order:
        members = [pop.nodes[k] for k in classes[deg]]
        rep = next((m for m in members if not m.degenerate), members[0])
        _, reps = rep.tuple.as_solution()
        nodes.append({
            "degrees": list(deg), "mu_inf": rep.mu_inf.tolist(),
            "lam_inf": None if rep.lam_inf is None else rep.lam_inf.tolist(),
            "word": None if rep.word is None else list(rep.word),
            "representative_roots": [cx(r) for r in reps],
            "members": len(members), "degenerate_members": sum(m.degenerate for m in members),
        })
    edges = {}
    for e in pop.edges:
        key = (cls_of[e.source], cls_of[e.target], e.direction)
        if key[0] == key[1]:
            continue
        edges.setdefault(key, [])
        if all(abs(e.c - c) > 0 for c in edges[key]):
            edges[key].append(e.c)
    return {
        "schema": SCHEMA, "kind": "population", "problem": problem_to_json(problem),
        "nodes": nodes,
        "edges": [{"source": s, "target": t, "direction": d, "c": [cx(c) for c in cs]}
                  for (s, t, d), cs in sorted(edges.items())],
        "tuples": len(pop.nodes),
        "skipped": [{"node": cls_of[k], "direction": i, "reason": r} for k, i, r in pop.skipped],
    }


def run_gaudin_check(doc, args):
    problem = doc["problem"]
    n = problem.rank + 1
    if problem.cartan.kind not in (f"A{n - 1}",) or n not in (2, 3):
        raise InputError("gaudin-check supports sl_2 and sl_3 (Cartan types A1, A2)")
    if "roots" in doc:
        candidates = [doc["roots"]]
    else:
        candidates = [s.roots for s in multi_start_solve(problem, num_starts=_opt(args, doc, "starts"),
                                                         seed=_opt(args, doc, "seed"))]
    lams = [lam.tolist() for _, lam in problem.sites]
    beta = bethe_weight_drop(n, problem.colors)
    space = weight_basis(n, lams, beta)
    cap = _opt(args, doc, "cap")
    if space.dim > cap:
        raise DimensionCapError(f"weight space dimension {space.dim} exceeds cap {cap}")
    hams = [gaudin_hamiltonian(n, lams, problem.z, i, space) for i in range(len(problem.sites))]
    deltas = [casimir_scalar(n, lam) for lam in lams]
    reports = []
    for roots in candidates:
        roots = np.asarray(roots, complex)
        vec = bethe_vector(n, lams, problem.z, problem.colors, roots)
        entry = {"roots": [cx(r) for r in roots],
                 "bae_residual": float(np.abs(residual(problem, roots)).max(initial=0.0))}
        if not vec:
            entry["bethe_vector"] = "zero"
            reports.append(entry)
            continue
        thetas, resids = [], []
        for H in hams:
            th, r = eigencheck(H, vec)
            thetas.append(th)
            resids.append(r)
        match = eigenvalue_vs_oper(problem, roots, thetas, deltas)
        entry.update({
            "eigenvalues": [cx(t) for t in thetas], "eigen_residuals": resids,
            "casimirs": deltas, "kappa": match["kappa"],
            "oper_match_max_deviation": match["max_deviation"],
        })
        reports.append(entry)
    return {"schema": SCHEMA, "kind": "gaudin-check", "problem": problem_to_json(problem),
            "weight_space_dim": space.dim, "reports": reports}


COMMANDS = {
    "solve": run_solve, "verify": run_verify, "miura": run_miura, "reproduce": run_reproduce,
    "population": run_population, "gaudin-check": run_gaudin_check,
}


# -- output ------------------------------------------------------------------------------

def to_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf)
    kind = result.get("kind")
    if kind == "solutions":
        w.writerow(["solution", "root", "color", "re", "im", "residual"])
        colors = result["problem"]["colors"]
        for s, sol in enumerate(result["solutions"]):
            for j, (re_, im_) in enumerate(sol["roots"]):
                w.writerow([s, j, colors[j], re_, im_, sol["residual"]])
    elif kind in ("miura", "verification"):
        w.writerow(["point_re", "point_im", "coefficient", "order", "re", "im"])
        pts = result["poles"] if kind == "miura" else result["regularity"].get("points", [])
        for p in pts:
            for k, tail in enumerate(p["tails"], start=1):
                for order, (re_, im_) in tail.items():
                    w.writerow([p["point"][0], p["point"][1], k, order, re_, im_])
    elif kind == "population":
        w.writerow(["node", "degrees", "lam_inf", "word", "members"])
        for k, node in enumerate(result["nodes"]):
            w.writerow([k, " ".join(map(str, node["degrees"])), " ".join(map(str, node["lam_inf"] or [])),
                        " ".join(map(str, node["word"] or [])), node["members"]])
    elif kind == "gaudin-check":
        w.writerow(["report", "site", "eigen_re", "eigen_im", "residual", "oper_match"])
        for r, rep in enumerate(result["reports"]):
            for i, (th, res) in enumerate(zip(rep.get("eigenvalues", []), rep.get("eigen_residuals", []))):
                w.writerow([r, i, th[0], th[1], res, rep["oper_match_max_deviation"]])
    elif kind == "reproduction":
        w.writerow(["root", "color", "re", "im"])
        for j, (c, (re_, im_)) in enumerate(zip(result["colors"], result["roots"])):
            w.writerow([j, c, re_, im_])
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="gaudin-opers", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("document", help="problem or solutions JSON file ('-' for stdin)")
        p.add_argument("--tol", type=float, help=f"verification tolerance (default {DEFAULTS['tol']:g})")
        p.add_argument("--coll-tol", dest="coll_tol", type=float,
                       help="collision guard (default 1e-6 x site diameter)")
        p.add_argument("--starts", type=int, help=f"random Newton starts (default {DEFAULTS['starts']})")
        p.add_argument("--seed", type=int, help=f"random seed (default {DEFAULTS['seed']})")
        p.add_argument("--depth", type=int, help=f"population depth (default {DEFAULTS['depth']})")
        p.add_argument("--cap", type=int, help=f"size cap (default {DEFAULTS['cap']})")
        p.add_argument("--out", choices=("json", "csv"), default="json")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = sys.stdin.read() if args.document == "-" else open(args.document, encoding="utf-8").read()
    except OSError as exc:
        print(f"error: cannot read {args.document}: {exc}", file=sys.stderr)
        return 2
    try:
        doc = parse_document(text)
        result = COMMANDS[args.command](doc, args)
    except (InputError, ValidationError, DimensionCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GaudinOpersError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    out = to_csv(result) if args.out == "csv" else json.dumps(result, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
