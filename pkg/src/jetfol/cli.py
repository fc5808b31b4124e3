"""Command-line front end.

Exit codes: 0 success, 1 mathematical negative (only where a flag asks for a
positive answer, or when a lift is obstructed), 2 usage or parse error,
3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import cdga, extension, jets, mc, symplectic, universal
from .datasets import (
    DataError,
    load_form,
    load_jet,
    load_mc,
    load_model,
    load_representation,
    parse_assignment,
)
from .linalg import format_scalar
from .polyparse import PolynomialSyntaxError

OK, NEGATIVE, USAGE, INVALID = 0, 1, 2, 3


class ValidationFailure(Exception):
    def __init__(self, payload):
        super().__init__("validation failed")
        self.payload = payload


def _plain(obj):
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, cdga.Element):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(", ", ": "), ensure_ascii=False)


def _use_color(stream) -> bool:
    flag = os.environ.get("JETFOL_COLOR")
    if flag is not None:
        return flag.lower() not in ("0", "no", "false", "off", "")
    return hasattr(stream, "isatty") and stream.isatty()


def render_table(obj, stream) -> str:
    lines = []
    color = _use_color(stream)
    for k in sorted(_plain(obj)):
        v = _plain(obj)[k]
        key = f"\x1b[1m{k}\x1b[0m" if color else k
        val = v if isinstance(v, str) else json.dumps(v, sort_keys=True)
        lines.append(f"{key}\t{val}")
    return "\n".join(lines)


# -- command implementations ----------------------------------------------------

def cmd_model_validate(a):
    try:
        alg = load_model(a.model)
    except cdga.InconsistentPresentationError as exc:
        raise ValidationFailure({"passed": False, "error": str(exc)})
    rep = cdga.validate(alg)
    out = rep.to_dict()
    out["model"] = alg.name
    out["dims"] = alg.dims()
    if not rep.passed:
        raise ValidationFailure(out)
    return out, OK


def cmd_model_betti(a):
    alg = load_model(a.model)
    return {"model": alg.name, "dims": alg.dims(), "betti": alg.betti()}, OK


def _data(a):
    return load_mc(a.data)


def cmd_mc_check(a):
    rep = mc.mc_check(_data(a))
    if not rep.passed:
        raise ValidationFailure(rep.to_dict())
    return rep.to_dict(), OK


def cmd_mc_twisted(a):
    return {"betti": mc.twisted_betti(_data(a))}, OK


def cmd_mc_algebroid(a):
    return {"betti": mc.algebroid_betti(_data(a))}, OK


def cmd_mc_ring(a):
    ring = mc.cohomology_ring(_data(a))
    classes = ring.classes()
    reps = [{"degree": p, "index": i, "representative": str(e)} for p, i, e in classes]
    products = []
    for p, i, x in classes:
        for q, j, y in classes:
            prod = x * y
            if not prod:
                continue
            coords = ring.reduce(prod).get(p + q, [])
            if any(coords):
                products.append({"left": [p, i], "right": [q, j],
                                 "class": [format_scalar(c) for c in coords]})
    out = {"classes": reps, "nonzero_products": products}
    checks = []
    for item in a.check or []:
        if "=" not in item:
            raise DataError(f"--check expects 'x|y=z', got {item!r}")
        lhs, rhs = item.split("=", 1)
        if "|" not in lhs:
            raise DataError("--check left side is 'x|y' (two elements separated by '|')")
        left, right = (ring.complex.parse(s) for s in lhs.split("|", 1))
        target = ring.complex.parse(rhs)
        checks.append({"check": item, "holds": ring.same_class(left * right, target)})
    if checks:
        out["checks"] = checks
        if not all(c["holds"] for c in checks):
            return out, NEGATIVE
    return out, OK


def cmd_mc_e1(a):
    return mc.spectral_E1(_data(a)).to_dict(), OK


def cmd_ext_class(a):
    e = extension.extension_class(_data(a))
    out = {"cocycle": str(e.cocycle.base), "weight": e.cocycle.weight, "is_trivial": e.is_trivial,
           "primitive": str(e.primitive.base) if e.primitive else None}
    return out, NEGATIVE if a.expect_trivial and not e.is_trivial else OK


def cmd_ext_extend(a):
    res = extension.extend_order(_data(a))
    if res is None:
        out = {"extendable": False}
    else:
        out = {"extendable": True, "eta_k": str(res.eta_k),
               "solution_space_dim": res.solution_space_dim,
               "nullspace": [str(n) for n in res.nullspace]}
    return out, NEGATIVE if a.expect_trivial and res is None else OK


def cmd_ext_max(a):
    d = _data(a)
    grid = [g for g in (a.grid or "").split(",") if g.strip()]
    search = "exhaustive" if grid else "greedy"
    res = extension.max_extension(d, a.k_max if a.k_max is not None else d.k + 3, search, grid)
    out = res.to_dict()
    out["search"] = search
    return out, NEGATIVE if a.expect_trivial and res.achieved < (a.k_max or 0) else OK


def cmd_gysin(a):
    return {"betti": mc.gysin_betti(_data(a))}, OK


def _form(a, d):
    if not a.form:
        raise DataError("this command needs --form")
    return load_form(a.form, d)


def cmd_symp_check(a):
    d = _data(a)
    rep = symplectic.symp_check_closed(_form(a, d), d)
    if not rep.passed:
        raise ValidationFailure(rep.to_dict())
    return rep.to_dict(), OK


def cmd_symp_restrict(a):
    d = _data(a)
    at = parse_assignment(a.at[0]) if a.at else None
    g2, top = symplectic.symp_restrict(_form(a, d), d, at=at)
    return {"gamma": str(g2), "alpha_k": str(top.base), "weight": top.weight,
            "d_gamma": str(g2.d()),
            "minus_c_alpha_k": str((mc.extension_cocycle(d) * top.base).scale(-1))}, OK


def cmd_symp_nondeg(a):
    d = _data(a)
    points = [parse_assignment(p) for p in (a.at or [])] or [{}]
    frame_dim = a.frame_dim
    if frame_dim is None:
        frame_dim = len(symplectic.poly0_free_basis(d.model, 1))
    rep = symplectic.nondeg_check(_form(a, d), d, points, frame_dim)
    out = rep.to_dict()
    return out, OK if rep.passed else NEGATIVE


def cmd_symp_variation(a):
    d = _data(a)
    v = symplectic.variation(_form(a, d), d)
    return {"variation": str(v.value.base), "weight": v.value.weight,
            "quotient": str(v.quotient), "ambiguity_dim": v.ambiguity_dim,
            "is_trivial": v.is_trivial}, OK


def _jet(a, text):
    parts = [s for s in text.split(";")]
    return load_jet(a.l, a.k, parts)


def cmd_jet_compose(a):
    return {"result": jets.compose(_jet(a, a.f), _jet(a, a.g)).strings()}, OK


def cmd_jet_invert(a):
    return {"result": jets.inverse(_jet(a, a.f)).strings()}, OK


def cmd_jet_project(a):
    return {"result": jets.project(_jet(a, a.f), a.to).strings()}, OK


def cmd_jet_cocycle(a):
    return {"cocycle": jets.section_cocycle(_jet(a, a.f), _jet(a, a.g)).strings()}, OK


def cmd_rep_validate(a):
    rep = jets.rep_validate(load_representation(a.rep))
    if not rep.passed:
        raise ValidationFailure(rep.to_dict())
    return rep.to_dict(), OK


def cmd_rep_lift(a):
    r = load_representation(a.rep)
    rep = jets.rep_validate(r)
    if not rep.passed:
        raise ValidationFailure(rep.to_dict())
    res = jets.rep_lift(r)
    if res is None:
        return {"liftable": False}, NEGATIVE
    return {"liftable": True, "solution_space_dim": res.solution_space_dim,
            "images": {g: f.strings() for g, f in res.images.items()}}, OK


def cmd_universal(a):
    u = universal.universal_S(a.k)
    out = {"k": a.k, "ce_dims": u.ce.dims(), "S_dims": u.S.dims(),
           "ce_validated": cdga.validate(u.ce).passed}
    if a.print:
        out["ce_differential"] = {f"x{r}": str(u.x(r).d()) for r in range(a.k)}
        out["t_differential"] = {f"t{r}": str(u.S.t(r).d()) for r in range(a.k + 1)}
        out["t_products"] = {f"t{s}*t{r}": str(u.S.t(s) * u.S.t(r))
                             for s in range(a.k + 1) for r in range(s + 1, a.k + 1)}
    return out, OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetfol", description="Exact computations for algebroids and jet groups.")
    p.add_argument("--format", choices=["json", "table"], default="json")
    sub = p.add_subparsers(dest="command", required=True)

    def data_cmd(parent, name, fn, help_):
        q = parent.add_parser(name, help=help_)
        q.add_argument("--data", required=True, help="MC data file or builtin:<name>")
        q.set_defaults(fn=fn)
        return q

    model = sub.add_parser("model", help="model algebras").add_subparsers(dest="sub", required=True)
    for name, fn in (("validate", cmd_model_validate), ("betti", cmd_model_betti)):
        q = model.add_parser(name)
        q.add_argument("model", help="model JSON file or builtin:<name>")
        q.set_defaults(fn=fn)

    m = sub.add_parser("mc", help="Maurer-Cartan data").add_subparsers(dest="sub", required=True)
    data_cmd(m, "check", cmd_mc_check, "verify the Maurer-Cartan equation")
    data_cmd(m, "twisted-betti", cmd_mc_twisted, "cohomology of the twisted complex")
    data_cmd(m, "algebroid-betti", cmd_mc_algebroid, "algebroid cohomology dimensions")
    ring = data_cmd(m, "ring", cmd_mc_ring, "cohomology ring of the twisted complex")
    ring.add_argument("--check", action="append", help="'x|y=z': is [x][y] = [z]?")
    data_cmd(m, "e1", cmd_mc_e1, "first page of the weight spectral sequence")

    e = sub.add_parser("ext", help="extension class").add_subparsers(dest="sub", required=True)
    for name, fn in (("class", cmd_ext_class), ("extend", cmd_ext_extend), ("max", cmd_ext_max)):
        q = data_cmd(e, name, fn, None)
        q.add_argument("--expect-trivial", action="store_true")
        if name == "max":
            q.add_argument("--k-max", type=int)
            q.add_argument("--grid", help="comma-separated rational coefficients")

    g = sub.add_parser("gysin", help="dimensions of H(A|_D)")
    g.add_argument("--data", required=True)
    g.set_defaults(fn=cmd_gysin)

    s = sub.add_parser("symp", help="algebroid 2-forms").add_subparsers(dest="sub", required=True)
    for name, fn in (("check", cmd_symp_check), ("restrict", cmd_symp_restrict),
                     ("nondeg", cmd_symp_nondeg), ("variation", cmd_symp_variation)):
        q = data_cmd(s, name, fn, None)
        q.add_argument("--form", required=True)
        if name in ("restrict", "nondeg"):
            q.add_argument("--at", action="append", help="poly0 values, e.g. 'u=0'")
        if name == "nondeg":
            q.add_argument("--frame-dim", type=int)

    j = sub.add_parser("jet", help="jet group arithmetic").add_subparsers(dest="sub", required=True)
    for name, fn, two in (("compose", cmd_jet_compose, True), ("invert", cmd_jet_invert, False),
                          ("project", cmd_jet_project, False), ("cocycle", cmd_jet_cocycle, True)):
        q = j.add_parser(name)
        q.add_argument("--l", type=int, default=1)
        q.add_argument("--k", type=int, required=True)
        q.add_argument("--f", required=True, help="components separated by ';'")
        if two:
            q.add_argument("--g", required=True)
        if name == "project":
            q.add_argument("--to", type=int, required=True)
        q.set_defaults(fn=fn)

    r = sub.add_parser("rep", help="jet representations").add_subparsers(dest="sub", required=True)
    for name, fn in (("validate", cmd_rep_validate), ("lift", cmd_rep_lift)):
        q = r.add_parser(name)
        q.add_argument("rep", help="representation JSON file")
        q.set_defaults(fn=fn)

    u = sub.add_parser("universal", help="CE(g_k) and S_k")
    u.add_argument("--k", type=int, required=True)
    u.add_argument("--print", action="store_true")
    u.set_defaults(fn=cmd_universal)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        out, code = args.fn(args)
    except ValidationFailure as exc:
        out, code = exc.payload, INVALID
    except (cdga.InconsistentPresentationError, cdga.PreconditionError,
            universal.MaurerCartanViolation, symplectic.InternalConsistencyError) as exc:
        print(f"jetfol: validation failure: {exc}", file=stderr)
        return INVALID
    except (DataError, PolynomialSyntaxError, ValueError, KeyError, TypeError) as exc:
        print(f"jetfol: error: {exc}", file=stderr)
        return USAGE
    if args.format == "table":
        print(render_table(out, stdout), file=stdout)
    else:
        print(dumps(out), file=stdout)
    return code


def main(argv=None):
    sys.exit(run(argv))
