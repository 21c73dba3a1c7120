"""Command line interface.

Exit status: 0 on success or when a witness is found, 1 for a certified
failure, 2 for usage and validation errors.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import coinduction, coupling, ec, trees
from .cocycles import (
    DENSITY_CAP,
    Cochain,
    WindowCochain,
    coboundary_density_search,
    cocycle_defect,
    cocycle_violations,
    extend_free_cochain,
    generator_cocycle,
    skew_product,
)
from .documents import (
    Document,
    DocumentError,
    action_from,
    cochain_from,
    cochain_payload,
    decimal,
    element,
    elements,
    emit,
    factor_map_from,
    family_members,
    fmt_rational,
    forests_from,
    group_from,
    kernel_from,
    labeling_from,
    load,
    quotient_from,
    window_measure_from,
    window_measure_payload,
)
from .groups import cayley_ball
from .measures import DEFAULT_CAP, ExtensionTriple, Labeling, default_cap, entropy, join, relative_entropy
from .search import ENGINES, EXHAUSTIVE, SearchResult

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Failure(Exception):
    """Raised after a report has been printed for a certified failure."""


def _plain(v, ctx=None):
    """Convert report values to JSON-compatible data with exact rationals."""
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, Fraction):
        return {"exact": fmt_rational(v), "decimal": decimal(v)}
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Labeling):
        return list(v.values)
    if isinstance(v, dict):
        return {str(k): _plain(x, ctx) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x, ctx) for x in v]
    return str(v)


def _text(v):
    if isinstance(v, Fraction):
        return f"{fmt_rational(v)} ({decimal(v)})"
    if isinstance(v, (dict, list, tuple, Labeling)):
        return json.dumps(_plain(v), sort_keys=True, ensure_ascii=False)
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


class Report:
    def __init__(self, command):
        self.command = command
        self.rows = [("command", command)]

    def add(self, key, value):
        self.rows.append((key, value))
        return self

    def render(self, fmt):
        if fmt == "json":
            payload = {k: _plain(v) for k, v in self.rows}
            return emit(Document("result", 1, payload))
        width = max(len(k) for k, _ in self.rows)
        return "".join(f"{k.ljust(width)}  {_text(v)}\n" for k, v in self.rows)


def _settings():
    return click.get_current_context().find_root().obj


def _finish(report, ok=True):
    s = _settings()
    click.echo(report.render(s["format"]), nl=False)
    if not ok:
        raise Failure()


def _result(report, res: SearchResult, witness=None):
    report.add("engine", res.engine)
    report.add("seed", res.seed if res.seed is not None else "none")
    report.add("success", res.success)
    report.add("exact", res.exact)
    report.add("value", res.value)
    report.add("witness", witness if witness is not None else res.witness)
    if res.reason:
        report.add("reason", res.reason)
    for k in sorted(res.details):
        report.add(k, res.details[k])
    _finish(report, res.success)


def _words(ctx, text, field):
    if text is None:
        return None
    return elements(ctx, [w for w in text.split(",") if w.strip()], field)


class RationalType(click.ParamType):
    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            out = Fraction(value)
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)
        if out < 0:
            self.fail("tolerance must be nonnegative", param, ctx)
        return out


DOC = click.Path(exists=True, dir_okay=False)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for stochastic searches.")
@click.option("--tol", type=RationalType(), default="0", show_default=True, help="Rational tolerance ε.")
@click.option("--cap", type=int, default=None, help=f"Search size cap (default {DEFAULT_CAP}, or ERGOFORGE_CAP).")
@click.option("--engine", type=click.Choice(ENGINES), default=EXHAUSTIVE, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.pass_context
def cli(ctx, seed, tol, cap, engine, fmt):
    """Exact finite computations for measure-preserving group actions."""
    ctx.obj = {"seed": seed, "tol": tol, "cap": cap, "engine": engine, "format": fmt}


def _cap(fallback=DEFAULT_CAP):
    s = _settings()
    return s["cap"] if s["cap"] is not None else default_cap(fallback)


# groups, actions, entropy


@cli.command()
@click.argument("doc", type=DOC)
@click.option("--radius", type=int, default=None, help="Also list the Cayley ball of this radius.")
def group(doc, radius):
    """Describe a group document."""
    g = group_from(load(doc, "group").payload)
    r = Report("group").add("description", g.describe()).add("generators", g.gen_names)
    if g.is_finite:
        r.add("order", g.table.order)
    if radius is not None:
        ball = cayley_ball(g, radius)
        r.add("ball_size", len(ball.elements)).add("ball", [g.format(x) for x in ball.elements])
    _finish(r)


@cli.command()
@click.argument("doc", type=DOC)
def action(doc):
    """Validate an action document."""
    a = action_from(load(doc, "action").payload)
    r = Report("action").add("group", a.ctx.describe()).add("points", a.n).add("weights", a.weights)
    r.add("generators", {a.ctx.gen_names[i]: list(p) for i, p in enumerate(a.perms)})
    _finish(r)


@cli.command("entropy")
@click.argument("action_doc", type=DOC)
@click.argument("labeling_doc", type=DOC)
@click.option("--given", type=DOC, default=None, help="Condition on a second labeling.")
def entropy_cmd(action_doc, labeling_doc, given):
    """Shannon entropy (natural log) of a partition."""
    a = action_from(load(action_doc, "action").payload)
    alpha = labeling_from(load(labeling_doc, "labeling").payload)
    r = Report("entropy").add("H", f"{entropy(a, alpha):.12g}")
    if given:
        beta = labeling_from(load(given, "labeling").payload)
        r.add("H_joint", f"{entropy(a, join(alpha, beta)):.12g}")
        r.add("H_given", f"{entropy(a, beta):.12g}")
        r.add("H_conditional", f"{relative_entropy(a, alpha, beta):.12g}")
    _finish(r)


# cocycles


@cli.group()
def cocycle():
    """Cocycle defect, coboundary density, skew products and extensions."""


def _load_cochain(path):
    sigma = cochain_from(load(path, "cochain").payload)
    if not isinstance(sigma, Cochain):
        raise DocumentError("expected a cochain of an action, not a window cochain")
    return sigma


@cocycle.command("defect")
@click.argument("doc", type=DOC)
def cocycle_defect_cmd(doc):
    """The cocycle defect of a cochain on its support."""
    sigma = _load_cochain(doc)
    d = cocycle_defect(sigma)
    viol = cocycle_violations(sigma)
    ctx = sigma.action.ctx
    r = Report("cocycle defect").add("defect", d).add("violations", len(viol))
    if viol:
        g, h, x = viol[0]
        r.add("first_violation", [ctx.format(g), ctx.format(h), x])
    _finish(r, d <= _settings()["tol"])


@cocycle.command("density")
@click.argument("doc", type=DOC)
@click.option("--F", "fset", default=None, help="Comma-separated words (default: the support).")
def cocycle_density_cmd(doc, fset):
    """Search a transfer function p with p(γx)p(x)^{-1} = σ(γ, x) on most of X."""
    sigma = _load_cochain(doc)
    F = _words(sigma.action.ctx, fset, "--F") or sigma.support
    s = _settings()
    res = coboundary_density_search(sigma, F, s["tol"], s["engine"], s["seed"], _cap(DENSITY_CAP))
    _result(Report("cocycle density"), res)


@cocycle.command("skew")
@click.argument("doc", type=DOC)
@click.option("--translate", is_flag=True, help="Let K act on itself by left translation.")
def cocycle_skew_cmd(doc, translate):
    """The skew-product extension X ×_σ k."""
    sigma = _load_cochain(doc)
    e = skew_product(sigma, translate)
    b = e.source
    r = Report("cocycle skew").add("points", b.n).add("weights", b.weights)
    r.add("generators", {b.ctx.gen_names[i]: list(p) for i, p in enumerate(b.perms)})
    r.add("factor_map", list(e.phi))
    _finish(r)


@cocycle.command("extend")
@click.argument("doc", type=DOC)
@click.option("--support", "support", required=True, help="Comma-separated words to extend to.")
def cocycle_extend_cmd(doc, support):
    """Extend generator values to a cocycle on a larger support."""
    sigma = _load_cochain(doc)
    a, K = sigma.action, sigma.K
    ctx = a.ctx
    gens = ctx.generators()
    missing = [ctx.format(g) for g in gens if g not in sigma.support]
    if missing:
        raise DocumentError(f"generator values missing for {', '.join(missing)}", field="values")
    assignment = [sigma.column(g) for g in gens]
    sup = _words(ctx, support, "--support")
    ext = extend_free_cochain(a, K, assignment, sup) if ctx.is_free else generator_cocycle(a, K, assignment, sup)
    r = Report("cocycle extend")
    if ext is None:
        r.add("success", False).add("reason", "generator values violate the group relations")
        _finish(r, False)
    r.add("success", True).add("defect", cocycle_defect(ext))
    r.add("cochain", cochain_payload(ext)["values"])
    _finish(r)


# trees


@cli.group()
def tree():
    """Directed forests and tree retractions."""


@tree.command("components")
@click.argument("doc", type=DOC)
def tree_components_cmd(doc):
    """Components of F ∪ F̄."""
    F, _ = forests_from(load(doc, "forest").payload)[0]
    ctx = F.ctx
    comps = F.components().classes
    _finish(Report("tree components").add("count", len(comps)).add("classes", [[ctx.format(v) for v in c] for c in comps]))


@tree.command("retract")
@click.argument("forest_doc", type=DOC)
@click.argument("cochain_doc", type=DOC)
def tree_retract_cmd(forest_doc, cochain_doc):
    """r_T(c) on every pair inside one component."""
    F, _ = forests_from(load(forest_doc, "forest").payload)[0]
    c = cochain_from(load(cochain_doc, "cochain").payload)
    if not isinstance(c, WindowCochain):
        raise DocumentError("expected a window cochain", field="form")
    out = trees.retract(F, c)
    r = Report("tree retract").add("pairs", len(out.values))
    r.add("unchanged", all(c.defined(b, a) and c(b, a) == v for (b, a), v in out.values.items()))
    r.add("values", cochain_payload(out)["values"])
    _finish(r)


# couplings and forest measures


def _measure(path):
    doc = load(path, "window-measure")
    ctx = group_from(doc.payload.get("group") or {})
    return ctx, window_measure_from(doc.payload, ctx), doc.payload


def _measure_rows(report, ctx, omega):
    payload = window_measure_payload(ctx, omega, with_group=False)
    report.add("window", payload["window"]).add("atoms", {k: Fraction(v) for k, v in payload["atoms"].items()})
    return report


@cli.command()
@click.argument("target_doc", type=DOC)
@click.argument("source_doc", type=DOC)
def couple(target_doc, source_doc):
    """Monotone coupling of κ0 (SOURCE) with κ1 (TARGET)."""
    ctx, k1, _ = _measure(target_doc)
    _, k0, _ = _measure(source_doc)
    joint = coupling.monotone_coupling(k1, k0)
    m0, m1 = coupling.coupling_marginals(joint)
    r = Report("couple").add("window", [ctx.format(g) for g in k0.window])
    r.add("coupling", {f"{''.join(map(str, z0))}->{''.join(map(str, z1))}": m for (z0, z1), m in joint.items()})
    r.add("marginals_exact", m0 == k0.weights and m1 == k1.reorder(k0.window).weights)
    r.add("comonotone", coupling.is_comonotone(joint))
    _finish(r)


@cli.command()
@click.argument("measure_doc", type=DOC)
@click.option("--forest", "forest_doc", type=DOC, default=None, help="Use the components of a forest.")
@click.option("--classes", default=None, help='JSON list of classes of words, e.g. [["e"],["a"]].')
def rerandomize(measure_doc, forest_doc, classes):
    """Independent product of the class marginals."""
    ctx, omega, _ = _measure(measure_doc)
    if forest_doc:
        E = forests_from(load(forest_doc, "forest").payload, ctx)[0][0]
    elif classes:
        try:
            raw = json.loads(classes)
        except json.JSONDecodeError as exc:
            raise click.BadParameter(str(exc), param_hint="--classes") from None
        E = trees.ComponentRelation([elements(ctx, c, "--classes") for c in raw])
    else:
        raise click.UsageError("give --forest or --classes")
    _finish(_measure_rows(Report("rerandomize"), ctx, coupling.rerandomize(omega, E)))


def _family(ctx, omega, payload):
    members = family_members(payload, ctx)
    if members is None:
        return coupling.WindowMeasureFamily.coherent(ctx, omega)
    return coupling.WindowMeasureFamily(ctx, omega.window, members)


@cli.command("forest-measure")
@click.argument("measure_doc", type=DOC)
@click.argument("forest_doc", type=DOC)
@click.option("--root", "roots", multiple=True, help="Root word for a component (repeatable).")
def forest_measure_cmd(measure_doc, forest_doc, roots):
    """θ(ω, F) for a family ω (coherent unless members are listed)."""
    ctx, omega, payload = _measure(measure_doc)
    fam = _family(ctx, omega, payload)
    F = forests_from(load(forest_doc, "forest").payload, ctx)[0][0]
    chosen = {element(ctx, w, "--root"): element(ctx, w, "--root") for w in roots}
    out = coupling.forest_measure(fam, F, chosen or None)
    r = _measure_rows(Report("forest-measure"), ctx, out)
    r.add("shift_coherent", fam.is_shift_coherent())
    _finish(r)


@cli.command()
@click.argument("joint_doc", type=DOC)
@click.argument("forest_doc", type=DOC)
def zeta(joint_doc, forest_doc):
    """ζ(μ) for a joint measure λ and a forest mixture μ."""
    ctx, lam, _ = _measure(joint_doc)
    if not isinstance(lam, coupling.JointMeasure):
        raise DocumentError("zeta needs a joint measure (payload field q)", field="q")
    mix = forests_from(load(forest_doc, "forest").payload, ctx)
    out = coupling.zeta_construct(lam, mix)
    _finish(_measure_rows(Report("zeta"), ctx, out).add("q_marginal_preserved", out.q_marginal() == lam.q_marginal()))


@cli.command()
@click.argument("kernel_doc", type=DOC)
@click.argument("measure_doc", type=DOC)
@click.argument("forest_doc", type=DOC)
def xi(kernel_doc, measure_doc, forest_doc):
    """ξ(ν′) for a kernel κ, a measure ν′ on q^W and a forest mixture."""
    kernel = kernel_from(load(kernel_doc, "kernel").payload)
    ctx = kernel.ctx
    _, nu, _ = _measure(measure_doc)
    mix = forests_from(load(forest_doc, "forest").payload, ctx)
    out = coupling.xi_construct(kernel, nu, mix)
    r = _measure_rows(Report("xi"), ctx, out)
    r.add("q_marginal_is_input", out.q_marginal() == coupling.canonical(ctx, nu))
    _finish(r)


# existential closedness


@cli.group("ec")
def ec_group():
    """Finite searches behind existential closedness."""


def _search_kw():
    s = _settings()
    return {"engine": s["engine"], "seed": s["seed"], "cap": _cap()}


@ec_group.command("check")
@click.argument("extension_doc", type=DOC)
@click.argument("alpha_doc", type=DOC)
@click.argument("beta_doc", type=DOC)
@click.option("--S", "sset", required=True, help="Comma-separated words.")
def ec_check_cmd(extension_doc, alpha_doc, beta_doc, sset):
    """Search α̃ on X matching the pattern statistics of α on Y."""
    e = factor_map_from(load(extension_doc, "factor-map").payload)
    if not isinstance(e, ExtensionTriple):
        raise DocumentError("need source and target actions", field="source")
    alpha = labeling_from(load(alpha_doc, "labeling").payload)
    beta = labeling_from(load(beta_doc, "labeling").payload)
    q = ec.ECQuery(e, alpha, beta, _words(e.target.ctx, sset, "--S"), _settings()["tol"])
    _result(Report("ec check"), ec.ec_criterion_search(q, **_search_kw()))


@ec_group.command("finite-ext")
@click.argument("cochain_doc", type=DOC)
@click.argument("beta_doc", type=DOC)
@click.option("--k", "k", type=int, required=True)
@click.option("--F", "fset", default=None, help="Comma-separated words (default: the support).")
@click.option("--slack", type=RationalType(), default="0", show_default=True)
def ec_finite_ext_cmd(cochain_doc, beta_doc, k, fset, slack):
    """Search α: X → k for the finite-to-one conditions."""
    sigma = _load_cochain(cochain_doc)
    beta = labeling_from(load(beta_doc, "labeling").payload)
    F = _words(sigma.action.ctx, fset, "--F") or sigma.support
    res = ec.finite_ext_ec_search(sigma.action, k, sigma, F, _settings()["tol"], beta, slack, **_search_kw())
    _result(Report("ec finite-ext"), res)


@ec_group.command("theta")
@click.argument("action_doc", type=DOC)
@click.option("--k", "k", type=int, required=True)
@click.option("--q", "q", type=int, required=True)
@click.option("--F", "fset", required=True, help="Comma-separated words.")
@click.option("--A", "a_doc", type=DOC, default=None, help="Fixed partition A (labeling).")
@click.option("--B", "b_doc", type=DOC, default=None, help="Fixed Sym(k) cocycle B (cochain).")
def ec_theta_cmd(action_doc, k, q, fset, a_doc, b_doc):
    """The axiom value sup_A sup_B inf_C max(φ1, φ2, φ3)."""
    a = action_from(load(action_doc, "action").payload)
    A = labeling_from(load(a_doc, "labeling").payload) if a_doc else None
    B = _load_cochain(b_doc) if b_doc else None
    inst = ec.ThetaInstance(k, q, _words(a.ctx, fset, "--F"), A, B)
    res = ec.theta_axiom_eval(a, inst, **_search_kw())
    w = res.witness
    witness = {"A": w["A"], "C": w["C"], "B": cochain_payload(w["B"])["values"]}
    r = Report("ec theta")
    r.add("engine", res.engine).add("seed", res.seed).add("exact", res.exact).add("value", res.value)
    r.add("witness", witness)
    if res.reason:
        r.add("reason", res.reason)
    r.add("outer_candidates", res.details["outer_candidates"])
    _finish(r, res.value <= _settings()["tol"])


def _parse_pair(text, parse_side):
    left, sep, right = text.partition(";")
    if not sep:
        raise click.BadParameter(f"{text!r} is not of the form A;B", param_hint="--pair")
    return parse_side(left), parse_side(right)


@ec_group.command("weakmix")
@click.argument("doc", type=DOC)
@click.option("--pair", "pairs", multiple=True, required=True,
              help="'A;B' with point lists (actions) or cylinders like 'e=0,a=1' (groups).")
@click.option("--radius", type=int, default=2, show_default=True, help="Search set: the Cayley ball.")
@click.option("--p", "p", type=int, default=2, show_default=True, help="Alphabet of the Bernoulli model.")
def ec_weakmix_cmd(doc, pairs, radius, p):
    """Search γ with |μ(A ∩ γB) − μ(A)μ(B)| ≤ ε for all pairs.

    An action document gives a finite model; a group document gives the
    Bernoulli shift with uniform coordinates on p symbols.
    """
    d = load(doc, ("action", "group"))
    if d.kind == "action":
        model = action_from(d.payload)
        ctx = model.ctx

        def side(s):
            try:
                return frozenset(int(t) for t in s.split(",") if t.strip())
            except ValueError:
                raise click.BadParameter(f"{s!r} is not a list of points", param_hint="--pair") from None
    else:
        ctx = group_from(d.payload)
        model = ec.BernoulliShift(ctx, [Fraction(1, p)] * p)

        def side(s):
            out = {}
            for part in s.split(","):
                if not part.strip():
                    continue
                w, sep, v = part.partition("=")
                if not sep or not v.strip().isdigit() or int(v) >= p:
                    raise click.BadParameter(f"{part!r} is not a constraint word=digit", param_hint="--pair")
                out[element(ctx, w, "--pair")] = int(v)
            return ec.Cylinder.of(out)

    parsed = [_parse_pair(t, side) for t in pairs]
    G0 = ctx.elements_by_bfs() if ctx.is_finite else cayley_ball(ctx, radius).elements
    res = ec.weak_mixing_certificate(model, parsed, _settings()["tol"], G0)
    r = Report("ec weakmix").add("search_set", len(G0)).add("success", res.success).add("value", res.value)
    r.add("witness", ctx.format(res.witness) if res.witness is not None else "none")
    if res.reason:
        r.add("reason", res.reason)
    r.add("worst", {ctx.format(g): v for g, v in res.details["worst"]})
    _finish(r, res.success)


@ec_group.command("openmap")
@click.argument("action_doc", type=DOC)
@click.argument("beta_doc", type=DOC)
@click.argument("joint_doc", type=DOC)
def ec_openmap_cmd(action_doc, beta_doc, joint_doc):
    """Search γ: X → p with ((β × γ)_W)_*μ within ε of λ."""
    a = action_from(load(action_doc, "action").payload)
    beta = labeling_from(load(beta_doc, "labeling").payload)
    lam = window_measure_from(load(joint_doc, "window-measure").payload, a.ctx)
    if not isinstance(lam, coupling.JointMeasure):
        raise DocumentError("openmap needs a joint measure (payload field q)", field="q")
    res = ec.ec_lemma_search(a, beta, lam, _settings()["tol"], **_search_kw())
    _result(Report("ec openmap"), res)


# coinduction


@cli.command()
@click.argument("group_doc", type=DOC)
@click.argument("base_doc", type=DOC)
@click.argument("sub_doc", type=DOC)
@click.argument("map_doc", type=DOC)
def coinduce(group_doc, base_doc, sub_doc, map_doc):
    """Coinduce a subgroup extension of BASE to the whole group."""
    ctx = group_from(load(group_doc, "group").payload)
    a = action_from(load(base_doc, "action").payload, ctx)
    fm = load(map_doc, "factor-map").payload
    quotient = quotient_from(fm, ctx)
    phi = factor_map_from(fm)
    sp = load(sub_doc, "action").payload
    weights = [Fraction(w) for w in sp.get("weights", [])]
    table = {element(ctx, w, "subgroup_perms"): tuple(p) for w, p in sp.get("subgroup_perms", {}).items()}
    b = coinduction.SubgroupAction.from_table(ctx, quotient, weights, table)
    e = coinduction.coinduce(ctx, quotient, b, a, phi)
    lam = [g for g in ctx.elements_by_bfs() if quotient.member(g)]
    r = Report("coinduce").add("index", quotient.n).add("points", e.source.n)
    r.add("weights", {"".join(map(str, pt)): w for pt, w in zip(e.source.points, e.source.weights) if w})
    r.add("invariant", coinduction.is_invariant(e.source))
    r.add("projection_equivariant", coinduction.projection_equivariant(e, b, lam))
    r.add("factor_equivariant", coinduction.factor_equivariant(e, ctx.elements_by_bfs()))
    _finish(r)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="ergoforge", standalone_mode=False)
    except Failure:
        sys.exit(EXIT_FAIL)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except (ValueError, KeyError, TypeError, OverflowError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    sys.exit(EXIT_OK)
