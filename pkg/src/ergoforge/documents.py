"""Text documents for groups, actions, measures, cochains, forests and results.

A document is three header lines followed by a JSON payload::

    kind: action
    version: 1
    payload:
    { ... }

Rationals are written as "n/d" strings so every value round-trips exactly.
Configurations are digit strings ("0110"), comma separated when the
alphabet has more than ten symbols; joint configurations are "y|z".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .cocycles import Cochain, WindowCochain
from .coupling import JointMeasure, Kernel, canonical_window
from .groups import FiniteGroup, GroupContext, GroupError, QuotientData
from .measures import ExtensionTriple, FiniteAction, Labeling, WindowMeasure
from .trees import DirectedForest

KINDS = (
    "group",
    "action",
    "labeling",
    "window-measure",
    "cochain",
    "forest",
    "kernel",
    "factor-map",
    "result",
)
VERSION = 1


class DocumentError(ValueError):
    """A malformed document; carries the line and the offending field when known."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class Document:
    kind: str
    version: int
    payload: dict


def parse(text: str) -> Document:
    lines = text.split("\n")
    header = []
    for i, key in enumerate(("kind", "version", "payload")):
        if i >= len(lines):
            raise DocumentError(f"missing '{key}:' header", line=i + 1)
        name, sep, value = lines[i].partition(":")
        if not sep or name.strip() != key:
            raise DocumentError(f"expected '{key}:' header", line=i + 1)
        header.append(value.strip())
    kind, version, rest = header
    if kind not in KINDS:
        raise DocumentError(f"unknown document kind {kind!r}", line=1)
    try:
        version = int(version)
    except ValueError:
        raise DocumentError(f"version must be an integer, got {version!r}", line=2) from None
    if version != VERSION:
        raise DocumentError(f"unsupported version {version}", line=2)
    if rest:
        raise DocumentError("payload must start on the next line", line=3)
    try:
        payload = json.loads("\n".join(lines[3:]))
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno + 3) from None
    if not isinstance(payload, dict):
        raise DocumentError("payload must be a JSON object", line=4)
    return Document(kind, version, payload)


def emit(doc: Document) -> str:
    body = json.dumps(doc.payload, indent=2, sort_keys=True, ensure_ascii=False)
    return f"kind: {doc.kind}\nversion: {doc.version}\npayload:\n{body}\n"


def load(path, kind=None) -> Document:
    with open(path, encoding="utf-8") as fh:
        doc = parse(fh.read())
    if kind is not None and doc.kind not in ((kind,) if isinstance(kind, str) else kind):
        raise DocumentError(f"expected a {kind} document, got {doc.kind}", line=1)
    return doc


# scalar fields


def rational(value, field):
    """Parse "n/d", an integer, or an integer string."""
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError(f"expected a rational string, got {value!r}", field=field)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise DocumentError(f"malformed rational {value!r}", field=field) from None


def fmt_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def decimal(x) -> str:
    return f"{float(Fraction(x)):.12g}"


def _require(payload, key, where):
    if key not in payload:
        raise DocumentError("missing field", field=f"{where}.{key}" if where else key)
    return payload[key]


def config_str(cfg, p) -> str:
    return ",".join(map(str, cfg)) if p > 10 else "".join(map(str, cfg))


def parse_config(s, p, n, field):
    if not isinstance(s, str):
        raise DocumentError("configuration must be a string", field=field)
    try:
        digits = [int(t) for t in s.split(",")] if p > 10 else [int(c) for c in s] if s else []
    except ValueError:
        raise DocumentError(f"malformed configuration {s!r}", field=field) from None
    if len(digits) != n or any(not 0 <= d < p for d in digits):
        raise DocumentError(f"configuration {s!r} does not fit {n} cells over {p} symbols", field=field)
    return tuple(digits)


# groups


def group_from(payload, where="group") -> GroupContext:
    kind = _require(payload, "kind", where)
    names = payload.get("names")
    try:
        if kind == "free":
            return GroupContext.free(int(_require(payload, "rank", where)), names)
        if kind == "abelian":
            return GroupContext.abelian(int(_require(payload, "rank", where)), names)
        if kind in ("finite", "quotient"):
            table = _finite_table(payload, where)
            gens = _require(payload, "generators", where)
            gens = [g if isinstance(g, int) else table.index(g) for g in gens]
            if kind == "finite":
                return GroupContext.finite(table, gens, names)
            return GroupContext.quotient(table, gens, names)
    except GroupError as exc:
        raise DocumentError(str(exc), field=where) from None
    raise DocumentError(f"unknown group kind {kind!r}", field=f"{where}.kind")


def _finite_table(payload, where):
    if "cyclic" in payload:
        return FiniteGroup.cyclic(int(payload["cyclic"]))
    if "symmetric" in payload:
        return FiniteGroup.symmetric(int(payload["symmetric"]))
    table = _require(payload, "table", where)
    return FiniteGroup(table, payload.get("element_names"))


def group_payload(ctx: GroupContext) -> dict:
    out = {"kind": ctx.kind, "names": list(ctx.gen_names)}
    if ctx.kind in ("free", "abelian"):
        out["rank"] = ctx.rank
    else:
        out["table"] = ctx.table.table
        out["element_names"] = ctx.table.names
        out["generators"] = list(ctx.images)
    return out


def finite_group_from(payload, where="K") -> FiniteGroup:
    try:
        return _finite_table(payload, where)
    except GroupError as exc:
        raise DocumentError(str(exc), field=where) from None


def finite_group_payload(K: FiniteGroup) -> dict:
    if K.labels is not None and K == FiniteGroup.symmetric(len(K.labels[0])):
        return {"symmetric": len(K.labels[0])}
    return {"table": K.table, "element_names": K.names}


def element(ctx, word, field):
    if not isinstance(word, str):
        raise DocumentError("group elements are written as words", field=field)
    try:
        return ctx.parse(word)
    except GroupError as exc:
        raise DocumentError(str(exc), field=field) from None


def elements(ctx, words, field):
    return [element(ctx, w, f"{field}[{i}]") for i, w in enumerate(words)]


# actions and labelings


def action_from(payload, ctx=None, where="") -> FiniteAction:
    ctx = ctx or group_from(_require(payload, "group", where), f"{where}.group" if where else "group")
    wfield = f"{where}.weights" if where else "weights"
    weights = [rational(w, f"{wfield}[{i}]") for i, w in enumerate(_require(payload, "weights", where))]
    perms = _require(payload, "generators", where)
    try:
        return FiniteAction(ctx, weights, perms, points=payload.get("points"))
    except (ValueError, TypeError) as exc:
        raise DocumentError(str(exc), field=where or "action") from None


def action_payload(a: FiniteAction, with_group=True) -> dict:
    out = {
        "weights": [fmt_rational(w) for w in a.weights],
        "generators": [list(p) for p in a.perms],
    }
    if with_group:
        out["group"] = group_payload(a.ctx)
    if a.points != list(range(a.n)):
        out["points"] = [p if isinstance(p, (int, str)) else list(p) for p in a.points]
    return out


def labeling_from(payload, where="") -> Labeling:
    values = _require(payload, "values", where)
    try:
        return Labeling(values, payload.get("arity"))
    except ValueError as exc:
        raise DocumentError(str(exc), field=where or "values") from None


def labeling_payload(alpha: Labeling) -> dict:
    return {"values": list(alpha.values), "arity": alpha.arity}


# window measures


def window_measure_from(payload, ctx=None, where=""):
    """A WindowMeasure, or a JointMeasure when the payload has a ``q`` field."""
    ctx = ctx or group_from(_require(payload, "group", where))
    window = elements(ctx, _require(payload, "window", where), "window")
    p = int(_require(payload, "p", where))
    atoms = _require(payload, "atoms", where)
    n = len(window)
    try:
        if "q" in payload:
            q = int(payload["q"])
            weights = {}
            for key, m in atoms.items():
                y, sep, z = key.partition("|")
                if not sep:
                    raise DocumentError("joint configurations are written 'y|z'", field=f"atoms.{key}")
                weights[(parse_config(y, q, n, f"atoms.{key}"), parse_config(z, p, n, f"atoms.{key}"))] = rational(
                    m, f"atoms.{key}"
                )
            return JointMeasure(window, q, p, weights)
        weights = {parse_config(k, p, n, f"atoms.{k}"): rational(m, f"atoms.{k}") for k, m in atoms.items()}
        return WindowMeasure(window, p, weights)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc), field="atoms") from None


def window_measure_payload(ctx, omega, with_group=True) -> dict:
    out = {"window": [ctx.format(g) for g in omega.window], "p": omega.p}
    if isinstance(omega, JointMeasure):
        out["q"] = omega.q
        out["atoms"] = {
            f"{config_str(y, omega.q)}|{config_str(z, omega.p)}": fmt_rational(m) for (y, z), m in omega.items()
        }
    else:
        out["atoms"] = {config_str(c, omega.p): fmt_rational(m) for c, m in omega.items()}
    if with_group:
        out["group"] = group_payload(ctx)
    return out


def family_members(payload, ctx):
    """Explicit ω(γ) entries keyed by element, if the payload lists them."""
    members = payload.get("members")
    if members is None:
        return None
    out = {}
    for word, sub in members.items():
        g = element(ctx, word, f"members.{word}")
        out[g] = window_measure_from(sub, ctx, f"members.{word}")
    return out


# cochains


def cochain_from(payload, where=""):
    """A Cochain, or a WindowCochain when ``form`` is "window"."""
    if payload.get("form") == "window":
        ctx = group_from(_require(payload, "group", where))
        G = finite_group_from(_require(payload, "G", where), "G")
        values = {}
        for key, v in _require(payload, "values", where).items():
            b, sep, a = key.partition("|")
            if not sep:
                raise DocumentError("window cochain keys are written 'beta|alpha'", field=f"values.{key}")
            values[(element(ctx, b, f"values.{key}"), element(ctx, a, f"values.{key}"))] = _k_index(G, v, f"values.{key}")
        return WindowCochain(ctx, G, values)
    a = action_from(_require(payload, "action", where), where="action")
    K = finite_group_from(_require(payload, "K", where), "K")
    support = elements(a.ctx, _require(payload, "support", where), "support")
    vals = _require(payload, "values", where)
    values = {}
    for word, g in zip(_require(payload, "support", where), support):
        col = vals.get(word)
        if col is None:
            raise DocumentError("missing column", field=f"values.{word}")
        if len(col) != a.n:
            raise DocumentError(f"need {a.n} values", field=f"values.{word}")
        for x, v in enumerate(col):
            values[(g, x)] = _k_index(K, v, f"values.{word}[{x}]")
    try:
        return Cochain(a, K, values, support)
    except ValueError as exc:
        raise DocumentError(str(exc), field="values") from None


def _k_index(K, v, field):
    if isinstance(v, int) and 0 <= v < K.order:
        return v
    if isinstance(v, str) and v in K.names:
        return K.names.index(v)
    raise DocumentError(f"{v!r} is not an element of the value group", field=field)


def cochain_payload(sigma) -> dict:
    if isinstance(sigma, WindowCochain):
        ctx = sigma.ctx
        return {
            "form": "window",
            "group": group_payload(ctx),
            "G": finite_group_payload(sigma.G),
            "values": {f"{ctx.format(b)}|{ctx.format(a)}": v for (b, a), v in sorted(sigma.values.items(), key=lambda kv: (ctx.sort_key(kv[0][0]), ctx.sort_key(kv[0][1])))},
        }
    ctx = sigma.action.ctx
    return {
        "action": action_payload(sigma.action),
        "K": finite_group_payload(sigma.K),
        "support": [ctx.format(g) for g in sigma.support],
        "values": {ctx.format(g): sigma.column(g) for g in sigma.support},
    }


# forests


def forests_from(payload, ctx=None):
    """(forest, weight) pairs: a single forest has weight 1."""
    ctx = ctx or group_from(_require(payload, "group", ""))
    vertices = elements(ctx, _require(payload, "vertices", ""), "vertices")
    if "mixture" in payload:
        entries = payload["mixture"]
        out = []
        for i, ent in enumerate(entries):
            out.append((_forest(ctx, vertices, _require(ent, "edges", f"mixture[{i}]"), f"mixture[{i}].edges"),
                        rational(_require(ent, "weight", f"mixture[{i}]"), f"mixture[{i}].weight")))
        if sum(w for _, w in out) != 1:
            raise DocumentError("mixture weights must sum to 1", field="mixture")
        return out
    return [(_forest(ctx, vertices, _require(payload, "edges", ""), "edges"), Fraction(1))]


def _forest(ctx, vertices, edges, field):
    pairs = []
    for i, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise DocumentError("edges are [head, tail] pairs", field=f"{field}[{i}]")
        pairs.append((element(ctx, e[0], f"{field}[{i}]"), element(ctx, e[1], f"{field}[{i}]")))
    try:
        return DirectedForest(ctx, vertices, pairs)
    except ValueError as exc:
        raise DocumentError(str(exc), field=field) from None


def forest_payload(F: DirectedForest, with_group=True) -> dict:
    ctx = F.ctx
    out = {
        "vertices": [ctx.format(v) for v in F.vertices],
        "edges": [[ctx.format(v), ctx.format(u)] for v, u in F.edges],
    }
    if with_group:
        out["group"] = group_payload(ctx)
    return out


# kernels and factor maps


def kernel_from(payload) -> Kernel:
    ctx = group_from(_require(payload, "group", ""))
    base = elements(ctx, _require(payload, "base", ""), "base")
    q, p = int(_require(payload, "q", "")), int(_require(payload, "p", ""))
    table = {}
    order = canonical_window(ctx, base)
    for key, atoms in _require(payload, "table", "").items():
        y = parse_config(key, q, len(base), f"table.{key}")
        sub = {"window": payload["base"], "p": p, "atoms": atoms}
        om = window_measure_from(sub, ctx, f"table.{key}")
        y = tuple(y[base.index(w)] for w in order)
        table[y] = om
    return Kernel(ctx, q, p, base=base, table=table, covariant=payload.get("covariant", True))


def factor_map_from(payload):
    """Either an ExtensionTriple (with source and target) or the coinduction data."""
    phi = _require(payload, "map", "")
    if "source" in payload:
        b = action_from(payload["source"], where="source")
        a = action_from(payload["target"], where="target")
        try:
            return ExtensionTriple(b, a, phi)
        except ValueError as exc:
            raise DocumentError(str(exc), field="map") from None
    return phi


def extension_payload(e: ExtensionTriple) -> dict:
    return {
        "source": action_payload(e.source),
        "target": action_payload(e.target),
        "map": list(e.phi),
    }


def quotient_from(payload, ctx) -> QuotientData:
    members = elements(ctx, _require(payload, "subgroup", ""), "subgroup")
    transversal = elements(ctx, _require(payload, "transversal", ""), "transversal")
    if not ctx.is_finite:
        raise DocumentError("listed subgroups need a finite group model", field="subgroup")
    try:
        return QuotientData.from_elements(ctx, members, transversal)
    except GroupError as exc:
        raise DocumentError(str(exc), field="transversal") from None
