"""SMF text format: manifold descriptions, scene queries, JSON reports.

The manifold format is line oriented, `#` starts a comment, tokens are
whitespace separated and the `smf <version>` header is mandatory:

    smf 1
    model silo rings=3            # or an explicit triangle list: t 0 1 2
    point P 17 1/3 1/3 1/3
    line  l 6 0 1/2 1/2 0

Scene files hold one query per line: trace / classify / render / audit /
search.  Parsing is total: malformed input produces positioned
diagnostics, never an exception.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .builders import (
    LineFixture,
    PointFixture,
    build_flat_plane,
    build_semi_paradoxist,
    build_silo,
)
from .surface import Triangulation, _Builder, validate

SMF_VERSION = 1


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    code: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


@dataclass
class SmfDocument:
    version: int = SMF_VERSION
    model: tuple = None          # (name, {param: value})
    triangles: list = field(default_factory=list)   # (v0, v1, v2, line_no)
    points: dict = field(default_factory=dict)      # label -> PointFixture
    lines: dict = field(default_factory=dict)       # label -> LineFixture


# -- queries -------------------------------------------------------------


@dataclass(frozen=True)
class TraceQuery:
    line_label: str
    arc: float = None
    growth: int = None
    two_sided: bool = True


@dataclass(frozen=True)
class ClassifyQuery:
    point_label: str
    line_label: str
    arc: float = None
    growth: int = None


@dataclass(frozen=True)
class RenderQuery:
    region: tuple            # ("fan", vertex_label) or ("tris", (ids...))
    paths: tuple = ()        # line labels
    out: str = None


@dataclass(frozen=True)
class AuditQuery:
    rings: tuple             # inclusive (lo, hi)


@dataclass(frozen=True)
class SearchQuery:
    family: str
    params: dict


def _tokenize(text):
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        yield ln, body


def _num(tok: str):
    if "/" in tok:
        a, b = tok.split("/", 1)
        return Fraction(int(a), int(b))
    if "." in tok or "e" in tok or "E" in tok:
        return float(tok)
    return Fraction(int(tok))


def parse_manifold(text: str):
    """Parse SMF text. Returns (SmfDocument or None, [Diagnostic])."""
    doc = SmfDocument()
    diags = []
    saw_header = False
    for ln, body in _tokenize(text):
        toks = body.split()
        col = body.index(toks[0]) + 1
        kw = toks[0]
        try:
            if not saw_header:
                if kw != "smf":
                    diags.append(Diagnostic(ln, col, "MissingHeader",
                                            "file must start with 'smf <version>'"))
                    return None, diags
                if len(toks) != 2 or not toks[1].isdigit():
                    diags.append(Diagnostic(ln, col, "BadHeader",
                                            "expected 'smf <version>'"))
                    return None, diags
                doc.version = int(toks[1])
                if doc.version != SMF_VERSION:
                    diags.append(Diagnostic(ln, col, "BadVersion",
                                            f"unsupported version {doc.version}"))
                    return None, diags
                saw_header = True
                continue
            if kw == "model":
                if len(toks) < 2:
                    diags.append(Diagnostic(ln, col, "BadModel", "missing model name"))
                    continue
                params = {}
                ok = True
                for t in toks[2:]:
                    if "=" not in t:
                        diags.append(Diagnostic(ln, col, "BadModel",
                                                f"expected key=value, got {t!r}"))
                        ok = False
                        break
                    k, v = t.split("=", 1)
                    params[k] = v
                if ok:
                    doc.model = (toks[1], params)
            elif kw == "t":
                if len(toks) != 4:
                    diags.append(Diagnostic(ln, col, "BadTriangle",
                                            "expected 't v0 v1 v2'"))
                    continue
                doc.triangles.append((int(toks[1]), int(toks[2]), int(toks[3]), ln))
            elif kw == "point":
                if len(toks) != 6:
                    diags.append(Diagnostic(ln, col, "BadPoint",
                                            "expected 'point L tri b0 b1 b2'"))
                    continue
                doc.points[toks[1]] = PointFixture(
                    int(toks[2]), (_num(toks[3]), _num(toks[4]), _num(toks[5])))
            elif kw == "line":
                if len(toks) != 7:
                    diags.append(Diagnostic(ln, col, "BadLine",
                                            "expected 'line L tri b0 b1 b2 thetadeg'"))
                    continue
                doc.lines[toks[1]] = LineFixture(
                    int(toks[2]), (_num(toks[3]), _num(toks[4]), _num(toks[5])),
                    theta_deg=float(toks[6]))
            else:
                diags.append(Diagnostic(ln, col, "UnknownDirective", kw))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            diags.append(Diagnostic(ln, col, "BadNumber", str(exc)))
    if not saw_header:
        diags.append(Diagnostic(1, 1, "MissingHeader", "empty file"))
        return None, diags
    if doc.model is None and not doc.triangles:
        diags.append(Diagnostic(1, 1, "EmptyBody",
                                "need a 'model' line or triangle list"))
    if doc.model is not None and doc.triangles:
        diags.append(Diagnostic(1, 1, "MixedBody",
                                "cannot mix 'model' with explicit triangles"))
    if diags:
        return None, diags
    return doc, []


def to_triangulation(doc: SmfDocument):
    """Realize a document. Returns (Triangulation or None, [Diagnostic])."""
    diags = []
    if doc.model is not None:
        name, params = doc.model
        try:
            if name == "flat":
                surf = build_flat_plane(int(params.get("radius", 3)))
            elif name == "semi_paradoxist":
                surf = build_semi_paradoxist(int(params.get("radius", 4)))
            elif name == "silo":
                surf = build_silo(int(params.get("rings", 3)))
            else:
                return None, [Diagnostic(1, 1, "UnknownModel", name)]
        except (ValueError, RuntimeError) as exc:
            return None, [Diagnostic(1, 1, "BadModelParams", str(exc))]
    else:
        b = _Builder()
        edge_uses = {}
        try:
            for (v0, v1, v2, ln) in doc.triangles:
                for v in (v0, v1, v2):
                    if v not in b.degree:
                        b.degree[v] = 0
                        b.ring_of[v] = 0
                        b.next_vertex = max(b.next_vertex, v + 1)
                for u, w in ((v0, v1), (v1, v2), (v2, v0)):
                    key = frozenset((u, w))
                    edge_uses[key] = edge_uses.get(key, 0) + 1
                    if edge_uses[key] > 2:
                        diags.append(Diagnostic(
                            ln, 1, "EdgeShared3",
                            f"edge ({u},{w}) already shared by two triangles"))
                        return None, diags
                try:
                    b.add_triangle(v0, v1, v2)
                except Exception as exc:
                    diags.append(Diagnostic(ln, 1, "EdgeShared3", str(exc)))
                    return None, diags
            boundary = b.boundary_cycle() if b.pending else ()
            b.rings = [boundary]
            surf = b.freeze(None, {}, boundary=boundary)
        except Exception as exc:
            return None, [Diagnostic(1, 1, "BadTriangulation", str(exc))]
    for label, fx in doc.points.items():
        if fx.tri >= surf.n_triangles():
            diags.append(Diagnostic(1, 1, "UnknownTriangle",
                                    f"point {label}: triangle {fx.tri}"))
        else:
            surf.labels[label] = fx
    for label, fx in doc.lines.items():
        if fx.tri >= surf.n_triangles():
            diags.append(Diagnostic(1, 1, "UnknownTriangle",
                                    f"line {label}: triangle {fx.tri}"))
        else:
            surf.labels[label] = fx
    if diags:
        return None, diags
    rep = validate(surf)
    if not rep.ok():
        for v in rep.violations[:20]:
            diags.append(Diagnostic(1, 1, v.kind, f"{v.element}: {v.detail}"))
        return None, diags
    return surf, []


def print_manifold(doc: SmfDocument) -> str:
    """Canonical text for a document; print/parse round-trips."""
    out = [f"smf {doc.version}"]
    if doc.model is not None:
        name, params = doc.model
        kv = " ".join(f"{k}={params[k]}" for k in sorted(params))
        out.append(f"model {name}{(' ' + kv) if kv else ''}")
    for (v0, v1, v2, _) in doc.triangles:
        out.append(f"t {v0} {v1} {v2}")
    for label in sorted(doc.points):
        fx = doc.points[label]
        b = " ".join(str(x) for x in fx.bary)
        out.append(f"point {label} {fx.tri} {b}")
    for label in sorted(doc.lines):
        fx = doc.lines[label]
        b = " ".join(str(x) for x in fx.bary)
        out.append(f"line {label} {fx.tri} {b} {fx.theta_deg:g}")
    return "\n".join(out) + "\n"


# -- scene queries ---------------------------------------------------------


def parse_scene(text: str, doc_labels):
    """Parse scene queries against known fixture labels.

    Returns (queries, [Diagnostic]); unresolved labels are diagnostics.
    """
    queries = []
    diags = []
    for ln, body in _tokenize(text):
        toks = body.split()
        col = body.index(toks[0]) + 1
        kw = toks[0]
        opts = {}
        pos = []
        bad = False
        for t in toks[1:]:
            if "=" in t:
                k, v = t.split("=", 1)
                opts[k] = v
            else:
                pos.append(t)
        try:
            if kw == "trace":
                if len(pos) != 1:
                    raise ValueError("expected 'trace <line> [arc=..]'")
                _need_label(pos[0], doc_labels, ln, col, diags)
                queries.append(TraceQuery(
                    pos[0], arc=_opt_float(opts, "arc"),
                    growth=_opt_int(opts, "growth"),
                    two_sided=opts.get("two_sided", "true") != "false"))
            elif kw == "classify":
                if len(pos) != 2:
                    raise ValueError("expected 'classify <point> <line>'")
                _need_label(pos[0], doc_labels, ln, col, diags)
                _need_label(pos[1], doc_labels, ln, col, diags)
                queries.append(ClassifyQuery(
                    pos[0], pos[1], arc=_opt_float(opts, "arc"),
                    growth=_opt_int(opts, "growth")))
            elif kw == "render":
                if len(pos) >= 2 and pos[0] == "fan":
                    _need_label(pos[1], doc_labels, ln, col, diags)
                    region = ("fan", pos[1])
                elif len(pos) >= 2 and pos[0] == "tris":
                    region = ("tris", tuple(int(x) for x in pos[1].split(",")))
                else:
                    raise ValueError("expected 'render fan <vertex>' or "
                                     "'render tris <id,id,...>'")
                paths = tuple(x for x in opts.get("paths", "").split(",") if x)
                for p in paths:
                    _need_label(p, doc_labels, ln, col, diags)
                queries.append(RenderQuery(region, paths, opts.get("out")))
            elif kw == "audit":
                spec = opts.get("rings") or (pos[0] if pos else None)
                if spec is None:
                    raise ValueError("expected 'audit rings=a..b'")
                if ".." in spec:
                    lo, hi = spec.split("..", 1)
                    rings = (int(lo), int(hi))
                else:
                    rings = (int(spec), int(spec))
                queries.append(AuditQuery(rings))
            elif kw == "search":
                fam = opts.pop("family", None) or (pos[0] if pos else None)
                if fam is None:
                    raise ValueError("expected 'search family=<name> ...'")
                queries.append(SearchQuery(fam, dict(opts)))
            else:
                diags.append(Diagnostic(ln, col, "UnknownQuery", kw))
        except (ValueError, OverflowError) as exc:
            diags.append(Diagnostic(ln, col, "BadQuery", str(exc)))
    return queries, diags


def _need_label(label, labels, ln, col, diags):
    if label not in labels:
        diags.append(Diagnostic(ln, col, "UnknownLabel", label))


def _opt_float(opts, key):
    return float(opts[key]) if key in opts else None


def _opt_int(opts, key):
    return int(opts[key]) if key in opts else None


# -- structured reports -----------------------------------------------------


def classification_report(model_name, query, cls, budgets, mode, surface_hash,
                          config=None):
    """JSON-ready report for a classification result."""
    intervals = [{
        "lo": round(i.lo, 9),
        "hi": round(i.hi, 9),
        "status": i.status.kind,
        "witness": [round(x, 12) for x in i.witness],
    } for i in cls.intervals]
    isolated = [{
        "theta": round(i.theta, 9),
        "status": i.status.kind,
    } for i in cls.isolated]
    certs = []
    for i in list(cls.intervals) + list(cls.isolated):
        st = i.status
        if st.kind == "parallel":
            for c in st.certificates:
                entry = {"kind": c.kind}
                if c.kind == "closure":
                    entry["period"] = c.period
                elif c.kind == "ring_escape":
                    entry["escape_ring"] = c.escape_ring
                    entry["audit"] = c.audit_id
                elif c.kind == "flat_separation":
                    entry["detail"] = c.detail
                certs.append(entry)
    return {
        "model": model_name,
        "query": query,
        "result": {"kind": cls.kind, "count": cls.count,
                   "parallel_arcs": cls.parallel_arcs,
                   "crossing_arcs": cls.crossing_arcs,
                   "unknown_arcs": cls.unknown_arcs},
        "evidence": {"intervals": intervals, "isolated": isolated,
                     "certificates": certs},
        "budgets": {"arc": budgets.arc, "growth": budgets.growth},
        "mode": mode,
        "surface": surface_hash,
        "config": config or {},
    }


def dumps_report(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
