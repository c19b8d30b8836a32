"""Parallelism taxonomy of a point with respect to a line.

The direction circle at P (line directions, period 180 degrees) is
partitioned into intervals of uniform behavior bounded by critical
directions: directions whose line hits a vertex within the arc budget,
plus directions whose escaped tails turn exactly parallel to a tail of
the reference line (asymptotic flips).  One witness per interval plus
every boundary direction is classified as Crossing, ParallelCertified
or Unknown, and the counts map onto the taxonomy.

Parallel verdicts are never guessed: they carry a closure certificate,
an audited ring-escape certificate, or a flat-complement separation
certificate (see farfield).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import chart, engine, farfield
from .chart import cross, dot
from .engine import Closure, EdgeCrossing, Ray, VertexCrossing
from .numbers import Scalars
from .surface import (
    SurfacePoint,
    Triangulation,
    canonicalize_point,
    grow_frontier,
    normalize_bary,
    point_at_vertex,
)
from .farfield import (
    BandFrame,
    ClosureCertificate,
    FlatSeparationCertificate,
    RingEscapeCertificate,
    RingMonitor,
    audit_ring_convexity,
)

ELLIPTIC = "elliptic"
EUCLIDEAN = "euclidean"
FINITELY_HYPERBOLIC = "finitely_hyperbolic"
REGULARLY_HYPERBOLIC = "regularly_hyperbolic"
EXTREMELY_HYPERBOLIC = "extremely_hyperbolic"
COMPLETELY_HYPERBOLIC = "completely_hyperbolic"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class Budgets:
    arc: float = 200.0
    growth: int = 1_000_000
    split_depth: int = 48

    def doubled(self) -> "Budgets":
        return Budgets(self.arc * 2, self.growth * 2, self.split_depth + 8)


@dataclass(frozen=True)
class Crossing:
    point: object        # SurfacePoint for located hits, None for far hits
    arc: float
    via_vertices: tuple = ()
    where: str = "traced"

    kind = "crossing"


@dataclass(frozen=True)
class ParallelCertified:
    certificates: tuple
    via_vertices: tuple = ()

    kind = "parallel"


@dataclass(frozen=True)
class Unknown:
    reason: str

    kind = "unknown"


@dataclass
class DirectionInterval:
    lo: float            # degrees in [0, 180)
    hi: float
    status: object
    witness: tuple


@dataclass
class IsolatedDirection:
    theta: float
    direction: tuple
    status: object


@dataclass
class PointClassification:
    kind: str
    count: int = 0
    intervals: list = field(default_factory=list)
    isolated: list = field(default_factory=list)
    parallel_arcs: int = 0
    crossing_arcs: int = 0
    unknown_arcs: int = 0

    def summary(self):
        return {
            "kind": self.kind,
            "count": self.count,
            "parallel_arcs": self.parallel_arcs,
            "crossing_arcs": self.crossing_arcs,
            "unknown_arcs": self.unknown_arcs,
        }


# -- model analysis ----------------------------------------------------------


class ModelAnalysis:
    """Per-surface far-field context shared by every classification."""

    def __init__(self, surf: Triangulation, ctx: Scalars):
        self.surf = surf
        self.ctx = ctx
        self.monitor = RingMonitor(surf)
        self.audits = {}
        self.bands = []
        self.band_tris = {}
        self.flatc = None
        rule = surf.rule.name if surf.rule else ""
        if rule == "silo":
            self.kind = "compact_target"
            for top in (1, 2):
                if len(surf.rings) >= top + 2:
                    band = BandFrame(surf, ctx, top)
                    self.bands.append(band)
                    for t in band.tris:
                        self.band_tris[t] = band
        elif rule in ("flat", "semi_paradoxist"):
            self.kind = "flat_complement"
        else:
            self.kind = "generic"

    def audit(self, ring: int) -> farfield.RingAudit:
        a = self.audits.get(ring)
        if a is None:
            a = audit_ring_convexity(self.surf, ring)
            self.audits[ring] = a
        return a

    def audited_pass(self, ring: int) -> bool:
        if ring < 1 or ring >= len(self.surf.rings) - 1:
            return False
        if any(v in self.surf.frontier for v in self.surf.rings[ring]):
            return False
        try:
            return self.audit(ring).passed
        except Exception:
            return False

    def escape_certifiable(self, ring: int, target_max_ring: int) -> bool:
        if target_max_ring >= ring:
            return False
        if self.surf.rule is None or \
                not self.surf.rule.nonpositive_defect_outside(ring):
            return False
        return self.audited_pass(ring)

    def flat_complement_for(self, lctx: "LineContext") -> farfield.FlatComplement:
        if self.flatc is not None:
            return self.flatc
        surf, ctx = self.surf, self.ctx
        fc = farfield.FlatComplement(surf, ctx, lctx.core_ring,
                                     lctx.tails[0].escape_tri)
        if lctx.cut_ray is not None:
            cut_edges, base_tri, xy, d = lctx.cut_ray
            fc.set_cut_edges(cut_edges)
            frame = fc.corridor_frame(base_tri)
            fc.set_cut_geometry(frame.apply(*xy), frame.apply_vec(*d))
            fc.set_holonomy(fc.compute_holonomy())
            fc.calibrate_cut()
            # The calibrated per-crossing shift must match the holonomy
            # translation in magnitude (its direction is frame relative).
            dn = math.hypot(float(fc.delta[0]), float(fc.delta[1]))
            bn = math.hypot(float(fc.b[0]), float(fc.b[1]))
            if abs(dn - bn) > 1e-6:
                raise ValueError("cut calibration disagrees with holonomy")
        self.flatc = fc
        return fc


# -- reference line context --------------------------------------------------


@dataclass
class TailInfo:
    escape_tri: int
    xy: tuple
    dir: tuple
    arc0: float
    rot: int


@dataclass
class LineContext:
    ray: Ray
    path: engine.GeodesicPath
    surf: Triangulation
    ctx: Scalars
    by_tri: dict
    max_ring: int
    closed: bool
    period: float = None
    core_ring: int = None
    tails: list = None          # TailInfo per end (flat-complement models)
    tail_pieces: list = None    # developed TailData pieces
    tail_dirs: list = None      # developed tail directions
    cut_ray: tuple = None
    on_vertices: frozenset = frozenset()  # vertices the line passes through

    def segments_in(self, tri):
        return self.by_tri.get(tri, ())


def _index_segments(path):
    d = {}
    for seg in path.segments:
        d.setdefault(seg.tri, []).append(seg)
    return d


def _path_vertices(path):
    return frozenset(ev.vertex for _, ev in path.events
                     if isinstance(ev, VertexCrossing))


def build_line_context(surf: Triangulation, ctx: Scalars, ray: Ray,
                       analysis: ModelAnalysis, budgets: Budgets,
                       min_core: int = None) -> LineContext:
    if analysis.kind == "flat_complement":
        core = _default_core_ring(surf, analysis, min_core)
        res_f = _trace_end(surf, ctx, ray, analysis, budgets, None,
                           escape_ring=core)
        back = engine.reverse_ray(surf, ctx, ray)
        res_b = _trace_end(surf, ctx, back, analysis, budgets, None,
                           escape_ring=core)
        if res_f.kind != "escaped" or res_b.kind != "escaped":
            raise ValueError("reference line must escape the core ring")
        path = _stitch(ray, res_f, res_b, surf)
        lctx = LineContext(ray, path, surf, ctx, _index_segments(path),
                           farfield.max_ring_of_path(surf, path.segments),
                           closed=False, core_ring=core,
                           tails=[res_f.tail, res_b.tail],
                           on_vertices=_path_vertices(path))
        lctx.cut_ray = _cut_ray(surf, ctx, analysis, budgets, core)
        fc = analysis.flat_complement_for(lctx)
        pieces = []
        dirs = []
        for t in lctx.tails:
            td = _developed_tail(fc, t)
            dirs.append(td.dir)
            pieces.extend(farfield.split_tail_at_cut(ctx, td, fc))
        lctx.tail_pieces = pieces
        lctx.tail_dirs = dirs
        return lctx
    path = engine.trace(ray, surf, ctx, arc_budget=budgets.arc,
                        growth_budget=len(surf.tris), two_sided=True)
    period = engine.detect_closure(path)
    return LineContext(ray, path, surf, ctx, _index_segments(path),
                       farfield.max_ring_of_path(surf, path.segments),
                       closed=period is not None, period=period,
                       on_vertices=_path_vertices(path))


def _default_core_ring(surf, analysis, min_core=None):
    worst = 0
    for v, d in surf.degree.items():
        if d != 6 and v not in surf.frontier:
            worst = max(worst, surf.ring_of[v])
    k = max(2, worst + 1, min_core or 0)
    while k < len(surf.rings) - 1:
        if analysis.audited_pass(k):
            return k
        k += 1
    raise ValueError("no audited convex ring encloses the core")


def _stitch(ray, res_f, res_b, surf):
    path = engine.GeodesicPath(start=ray, two_sided=True, surface=surf)
    path.segments = [engine.Segment(s.tri, s.b, s.a)
                     for s in reversed(res_b.segments)] + res_f.segments
    path.events = [(-a, ev) for a, ev in reversed(res_b.events)] + res_f.events
    path.arc_length = res_f.arc + res_b.arc
    return path


def _cut_ray(surf, ctx, analysis, budgets, core_ring):
    has_core = any(d != 6 for v, d in surf.degree.items()
                   if v not in surf.frontier)
    if not has_core:
        return None
    fx = surf.labels.get("_cut")
    if fx is None:
        raise ValueError("model with curvature needs a _cut fixture")
    from .builders import resolve_ray
    ray = resolve_ray(surf, ctx, fx)
    res = _trace_end(surf, ctx, ray, analysis, budgets, None,
                     escape_ring=core_ring, follow_past_escape=True)
    if res.tail is None:
        raise ValueError("cut ray failed to escape the core ring")
    cut_edges = set()
    for a, ev in res.events:
        if isinstance(ev, EdgeCrossing) and a >= res.tail.arc0 - 1e-12:
            cut_edges.add(frozenset(surf.edge_vertices(ev.tri, ev.edge)))
    t = res.tail
    return (frozenset(cut_edges), t.escape_tri, t.xy, t.dir)


def _developed_tail(fc, tail: TailInfo) -> farfield.TailData:
    frame = fc.corridor_frame(tail.escape_tri)
    base = frame.apply(*tail.xy)
    d = frame.apply_vec(*tail.dir)
    speed = math.hypot(float(d[0]), float(d[1]))
    return farfield.TailData(base, d, tail.arc0, speed)


# -- one-end tracing with hooks ----------------------------------------------


@dataclass
class EndResult:
    kind: str                 # crossed | escaped | closed | unknown
    segments: list
    events: list
    arc: float
    crossing: tuple = None    # (point, arc, where)
    tail: TailInfo = None
    rings: tuple = ()
    escape_ring: int = None
    closure_period: float = None
    via_vertices: tuple = ()
    frames: list = None       # (tri, Isometry) along the trace
    rot: int = 0              # rotation to the final chart, None after vertex
    band_entry: tuple = None  # (tri, rot) at first band entry
    carrier: int = None       # carrying triangle of the traced ray
    carrier_xy: tuple = None  # ray base point in the carrier chart
    band_tokens: tuple = ()   # collapsed band transit outcomes
    tokens: tuple = ()        # concrete itinerary tokens before any transit


def _trace_end(surf, ctx, ray, analysis, budgets, lctx,
               escape_ring=None, follow_past_escape=False,
               collect_frames=False) -> EndResult:
    segments = []
    events = []
    frames = []
    rings_crossed = []
    via_vertices = []
    band_tokens = []
    tokens = []
    band_entry = None
    arc = 0.0
    cur = ray
    rot = 0
    frame = chart.Isometry.identity(ctx)
    start_xy = chart.xy_of_bary(ctx, ray.point.bary)
    start_tri = ray.point.tri
    start_dir = ray.dir
    monitor = analysis.monitor
    in_band_mode = False  # suppress edge tokens once a transit happened
    vstates = {}

    def vertex_arrival(v, arc_at, outgoing):
        """Crossing when v lies on the reference line; closure on a
        repeated (vertex, outgoing direction) state."""
        if lctx is not None and v in lctx.on_vertices:
            from .surface import vertex_point
            return ("crossed", vertex_point(surf, ctx, v))
        key = (v, outgoing.point.tri,
               _dirkey(ctx, outgoing.dir))
        prev = vstates.get(key)
        if prev is not None and arc_at - prev > 1e-7:
            return ("closed", arc_at - prev)
        vstates[key] = arc_at
        return None

    def result(kind, **kw):
        return EndResult(kind, segments, events, arc,
                         rings=tuple(rings_crossed),
                         via_vertices=tuple(via_vertices),
                         frames=frames if collect_frames else None,
                         rot=rot, band_entry=band_entry,
                         carrier=ray.point.tri, carrier_xy=start_xy,
                         band_tokens=tuple(band_tokens),
                         tokens=tuple(tokens), **kw)

    def certified(k):
        if escape_ring is not None and k >= escape_ring:
            return True
        return lctx is not None and analysis.escape_certifiable(k, lctx.max_ring)

    while True:
        band = analysis.band_tris.get(cur.point.tri) if analysis.band_tris else None
        if band is not None:
            if band_entry is None:
                band_entry = (cur.point.tri, rot)
            hop = _band_hop(surf, ctx, band, cur, arc, events, via_vertices)
            in_band_mode = True
            if hop[0] == "closed":
                arc = hop[1]
                band_tokens.append(("closed", band.top))
                return result("closed", closure_period=hop[2])
            if hop[0] == "unknown":
                return result("unknown")
            if hop[0] in ("top", "bottom"):
                pt, a2, ray2 = hop[1], hop[2], hop[3]
                arc = a2
                band_tokens.append((hop[0], band.top))
                if lctx is not None and _point_on_line(ctx, pt, lctx):
                    return result("crossed", crossing=(pt, a2, "band"))
                if hop[0] == "bottom":
                    kring = band.top + 1
                    rings_crossed.append(kring)
                    if certified(kring):
                        tail = TailInfo(ray2.point.tri,
                                        chart.xy_of_bary(ctx, ray2.point.bary),
                                        ray2.dir, arc, 0)
                        return result("escaped", tail=tail, escape_ring=kring)
                cur = ray2
                rot = None
                continue
            if hop[0] == "vertex_resume":
                cur, arc = hop[1], hop[2]
                band_tokens.append(("v", via_vertices[-1]))
                got = vertex_arrival(via_vertices[-1], arc, cur)
                if got is not None:
                    if got[0] == "crossed":
                        return result("crossed",
                                      crossing=(got[1], arc, "vertex"))
                    return result("closed", closure_period=got[1])
                rot = None
                continue
            return result("unknown")
        if collect_frames:
            frames.append((cur.point.tri, frame))
        try:
            seg, hit = engine.step(cur, surf, ctx)
        except engine.FrontierReached:
            return result("unknown")
        segments.append(seg)
        if lctx is not None:
            got = _hit_reference(ctx, seg, lctx)
            if got is not None:
                x, y = got
                bpt = normalize_bary(ctx, chart.bary_of_xy(ctx, x, y))
                pt = canonicalize_point(SurfacePoint(seg.tri, bpt), surf, ctx)
                d = math.hypot(float(x) - float(seg.a[0]),
                               float(y) - float(seg.a[1]))
                arc = arc + d
                return result("crossed", crossing=(pt, arc, "traced"))
        if len(segments) > 1 and seg.tri == start_tri:
            trec = engine._segment_recurrence(ctx, seg, start_xy, start_dir)
            if trec is not None:
                period = arc + trec * seg.length()
                if period > 1e-7:
                    arc += seg.length()
                    events.append((period, Closure(period)))
                    return result("closed", closure_period=period)
        arc += seg.length()
        exit_b = normalize_bary(ctx, chart.bary_of_xy(ctx, *seg.b))
        if hit[0] == "vertex":
            v = hit[1]
            if v in surf.frontier:
                return result("unknown")
            nxt, ev = engine.cross_vertex(surf, ctx, v, seg.tri, cur.dir)
            events.append((arc, ev))
            via_vertices.append(v)
            if not in_band_mode:
                tokens.append(("v", v))
            got = vertex_arrival(v, arc, nxt)
            if got is not None:
                if got[0] == "crossed":
                    return result("crossed", crossing=(got[1], arc, "vertex"))
                return result("closed", closure_period=got[1])
            ring_info = monitor.vertex_passage(v, seg.tri, nxt.point.tri)
            if collect_frames:
                link = engine.link_iso(surf, ctx, seg.tri, nxt.point.tri)
                frame = frame.compose(link.inverse())
            rot = None
            cur = nxt
        else:
            e = hit[1]
            ring_info = monitor.crossing(seg.tri, e)
            iso = surf.transfer(ctx, seg.tri, e)
            nxt = engine.transfer_edge(surf, ctx, seg.tri, e, exit_b, cur.dir)
            events.append((arc, EdgeCrossing(seg.tri, e,
                                             SurfacePoint(seg.tri, exit_b))))
            if not in_band_mode:
                tokens.append((seg.tri, e))
            if collect_frames:
                frame = frame.compose(iso.inverse())
            if rot is not None:
                rot = (rot + iso.k) % 12
            cur = nxt
        if ring_info is not None:
            k, outward = ring_info
            if outward:
                rings_crossed.append(k)
                if certified(k):
                    tail = TailInfo(cur.point.tri,
                                    chart.xy_of_bary(ctx, cur.point.bary),
                                    cur.dir, arc, rot if rot is not None else 0)
                    if follow_past_escape:
                        res = _follow_straight(surf, ctx, cur, arc, budgets,
                                               segments, events)
                        res.tail = tail
                        return res
                    return result("escaped", tail=tail, escape_ring=k)
        if arc >= budgets.arc:
            return result("unknown")


def _follow_straight(surf, ctx, cur, arc, budgets, segments, events):
    while True:
        try:
            seg, hit = engine.step(cur, surf, ctx)
        except engine.FrontierReached:
            return EndResult("unknown", segments, events, arc)
        segments.append(seg)
        arc += seg.length()
        exit_b = normalize_bary(ctx, chart.bary_of_xy(ctx, *seg.b))
        if hit[0] == "vertex":
            v = hit[1]
            if v in surf.frontier:
                return EndResult("unknown", segments, events, arc)
            cur, ev = engine.cross_vertex(surf, ctx, v, seg.tri, cur.dir)
            events.append((arc, ev))
        else:
            events.append((arc, EdgeCrossing(seg.tri, hit[1],
                                             SurfacePoint(seg.tri, exit_b))))
            cur = engine.transfer_edge(surf, ctx, seg.tri, hit[1], exit_b,
                                       cur.dir)
        if arc >= 6 * budgets.arc:
            return EndResult("unknown", segments, events, arc)


def _dirkey(ctx, d):
    if ctx.exact:
        return (d[0], d[1])
    n = math.hypot(float(d[0]), float(d[1])) or 1.0
    return (round(float(d[0]) / n, 9), round(float(d[1]) / n, 9))


def _hit_reference(ctx, seg, lctx: LineContext):
    for other in lctx.segments_in(seg.tri):
        pts = chart.segment_intersection(ctx, seg.a, seg.b, other.a, other.b)
        if pts:
            return pts[0]
    return None


def _point_on_line(ctx, pt: SurfacePoint, lctx: LineContext) -> bool:
    for other in lctx.segments_in(pt.tri):
        xy = chart.xy_of_bary(ctx, pt.bary)
        if chart.on_segment(ctx, xy, other.a, other.b):
            return True
    return False


def _band_hop(surf, ctx, band, cur, arc, events, via_vertices):
    xy = chart.xy_of_bary(ctx, cur.point.bary)
    exit_ = band.transit(surf, ctx, cur.point.tri, xy, cur.dir)
    if exit_.kind == "closed":
        period = float(band.period)
        events.append((arc + period, Closure(period)))
        return ("closed", arc + period, period)
    if exit_.kind in ("top_vertex", "bottom_vertex"):
        vtx = exit_.vertex
        if vtx in surf.frontier:
            return ("unknown",)
        tri_in, d_in = _band_arrival(surf, ctx, band, vtx, exit_.dir_in)
        try:
            nxt, ev = engine.cross_vertex(surf, ctx, vtx, tri_in, d_in)
        except Exception:
            return ("unknown",)
        events.append((arc + exit_.arc, ev))
        via_vertices.append(vtx)
        return ("vertex_resume", nxt, arc + exit_.arc)
    (u, v), tpar, d_strip = exit_.ray
    from .builders import point_on_edge
    pt = point_on_edge(surf, ctx, u, v, tpar)
    if exit_.kind == "top":
        ray2 = _band_top_ray(surf, ctx, band, u, v, tpar, d_strip)
        return ("top", pt, arc + exit_.arc, ray2)
    ray2 = _band_bottom_ray(surf, ctx, band, u, v, tpar, d_strip)
    return ("bottom", pt, arc + exit_.arc, ray2)


def _band_arrival(surf, ctx, band, vtx, d_strip):
    for t, s in surf.fan_ccw(vtx):
        if t in band.frames:
            return t, band.frames[t].inverse().apply_vec(*d_strip)
    raise ValueError("vertex not adjacent to the band")


def _band_boundary_ray(surf, ctx, band, u, v, tpar, d_strip) -> Ray:
    for t in band.tris:
        tv = surf.tris[t]
        for e in range(3):
            if tv[e] == u and tv[(e + 1) % 3] == v:
                b = [ctx.zero, ctx.zero, ctx.zero]
                b[e] = ctx.one - tpar
                b[(e + 1) % 3] = tpar
                b = normalize_bary(ctx, b)
                d = band.frames[t].inverse().apply_vec(*d_strip)
                return engine.transfer_edge(surf, ctx, t, e, tuple(b), d)
    raise ValueError(f"band boundary edge ({u},{v}) not found")


def _band_bottom_ray(surf, ctx, band, u, v, tpar, d_strip) -> Ray:
    return _band_boundary_ray(surf, ctx, band, u, v, tpar, d_strip)


def _band_top_ray(surf, ctx, band, u, v, tpar, d_strip) -> Ray:
    # The band triangle carries directed edge (v, u) on the top cycle.
    return _band_boundary_ray(surf, ctx, band, v, u, ctx.one - tpar, d_strip)


# -- direction-level classification --------------------------------------------


def classify_direction(P: SurfacePoint, d, lctx: LineContext,
                       analysis: ModelAnalysis, budgets: Budgets):
    """Status of the line through P with chart direction d."""
    return _probe(P, d, lctx, analysis, budgets).status


@dataclass
class Probe:
    dvec: tuple
    fwd: EndResult
    bwd: EndResult
    status: object

    def signature(self):
        return (_sig(self.fwd), _sig(self.bwd))


def _sig(res: EndResult):
    return (res.kind, res.tokens, res.band_tokens, res.escape_ring)


def _probe(P: SurfacePoint, d, lctx, analysis, budgets,
           collect_frames=False) -> Probe:
    surf, ctx = analysis.surf, analysis.ctx
    ray = engine.ray_canonical(surf, ctx, P, d)
    fwd = _trace_end(surf, ctx, ray, analysis, budgets, lctx,
                     escape_ring=lctx.core_ring,
                     collect_frames=collect_frames)
    if fwd.kind == "closed":
        status = _closed_status(fwd, lctx)
        return Probe(d, fwd, fwd, status)
    try:
        back = engine.reverse_ray(surf, ctx, ray)
    except Exception:
        return Probe(d, fwd, fwd, Unknown("reverse ray unavailable"))
    bwd = _trace_end(surf, ctx, back, analysis, budgets, lctx,
                     escape_ring=lctx.core_ring,
                     collect_frames=collect_frames)
    status = _assemble(fwd, bwd, lctx, analysis)
    return Probe(d, fwd, bwd, status)


def _closed_status(res: EndResult, lctx):
    if res.crossing is not None:
        pt, arc, where = res.crossing
        return Crossing(pt, arc, res.via_vertices, where)
    return ParallelCertified((ClosureCertificate(res.closure_period),),
                             res.via_vertices)


def _assemble(fwd: EndResult, bwd: EndResult, lctx: LineContext,
              analysis: ModelAnalysis):
    for res in (fwd, bwd):
        if res.kind == "crossed":
            pt, arc, where = res.crossing
            return Crossing(pt, arc, fwd.via_vertices + bwd.via_vertices,
                            where)
    if fwd.kind == "unknown" or bwd.kind == "unknown":
        return Unknown(f"budget exhausted ({fwd.kind}/{bwd.kind})")
    # Both ends escaped (or one closed without crossing, handled above).
    certs = []
    if analysis.kind == "flat_complement":
        fc = analysis.flat_complement_for(lctx)
        hits = []
        for res in (fwd, bwd):
            td = _developed_tail(fc, res.tail)
            for piece in farfield.split_tail_at_cut(analysis.ctx, td, fc):
                for lpiece in lctx.tail_pieces:
                    got = farfield.tails_meet(analysis.ctx, piece, lpiece,
                                              fc.delta)
                    if got is not None:
                        hits.append(got)
        if hits:
            hits.sort()
            return Crossing(None, hits[0][0],
                            fwd.via_vertices + bwd.via_vertices, "far_field")
        certs.append(FlatSeparationCertificate(
            f"tails vs {len(lctx.tail_pieces)} reference pieces"))
    for res in (fwd, bwd):
        if res.kind == "escaped":
            audit = analysis.audit(res.escape_ring)
            certs.append(RingEscapeCertificate(res.rings, res.escape_ring,
                                               audit.audit_id))
        elif res.kind == "closed":
            certs.append(ClosureCertificate(res.closure_period))
    return ParallelCertified(tuple(certs),
                             fwd.via_vertices + bwd.via_vertices)


# -- the direction partition ---------------------------------------------------


def _halfcirc(ctx, d):
    """Fold a direction vector to the upper half circle (line direction)."""
    x, y = d
    sy = ctx.sign(y)
    if sy < 0 or (sy == 0 and ctx.sign(x) < 0):
        return (-x, -y)
    return (x, y)


def _orient_into(ctx, u, w):
    """Choose w or -w so it lies counterclockwise of u (within 180 deg)."""
    c = ctx.sign(cross(u[0], u[1], w[0], w[1]))
    if c > 0:
        return w
    if c < 0:
        return (-w[0], -w[1])
    if ctx.sign(dot(u[0], u[1], w[0], w[1])) > 0:
        return w
    return (-w[0], -w[1])


def _cone_angle_deg(u, w) -> float:
    """CCW angle from u to w in degrees, in [0, 360)."""
    a = math.degrees(math.atan2(float(cross(u[0], u[1], w[0], w[1])),
                                float(dot(u[0], u[1], w[0], w[1]))))
    return a % 360.0


def _theta_deg(d) -> float:
    t = math.degrees(math.atan2(float(d[1]), float(d[0]))) % 180.0
    return t


def _blend(ctx, u, v, lam_num: int, lam_den: int):
    """Direction strictly between u and v (convex combination)."""
    a = ctx.frac(lam_den - lam_num, lam_den)
    b = ctx.frac(lam_num, lam_den)
    return (u[0] * a + v[0] * b, u[1] * a + v[1] * b)


class _Partitioner:
    def __init__(self, P, lctx, analysis, budgets):
        self.P = P
        self.lctx = lctx
        self.analysis = analysis
        self.budgets = budgets
        self.ctx = analysis.ctx
        self.surf = analysis.surf
        self.cache = {}
        self.P_xy = chart.xy_of_bary(analysis.ctx, P.bary)
        self.intervals = []   # (u, v, probe) closed uniform
        self.unknowns = []    # (u, v)
        self.boundaries = {}  # key -> (dvec, probe)
        self.corner_keys = set()
        self.flip_keys = set()
        self.splits = 0

    def probe(self, d, collect_frames=True) -> Probe:
        key = self._key(d)
        got = self.cache.get(key)
        if got is None:
            got = _probe(self.P, d, self.lctx, self.analysis, self.budgets,
                         collect_frames=collect_frames)
            self.cache[key] = got
        return got

    def _key(self, d):
        d = _halfcirc(self.ctx, d)
        if self.ctx.exact:
            return (d[0], d[1])
        n = math.hypot(float(d[0]), float(d[1])) or 1.0
        return (round(float(d[0]) / n, 12), round(float(d[1]) / n, 12))

    # corner directions seen by a probe, strictly inside the open cone (u, v)
    def _corners_inside(self, pr: Probe, u, v):
        ctx = self.ctx
        surf = self.surf
        out = {}
        cs = chart.corners(ctx)
        for res in (pr.fwd, pr.bwd):
            if not res.frames:
                continue
            inv = engine.link_iso(surf, ctx, self.P.tri, res.carrier).inverse()
            pcx, pcy = res.carrier_xy
            for tri, frame in res.frames:
                for c in cs:
                    px, py = frame.apply(*c)
                    vx, vy = px - pcx, py - pcy
                    if ctx.sign(vx) == 0 and ctx.sign(vy) == 0:
                        continue
                    w0 = inv.apply_vec(vx, vy)
                    self.corner_keys.add(self._key(_halfcirc(ctx, w0)))
                    w = _orient_into(ctx, u, w0)
                    if _strictly_between(ctx, u, v, w):
                        out[self._key(_halfcirc(ctx, w))] = w
        return list(out.values())

    def run(self):
        ctx = self.ctx
        # Interval endpoints are cone-consistent vectors: each interval's
        # second endpoint lies strictly CCW of the first, the last one at
        # 180 degrees unfolded, so convex blends stay inside the cone.
        seeds = [ctx.cos_sin_deg(30 * k) for k in range(6)]
        seeds.append((-ctx.one, ctx.zero))
        work = []
        for i in range(len(seeds) - 1):
            work.append((seeds[i], seeds[i + 1], 0))
        while work:
            u, v, depth = work.pop()
            pu = self.probe(u)
            pv = self.probe(v)
            self.boundaries.setdefault(self._key(_halfcirc(ctx, u)), (u, pu))
            self.boundaries.setdefault(self._key(_halfcirc(ctx, v)), (v, pv))
            width = _cone_angle_deg(u, v)
            raw = self._corners_inside(pu, u, v) + \
                self._corners_inside(pv, u, v)
            cands = []
            for w in raw:
                w = _orient_into(ctx, u, w)
                dw = _cone_angle_deg(u, w)
                if 1e-7 < dw < width - 1e-7:
                    cands.append((dw, w))
            cands.sort(key=lambda x: x[0])
            corners = []
            last = None
            for dw, w in cands:
                if last is None or dw - last > 1e-7:
                    corners.append(w)
                    last = dw
            if corners:
                self.splits += len(corners)
                if self.splits > 3000:
                    self.unknowns.append((u, v))
                    continue
                pts = [u] + corners + [v]
                for i in range(len(pts) - 1):
                    work.append((pts[i], pts[i + 1], depth + 1))
                continue
            if pu.signature() == pv.signature():
                self.intervals.append((u, v, None))
                continue
            if width < 2e-7:
                self.intervals.append((u, v, None))
                continue
            # A boundary endpoint (vertex hit or flip) shows a different
            # signature than the open interval; close out when the interior
            # is uniform just inside both ends.
            pa_d = _blend(ctx, u, v, 1, 1024)
            pb_d = _blend(ctx, u, v, 1023, 1024)
            pra = self.probe(pa_d)
            prb = self.probe(pb_d)
            if pra.signature() == prb.signature():
                self.intervals.append((u, v, None))
                continue
            if depth >= self.budgets.split_depth:
                self.unknowns.append((u, v))
                continue
            m = _blend(ctx, u, v, 1, 2)
            work.append((u, m, depth + 1))
            work.append((m, v, depth + 1))
        self._asymptotic_flips()
        self._finalize()
        return self

    def _asymptotic_flips(self):
        """Split intervals at directions whose tails turn parallel to a
        tail of the reference line (or to the silo band's circles)."""
        ctx = self.ctx
        surf = self.surf
        targets = []
        fc = None
        if self.analysis.kind == "flat_complement":
            fc = self.analysis.flat_complement_for(self.lctx)
            targets = [d for d in self.lctx.tail_dirs]
        out = []
        for (u, v, _) in self.intervals:
            w = _blend(ctx, u, v, 1, 2)
            pr = self.probe(w, collect_frames=False)
            cands = {}
            for res in (pr.fwd, pr.bwd):
                inv = engine.link_iso(surf, ctx, self.P.tri,
                                      res.carrier).inverse()
                if res.kind == "escaped" and res.rot is not None and fc is not None:
                    fk = fc.corridor_frame(res.tail.escape_tri).k
                    for tdir in targets:
                        cand = chart.rotate(ctx, -(res.rot + fk),
                                            *tdir)
                        cand = _orient_into(ctx, u, inv.apply_vec(*cand))
                        if _strictly_between(ctx, u, v, cand):
                            cands[self._key(_halfcirc(ctx, cand))] = cand
                if res.band_entry is not None and res.band_entry[1] is not None:
                    tri, rotb = res.band_entry
                    fk = self.analysis.band_tris[tri].frames[tri].k
                    cand = chart.rotate(ctx, -(rotb + fk), ctx.one, ctx.zero)
                    cand = _orient_into(ctx, u, inv.apply_vec(*cand))
                    if _strictly_between(ctx, u, v, cand):
                        cands[self._key(_halfcirc(ctx, cand))] = cand
            if not cands:
                out.append((u, v, pr))
                continue
            pts = [u] + sorted(cands.values(),
                               key=lambda w_: _cone_angle_deg(u, w_)) + [v]
            for w_ in cands.values():
                self.flip_keys.add(self._key(w_))
            for i in range(len(pts) - 1):
                a, b = pts[i], pts[i + 1]
                wm = _blend(ctx, a, b, 1, 2)
                out.append((a, b, self.probe(wm, collect_frames=False)))
                if i + 1 < len(pts) - 1:
                    self.boundaries.setdefault(
                        self._key(_halfcirc(ctx, pts[i + 1])),
                        (pts[i + 1], self.probe(pts[i + 1],
                                                collect_frames=False)))
        self.intervals = out

    def _finalize(self):
        ctx = self.ctx
        final = []
        for (u, v, pr) in self.intervals:
            if pr is None:
                w = _blend(ctx, u, v, 1, 2)
                pr = self.probe(w, collect_frames=False)
            lo = _theta_deg(u)
            hi = _theta_deg(v)
            if hi <= lo:
                hi += 180.0
            final.append(DirectionInterval(
                lo, hi, pr.status,
                (float(pr.dvec[0]), float(pr.dvec[1]))))
        self.result_intervals = final
        iso = []
        for key, (d, pr) in self.boundaries.items():
            iso.append(IsolatedDirection(_theta_deg(d),
                                         (float(d[0]), float(d[1])),
                                         pr.status))
        iso.sort(key=lambda x: x.theta)
        self.result_isolated = iso
        self.result_unknown = [(_theta_deg(u), _theta_deg(v))
                               for (u, v) in self.unknowns]


def _strictly_between(ctx, u, v, w) -> bool:
    """Is direction w strictly inside the cone from u to v (< 180 deg)?"""
    c1 = ctx.sign(cross(u[0], u[1], w[0], w[1]))
    c2 = ctx.sign(cross(w[0], w[1], v[0], v[1]))
    cw = ctx.sign(cross(u[0], u[1], v[0], v[1]))
    if cw > 0:
        return c1 > 0 and c2 > 0
    if cw == 0:
        # u and v antipodal on the half circle fold; treat as the arc
        # from u through +90 degrees of it
        return c1 > 0
    return False


# -- point-level classification ------------------------------------------------


def classify_point(P: SurfacePoint, lctx: LineContext,
                   analysis: ModelAnalysis, budgets: Budgets) -> PointClassification:
    """Taxonomy of P with respect to the reference line."""
    surf, ctx = analysis.surf, analysis.ctx
    if point_at_vertex(surf, P, ctx) is not None:
        raise ValueError("classification base point must not be a vertex")
    if _point_on_line(ctx, canonicalize_point(P, surf, ctx), lctx):
        raise ValueError("classification base point lies on the line")
    part = _Partitioner(P, lctx, analysis, budgets).run()
    return _tally(part)


def _tally(part) -> PointClassification:
    intervals = part.result_intervals
    isolated = part.result_isolated
    unknown_arcs = len(part.result_unknown)
    par_arcs = sum(1 for i in intervals if i.status.kind == "parallel")
    cross_arcs = sum(1 for i in intervals if i.status.kind == "crossing")
    unknown_arcs += sum(1 for i in intervals if i.status.kind == "unknown")
    iso_par = [i for i in isolated if i.status.kind == "parallel"]
    iso_cross = [i for i in isolated if i.status.kind == "crossing"]
    iso_unknown = [i for i in isolated if i.status.kind == "unknown"]

    def out(kind, count=0):
        return PointClassification(kind, count, intervals, isolated,
                                   par_arcs, cross_arcs, unknown_arcs)

    if unknown_arcs or iso_unknown:
        if par_arcs >= 1 and cross_arcs >= 1:
            return out(REGULARLY_HYPERBOLIC)
        return out(UNDETERMINED)
    if par_arcs == 0:
        npar = len(iso_par)
        if npar == 0:
            return out(ELLIPTIC)
        if npar == 1:
            return out(EUCLIDEAN, 1)
        return out(FINITELY_HYPERBOLIC, npar)
    if cross_arcs >= 1:
        return out(REGULARLY_HYPERBOLIC)
    ncross = len(iso_cross)
    if ncross == 0:
        return out(COMPLETELY_HYPERBOLIC)
    return out(EXTREMELY_HYPERBOLIC, ncross)


def critical_directions(P: SurfacePoint, lctx: LineContext,
                        analysis: ModelAnalysis, budgets: Budgets):
    """Sorted vertex-hitting line directions at P, in degrees [0, 180).

    Found by adaptive subdivision: an interval closes when its endpoint
    itineraries match and the swept corridor holds no vertex; corridor
    corners are returned exactly.
    """
    part = _Partitioner(P, lctx, analysis, budgets).run()
    thetas = []
    for key in part.corner_keys:
        d = key
        thetas.append(math.degrees(math.atan2(float(d[1]), float(d[0]))) % 180.0)
    return sorted(set(round(t, 9) for t in thetas))


# -- other classifier operations -----------------------------------------------


def enclosed_defect(path: engine.GeodesicPath, surf: Triangulation,
                    ctx: Scalars) -> int:
    """Defect sum, in degrees, of the vertices enclosed on the compact
    side of a closed geodesic."""
    if engine.detect_closure(path) is None:
        raise ValueError("path is not closed")
    ctx_local = ctx
    crossed = set()
    for _, ev in path.events:
        if isinstance(ev, EdgeCrossing):
            crossed.add(frozenset((ev.tri,) + (surf.adj[(ev.tri, ev.edge)][0],)))
    # A geodesic running along an edge severs that adjacency link too.
    for seg in path.segments:
        ab = chart.bary_of_xy(ctx_local, *seg.a)
        bb = chart.bary_of_xy(ctx_local, *seg.b)
        for i in range(3):
            if ctx_local.is_zero(ab[i]) and ctx_local.is_zero(bb[i]):
                e = (i + 1) % 3
                nbr = surf.adj.get((seg.tri, e))
                if nbr:
                    crossed.add(frozenset((seg.tri, nbr[0])))
    # Components of the triangle adjacency graph with crossed links removed.
    seen = {}
    comp = 0
    for t0 in range(len(surf.tris)):
        if t0 in seen:
            continue
        stack = [t0]
        seen[t0] = comp
        while stack:
            t = stack.pop()
            for e in range(3):
                nbr = surf.adj.get((t, e))
                if not nbr or nbr[0] in seen:
                    continue
                if frozenset((t, nbr[0])) in crossed:
                    continue
                seen[nbr[0]] = comp
                stack.append(nbr[0])
        comp += 1
    if comp < 2:
        raise ValueError("closed path does not separate the surface")
    # The enclosed side is the one not touching the frontier.
    open_comps = set()
    for t in range(len(surf.tris)):
        for e in range(3):
            if (t, e) not in surf.adj:
                open_comps.add(seen[t])
    inside = [c for c in range(comp) if c not in open_comps]
    if not inside:
        raise ValueError("no disk side found for the closed path")
    total = 0
    for v, d in surf.degree.items():
        if v in surf.frontier:
            continue
        fans = {seen[t] for t, _ in surf.fan_ccw(v)}
        if fans <= set(inside):
            total += 360 - 60 * d
    return total


def connect_by_segments(p: SurfacePoint, q: SurfacePoint,
                        surf: Triangulation, ctx: Scalars):
    """Finite chain of straight in-triangle chords from p to q."""
    p = canonicalize_point(p, surf, ctx)
    q = canonicalize_point(q, surf, ctx)
    if p.tri == q.tri:
        return [(p, q)]
    prev = {p.tri: None}
    queue = [p.tri]
    qi = 0
    while qi < len(queue):
        t = queue[qi]
        qi += 1
        if t == q.tri:
            break
        for e in range(3):
            nbr = surf.adj.get((t, e))
            if nbr and nbr[0] not in prev:
                prev[nbr[0]] = (t, e)
                queue.append(nbr[0])
    if q.tri not in prev:
        raise ValueError("points are not connected")
    hops = []
    t = q.tri
    while prev[t] is not None:
        hops.append(prev[t])
        t = prev[t][0]
    hops.reverse()
    chain = []
    cur = p
    for (t, e) in hops:
        # midpoint of the doorway edge, expressed in triangle t
        b = [ctx.zero, ctx.zero, ctx.zero]
        b[e] = ctx.half
        b[(e + 1) % 3] = ctx.half
        door = canonicalize_point(SurfacePoint(t, tuple(b)), surf, ctx)
        chain.append((cur, door))
        cur = door
    chain.append((cur, q))
    return chain


def find_unjoinable_pair(surf: Triangulation, ctx: Scalars,
                         lctx: LineContext, analysis: ModelAnalysis,
                         budgets: Budgets, candidates):
    """A pair (p, q) with every line through p missing q, or None.

    A point completely hyperbolic with respect to the reference line
    misses every point of that line; q is taken on the line itself, so
    the per-direction certificates double as the pair's evidence.
    """
    for P in candidates:
        cls = classify_point(P, lctx, analysis, budgets)
        if cls.kind == COMPLETELY_HYPERBOLIC:
            qseg = lctx.path.segments[0]
            qb = normalize_bary(ctx, chart.bary_of_xy(
                ctx,
                (qseg.a[0] + qseg.b[0]) * ctx.half,
                (qseg.a[1] + qseg.b[1]) * ctx.half))
            q = canonicalize_point(SurfacePoint(qseg.tri, qb), surf, ctx)
            return P, q, cls
    return None


def ensure_rings(surf: Triangulation, n: int) -> Triangulation:
    """Grow the surface until it has at least n ring cycles."""
    if len(surf.rings) >= n:
        return surf
    return grow_frontier(surf, n - len(surf.rings))


def classify_labeled(surf: Triangulation, ctx: Scalars, point_label: str,
                     line_label: str, budgets: Budgets):
    """Classify a named fixture point against a named fixture line.

    Grows the surface as needed (within the growth budget), then runs
    the interval classifier.  Returns (classification, surf, analysis,
    line context).
    """
    from .builders import resolve_point, resolve_ray
    P0 = resolve_point(surf, ctx, surf.labels[point_label])
    p_ring = max(surf.ring_of[v] for v in surf.tris[P0.tri])
    need = max(p_ring + 4, 7)
    if len(surf.rings) < need and surf.rule is not None:
        want = min(need, len(surf.rings) + 64)
        if len(surf.tris) < budgets.growth:
            surf = ensure_rings(surf, want)
    P = resolve_point(surf, ctx, surf.labels[point_label])
    lray = resolve_ray(surf, ctx, surf.labels[line_label])
    analysis = ModelAnalysis(surf, ctx)
    min_core = None
    if analysis.kind == "flat_complement":
        min_core = max(surf.ring_of[v] for v in surf.tris[P.tri]) + 1
    lctx = build_line_context(surf, ctx, lray, analysis, budgets,
                              min_core=min_core)
    cls = classify_point(P, lctx, analysis, budgets)
    return cls, surf, analysis, lctx


def search_finitely_hyperbolic(configurations, budgets: Budgets):
    """Scan (surface, ctx, line ray, base points) configurations for
    candidate finitely hyperbolic points.

    A candidate must show only isolated parallel directions, each passing
    through a degree-7 vertex, and no parallel arc; reported candidates
    keep an undetermined caveat, never a proof.
    """
    out = []
    for (name, surf, ctx, lray, points) in configurations:
        analysis = ModelAnalysis(surf, ctx)
        min_core = None
        if analysis.kind == "flat_complement":
            min_core = max(max(surf.ring_of[v] for v in surf.tris[P.tri])
                           for P in points) + 1
        lctx = build_line_context(surf, ctx, lray, analysis, budgets,
                                  min_core=min_core)
        for P in points:
            try:
                cls = classify_point(P, lctx, analysis, budgets)
            except ValueError:
                continue  # probe on the line or at a vertex
            if cls.kind != FINITELY_HYPERBOLIC:
                continue
            # Only isolated parallels pinned to a line through a degree-7
            # vertex exploit the isolation property; anything else is not
            # a candidate.
            iso_par = [i for i in cls.isolated if i.status.kind == "parallel"]
            pinned = bool(iso_par) and all(
                any(surf.degree.get(v) == 7
                    for v in getattr(i.status, "via_vertices", ()))
                for i in iso_par)
            if not pinned:
                continue
            out.append({
                "model": name,
                "point": P,
                "classification": cls,
                "caveat": "finite-budget evidence only, not a proof",
            })
    return out
