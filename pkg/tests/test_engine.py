import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from smfgeo import chart
from smfgeo.builders import (
    build_flat_plane,
    build_semi_paradoxist,
    build_silo,
    middle_line_ray,
    resolve_point,
    resolve_ray,
    straddle_pair,
)
from smfgeo.engine import (
    Closure,
    EdgeCrossing,
    FrontierReached,
    Ray,
    VertexCrossing,
    cross_vertex,
    detect_closure,
    fan_frames,
    intersect_paths,
    line_through,
    make_ray,
    reverse_ray,
    step,
    trace,
    transfer_edge,
    unfold_strip,
)
from smfgeo.numbers import Scalars
from smfgeo.surface import SurfacePoint, canonicalize_point, normalize_bary

FLOAT = Scalars("float")
EXACT = Scalars("exact")
THIRD = Fraction(1, 3)
CENTROID = (THIRD, THIRD, THIRD)


@pytest.fixture(scope="module")
def flat3():
    return build_flat_plane(3)


@pytest.fixture(scope="module")
def semi5():
    return build_semi_paradoxist(5)


@pytest.fixture(scope="module")
def silo3():
    return build_silo(3)


def fan_angle_sides(surf, ctx, vertex, tri_in, d_in, out_ray):
    """Independent oracle: fan angles between incoming and outgoing lines.

    Unfolds the full fan and accumulates sector angles from the reversed
    incoming direction to the outgoing direction, counterclockwise.
    Returns (ccw_side, cw_side) in degrees.
    """
    slot = surf.vertex_slot(tri_in, vertex)
    frames = fan_frames(surf, ctx, vertex, (tri_in, slot))
    deg = surf.degree[vertex]
    cone = 60.0 * deg
    bx, by = frames[0][2].apply_vec(-d_in[0], -d_in[1])
    cs = chart.corners(ctx)

    def within(frame, s, w):
        ex, ey = frame.apply_vec(cs[(s + 1) % 3][0] - cs[s][0],
                                 cs[(s + 1) % 3][1] - cs[s][1])
        ex, ey = float(ex), float(ey)
        ang = math.degrees(
            math.atan2(ex * w[1] - ey * w[0], ex * w[0] + ey * w[1]))
        return ang % 360.0

    base = within(frames[0][2], frames[0][1], (float(bx), float(by)))
    out_t = out_ray.point.tri
    j = next(i for i, (t, _, _) in enumerate(frames) if t == out_t)
    frame = frames[j][2]
    wx, wy = frame.apply_vec(*out_ray.dir)
    off = within(frame, frames[j][1], (float(wx), float(wy)))
    ccw = (60.0 * j + off - base) % cone
    return ccw, cone - ccw


class TestStep:
    def test_centroid_to_edge_midpoint(self, flat3):
        # Aim at the midpoint of local edge 0 from the centroid.
        cs = chart.corners(EXACT)
        mid = ((cs[0][0] + cs[1][0]) * EXACT.half, (cs[0][1] + cs[1][1]) * EXACT.half)
        c = chart.xy_of_bary(EXACT, tuple(EXACT.of(x) for x in CENTROID))
        ray = make_ray(flat3, EXACT, 0, CENTROID, (mid[0] - c[0], mid[1] - c[1]))
        seg, hit = step(ray, flat3, EXACT)
        assert hit[0] == "edge" and hit[1] == 0
        b = normalize_bary(EXACT, chart.bary_of_xy(EXACT, *seg.b))
        assert b[0] == EXACT.half and b[1] == EXACT.half

    def test_centroid_to_vertex(self, flat3):
        cs = chart.corners(EXACT)
        c = chart.xy_of_bary(EXACT, tuple(EXACT.of(x) for x in CENTROID))
        ray = make_ray(flat3, EXACT, 0, CENTROID,
                       (cs[2][0] - c[0], cs[2][1] - c[1]))
        seg, hit = step(ray, flat3, EXACT)
        assert hit[0] == "vertex"
        assert hit[1] == flat3.tris[0][2]

    @settings(max_examples=300, deadline=None)
    @given(data=st.data())
    def test_chord_length_at_most_one(self, data):
        surf = build_flat_plane(2)
        tri = data.draw(st.integers(0, surf.n_triangles() - 1))
        b = [data.draw(st.integers(1, 7)) for _ in range(3)]
        s = sum(b)
        bary = tuple(Fraction(x, s) for x in b)
        theta = data.draw(st.floats(0, 359.9))
        try:
            ray = make_ray(surf, FLOAT, tri, bary, FLOAT.direction(theta))
            seg, _ = step(ray, surf, FLOAT)
        except FrontierReached:
            return
        assert seg.length() <= 1.0 + 1e-9


class TestBulkInvariants:
    def test_chord_lengths_10k_random_rays(self, flat3):
        rng = random.Random(99)
        n = 0
        while n < 10_000:
            tri = rng.randrange(flat3.n_triangles())
            w = [rng.random() + 1e-3 for _ in range(3)]
            s = sum(w)
            bary = tuple(x / s for x in w)
            theta = rng.uniform(0, 360)
            try:
                ray = make_ray(flat3, FLOAT, tri, bary, FLOAT.direction(theta))
                seg, _ = step(ray, flat3, FLOAT)
            except FrontierReached:
                continue
            assert seg.length() <= 1.0 + 1e-9
            n += 1

    def test_transfer_collinearity_10k_random_crossings(self, flat3):
        # Unfold oracle: the gluing isometry applied to the incoming
        # direction must match the transferred direction exactly.
        rng = random.Random(7)
        keys = sorted(flat3.adj)
        cs = chart.corners(FLOAT)
        n = 0
        while n < 10_000:
            t, e = keys[rng.randrange(len(keys))]
            split = rng.uniform(0.05, 0.95)
            b = [0.0, 0.0, 0.0]
            b[e] = 1.0 - split
            b[(e + 1) % 3] = split
            ex = cs[(e + 1) % 3][0] - cs[e][0]
            ey = cs[(e + 1) % 3][1] - cs[e][1]
            along = rng.uniform(-2.0, 2.0)
            d = (ex * along + ey, ey * along - ex)  # outward component
            nxt = transfer_edge(flat3, FLOAT, t, e, tuple(b), d)
            iso = flat3.transfer(FLOAT, t, e)
            dd = iso.apply_vec(*d)
            c = dd[0] * nxt.dir[1] - dd[1] * nxt.dir[0]
            norm = math.hypot(*dd) * math.hypot(*nxt.dir)
            assert abs(c) / norm < 1e-9
            n += 1


class TestTransfer:
    def test_shared_point_same_split(self, flat3):
        half = EXACT.half
        # Exit through edge 0 of triangle 0 at its midpoint.
        exit_b = (half, half, EXACT.zero)
        d = (EXACT.zero, EXACT.of(-1))  # pointing out of the triangle
        nxt = transfer_edge(flat3, EXACT, 0, 0, exit_b, d)
        t2, e2 = flat3.adj[(0, 0)]
        assert nxt.point.tri == t2
        assert nxt.point.bary[e2] == half and nxt.point.bary[(e2 + 1) % 3] == half

    def test_perpendicular_stays_perpendicular(self, flat3):
        half = EXACT.half
        exit_b = (half, half, EXACT.zero)
        d = (EXACT.zero, EXACT.of(-1))  # perpendicular to edge 0, outward
        nxt = transfer_edge(flat3, EXACT, 0, 0, exit_b, d)
        t2, e2 = flat3.adj[(0, 0)]
        cs = chart.corners(EXACT)
        ex = cs[(e2 + 1) % 3][0] - cs[e2][0]
        ey = cs[(e2 + 1) % 3][1] - cs[e2][1]
        assert chart.dot(ex, ey, *nxt.dir) == EXACT.zero

    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_unfold_collinearity(self, data):
        # Oracle: unfold the two charts with the gluing isometry and check
        # the directions agree exactly.
        surf = build_flat_plane(2)
        keys = sorted(surf.adj)
        t, e = keys[data.draw(st.integers(0, len(keys) - 1))]
        split = Fraction(data.draw(st.integers(1, 9)), 10)
        b = [EXACT.zero] * 3
        b[e] = EXACT.of(1 - split)
        b[(e + 1) % 3] = EXACT.of(split)
        num = data.draw(st.integers(-3, 3))
        den = data.draw(st.integers(1, 4))
        # Direction with an inward component relative to edge e.
        cs = chart.corners(EXACT)
        ex, ey = cs[(e + 1) % 3][0] - cs[e][0], cs[(e + 1) % 3][1] - cs[e][1]
        nx, ny = -ey, ex  # inward normal (CCW triangle keeps interior left)
        d = (ex * EXACT.frac(num, den) - nx, ey * EXACT.frac(num, den) - ny)
        nxt = transfer_edge(surf, EXACT, t, e, tuple(b), d)
        iso = surf.transfer(EXACT, t, e)
        dd = iso.apply_vec(*d)
        assert chart.cross(dd[0], dd[1], *nxt.dir) == EXACT.zero
        assert chart.dot(dd[0], dd[1], *nxt.dir) > EXACT.zero


class TestCrossVertex:
    def test_degree_6_goes_straight(self, flat3):
        # Any incoming direction continues collinearly in the unfolded fan.
        interior6 = next(v for v, d in flat3.degree.items()
                         if d == 6 and v not in flat3.frontier)
        t, s = flat3.incident(interior6)
        cs = chart.corners(EXACT)
        c = chart.xy_of_bary(EXACT, tuple(EXACT.of(x) for x in CENTROID))
        d_in = (cs[s][0] - c[0], cs[s][1] - c[1])
        out, ev = cross_vertex(flat3, EXACT, interior6, t, d_in)
        ccw, cw = fan_angle_sides(flat3, EXACT, interior6, t, d_in, out)
        assert ccw == pytest.approx(180.0, abs=1e-9)
        assert cw == pytest.approx(180.0, abs=1e-9)
        assert ev.cone_angle_deg == 360

    @pytest.mark.parametrize("degree,expected", [(5, 150.0), (6, 180.0), (7, 210.0)])
    def test_equal_angle_rule_along_edge(self, semi5, degree, expected):
        surf = semi5
        v = {5: 0, 7: 1}.get(degree)
        if v is None:
            v = next(w for w, d in surf.degree.items()
                     if d == 6 and w not in surf.frontier)
        ray = middle_line_ray(surf, EXACT, v)
        seg, hit = step(ray, surf, EXACT)
        assert hit == ("vertex", v)
        out, ev = cross_vertex(surf, EXACT, v, ray.point.tri, ray.dir)
        ccw, cw = fan_angle_sides(surf, EXACT, v, ray.point.tri, ray.dir, out)
        assert ccw == pytest.approx(expected, abs=1e-9)
        assert cw == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("theta", [7.0, 23.0, 41.0, 55.0])
    def test_equal_angle_rule_generic_incoming(self, semi5, theta):
        # Arbitrary arrival directions: both side angles equal half the
        # cone angle, for all three degrees.
        flat6 = next(v for v, d in semi5.degree.items()
                     if d == 6 and v not in semi5.frontier)
        for v in (0, 1, flat6):
            t, s = semi5.incident(v)
            cs = chart.corners(FLOAT)
            # arrive at the corner from a point on the opposite edge
            lam = theta / 100.0
            px = cs[(s + 1) % 3][0] * (1 - lam) + cs[(s + 2) % 3][0] * lam
            py = cs[(s + 1) % 3][1] * (1 - lam) + cs[(s + 2) % 3][1] * lam
            d_in = (cs[s][0] - px, cs[s][1] - py)
            out, ev = cross_vertex(semi5, FLOAT, v, t, d_in)
            ccw, cw = fan_angle_sides(semi5, FLOAT, v, t, d_in, out)
            half = 30.0 * semi5.degree[v]
            assert ccw == pytest.approx(half, abs=1e-9)
            assert cw == pytest.approx(half, abs=1e-9)

    def test_degree7_line_isolation(self, semi5):
        # A line through a degree-7 vertex is isolated: perturbing its
        # direction by any small nonzero angle leaves a direction gap of
        # about 30 degrees just past the vertex, no matter how small the
        # perturbation.
        import math as m
        ray = middle_line_ray(semi5, FLOAT, 1)
        seg, hit = step(ray, semi5, FLOAT)
        assert hit == ("vertex", 1)
        out, ev = cross_vertex(semi5, FLOAT, 1, ray.point.tri, ray.dir)
        out_theta = m.atan2(float(out.dir[1]), float(out.dir[0]))
        for delta in (1e-3, 1e-5, 1e-7):
            for sign in (1, -1):
                c, s = m.cos(sign * delta), m.sin(sign * delta)
                d2 = (ray.dir[0] * c - ray.dir[1] * s,
                      ray.dir[0] * s + ray.dir[1] * c)
                p2 = trace(make_ray(semi5, FLOAT, ray.point.tri,
                                    tuple(float(x) for x in ray.point.bary), d2),
                           semi5, FLOAT, arc_budget=3.0, growth_budget=10**6)
                hitseg = [sg for sg in p2.segments if sg.tri == ev.tri_out]
                if not hitseg:
                    continue
                sg = hitseg[0]
                th = m.atan2(sg.b[1] - sg.a[1], sg.b[0] - sg.a[0])
                gap = abs((m.degrees(th - out_theta) + 180) % 360 - 180)
                assert gap > 25.0, (delta, sign, gap)

    def test_degree5_bisects_opposite_triangle(self, semi5):
        # Incoming along an edge: outgoing runs through the middle of the
        # opposite triangle (equal barycentric weights on the far edge).
        ray = middle_line_ray(semi5, EXACT, 0)
        out, _ = cross_vertex(semi5, EXACT, 0, ray.point.tri, ray.dir)
        seg, hit = step(out, semi5, EXACT)
        b = normalize_bary(EXACT, chart.bary_of_xy(EXACT, *seg.b))
        nz = sorted(float(x) for x in b if not EXACT.is_zero(x))
        assert nz == pytest.approx([0.5, 0.5])


class TestTrace:
    def test_flat_trace_is_straight(self, flat3):
        ray = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(23.0))
        path = trace(ray, flat3, FLOAT, arc_budget=3.0, growth_budget=len(flat3.tris))
        strip = unfold_strip(path, path.surface, FLOAT)
        pts = strip.polyline
        assert len(pts) >= 3
        x0, y0 = pts[0]
        x1, y1 = pts[-1]
        for (x, y) in pts[1:-1]:
            d = abs((x1 - x0) * (y - y0) - (y1 - y0) * (x - x0))
            assert d < 1e-9

    def test_arc_length_additivity(self, flat3):
        ray = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(37.0))
        path = trace(ray, flat3, FLOAT, arc_budget=2.5, growth_budget=10**6)
        assert path.arc_length == pytest.approx(
            sum(s.length() for s in path.segments))

    def test_time_reversal(self, silo3):
        ray = make_ray(silo3, FLOAT, 20, (0.21, 0.33, 0.46), FLOAT.direction(74.0))
        path = trace(ray, silo3, FLOAT, arc_budget=4.0, growth_budget=10**6)
        # Reverse from the terminal state and trace back the same length.
        last = path.segments[-1]
        dx = last.b[0] - last.a[0]
        dy = last.b[1] - last.a[1]
        endb = normalize_bary(FLOAT, chart.bary_of_xy(FLOAT, *last.b))
        back = make_ray(path.surface, FLOAT, last.tri, endb, (-dx, -dy))
        rpath = trace(back, path.surface, FLOAT,
                      arc_budget=path.arc_length + 1e-6, growth_budget=10**6)
        # Entry points of the forward trace, walked from its end, must
        # match the reverse trace's exit points in order.
        fwd = [canonicalize_point(
            SurfacePoint(s.tri, normalize_bary(FLOAT, chart.bary_of_xy(FLOAT, *s.a))),
            path.surface, FLOAT) for s in path.segments]
        rev = [canonicalize_point(
            SurfacePoint(s.tri, normalize_bary(FLOAT, chart.bary_of_xy(FLOAT, *s.b))),
            rpath.surface, FLOAT) for s in rpath.segments]
        # Skip fwd[0]: the original start is mid-triangle, not an event
        # boundary, so the reverse trace passes over it.
        n = min(len(fwd) - 1, len(rev))
        assert n >= len(fwd) - 2
        for k in range(n):
            p, q = fwd[len(fwd) - 1 - k], rev[k]
            assert p.tri == q.tri
            for x, y in zip(p.bary, q.bary):
                assert float(x) == pytest.approx(float(y), abs=1e-7)

    def test_silo_circle_closes_with_period_5(self, silo3):
        line = resolve_ray(silo3, FLOAT, silo3.labels["l"])
        path = trace(line, silo3, FLOAT, arc_budget=20.0, growth_budget=10**6)
        period = detect_closure(path)
        assert period == pytest.approx(5.0, abs=1e-9)

    def test_silo_circle_exact_mode(self, silo3):
        line = resolve_ray(silo3, EXACT, silo3.labels["l"])
        path = trace(line, silo3, EXACT, arc_budget=20.0, growth_budget=10**6)
        assert detect_closure(path) == 5.0

    def test_flat_line_never_closes(self, flat3):
        ray = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(10.0))
        path = trace(ray, flat3, FLOAT, arc_budget=30.0, growth_budget=10**6)
        assert detect_closure(path) is None

    def test_closed_path_retrace_same_period(self, silo3):
        line = resolve_ray(silo3, FLOAT, silo3.labels["l"])
        path = trace(line, silo3, FLOAT, arc_budget=20.0, growth_budget=10**6)
        # Re-trace from a point half way along the first segment.
        seg = path.segments[0]
        mx = (seg.a[0] + seg.b[0]) / 2
        my = (seg.a[1] + seg.b[1]) / 2
        b = normalize_bary(FLOAT, chart.bary_of_xy(FLOAT, mx, my))
        ray2 = make_ray(path.surface, FLOAT, seg.tri, b,
                        (seg.b[0] - seg.a[0], seg.b[1] - seg.a[1]))
        path2 = trace(ray2, path.surface, FLOAT, arc_budget=20.0,
                      growth_budget=10**6)
        assert detect_closure(path2) == pytest.approx(5.0, abs=1e-9)

    def test_trace_determinism(self, silo3):
        ray = make_ray(silo3, FLOAT, 20, (0.2, 0.3, 0.5), FLOAT.direction(67.0))
        p1 = trace(ray, silo3, FLOAT, arc_budget=15.0, growth_budget=10**6)
        p2 = trace(ray, silo3, FLOAT, arc_budget=15.0, growth_budget=10**6)
        assert [(s.tri, s.a, s.b) for s in p1.segments] == \
            [(s.tri, s.a, s.b) for s in p2.segments]
        assert [(a, type(e).__name__) for a, e in p1.events] == \
            [(a, type(e).__name__) for a, e in p2.events]
        assert p1.arc_length == p2.arc_length

    def test_grow_on_demand(self):
        surf = build_flat_plane(1)
        ray = make_ray(surf, FLOAT, 0, CENTROID, FLOAT.direction(11.0))
        path = trace(ray, surf, FLOAT, arc_budget=6.0, growth_budget=10**5)
        assert path.surface.n_triangles() > surf.n_triangles()
        assert any(isinstance(ev, type(path.events[-1][1]))
                   for _, ev in path.events)

    def test_growth_limit_event(self):
        surf = build_flat_plane(1)
        ray = make_ray(surf, FLOAT, 0, CENTROID, FLOAT.direction(11.0))
        path = trace(ray, surf, FLOAT, arc_budget=50.0, growth_budget=10)
        from smfgeo.engine import GrowthLimit
        assert any(isinstance(ev, GrowthLimit) for _, ev in path.events)


class TestStraddle:
    def test_elliptic_straddle_lines_converge_and_meet(self, semi5):
        a, b = straddle_pair(semi5, FLOAT, 0)
        pa = trace(a, semi5, FLOAT, arc_budget=10.0, growth_budget=10**6)
        pb = trace(b, pa.surface, FLOAT, arc_budget=10.0, growth_budget=10**6)
        pts = intersect_paths(pa, pb, pb.surface, FLOAT)
        assert len(pts) >= 1

    def test_hyperbolic_straddle_lines_diverge(self, semi5):
        a, b = straddle_pair(semi5, FLOAT, 1)
        pa = trace(a, semi5, FLOAT, arc_budget=50.0, growth_budget=10**6)
        pb = trace(b, pa.surface, FLOAT, arc_budget=50.0, growth_budget=10**6)
        pts = intersect_paths(pa, pb, pb.surface, FLOAT)
        assert pts == []


class TestIntersections:
    def test_two_lines_one_triangle(self, flat3):
        a = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(0.0))
        b = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(77.0))
        pa = trace(a, flat3, FLOAT, arc_budget=0.4, growth_budget=10**6)
        pb = trace(b, flat3, FLOAT, arc_budget=0.4, growth_budget=10**6)
        pts = intersect_paths(pa, pb, flat3, FLOAT)
        assert len(pts) == 1
        c = canonicalize_point(SurfacePoint(0, tuple(FLOAT.of(x) for x in CENTROID)),
                               flat3, FLOAT)
        assert pts[0].tri == c.tri

    def test_crossing_on_shared_edge_counts_once(self, flat3):
        # Both paths pass through the same edge point transversally.
        half = Fraction(1, 2)
        a = make_ray(flat3, FLOAT, 0, (half, half, Fraction(0)),
                     FLOAT.direction(90.0))
        b = make_ray(flat3, FLOAT, 0, (half, half, Fraction(0)),
                     FLOAT.direction(150.0))
        pa = trace(a, flat3, FLOAT, arc_budget=1.0, growth_budget=10**6)
        pb = trace(b, flat3, FLOAT, arc_budget=1.0, growth_budget=10**6)
        pts = intersect_paths(pa, pb, flat3, FLOAT)
        assert len(pts) == 1

    def test_self_intersection_brute_force_oracle(self, silo3):
        # A near-horizontal helix on the silo cylinder self-intersects after
        # one winding; brute force all segment pairs as the oracle.
        p = resolve_point(silo3, FLOAT, silo3.labels["P"])
        ray = make_ray(silo3, FLOAT, p.tri, tuple(float(x) for x in p.bary),
                       FLOAT.direction(2.0))
        path = trace(ray, silo3, FLOAT, arc_budget=11.0, growth_budget=10**6)
        pts = intersect_paths(path, path, path.surface, FLOAT)
        brute = set()
        segs = path.segments
        for i in range(len(segs)):
            for j in range(i + 2, len(segs)):
                if segs[i].tri != segs[j].tri:
                    continue
                got = chart.segment_intersection(
                    FLOAT, segs[i].a, segs[i].b, segs[j].a, segs[j].b)
                for x, y in got:
                    bp = canonicalize_point(
                        SurfacePoint(segs[i].tri,
                                     normalize_bary(FLOAT, chart.bary_of_xy(FLOAT, x, y))),
                        path.surface, FLOAT)
                    brute.add((bp.tri, tuple(round(float(w), 6) for w in bp.bary)))
        got_keys = {(p.tri, tuple(round(float(w), 6) for w in p.bary)) for p in pts}
        assert got_keys == brute


class TestUnfold:
    def test_flat_polyline_single_direction(self, flat3):
        ray = make_ray(flat3, FLOAT, 0, CENTROID, FLOAT.direction(19.0))
        path = trace(ray, flat3, FLOAT, arc_budget=2.0, growth_budget=10**6)
        strip = unfold_strip(path, path.surface, FLOAT)
        assert strip.bends == []

    def test_degree5_bend_is_30(self, semi5):
        ray = middle_line_ray(semi5, FLOAT, 0)
        path = trace(ray, semi5, FLOAT, arc_budget=2.0, growth_budget=10**6)
        strip = unfold_strip(path, path.surface, FLOAT)
        assert (0, 30) in strip.bends

    def test_degree7_bend_is_minus_30(self, semi5):
        ray = middle_line_ray(semi5, FLOAT, 1)
        path = trace(ray, semi5, FLOAT, arc_budget=2.0, growth_budget=10**6)
        strip = unfold_strip(path, path.surface, FLOAT)
        assert (1, -30) in strip.bends

    def test_unfolded_strip_edges_glue(self, silo3):
        ray = make_ray(silo3, FLOAT, 20, (0.2, 0.3, 0.5), FLOAT.direction(33.0))
        path = trace(ray, silo3, FLOAT, arc_budget=3.0, growth_budget=10**6)
        strip = unfold_strip(path, path.surface, FLOAT)
        # Consecutive placed triangles share two corners exactly (the
        # unfolded shared edge) unless a vertex crossing intervened.
        vertex_arcs = {round(a, 9) for a, ev in path.events
                       if isinstance(ev, VertexCrossing)}
        if not vertex_arcs:
            for (t1, pts1), (t2, pts2) in zip(strip.triangles, strip.triangles[1:]):
                shared = 0
                for p in pts1:
                    for q in pts2:
                        if abs(p[0] - q[0]) < 1e-9 and abs(p[1] - q[1]) < 1e-9:
                            shared += 1
                assert shared == 2
