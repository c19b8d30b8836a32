"""Survey the parallelism taxonomy around each model's fixtures.

Classifies centroids of triangles near the interesting regions and
prints a map, used to choose and freeze the named fixture placements.

Run:  python3 scripts/calibrate_fixtures.py [semi|silo|flat]
"""

import math
import sys
import time

sys.path.insert(0, "src")

from smfgeo.numbers import Scalars
from smfgeo.builders import (build_flat_plane, build_semi_paradoxist,
                             build_silo, resolve_point, resolve_ray)
from smfgeo import classify as C
from smfgeo import engine as E
from smfgeo import chart as ch
from smfgeo.surface import SurfacePoint

FLOAT = Scalars("float")
SHORT = {
    "elliptic": "ell", "euclidean": "EUC", "finitely_hyperbolic": "FIN",
    "regularly_hyperbolic": "reg", "extremely_hyperbolic": "EXT",
    "completely_hyperbolic": "CPL", "undetermined": "???",
}


def dev_positions(surf, ctx, base_tri, max_ring):
    """Approximate developed centroid per triangle via BFS (winding-naive)."""
    frames = {base_tri: ch.Isometry.identity(ctx)}
    order = [base_tri]
    qi = 0
    while qi < len(order):
        t = order[qi]
        qi += 1
        for e in range(3):
            nbr = surf.adj.get((t, e))
            if not nbr or nbr[0] in frames:
                continue
            if max(surf.ring_of[v] for v in surf.tris[nbr[0]]) > max_ring:
                continue
            frames[nbr[0]] = frames[t].compose(surf.transfer(ctx, t, e).inverse())
            order.append(nbr[0])
    cs = ch.corners(ctx)
    cx = sum(c[0] for c in cs) / 3
    cy = sum(c[1] for c in cs) / 3
    return {t: tuple(float(x) for x in f.apply(cx, cy)) for t, f in frames.items()}


def survey_semi(max_ring=4):
    surf = build_semi_paradoxist(6)
    budget = C.Budgets()
    surf = C.ensure_rings(surf, max_ring + 5)
    analysis = C.ModelAnalysis(surf, FLOAT)
    lray = resolve_ray(surf, FLOAT, surf.labels["l"])
    lctx = C.build_line_context(surf, FLOAT, lray, analysis, budget,
                                min_core=max_ring + 1)
    pos = dev_positions(surf, FLOAT, 0, max_ring)
    rows = {}
    t0 = time.time()
    for t, (x, y) in sorted(pos.items()):
        P = SurfacePoint(t, (FLOAT.of(1) / 3,) * 3)
        try:
            cls = C.classify_point(P, lctx, analysis, budget)
            tag = SHORT[cls.kind]
        except ValueError:
            tag = "onl"
        except Exception:
            tag = "ERR"
        rows.setdefault(round(y / 0.45), []).append((x, tag, t))
    for yk in sorted(rows, reverse=True):
        line = sorted(rows[yk])
        print(f"y~{yk * 0.45:6.2f}: " + "  ".join(f"{tag}@t{t}({x:+.1f})"
                                                  for x, tag, t in line))
    print(f"[{time.time() - t0:.0f}s]")


def survey_named(model):
    if model == "silo":
        surf = build_silo(6)
        names = ("P", "R", "Q", "Qp", "Qpp")
    elif model == "flat":
        surf = build_flat_plane(4)
        names = ("P",)
    else:
        surf = build_semi_paradoxist(6)
        names = ("P", "Q", "R")
    budget = C.Budgets()
    for name in names:
        t0 = time.time()
        cls, surf, _, _ = C.classify_labeled(surf, FLOAT, name, "l", budget)
        print(f"{name:4s} -> {cls.kind:24s} count={cls.count} "
              f"par={cls.parallel_arcs} cross={cls.crossing_arcs} "
              f"unk={cls.unknown_arcs} [{time.time() - t0:.1f}s]")


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "semi"
    if which == "semi-map":
        survey_semi()
    else:
        survey_named(which)
