"""Independent reference implementations used only by the tests."""

import math
from collections import Counter, deque

import numpy as np

R = 6_371_008.8


def hav(p, q):
    lat1, lon1 = p
    lat2, lon2 = q
    a = math.sin(math.radians(lat2 - lat1) / 2) ** 2 + math.cos(math.radians(lat1)) * math.cos(
        math.radians(lat2)
    ) * math.sin(math.radians(lon2 - lon1) / 2) ** 2
    return 2 * R * math.asin(math.sqrt(min(1.0, a)))


def bfs_components(n, adjacent):
    label = [-1] * n
    comp = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = comp
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in range(n):
                if label[v] < 0 and adjacent(u, v):
                    label[v] = comp
                    queue.append(v)
        comp += 1
    return label


def bfs_ssi(points, alpha=2.0, dist=None):
    """Per-scale entropies from a fresh BFS labelling of the threshold graph at every k."""
    n = len(points)
    if dist is None:
        dist = [[hav(points[i], points[j]) for j in range(n)] for i in range(n)]
    entropies = []
    k = 0
    while True:
        k += 1
        r = alpha ** k
        labels = bfs_components(n, lambda u, v: dist[u][v] <= r)
        counts = Counter(labels).values()
        e = -sum((c / n) * math.log(c / n, 2) for c in counts)
        entropies.append((k, abs(e)))
        if len(counts) == 1:
            return entropies


def weibull_q3(values):
    return float(np.quantile(np.asarray(values, dtype=float), 0.75, method="weibull"))


def brute_medoid(points):
    sums = [sum(hav(p, q) for q in points) for p in points]
    best = min(sums)
    return sums.index(best)


def brute_hull_vertices(xy):
    """Extreme points by the O(n^3) edge test: (i, j) is a hull edge when no
    point lies strictly right of it and no collinear point lies beyond it."""
    n = len(xy)
    verts = set()
    for i in range(n):
        for j in range(n):
            (ax, ay), (bx, by) = xy[i], xy[j]
            if (ax, ay) == (bx, by):
                continue
            ok = True
            for m in range(n):
                if m in (i, j):
                    continue
                cx, cy = xy[m]
                cr = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
                if cr < 0:
                    ok = False
                    break
                if cr == 0:
                    t = ((cx - ax) * (bx - ax) + (cy - ay) * (by - ay)) / ((bx - ax) ** 2 + (by - ay) ** 2)
                    if t < 0 or t > 1:
                        ok = False
                        break
            if ok:
                verts.add(i)
                verts.add(j)
    return verts
