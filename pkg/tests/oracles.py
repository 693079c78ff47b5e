"""Independent reference implementations shared by the unit and acceptance tests."""
import math


def naive_classify(field, graph, coords):
    """Direct loop transcription of the extremum and one-ring sign-change rules."""
    n = graph.n
    nbrs = [set() for _ in range(n)]
    for i in range(n):
        for j in graph.indices[i]:
            nbrs[i].add(int(j))
            nbrs[int(j)].add(i)
    maxima, minima, saddles = [], [], []
    for x in range(n):
        vals = [field[j] for j in nbrs[x]]
        if all(field[x] > v for v in vals):
            maxima.append(x)
            continue
        if all(field[x] < v for v in vals):
            minima.append(x)
            continue
        ring = []
        for j in nbrs[x]:
            dx = coords[j][0] - coords[x][0]
            dy = coords[j][1] - coords[x][1]
            if dx == 0 and dy == 0:
                continue
            ring.append((math.atan2(dy, dx), math.hypot(dx, dy), j))
        ring.sort()
        labels = [field[x] >= field[j] for _, _, j in ring]
        changes = sum(labels[i] != labels[(i + 1) % len(labels)] for i in range(len(labels)))
        if changes >= 4:
            saddles.append(x)
    return maxima, minima, saddles
