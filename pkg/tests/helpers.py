"""Small shared test utilities: graph files, random partitions, slope fits."""

import numpy as np


def write_edge_list(path, edges, header=None):
    lines = [] if header is None else [header]
    lines += [f"{u} {v}" for u, v in edges]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def star_edges(n):
    """Hub 0 joined to n-1 leaves."""
    return [(0, i) for i in range(1, n)]


def path_edges(n):
    return [(i, i + 1) for i in range(n - 1)]


def cycle_edges(n):
    return path_edges(n) + [(n - 1, 0)]


def random_partition(rng, n):
    """Random contiguous (start, length) block partition of range(n)."""
    if n == 1:
        return ((0, 1),)
    size = int(rng.integers(0, n))
    cuts = sorted(rng.choice(np.arange(1, n), size=size, replace=False))
    edges = [0, *cuts, n]
    return tuple((edges[i], edges[i + 1] - edges[i]) for i in range(len(edges) - 1))


def loglog_slope(ks, vals, lo, hi, floor=1e-300):
    """Least-squares slope of log(vals) vs log(ks) restricted to lo <= k <= hi."""
    ks = np.asarray(ks, dtype=float)
    vals = np.maximum(np.asarray(vals, dtype=float), floor)
    mask = (ks >= lo) & (ks <= hi)
    return float(np.polyfit(np.log(ks[mask]), np.log(vals[mask]), 1)[0])
