import itertools

import numpy as np
import pytest

from physnet import ChainComplex, DirectedGraph, build_graph


def random_digraph(rng, n, m, wlo=0.2, whi=5.0):
    """Random multigraph without self-loops (edges may repeat)."""
    edges = []
    for _ in range(m):
        t, h = rng.choice(n, size=2, replace=False)
        edges.append((int(t) + 1, int(h) + 1, float(rng.uniform(wlo, whi))))
    return build_graph(n, edges)


def random_strongly_connected(rng, n, extra, wlo=0.2, whi=5.0):
    """Hamiltonian cycle through a random permutation plus ``extra`` random edges."""
    perm = rng.permutation(n)
    edges = [(int(perm[i]) + 1, int(perm[(i + 1) % n]) + 1, float(rng.uniform(wlo, whi)))
             for i in range(n)] if n > 1 else []
    for _ in range(extra):
        t, h = rng.choice(n, size=2, replace=False)
        edges.append((int(t) + 1, int(h) + 1, float(rng.uniform(wlo, whi))))
    return build_graph(n, edges)


def random_connected_tree_plus(rng, n, extra, wlo=0.2, whi=5.0):
    """Weakly connected graph: random spanning tree (random orientations) plus extra edges."""
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        a, b = (u, v) if rng.random() < 0.5 else (v, u)
        edges.append((a + 1, b + 1, float(rng.uniform(wlo, whi))))
    for _ in range(extra):
        t, h = rng.choice(n, size=2, replace=False)
        edges.append((int(t) + 1, int(h) + 1, float(rng.uniform(wlo, whi))))
    return build_graph(n, edges)


def all_simple_digraphs(n, max_edges):
    """Every simple digraph on n vertices with at most ``max_edges`` arcs (unit weights)."""
    arcs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for k in range(max_edges + 1):
        for subset in itertools.combinations(arcs, k):
            yield DirectedGraph(n, tuple(a for a, _ in subset), tuple(b for _, b in subset),
                                (1.0,) * k)


def reachable(g, s):
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for t, h, _ in g.edges():
            if t == u and h not in seen:
                seen.add(h)
                stack.append(h)
    return seen


def simplicial_complex(n_vertices, faces):
    """Boundary matrices of oriented triangles ``(a, b, c)`` (0-based).

    Edges are vertex pairs oriented low -> high in order of first
    appearance; the triangle (a, b, c) has boundary [b,c] - [a,c] + [a,b].
    """
    edges = {}
    for a, b, c in faces:
        for p, q in ((a, b), (b, c), (a, c)):
            edges.setdefault((min(p, q), max(p, q)), len(edges))
    d1 = np.zeros((n_vertices, len(edges)), dtype=np.int64)
    for (p, q), j in edges.items():
        d1[p, j] = -1
        d1[q, j] = 1
    d2 = np.zeros((len(edges), len(faces)), dtype=np.int64)
    for f, (a, b, c) in enumerate(faces):
        for (p, q), sign in (((b, c), 1), ((a, c), -1), ((a, b), 1)):
            d2[edges[(min(p, q), max(p, q))], f] += sign if p < q else -sign
    return ChainComplex((d2, d1)), list(edges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def triangle():
    return simplicial_complex(3, [(0, 1, 2)])[0]


@pytest.fixture
def tetrahedron():
    # outward-oriented boundary of the 3-simplex [0,1,2,3]
    return simplicial_complex(4, [(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)])[0]


@pytest.fixture
def two_faces():
    """Two triangles sharing edge (1, 2); returns complex and index of the shared edge."""
    c, edges = simplicial_complex(4, [(0, 1, 2), (1, 3, 2)])
    return c, edges.index((1, 2))


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
