import numpy as np
import pytest

from stablemaps import planarmap as P
from stablemaps.rng import stream


def edge_map():
    return P.build_map([[0], [1]], np.array([1, 0]))


def pillow():
    # 4-cycle on the sphere: 4 vertices, 4 edges, two faces of degree 4
    alpha = np.array([1, 0, 3, 2, 5, 4, 7, 6])
    rotations = [[0, 7], [2, 1], [4, 3], [6, 5]]
    return P.build_map(rotations, alpha)


def torus():
    alpha = np.array([1, 0, 3, 2])
    return P.build_map([[0, 2, 1, 3]], alpha)


def test_edge_map_faces_and_genus():
    m = edge_map()
    f = P.faces(m)
    assert len(f) == 1 and f[0][1] == 2
    assert P.genus(m) == 0


def test_pillow_faces():
    m = pillow()
    degs = sorted(d for _, d, _ in P.faces(m))
    assert degs == [4, 4]
    assert P.genus(m) == 0
    assert sum(d for _, d, _ in P.faces(m)) == 2 * m.n_edges


def test_torus_genus():
    assert P.genus(torus()) == 1


def test_build_map_rejects_inconsistent_rotations():
    with pytest.raises(P.MapStructureError):
        P.build_map([[0, 0], [1]], np.array([1, 0]))
    with pytest.raises(P.MapStructureError):
        P.build_map([[0], [1], [2, 3]], np.array([1, 0, 3, 2]))  # disconnected


def test_build_map_rejects_fixed_point():
    with pytest.raises(P.MapStructureError):
        P.build_map([[0, 1]], np.array([0, 1]))


def random_tree_map(n, seed):
    rng = stream(seed, 0)
    parent = [0] * n
    for v in range(1, n):
        parent[v] = int(rng.integers(0, v))
    rotations = [[] for _ in range(n)]
    alpha = np.empty(2 * (n - 1), dtype=np.int64)
    for v in range(1, n):
        h_up, h_dn = 2 * (v - 1), 2 * (v - 1) + 1
        alpha[h_up], alpha[h_dn] = h_dn, h_up
        rotations[v].append(h_up)
        rotations[parent[v]].append(h_dn)
    return P.build_map(rotations, alpha)


def test_bfs_matches_naive_oracle():
    for seed in range(5):
        m = random_tree_map(60, seed)
        for src in (0, 7, 33):
            assert np.array_equal(P.bfs(m, src).dist, P.bfs_naive(m, src))


def test_bfs_src_and_lipschitz():
    m = pillow()
    d = P.bfs(m, 2).dist
    assert d[2] == 0
    for u, v in m.edges():
        assert abs(d[u] - d[v]) <= 1


def test_bfs_symmetry():
    m = random_tree_map(40, 9)
    rng = stream(1, 1)
    pairs = rng.integers(0, 40, size=(25, 2))
    dmat = P.bfs_multi(m, np.unique(pairs))
    index = {int(v): i for i, v in enumerate(np.unique(pairs))}
    for u, v in pairs:
        assert dmat[index[int(u)], int(v)] == dmat[index[int(v)], int(u)]


def test_canonical_form_detects_root():
    assert P.canonical_form(pillow()) == P.canonical_form(pillow())
    # path v0 - v1 - v2 rooted at the leaf-to-center vs center-to-leaf arc
    alpha = np.array([1, 0, 3, 2])
    a = P.build_map([[0], [1, 2], [3]], alpha, root_half_edge=0)
    b = P.build_map([[0], [1, 2], [3]], alpha, root_half_edge=1)
    assert P.canonical_form(a) != P.canonical_form(b)
    # marks distinguish otherwise identical rooted maps
    c = P.build_map([[0], [1, 2], [3]], alpha, root_half_edge=0, marked={"v1": 2})
    d = P.build_map([[0], [1, 2], [3]], alpha, root_half_edge=0, marked={"v1": 1})
    assert P.canonical_form(c) != P.canonical_form(d)


def test_edge_list_export():
    text = P.edges_to_text(pillow())
    head = text.splitlines()[0]
    assert head == "4 4"
    assert len(text.splitlines()) == 5
    rot = P.rotations_to_text(pillow())
    assert rot.splitlines()[0].startswith("0:")
