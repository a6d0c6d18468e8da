from hypothesis import strategies as st

from tilekit.graphcore import KPartiteGraph


@st.composite
def kpartite_graphs(draw, k=st.integers(2, 4), n=st.integers(1, 4), p=None):
    k = draw(k) if not isinstance(k, int) else k
    n = draw(n) if not isinstance(n, int) else n
    pairs = [
        ((i, a), (j, b))
        for i in range(1, k + 1)
        for j in range(i + 1, k + 1)
        for a in range(1, n + 1)
        for b in range(1, n + 1)
    ]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return KPartiteGraph.new_balanced(k, n, [e for e, m in zip(pairs, mask) if m])


@st.composite
def matrices(draw, max_side=6, min_side=1):
    a = draw(st.integers(min_side, max_side))
    b = draw(st.integers(min_side, max_side))
    return [draw(st.lists(st.integers(0, 1), min_size=b, max_size=b)) for _ in range(a)]
