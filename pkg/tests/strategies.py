from hypothesis import strategies as st

from lstone import ConceptClass


@st.composite
def classes(draw, max_m=5, max_k=12, min_k=1):
    m = draw(st.integers(1, max_m))
    codes = draw(st.sets(st.integers(0, 2 ** m - 1), min_size=min_k, max_size=min(max_k, 2 ** m)))
    return ConceptClass(m, [tuple(c >> i & 1 for i in range(m)) for c in codes])


@st.composite
def class_and_sequence(draw, max_m=5, max_k=12, max_len=8):
    """A class with a sequence realized by one of its hypotheses."""
    c = draw(classes(max_m, max_k))
    h = draw(st.sampled_from(c.hypotheses))
    pts = draw(st.lists(st.integers(0, c.m - 1), max_size=max_len))
    return c, [(x, h[x]) for x in pts]
