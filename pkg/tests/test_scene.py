import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from imagineer.errors import DomainError, FormatError
from imagineer.scene import (
    HEIGHT, N_DEPTHS, N_EXPRESSIONS, N_OBJECTS, N_POSES, WIDTH, Description, ObjectState, Scene,
    Tuple, decode_scene, decode_scenes, encode_scene, encode_scenes, join_descriptions, n_attrs,
    person_attr, split_person_attr,
)


@given(st.integers(0, N_POSES - 1), st.integers(0, N_EXPRESSIONS - 1))
def test_person_attr_round_trip(pose, expr):
    a = person_attr(pose, expr)
    assert 0 <= a < N_POSES * N_EXPRESSIONS
    assert split_person_attr(a) == (pose, expr)


def test_attribute_domains():
    assert n_attrs(0) == n_attrs(1) == 35
    assert all(n_attrs(k) == 1 for k in range(2, N_OBJECTS))
    with pytest.raises(DomainError):
        person_attr(7, 0)


def scenes():
    ints = lambda lo, hi: st.lists(st.integers(lo, hi), min_size=N_OBJECTS, max_size=N_OBJECTS)  # noqa: E731
    return st.builds(
        lambda p, x, y, z, d, a: Scene(p, x, y, z, d, [a[0], a[1]] + [0] * (N_OBJECTS - 2)),
        st.lists(st.booleans(), min_size=N_OBJECTS, max_size=N_OBJECTS),
        ints(0, WIDTH - 1), ints(0, HEIGHT - 1), ints(0, N_DEPTHS - 1),
        st.lists(st.sampled_from([-1, 1]), min_size=N_OBJECTS, max_size=N_OBJECTS),
        st.tuples(st.integers(0, 34), st.integers(0, 34)))


@settings(max_examples=50, deadline=None)
@given(scenes())
def test_scene_record_round_trip(scene):
    data = encode_scene(scene, "abc")
    assert decode_scene(data) == scene
    assert encode_scene(decode_scene(data), "abc") == data


def test_scene_is_immutable():
    s = Scene.empty()
    with pytest.raises(AttributeError):
        s.x = 3
    with pytest.raises(ValueError):
        s.x[0] = 3


def test_scene_validates_fields():
    base = Scene.empty()
    with pytest.raises(DomainError):
        base.replace(z=np.full(N_OBJECTS, 3))
    with pytest.raises(DomainError):
        base.replace(dir=np.zeros(N_OBJECTS, int))
    with pytest.raises(DomainError):
        attr = np.zeros(N_OBJECTS, int)
        attr[5] = 1   # non-persons have a single attribute
        base.replace(attr=attr)
    with pytest.raises(DomainError):
        Scene.from_states([ObjectState(3), ObjectState(3)])


def test_positions_are_clipped_to_canvas():
    s = Scene.empty().replace(x=np.full(N_OBJECTS, 900), y=np.full(N_OBJECTS, -5))
    assert s.x.max() == WIDTH - 1 and s.y.min() == 0


def test_from_states_and_indexing():
    s = Scene.from_states([ObjectState(0, True, 10, 20, 1, -1, person_attr(2, 3)), ObjectState(41, True, 5, 6)])
    assert s.present_ids() == [0, 41]
    assert s[0].pose == 2 and s[0].expression == 3
    assert s[41] == ObjectState(41, True, 5, 6, 0, 1, 0)


def test_decode_reports_line_numbers():
    good = encode_scenes({"a": Scene.empty(), "b": Scene.empty()}).decode()
    lines = good.split("\n")
    lines[62] = "2 1 x 0 0 1 0"   # object line of the second scene
    with pytest.raises(FormatError, match="line 63"):
        decode_scenes("\n".join(lines))
    with pytest.raises(FormatError, match="duplicate"):
        decode_scenes(encode_scenes([("a", Scene.empty()), ("a", Scene.empty())]))
    with pytest.raises(FormatError, match="object lines"):
        decode_scenes("scene a\n0 0 0 0 0 1 0\n")
    bad = encode_scene(Scene.empty()).decode().replace("\n5 0 0 0 0 1 0", "\n5 0 0 0 7 1 0")
    with pytest.raises(DomainError, match="line 7"):
        decode_scene(bad.encode())


def test_join_descriptions_renumbers_sentences():
    a = Description(("Mike runs.", "Jenny sits."), (Tuple("mike", "runs"), Tuple("jenny", "sits", None, 1)))
    b = Description(("The dog barks.",), (Tuple("dog", "barks"),))
    j = join_descriptions([a, b])
    assert j.sentences == a.sentences + b.sentences
    assert [t.sentence for t in j.tuples] == [0, 1, 2]
    assert j.sentence_tuples(2) == (Tuple("dog", "barks", None, 2),)
    with pytest.raises(DomainError):
        Description(())
    with pytest.raises(DomainError):
        Tuple("", "runs")
