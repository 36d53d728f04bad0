import numpy as np
import pytest

from imagineer.errors import EmptyCorpus, MissingTable
from imagineer.priors import (
    ATTRIBUTE_SLOTS, N_SLOTS, PRESENCE_SLOTS, SPATIAL_SLOTS, NounMap, PriorTables, fit_noun_map,
    load_priors, log_normalize, save_priors, scene_energy, visual_features,
)
from imagineer.scene import CATALOG, Description, Scene, Tuple


def test_slot_groups_partition_the_features():
    slots = sorted(PRESENCE_SLOTS + ATTRIBUTE_SLOTS + SPATIAL_SLOTS)
    assert slots == list(range(N_SLOTS)) == list(range(22))
    assert len(PRESENCE_SLOTS) == 4 and len(ATTRIBUTE_SLOTS) == 5 and len(SPATIAL_SLOTS) == 13


def test_log_normalize():
    c = np.array([[1.0, 3.0], [0.0, 0.0]])
    out = log_normalize(c, 0.0, 1)
    assert np.allclose(np.exp(out), [[0.25, 0.75], [0.5, 0.5]])
    smoothed = log_normalize(c, 1.0, 1)
    assert np.allclose(np.exp(smoothed), [[2 / 6, 4 / 6], [0.5, 0.5]])
    assert np.allclose(np.exp(log_normalize(np.ones((2, 2, 3, 3)), 0.5, (2, 3))).sum((2, 3)), 1.0)


def test_noun_map_finds_catalog_objects(fitted):
    _, nm = fitted
    for noun in ("dog", "kite", "slide", "sun", "mike", "jenny"):
        assert CATALOG[nm.get(noun)] == noun
    assert nm.get(None) is None and nm.get("zebra") is None
    assert NounMap.from_dict(nm.to_dict()) == nm
    with pytest.raises(EmptyCorpus):
        fit_noun_map([])


def test_noun_map_tie_goes_to_lower_object():
    scene = Scene.empty().replace(present=np.isin(np.arange(58), [3, 9]))
    desc = Description(("a b.",), (Tuple("thing", "is"),))
    nm = fit_noun_map([(desc, scene), (Description(("c.",), (Tuple("other", "is"),)), Scene.empty())])
    assert nm.get("thing") == 3


def test_tables_are_normalized(fitted):
    pt, _ = fitted
    for name, (table, axes) in pt.categorical_tables().items():
        total = np.exp(table).sum(axis=axes)
        assert np.allclose(total, 1.0), name


def test_priors_file_round_trip(fitted, corpus, tmp_path):
    pt, nm = fitted
    path = tmp_path / "priors.json"
    save_priors(path, pt, nm)
    pt2, nm2 = load_priors(path)
    assert nm2 == nm
    for e in corpus[:20]:
        assert np.array_equal(visual_features(e.scene, e.desc_a, pt, nm),
                              visual_features(e.scene, e.desc_a, pt2, nm2))
    assert PriorTables.loads(pt.dumps()).dumps() == pt.dumps()


def test_unseen_relation_falls_back_or_raises(fitted, corpus):
    pt, nm = fitted
    e = corpus[0]
    present = e.scene.present_ids()
    a, b = CATALOG[present[0]], CATALOG[present[1]]
    desc = Description(("x.",), (Tuple(a, "is juggling with", b),))
    f = visual_features(e.scene, desc, pt, nm)
    assert np.all(np.isfinite(f))
    with pytest.raises(MissingTable):
        visual_features(e.scene, desc, pt, nm, strict=True)


def test_energy_is_feature_sum(fitted, corpus):
    pt, nm = fitted
    e = corpus[3]
    f = visual_features(e.scene, e.desc_b, pt, nm)
    assert scene_energy(e.scene, e.desc_b, pt, nm) == pytest.approx(f.sum())
    w = np.arange(22, dtype=float)
    assert scene_energy(e.scene, e.desc_b, pt, nm, w) == pytest.approx(w @ f)


def test_true_scenes_score_higher_than_shuffled(fitted, corpus):
    """Mentioned nouns are likelier present in the scene they describe than in another one."""
    pt, nm = fitted
    own = [visual_features(e.scene, e.desc_a, pt, nm)[10] for e in corpus[:100]]
    other = [visual_features(corpus[(i + 37) % 100].scene, e.desc_a, pt, nm)[10]
             for i, e in enumerate(corpus[:100])]
    assert np.mean(np.array(own) >= np.array(other)) > 0.9
