"""Planted generative world used as a desk-scale stand-in for the clip-art corpus.

Each scene draws one activity theme (a cluster of co-occurring objects
with matching person activities), one weather state whose objects
exclude each other, a shared mood for the two children, and background
objects.  Positions follow per-object location modes; activity targets
sit at a relation-specific offset in front of the child.

Two templated three-sentence descriptions are written per scene, each
with its ground-truth tuples attached.  Every description is written in
one of two writer styles (how the children are named, which mood and
weather words are used, how lone objects are placed), which is a purely
textual cue.  Theme co-occurrence, exclusive weather
and one-activity-per-child are cues that the scene statistics carry far
more densely than word pairs do.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusEntry
from .scene import (
    CATALOG, HEIGHT, N_DEPTHS, N_OBJECTS, WIDTH, Description, Scene, Tuple, person_attr,
)
from .text import tokenize

OBJ = {name: i for i, name in enumerate(CATALOG)}

STANDING, RUNNING, SITTING, KICKING, THROWING, CROUCHING, REACHING = range(7)
NEUTRAL, HAPPY, SAD, ANGRY, SCARED = range(5)


@dataclass(frozen=True)
class Activity:
    phrase: str          # text between the child and the target noun
    target: str
    pose: int
    offset: tuple        # target position (forward, down) relative to the child


@dataclass(frozen=True)
class Theme:
    name: str
    objects: tuple
    activities: tuple


@dataclass(frozen=True)
class Weather:
    name: str
    objects: tuple
    sentences: tuple     # per writer style: (template, noun or None) options
    moods: tuple         # mood distribution over (NEUTRAL, HAPPY, SAD, ANGRY, SCARED)


def _a(phrase, target, pose, fwd, down):
    return Activity(phrase, target, pose, (fwd, down))


DEFAULT_THEMES = (
    Theme("campsite", ("tent", "fire", "pine", "bear"), (
        _a("is sitting by the", "fire", SITTING, 60, 10),
        _a("is running from the", "bear", RUNNING, -120, 0),
        _a("is hiding in the", "tent", CROUCHING, 20, -10))),
    Theme("picnic", ("blanket", "basket", "burger", "ketchup"), (
        _a("is eating the", "burger", SITTING, 25, 0),
        _a("is sitting on the", "blanket", SITTING, 0, 30),
        _a("is opening the", "basket", CROUCHING, 40, 20))),
    Theme("barbecue", ("grill", "hotdog", "table", "cooler"), (
        _a("is cooking on the", "grill", STANDING, 50, 0),
        _a("is eating the", "hotdog", STANDING, 25, -20),
        _a("is opening the", "cooler", CROUCHING, 45, 20))),
    Theme("party", ("pizza", "pie", "balloon", "crown"), (
        _a("is eating the", "pizza", SITTING, 25, 0),
        _a("is holding the", "balloon", STANDING, 20, -90),
        _a("is wearing the", "crown", STANDING, 0, -45))),
    Theme("baseball", ("bat", "glove", "ball", "cap"), (
        _a("is swinging the", "bat", THROWING, 30, -20),
        _a("is throwing the", "ball", THROWING, 60, -40),
        _a("is wearing the", "cap", STANDING, 0, -45))),
    Theme("football", ("football", "helmet", "bench"), (
        _a("is kicking the", "football", KICKING, 40, 35),
        _a("is wearing the", "helmet", STANDING, 0, -45),
        _a("is sitting on the", "bench", SITTING, 0, 25))),
    Theme("playground", ("slide", "swing", "sandbox"), (
        _a("is going down the", "slide", SITTING, 0, 10),
        _a("is sitting on the", "swing", SITTING, 0, 15),
        _a("is playing in the", "sandbox", CROUCHING, 10, 30))),
    Theme("beach", ("shovel", "pail", "umbrella", "glasses"), (
        _a("is digging with the", "shovel", CROUCHING, 30, 30),
        _a("is carrying the", "pail", STANDING, 25, 10),
        _a("is wearing the", "glasses", STANDING, 0, -50))),
    Theme("pond", ("pond", "duck", "frog"), (
        _a("is feeding the", "duck", CROUCHING, 70, 25),
        _a("is catching the", "frog", CROUCHING, 40, 35),
        _a("is standing by the", "pond", STANDING, 80, 20))),
    Theme("pets", ("dog", "cat", "frisbee"), (
        _a("is throwing the", "frisbee", THROWING, 70, -50),
        _a("is petting the", "dog", CROUCHING, 35, 15),
        _a("is chasing the", "cat", RUNNING, 90, 10))),
    Theme("skytoys", ("kite", "airplane", "rocket"), (
        _a("is flying the", "kite", REACHING, 60, -200),
        _a("is throwing the", "airplane", THROWING, 60, -60),
        _a("is launching the", "rocket", CROUCHING, 50, 20))),
    Theme("ride", ("bike", "wagon", "racket"), (
        _a("is riding the", "bike", SITTING, 0, 20),
        _a("is pulling the", "wagon", RUNNING, -60, 10),
        _a("is swinging the", "racket", THROWING, 30, -20))),
    Theme("garden", ("flower", "snake", "owl", "hat"), (
        _a("is smelling the", "flower", CROUCHING, 30, 30),
        _a("is running from the", "snake", RUNNING, -100, 20),
        _a("is wearing the", "hat", STANDING, 0, -45))),
)

DEFAULT_WEATHERS = (
    Weather("sunny", ("sun",),
            ((("The {0} is shining.", "sun"), ("It is a sunny day.", None)),
             (("The {0} is bright.", "sun"), ("It is a nice day.", None))),
            (0.15, 0.55, 0.1, 0.1, 0.1)),
    Weather("stormy", ("cloud", "lightning"),
            ((("The {0} is dark.", "cloud"), ("It is stormy.", None)),
             (("The {0} is scary.", "lightning"), ("It is raining.", None))),
            (0.15, 0.05, 0.3, 0.15, 0.35)),
    Weather("rainbow", ("cloud", "rainbow"),
            ((("The {0} is colorful.", "rainbow"), ("The {0} is white.", "cloud")),
             (("The {0} is pretty.", "rainbow"), ("The {0} is fluffy.", "cloud"))),
            (0.2, 0.5, 0.1, 0.1, 0.1)),
    Weather("night", ("moon", "star"),
            ((("The {0} is out.", "moon"), ("It is night time.", None)),
             (("The {0} is twinkling.", "star"), ("It is late at night.", None))),
            (0.3, 0.2, 0.15, 0.1, 0.25)),
)

# one word per writer style
DEFAULT_MOODS = {
    NEUTRAL: ("calm", "relaxed"),
    HAPPY: ("happy", "smiling"),
    SAD: ("sad", "crying"),
    ANGRY: ("angry", "mad"),
    SCARED: ("scared", "afraid"),
}

# writer styles: how the children are named and how a lone object is placed
DEFAULT_STYLES = (
    (("Mike", "Jenny"), "is in the park"),
    (("The boy", "The girl"), "is on the grass"),
)

SKY = ("sun", "cloud", "lightning", "rainbow", "moon", "star", "kite", "airplane", "balloon", "owl")
BACKGROUND = ("tree", "bush")


@dataclass(frozen=True)
class WorldSpec:
    themes: tuple = DEFAULT_THEMES
    weathers: tuple = DEFAULT_WEATHERS
    weather_probs: tuple = (0.4, 0.2, 0.15, 0.15)   # remainder: no weather objects
    moods: dict = field(default_factory=lambda: dict(DEFAULT_MOODS))
    p_person: float = 0.85
    p_theme_object: float = 0.75
    p_activity: float = 0.85
    p_shared_mood: float = 0.85
    p_background: float = 0.35
    styles: tuple = DEFAULT_STYLES
    p_weather_object: float = 0.9
    position_noise: float = 25.0
    world_seed: int = 1234
    relation_phrases: tuple = ("is near the", "is above the", "is below the")
    fact_weights: dict = field(default_factory=lambda: {
        "activity": 3.0, "mood": 2.0, "weather": 2.0, "relation": 1.0, "exists": 1.0})

    def layout(self):
        """Per-object location modes, depth and facing distributions (seeded)."""
        rng = np.random.default_rng(self.world_seed)
        modes, depth, facing = {}, {}, {}
        for k, name in enumerate(CATALOG):
            if name in SKY:
                ys = rng.uniform(40, 120, size=2)
            else:
                ys = rng.uniform(240, 360, size=2)
            xs = rng.uniform(60, WIDTH - 60, size=2)
            modes[k] = np.stack([xs, ys], axis=1)
            depth[k] = rng.dirichlet(np.full(N_DEPTHS, 0.7))
            facing[k] = float(rng.uniform(0.2, 0.8))
        return modes, depth, facing


def _sentence_tuple(template_parts, sentence_index):
    """Tuple from ``(primary, middle text, secondary)`` as the extractor would see it."""
    primary, middle, secondary = template_parts
    return Tuple(primary, " ".join(tokenize(middle)), secondary, sentence_index)


class _SceneSampler:
    def __init__(self, world: WorldSpec):
        self.w = world
        self.modes, self.depth, self.facing = world.layout()

    def place(self, rng, k):
        mode = self.modes[k][rng.integers(2)]
        x, y = mode + rng.normal(0, self.w.position_noise, size=2)
        return int(np.clip(round(x), 0, WIDTH - 1)), int(np.clip(round(y), 0, HEIGHT - 1))

    def sample(self, rng):
        w = self.w
        present = np.zeros(N_OBJECTS, bool)
        x = np.zeros(N_OBJECTS, np.int64); y = np.zeros(N_OBJECTS, np.int64)
        z = np.zeros(N_OBJECTS, np.int64); d = np.ones(N_OBJECTS, np.int64)
        attr = np.zeros(N_OBJECTS, np.int64)

        theme = w.themes[rng.integers(len(w.themes))]
        objs = [OBJ[o] for o in theme.objects if rng.random() < w.p_theme_object]
        wp = np.append(np.asarray(w.weather_probs), 1 - sum(w.weather_probs))
        wi = rng.choice(len(wp), p=wp)
        weather = w.weathers[wi] if wi < len(w.weathers) else None
        if weather is not None:
            wobjs = [OBJ[o] for o in weather.objects if rng.random() < w.p_weather_object]
            objs += wobjs or [OBJ[weather.objects[0]]]
        objs += [OBJ[o] for o in BACKGROUND if rng.random() < w.p_background]

        mood_p = weather.moods if weather is not None else (0.3, 0.3, 0.15, 0.1, 0.15)
        mood = int(rng.choice(5, p=mood_p))
        activities = {}
        for person in (0, 1):
            if rng.random() >= w.p_person:
                continue
            present[person] = True
            x[person], y[person] = self.place(rng, person)
            z[person] = rng.choice(N_DEPTHS, p=self.depth[person])
            d[person] = 1 if rng.random() < 0.5 else -1
            expr = mood if rng.random() < w.p_shared_mood else int(rng.integers(5))
            pose = STANDING
            if rng.random() < w.p_activity:
                act = theme.activities[rng.integers(len(theme.activities))]
                activities[person] = act
                pose = act.pose
            attr[person] = person_attr(pose, expr)

        for k in objs:
            present[k] = True
            x[k], y[k] = self.place(rng, k)
            z[k] = rng.choice(N_DEPTHS, p=self.depth[k])
            d[k] = 1 if rng.random() < self.facing[k] else -1
        for person, act in activities.items():
            k = OBJ[act.target]
            present[k] = True
            fwd, down = act.offset
            nx = x[person] + d[person] * fwd + rng.normal(0, 8)
            ny = y[person] + down + rng.normal(0, 8)
            x[k] = int(np.clip(round(nx), 0, WIDTH - 1))
            y[k] = int(np.clip(round(ny), 0, HEIGHT - 1))
            z[k] = z[person]
            d[k] = -d[person] if act.pose == RUNNING else d[k]
        scene = Scene(present, x, y, z, d, attr)
        return scene, {"theme": theme, "weather": weather, "activities": activities}

    def facts(self, rng, scene, latent, style):
        """Candidate sentences as ``(kind, text, tuple parts or None)``."""
        w = self.w
        people, placed = w.styles[style]
        out = []
        for person, act in sorted(latent["activities"].items()):
            head = people[person]
            out.append(("activity", f"{head} {act.phrase} {act.target}.",
                        (head.split()[-1].lower(), act.phrase, act.target)))
        for person in (0, 1):
            if scene.present[person]:
                word = w.moods[scene.attr[person] % 5][style]
                head = people[person]
                out.append(("mood", f"{head} is {word}.", (head.split()[-1].lower(), f"is {word}", None)))
        weather = latent["weather"]
        if weather is not None:
            options = [(t, n) for t, n in weather.sentences[style] if n is None or scene.present[OBJ[n]]]
            tmpl, noun = options[rng.integers(len(options))]
            if noun is None:
                out.append(("weather", tmpl, None))
            else:
                text = tmpl.format(noun)
                middle = text[len("The ") + len(noun):].rstrip(".")
                out.append(("weather", text, (noun, middle, None)))
        things = [k for k in scene.present_ids() if k > 1 and CATALOG[k] not in SKY]
        if len(things) >= 2:
            i, j = rng.choice(len(things), size=2, replace=False)
            a, b = things[i], things[j]
            dy = int(scene.y[a] - scene.y[b])
            phrase = w.relation_phrases[1] if dy < -60 else (w.relation_phrases[2] if dy > 60 else w.relation_phrases[0])
            out.append(("relation", f"The {CATALOG[a]} {phrase} {CATALOG[b]}.",
                        (CATALOG[a], phrase, CATALOG[b])))
        for k in things:
            name = CATALOG[k]
            article = "An" if name[0] in "aeiou" else "A"
            out.append(("exists", f"{article} {name} {placed}.", (name, placed, None)))
        return out

    def describe(self, rng, scene, latent) -> Description:
        style = int(rng.integers(len(self.w.styles)))
        facts = self.facts(rng, scene, latent, style)
        weights = np.array([self.w.fact_weights[f[0]] for f in facts], dtype=float)
        n = min(3, len(facts))
        picks = rng.choice(len(facts), size=n, replace=False, p=weights / weights.sum())
        sentences, tuples = [], []
        for idx, p in enumerate(picks):
            _, text, parts = facts[p]
            sentences.append(text)
            if parts is not None:
                tuples.append(_sentence_tuple(parts, idx))
        return Description(tuple(sentences), tuple(tuples))


def generate_synthetic(n_scenes: int, seed: int, world: WorldSpec | None = None) -> list[CorpusEntry]:
    """Sample ``n_scenes`` scenes with two descriptions each."""
    world = world or WorldSpec()
    sampler = _SceneSampler(world)
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_scenes):
        scene, latent = sampler.sample(rng)
        desc_a = sampler.describe(rng, scene, latent)
        desc_b = sampler.describe(rng, scene, latent)
        out.append(CorpusEntry(f"{i:05d}", scene, desc_a, desc_b))
    return out
