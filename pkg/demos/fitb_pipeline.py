"""Fill-in-the-blank with and without imagination.

Builds FITB questions from a synthetic corpus, trains a text-only ranker
and a text + visual ranker, and shows one test question answered by both.

    python3 demos/fitb_pipeline.py
"""
import numpy as np

from imagineer.corpus import build_fitb
from imagineer.generate import IcmConfig
from imagineer.synth import generate_synthetic
from imagineer.tasks import PipelineConfig, evaluate_fitb, featurize_fitb, fit_fitb_artifacts


def main():
    corpus = generate_synthetic(300, seed=7)
    train, test = build_fitb(corpus, 7, 5 / 7)
    train, test = train[:200], test[:80]
    cfg = PipelineConfig(min_cooc=3, seed=7, c_grid=(0.1, 1.0, 10.0),
                         icm=IcmConfig(restarts=2, stride=40))
    print(f"{len(train)} train / {len(test)} test questions; imagining scenes ...")
    art = fit_fitb_artifacts(cfg, train, corpus)
    tr, te = featurize_fitb(train, art), featurize_fitb(test, art)

    text_report, text_model = evaluate_fitb(tr, te, art, cfg, feature_set={"text"})
    joint_report, joint_model = evaluate_fitb(tr, te, art, cfg, baseline=False)
    print(f"text-only accuracy:     {text_report.value:.3f}")
    print(f"text + visual accuracy: {joint_report.value:.3f}")

    q, phi = test[0], te.features[0]
    print("\nquestion body:", " ".join(q.question_body))
    t, j = text_model.scores(phi), joint_model.scores(phi)
    for i, opt in enumerate(q.options):
        mark = "*" if i == q.gt_index else " "
        print(f" {mark} [{i}] text {t[i]:+6.2f}  joint {j[i]:+6.2f}  {opt}")
    print(f"text picks {int(np.argmax(t))}, joint picks {int(np.argmax(j))}, answer {q.gt_index}")


if __name__ == "__main__":
    main()
