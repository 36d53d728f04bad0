"""Answer fill-in-the-blank and visual paraphrasing questions by imagining clip-art scenes."""
from .corpus import CorpusEntry, FitbQuestion, VpQuestion, build_fitb, build_vp
from .errors import ImagineerError
from .generate import IcmConfig, extract_tuples, generate_naive, generate_scene, icm
from .gmm import Gmm2D
from .learners import LinearModel, RankProblem, train_binary_svm, train_rank_svm
from .metrics import accuracy, agreement_subsets, average_precision
from .priors import NounMap, PriorTables, fit_noun_map, fit_priors, visual_features
from .scene import Description, Scene, Tuple
from .synth import WorldSpec, generate_synthetic
from .tasks import Artifacts, PipelineConfig, answer_fitb, answer_vp, run_experiment

__all__ = [
    "CorpusEntry", "FitbQuestion", "VpQuestion", "build_fitb", "build_vp", "ImagineerError",
    "IcmConfig", "extract_tuples", "generate_naive", "generate_scene", "icm", "Gmm2D",
    "LinearModel", "RankProblem", "train_binary_svm", "train_rank_svm", "accuracy",
    "agreement_subsets", "average_precision", "NounMap", "PriorTables", "fit_noun_map",
    "fit_priors", "visual_features", "Description", "Scene", "Tuple", "WorldSpec",
    "generate_synthetic", "Artifacts", "PipelineConfig", "answer_fitb", "answer_vp",
    "run_experiment",
]
