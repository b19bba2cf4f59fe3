"""sttaudit: audit toolkit for speech-to-text hallucination detection.

Detects hallucination candidates by comparing repeated transcription runs
of the same audio, routes them to human adjudication with a harm taxonomy,
and computes disparity statistics (group rates, logistic regression,
matched cohorts) over the confirmed set. A deterministic fault-injection
backend with a known oracle validates the whole pipeline end to end.
"""

__version__ = "0.1.0"

from .alignment import align, insertion_spans, normalize, token_surfaces, unstable_regions
from .corpus import Corpus, compute_features, corpus_summary, load_manifest, save_manifest
from .detection import DetectionConfig, detect_candidate, detect_repetition, flag_nontarget_script
from .stats import fit_logistic, mahalanobis_match, two_proportion_test

__all__ = [
    "__version__",
    "align",
    "insertion_spans",
    "normalize",
    "token_surfaces",
    "unstable_regions",
    "Corpus",
    "compute_features",
    "corpus_summary",
    "load_manifest",
    "save_manifest",
    "DetectionConfig",
    "detect_candidate",
    "detect_repetition",
    "flag_nontarget_script",
    "fit_logistic",
    "mahalanobis_match",
    "two_proportion_test",
]
