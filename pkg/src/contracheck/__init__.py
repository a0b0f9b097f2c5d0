"""contracheck: corpus-level contradiction detection toolkit.

Given a frozen text corpus, extract atomic facts, search for contradicting
evidence with a tool-using agent or single-pass baselines, score and evaluate
detectors against labeled or injected ground truth, estimate corpus-wide
inconsistency rates, and serve flagged claims to human reviewers.
"""

__version__ = "0.1.0"
