"""Swipe-dynamics authentication toolkit: feature extraction from touch
traces, Gaussian novelty-detection models, per-user EER evaluation, a
synthetic population generator, and a scoring CLI/service."""

__version__ = "0.1.0"
