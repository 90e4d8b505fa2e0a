"""Domain adaptation toolkit: a shared/specific mixture of maximum entropy
classifiers trained by conditional EM, plus baselines, sequence decoding,
and an evaluation harness."""

__version__ = "0.1.0"
