"""quatro: cognitive-model workloads on a classical quantum-simulation stack."""

__version__ = "0.1.0"
