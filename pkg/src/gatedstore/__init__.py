"""gatedstore: policy-gated data sharing over an asynchronous BFT
replicated store with an on-chain anchor."""

from .model import AccessType, CipherBundle, PartialAttribute, Policy

__version__ = "0.1.0"

__all__ = ["AccessType", "Policy", "PartialAttribute", "CipherBundle", "__version__"]
