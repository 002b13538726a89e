"""Analysis package init."""
from .orchestrator import run_suite, VerificationResult
__all__ = ["run_suite", "VerificationResult"]
