from .rng_manager import RngManager
from .outcomes import sample_binary, sample_binary_n

__all__ = [
    "RngManager",
    "sample_binary",
    "sample_binary_n",
]
