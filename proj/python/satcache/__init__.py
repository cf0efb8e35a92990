"""Joint bandwidth allocation and edge caching for flexible multibeam satellites."""
from ._core import (
    Instance,
    SatcacheError,
    maximize_hits,
    minimize_feeding_time,
    reference,
    shannon_efficiency,
)

__all__ = [
    "Instance",
    "SatcacheError",
    "maximize_hits",
    "minimize_feeding_time",
    "reference",
    "shannon_efficiency",
]
