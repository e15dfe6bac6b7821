"""Axiom checking, characterization and search for small house allocation problems."""

__version__ = "0.1.0"

from .core import Domain, HallotError, get_domain, parse_profile, format_profile  # noqa: E402
from .mechanisms import MechanismTable, materialize, sd_mechanism, seqd_mechanism, Hierarchy  # noqa: E402
from .axioms import check, AxiomReport  # noqa: E402
from .characterize import characterize  # noqa: E402

__all__ = [
    "__version__", "Domain", "HallotError", "get_domain", "parse_profile", "format_profile",
    "MechanismTable", "materialize", "sd_mechanism", "seqd_mechanism", "Hierarchy",
    "check", "AxiomReport", "characterize",
]
