"""Partition calculus of pairs over finite-set lattices: extraction, goodness, approximations."""
from .coloring import (CONST1, MAXGAP, PARITY, TOPSIZE, PairColoring, PartialColoring, RuleColoring,
                       TableColoring, TotalColoring)
from .errors import (CapExceeded, CofinalError, ConstructionStuck, InvalidInput, VerificationFailure,
                     WindowExhausted, WitnessDisagreement)
from .lattice import AnchoredPair, FinPoset, FinSet

__all__ = [
    "AnchoredPair", "CONST1", "CapExceeded", "CofinalError", "ConstructionStuck", "FinPoset", "FinSet",
    "InvalidInput", "MAXGAP", "PARITY", "PairColoring", "PartialColoring", "RuleColoring", "TOPSIZE",
    "TableColoring", "TotalColoring", "VerificationFailure", "WindowExhausted", "WitnessDisagreement",
]
__version__ = "0.1.0"
