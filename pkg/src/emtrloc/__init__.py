"""Electromagnetic time reversal fault location on line networks."""
from .emtr import (
    EnergyCurve,
    LocationResult,
    contrast_ratio,
    locate_classic,
    locate_convolution,
    locate_direct,
    min_signal_length_estimate,
    precompute_db,
)
from .netmodel import FaultSpec, GuessGrid, NetworkModel, Position, make_guess_grid, parse_network
from .store import TransientDB, load_db, save_db

__version__ = "0.1.0"
