"""Simulation, consistency checking and storage-bound witnesses for
fault-tolerant read/write register emulations."""

from .algorithms import make_spec
from .bounds import BoundParams, bound_thm1, bound_thm2, bound_thm3, bound_thm4, figure1_table
from .consistency import check_atomic, check_regular, check_weakly_regular

__all__ = ["BoundParams", "bound_thm1", "bound_thm2", "bound_thm3", "bound_thm4", "check_atomic", "check_regular",
           "check_weakly_regular", "figure1_table", "make_spec"]
