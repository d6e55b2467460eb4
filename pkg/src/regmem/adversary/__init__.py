"""Adversarial execution builders and counting witnesses."""

from .probes import GOSSIP_FLUSH, PLAIN, RESTRICTED, ValencyProbeResult, gossip_flush, valency_probe
from .report import StateFingerprint, WitnessReport, find_collisions
from .single_write import single_write_execution, witness_thm1
from .staged import (Lemma2Result, StagedExecution, build_alpha0, build_staged_execution, lemma2_search,
                     metadata_invariance, restricted_probe, restricted_probe_run, stage, witness_thm4)
from .two_write import (FlipPoint, TwoWriteExecution, build_two_write_execution, find_flip_point, splice_read,
                        witness_thm2, witness_thm3)

WITNESSES = {1: witness_thm1, 2: witness_thm2, 3: witness_thm3, 4: witness_thm4}

__all__ = ["FlipPoint", "GOSSIP_FLUSH", "Lemma2Result", "PLAIN", "RESTRICTED", "StagedExecution", "StateFingerprint",
           "TwoWriteExecution", "ValencyProbeResult", "WITNESSES", "WitnessReport", "build_alpha0",
           "build_staged_execution", "build_two_write_execution", "find_collisions", "find_flip_point",
           "gossip_flush", "lemma2_search", "metadata_invariance", "restricted_probe", "restricted_probe_run", "single_write_execution",
           "splice_read", "stage", "valency_probe", "witness_thm1", "witness_thm2", "witness_thm3", "witness_thm4"]
