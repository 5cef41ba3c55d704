"""
Veto Core

Generalized veto-core voting rules (SerialVeto, SimultaneousVeto) on ranked ballots, with
exact witnessing matchings, a veto-core oracle and an exact metric-distortion LP.
"""

from vetocore.core import BlockingPair, find_blocking, veto_core
from vetocore.distortion import distortion
from vetocore.election import Domain, Election, WeightVector, load_election, parse_election, tally
from vetocore.matching import Matching, WinnerSet, find_admitted_matching, tied_winners
from vetocore.rules import (
    RuleOutcome, VetoOrder, serial_veto, simultaneous_plurality_veto, simultaneous_veto,
)

__all__ = [
    'BlockingPair', 'Domain', 'Election', 'Matching', 'RuleOutcome', 'VetoOrder', 'WeightVector',
    'WinnerSet', 'distortion', 'find_admitted_matching', 'find_blocking', 'load_election',
    'parse_election', 'serial_veto', 'simultaneous_plurality_veto', 'simultaneous_veto', 'tally',
    'tied_winners', 'veto_core',
]
