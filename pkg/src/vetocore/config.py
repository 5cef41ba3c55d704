import os
from dotenv import load_dotenv

# basedir should point to project root, not src/vetocore/
basedir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    return int(value) if value not in (None, '') else default


class Config:
    # LP has n*m variables and O(n^2 m^2) triangle rows
    MAX_LP_SIZE = _env_int('VETO_MAX_LP_SIZE', 36)
    # coalition enumeration is 2^n
    MAX_COALITION_VOTERS = _env_int('VETO_MAX_COALITION_VOTERS', 12)
    # resolvability tries every completion of the added ballot up to this many candidates
    MAX_FULL_COMPLETION = _env_int('VETO_MAX_FULL_COMPLETION', 4)
    # veto orders are enumerated as multiset permutations of length N
    MAX_ORDER_LENGTH = _env_int('VETO_MAX_ORDER_LENGTH', 8)
    WORKERS = _env_int('VETO_WORKERS', 1)
    BALLOT_DIR = os.environ.get('VETO_BALLOT_DIR') or os.path.join(basedir, 'ballots')
