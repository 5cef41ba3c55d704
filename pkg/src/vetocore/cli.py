"""Command line for veto-core elections: winners, cores, distortion, axiom sweeps and simulations."""

import enum
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import attrs
import numpy as np
import toml
from cyclopts import App
from cyclopts.exceptions import CycloptsError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from vetocore.axioms import demonstrate_violations, run_axiom_sweep
from vetocore.config import Config
from vetocore.core import BlockingPair, core_certificates, veto_core
from vetocore.distortion import INFINITY, distortion
from vetocore.election import (
    Domain, Election, WeightVector, check_weights, k_approval_weights, load_election,
    plurality_weights, random_election, uniform_weights, veto_weights,
)
from vetocore.errors import InvariantViolation, VetoError, VetoOrderError, WeightError
from vetocore.matching import Matching, tied_winners
from vetocore.rules import VetoOrder, serial_veto, simultaneous_veto, veto_order_for_matching

logger = logging.getLogger(__name__)

cns = Console()
err = Console(stderr=True)
app = App(name="veto", help="Generalized veto-core voting rules on ranked ballots.")
simulate_app = App(name="simulate", help="Monte-Carlo experiments on Impartial Culture elections.")
app.command(simulate_app)


class WeightKind(enum.Enum):
    UNIFORM = 'uniform'
    PLURALITY = 'plurality'
    VETO = 'veto'
    K_APPROVAL = 'k-approval'
    EXPLICIT = 'explicit'


CANDIDATE_ONLY = {WeightKind.PLURALITY, WeightKind.VETO, WeightKind.K_APPROVAL}


@attrs.frozen
class WeightSpec:
    """How to build a weight vector: `uniform`, `plurality`, `veto`, `k-approval:K` or a TOML file path."""
    kind: WeightKind
    k: int | None = None
    path: Path | None = None

    @classmethod
    def parse(cls, text: str) -> 'Self':
        name, _, argument = text.partition(':')
        match name:
            case 'uniform' | 'plurality' | 'veto' if not argument:
                return cls(WeightKind(name))
            case 'k-approval':
                try:
                    return cls(WeightKind.K_APPROVAL, k=int(argument))
                except ValueError:
                    raise WeightError(f"k-approval needs an integer k, got {argument!r}") from None
        path = Path(text)
        if path.suffix != '.toml' and not path.exists():
            raise WeightError(
                f"unknown weight spec {text!r}; use uniform, plurality, veto, k-approval:K or a TOML file"
            )
        return cls(WeightKind.EXPLICIT, path=path)

    def build(self, e: Election, domain: Domain) -> WeightVector:
        """The weight vector for `e`, normalised to total 1."""
        if domain is Domain.VOTERS and self.kind in CANDIDATE_ONLY:
            raise WeightError(f"{self.kind.value} weights are defined on candidates only")
        match self.kind:
            case WeightKind.UNIFORM:
                weights = uniform_weights(e, domain)
            case WeightKind.PLURALITY:
                weights = plurality_weights(e)
            case WeightKind.VETO:
                weights = veto_weights(e)
            case WeightKind.K_APPROVAL:
                weights = k_approval_weights(e, self.k)
            case WeightKind.EXPLICIT:
                weights = _load_weight_file(self.path, domain)
        check_weights(e, weights, domain)
        if weights.total <= 0:
            raise WeightError(f"{self} gives weights with total 0")
        return weights.normalized()

    def __str__(self) -> str:
        if self.kind is WeightKind.K_APPROVAL:
            return f"k-approval:{self.k}"
        if self.kind is WeightKind.EXPLICIT:
            return str(self.path)
        return self.kind.value


def _load_weight_file(path: Path, domain: Domain) -> WeightVector:
    with open(path, 'r', encoding='utf-8') as f:
        data = toml.load(f)
    weights = {}
    for key, value in data.items():
        if domain is Domain.VOTERS:
            try:
                key = int(key)
            except ValueError:
                raise WeightError(f"voter weight keys must be voter ids, got {key!r}") from None
        try:
            weights[key] = Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            raise WeightError(f"weight of {key!r} is not a rational number: {value!r}") from None
    return WeightVector(domain, weights)


def _ballots(file: Path) -> Election:
    """Load a ballot file; a relative path missing from the working directory is looked up in Config.BALLOT_DIR."""
    if not file.exists() and not file.is_absolute():
        shipped = Path(Config.BALLOT_DIR) / file
        if shipped.exists():
            logger.debug(f"reading {file} from {Config.BALLOT_DIR}")
            file = shipped
    return load_election(file)


def _emit(data, pretty: bool):
    if pretty:
        cns.print_json(data=data)
    else:
        print(json.dumps(data))


def _rational(value) -> str:
    return 'infinity' if value == INFINITY else str(value)


@app.command(name="winners")
def winners_command(
        file: Path, *, p: str = "uniform", q: str = "plurality", trace: bool = True, pretty: bool = False,
) -> int:
    """Run SimultaneousVeto (plurality weights by default) on a ballot file."""
    e = _ballots(file)
    p_weights = WeightSpec.parse(p).build(e, Domain.VOTERS)
    q_weights = WeightSpec.parse(q).build(e, Domain.CANDIDATES)
    outcome = simultaneous_veto(e, p_weights, q_weights)
    _emit(outcome.to_dict(e, trace=trace), pretty)
    return 0


@app.command(name="serial")
def serial_command(file: Path, *, order: str, q: str = "plurality", pretty: bool = False) -> int:
    """Run SerialVeto for a comma separated veto order such as `--order 1,2,1`."""
    e = _ballots(file)
    try:
        sequence = [int(v) for v in order.split(',') if v.strip()]
    except ValueError:
        raise VetoOrderError(f"veto order must list voter ids, got {order!r}") from None
    q_weights = WeightSpec.parse(q).build(e, Domain.CANDIDATES)
    outcome = serial_veto(e, q_weights, VetoOrder(sequence))
    _emit(outcome.to_dict(e, trace=False), pretty)
    return 0


@app.command(name="core")
def core_command(file: Path, *, p: str = "uniform", q: str = "plurality", pretty: bool = False) -> int:
    """List the (p,q)-veto core with a matching or blocking coalition for every candidate."""
    e = _ballots(file)
    p_weights = WeightSpec.parse(p).build(e, Domain.VOTERS)
    q_weights = WeightSpec.parse(q).build(e, Domain.CANDIDATES)
    certificates = core_certificates(e, p_weights, q_weights)
    data = {
        'core': [c for c, cert in certificates.items() if isinstance(cert, Matching)],
        'certificates': {
            c: {'blocking': cert.to_dict(e)} if isinstance(cert, BlockingPair) else {'matching': cert.to_dict(e)}
            for c, cert in certificates.items()
        },
    }
    _emit(data, pretty)
    return 0


@app.command(name="distortion")
def distortion_command(file: Path, *, candidate: list[str] | None = None, pretty: bool = False) -> int:
    """Exact metric distortion of the given candidates (all of them by default)."""
    e = _ballots(file)
    names = candidate or list(e.candidates)
    _emit({c: _rational(distortion(e, c)) for c in names}, pretty)
    return 0


@app.command(name="axioms")
def axioms_command(
        *,
        n: int = 4,
        m: int = 4,
        trials: int = 100,
        seed: int = 0,
        axiom: list[str] | None = None,
        exhaustive: bool = False,
        violations: bool = False,
        workers: int | None = None,
) -> int:
    """Sweep axiom checkers over random (or all) small elections; one JSON line per report."""
    failed = False
    for report in run_axiom_sweep(axiom, n, m, trials, seed, workers=workers, exhaustive=exhaustive):
        print(json.dumps(report.to_dict()))
        failed |= not report.passed
    if violations:
        for demo in demonstrate_violations():
            print(json.dumps({'demo': demo.name} | demo.to_dict()))
            failed |= not demo.holds
    return 1 if failed else 0


@app.command(name="order-for-matching")
def order_for_matching_command(file: Path, *, matching: str, pretty: bool = False) -> int:
    """Turn an integral matching (JSON text or a path to it) into a SerialVeto order electing its tied winners."""
    e = _ballots(file)
    text = matching if matching.lstrip().startswith('{') else Path(matching).read_text(encoding='utf-8')
    m = Matching.from_dict(e, json.loads(text))
    order = veto_order_for_matching(e, m.row_marginal, m.column_marginal, m)
    outcome = serial_veto(e, m.column_marginal, order, p=m.row_marginal)
    _emit({
        'order': list(order.sequence),
        'tied_winners': tied_winners(e, m).ordered(e),
        'winners': outcome.winners.ordered(e),
    }, pretty)
    return 0


@attrs.frozen
class CoreSizeSummary:
    m: int
    n: int
    trials: int
    seed: int
    q: str
    mean: float
    stddev: float
    histogram: dict[int, int]

    def to_dict(self) -> dict:
        return attrs.asdict(self) | {'histogram': {str(k): v for k, v in sorted(self.histogram.items())}}


def _core_size_trial(args: tuple) -> int:
    m, n, seed, trial, q_spec = args
    stream = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(trial,))
    election_seed = int(stream.generate_state(1, dtype=np.uint64)[0])
    e = random_election(m, n, election_seed)
    p = uniform_weights(e, Domain.VOTERS)
    return len(veto_core(e, p, q_spec.build(e, Domain.CANDIDATES)))


def simulate_core_size(
        m: int, n: int, trials: int, seed: int, q_spec: WeightSpec, *, workers: int | None = None,
) -> CoreSizeSummary:
    """Mean, standard deviation and histogram of |veto core| over Impartial Culture elections."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    workers = Config.WORKERS if workers is None else workers
    jobs = [(m, n, seed, trial, q_spec) for trial in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sizes = list(pool.map(_core_size_trial, jobs))
    else:
        sizes = [_core_size_trial(job) for job in jobs]
    values, counts = np.unique(np.array(sizes), return_counts=True)
    return CoreSizeSummary(
        m, n, trials, seed, str(q_spec),
        float(np.mean(sizes)),
        float(np.std(sizes)),
        {int(v): int(c) for v, c in zip(values, counts)},
    )


@simulate_app.command(name="core-size")
def core_size_command(
        *, m: int, n: int, trials: int = 200, seed: int = 0, q: str = "uniform",
        workers: int | None = None, pretty: bool = False,
) -> int:
    """Size of the (uniform, q)-veto core on random elections."""
    summary = simulate_core_size(m, n, trials, seed, WeightSpec.parse(q), workers=workers)
    _emit(summary.to_dict(), pretty)
    return 0


def _configure_logging(verbose: bool):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err, show_path=False)],
        force=True,
    )


def run(argv: Sequence[str] | None = None) -> int:
    """Dispatch one command line; returns the exit code (0 ok, 1 failed check, 2 bad usage or input)."""
    tokens = list(sys.argv[1:] if argv is None else argv)
    verbose = '--verbose' in tokens
    tokens = [t for t in tokens if t != '--verbose']
    _configure_logging(verbose)
    try:
        result = app(tokens, exit_on_error=False)
    except CycloptsError:
        return 2
    except InvariantViolation as exc:
        err.print(f"[bold red]invariant violated:[/] {escape(str(exc))}")
        return 1
    except (VetoError, ValueError, OSError) as exc:
        err.print(f"[bold red]error:[/] {escape(str(exc))}")
        return 2
    return result if isinstance(result, int) else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
