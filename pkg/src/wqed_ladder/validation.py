"""Property suites certifying a transport solver.

``run_validation`` draws random instances from a seeded generator and
checks flux conservation, agreement with the closed forms, the chiral
identity t_t = t_b - 1, translation invariance, the chiral limit of the
bidirectional model and ensemble determinism. The solver is injectable so
that a deliberately broken one can be shown to fail.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .closedform import (
    t_b2_closed,
    t_single_closed,
    t_t2_closed,
    two_emitter_params,
    xi2_closed,
    xi2_probability_closed,
)
from .ddi import DdiMatrix, ddi_matrix
from .disorder import DisorderSpec, sample_chain
from .ensemble import run_ensemble
from .exceptions import WaveguideRoutingError
from .observables import routing_efficiency
from .params import (
    ChiralityMode,
    EmitterChain,
    EmitterParams,
    UnitSystem,
    chain_from_separations,
)
from .scatter import ScatterProblem, ScatterTemplate, TransportSolution, solve_transport

logger = logging.getLogger(__name__)

Solver = Callable[[ScatterProblem], TransportSolution]

FLUX_TOLERANCE = 1e-12
ORACLE_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-12
TRANSLATION_TOLERANCE = 1e-12


@dataclass
class SuiteResult:
    """Outcome of one property suite.

    Attributes:
        name: Suite identifier.
        cases: Number of checked instances.
        failures: Instances outside tolerance (or raising).
        max_error: Largest observed error.
        tolerance: Acceptance threshold of ``max_error``.
        first_failure: Description of the first failing instance.
    """

    name: str
    tolerance: float
    cases: int = 0
    failures: int = 0
    max_error: float = 0.0
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, error: float, description: str) -> None:
        self.cases += 1
        if math.isnan(error):
            error = math.inf
        self.max_error = max(self.max_error, error)
        if error > self.tolerance:
            self._fail(description)

    def record_exception(self, exc: Exception, description: str) -> None:
        self.cases += 1
        self.max_error = math.inf
        self._fail(f"{description}: {exc}")

    def _fail(self, description: str) -> None:
        self.failures += 1
        if self.first_failure is None:
            self.first_failure = description

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "max_error": self.max_error if math.isfinite(self.max_error) else None,
            "tolerance": self.tolerance,
            "first_failure": self.first_failure,
        }


@dataclass
class ValidationReport:
    """Results of every suite of one validation run."""

    seed: int
    suites: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def suite(self, name: str) -> SuiteResult:
        for s in self.suites:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": "wqed-ladder/validation/v1",
            "seed": self.seed,
            "passed": self.passed,
            "suites": [s.to_dict() for s in self.suites],
        }

    def format_text(self) -> str:
        lines = [f"{'suite':<24}{'cases':>7}{'failed':>8}{'max error':>13}  status"]
        for s in self.suites:
            status = "ok" if s.passed else "FAIL"
            lines.append(
                f"{s.name:<24}{s.cases:>7}{s.failures:>8}{s.max_error:>13.3e}  {status}"
            )
            if s.first_failure:
                lines.append(f"    first failure: {s.first_failure}")
        lines.append("PASSED" if self.passed else "FAILED")
        return "\n".join(lines)


def _random_problem(
    rng: np.random.Generator,
    mode: ChiralityMode,
    gamma: float,
    symmetric: bool = False,
    n_max: int = 20,
) -> ScatterProblem:
    """Random chain with 20-60 nm gaps, Γ in [1, 20] and O(1) phases.

    ``symmetric`` forces Γ_b = Γ_t and equal group velocities.
    """
    n = int(rng.integers(1, n_max + 1))
    big_gamma_bottom = float(rng.uniform(1.0, 20.0))
    big_gamma_top = big_gamma_bottom if symmetric else float(rng.uniform(1.0, 20.0))
    params = EmitterParams(
        gamma=gamma,
        big_gamma_bottom=big_gamma_bottom,
        big_gamma_top=big_gamma_top,
        theta_dipole=float(rng.uniform(0.0, math.pi)),
        left_right_ratio=float(rng.uniform(0.0, 1.5)),
    )
    v_bottom = float(rng.uniform(0.5, 2.0))
    v_top = v_bottom if symmetric else float(rng.uniform(0.5, 2.0))
    template = ScatterTemplate(
        params=params,
        mode=mode,
        v_bottom=v_bottom,
        v_top=v_top,
        phase_scale=float(10.0 ** rng.uniform(0.0, 7.0)),
    )
    chain = chain_from_separations(rng.uniform(20.0, 60.0, n - 1), params)
    return template.bind(chain, float(rng.uniform(-300.0, 300.0)))


def _describe(problem: ScatterProblem) -> str:
    p = problem.params
    return (
        f"N={problem.chain.count} mode={problem.mode.value} delta={problem.delta:.6g} "
        f"gamma={p.gamma:.6g} Gb={p.big_gamma_bottom:.6g} Gt={p.big_gamma_top:.6g}"
    )


def check_flux_conservation(solver: Solver, rng: np.random.Generator, cases: int) -> SuiteResult:
    """Lossless instances conserve flux; lossy ones lose a fraction in [0, 1]."""
    suite = SuiteResult("flux_conservation", FLUX_TOLERANCE)
    modes = (ChiralityMode.CHIRAL, ChiralityMode.BIDIRECTIONAL)
    for index in range(cases):
        problem = _random_problem(rng, modes[index % 2], gamma=0.0)
        try:
            total = solver(problem).probabilities.total
        except WaveguideRoutingError as e:
            suite.record_exception(e, _describe(problem))
            continue
        suite.record(abs(total - 1.0), _describe(problem))

    for index in range(max(1, cases // 4)):
        problem = _random_problem(rng, modes[index % 2], gamma=float(rng.uniform(0.1, 10.0)))
        try:
            loss = solver(problem).loss
        except WaveguideRoutingError as e:
            suite.record_exception(e, _describe(problem))
            continue
        suite.record(max(0.0, -loss, loss - 1.0), f"lossy {_describe(problem)}")
    return suite


def _two_emitter_problem(rng: np.random.Generator) -> ScatterProblem:
    """N=2 chiral problem with free J and a phase θ reaching O(1) over the grid."""
    big_gamma = float(rng.uniform(1.0, 20.0))
    params = EmitterParams(
        gamma=float(rng.uniform(0.5, 10.0)),
        big_gamma_bottom=big_gamma,
        big_gamma_top=big_gamma,
    )
    units = UnitSystem()
    separation = float(rng.uniform(20.0, 60.0))
    max_phase = float(rng.uniform(0.0, math.pi))
    j_ddi = float(rng.uniform(-50.0, 50.0))
    return ScatterProblem(
        chain=EmitterChain(np.array([0.0, separation]), params),
        ddi=DdiMatrix(np.array([[0.0, j_ddi], [j_ddi, 0.0]])),
        units=units,
        phase_scale=max_phase / (300.0 * units.wavenumber_per_nm() * separation),
    )


def _relative(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


def check_oracle_equivalence(
    solver: Solver,
    rng: np.random.Generator,
    tuples: int,
    points: int,
) -> SuiteResult:
    """Solver against the one- and two-emitter closed forms."""
    suite = SuiteResult("oracle_equivalence", ORACLE_TOLERANCE)
    grid = np.linspace(-300.0, 300.0, points)
    for _ in range(tuples):
        base = _two_emitter_problem(rng)
        for delta in grid:
            problem = base.at(float(delta))
            p = two_emitter_params(problem)
            description = f"{_describe(problem)} J={p.j_ddi:.6g} theta={p.phase:.6g}"
            try:
                solution = solver(problem)
                t_b = solution.t_bottom[-1]
                t_t = solution.t_top[-1]
                error = max(
                    _relative(t_b, t_b2_closed(p)),
                    _relative(t_t, t_t2_closed(p)),
                    abs(routing_efficiency(solution) - xi2_probability_closed(p)),
                )
                if t_t + t_b != 0:
                    error = max(error, _relative((t_t - t_b) / (t_t + t_b), xi2_closed(p)))
            except WaveguideRoutingError as e:
                suite.record_exception(e, description)
                continue
            suite.record(error, description)

        single = ScatterTemplate(params=base.params).bind(
            EmitterChain(np.array([0.0]), base.params)
        )
        for delta in grid[:: max(1, points // 10)]:
            problem = single.at(float(delta))
            try:
                solution = solver(problem)
                t_b, t_t = t_single_closed(
                    problem.delta, problem.params.gamma, problem.params.big_gamma_bottom
                )
                error = max(
                    _relative(solution.t_bottom[-1], t_b), _relative(solution.t_top[-1], t_t)
                )
            except WaveguideRoutingError as e:
                suite.record_exception(e, f"single {_describe(problem)}")
                continue
            suite.record(error, f"single {_describe(problem)}")
    return suite


def check_chiral_identity(solver: Solver, rng: np.random.Generator, cases: int) -> SuiteResult:
    """t_t[s] = t_b[s] - 1 on every segment of symmetric chiral chains."""
    suite = SuiteResult("chiral_identity", IDENTITY_TOLERANCE)
    for _ in range(cases):
        problem = _random_problem(
            rng, ChiralityMode.CHIRAL, gamma=float(rng.uniform(0.0, 10.0)), symmetric=True
        )
        try:
            solution = solver(problem)
        except WaveguideRoutingError as e:
            suite.record_exception(e, _describe(problem))
            continue
        error = float(np.max(np.abs(solution.t_top - (solution.t_bottom - 1.0))))
        suite.record(error, _describe(problem))
    return suite


def _port_vector(solution: TransportSolution) -> np.ndarray:
    p = solution.probabilities
    return np.array([p.t_top, p.t_bottom, p.r_top, p.r_bottom])


def check_translation_invariance(
    solver: Solver, rng: np.random.Generator, cases: int
) -> SuiteResult:
    """Port probabilities do not change when the whole chain is shifted."""
    suite = SuiteResult("translation_invariance", TRANSLATION_TOLERANCE)
    modes = (ChiralityMode.CHIRAL, ChiralityMode.BIDIRECTIONAL)
    for index in range(cases):
        problem = _random_problem(rng, modes[index % 2], gamma=float(rng.uniform(0.0, 10.0)))
        shifted_chain = problem.chain.shifted(float(rng.uniform(-1000.0, 1000.0)))
        shifted = replace(
            problem, chain=shifted_chain, ddi=ddi_matrix(shifted_chain, problem.units)
        )
        try:
            difference = _port_vector(solver(problem)) - _port_vector(solver(shifted))
            error = float(np.max(np.abs(difference)))
        except WaveguideRoutingError as e:
            suite.record_exception(e, _describe(problem))
            continue
        suite.record(error, _describe(problem))
    return suite


def check_chirality_consistency(
    solver: Solver, rng: np.random.Generator, cases: int
) -> SuiteResult:
    """Chiral solutions reflect nothing and equal the bidirectional model with Γ_L = 0."""
    suite = SuiteResult("chirality_consistency", IDENTITY_TOLERANCE)
    for _ in range(cases):
        chiral = _random_problem(rng, ChiralityMode.CHIRAL, gamma=float(rng.uniform(0.0, 10.0)))
        no_left = replace(chiral.params, left_right_ratio=0.0)
        bidirectional = replace(
            chiral,
            chain=EmitterChain(chiral.chain.positions_nm, no_left),
            mode=ChiralityMode.BIDIRECTIONAL,
        )
        try:
            a = solver(chiral)
            b = solver(bidirectional)
        except WaveguideRoutingError as e:
            suite.record_exception(e, _describe(chiral))
            continue
        error = max(
            float(np.max(np.abs(a.r_bottom))),
            float(np.max(np.abs(a.r_top))),
            float(np.max(np.abs(_port_vector(a) - _port_vector(b)))),
        )
        suite.record(error, _describe(chiral))
    return suite


def check_determinism(seed: int) -> SuiteResult:
    """Sampling and ensemble averages do not depend on the execution schedule."""
    suite = SuiteResult("determinism", 0.0)
    spec = DisorderSpec(mu_nm=32.75, sigma_fraction=0.2, master_seed=seed)
    first = sample_chain(spec, 10, realization_index=3)
    second = sample_chain(spec, 10, realization_index=3)
    suite.record(0.0 if first == second else 1.0, "sample_chain repeat")

    template = ScatterTemplate(phase_scale=1e6)
    grid = np.linspace(-50.0, 50.0, 5)
    serial = run_ensemble(spec, template, 3, grid, 6, n_jobs=1)
    threaded = run_ensemble(spec, template, 3, grid, 6, n_jobs=2, backend="threading")
    identical = all(
        np.array_equal(serial.mean[name], threaded.mean[name], equal_nan=True)
        and np.array_equal(serial.stderr[name], threaded.stderr[name], equal_nan=True)
        for name in serial.mean
    )
    suite.record(0.0 if identical else 1.0, "run_ensemble n_jobs=1 vs n_jobs=2")
    return suite


def run_validation(
    solver: Solver = solve_transport,
    seed: int = 0,
    cases: int = 200,
    oracle_tuples: int = 20,
    oracle_points: int = 1000,
) -> ValidationReport:
    """Run every property suite against ``solver``.

    Args:
        solver: Function mapping a ScatterProblem to its TransportSolution.
        seed: Seed of the random instance generator.
        cases: Random instances per suite.
        oracle_tuples: Random (γ, Γ, J, θ) tuples of the closed-form check.
        oracle_points: Detunings per tuple in [-300, 300].

    Returns:
        ValidationReport; inspect ``passed`` or ``suite(name)``.
    """
    rng = np.random.default_rng(seed)
    report = ValidationReport(seed=seed)
    report.suites.append(check_flux_conservation(solver, rng, cases))
    report.suites.append(check_oracle_equivalence(solver, rng, oracle_tuples, oracle_points))
    report.suites.append(check_chiral_identity(solver, rng, cases))
    report.suites.append(check_translation_invariance(solver, rng, cases))
    report.suites.append(check_chirality_consistency(solver, rng, cases))
    report.suites.append(check_determinism(seed))
    for suite in report.suites:
        level = logging.INFO if suite.passed else logging.WARNING
        logger.log(
            level,
            f"Suite {suite.name}: {suite.cases} cases, {suite.failures} failures, "
            f"max error {suite.max_error:.3e}",
        )
    return report
