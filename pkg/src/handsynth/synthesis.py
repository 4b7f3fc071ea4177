"""Dimensional synthesis: hybrid genetic search with Levenberg-Marquardt refinement.

Each restart evolves a population of raw design vectors (fitness is the
residual sum of squares). Every ``lm_every`` generations the best
``lm_candidates`` individuals are polished by MINPACK's Levenberg-Marquardt
and written back into the population. The run stops as soon as a polished
individual reaches ``error_tolerance``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.optimize import least_squares

from .fk import (
    FKProgram,
    HandConfiguration,
    Task,
    branch_acceleration,
    branch_pose,
    branch_twist,
    build_fk,
    check_task_size,
)
from .residuals import ResidualSystem
from .screws import dq_transform_points, normalize_line
from .topology import TreeTopology

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    population_size: int = 100
    generations: int = 200
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.3
    elite_count: int = 2
    lm_every: int = 20
    lm_candidates: int = 5
    lm_max_iterations: int = 400
    lm_tolerance: float = 1e-15
    error_tolerance: float = 1e-10
    seed: int = 0
    max_restarts: int = 10

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "seed" and not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")
        if self.elite_count >= self.population_size:
            raise ValueError("elite_count must be smaller than population_size")

    def replace(self, **overrides) -> SolverConfig:
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        d = asdict(self)
        d.update(overrides)
        return SolverConfig(**d)


@dataclass
class SynthesisResult:
    topology: TreeTopology
    configuration: HandConfiguration
    final_error: float
    iterations: int
    wall_time: float
    converged: bool
    seed: int
    design_vector: np.ndarray = field(repr=False, default=None)
    lm_calls: int = 0
    generations_run: int = 0


class _Search:
    def __init__(self, system: ResidualSystem, config: SolverConfig, rng: np.random.Generator):
        self.system = system
        self.config = config
        self.rng = rng
        self.lm_calls = 0
        self.generations_run = 0
        L = system.layout
        self.method = "lm" if L.n_residuals >= L.n_unknowns else "trf"

    def polish(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        cfg = self.config
        self.lm_calls += 1
        tol = cfg.lm_tolerance
        try:
            r = least_squares(
                self.system.residuals,
                x,
                jac=self.system.jacobian,
                method=self.method,
                max_nfev=cfg.lm_max_iterations,
                xtol=tol,
                ftol=tol,
                gtol=tol,
            )
            x = r.x
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.debug("local refinement failed: %s", exc)
        return x, self.system.error(x)

    def tournament(self, fitness: np.ndarray, n: int) -> np.ndarray:
        picks = self.rng.integers(0, fitness.size, size=(n, self.config.tournament_size))
        return picks[np.arange(n), np.argmin(fitness[picks], axis=1)]

    def breed(self, pop: np.ndarray, fitness: np.ndarray, generation: int) -> np.ndarray:
        cfg = self.config
        P, n = pop.shape
        order = np.argsort(fitness)
        n_children = P - cfg.elite_count
        a = pop[self.tournament(fitness, n_children)]
        b = pop[self.tournament(fitness, n_children)]
        # blend crossover: genes drawn from the segment between parents, widened by 25%
        alpha = self.rng.uniform(-0.25, 1.25, size=(n_children, n))
        cross = self.rng.random(n_children) < cfg.crossover_rate
        children = np.where(cross[:, None], alpha * a + (1 - alpha) * b, a)
        anneal = 1.0 - generation / cfg.generations
        scale = cfg.mutation_scale * (0.1 + 0.9 * anneal)
        mask = self.rng.random((n_children, n)) < cfg.mutation_rate
        children = children + mask * self.rng.normal(scale=scale, size=(n_children, n))
        return np.concatenate([pop[order[: cfg.elite_count]], children])

    def run_restart(self, deadline: float | None) -> tuple[np.ndarray, float]:
        cfg = self.config
        system = self.system
        pop = system.random_population(cfg.population_size, self.rng)
        fitness = system.sse_batch(pop)
        best_x, best_err = pop[np.argmin(fitness)], np.inf
        for gen in range(cfg.generations):
            self.generations_run += 1
            if gen % cfg.lm_every == 0:
                for i in np.argsort(fitness)[: cfg.lm_candidates]:
                    x, err = self.polish(pop[i])
                    pop[i] = x
                    fitness[i] = float(np.sum(system.residuals(x) ** 2))
                    if err < best_err:
                        best_x, best_err = x, err
                    if best_err <= cfg.error_tolerance:
                        return best_x, best_err
                if deadline is not None and time.perf_counter() > deadline:
                    break
            pop = self.breed(pop, fitness, gen)
            fitness = system.sse_batch(pop)
            fitness[~np.isfinite(fitness)] = np.inf
        i = int(np.argmin(fitness))
        err = system.error(pop[i])
        if err < best_err:
            best_x, best_err = pop[i], err
        return best_x, best_err


def solve(
    task: Task,
    t: TreeTopology,
    config: SolverConfig | None = None,
    time_limit: float | None = None,
    check: bool = True,
) -> SynthesisResult:
    """Find joint axes and joint motion that reproduce ``task`` on topology ``t``.

    Raises :class:`~handsynth.fk.UnsolvableTaskError` when the topology is not
    solvable or the task has more items than the topology admits. With a
    fixed seed the result is deterministic. ``check=False`` skips that gate.
    """
    config = config or SolverConfig()
    if check:
        check_task_size(t, task.m)
    prog = build_fk(t)
    system = ResidualSystem(task, prog)
    rng = np.random.default_rng(config.seed)
    search = _Search(system, config, rng)
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    best_x, best_err = None, np.inf
    restarts = 0
    for restarts in range(1, config.max_restarts + 1):
        x, err = search.run_restart(deadline)
        # report on the Plücker-projected axes
        xp = system.pack(system.configuration(x, project=True))
        err = system.error(xp)
        log.debug("restart %d: error %.3e", restarts, err)
        if err < best_err:
            best_x, best_err = xp, err
        if best_err <= config.error_tolerance:
            break
        if deadline is not None and time.perf_counter() > deadline:
            break
    return SynthesisResult(
        topology=t,
        configuration=system.configuration(best_x, project=False),
        final_error=best_err,
        iterations=restarts,
        wall_time=time.perf_counter() - start,
        converged=best_err <= config.error_tolerance,
        seed=config.seed,
        design_vector=best_x,
        lm_calls=search.lm_calls,
        generations_run=search.generations_run,
    )


PROBE_POINTS = np.array([[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)])


def verify(cfg: HandConfiguration | SynthesisResult, task: Task, prog: FKProgram | None = None) -> float:
    """Worst discrepancy of the hand against the task, measured on probe points.

    Position equations are compared by moving the corners of the unit cube
    with both the hand's branch displacement and the task's relative
    displacement. Twist and acceleration equations contribute their residual
    norms. Works on the normalised axes, independently of the solver's
    residual metric.
    """
    if isinstance(cfg, SynthesisResult):
        prog = prog or build_fk(cfg.topology)
        cfg = cfg.configuration
    if prog is None:
        raise ValueError("an FK program is needed to verify a bare configuration")
    cfg = HandConfiguration(normalize_line(cfg.axes), cfg.angles, cfg.rates, cfg.accels)
    rel = task.relative_displacements()
    worst = 0.0
    for i in range(prog.n_branches):
        for k in range(1, task.n_positions + 1):
            got = dq_transform_points(branch_pose(cfg, prog, i, k), PROBE_POINTS)
            want = dq_transform_points(rel[i, k - 1], PROBE_POINTS)
            worst = max(worst, float(np.max(np.linalg.norm(got - want, axis=1))))
    for v, slot in enumerate(task.velocities):
        for i in range(prog.n_branches):
            tw = branch_twist(cfg, prog, i, slot.position, cfg.rates[v])
            worst = max(worst, float(np.linalg.norm(tw - slot.twists[i])))
    for a, slot in enumerate(task.accelerations):
        for i in range(prog.n_branches):
            acc = branch_acceleration(cfg, prog, i, slot.position, cfg.rates[slot.velocity_slot], cfg.accels[a])
            worst = max(worst, float(np.linalg.norm(acc - slot.accelerations[i])))
    return worst


def build_residuals(task: Task, prog: FKProgram) -> ResidualSystem:
    return ResidualSystem(task, prog)
