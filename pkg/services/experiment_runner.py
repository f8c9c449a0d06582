"""Experiment service combining spaces, solvers and error analysis."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from analysis.error_norms import eigenfunction_errors
from analysis.grading import mode_grading, strong_grading
from analysis.matching import match_spectra
from analysis.rates import ErrorReport, RateEstimate, missed_targets, rates_from_reports
from config.experiment import ExperimentConfig
from core.exceptions import ConfigError, RateTargetMissed, SectorIGAError
from exact.spectrum import ExactEigenpair, eval_exact_polar, exact_spectrum
from geometry.sector import SectorGeometry, build_sector
from numerics.assembly import AssembledSystem, assemble, system_stats
from numerics.eigensolver import DiscreteSpectrum, solve
from numerics.quadrature import QuadratureRule
from services.parallel_runner import ParallelRunner, parallel_runner
from spaces.hierarchical_space import build_hierarchical_space
from spaces.tensor_space import build_tensor_space, tensor_shape

logger = logging.getLogger(__name__)

# Extra eigenpairs computed beyond the target rank so that clusters stay whole.
RANK_SLACK = 2

# Relative DOF gap accepted when matching spectrum-compare variants.
DOF_MATCH_TOLERANCE = 0.1


@dataclass
class LevelResult:
    """One refinement level: space description, spectrum and error rows."""

    J1: int
    J2: int
    levels: int
    mu: float
    space: object
    system: AssembledSystem
    spectrum: DiscreteSpectrum
    exact: List[ExactEigenpair]
    pairs: List[Tuple[int, int]]
    reports: List[ErrorReport] = field(default_factory=list)
    aligned: Optional[np.ndarray] = None

    def summary(self) -> Dict:
        info = dict(self.space.summary())
        info.update(system_stats(self.system))
        info.update(self.space.mesh.physical_diagnostics(self.space.geometry))
        info['eigen_method'] = self.spectrum.method
        info['max_residual'] = self.spectrum.max_residual
        return info


@dataclass
class ConvergenceResult:
    config: ExperimentConfig
    levels: List[LevelResult]
    rates: Dict[str, RateEstimate]
    missed: Dict[str, float]

    @property
    def reports(self) -> List[ErrorReport]:
        return [report for level in self.levels for report in level.reports]


def exact_rank(omega: float, k: int, m: int) -> Tuple[int, List[ExactEigenpair]]:
    """Zero-based position of mode (k, m) in the ascending exact spectrum."""
    count = 8
    while True:
        pairs = exact_spectrum(omega, count)
        for rank, pair in enumerate(pairs):
            if pair.k == k and pair.m == m:
                return rank, pairs
        count *= 2


class ExperimentRunner:
    """Runs solves, convergence studies and spectrum comparisons."""

    def __init__(self, runner: ParallelRunner = None):
        """Initialize the experiment runner.

        Args:
            runner: Parallel runner for independent levels and variants
        """
        self.runner = runner or parallel_runner

    def run_exact(self, omega: float, count: int) -> List[Dict]:
        """Exact eigenpairs as table rows, ascending in lambda."""
        rows = []
        for index, pair in enumerate(exact_spectrum(omega, count), start=1):
            reg = pair.regularity
            rows.append({
                'index': index,
                'k': pair.k,
                'm': pair.m,
                'nu': pair.nu,
                'frequency': pair.frequency,
                'eigenvalue': pair.eigenvalue,
                'regularity': reg.label,
                'sobolev_limit': reg.sobolev_limit if reg.sobolev_limit is not None else float('inf'),
            })
        logger.info(f"Exact spectrum: {count} pairs for omega={omega:.6g}")
        return rows

    def suggest_mu(self, omega: float, p: int, k: Optional[int] = None) -> Dict[str, float]:
        result = {'strong': strong_grading(omega, p)}
        if k is not None:
            result['mode'] = mode_grading(omega, p, k)
        return result

    def build_space(self, config: ExperimentConfig, J1: int, geo: SectorGeometry = None,
                    degree: int = None, regularity: int = None, mu: float = None):
        """Space of one schedule entry.

        Returns:
            Tuple (geometry, space, J2, levels); J2 is the outermost angular count
        """
        geo = geo or build_sector(config.omega)
        p = degree or config.degree
        k = config.k if regularity is None else regularity
        mu = config.resolved_mu(p) if mu is None else mu

        if config.hierarchical:
            # one angular cell per arc on the innermost ring
            L = config.hierarchy_levels(J1)
            if 2 ** L != config.angular_ratio * J1 or L >= J1:
                raise ConfigError(
                    f"Hierarchical J1={J1} needs ANGULAR_RATIO * J1 = 2^L with L < J1"
                )
            space = build_hierarchical_space(
                geo, p, k, L, mu, J1, geo.n_arc,
                rational=config.hierarchical_basis == 'nurbs',
            )
            return geo, space, geo.n_arc * 2 ** L, L

        J2 = config.angular_ratio * geo.n_arc * J1
        return geo, build_tensor_space(geo, p, k, J1, J2, mu), J2, 0

    def run_solve(self, config: ExperimentConfig, J1: int, assembly_workers: int = None) -> LevelResult:
        """Solve one level and compare against the exact spectrum.

        Eigenvalue errors are reported for every computed pair; eigenfunction
        errors only for the target mode.
        """
        mu = config.resolved_mu()
        geo, space, J2, levels = self.build_space(config, J1, mu=mu)
        rule = QuadratureRule(config.quadrature)
        system = assemble(space, geo, rule, max_workers=assembly_workers)

        target_rank = None
        if config.mode is not None:
            target_rank, _ = exact_rank(config.omega, *config.mode)
            n_ev = max(config.n_ev, target_rank + 1 + RANK_SLACK)
        else:
            n_ev = config.n_ev or max(1, system.num_free // 2)
        n_ev = min(n_ev, system.num_free)

        spectrum = solve(system, n_ev)
        exact = exact_spectrum(config.omega, n_ev)
        pairs = match_spectra(spectrum, exact)

        level = LevelResult(J1, J2, levels, mu, space, system, spectrum, exact, pairs)
        for d, e in pairs:
            l2 = h1 = cosine = float('nan')
            if e == target_rank:
                coefficients = system.expand(spectrum.eigenvectors[:, d])
                errors = eigenfunction_errors(coefficients, exact[e], space, geo, rule)
                l2, h1, cosine = errors.l2, errors.h1, errors.cosine
                level.aligned = coefficients * errors.scale
            level.reports.append(self._report(config, level, exact[e], e, spectrum.eigenvalues[d], l2, h1, cosine))

        logger.info(
            f"Level J1={J1}: {system.num_free} free DOFs, lambda_1={spectrum.eigenvalues[0]:.12g}"
        )
        return level

    @staticmethod
    def _report(config, level: LevelResult, pair: ExactEigenpair, rank: int,
                eigenvalue_h: float, l2: float, h1: float, cosine: float,
                degree: int = None, regularity: int = None) -> ErrorReport:
        dofs = level.system.num_free
        hierarchical = level.space.kind == 'hierarchical'
        return ErrorReport(
            index=rank + 1,
            k=pair.k,
            m=pair.m,
            nu=pair.nu,
            regularity=pair.regularity.label,
            eigenvalue=pair.eigenvalue,
            eigenvalue_h=float(eigenvalue_h),
            l2_error=l2,
            h1_error=h1,
            cosine=cosine,
            dofs=dofs,
            J1=level.J1,
            J2=level.J2,
            mu=level.mu,
            p=degree or config.degree,
            reg=config.k if regularity is None else regularity,
            hierarchical=hierarchical,
            levels=level.levels,
            h=float(dofs) ** -0.5 if hierarchical else 1.0 / level.J1,
        )

    def run_convergence(self, config: ExperimentConfig) -> ConvergenceResult:
        """Solve every schedule level and estimate convergence rates of the target mode.

        Raises:
            ConfigError: If the configuration is invalid
            SectorIGAError: If a level fails
        """
        config.validate()
        if config.mode is None:
            raise ConfigError("Convergence runs need a target MODE")

        schedule = list(config.schedule)
        # Nested pools would oversubscribe; levels already run concurrently.
        assembly_workers = 1 if self.runner.max_workers > 1 and len(schedule) > 1 else None

        def solve_level(J1: int) -> LevelResult:
            try:
                return self.run_solve(config, J1, assembly_workers)
            except SectorIGAError as e:
                logger.error(f"Level J1={J1} failed: {e}")
                raise type(e)(f"Level J1={J1}: {e}") from e

        results = self.runner.run(schedule, solve_level, label='refinement levels')
        self.runner.raise_first_error(results)
        levels = [results[J1] for J1 in schedule]

        target = [r for level in levels for r in level.reports if not math.isnan(r.h1_error)]
        rates = rates_from_reports(target) if len(target) >= 3 else {}
        for name, estimate in rates.items():
            logger.info(f"Estimated {name} rate {estimate.slope:.3f} (monotone={estimate.monotone})")

        missed = missed_targets(rates, config.targets, config.rate_tolerance) if config.targets else {}
        return ConvergenceResult(config, levels, rates, missed)

    @staticmethod
    def check_rate_targets(result: ConvergenceResult) -> None:
        """Raises RateTargetMissed when a declared rate target was missed."""
        if result.missed:
            details = ', '.join(
                f"{name}={slope:.3f} (target {result.config.targets[name]:g})"
                for name, slope in result.missed.items()
            )
            logger.error(f"Rate targets missed: {details}")
            raise RateTargetMissed(f"Rate targets missed: {details}")

    def matched_mesh(self, geo: SectorGeometry, config: ExperimentConfig, p: int, k: int) -> Tuple[int, int]:
        """(J1, J2) whose tensor space has free DOFs close to config.target_dofs.

        J1 and J2 are searched independently, J2 over multiples of n_arc.
        Among meshes within DOF_MATCH_TOLERANCE of the target, the one with
        J2 / (n_arc J1) closest to ANGULAR_RATIO wins; otherwise the smallest
        DOF gap does.
        """
        target = config.target_dofs
        n_arc = geo.n_arc
        n2_min = tensor_shape(geo, p, k, 1, n_arc)[1]
        best_key, best = None, None
        J1 = 1
        while True:
            rows = tensor_shape(geo, p, k, J1, n_arc)[0] - 1
            if rows * n2_min > (1 + DOF_MATCH_TOLERANCE) * target and best is not None:
                break
            # n2 grows by (p - k) per extra angular cell
            cells = n_arc + (target / rows - n2_min) / (p - k)
            lower = max(1, int(cells // n_arc))
            for J2 in (lower * n_arc, (lower + 1) * n_arc):
                free = rows * tensor_shape(geo, p, k, J1, J2)[1]
                gap = abs(free - target) / target
                aspect = abs(math.log(J2 / (n_arc * J1 * config.angular_ratio)))
                key = (0, aspect, gap) if gap <= DOF_MATCH_TOLERANCE else (1, gap, aspect)
                if best_key is None or key < best_key:
                    best_key, best = key, (J1, J2)
            J1 += 1
        logger.debug(f"Matched mesh for p={p}, k={k}: J1={best[0]}, J2={best[1]}")
        return best

    def run_spectrum_compare(self, config: ExperimentConfig) -> List[Dict]:
        """Relative eigenvalue errors of each (p, k, mu) variant at matched DOF counts.

        Variants default to C^{p-1} and C^0 at the configured degree and mu.
        """
        config.validate()
        variants = list(config.variants) or [
            (config.degree, config.degree - 1, config.mu),
            (config.degree, 0, config.mu),
        ]
        geo = build_sector(config.omega)
        rule = QuadratureRule(config.quadrature)
        assembly_workers = 1 if self.runner.max_workers > 1 and len(variants) > 1 else None

        def run_variant(index: int) -> List[Dict]:
            p, k, mu_rule = variants[index]
            mu = config.resolved_mu(p, mu_rule)
            J1, J2 = self.matched_mesh(geo, config, p, k)
            space = build_tensor_space(geo, p, k, J1, J2, mu)
            system = assemble(space, geo, rule, max_workers=assembly_workers)
            n_ev = min(config.n_ev or max(1, system.num_free // 2), system.num_free)
            spectrum = solve(system, n_ev)
            exact = exact_spectrum(config.omega, n_ev)
            level = LevelResult(J1, J2, 0, mu, space, system, spectrum, exact, match_spectra(spectrum, exact))
            label = f"p={p},k={k},mu={mu:.6g}"
            rows = []
            for d, e in level.pairs:
                report = self._report(config, level, exact[e], e, spectrum.eigenvalues[d],
                                      float('nan'), float('nan'), float('nan'), p, k)
                row = {'variant': label}
                row.update(report.to_row())
                rows.append(row)
            logger.info(f"Variant {label}: {system.num_free} free DOFs, {n_ev} eigenvalues")
            return rows

        results = self.runner.run(list(range(len(variants))), run_variant, label='variants')
        self.runner.raise_first_error(results)
        return [row for index in range(len(variants)) for row in results[index]]

    def sample_field(self, level: LevelResult, pair: ExactEigenpair,
                     n_radial: int = 32, n_angular: int = 128) -> List[Dict]:
        """Aligned discrete and exact eigenfunction on a polar parameter grid.

        The vertex is left out; radii run over i / n_radial for i = 1..n_radial.
        """
        if level.aligned is None:
            raise SectorIGAError("No aligned eigenfunction on this level")
        geo = level.space.geometry
        r = np.arange(1, n_radial + 1) / n_radial
        t = np.arange(n_angular + 1) / n_angular
        z1, z2 = (a.ravel() for a in np.meshgrid(r, t, indexing='ij'))

        ev = level.space.evaluate(z1, z2)
        padded = np.append(level.aligned, 0.0)
        u_h = np.einsum('na,na->n', ev.values, padded[ev.indices])
        phi = geo.polar_angle(z2)
        u, _ = eval_exact_polar(pair, z1, phi)
        xy = geo.map(z1, z2)
        return [
            {'r': z1[i], 'phi': phi[i], 'x': xy[i, 0], 'y': xy[i, 1], 'u_h': u_h[i], 'u': u[i]}
            for i in range(z1.size)
        ]


# Create a singleton instance
experiment_runner = ExperimentRunner()
