"""Monte Carlo risk harness: seeded experiments, rate fits, bound checks.

Risk cells are independent work units keyed by ``(n, replicate)``.  Each
cell derives its own seed from the master seed by a counter-based integer
hash (two rounds of multiply-xor-shift with the fixed constants
0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB), so results
are bitwise reproducible regardless of worker count or scheduling.

The risk, bias and stochastic terms of one cell are all computed on the
same uniform grid with composite trapezoid weights.  Sharing the grid
makes the decomposition inequality

    |fhat - f|^p <= 2^{p-1} (|E fhat - f|^p + |fhat - E fhat|^p)

hold node by node (hence after weighting), and lets an independently
coded dense-grid reimplementation match the cell risk to near machine
precision.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .densities import Density, plateau_density, tensor_bump_density
from .estimator import KdeModel, bandwidth_rule, kde_on_grid, mean_field_on_axes
from .kernels import build_order_kernel
from .lower_bound import LowerBoundFamily, chi2_affinity, family_constants, family_distance
from .product import ProductKernel, q_norm, tensor_kernel, verify_class
from .quadrature import Box, QuadRule, integrate, lp_norm

__all__ = [
    "ExperimentConfig",
    "RiskCell",
    "RiskReport",
    "LowerHypothesesReport",
    "rate_exponent",
    "cell_seed",
    "fit_rate",
    "mc_risk",
    "config_from_dict",
    "upper_bound_constant",
    "verify_lower_hypotheses",
    "report_to_csv",
    "report_summary",
]

_MASK64 = (1 << 64) - 1

_REGIMES = ("mixed-upper", "classical-min", "classical-sum", "aniso",
            "noncompact-lower", "nu-fold")


def rate_exponent(s_list: Sequence[int], d_list: Sequence[int], p: float,
                  regime: str) -> Fraction:
    """Per-sample exponent of ``n`` in the named bound, as an exact rational.

    The factor ``p`` multiplying the exponent in the risk bounds is not
    included; callers wanting the risk slope multiply by ``p``.
    """
    if len(s_list) != len(d_list) or not s_list:
        raise ValueError("s_list and d_list must have equal positive length")
    if any(s < 1 for s in s_list) or any(d < 1 for d in d_list):
        raise ValueError("smoothness and dimension entries must be >= 1")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = [Fraction(int(v)) for v in s_list]
    d = [Fraction(int(v)) for v in d_list]
    total_s, total_d = sum(s), sum(d)
    if regime == "mixed-upper":
        if len(s) != 2:
            raise ValueError("mixed-upper is a two-block rate")
        return total_s / (2 * total_s + total_d)
    if regime == "nu-fold":
        return total_s / (2 * total_s + total_d)
    if regime == "classical-sum":
        return total_s / (2 * total_s + total_d)
    if regime == "classical-min":
        s_min = min(s)
        return s_min / (2 * s_min + total_d)
    if regime == "aniso":
        return 1 / (2 + sum(di / si for si, di in zip(s, d)))
    if regime == "noncompact-lower":
        pf = Fraction(p)
        return total_s * (pf - 1) / (total_s * pf + total_d * (pf - 1))
    raise ValueError(f"unknown regime {regime!r}; expected one of {_REGIMES}")


def _mix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def cell_seed(master_seed: int, n: int, replicate: int) -> int:
    """64-bit cell seed mixed from (master_seed, n, replicate)."""
    s = _mix64(master_seed & _MASK64)
    s = _mix64(s ^ (n & _MASK64))
    s = _mix64(s ^ (replicate & _MASK64))
    return s


# ----------------------------- configuration -----------------------------

def _build_truth(doc: dict) -> Density:
    kind = doc["name"]
    params = doc.get("params", {})
    if kind == "tensor_bump":
        return tensor_bump_density(params["widths"], params.get("centers"))
    if kind == "plateau":
        density, _ = plateau_density(params["N"], params["kappa"], params["dim"])
        return density
    raise ValueError(f"unknown truth density {kind!r}")


def _build_kernel(doc: dict) -> ProductKernel:
    s1, s2 = int(doc["s1"]), int(doc["s2"])
    d1, d2 = int(doc["d1"]), int(doc["d2"])
    strict = bool(doc.get("strict", True))
    return tensor_kernel(build_order_kernel(s1, strict), d1,
                         build_order_kernel(s2, strict), d2, s1, s2)


@dataclass(frozen=True)
class ExperimentConfig:
    truth: Density
    kernel: ProductKernel
    p: float
    sample_sizes: tuple[int, ...]
    replicates: int
    eval_box: Box
    eval_rule: QuadRule
    master_seed: int
    slope_tol: float = 0.15
    source_doc: dict | None = None

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sample_sizes)
        object.__setattr__(self, "sample_sizes", sizes)
        if len(sizes) < 3 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sample_sizes must be strictly increasing, length >= 3")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.p < 2 and not np.all(np.isfinite(self.truth.support.widths())):
            raise ValueError("p < 2 requires a compactly supported truth density")

    @property
    def theoretical_exponent(self) -> float:
        frac = rate_exponent([self.kernel.s1, self.kernel.s2],
                             [self.kernel.d1, self.kernel.d2], self.p, "mixed-upper")
        return self.p * float(frac)


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a config from its JSON mirror, deriving grid defaults.

    The default evaluation box pads the truth support by the largest
    bandwidth on the schedule; default panels resolve half the smaller of
    the smallest bandwidth and the truth feature scale.
    """
    truth = _build_truth(doc["truth"])
    kernel = _build_kernel(doc["kernel"])
    sizes = tuple(int(n) for n in doc["sample_sizes"])
    k = kernel
    h_max = bandwidth_rule(min(sizes), k.s1, k.s2, k.d1, k.d2)
    h_min = bandwidth_rule(max(sizes), k.s1, k.s2, k.d1, k.d2)
    if "eval_box" in doc:
        eval_box = Box(tuple(doc["eval_box"]["lower"]), tuple(doc["eval_box"]["upper"]))
    else:
        support = truth.support
        eval_box = Box(tuple(lo - h_max for lo in support.lower),
                       tuple(hi + h_max for hi in support.upper))
    if "eval_rule" in doc:
        eval_rule = QuadRule(int(doc["eval_rule"]["nodes_per_panel"]),
                             tuple(int(v) for v in doc["eval_rule"]["panels_per_axis"]))
    else:
        feature = float(min(1.0, np.min(truth.support.widths()) / 4.0))
        eval_rule = QuadRule.for_box(eval_box, feature_scale=min(h_min, feature),
                                     nodes_per_panel=8)
    return ExperimentConfig(
        truth=truth, kernel=kernel, p=float(doc["p"]), sample_sizes=sizes,
        replicates=int(doc["replicates"]), eval_box=eval_box, eval_rule=eval_rule,
        master_seed=int(doc["master_seed"]),
        slope_tol=float(doc.get("slope_tol", 0.15)), source_doc=doc,
    )


# ----------------------------- risk cells -----------------------------

@dataclass(frozen=True)
class RiskCell:
    n: int
    replicate: int
    seed: int
    h: float
    risk: float
    bias_p: float
    stochastic_p: float


@dataclass(frozen=True)
class RiskReport:
    cells: tuple[RiskCell, ...]
    fitted_slope: float
    slope_stderr: float
    theoretical_exponent: float


def _trapezoid_axes(box: Box, rule: QuadRule) -> tuple[list[np.ndarray], list[np.ndarray]]:
    panels = rule.panels_per_axis
    if len(panels) == 1 and box.dim > 1:
        panels = panels * box.dim
    axes, weights = [], []
    for lo, hi, p in zip(box.lower, box.upper, panels):
        npts = p * rule.nodes_per_panel + 1
        ax = np.linspace(lo, hi, npts)
        step = (hi - lo) / (npts - 1)
        w = np.full(npts, step)
        w[0] = w[-1] = 0.5 * step
        axes.append(ax)
        weights.append(w)
    return axes, weights


def _truth_on_axes(truth: Density, axes: list[np.ndarray]) -> np.ndarray:
    if truth.axis_factors is not None:
        grid = truth.axis_factors[0].pdf(axes[0])
        for j in range(1, len(axes)):
            grid = np.multiply.outer(grid, truth.axis_factors[j].pdf(axes[j]))
        return grid
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return truth.field.eval(pts).reshape([len(a) for a in axes])


def _weight_grid(weights: list[np.ndarray]) -> np.ndarray:
    grid = weights[0]
    for w in weights[1:]:
        grid = np.multiply.outer(grid, w)
    return grid


@dataclass(frozen=True)
class _SharedGrids:
    axes: tuple[np.ndarray, ...]
    weights: np.ndarray
    truth_grid: np.ndarray


def _shared_grids(config: ExperimentConfig) -> _SharedGrids:
    axes, axis_weights = _trapezoid_axes(config.eval_box, config.eval_rule)
    return _SharedGrids(axes=tuple(axes), weights=_weight_grid(axis_weights),
                        truth_grid=_truth_on_axes(config.truth, axes))


def _mean_grid(config: ExperimentConfig, h: float, shared: _SharedGrids) -> np.ndarray:
    return mean_field_on_axes(config.kernel, h, config.truth, list(shared.axes))


def _compute_cell(config: ExperimentConfig, n: int, replicate: int,
                  shared: _SharedGrids, mean_grid: np.ndarray,
                  bias_p: float, h: float) -> RiskCell:
    seed = cell_seed(config.master_seed, n, replicate)
    sample = config.truth.sample(seed, n)
    model = KdeModel(kernel=config.kernel, h=h, sample=sample)
    fhat = kde_on_grid(model, list(shared.axes))
    p, w = config.p, shared.weights
    risk = float(np.sum(w * np.abs(fhat - shared.truth_grid) ** p))
    stochastic = float(np.sum(w * np.abs(fhat - mean_grid) ** p))
    return RiskCell(n=n, replicate=replicate, seed=seed, h=h, risk=risk,
                    bias_p=bias_p, stochastic_p=stochastic)


@lru_cache(maxsize=4)
def _worker_state(doc_json: str):
    config = config_from_dict(json.loads(doc_json))
    return config, _shared_grids(config)


@lru_cache(maxsize=32)
def _worker_mean(doc_json: str, n: int):
    config, shared = _worker_state(doc_json)
    k = config.kernel
    h = bandwidth_rule(n, k.s1, k.s2, k.d1, k.d2)
    mean_grid = _mean_grid(config, h, shared)
    bias_p = float(np.sum(shared.weights
                          * np.abs(mean_grid - shared.truth_grid) ** config.p))
    return h, mean_grid, bias_p


def _cell_worker(doc_json: str, n: int, replicate: int) -> RiskCell:
    config, shared = _worker_state(doc_json)
    h, mean_grid, bias_p = _worker_mean(doc_json, n)
    return _compute_cell(config, n, replicate, shared, mean_grid, bias_p, h)


def fit_rate(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """OLS slope and its standard error on (log n, log risk)."""
    if len(points) < 3:
        raise ValueError("rate fitting needs at least 3 points")
    ns = np.array([q[0] for q in points], dtype=float)
    risks = np.array([q[1] for q in points], dtype=float)
    if np.any(risks <= 0):
        raise ValueError("all risks must be positive for a log-log fit")
    x = np.log(ns)
    y = np.log(risks)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - (y.mean() + slope * xc)
    dof = len(points) - 2
    stderr = math.sqrt(max(float(resid @ resid), 0.0) / dof / sxx)
    return slope, stderr


def mc_risk(config: ExperimentConfig | dict, workers: int = 1) -> RiskReport:
    """Monte Carlo risk over the sample-size schedule.

    With ``workers > 1`` the config must be the JSON-mirror dict so cells
    can be shipped to worker processes; results are identical to the
    sequential path because every cell is a pure function of
    ``(config, n, replicate)``.
    """
    doc = None
    if isinstance(config, dict):
        doc = config
        config = config_from_dict(doc)
    elif config.source_doc is not None:
        doc = config.source_doc
    cells: dict[tuple[int, int], RiskCell] = {}
    if workers > 1:
        if doc is None:
            raise ValueError("parallel mc_risk needs a dict config (JSON mirror)")
        jobs = [(n, rep) for n in config.sample_sizes
                for rep in range(config.replicates)]
        doc_json = json.dumps(doc, sort_keys=True)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_cell_worker, doc_json, n, rep): (n, rep)
                       for n, rep in jobs}
            for fut, key in futures.items():
                cells[key] = fut.result()
    else:
        shared = _shared_grids(config)
        k = config.kernel
        for n in config.sample_sizes:
            h = bandwidth_rule(n, k.s1, k.s2, k.d1, k.d2)
            mean_grid = _mean_grid(config, h, shared)
            bias_p = float(np.sum(shared.weights
                                  * np.abs(mean_grid - shared.truth_grid) ** config.p))
            for rep in range(config.replicates):
                cells[(n, rep)] = _compute_cell(config, n, rep, shared,
                                                mean_grid, bias_p, h)
    ordered = tuple(cells[key] for key in sorted(cells))
    means = []
    for n in config.sample_sizes:
        vals = [c.risk for c in ordered if c.n == n]
        means.append((n, float(np.mean(vals))))
    slope, stderr = fit_rate(means)
    return RiskReport(cells=ordered, fitted_slope=slope, slope_stderr=stderr,
                      theoretical_exponent=config.theoretical_exponent)


# ----------------------------- bound checks -----------------------------

def upper_bound_constant(kernel: ProductKernel, truth: Density, p: float,
                         c_p: float = 1.0, rule: QuadRule | None = None) -> float:
    """Explicit risk-bound constant, up to the caller-supplied ``c(p)``.

    ``2^{p-1} [ (I sum ||d^alpha f||_p)^p + c(p) 2^{p-2} ||K||_inf^{p-2}
    ||K||_2^2 + c(p) ||K||_2^p ||f||_{p/2}^{p/2} ]`` where the derivative
    sum runs over the top mixed orders ``|alpha_1| = s1, |alpha_2| = s2``.
    """
    if p < 2:
        raise ValueError(f"the constant is defined for p >= 2, got {p}")
    if truth.field.partial_factory is None:
        raise ValueError("truth must provide analytic partial derivatives")
    if rule is None:
        feature = float(min(1.0, np.min(truth.support.widths()) / 4.0))
        rule = QuadRule.for_box(truth.support, feature_scale=feature)
    report = verify_class(kernel, tol=1e-8)
    import itertools

    deriv_sum = 0.0
    for a1 in itertools.product(range(kernel.s1 + 1), repeat=kernel.d1):
        if sum(a1) != kernel.s1:
            continue
        for a2 in itertools.product(range(kernel.s2 + 1), repeat=kernel.d2):
            if sum(a2) != kernel.s2:
                continue
            field = truth.field.partial_field(a1 + a2)
            deriv_sum += lp_norm(field, truth.support, p, rule)
    k_inf = q_norm(kernel, np.inf)
    k_2 = q_norm(kernel, 2.0)
    f_half = integrate(lambda pts: truth.field.eval(pts) ** (p / 2.0),
                       truth.support, rule)
    return 2.0 ** (p - 1.0) * (
        (report.i_s1_s2 * deriv_sum) ** p
        + c_p * 2.0 ** (p - 2.0) * k_inf ** (p - 2.0) * k_2 ** 2
        + c_p * k_2 ** p * f_half
    )


@dataclass(frozen=True)
class LowerHypothesesReport:
    rho_n: float
    condition_l11: bool
    c0_estimate: float
    c0_exponential_bound: float
    min_distance: float


def verify_lower_hypotheses(fam: LowerBoundFamily, n: int,
                            subsample: int = 4096,
                            subsample_seed: int = 0) -> LowerHypothesesReport:
    """Check the two hypotheses of the reduction lemma numerically.

    The separation condition compares the minimum pairwise member distance
    (closed form driven by the code's minimum Hamming distance) against
    ``2 rho_n`` with ``rho_n = C_1 A N^{D/p}``; the averaged chi-square
    affinity uses the closed form, over the full code or a seeded uniform
    subsample when the code is large.
    """
    params = fam.params
    consts = family_constants(params)
    rho_n = (consts.c1 * params.amplitude
             * params.big_n ** (params.dim / params.p))
    rho_min = fam.min_pairwise_hamming()
    min_distance = (params.amplitude
                    * (rho_min * params.sigma ** params.dim) ** (1.0 / params.p)
                    * consts.g_p ** params.dim)
    condition = min_distance >= 2.0 * rho_n * (1.0 - 1e-12)
    code = fam.code
    if code.shape[0] > subsample:
        rng = np.random.default_rng(np.uint64(subsample_seed))
        idx = rng.choice(code.shape[0], size=subsample, replace=False)
        code = code[np.sort(idx)]
    total = 0.0
    for word in code:
        total += chi2_affinity(fam, word, n)
    c0 = total / code.shape[0]
    bound_exponent = (consts.c2 * n * params.big_n ** (2 * params.dim)
                      * params.amplitude ** 2)
    return LowerHypothesesReport(rho_n=rho_n, condition_l11=bool(condition),
                                 c0_estimate=c0,
                                 c0_exponential_bound=math.exp(bound_exponent),
                                 min_distance=min_distance)


# ----------------------------- output formats -----------------------------

def report_to_csv(report: RiskReport) -> str:
    lines = ["n,replicate,seed,h,risk,bias_p,stochastic_p"]
    for c in report.cells:
        lines.append(
            f"{c.n},{c.replicate},{c.seed},{c.h:.17g},{c.risk:.17g},"
            f"{c.bias_p:.17g},{c.stochastic_p:.17g}")
    return "\n".join(lines) + "\n"


def report_summary(report: RiskReport, slope_tol: float = 0.15) -> dict:
    passed = abs(report.fitted_slope + report.theoretical_exponent) <= slope_tol
    return {
        "fitted_slope": report.fitted_slope,
        "slope_stderr": report.slope_stderr,
        "theoretical_exponent": report.theoretical_exponent,
        "pass": bool(passed),
    }
