"""Seeded end-to-end experiments behind the command-line interface.

Each ``run_*`` function returns an :class:`ExperimentRecord` whose scalar
outputs are reproduced bit for bit by calling it again with the same
parameters. Stream ids are fixed per command so that adding a new random
draw to one stage never shifts another.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    BoundsParams,
    lipschitz_bound,
    product_output_entropy_bound,
    randomizing_norm_bound,
    subspace_dimension_bound,
)
from .channels import (
    RandomUnitaryChannel,
    StinespringChannel,
    conjugate_channel,
    phi_overlap,
    product_output_on_phi,
    randomizing_deviation,
)
from .ensembles import SeededRng
from .entropy import (
    EstimatorConfig,
    format_order,
    grouping_decomposition,
    min_output_entropy_estimate,
    renyi_entropy,
)
from .linalg import BipartiteDims, DimensionError, MemoryGuardError, eigen_spectrum
from .records import ExperimentRecord, Timer
from .svg import spectrum_svg
from .weingarten import exact_avg_purity, mc_avg_purity

MAX_RU_ELEMENTS = 2**26  # n * d^2 ceiling for random-unitary stacks
MAX_SPECTRUM_DIM = 2**12  # largest dim_a^2 eigendecomposed by `spectrum`


def _check_pos(**kwargs):
    for name, value in kwargs.items():
        if int(value) != value or value < 1:
            raise DimensionError(f"{name} must be a positive integer, got {value!r}")


# -- spectrum --------------------------------------------------------------

def write_spectrum_csv(path, ascending) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, v in enumerate(ascending, start=1):
            writer.writerow([i, format(float(v), ".17g")])


def read_spectrum_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["eigenvalue"]) for r in rows])


def run_spectrum(dim_a: int, dim_b: int, dim_r: int, seed: int, out_csv, out_svg=None) -> ExperimentRecord:
    """Spectrum of (N (x) conj N)(Phi) for one Stinespring channel with |S| = |A||B|/|R|."""
    _check_pos(dim_a=dim_a, dim_b=dim_b, dim_r=dim_r)
    if (dim_a * dim_b) % dim_r:
        raise DimensionError(f"|A||B| = {dim_a * dim_b} is not divisible by |R| = {dim_r}")
    if dim_a * dim_a > MAX_SPECTRUM_DIM:
        raise MemoryGuardError(f"output dimension {dim_a ** 2} exceeds {MAX_SPECTRUM_DIM}")
    dims = BipartiteDims(dim_a, dim_b)
    dim_s = dims.total // dim_r
    rng = SeededRng(seed, 0)
    with Timer() as timer:
        ch = StinespringChannel.sample(rng, dims, dim_s)
        spec = eigen_spectrum(product_output_on_phi(ch))
        lam = spec.clamped()
        ratio = dim_s / dims.total
        ref_top = ratio
        ref_flat = (1.0 - ratio) / dim_a**2
        grouping = grouping_decomposition(spec)
        outputs = {
            "dim_s": dim_s,
            "lambda_max": float(lam[0]),
            "tail_purity": float(np.sum(lam[1:] ** 2)),
            "h1": renyi_entropy(spec, 1.0),
            "h2": renyi_entropy(spec, 2.0),
            "h_inf": renyi_entropy(spec, math.inf),
            "h_binary_lambda1": grouping.h_binary,
            "h1_tail": grouping.tail_entropy,
            "reference_top": ref_top,
            "reference_flat": ref_flat,
            "trace": float(lam.sum()),
        }
        ascending = spec.ascending()
        write_spectrum_csv(out_csv, ascending)
        files = {"csv": str(out_csv)}
        if out_svg:
            Path(out_svg).write_text(spectrum_svg(
                ascending,
                reference_lines=[(ref_top, "green", True), (ref_flat, "red", False)],
                title=f"|A|={dim_a} |B|={dim_b} |R|={dim_r}",
            ))
            files["svg"] = str(out_svg)
    outputs["files"] = files
    params = {"dim_a": dim_a, "dim_b": dim_b, "dim_r": dim_r}
    return ExperimentRecord("spectrum", params, seed, {"channel": 0}, outputs, timer.elapsed)


# -- violation (Stinespring family) ---------------------------------------

@dataclass
class ViolationReport:
    p: float
    dim_a: int
    dim_b: int
    dim_s: int
    hmin_hat_n: float
    hmin_hat_nbar: float
    h_product_phi: float
    gap: float
    bound_check: float
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = format_order(self.p)
        return d

    @property
    def consistent(self) -> bool:
        return self.h_product_phi <= self.bound_check + 1e-8


def run_violation(p: float, dim_a: int, dim_b: int, dim_s: int, seed: int,
                  samples: int = 10_000, restarts: int = 16, max_iters: int = 200,
                  out_json=None) -> tuple[ViolationReport, ExperimentRecord]:
    """Minimum-output-entropy estimates for N and conj N against H_p on Phi.

    Both ``hmin_hat`` values are upper-bound estimates, so ``gap`` is an
    upper bound on the true gap of this instance.
    """
    if not p > 1:
        raise ValueError(f"order must exceed 1, got {p!r}")
    _check_pos(dim_a=dim_a, dim_b=dim_b, dim_s=dim_s)
    dims = BipartiteDims(dim_a, dim_b)
    if dim_s > dims.total:
        raise DimensionError(f"dim_s={dim_s} exceeds |A||B|={dims.total}")
    with Timer() as timer:
        ch = StinespringChannel.sample(SeededRng(seed, 0), dims, dim_s)
        ch_bar = conjugate_channel(ch)
        est_n = min_output_entropy_estimate(
            ch, p, EstimatorConfig(samples, restarts, max_iters, rng=SeededRng(seed, 1)))
        est_nbar = min_output_entropy_estimate(
            ch_bar, p, EstimatorConfig(samples, restarts, max_iters, rng=SeededRng(seed, 2)))
        h_prod = renyi_entropy(eigen_spectrum(product_output_on_phi(ch)), p)
        bound = product_output_entropy_bound(p, dims, dim_s)
    report = ViolationReport(p, dim_a, dim_b, dim_s, est_n.hmin_hat, est_nbar.hmin_hat, h_prod,
                             est_n.hmin_hat + est_nbar.hmin_hat - h_prod, bound, seed)
    if out_json:
        Path(out_json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    outputs = report.to_dict()
    outputs.update({
        "sampling_hat_n": est_n.sampling_hat,
        "optimizer_hat_n": est_n.optimizer_hat,
        "sampling_hat_nbar": est_nbar.sampling_hat,
        "optimizer_hat_nbar": est_nbar.optimizer_hat,
        "consistent": bool(report.consistent),
    })
    if out_json:
        outputs["files"] = {"json": str(out_json)}
    params = {"p": format_order(p), "dim_a": dim_a, "dim_b": dim_b, "dim_s": dim_s,
              "samples": samples, "restarts": restarts, "max_iters": max_iters}
    streams = {"channel": 0, "estimator_n": 1, "estimator_nbar": 2}
    return report, ExperimentRecord("violation", params, seed, streams, outputs, timer.elapsed)


# -- ru-violation (random unitary family) ---------------------------------

@dataclass
class RandomUnitaryReport:
    """Phi-overlap lower bound versus the conditional eps-randomizing upper bound.

    ``epsilon_hat`` is a lower-bound estimate of the true eps, so
    ``conditional_upper_bound`` is only an upper bound on
    nu_p(N) nu_p(conj N) if the channel really is eps_hat-randomizing.
    """

    p: float
    d: int
    n: int
    one_over_n: float
    phi_overlap: float
    epsilon_hat: float
    conditional_upper_bound: float
    violation: bool
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = format_order(self.p)
        d["epsilon_label"] = "lower-bound estimate"
        d["upper_bound_label"] = "conditional on epsilon_hat"
        d["verdict"] = ("overlap lower bound exceeds conditional upper bound"
                        if self.violation else "no violation at this size")
        return d


def ru_report(ch: RandomUnitaryChannel, p: float, cfg: EstimatorConfig, seed: int) -> RandomUnitaryReport:
    overlap = phi_overlap(ch)
    eps = randomizing_deviation(ch, cfg).epsilon_hat
    single = randomizing_norm_bound(eps, ch.d, p)
    upper = single * single
    return RandomUnitaryReport(p, ch.d, ch.n, 1.0 / ch.n, overlap, eps, upper, bool(overlap > upper), seed)


def run_ru_violation(p: float, d: int, n: int, seed: int, samples: int = 128, restarts: int = 4,
                     max_iters: int = 40, out_json=None) -> tuple[RandomUnitaryReport, ExperimentRecord]:
    if not p > 1:
        raise ValueError(f"order must exceed 1, got {p!r}")
    _check_pos(d=d, n=n)
    if n * d * d > MAX_RU_ELEMENTS:
        raise MemoryGuardError(f"n * d^2 = {n * d * d} exceeds {MAX_RU_ELEMENTS}")
    with Timer() as timer:
        ch = RandomUnitaryChannel.sample(SeededRng(seed, 0), d, n)
        cfg = EstimatorConfig(samples, restarts, max_iters, step_tol=1e-7, rng=SeededRng(seed, 1))
        report = ru_report(ch, p, cfg, seed)
    outputs = report.to_dict()
    if out_json:
        Path(out_json).write_text(json.dumps(outputs, indent=2) + "\n")
        outputs["files"] = {"json": str(out_json)}
    params = {"p": format_order(p), "d": d, "n": n, "samples": samples,
              "restarts": restarts, "max_iters": max_iters}
    return report, ExperimentRecord("ru-violation", params, seed, {"unitaries": 0, "estimator": 1},
                                    outputs, timer.elapsed)


# -- purity ---------------------------------------------------------------

def run_purity(dim_a: int, dim_b: int, dim_s: int, mc_samples: int, seed: int, out_json=None) -> ExperimentRecord:
    _check_pos(dim_a=dim_a, dim_b=dim_b, dim_s=dim_s, mc_samples=mc_samples)
    dims = BipartiteDims(dim_a, dim_b)
    with Timer() as timer:
        exact = exact_avg_purity(dims, dim_s)
        mc = mc_avg_purity(dims, dim_s, mc_samples, SeededRng(seed, 0))
    leading = dim_s**2 / dims.total**2
    diff = exact - mc.mean
    outputs = {
        "exact": exact,
        "mc_mean": mc.mean,
        "mc_stderr": mc.stderr,
        "difference": diff,
        # below roundoff (e.g. |S| = |A||B|) a z-score is meaningless
        "difference_in_stderr": diff / mc.stderr if mc.stderr > 1e-12 else None,
        "leading_term": leading,
        "correction": exact - leading,
        "correction_times_dim_a_sq": (exact - leading) * dim_a**2,
    }
    if out_json:
        Path(out_json).write_text(json.dumps(outputs, indent=2) + "\n")
        outputs["files"] = {"json": str(out_json)}
    params = {"dim_a": dim_a, "dim_b": dim_b, "dim_s": dim_s, "mc_samples": mc_samples}
    return ExperimentRecord("purity", params, seed, {"monte_carlo": 0}, outputs, timer.elapsed)


# -- bounds ---------------------------------------------------------------

def run_bounds(p: float, dim_a: int, dim_b: int, alpha: float = 0.5, delta: float = 0.5,
               gamma: float = 3.0) -> ExperimentRecord:
    dims = BipartiteDims(dim_a, dim_b)
    with Timer() as timer:
        sb = subspace_dimension_bound(p, dims, BoundsParams(alpha=alpha, delta=delta, gamma=gamma))
        lip = lipschitz_bound(p, dim_a)
        renyi_cap = product_output_entropy_bound(p, dims, sb.dim_s) if sb.dim_s >= 1 else None
    outputs = {
        "dim_s": sb.dim_s,
        "dim_s_unrounded": sb.dim_s_real,
        "failure_prob_bound": sb.failure_prob_bound if math.isfinite(sb.failure_prob_bound) else None,
        "log_failure_prob_bound": sb.log_failure_prob_bound,
        "entropy_floor": sb.entropy_floor,
        "beta": sb.beta,
        "lipschitz_bound": lip,
        "product_entropy_cap": renyi_cap,
        "vacuous": sb.vacuous,
    }
    params = {"p": format_order(p), "dim_a": dim_a, "dim_b": dim_b,
              "alpha": alpha, "delta": delta, "gamma": gamma}
    return ExperimentRecord("bounds", params, 0, {}, outputs, timer.elapsed)


# -- replay ---------------------------------------------------------------

def replay(record: ExperimentRecord, workdir) -> ExperimentRecord:
    """Re-run a recorded experiment, writing any files under ``workdir``."""
    from .entropy import parse_order

    workdir = Path(workdir)
    prm = dict(record.params)
    seed = record.master_seed
    if record.command == "spectrum":
        svg = workdir / "spectrum.svg" if "svg" in record.outputs.get("files", {}) else None
        return run_spectrum(prm["dim_a"], prm["dim_b"], prm["dim_r"], seed, workdir / "spectrum.csv", svg)
    if record.command == "violation":
        prm["p"] = parse_order(prm["p"])
        out = workdir / "violation.json" if "files" in record.outputs else None
        return run_violation(seed=seed, out_json=out, **prm)[1]
    if record.command == "ru-violation":
        prm["p"] = parse_order(prm["p"])
        out = workdir / "ru_violation.json" if "files" in record.outputs else None
        return run_ru_violation(seed=seed, out_json=out, **prm)[1]
    if record.command == "purity":
        out = workdir / "purity.json" if "files" in record.outputs else None
        return run_purity(seed=seed, out_json=out, **prm)
    if record.command == "bounds":
        prm["p"] = parse_order(prm["p"])
        return run_bounds(**prm)
    raise ValueError(f"unknown command {record.command!r}")


def scalar_outputs(record: ExperimentRecord) -> dict:
    return {k: v for k, v in record.outputs.items() if k != "files"}
