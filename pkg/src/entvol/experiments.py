"""Monte Carlo campaigns over random density matrices.

Seeding: states are drawn in blocks of :data:`BLOCK` consecutive samples;
block ``b`` of a run with seed ``s`` uses ``stream(s, 0, b)`` and the
decomposition search for state ``i`` uses ``stream(s, 1, i)``.  Results
therefore depend only on the configuration, not on the worker count.

Classification: a state violating PPT is free entangled.  A PPT state is
separable when ``N <= 6``; for larger ``N`` it is bound entangled iff the
estimated entanglement of formation exceeds the cut-off ``E_c`` (or left
unresolved, label ``"ppt"``, when estimation is switched off).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .concurrence import concurrence_batch
from .ensembles import MeasureSpec, sample_density_matrices, sample_pure_states, stream
from .errors import InvalidData, InvalidParameter
from .estimator import ENTANGLED_LIKE, WalkParams, estimate_eof
from .states import BipartiteSplit, analyze_batch, pure_state_entanglement_batch

log = logging.getLogger(__name__)

__all__ = [
    "BLOCK",
    "FREE", "SEPARABLE", "BOUND", "PPT",
    "Estimate",
    "CampaignConfig",
    "BinRecord",
    "CampaignResult",
    "FitResult",
    "FixedSpectrumResult",
    "ScatterResult",
    "PureStudyResult",
    "BoundCampaignResult",
    "run_volume_campaign",
    "run_r_binned_scan",
    "run_fixed_spectrum_study",
    "run_scatter_ct",
    "fit_exponential",
    "run_pure_state_study",
    "run_bound_entanglement_campaign",
    "SPECTRUM_A", "SPECTRUM_B", "SPECTRUM_C",
]

BLOCK = 1000
FREE, SEPARABLE, BOUND, PPT = "free", "separable", "bound", "ppt"
LABELS = (SEPARABLE, BOUND, FREE, PPT)
EXACT_PPT_DIM = 6

_X1 = (1 + math.sqrt(3)) / 4
SPECTRUM_A = (0.5, 0.5, 0.0, 0.0)
SPECTRUM_B = (2 / 3, 1 / 6, 1 / 6, 0.0)
SPECTRUM_C = (_X1, (1 - _X1) / 3, (1 - _X1) / 3, (1 - _X1) / 3)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    @classmethod
    def proportion(cls, hits: int, n: int) -> Estimate:
        p = hits / n
        return cls(p, math.sqrt(p * (1 - p) / n))

    @classmethod
    def mean(cls, x) -> Estimate:
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls(math.nan, math.nan)
        se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
        return cls(float(np.mean(x)), se)


@dataclass(frozen=True)
class CampaignConfig:
    split: BipartiteSplit
    measure: MeasureSpec
    samples: int
    seed: int = 0
    bins: int | tuple[float, ...] = 30
    e_cut: float = 3e-4
    walk: WalkParams | None = None
    estimate_ppt: bool = True
    workers: int = 1
    keep_records: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidParameter("sample count must be >= 1")
        if self.workers < 1:
            raise InvalidParameter("workers must be >= 1")
        edges = self.bin_edges
        if np.any(np.diff(edges) <= 0):
            raise InvalidParameter("bin edges must be strictly increasing")
        if edges[0] > 1.0 or edges[-1] < self.split.n:
            raise InvalidParameter(f"bin edges must cover [1, {self.split.n}]")

    @property
    def n(self) -> int:
        return self.split.n

    @property
    def bin_edges(self) -> np.ndarray:
        if isinstance(self.bins, int):
            if self.bins < 1:
                raise InvalidParameter("need at least one bin")
            return np.linspace(1.0, float(self.n), self.bins + 1)
        return np.asarray(self.bins, dtype=float)

    @property
    def resolves_ppt(self) -> bool:
        return self.n <= EXACT_PPT_DIM or self.estimate_ppt

    def walk_params(self) -> WalkParams:
        return self.walk or WalkParams.defaults_for(self.n, e_cut=self.e_cut)


@dataclass
class BinRecord:
    lo: float
    hi: float
    center: float
    count: int
    p_s: float | None
    p_t: float | None
    p_b: float | None
    p_f: float | None
    mean_t: float | None
    mean_e: float | None
    empty: bool


@dataclass
class CampaignResult:
    config: CampaignConfig
    counts: dict[str, int]
    p_t: Estimate
    p_s: Estimate | None
    p_b: Estimate | None
    p_f: Estimate
    mean_t: Estimate
    mean_r: Estimate
    mean_e: Estimate | None
    mean_c: Estimate | None
    bins: list[BinRecord]
    hist_r: dict
    hist_e: dict | None
    incomplete_estimates: int = 0
    records: dict | None = field(default=None, repr=False)


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    rate: float
    residual: float


@dataclass
class FixedSpectrumResult:
    spectrum: tuple[float, ...]
    samples: int
    p_s: Estimate
    mean_e: Estimate
    mean_t: Estimate
    mean_c: Estimate | None
    max_abs_c_minus_t: float | None


@dataclass
class ScatterResult:
    samples: int
    corr_e_t: float
    corr_c_t: float
    violations: int
    max_t_minus_c: float
    bins: list[dict]
    records: dict = field(repr=False)


@dataclass
class PureStudyResult:
    samples: int
    mean_e: Estimate
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    zero_mass: float


@dataclass
class BoundCampaignResult:
    campaign: CampaignResult
    p_b: Estimate
    bound_fraction_of_ppt: Estimate
    p_s: Estimate
    ppt_states: int
    mean_e_bound: float
    max_e_bound: float
    p_b_double_cut: Estimate
    entangled_like_fraction: float
    peak_r: float | None


# --------------------------------------------------------------------------
# sampling


def _block_sizes(samples: int):
    full, rest = divmod(samples, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def _analyze_block(args):
    n, split, measure, size, seed, b, keep_states = args
    rng = stream(seed, 0, b)
    rhos = sample_density_matrices(n, measure, size, rng)
    out = analyze_batch(rhos, split)
    del out["pt_min"]
    if n == 4:
        _, c, e = concurrence_batch(rhos)
        out["C"] = c
        out["E"] = e
    if keep_states:
        out["states"] = rhos[out["ppt"]]
    return out


def _map(func, items, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items, chunksize=1))
    return [func(x) for x in items]


def _sample_analyzed(n, split, measure, samples, seed, workers=1, keep_ppt_states=False):
    """Per-state arrays R, t, ppt (and C, E for N = 4), in sample order."""
    tasks = [(n, split, measure, size, seed, b, keep_ppt_states)
             for b, size in enumerate(_block_sizes(samples))]
    parts = _map(_analyze_block, tasks, workers)
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _estimate_one(args):
    rho, split, params, seed, index = args
    est = estimate_eof(rho, split, params, stream(seed, 1, index))
    return est.e_min, est.verdict, est.complete


def _estimate_ppt_states(data, config: CampaignConfig):
    idx = np.flatnonzero(data["ppt"])
    params = config.walk_params()
    tasks = [(rho, config.split, params, config.seed, int(i))
             for rho, i in zip(data.pop("states"), idx)]
    log.info("estimating entanglement of %d PPT states", len(tasks))
    results = _map(_estimate_one, tasks, config.workers)
    e = np.full(data["ppt"].shape, np.nan)
    ent_like = np.zeros(data["ppt"].shape, dtype=bool)
    incomplete = 0
    for i, (val, verdict, complete) in zip(idx, results):
        e[i] = val
        ent_like[i] = verdict == ENTANGLED_LIKE
        incomplete += not complete
    data["E"] = e
    data["entangled_like"] = ent_like
    return incomplete


def _labels(data, n: int, e_cut: float, resolved: bool) -> np.ndarray:
    lab = np.full(data["ppt"].shape, FREE, dtype=object)
    ppt = data["ppt"]
    if n <= EXACT_PPT_DIM:
        lab[ppt] = SEPARABLE
    elif resolved:
        bound = ppt & (data["E"] > e_cut)
        lab[ppt & ~bound] = SEPARABLE
        lab[bound] = BOUND
    else:
        lab[ppt] = PPT
    return lab


def _histogram_e(e, zero_level: float, bins: int = 30):
    e = np.asarray(e, dtype=float)
    e = e[np.isfinite(e)]
    atom = e <= zero_level
    rest = e[~atom]
    hi = max(float(np.log(2.0)), float(rest.max()) if rest.size else 0.0)
    counts, edges = np.histogram(rest, bins=bins, range=(0.0, hi))
    return {"edges": edges, "counts": counts,
            "zero_mass": float(atom.mean()) if e.size else math.nan}


def _bin_records(data, labels, edges, resolved: bool) -> list[BinRecord]:
    r = data["R"]
    which = np.clip(np.digitize(r, edges) - 1, 0, len(edges) - 2)
    has_e = "E" in data
    out = []
    for k in range(len(edges) - 1):
        sel = which == k
        cnt = int(sel.sum())
        lo, hi = float(edges[k]), float(edges[k + 1])
        if cnt == 0:
            out.append(BinRecord(lo, hi, 0.5 * (lo + hi), 0, None, None, None, None, None, None, True))
            continue
        lab = labels[sel]
        e_vals = data["E"][sel] if has_e else None
        mean_e = None
        if has_e and np.all(np.isfinite(e_vals)):
            mean_e = float(np.mean(e_vals))
        out.append(BinRecord(
            lo, hi, 0.5 * (lo + hi), cnt,
            p_s=float(np.mean(lab == SEPARABLE)) if resolved else None,
            p_t=float(np.mean(data["ppt"][sel])),
            p_b=float(np.mean(lab == BOUND)) if resolved else None,
            p_f=float(np.mean(lab == FREE)),
            mean_t=float(np.mean(data["t"][sel])),
            mean_e=mean_e,
            empty=False,
        ))
    return out


def _collect(config: CampaignConfig):
    n = config.n
    estimate = n > EXACT_PPT_DIM and config.estimate_ppt
    data = _sample_analyzed(n, config.split, config.measure, config.samples, config.seed,
                            config.workers, keep_ppt_states=estimate)
    incomplete = _estimate_ppt_states(data, config) if estimate else 0
    labels = _labels(data, n, config.e_cut, config.resolves_ppt)
    return data, labels, incomplete


def _result(config: CampaignConfig, data, labels, incomplete) -> CampaignResult:
    total = config.samples
    counts = {lab: int(np.sum(labels == lab)) for lab in LABELS}
    resolved = config.resolves_ppt
    e = data.get("E")
    e_all = e is not None and np.all(np.isfinite(e))
    edges = config.bin_edges
    r_counts, _ = np.histogram(data["R"], bins=edges)
    hist_e = None
    if e is not None:
        hist_e = _histogram_e(e, 0.0 if config.n == 4 else config.e_cut)
    records = None
    if config.keep_records:
        records = {k: v for k, v in data.items() if k != "states"}
        records["label"] = labels
    return CampaignResult(
        config=config,
        counts=counts,
        p_t=Estimate.proportion(int(np.sum(data["ppt"])), total),
        p_s=Estimate.proportion(counts[SEPARABLE], total) if resolved else None,
        p_b=Estimate.proportion(counts[BOUND], total) if resolved else None,
        p_f=Estimate.proportion(counts[FREE], total),
        mean_t=Estimate.mean(data["t"]),
        mean_r=Estimate.mean(data["R"]),
        mean_e=Estimate.mean(e) if e_all else None,
        mean_c=Estimate.mean(data["C"]) if "C" in data else None,
        bins=_bin_records(data, labels, edges, resolved),
        hist_r={"edges": edges, "counts": r_counts},
        hist_e=hist_e,
        incomplete_estimates=incomplete,
        records=records,
    )


# --------------------------------------------------------------------------
# public campaigns


def run_volume_campaign(config: CampaignConfig) -> CampaignResult:
    """Sample ``config.samples`` states and classify each one."""
    data, labels, incomplete = _collect(config)
    return _result(config, data, labels, incomplete)


def run_r_binned_scan(config: CampaignConfig) -> list[BinRecord]:
    """Conditional statistics in bins of the participation ratio."""
    return run_volume_campaign(config).bins


def run_fixed_spectrum_study(spectrum: Sequence[float], split: BipartiteSplit, samples: int,
                             seed: int = 0, walk: WalkParams | None = None,
                             workers: int = 1) -> FixedSpectrumResult:
    """States ``U diag(spectrum) U^dagger`` with Haar ``U``.

    Two-qubit spectra use the exact concurrence; for other sizes the PPT
    states go through the estimator and ``mean_e`` covers those only.
    """
    measure = MeasureSpec.fixed(spectrum)
    split.check(len(spectrum))
    config = CampaignConfig(split, measure, samples, seed, walk=walk, workers=workers,
                            keep_records=True)
    res = run_volume_campaign(config)
    rec = res.records
    e = rec.get("E")
    mean_e = Estimate.mean(e[np.isfinite(e)]) if e is not None else Estimate(math.nan, math.nan)
    max_gap = float(np.max(np.abs(rec["C"] - rec["t"]))) if "C" in rec else None
    p_s = res.p_s if res.p_s is not None else Estimate(math.nan, math.nan)
    return FixedSpectrumResult(tuple(float(x) for x in spectrum), samples, p_s, mean_e,
                               res.mean_t, res.mean_c, max_gap)


def run_scatter_ct(config: CampaignConfig, tolerance: float = 1e-9) -> ScatterResult:
    """Per-state negativity, concurrence, EoF and R for two-qubit states.

    Violations of ``t <= C`` beyond ``tolerance`` are counted, not raised.
    """
    if config.n != 4:
        raise InvalidParameter("concurrence scatter needs a 2x2 split")
    data = _sample_analyzed(4, config.split, config.measure, config.samples, config.seed,
                            config.workers)
    t, c, e, r = data["t"], data["C"], data["E"], data["R"]
    gap = c - t
    edges = config.bin_edges
    which = np.clip(np.digitize(r, edges) - 1, 0, len(edges) - 2)
    bins = []
    for k in range(len(edges) - 1):
        sel = which == k
        bins.append({
            "lo": float(edges[k]), "hi": float(edges[k + 1]), "count": int(sel.sum()),
            "max_c_minus_t": float(gap[sel].max()) if sel.any() else None,
        })
    return ScatterResult(
        samples=config.samples,
        corr_e_t=float(np.corrcoef(e, t)[0, 1]),
        corr_c_t=float(np.corrcoef(c, t)[0, 1]),
        violations=int(np.sum(t > c + tolerance)),
        max_t_minus_c=float(np.max(t - c)),
        bins=bins,
        records={"t": t, "C": c, "E": e, "R": r},
    )


def fit_exponential(points) -> FitResult:
    """Least-squares fit of ``ln P = ln A - c N``; ``residual`` is the sum of
    squared log-residuals."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise InvalidData("need at least three (N, P) points")
    if np.any(pts[:, 1] <= 0) or not np.all(np.isfinite(pts)):
        raise InvalidData("all probabilities must be positive and finite")
    x, y = pts[:, 0], np.log(pts[:, 1])
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    residual = float(res[0]) if len(res) else 0.0
    return FitResult(float(math.exp(intercept)), float(-slope), residual)


def _pure_block(args):
    split, size, seed, b = args
    psis = sample_pure_states(split.n, size, stream(seed, 0, b))
    return pure_state_entanglement_batch(psis, split)


def run_pure_state_study(split: BipartiteSplit, samples: int, seed: int = 0, bins: int = 30,
                         workers: int = 1) -> PureStudyResult:
    """Entanglement of Haar-random pure states."""
    if samples < 1:
        raise InvalidParameter("sample count must be >= 1")
    tasks = [(split, size, seed, b) for b, size in enumerate(_block_sizes(samples))]
    e = np.concatenate(_map(_pure_block, tasks, workers))
    h = _histogram_e(e, 0.0, bins)
    return PureStudyResult(samples, Estimate.mean(e), h["edges"], h["counts"], h["zero_mass"])


def run_bound_entanglement_campaign(config: CampaignConfig, min_bin_count: int = 50
                                    ) -> BoundCampaignResult:
    """Volume campaign with every PPT state sent through the estimator.

    Also reports ``P_B`` at twice the cut-off and the location of the
    maximum of ``P_B(R)`` over bins holding at least ``min_bin_count``
    states.
    """
    if config.n <= EXACT_PPT_DIM:
        raise InvalidParameter("bound entanglement needs N > 6")
    if not config.estimate_ppt:
        config = replace(config, estimate_ppt=True)
    data, labels, incomplete = _collect(config)
    res = _result(config, data, labels, incomplete)
    ppt = data["ppt"]
    n_ppt = int(ppt.sum())
    e_ppt = data["E"][ppt]
    bound = e_ppt > config.e_cut
    bound_e = e_ppt[bound]
    double = int(np.sum(e_ppt > 2 * config.e_cut))
    full = [b for b in res.bins if b.count >= min_bin_count]
    peak = max(full, key=lambda b: b.p_b).center if full else None
    return BoundCampaignResult(
        campaign=res,
        p_b=res.p_b,
        bound_fraction_of_ppt=Estimate.proportion(int(bound.sum()), n_ppt) if n_ppt
        else Estimate(math.nan, math.nan),
        p_s=res.p_s,
        ppt_states=n_ppt,
        mean_e_bound=float(bound_e.mean()) if bound_e.size else math.nan,
        max_e_bound=float(bound_e.max()) if bound_e.size else math.nan,
        p_b_double_cut=Estimate.proportion(double, config.samples),
        entangled_like_fraction=float(data["entangled_like"][ppt].mean()) if n_ppt else math.nan,
        peak_r=peak,
    )
