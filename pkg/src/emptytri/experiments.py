"""Seeded Monte Carlo experiments over the empty-triangle engine.

Each experiment draws independent trials from counter-based RNG streams
derived from (seed, n, trial), reduces in fixed trial order, and emits
estimate rows that always carry trial counts and confidence intervals.
Results are bit-reproducible for a given config and seed, with or without
worker processes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from .bodies import (
    ConvexBody,
    GRID_SCALE,
    body_from_dict,
    body_to_dict,
    build_grid,
    normalize_body,
    occupancy_from_sample,
    payload_point_set,
    sample_poisson_grid,
    sample_uniform,
    sample_uniform_raw,
    trial_generator,
    unit_disk_body,
    unit_square_body,
)
from .engine import degree_report, near_pairs, pair_degree
from .geom import GeometryError, PointSet
from . import _kernels
from .ordertypes import (
    OrderTypeLabel,
    canonical_label,
    convex_position_label,
)

Z95 = 1.959963984540054  # two-sided 95% normal quantile


# ---------------------------------------------------------------------------
# Estimate rows and interval helpers
# ---------------------------------------------------------------------------

@dataclass
class EstimateRow:
    n: int
    statistic: str
    mean: float
    stderr: float
    ci_lo: float
    ci_hi: float
    trials: int


def mean_row(n, statistic, values) -> EstimateRow:
    """Normal-approximation CI for a sample mean."""
    vals = np.asarray(values, dtype=np.float64)
    t = len(vals)
    m = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(t)) if t > 1 else 0.0
    return EstimateRow(int(n), statistic, m, se, m - Z95 * se, m + Z95 * se, t)


def freq_row(n, statistic, hits, trials) -> EstimateRow:
    """Wilson 95% interval for a proportion."""
    p = hits / trials
    z2 = Z95 * Z95
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    se = math.sqrt(p * (1.0 - p) / trials)
    return EstimateRow(int(n), statistic, p, se, center - half, center + half, int(trials))


def ratio_row(n, statistic, pa, sa, pb, sb, trials) -> EstimateRow:
    """Delta-method CI for a ratio of two estimated proportions."""
    r = pa / pb
    if pa > 0.0:
        se = r * math.sqrt((sa / pa) ** 2 + (sb / pb) ** 2)
    else:
        se = sb / pb  # first-order term with pa -> 0
    return EstimateRow(int(n), statistic, r, se, r - Z95 * se, r + Z95 * se, int(trials))


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Run parameters shared by all experiments.

    ``trials`` is one count for the whole grid or a per-n list.  ``t_alpha``
    is the alpha in T = alpha / n.  ``k_factor`` is the ln-n multiple
    reported alongside the tail threshold.  ``x``/``y`` give the fixed pair
    in original body coordinates for the pair-degree formula experiment.
    """

    body: object = "square"  # "square" | "disk" | body dict
    n_grid: list = field(default_factory=lambda: [100])
    trials: object = 100
    seed: int = 1
    t_alpha: float = 2.0
    k_factor: float = 3.0 * 145.0
    L: int = 6
    event: str = "max-count-ge:5"
    x: tuple | None = None
    y: tuple | None = None
    type_label: str | None = None
    iterations: int = 100000
    workers: int = 1
    oracle: bool = False

    def validate(self) -> None:
        if not self.n_grid:
            raise GeometryError("n_grid must be nonempty")
        if any(b >= a for a, b in zip(self.n_grid[1:], self.n_grid)):
            raise GeometryError("n_grid must be strictly increasing")
        for t in self.trials_list():
            if t < 1:
                raise GeometryError("trials must be >= 1")

    def trials_list(self) -> list:
        if isinstance(self.trials, int):
            return [self.trials] * len(self.n_grid)
        if len(self.trials) != len(self.n_grid):
            raise GeometryError("per-n trials list must match n_grid")
        return [int(t) for t in self.trials]

    def body_spec(self) -> dict:
        if isinstance(self.body, str):
            if self.body == "square":
                return body_to_dict(unit_square_body())
            if self.body == "disk":
                return body_to_dict(unit_disk_body())
            raise GeometryError("unknown body name %r" % self.body)
        if isinstance(self.body, ConvexBody):
            return body_to_dict(self.body)
        return dict(self.body)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["body"] = self.body_spec()
        # execution details, not statistical parameters: outputs must be
        # byte-identical regardless of worker count
        d.pop("workers", None)
        d.pop("oracle", None)
        return d


@dataclass
class ExperimentResult:
    name: str
    config: dict
    seed: int
    rows: list
    extras: dict

    def to_csv_text(self) -> str:
        lines = [
            "# emptytri %s" % __version__,
            "# experiment=%s seed=%d" % (self.name, self.seed),
            "# config=%s" % json.dumps(self.config, sort_keys=True),
            "n,statistic,mean,stderr,ci_lo,ci_hi,trials",
        ]
        for r in self.rows:
            lines.append(
                "%d,%s,%s,%s,%s,%s,%d"
                % (r.n, r.statistic, repr(r.mean), repr(r.stderr),
                   repr(r.ci_lo), repr(r.ci_hi), r.trials)
            )
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        doc = {
            "meta": {
                "tool": "emptytri",
                "version": __version__,
                "experiment": self.name,
                "seed": self.seed,
                "config": self.config,
            },
            "rows": [asdict(r) for r in self.rows],
            "extras": _json_safe(self.extras),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def row(self, n, statistic) -> EstimateRow:
        for r in self.rows:
            if r.n == n and r.statistic == statistic:
                return r
        raise KeyError("no row (%s, %s)" % (n, statistic))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# ---------------------------------------------------------------------------
# Trial execution (serial or process pool, reduced in trial order)
# ---------------------------------------------------------------------------

_BODY_CACHE: dict = {}
_GRID_CACHE: dict = {}


def _normalized_body(body_json: str) -> ConvexBody:
    body = _BODY_CACHE.get(body_json)
    if body is None:
        body, _ = normalize_body(body_from_dict(json.loads(body_json)))
        _BODY_CACHE[body_json] = body
    return body


def _grid_for(body_json: str, n: int):
    key = (body_json, n)
    grid = _GRID_CACHE.get(key)
    if grid is None:
        grid = build_grid(_normalized_body(body_json), n)
        _GRID_CACHE[key] = grid
    return grid


def _trial_worker(args):
    kind, body_json, n, seed, t, params = args
    return _TRIAL_FNS[kind](body_json, n, seed, t, params)


def _run_trials(kind, cfg: ExperimentConfig, n: int, trials: int, params: dict):
    body_json = json.dumps(cfg.body_spec(), sort_keys=True)
    jobs = [(kind, body_json, n, cfg.seed, t, params) for t in range(trials)]
    if cfg.workers and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunk = max(1, trials // (cfg.workers * 4))
            results = list(pool.map(_trial_worker, jobs, chunksize=chunk))
    else:
        results = [_trial_worker(j) for j in jobs]
    return results


# --- per-trial functions (module level so worker processes can import them)

def _trial_deg_growth(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    ps = sample_uniform(body, n, seed, trial=t)
    rep = degree_report(ps)
    t_alpha = params["t_alpha"]
    stat = near_pairs(ps, t_alpha / n, collect_pairs=True)
    lhs = sum(rep.degree(i, j) for i, j in stat.pair_list)
    eq1_ok = lhs <= stat.count * rep.deg_max
    return {"deg_max": float(rep.deg_max), "eq1_ok": 1.0 if eq1_ok else 0.0}


def _trial_valtr(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    ps = sample_uniform(body, n, seed, trial=t)
    rep = degree_report(ps)
    return {"f": float(rep.f)}


def _trial_ntpairs(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    ps = sample_uniform_raw(body, n, seed, trial=t)
    stat = near_pairs(ps, params["t_alpha"] / n)
    return {"n_t": float(stat.count)}


def _trial_tail(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    ps = sample_uniform_raw(body, n, seed, trial=t)
    stat = near_pairs(ps, params["t_alpha"] / n)
    return {"exceed": 1.0 if stat.count >= params["threshold"] else 0.0}


def _trial_lemma_ad(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    prefix = np.array(params["prefix"], dtype=np.int64)
    if n == 3:
        return {"pair_degree": 1.0}
    ps = sample_uniform(body, n - 2, seed, trial=t, fixed_prefix=prefix)
    return {"pair_degree": float(pair_degree(ps, 0, 1))}


def _trial_transfer(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    grid = _grid_for(body_json, n)
    event = _event_fn(params["event"])
    ps = sample_uniform_raw(body, n, seed, trial=t)
    occ = occupancy_from_sample(ps, grid)
    hit_mult = event(occ.counts)
    model = sample_poisson_grid(grid.m, n, seed, trial=t, with_payloads=False)
    hit_pois = event(model.counts)
    return {"mult": 1.0 if hit_mult else 0.0, "pois": 1.0 if hit_pois else 0.0}


def _trial_bl(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    grid = _grid_for(body_json, n)
    L = params["L"]
    ps = sample_uniform(body, n, seed, trial=t)
    occ = occupancy_from_sample(ps, grid)
    ok_mult = _bl_event_multinomial(ps, occ, L)
    model = sample_poisson_grid(grid.m, n, seed, trial=t)
    ok_pois = _bl_event_poisson(model, L)
    return {"mult": 1.0 if ok_mult else 0.0, "pois": 1.0 if ok_pois else 0.0}


def _bl_event_multinomial(ps, occ, L) -> bool:
    need = set(range(3, L + 1))
    for j in range(occ.squares.m):
        l = int(occ.counts[j])
        if l in need:
            rep = degree_report(payload_point_set(ps, occ, j))
            if rep.deg_max == l - 2:
                need.discard(l)
                if not need:
                    return True
    return not need


def _bl_event_poisson(model, L) -> bool:
    need = set(range(3, L + 1))
    for j in range(model.m):
        l = int(model.counts[j])
        if l in need:
            rep = degree_report(model.payloads[j])
            if rep.deg_max == l - 2:
                need.discard(l)
                if not need:
                    return True
    return not need


def _trial_ordertype(body_json, n, seed, t, params):
    body = _normalized_body(body_json)
    grid = _grid_for(body_json, n)
    label = OrderTypeLabel.parse(params["label"])
    ps = sample_uniform(body, n, seed, trial=t)
    occ = occupancy_from_sample(ps, grid)
    k = label.k
    eligible = 0
    hits = 0
    first = None
    for j in range(grid.m):
        if int(occ.counts[j]) != k:
            continue
        eligible += 1
        if canonical_label(payload_point_set(ps, occ, j)) == label:
            hits += 1
            if first is None:
                first = j
    return {
        "found": 1.0 if first is not None else 0.0,
        "eligible": float(eligible),
        "square_hits": float(hits),
    }


_TRIAL_FNS = {
    "deg-growth": _trial_deg_growth,
    "valtr": _trial_valtr,
    "ntpairs": _trial_ntpairs,
    "tail": _trial_tail,
    "lemma-ad": _trial_lemma_ad,
    "transfer": _trial_transfer,
    "bl": _trial_bl,
    "ordertype-search": _trial_ordertype,
}


# ---------------------------------------------------------------------------
# Occupancy events for the transfer experiment
# ---------------------------------------------------------------------------

def _event_fn(spec: str):
    """Predicate on the occupancy count vector, by name.

    Supported: ``always-true``, ``max-count-ge:M``, ``n1-eq:V``,
    ``squares-with-exactly:K:J`` (at least J squares holding exactly K).
    """
    parts = spec.split(":")
    name = parts[0]
    if name == "always-true":
        return lambda counts: True
    if name == "max-count-ge":
        m = int(parts[1])
        return lambda counts: int(counts.max()) >= m
    if name == "n1-eq":
        v = int(parts[1])
        return lambda counts: int(counts[0]) == v
    if name == "squares-with-exactly":
        k, j = int(parts[1]), int(parts[2])
        return lambda counts: int((counts == k).sum()) >= j
    raise GeometryError("unknown occupancy event %r" % spec)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def exp_deg_growth(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean maximal pair degree against n / ln n.

    Emits one row per n plus a least-squares fit of the means against
    n / ln n.  Every trial also verifies the near-pair majorization
    (thresholded degree sum <= N_T * deg_max).
    """
    cfg.validate()
    rows, extras = [], {}
    means = []
    eq1_violations = 0
    params = {"t_alpha": cfg.t_alpha}
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        res = _run_trials("deg-growth", cfg, n, trials, params)
        vals = [r["deg_max"] for r in res]
        eq1_violations += sum(1 for r in res if r["eq1_ok"] != 1.0)
        rows.append(mean_row(n, "deg_max", vals))
        means.append(rows[-1].mean)
    xs = np.array([n / math.log(n) for n in cfg.n_grid])
    ys = np.array(means)
    if len(cfg.n_grid) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        pred = slope * xs + intercept
        ss_res = float(((ys - pred) ** 2).sum())
        ss_tot = float(((ys - ys.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        extras["c_hat"] = float(slope)
        extras["intercept"] = float(intercept)
        extras["r_squared"] = r2
    extras["ratio_mean_lnn_over_n"] = {
        str(n): m * math.log(n) / n for n, m in zip(cfg.n_grid, means)
    }
    extras["eq1_violations"] = eq1_violations
    return ExperimentResult("deg-growth", cfg.to_dict(), cfg.seed, rows, extras)


def exp_valtr(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean empty-triangle count scaled by n^2 (asymptotic rate 2)."""
    cfg.validate()
    rows, extras = [], {"abs_dev_from_2": {}}
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        res = _run_trials("valtr", cfg, n, trials, {})
        vals = [r["f"] / (n * n) for r in res]
        row = mean_row(n, "f_over_n2", vals)
        rows.append(row)
        extras["abs_dev_from_2"][str(n)] = abs(row.mean - 2.0)
    return ExperimentResult("valtr", cfg.to_dict(), cfg.seed, rows, extras)


def exp_ntpairs(cfg: ExperimentConfig) -> ExperimentResult:
    """Mean near-pair count at T = alpha/n against (pi/2) alpha^2."""
    cfg.validate()
    alpha = cfg.t_alpha
    predicted = 0.5 * math.pi * alpha * alpha
    rows, extras = [], {"predicted": predicted, "ratio": {}}
    params = {"t_alpha": alpha}
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        res = _run_trials("ntpairs", cfg, n, trials, params)
        vals = [r["n_t"] for r in res]
        row = mean_row(n, "n_t", vals)
        rows.append(row)
        extras["ratio"][str(n)] = {
            "mean": row.mean / predicted,
            "ci_lo": row.ci_lo / predicted,
            "ci_hi": row.ci_hi / predicted,
        }
    return ExperimentResult("ntpairs", cfg.to_dict(), cfg.seed, rows, extras)


def exp_tail(cfg: ExperimentConfig) -> ExperimentResult:
    """Frequency of the rare event N_T >= 144 ln n at T = alpha/n.

    One-sided consistency only: the bound's constant is not recoverable,
    so the rows report empirical frequencies with Wilson intervals.
    """
    cfg.validate()
    rows = []
    extras = {
        "threshold_144_ln_n": {},
        "k_overlay": {},
        "note": (
            "one-sided consistency check of a rare-event bound; "
            "the bound's constant is not recoverable from frequencies"
        ),
    }
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        threshold = 144.0 * math.log(n)
        extras["threshold_144_ln_n"][str(n)] = threshold
        extras["k_overlay"][str(n)] = cfg.k_factor * math.log(n)
        res = _run_trials("tail", cfg, n, trials,
                          {"t_alpha": cfg.t_alpha, "threshold": threshold})
        hits = sum(r["exceed"] for r in res)
        rows.append(freq_row(n, "tail_freq", hits, trials))
    return ExperimentResult("tail", cfg.to_dict(), cfg.seed, rows, extras)


def exp_lemma_ad(cfg: ExperimentConfig, x=None, y=None) -> ExperimentResult:
    """Monte Carlo vs quadrature for the conditioned pair degree.

    For a fixed close pair (x, y), the expected degree over n-2 extra
    uniform points equals (n-2) * integral over the body of
    (1 - area(x, y, u))^(n-3) du.  Both sides are computed and compared by
    z-score; for n = 3 both sides equal 1 exactly.
    """
    cfg.validate()
    if len(cfg.n_grid) != 1:
        raise GeometryError("the pair-degree experiment runs at a single n")
    n = cfg.n_grid[0]
    trials = cfg.trials_list()[0]
    x = tuple(x if x is not None else cfg.x)
    y = tuple(y if y is not None else cfg.y)
    body_spec = cfg.body_spec()
    body, amap = normalize_body(body_from_dict(body_spec))
    xn = amap.apply(np.array(x))[0]
    yn = amap.apply(np.array(y))[0]
    if not (body.contains(xn[None, :])[0] and body.contains(yn[None, :])[0]):
        raise GeometryError("x and y must lie inside the body")
    dist = float(np.hypot(*(xn - yn)))
    if dist > 1.0 / n + 1e-12:
        raise GeometryError("the pair must satisfy ||x-y|| <= 1/n")
    if n == 3:
        quad = 1.0
    else:
        integral = integrate_over_body(
            body, lambda u: _one_minus_area_pow(xn, yn, u, n - 3), rel_tol=1e-6
        )
        quad = (n - 2) * integral
    prefix = np.rint(np.array([xn, yn]) * GRID_SCALE).astype(np.int64)
    res = _run_trials("lemma-ad", cfg, n, trials, {"prefix": prefix.tolist()})
    vals = [r["pair_degree"] for r in res]
    row = mean_row(n, "pair_degree_mc", vals)
    qrow = EstimateRow(n, "pair_degree_quadrature", quad, 0.0, quad, quad, 1)
    z = 0.0 if row.stderr == 0.0 else (row.mean - quad) / row.stderr
    rho = body.rho
    bound = rho * n * (1.0 - math.exp(-rho / 2.0))
    in_window = float(np.hypot(*xn)) <= rho and float(np.hypot(*yn)) <= rho
    extras = {
        "z_score": z,
        "rho": rho,
        "lower_bound_rho_n": bound,
        "pair_in_rho_disk": bool(in_window),
        "mc_ge_bound": bool(row.mean >= bound),
        "quad_ge_bound": bool(quad >= bound),
        "pair_distance": dist,
    }
    return ExperimentResult("lemma-ad", cfg.to_dict(), cfg.seed, [row, qrow], extras)


def exp_transfer(cfg: ExperimentConfig, event: str | None = None) -> ExperimentResult:
    """Occupancy-event probability under the sample vs the Poissonized grid.

    Rows give both probabilities and their ratio with a delta-method CI;
    a zero Poisson estimate makes the ratio indeterminate for that n.
    """
    cfg.validate()
    event = event or cfg.event
    _event_fn(event)  # validate early
    rows, extras = [], {"event": event, "indeterminate": []}
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        if n % 2 != 0:
            raise GeometryError("grid experiments need even n")
        res = _run_trials("transfer", cfg, n, trials, {"event": event})
        hm = sum(r["mult"] for r in res)
        hp = sum(r["pois"] for r in res)
        rm = freq_row(n, "p_multinomial", hm, trials)
        rp = freq_row(n, "p_poisson", hp, trials)
        rows.extend([rm, rp])
        if hp == 0:
            extras["indeterminate"].append(n)
        else:
            rows.append(
                ratio_row(n, "ratio", rm.mean, rm.stderr, rp.mean, rp.stderr, trials)
            )
    return ExperimentResult("transfer", cfg.to_dict(), cfg.seed, rows, extras)


def exp_bl(cfg: ExperimentConfig) -> ExperimentResult:
    """Frequency of the per-count witness event up to L.

    The event asks, for every l in 3..L, for some grid square holding
    exactly l points whose degree is l-2.  Counts below 3 are vacuous:
    degree needs triangles.  Both the true sample and the independent
    Poisson grid are estimated.
    """
    cfg.validate()
    if cfg.L < 3:
        raise GeometryError("L must be >= 3")
    rows = []
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        if n % 2 != 0:
            raise GeometryError("grid experiments need even n")
        res = _run_trials("bl", cfg, n, trials, {"L": cfg.L})
        rows.append(freq_row(n, "bl_freq", sum(r["mult"] for r in res), trials))
        rows.append(freq_row(n, "bl_freq_poisson", sum(r["pois"] for r in res), trials))
    return ExperimentResult("bl", cfg.to_dict(), cfg.seed, rows, {"L": cfg.L})


def exp_ordertype_search(cfg: ExperimentConfig, label: OrderTypeLabel | None = None) -> ExperimentResult:
    """Frequency of a fixed order type occurring in some grid square."""
    cfg.validate()
    if label is None:
        label = (OrderTypeLabel.parse(cfg.type_label) if cfg.type_label
                 else convex_position_label(5))
    rows, extras = [], {"label": label.serialize(), "per_square_rate": {}}
    for n, trials in zip(cfg.n_grid, cfg.trials_list()):
        if n % 2 != 0:
            raise GeometryError("grid experiments need even n")
        res = _run_trials("ordertype-search", cfg, n, trials,
                          {"label": label.serialize()})
        hits = sum(r["found"] for r in res)
        rows.append(freq_row(n, "hit_freq", hits, trials))
        m = n // 2
        total_sq_hits = sum(r["square_hits"] for r in res)
        extras["per_square_rate"][str(n)] = total_sq_hits / (trials * m)
    extras["rate_positive"] = all(v >= 0.0 for v in extras["per_square_rate"].values())
    return ExperimentResult("ordertype-search", cfg.to_dict(), cfg.seed, rows, extras)


# ---------------------------------------------------------------------------
# Conjecture exploration: hill climbing on f
# ---------------------------------------------------------------------------

def minimize_f(n: int, iterations: int, seed: int):
    """Hill-climb a random integer configuration toward few empty triangles.

    Starts from a random general-position set in a box of side 4 n^2, moves
    one random point by a small random offset, and accepts whenever general
    position survives and f does not increase.  Returns (best PointSet,
    trace) where the trace records (iteration, f) at every improvement.
    """
    if n < 5:
        raise GeometryError("minimization needs n >= 5")
    rng = trial_generator(seed, n, 0)
    box = 4 * n * n
    pts = np.empty((n, 2), dtype=np.int64)
    have = 0
    seen = set()
    while have < n:
        cand = rng.integers(0, box + 1, size=(n - have, 2))
        for t in range(cand.shape[0]):
            x, y = int(cand[t, 0]), int(cand[t, 1])
            if (x, y) in seen:
                continue
            if have >= 2 and not _kernels.gp_new_point_ok(pts, have, x, y):
                continue
            pts[have] = (x, y)
            seen.add((x, y))
            have += 1
    f_cur = degree_report(PointSet(pts, validate=False)).f
    trace = [(0, f_cur)]
    for it in range(1, iterations + 1):
        idx = int(rng.integers(0, n))
        dx = dy = 0
        while dx == 0 and dy == 0:
            dx = int(rng.integers(-3, 4))
            dy = int(rng.integers(-3, 4))
        x = int(pts[idx, 0]) + dx
        y = int(pts[idx, 1]) + dy
        if not (0 <= x <= box and 0 <= y <= box):
            continue
        if (x, y) in seen:
            continue
        if not _kernels.gp_point_against(pts, n, idx, x, y):
            continue
        old = (int(pts[idx, 0]), int(pts[idx, 1]))
        pts[idx] = (x, y)
        f_new = degree_report(PointSet(pts, validate=False)).f
        if f_new <= f_cur:
            seen.discard(old)
            seen.add((x, y))
            if f_new < f_cur:
                trace.append((it, f_new))
            f_cur = f_new
        else:
            pts[idx] = old
    return PointSet(pts.copy()), trace


def exp_minimize_f(cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    if len(cfg.n_grid) != 1:
        raise GeometryError("minimize-f runs at a single n")
    n = cfg.n_grid[0]
    best, trace = minimize_f(n, cfg.iterations, cfg.seed)
    f0 = trace[0][1]
    f1 = trace[-1][1]
    rows = [
        EstimateRow(n, "f_initial", float(f0), 0.0, float(f0), float(f0), 1),
        EstimateRow(n, "f_final", float(f1), 0.0, float(f1), float(f1), 1),
    ]
    extras = {
        "iterations": cfg.iterations,
        "trace": trace,
        "f_floor_n2_minus_5n": n * n - 5 * n,
        "best_points": [[int(x), int(y)] for x, y in best],
    }
    return ExperimentResult("minimize-f", cfg.to_dict(), cfg.seed, rows, extras)


# ---------------------------------------------------------------------------
# Adaptive 2D quadrature over a convex body
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _one_minus_area_pow(x, y, u, power):
    ax = y[0] - x[0]
    ay = y[1] - x[1]
    area = 0.5 * np.abs(ax * (u[:, 1] - x[1]) - ay * (u[:, 0] - x[0]))
    return np.power(1.0 - area, power)


class QuadratureError(RuntimeError):
    """The adaptive integrator could not reach the requested tolerance."""


def _body_pieces(body):
    """Smooth maps from the unit square onto pieces tiling the body.

    Each piece is (map, jacobian) with map(s, t) -> (m, 2) points and a
    matching pointwise |J|.  Polygons fan-triangulate; the normalized disk
    uses the polar map (s scales radius), so no indicator function is
    needed anywhere and the mapped integrands stay piecewise smooth.
    """
    pieces = []
    if body.kind == "polygon":
        v = body.vertices
        for i in range(1, v.shape[0] - 1):
            a, b, c = v[0], v[i], v[i + 1]
            ab = b - a
            bc = c - b
            two_area = abs(float(ab[0] * bc[1] - ab[1] * bc[0]))

            def pmap(s, t, a=a, ab=ab, bc=bc):
                return a + s[:, None] * ab + (s * t)[:, None] * bc

            def pjac(s, t, two_area=two_area):
                return s * two_area

            pieces.append((pmap, pjac))
    else:
        r = body.semi_axes[0]

        def dmap(s, t, r=r):
            ang = 2.0 * math.pi * t
            return np.column_stack([r * s * np.cos(ang), r * s * np.sin(ang)])

        def djac(s, t, r=r):
            return 2.0 * math.pi * r * r * s

        pieces.append((dmap, djac))
    return pieces


def integrate_over_body(body, fn, rel_tol=1e-6, max_cells=400000) -> float:
    """Adaptive tensor-product quadrature over a normalized body.

    The body is covered by smoothly mapped pieces; one shared refinement
    heap splits whichever parameter cell carries the largest coarse/fine
    Gauss discrepancy until the summed error indicators drop below
    ``rel_tol`` of the integral.  Raises QuadratureError on non-convergence.
    """
    import heapq

    pieces = _body_pieces(body)

    def cell_value(piece, s0, t0, s1, t1):
        pmap, pjac = pieces[piece]
        gs = 0.5 * (s1 - s0) * (_GL_NODES + 1.0) + s0
        gt = 0.5 * (t1 - t0) * (_GL_NODES + 1.0) + t0
        ss, tt = np.meshgrid(gs, gt)
        ss = ss.ravel()
        tt = tt.ravel()
        pts = pmap(ss, tt)
        vals = fn(pts) * pjac(ss, tt)
        w = np.outer(_GL_WEIGHTS, _GL_WEIGHTS).ravel()
        return 0.25 * (s1 - s0) * (t1 - t0) * float(np.dot(w, vals))

    def eval_cell(piece, s0, t0, s1, t1):
        coarse = cell_value(piece, s0, t0, s1, t1)
        ms = 0.5 * (s0 + s1)
        mt = 0.5 * (t0 + t1)
        children = (
            (piece, s0, t0, ms, mt),
            (piece, ms, t0, s1, mt),
            (piece, s0, mt, ms, t1),
            (piece, ms, mt, s1, t1),
        )
        value = sum(cell_value(*c) for c in children)
        return value, abs(value - coarse), children

    heap = []
    serial = 0
    integral = 0.0
    err_total = 0.0
    for piece in range(len(pieces)):
        value, err, children = eval_cell(piece, 0.0, 0.0, 1.0, 1.0)
        integral += value
        err_total += err
        heapq.heappush(heap, (-err, serial, value, err, children))
        serial += 1
    cells = len(pieces)
    while err_total > rel_tol * max(abs(integral), 1e-300) and cells < max_cells:
        _, _, old_value, old_err, kids = heapq.heappop(heap)
        for kid in kids:
            v, e, grandkids = eval_cell(*kid)
            serial += 1
            heapq.heappush(heap, (-e, serial, v, e, grandkids))
            integral += v
            err_total += e
        integral -= old_value
        err_total -= old_err
        cells += 4
    if err_total > rel_tol * max(abs(integral), 1e-300):
        raise QuadratureError("quadrature did not converge to %g" % rel_tol)
    return integral


# ---------------------------------------------------------------------------
# Dispatch and defaults
# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "deg-growth": exp_deg_growth,
    "valtr": exp_valtr,
    "ntpairs": exp_ntpairs,
    "tail": exp_tail,
    "lemma-ad": exp_lemma_ad,
    "transfer": exp_transfer,
    "bl": exp_bl,
    "ordertype-search": exp_ordertype_search,
    "minimize-f": exp_minimize_f,
}

EXPERIMENT_DEFAULTS = {
    "deg-growth": dict(body="square", n_grid=[100, 200, 400, 800], trials=200),
    "valtr": dict(body="square", n_grid=[100, 400, 800], trials=[200, 100, 50]),
    "ntpairs": dict(body="disk", n_grid=[2000], trials=1000, t_alpha=2.0),
    "tail": dict(body="disk", n_grid=[500], trials=10000, t_alpha=2.0),
    "lemma-ad": dict(body="square", n_grid=[100], trials=2000,
                     x=(0.5, 0.5), y=(0.51, 0.5)),
    "transfer": dict(body="square", n_grid=[100, 400, 1600], trials=4000,
                     event="max-count-ge:5"),
    "bl": dict(body="square", n_grid=[200, 800, 3200], trials=200, L=6),
    "ordertype-search": dict(body="square", n_grid=[200, 800, 3200], trials=200),
    "minimize-f": dict(n_grid=[10], iterations=100000),
}


def run_experiment(name: str, cfg: ExperimentConfig) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise GeometryError("unknown experiment %r" % name)
    return EXPERIMENTS[name](cfg)


def default_config(name: str, **overrides) -> ExperimentConfig:
    if name not in EXPERIMENT_DEFAULTS:
        raise GeometryError("unknown experiment %r" % name)
    base = dict(EXPERIMENT_DEFAULTS[name])
    base.update(overrides)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------------------
# Frozen-expectation comparison
# ---------------------------------------------------------------------------

def check_frozen(result: ExperimentResult, frozen: dict) -> list:
    """Compare result rows to frozen expected values; return failure notes."""
    failures = []
    for item in frozen.get("rows", []):
        n = int(item["n"])
        stat = item["statistic"]
        try:
            row = result.row(n, stat)
        except KeyError:
            failures.append("missing row (%d, %s)" % (n, stat))
            continue
        expected = float(item["expected"])
        if "abs_tol" in item:
            ok = abs(row.mean - expected) <= float(item["abs_tol"])
        elif "rel_tol" in item:
            ok = abs(row.mean - expected) <= float(item["rel_tol"]) * abs(expected)
        else:
            ok = row.mean == expected
        if not ok:
            failures.append(
                "row (%d, %s): mean %r vs expected %r"
                % (n, stat, row.mean, expected)
            )
    return failures
