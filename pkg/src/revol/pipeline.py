"""Batch orchestration: configuration, pipeline execution, report emission.

``run`` walks ingest -> recurrence -> fit -> goodness-of-fit -> hazard ->
memory for every instrument and threshold, repeats the distribution and
memory stages on shuffled surrogates, and assembles everything into a single
JSON-serializable Report. ``emit`` writes the report plus CSV projections of
its tables and a MANIFEST of content hashes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, gof, hazard, ingest, memory, recurrence, sefit
from .errors import InsufficientDataError, RevolError

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0)

# Stream tags keeping derived seeds for distinct purposes disjoint.
_STREAM_BOOTSTRAP = 101
_STREAM_SURROGATE = 202


@dataclass(frozen=True)
class InputSpec:
    path: str
    label: str = ""
    date_col: str = "date"
    price_col: str = "price"
    us_dates: bool = False

    def resolved_label(self) -> str:
        return self.label or Path(self.path).stem


@dataclass(frozen=True)
class AnalysisConfig:
    inputs: tuple[InputSpec, ...]
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    dts: tuple[int, ...] = (1, 5, 10)
    n_boot: int = 10000
    seed: int = 0
    n_surrogates: int = 1
    tau_min_max: int = 10
    dfa_order: int = 1
    dma_thetas: tuple[float, ...] = (0.0, 0.5, 1.0)
    box_points: int = 20
    alpha: float = 0.05
    parallel: bool = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "thresholds", tuple(float(q) for q in self.thresholds))
        object.__setattr__(self, "dts", tuple(int(d) for d in self.dts))
        object.__setattr__(self, "dma_thetas", tuple(float(t) for t in self.dma_thetas))
        if not self.inputs:
            raise ValueError("config needs at least one input")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if not self.thresholds or self.thresholds[0] <= 0:
            raise ValueError("thresholds must be positive")
        if self.n_boot < 100:
            raise ValueError("n_boot must be >= 100")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if any(d < 1 for d in self.dts):
            raise ValueError("dts must be >= 1")
        if self.n_surrogates < 0:
            raise ValueError("n_surrogates must be >= 0")
        if self.tau_min_max < 1:
            raise ValueError("tau_min_max must be >= 1")
        if self.dfa_order < 0:
            raise ValueError("dfa_order must be >= 0")
        if any(not 0 <= t <= 1 for t in self.dma_thetas):
            raise ValueError("dma_thetas must lie in [0, 1]")
        if self.box_points < 2:
            raise ValueError("box_points must be >= 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class Report:
    schema: int
    tool: dict
    config: dict
    instruments: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"schema": self.schema, "tool": self.tool, "config": self.config,
                "instruments": self.instruments, "errors": self.errors}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True,
                          default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _surrogate_seed(config: AnalysisConfig, inst_idx: int, s_idx: int) -> int:
    ss = np.random.SeedSequence([config.seed, _STREAM_SURROGATE, inst_idx, s_idx])
    return int(ss.generate_state(1, np.uint64)[0])


def _fit_dict(fr: sefit.FitResult) -> dict:
    p = fr.params
    return {"tau_min": p.tau_min, "a": p.a, "c": p.c, "gamma": p.gamma,
            "ks": fr.ks_stat, "n_truncated": fr.n_truncated, "loglik": fr.loglik,
            "converged": fr.converged,
            "scan": [[tm, ks] for tm, ks in fr.scan]}


def _params_from_dict(d: dict) -> sefit.StretchedExpParams:
    return sefit.StretchedExpParams(a=d["a"], c=d["c"], gamma=d["gamma"],
                                    tau_min=d["tau_min"])


def _gof_dict(g: gof.GofResult) -> dict:
    return {"statistic": g.statistic_kind, "observed": g.observed,
            "p_value": g.p_value, "n_boot": g.n_boot, "stderr": g.stderr,
            "replicate_quantiles": [[p, v] for p, v in g.replicate_quantiles]}


def _ks2_dict(r: gof.KsTwoSampleResult) -> dict:
    return {"ks": r.ks, "cv": r.cv, "m": r.m, "n": r.n, "reject": r.reject,
            "alpha": r.alpha, "used_union_fallback": r.used_union_fallback}


def load_input(spec: InputSpec) -> tuple[ingest.PriceSeries, ingest.VolatilitySeries]:
    prices = ingest.load_price_csv(spec.path, date_col=spec.date_col,
                                   price_col=spec.price_col,
                                   label=spec.resolved_label(),
                                   us_dates=spec.us_dates)
    return prices, ingest.compute_volatility(prices)


def _hazard_section(dts, r: recurrence.RecurrenceSeries,
                    params: sefit.StretchedExpParams | None) -> list[dict]:
    grid = hazard.default_t_grid(r)
    out = []
    for dt in dts:
        emp = hazard.hazard_empirical(r, dt, grid)
        emp_by_t = {p.t: p for p in emp.points}
        model_by_t = {}
        if params is not None:
            model_by_t = {p.t: p for p in hazard.hazard_model(params, dt, grid).points}
        rows = []
        gaps = []
        for t in np.asarray(grid, dtype=float):
            t = float(t)
            ep = emp_by_t.get(t)
            mp = model_by_t.get(t)
            rows.append({
                "t": t,
                "w_empirical": ep.w if ep else None,
                "n_at_risk": ep.n_at_risk if ep else None,
                "low_confidence": ep.low_confidence if ep else None,
                "w_model": mp.w if mp else None,
                "extrapolated": mp.extrapolated if mp else None,
                "underflow": mp.underflow if mp else None,
            })
            if ep is not None and mp is not None and not mp.extrapolated:
                gaps.append(abs(ep.w - mp.w))
        # Diagnostic only: agreement between empirical and model curves.
        out.append({"dt": dt, "model_gap": max(gaps) if gaps else None,
                    "points": rows})
    return out


def _threshold_block(config: AnalysisConfig, inst_idx: int, q_idx: int,
                     r: recurrence.RecurrenceSeries, with_gof: bool = True) -> dict:
    block = {
        "q": r.q,
        "n_exceedances": int(r.exceedance_times.size),
        "n_intervals": int(r.intervals.size),
        "mean_interval": r.mean_interval,
    }
    params = None
    try:
        fr = sefit.fit_mle(r, tau_min_max=config.tau_min_max)
        params = fr.params
        block["fit"] = _fit_dict(fr)
    except (InsufficientDataError, RevolError) as exc:
        block["fit"] = {"skipped": str(exc)}

    if with_gof:
        if params is None:
            block["gof"] = {"skipped": "no fit (sample too small)"}
        else:
            trunc = r.intervals[r.intervals > params.tau_min]
            both = gof.bootstrap_both(
                trunc, params, n_boot=config.n_boot,
                seed=(config.seed, _STREAM_BOOTSTRAP, inst_idx, q_idx))
            block["gof"] = {kind: _gof_dict(res) for kind, res in both.items()}

        if r.empty:
            block["hazard"] = {"skipped": "no intervals"}
        else:
            block["hazard"] = _hazard_section(config.dts, r, params)

        try:
            part = memory.partition_by_preceding(r, 4)
            t1 = memory.conditional_subset(r, part, 0)
            t4 = memory.conditional_subset(r, part, 3)
            block["conditional_pdf_ks"] = _ks2_dict(
                gof.ks_two_sample(t1, t4, config.alpha))
        except (InsufficientDataError, RevolError) as exc:
            block["conditional_pdf_ks"] = {"skipped": str(exc)}
    return block


def _scaling_section(sweep: dict, alpha: float) -> dict | list:
    usable = {q: r for q, r in sweep.items() if not r.empty}
    if len(usable) < 2:
        return {"skipped": f"only {len(usable)} thresholds with intervals"}
    pairs = gof.scaling_matrix(usable, alpha)
    return [{"q_lo": p.q_lo, "q_hi": p.q_hi, **_ks2_dict(p.result)} for p in pairs]


def _conditional_means_section(sweep: dict, k: int = 8) -> dict:
    usable = {q: r for q, r in sweep.items() if r.intervals.size >= k + 1}
    if not usable:
        return {"skipped": f"no threshold has {k + 1}+ intervals"}
    points, beta = memory.conditional_means(usable, k)
    return {
        "points": [{"q": p.q, "tau0_scaled": p.tau0_scaled,
                    "mean_scaled": p.mean_scaled} for p in points],
        "beta": {"exponent": beta.exponent, "stderr": beta.stderr,
                 "n_points": beta.n_points},
        "thresholds_used": sorted(usable),
    }


def _fluctuation_section(config: AnalysisConfig, sweep: dict) -> list[dict]:
    out = []
    for q in sorted(sweep):
        r = sweep[q]
        n = r.intervals.size
        if n < 4 * memory.BOX_MIN:
            continue  # box range [20, N/4] empty; threshold too high for DFA/DMA
        y = memory.profile(r.intervals)
        grid = memory.box_size_grid(n, config.box_points)
        methods = [("dfa", config.dfa_order,
                    memory.dfa_fluctuation(y, grid, config.dfa_order))]
        for theta in config.dma_thetas:
            methods.append(("dma", theta, memory.dma_fluctuation(y, grid, theta)))
        for name, param, fl in methods:
            entry = {"q": q, "method": name,
                     ("order" if name == "dfa" else "theta"): param,
                     "n_intervals": n,
                     "points": [[int(s), f] for s, f in fl.points]}
            try:
                sf = memory.fit_scaling(fl)
                entry["exponent"] = sf.exponent
                entry["stderr"] = sf.stderr
            except InsufficientDataError as exc:
                entry["exponent"] = None
                entry["skipped"] = str(exc)
            out.append(entry)
    return out


def _surrogate_block(config: AnalysisConfig, inst_idx: int, s_idx: int,
                     vol: ingest.VolatilitySeries) -> dict:
    seed = _surrogate_seed(config, inst_idx, s_idx)
    shuffled = ingest.shuffle(vol, seed)
    sweep = recurrence.threshold_sweep(shuffled, config.thresholds)
    thresholds = []
    for q in config.thresholds:
        r = sweep[q]
        entry = {"q": q, "n_intervals": int(r.intervals.size),
                 "mean_interval": r.mean_interval}
        try:
            entry["fit"] = _fit_dict(sefit.fit_mle(r, tau_min_max=config.tau_min_max))
        except (InsufficientDataError, RevolError) as exc:
            entry["fit"] = {"skipped": str(exc)}
        thresholds.append(entry)
    return {
        "seed": seed,
        "thresholds": thresholds,
        "conditional_means": _conditional_means_section(sweep),
        "fluctuation": _fluctuation_section(config, sweep),
    }


def _run_instrument(config: AnalysisConfig, inst_idx: int, spec: InputSpec) -> dict:
    prices, vol = load_input(spec)
    sweep = recurrence.threshold_sweep(vol, config.thresholds)
    indexed = list(enumerate(config.thresholds))
    if config.parallel:
        with ThreadPoolExecutor() as pool:
            futures = {q: pool.submit(_threshold_block, config, inst_idx, qi, sweep[q])
                       for qi, q in indexed}
            blocks = [futures[q].result() for _, q in indexed]
    else:
        blocks = [_threshold_block(config, inst_idx, qi, sweep[q]) for qi, q in indexed]
    return {
        "label": vol.label,
        "n_prices": len(prices),
        "n_volatility": len(vol),
        "thresholds": blocks,
        "scaling_matrix": _scaling_section(sweep, config.alpha),
        "conditional_means": _conditional_means_section(sweep),
        "fluctuation": _fluctuation_section(config, sweep),
        "surrogates": [_surrogate_block(config, inst_idx, s, vol)
                       for s in range(config.n_surrogates)],
    }


def run(config: AnalysisConfig) -> Report:
    """Execute the full pipeline; per-instrument failures are isolated."""
    instruments = []
    errors = []
    for idx, spec in enumerate(config.inputs):
        try:
            instruments.append(_run_instrument(config, idx, spec))
        except (RevolError, OSError, ValueError) as exc:
            log.error("instrument %s failed: %s", spec.resolved_label(), exc)
            errors.append({"label": spec.resolved_label(), "error": str(exc)})
    return Report(schema=1, tool={"name": "revol", "version": __version__},
                  config=asdict(config), instruments=instruments, errors=errors)


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in label) or "unnamed"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else v for v in row])


def _fits_rows(inst: dict) -> list[list]:
    rows = []
    for block in inst["thresholds"]:
        fit = block.get("fit", {})
        gof_sec = block.get("gof", {})
        p_ks = gof_sec.get("ks", {}).get("p_value") if "skipped" not in gof_sec else None
        p_cvm = gof_sec.get("cvm", {}).get("p_value") if "skipped" not in gof_sec else None
        if "skipped" in fit:
            rows.append([block["q"], None, None, None, None, None, None, None,
                         p_ks, p_cvm])
        else:
            rows.append([block["q"], fit["tau_min"], fit["c"], fit["a"],
                         fit["gamma"], fit["ks"], fit["n_truncated"],
                         fit["loglik"], p_ks, p_cvm])
    return rows


def emit(report: Report, out_dir) -> list[Path]:
    """Write report.json, CSV projections per instrument, and a MANIFEST.

    CSV values are copied from the report (projection, never recomputation).
    Returns the list of written paths; the MANIFEST lists each file's sha256.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out / "report.json"
    report_path.write_text(report.to_json(), encoding="utf-8")
    written.append(report_path)

    for inst in report.instruments:
        inst_dir = out / _slug(inst["label"])
        inst_dir.mkdir(parents=True, exist_ok=True)

        path = inst_dir / "fits.csv"
        _write_csv(path, ["q", "tau_min", "c", "a", "gamma", "ks", "n_truncated",
                          "loglik", "p_ks", "p_cvm"], _fits_rows(inst))
        written.append(path)

        if isinstance(inst["scaling_matrix"], list):
            path = inst_dir / "scaling_matrix.csv"
            _write_csv(path, ["q_lo", "q_hi", "ks", "cv", "m", "n", "reject"],
                       [[p["q_lo"], p["q_hi"], p["ks"], p["cv"], p["m"], p["n"],
                         p["reject"]] for p in inst["scaling_matrix"]])
            written.append(path)

        if "points" in inst["conditional_means"]:
            path = inst_dir / "conditional_means.csv"
            _write_csv(path, ["q", "tau0_scaled", "mean_scaled"],
                       [[p["q"], p["tau0_scaled"], p["mean_scaled"]]
                        for p in inst["conditional_means"]["points"]])
            written.append(path)

        for block in inst["thresholds"]:
            hz = block.get("hazard")
            if not isinstance(hz, list):
                continue
            for curve in hz:
                path = inst_dir / f"hazard_{block['q']}_{curve['dt']}.csv"
                _write_csv(path, ["t", "w_empirical", "w_model", "n_at_risk"],
                           [[p["t"], p["w_empirical"], p["w_model"], p["n_at_risk"]]
                            for p in curve["points"]])
                written.append(path)

        by_method: dict[str, list] = {}
        for entry in inst["fluctuation"]:
            if entry["method"] == "dfa":
                key = "fluctuation_dfa.csv"
            else:
                key = f"fluctuation_dma_theta{entry['theta']:g}.csv"
            by_method.setdefault(key, []).extend(
                [entry["q"], s, f] for s, f in entry["points"])
        for key, rows in sorted(by_method.items()):
            path = inst_dir / key
            _write_csv(path, ["q", "s", "F"], rows)
            written.append(path)

    manifest = out / "MANIFEST"
    lines = []
    for path in sorted(written, key=lambda p: p.relative_to(out).as_posix()):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        lines.append(f"{digest}  {path.relative_to(out).as_posix()}")
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(manifest)
    return written
