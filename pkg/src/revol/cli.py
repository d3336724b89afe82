"""Command-line interface.

``analyze`` runs the full pipeline and emits report + CSVs; ``fit``, ``gof``,
``hazard`` and ``memory`` are stage-scoped runs (gof/hazard consume a prior
``fit`` stage JSON); ``surrogate`` writes a shuffled volatility series.
Flags override the config file (plain ``key = value`` lines); the seed falls
back to the REVOL_SEED environment variable when not given elsewhere.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, gof, ingest, recurrence, sefit
from .errors import RevolError
from .pipeline import (AnalysisConfig, InputSpec, _conditional_means_section,
                       _fit_dict, _fluctuation_section, _gof_dict,
                       _hazard_section, _json_default, _params_from_dict,
                       emit, load_input, run)

log = logging.getLogger(__name__)

ENV_SEED = "REVOL_SEED"


def _parse_floats(text):
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _parse_ints(text):
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


def _parse_bool(text):
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config_file(path) -> dict[str, list[str]]:
    """Parse plain ``key = value`` lines; '#' starts a comment; keys repeat."""
    values: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            values.setdefault(key.strip().replace("-", "_"), []).append(val.strip())
    return values


def _input_spec(text, args) -> InputSpec:
    path, _, label = str(text).partition(":")
    return InputSpec(path=path, label=label,
                     date_col=args.date_col or "date",
                     price_col=args.price_col or "price",
                     us_dates=bool(args.us_dates))


_SCALARS = {
    "thresholds": _parse_floats, "dts": _parse_ints, "dma_thetas": _parse_floats,
    "n_boot": int, "seed": int, "n_surrogates": int, "tau_min_max": int,
    "dfa_order": int, "box_points": int, "alpha": float, "parallel": _parse_bool,
}


def build_config(args) -> AnalysisConfig:
    """Resolve defaults <- config file <- flags (plus REVOL_SEED for the seed)."""
    file_vals = read_config_file(args.config) if getattr(args, "config", None) else {}
    kwargs = {}
    for key, conv in _SCALARS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            kwargs[key] = conv(flag) if isinstance(flag, str) else flag
        elif key in file_vals:
            kwargs[key] = conv(file_vals[key][-1])
    if "seed" not in kwargs and os.environ.get(ENV_SEED):
        kwargs["seed"] = int(os.environ[ENV_SEED])
    inputs = [_input_spec(tok, args) for tok in (args.input or [])]
    if not inputs:
        for tok in file_vals.get("input", []):
            inputs.append(_input_spec(tok, args))
    if not inputs:
        raise SystemExit("error: no inputs given (use --input or a config file)")
    return AnalysisConfig(inputs=tuple(inputs), **kwargs)


def _add_input_args(p):
    p.add_argument("--input", action="append", metavar="PATH[:LABEL]",
                   help="input CSV, repeatable")
    p.add_argument("--date-col", default=None)
    p.add_argument("--price-col", default=None)
    p.add_argument("--us-dates", action="store_true", default=None,
                   help="dates are M/D/YYYY instead of ISO")
    p.add_argument("--config", default=None, help="key = value config file")


def _add_analysis_args(p):
    p.add_argument("--thresholds", default=None, help="comma-separated q list")
    p.add_argument("--dts", default=None, help="comma-separated dt list")
    p.add_argument("--n-boot", dest="n_boot", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-surrogates", dest="n_surrogates", type=int, default=None)
    p.add_argument("--tau-min-max", dest="tau_min_max", type=int, default=None)
    p.add_argument("--dfa-order", dest="dfa_order", type=int, default=None)
    p.add_argument("--dma-thetas", dest="dma_thetas", default=None,
                   help="comma-separated theta list")
    p.add_argument("--box-points", dest="box_points", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--parallel", action="store_true", default=None)


def _stage_header(stage: str) -> dict:
    return {"schema": 1, "stage": stage,
            "tool": {"name": "revol", "version": __version__}}


def _write_json(payload: dict, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n",
        encoding="utf-8")
    print(f"wrote {path}")


def cmd_analyze(args) -> int:
    config = build_config(args)
    report = run(config)
    emit(report, args.out)
    print(f"wrote {Path(args.out) / 'report.json'} "
          f"({len(report.instruments)} instrument(s), {len(report.errors)} failure(s))")
    return 0 if report.instruments else 1


def cmd_fit(args) -> int:
    config = build_config(args)
    spec = config.inputs[0]
    _, vol = load_input(spec)
    sweep = recurrence.threshold_sweep(vol, config.thresholds)
    fits = []
    for q in config.thresholds:
        r = sweep[q]
        entry = {"q": q, "n_intervals": int(r.intervals.size),
                 "mean_interval": r.mean_interval}
        try:
            entry["fit"] = _fit_dict(sefit.fit_mle(r, tau_min_max=config.tau_min_max))
        except RevolError as exc:
            entry["fit"] = {"skipped": str(exc)}
        fits.append(entry)
    payload = _stage_header("fit")
    payload["input"] = {"path": spec.path, "label": spec.resolved_label(),
                        "date_col": spec.date_col, "price_col": spec.price_col,
                        "us_dates": spec.us_dates}
    payload["tau_min_max"] = config.tau_min_max
    payload["fits"] = fits
    _write_json(payload, args.out)
    return 0


def _load_fit_stage(path) -> tuple[dict, InputSpec]:
    stage = json.loads(Path(path).read_text(encoding="utf-8"))
    if stage.get("stage") != "fit":
        raise SystemExit(f"error: {path} is not a fit-stage JSON")
    src = stage["input"]
    spec = InputSpec(path=src["path"], label=src["label"], date_col=src["date_col"],
                     price_col=src["price_col"], us_dates=src["us_dates"])
    return stage, spec


def cmd_gof(args) -> int:
    stage, spec = _load_fit_stage(args.fits)
    _, vol = load_input(spec)
    n_boot = args.n_boot if args.n_boot is not None else 10000
    seed = args.seed if args.seed is not None else int(os.environ.get(ENV_SEED, 0))
    results = []
    for q_idx, entry in enumerate(stage["fits"]):
        if "skipped" in entry["fit"]:
            results.append({"q": entry["q"], "skipped": entry["fit"]["skipped"]})
            continue
        params = _params_from_dict(entry["fit"])
        r = recurrence.extract(vol, entry["q"])
        trunc = r.intervals[r.intervals > params.tau_min]
        both = gof.bootstrap_both(trunc, params, n_boot=n_boot, seed=(seed, q_idx))
        results.append({"q": entry["q"],
                        **{kind: _gof_dict(res) for kind, res in both.items()}})
    payload = _stage_header("gof")
    payload["source"] = str(args.fits)
    payload["n_boot"] = n_boot
    payload["seed"] = seed
    payload["results"] = results
    _write_json(payload, args.out)
    return 0


def cmd_hazard(args) -> int:
    stage, spec = _load_fit_stage(args.fits)
    _, vol = load_input(spec)
    dts = _parse_ints(args.dts) if args.dts else (1, 5, 10)
    results = []
    for entry in stage["fits"]:
        r = recurrence.extract(vol, entry["q"])
        if r.empty:
            results.append({"q": entry["q"], "skipped": "no intervals"})
            continue
        params = (None if "skipped" in entry["fit"]
                  else _params_from_dict(entry["fit"]))
        results.append({"q": entry["q"],
                        "curves": _hazard_section(dts, r, params)})
    payload = _stage_header("hazard")
    payload["source"] = str(args.fits)
    payload["dts"] = list(dts)
    payload["results"] = results
    _write_json(payload, args.out)
    return 0


def cmd_memory(args) -> int:
    config = build_config(args)
    spec = config.inputs[0]
    _, vol = load_input(spec)
    sweep = recurrence.threshold_sweep(vol, config.thresholds)
    payload = _stage_header("memory")
    payload["input"] = {"path": spec.path, "label": spec.resolved_label()}
    payload["conditional_means"] = _conditional_means_section(sweep)
    payload["fluctuation"] = _fluctuation_section(config, sweep)
    _write_json(payload, args.out)
    return 0


def cmd_surrogate(args) -> int:
    config = build_config(args)
    spec = config.inputs[0]
    _, vol = load_input(spec)
    shuffled = ingest.shuffle(vol, config.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["volatility"])
        for v in shuffled.values:
            w.writerow([repr(float(v))])
    print(f"wrote {out} (seed={config.seed})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="revol",
        description="Recurrence-interval statistics of extreme volatility")
    parser.add_argument("--version", action="version", version=f"revol {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline; emits report + CSV tables")
    _add_input_args(p)
    _add_analysis_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("fit", help="interval extraction + stretched-exponential fits")
    _add_input_args(p)
    _add_analysis_args(p)
    p.add_argument("--out", required=True, help="output JSON file")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("gof", help="bootstrap goodness-of-fit from a fit-stage JSON")
    p.add_argument("--fits", required=True, help="fit-stage JSON")
    p.add_argument("--n-boot", dest="n_boot", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gof)

    p = sub.add_parser("hazard", help="hazard curves from a fit-stage JSON")
    p.add_argument("--fits", required=True, help="fit-stage JSON")
    p.add_argument("--dts", default=None, help="comma-separated dt list")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_hazard)

    p = sub.add_parser("memory", help="conditional statistics and DFA/DMA exponents")
    _add_input_args(p)
    _add_analysis_args(p)
    p.add_argument("--out", required=True, help="output JSON file")
    p.set_defaults(fn=cmd_memory)

    p = sub.add_parser("surrogate", help="write a shuffled volatility series")
    _add_input_args(p)
    _add_analysis_args(p)
    p.add_argument("--out", required=True, help="output CSV file")
    p.set_defaults(fn=cmd_surrogate)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except RevolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
