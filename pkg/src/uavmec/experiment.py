"""Experiment orchestration: run the scheme/seed/sweep grid, write artifacts.

Artifacts are deterministic: rows come out in (sweep value, scheme, seed,
slot) order with floats serialized by repr, so re-running the same
configuration reproduces slots.csv byte for byte. A failed episode is
recorded in metrics.json with its error string and contributes no rows.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .scenario import ScenarioConfig, config_echo, make_variant
from .sim import Metrics, generate_scenario, run_episode

__all__ = [
    "EpisodeResult",
    "ExperimentResult",
    "run_experiment",
    "write_artifacts",
    "metrics_table",
    "summarize_metrics",
]

CSV_HEADER = ("scheme,seed,sweep_value,t,C_s,E_c,E_p,workload,"
              "Q_c,Q_p,offload_count,uav_x,uav_y")


@dataclass
class EpisodeResult:
    scheme: str
    seed: int
    sweep_value: Optional[float]
    records: list
    metrics: Optional[Metrics]
    error: Optional[str]


@dataclass
class ExperimentResult:
    cfg: ScenarioConfig
    episodes: list


def _episode_cell(cfg: ScenarioConfig, seed: int, sweep_value: Optional[float]) -> list:
    """All schemes on one (configuration, seed) cell, sharing the scenario."""
    out = []
    try:
        scn = generate_scenario(cfg, seed)
    except Exception as exc:
        reason = f"{type(exc).__name__}: {exc}"
        return [EpisodeResult(s, seed, sweep_value, [], None, reason)
                for s in cfg.sim.schemes]
    for scheme in cfg.sim.schemes:
        try:
            records, metrics = run_episode(scn, scheme)
            out.append(EpisodeResult(scheme, seed, sweep_value, records, metrics, None))
        except Exception as exc:
            out.append(EpisodeResult(scheme, seed, sweep_value, [], None,
                                     f"{type(exc).__name__}: {exc}"))
    return out


def run_experiment(cfg: ScenarioConfig) -> ExperimentResult:
    """Run the full grid described by the configuration.

    With a sweep configured, each sweep value gets its own config variant;
    scenarios are regenerated per variant from the same seeds, so draws stay
    coupled across values. workers > 1 fans the (variant, seed) cells out to
    processes; output order is independent of scheduling.
    """
    if cfg.sweep.key:
        variants = [(float(v), make_variant(cfg, cfg.sweep.key, float(v)))
                    for v in cfg.sweep.values]
    else:
        variants = [(None, cfg)]
    cells = [(vi, seed) for vi in range(len(variants)) for seed in cfg.sim.seeds]
    results: dict = {}
    if cfg.sim.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sim.workers) as pool:
            futures = {
                (vi, seed): pool.submit(_episode_cell, variants[vi][1], seed, variants[vi][0])
                for vi, seed in cells}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for vi, seed in cells:
            results[(vi, seed)] = _episode_cell(variants[vi][1], seed, variants[vi][0])
    episodes = []
    for vi in range(len(variants)):
        for seed in cfg.sim.seeds:
            episodes.extend(results[(vi, seed)])
    return ExperimentResult(cfg, episodes)


def _fmt(x: float) -> str:
    return repr(float(x))


def slots_csv_text(result: ExperimentResult) -> str:
    lines = [CSV_HEADER]
    for ep in result.episodes:
        sv = "" if ep.sweep_value is None else _fmt(ep.sweep_value)
        for r in ep.records:
            lines.append(",".join((
                ep.scheme, str(ep.seed), sv, str(r.t), _fmt(r.cost),
                _fmt(r.e_compute), _fmt(r.e_propulsion), _fmt(r.workload),
                _fmt(r.q_compute), _fmt(r.q_propulsion), str(r.offload_count),
                _fmt(r.uav_x), _fmt(r.uav_y))))
    return "\n".join(lines) + "\n"


def metrics_payload(result: ExperimentResult) -> dict:
    payload = {}
    for ep in result.episodes:
        key = f"{ep.scheme}|{ep.seed}|{'' if ep.sweep_value is None else _fmt(ep.sweep_value)}"
        entry = {"scheme": ep.scheme, "seed": ep.seed, "sweep_value": ep.sweep_value}
        if ep.metrics is not None:
            m = ep.metrics
            entry.update(avg_cost=m.avg_cost, avg_energy=m.avg_energy,
                         avg_e_compute=m.avg_e_compute,
                         avg_e_propulsion=m.avg_e_propulsion,
                         avg_workload=m.avg_workload,
                         terminal_q_compute=m.terminal_q_compute,
                         terminal_q_propulsion=m.terminal_q_propulsion)
        if ep.error is not None:
            entry["error"] = ep.error
        payload[key] = entry
    return payload


def write_artifacts(result: ExperimentResult, out_dir: str) -> dict:
    """Write slots.csv, metrics.json and the config echo; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "slots": os.path.join(out_dir, "slots.csv"),
        "metrics": os.path.join(out_dir, "metrics.json"),
        "config": os.path.join(out_dir, "config.txt"),
    }
    with open(paths["slots"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(slots_csv_text(result))
    with open(paths["metrics"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(metrics_payload(result), fh, indent=2)
        fh.write("\n")
    with open(paths["config"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_echo(result.cfg))
    return paths


def _groups(entries: list) -> dict:
    """(sweep_value, scheme) -> list of per-seed entries, insertion ordered."""
    grouped: dict = {}
    for e in entries:
        if "error" in e or "avg_cost" not in e:
            continue
        grouped.setdefault((e.get("sweep_value"), e["scheme"]), []).append(e)
    return grouped


def metrics_table(entries: list) -> str:
    grouped = _groups(entries)
    lines = []
    header = (f"{'sweep':>10} {'scheme':>6} {'n':>3} "
              f"{'cost':>12} {'cost_sd':>10} {'energy':>12} {'workload':>14} "
              f"{'term_Qc':>10} {'term_Qp':>10}")
    lines.append(header)
    for (sv, scheme), rows in grouped.items():
        def col(name):
            return np.array([r[name] for r in rows], dtype=float)
        cost = col("avg_cost")
        sd = float(np.std(cost, ddof=1)) if len(cost) > 1 else 0.0
        lines.append(
            f"{('-' if sv is None else f'{sv:g}'):>10} {scheme:>6} {len(rows):>3} "
            f"{float(np.mean(cost)):>12.5f} {sd:>10.5f} "
            f"{float(np.mean(col('avg_energy'))):>12.4f} "
            f"{float(np.mean(col('avg_workload'))):>14.4g} "
            f"{float(np.mean(col('terminal_q_compute'))):>10.3f} "
            f"{float(np.mean(col('terminal_q_propulsion'))):>10.3f}")
    return "\n".join(lines)


_CHAIN = ("OJOA", "FLP", "OCQ", "ERA", "ELC")
_OFFLOADING = ("OJOA", "ERA", "FLP", "OCQ")


def summarize_metrics(entries: list) -> tuple[str, bool]:
    """Aggregate per (sweep, scheme) and check the expected scheme ordering.

    Checks, evaluated per sweep value whenever the schemes involved are all
    present: mean cost increases along OJOA, FLP, OCQ, ERA, ELC; per seed
    OJOA costs at most every other scheme and ELC at least every other
    scheme; ERA runs the lowest mean offloaded workload among the schemes
    that offload. Returns the report and whether every check passed.
    """
    grouped = _groups(entries)
    lines = [metrics_table(entries)]
    ok = True
    sweeps = []
    for sv, _scheme in grouped:
        if sv not in sweeps:
            sweeps.append(sv)
    for sv in sweeps:
        present = {s: grouped[(sv, s)] for s in _CHAIN if (sv, s) in grouped}

        def mean_cost(s):
            return float(np.mean([r["avg_cost"] for r in present[s]]))

        tag = "" if sv is None else f" [sweep={sv:g}]"
        chain = [s for s in _CHAIN if s in present]
        for a, b in zip(chain, chain[1:]):
            good = mean_cost(a) < mean_cost(b)
            ok &= good
            lines.append(f"ordering{tag} mean cost {a} < {b}: "
                         f"{'PASS' if good else 'FAIL'} "
                         f"({mean_cost(a):.5f} vs {mean_cost(b):.5f})")
        if "OJOA" in present:
            for s in chain:
                if s == "OJOA":
                    continue
                margins = _paired_margins(present, s, "OJOA")
                if margins is None:
                    continue
                good = bool(np.all(margins >= 0.0))
                ok &= good
                lines.append(f"per-seed{tag} cost OJOA <= {s}: "
                             f"{'PASS' if good else 'FAIL'} "
                             f"(min margin {float(np.min(margins)):.5g})")
        if "ELC" in present:
            for s in chain:
                if s in ("ELC", "OJOA"):
                    continue  # OJOA vs ELC already reported above
                margins = _paired_margins(present, "ELC", s)
                if margins is None:
                    continue
                good = bool(np.all(margins >= 0.0))
                ok &= good
                lines.append(f"per-seed{tag} cost {s} <= ELC: "
                             f"{'PASS' if good else 'FAIL'} "
                             f"(min margin {float(np.min(margins)):.5g})")
        offl = [s for s in _OFFLOADING if s in present]
        if "ERA" in offl and len(offl) > 1:
            for metric, label in (("avg_workload", "workload"),
                                  ("avg_e_compute", "compute energy")):
                era = float(np.mean([r[metric] for r in present["ERA"]]))
                for s in offl:
                    if s == "ERA":
                        continue
                    other = float(np.mean([r[metric] for r in present[s]]))
                    good = era <= other
                    ok &= good
                    lines.append(f"{label}{tag} ERA <= {s}: "
                                 f"{'PASS' if good else 'FAIL'} ({era:.4g} vs {other:.4g})")
    return "\n".join(lines), ok


def _paired_margins(present: dict, high: str, low: str):
    """Per-seed cost differences high - low; None if seeds don't align."""
    hi = {r["seed"]: r["avg_cost"] for r in present[high]}
    lo = {r["seed"]: r["avg_cost"] for r in present[low]}
    common = sorted(set(hi) & set(lo))
    if not common:
        return None
    return np.array([hi[s] - lo[s] for s in common])
