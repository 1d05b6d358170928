import os
from pathlib import Path
from typing import Sequence

import pandas as pd

from app.methods.driver import RunTrace
from app.methods.sobol import SobolDecomposition, effective_dim_superposition, effective_dim_truncation


def _fmt(value, spec: str = ".6g") -> str:
    return "-" if value is None else format(value, spec)


def run_summary(trace: RunTrace, trace_path: str | None = None) -> str:
    """One-line result of a run, printed on standard output."""
    line = f"estimate={_fmt(trace.estimate, '.12g')} variance={_fmt(trace.variance, '.6g')} N={trace.total_samples}"
    if trace_path:
        line += f" trace={trace_path}"
    return line


def slope_lines(slopes: dict[str, float], label: str = "") -> list[str]:
    prefix = f"{label}: " if label else ""
    return [f"{prefix}slope[{method}]={slope:.4f}" for method, slope in slopes.items()]


def _model_header(trace: RunTrace) -> str:
    model = trace.config.get("model")
    if not model:
        return "model: custom"
    kind = model["kind"]
    if kind == "p1":
        return f"model: P1 a={model['a']:g} delta={model['delta']:g} d={model['dimension']}"
    if kind == "p2":
        return f"model: P2 d'={model['dprime']} r={model['radius']:g} c={model['c']:g} d={model['dimension']}"
    if kind == "p3":
        return (f"model: P3 d'={model['dprime']} r1={model['radius']:g} r2={model['radius2']:g} "
                f"c={model['c']:g} d={model['dimension']}")
    return f"model: blackbox `{model['command']}` d={model['dimension']}"


def format_report(trace: RunTrace, alpha: float = 0.99) -> str:
    """
    Human-readable report of a trace: per-stage estimates, variances, weights and splits, then
    per-stratum statistics with the effective dimensions at threshold `alpha`.

    Dimensions are printed 1-based.

    Args:
        trace (RunTrace): Trace read back from disk.
        alpha (float, optional): Effective-dimension threshold. Defaults to 0.99.

    Returns:
        str: The report text.
    """
    cfg = trace.config
    d = int(cfg["dimension"])
    lines = [
        _model_header(trace),
        f"status: {trace.status}" + (f" ({trace.error})" if trace.error else ""),
        f"stages={cfg['stages']} nbar={cfg['nbar']} seed={cfg['seed']} score_mode={cfg['score_mode']} "
        f"basis={cfg['basis']} alpha={alpha:g}",
        "",
        f"{'stage':>5} {'strata':>6} {'N':>7} {'mean':>16} {'variance':>12} {'weight':>10}  split",
    ]
    for i, stage in enumerate(trace.stages):
        weight = trace.weights[i] if i < len(trace.weights) else None
        split = stage.split
        if split is None:
            split_text = "-"
        else:
            split_text = f"stratum {split['stratum_id']} along y{split['dimension'] + 1}"
            if split.get("fallback"):
                split_text += " (fallback)"
        lines.append(
            f"{stage.stage:>5} {len(stage.strata):>6} {stage.n_samples:>7} {stage.mean:>16.10g} "
            f"{stage.variance:>12.4e} {_fmt(weight, '>10.6f')}  {split_text}")

    if trace.weights:
        lines.append(f"{'':>5} {'':>6} {'':>7} {'':>16} {'sum':>12} {sum(trace.weights):>10.6f}")
    lines += ["", f"estimate={_fmt(trace.estimate, '.12g')} variance={_fmt(trace.variance, '.6g')} "
                  f"N={trace.total_samples}", ""]

    for stage in trace.stages:
        lines.append(f"stage {stage.stage}")
        lines.append(f"  {'stratum':>7} {'p':>10} {'mean':>14} {'std':>12} {'d_sup':>5} {'d_tr':>5}")
        for s in stage.strata:
            dec = SobolDecomposition.from_dict(s["sobol"], d)
            flag = "  rank-deficient" if s.get("rank_deficient") else ""
            lines.append(
                f"  {s['stratum_id']:>7} {s['probability']:>10.6g} {s['mean']:>14.8g} {s['std']:>12.6g} "
                f"{effective_dim_superposition(dec, alpha):>5} {effective_dim_truncation(dec, alpha):>5}{flag}")
    return "\n".join(lines)


def sobol_frame(trace: RunTrace) -> pd.DataFrame:
    rows = []
    for stage in trace.stages:
        for s in stage.strata:
            for mask, sigma2 in sorted((int(m), float(v)) for m, v in s["sobol"]["contributions"].items()):
                rows.append({"stage": stage.stage, "stratum_id": s["stratum_id"],
                             "subset_bitmask": mask, "sigma2": sigma2})
    return pd.DataFrame(rows, columns=["stage", "stratum_id", "subset_bitmask", "sigma2"])


def strata_frame(trace: RunTrace) -> pd.DataFrame:
    d = int(trace.config["dimension"])
    columns = ["stage", "stratum_id", "parent"] + [f"lower_{k + 1}" for k in range(d)] + [f"upper_{k + 1}" for k in range(d)]
    rows = []
    for stage in trace.stages:
        for s in stage.stratification["strata"]:
            row = {"stage": stage.stage, "stratum_id": s["id"], "parent": s.get("parent")}
            row.update({f"lower_{k + 1}": s["lower"][k] for k in range(d)})
            row.update({f"upper_{k + 1}": s["upper"][k] for k in range(d)})
            rows.append(row)
    frame = pd.DataFrame(rows, columns=columns)
    frame["parent"] = frame["parent"].astype("Int64")
    return frame


def write_frame(frame: pd.DataFrame, path: str | os.PathLike) -> Path:
    """CSV with a dot decimal separator, fixed column order and round-trippable floats."""
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def split_methods(methods: Sequence[str] | str | None) -> list[str] | None:
    if methods is None:
        return None
    if isinstance(methods, str):
        methods = methods.split(",")
    return [m.strip() for m in methods if m.strip()]
