import os

from app.helpers.config import OUTPUT_DIR


def get_output_dir(out: str | None = None) -> str:
    # artifacts go under the --out folder, or .../Output/ by default
    return str(out) if out else str(OUTPUT_DIR)


def get_trace_path(out: str | None = None) -> str:
    return os.path.join(get_output_dir(out), "trace.json")


def get_convergence_csv_path(label: str, out: str | None = None) -> str:
    # one table per case: .../convergence_<label>.csv
    return os.path.join(get_output_dir(out), f"convergence_{label}.csv")
