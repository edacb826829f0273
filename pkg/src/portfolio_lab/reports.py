"""Method naming and report/plot-data writers.

A "method" is a scheme plus the correlation metric plugged into it. The
sweep covers ten methods: CLA with covariance only, and IVP/HRP/NetMod each
with cov (Pearson), DCCA and DPCCA.
"""

import csv
import json
import math
import os

from .errors import UndefinedMetricError, UnknownNameError
from .metrics import TABLE_FIELDS, improvement
from .types import DCCA, DPCCA, PEARSON

SCHEME_LABELS = {"ivp": "IVP", "hrp": "HRP", "netmod": "NetMod", "cla": "CLA"}
METRIC_LABELS = {PEARSON: "cov", DCCA: "dcca", DPCCA: "dpcca"}

# Row order of the results tables: IVP, HRP, NetMod variants, then CLA cov.
METHOD_ORDER = (
    ("ivp", PEARSON),
    ("ivp", DCCA),
    ("ivp", DPCCA),
    ("hrp", PEARSON),
    ("hrp", DCCA),
    ("hrp", DPCCA),
    ("netmod", PEARSON),
    ("netmod", DCCA),
    ("netmod", DPCCA),
    ("cla", PEARSON),
)

BASELINE_METHOD = ("ivp", PEARSON)


def method_id(scheme, metric):
    return f"{scheme}_{METRIC_LABELS[metric]}"


def method_label(scheme, metric):
    return f"{SCHEME_LABELS[scheme]} {METRIC_LABELS[metric]}"


def parse_method_id(text):
    token = text.strip().lower()
    for scheme, metric in METHOD_ORDER:
        if token == method_id(scheme, metric):
            return scheme, metric
    raise UnknownNameError(f"unknown method {text!r}; see list-schemes")


def all_method_ids():
    return [method_id(s, m) for s, m in METHOD_ORDER]


def _cell(value):
    """CSV cell for a float: full precision, empty for NaN/absent."""
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def _json_ready(obj):
    """Recursively replace NaN/inf floats with None for strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def fill_improvements(reports):
    """Set each corpus aggregate's improvement against the IVP cov baseline."""
    baseline = next(
        (r for r in reports if (r.scheme, r.metric) == BASELINE_METHOD), None
    )
    for report in reports:
        if baseline is None:
            report.aggregate.improvement = float("nan")
            continue
        if report is baseline:
            report.aggregate.improvement = 0.0
            continue
        try:
            report.aggregate.improvement = improvement(
                report.aggregate.daily_return_mean,
                baseline.aggregate.daily_return_mean,
            )
        except UndefinedMetricError:
            report.aggregate.improvement = float("nan")


def write_table_csv(path, reports):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", *TABLE_FIELDS])
        for report in reports:
            row = [method_label(report.scheme, report.metric)]
            row.extend(_cell(v) for v in report.aggregate.table_row())
            writer.writerow(row)


def write_report_json(path, reports, config_echo=None, include_series=False):
    payload = {
        "methods": [r.to_dict(include_series=include_series) for r in reports],
    }
    if config_echo is not None:
        payload["config"] = config_echo
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_ready(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_returns_csv(path, reports):
    """Long-format per-run out-of-sample return series for external tests."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "run_index", "period", "portfolio_return"])
        for report in reports:
            label = method_label(report.scheme, report.metric)
            for run in report.runs:
                start = run.windows[0].start
                for offset, value in enumerate(run.portfolio_returns):
                    writer.writerow([label, run.run_index, start + offset, _cell(float(value))])


def _write_dist_csv(path, reports, attr):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "asset_rank", "asset", "mean", "std", "min", "max"])
        for report in reports:
            label = method_label(report.scheme, report.metric)
            for row in getattr(report, attr):
                writer.writerow(
                    [label, row.rank, row.asset]
                    + [_cell(v) for v in (row.mean, row.std, row.min, row.max)]
                )


def write_graph_dumps(out_dir, method, run_report, labels):
    """NetMod diagnostic dumps: per-window edge lists and communities."""
    edges_path = os.path.join(out_dir, f"netmod_edges_{method}.csv")
    comm_path = os.path.join(out_dir, f"netmod_communities_{method}.csv")
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "alloc_time", "asset_i", "asset_j", "weight"])
        for dump in run_report.graph_dumps or []:
            if dump is None:
                continue
            for i, j, w in dump["edges"]:
                writer.writerow(
                    [dump["window"], dump["alloc_time"], labels[i], labels[j], _cell(float(w))]
                )
    with open(comm_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window", "alloc_time", "asset", "community"])
        for dump in run_report.graph_dumps or []:
            if dump is None:
                continue
            for cid, members in enumerate(dump["communities"]):
                for node in members:
                    writer.writerow([dump["window"], dump["alloc_time"], labels[node], cid])


def write_all_outputs(out_dir, reports, config_echo=None):
    """The full report set: table, JSON report, return series, distributions."""
    os.makedirs(out_dir, exist_ok=True)
    fill_improvements(reports)
    write_table_csv(os.path.join(out_dir, "table.csv"), reports)
    write_report_json(os.path.join(out_dir, "report.json"), reports, config_echo)
    write_returns_csv(os.path.join(out_dir, "returns_per_run.csv"), reports)
    _write_dist_csv(os.path.join(out_dir, "weights_dist.csv"), reports, "weight_dist")
    _write_dist_csv(os.path.join(out_dir, "rc_dist.csv"), reports, "rc_dist")
