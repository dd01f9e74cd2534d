"""Benchmark harness: a grid of (image, noise, solver, seed) cells to CSV.

Experiment files are INI-style (configparser), e.g.::

    [experiment]
    image = circles          ; a phantom kind or an image file path
    width = 64
    height = 64
    seeds = 0 1 2
    output_dir = bench_out

    [noise.clean]
    eta = 4
    sigma = 1e-4

    [solver.bca]
    method = bca
    lambda1 = 8
    lambda2 = 2.5
    alpha = 200

Any one numeric solver field may hold a space-separated list (``alpha = 20
200 2000``), which expands into one labelled cell per value — that is how
parameter-sweep curves (SNR versus alpha and friends) are produced.

Cells are independent and may run in parallel worker threads (capped by the
``MPG_THREADS`` environment variable; 1 forces serial execution).  Rows are
gathered and written by the caller thread in a fixed order, so identical
inputs give identical CSVs aside from the timing column.  A failing cell is
recorded in its row's status column and does not stop the harness.
"""

from __future__ import annotations

import configparser
import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chambolle import ChambolleConfig
from .fileio import FormatError, read_image
from .metrics import snr, ssim
from .noise import NoiseSpec, corrupt, make_phantom
from .solvers import SolverConfig, bca_solve, bcaf_solve, tv_kl_solve, tv_l2_solve

PHANTOM_KINDS = ("circles", "flat", "ramp", "checker")
SOLVER_NAMES = ("bca", "bcaf", "tvl2", "tvkl")

RESULT_HEADER = ["image", "eta", "sigma", "solver", "seed", "iters", "snr", "ssim", "seconds", "status"]

_SOLVER_FIELDS = (
    "lambda1",
    "lambda2",
    "alpha",
    "alpha_w",
    "alpha_p",
    "epsilon",
    "xi",
    "max_iters",
    "inner_iters",
)


@dataclass
class ExperimentSpec:
    image_source: str
    width: int
    height: int
    noise: list[NoiseSpec]
    solvers: list[tuple[str, str, SolverConfig]]  # (label, method, config)
    seeds: list[int]
    output_dir: str

    def __post_init__(self):
        if not self.noise:
            raise ValueError("experiment needs at least one noise spec")
        if not self.solvers:
            raise ValueError("experiment needs at least one solver")


def _build_config(fields: dict) -> SolverConfig:
    inner = int(fields.pop("inner_iters", ChambolleConfig().inner_iters))
    kwargs = {k: (int(v) if k == "max_iters" else float(v)) for k, v in fields.items()}
    missing = [k for k in ("lambda1", "lambda2") if k not in kwargs]
    if missing:
        raise ValueError(f"solver section needs {' and '.join(missing)}")
    return SolverConfig(chambolle=ChambolleConfig(inner_iters=inner), **kwargs)


def _expand_solver(label: str, raw: dict) -> list[tuple[str, str, SolverConfig]]:
    method = raw.pop("method", None)
    if method not in SOLVER_NAMES:
        raise ValueError(f"solver section [{label}] needs method in {SOLVER_NAMES}")
    unknown = set(raw) - set(_SOLVER_FIELDS)
    if unknown:
        raise ValueError(f"unknown solver keys in [{label}]: {sorted(unknown)}")
    lists = {k: v.split() for k, v in raw.items() if len(v.split()) > 1}
    if len(lists) > 1:
        raise ValueError(f"at most one swept field per solver section, got {sorted(lists)}")
    if not lists:
        return [(label, method, _build_config(dict(raw)))]
    (key, values), = lists.items()
    out = []
    for val in values:
        fields = dict(raw)
        fields[key] = val
        out.append((f"{label}-{key}{float(val):g}", method, _build_config(fields)))
    return out


def load_experiment(path) -> ExperimentSpec:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise FormatError(f"cannot parse experiment spec {path}: {exc}") from exc
    if "experiment" not in parser:
        raise FormatError(f"{path}: missing [experiment] section")
    exp = parser["experiment"]
    noise = []
    solvers = []
    for section in parser.sections():
        if section.startswith("noise."):
            s = parser[section]
            noise.append(
                NoiseSpec(eta=float(s["eta"]), sigma=float(s.get("sigma", "0")))
            )
        elif section.startswith("solver."):
            solvers.extend(
                _expand_solver(section.split(".", 1)[1], dict(parser[section]))
            )
    try:
        return ExperimentSpec(
            image_source=exp.get("image", "circles"),
            width=int(exp.get("width", "64")),
            height=int(exp.get("height", "64")),
            noise=noise,
            solvers=solvers,
            seeds=[int(s) for s in exp.get("seeds", "0").split()],
            output_dir=exp.get("output_dir", "bench_out"),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _load_truth(spec: ExperimentSpec):
    if spec.image_source in PHANTOM_KINDS:
        return make_phantom(spec.image_source, spec.width, spec.height)
    return read_image(spec.image_source)


_SOLVE = {
    # baselines take a single fidelity weight: the quadratic one for tvl2,
    # the Poisson one for tvkl
    "bca": lambda f, cfg, truth: bca_solve(f, cfg, truth=truth),
    "bcaf": lambda f, cfg, truth: bcaf_solve(f, cfg, truth=truth),
    "tvl2": lambda f, cfg, truth: tv_l2_solve(f, cfg.lambda1, cfg, truth=truth),
    "tvkl": lambda f, cfg, truth: tv_kl_solve(f, cfg.lambda2, cfg, truth=truth),
}


def _run_cell(truth, image_label, nspec, label, method, cfg, seed):
    row = {
        "image": image_label,
        "eta": f"{nspec.eta:g}",
        "sigma": f"{nspec.sigma:g}",
        "solver": label,
        "seed": seed,
        "iters": "",
        "snr": "",
        "ssim": "",
        "seconds": "",
        "status": "ok",
    }
    try:
        f = corrupt(truth, NoiseSpec(eta=nspec.eta, sigma=nspec.sigma, seed=seed))
        if method == "tvkl":
            # Poisson fidelity needs a nonnegative observation; the Gaussian
            # part of the synthesis can dip below zero
            f = np.maximum(f, 0.0)
        u, trace = _SOLVE[method](f, cfg, truth)
        row["iters"] = trace[-1].iter
        row["seconds"] = f"{trace[-1].seconds:.6f}"
        row["snr"] = f"{snr(u, truth):.6f}"
        try:
            row["ssim"] = f"{ssim(u, truth):.6f}"
        except ValueError:
            pass  # image smaller than the SSIM window; leave blank
    except Exception as exc:  # noqa: BLE001 - per-row failure is part of the contract
        row["status"] = f"error: {exc}"
    return row


def thread_count(requested: int | None = None) -> int:
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("MPG_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"MPG_THREADS must be an integer, got {env!r}") from exc
        if n > 0:
            return n
    return os.cpu_count() or 1


def run_bench(spec: ExperimentSpec, threads: int | None = None) -> Path:
    """Run the whole experiment grid; returns the results CSV path."""
    truth = _load_truth(spec)
    image_label = (
        spec.image_source
        if spec.image_source in PHANTOM_KINDS
        else Path(spec.image_source).stem
    )
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    cells = [
        (truth, image_label, nspec, label, method, cfg, seed)
        for nspec in spec.noise
        for (label, method, cfg) in spec.solvers
        for seed in spec.seeds
    ]
    n_workers = max(1, min(thread_count(threads), len(cells)))
    if n_workers == 1:
        rows = [_run_cell(*cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(lambda c: _run_cell(*c), cells))

    # aggregate means over seeds for every (noise, solver) group, ok rows only
    aggregates = []
    idx = 0
    for nspec in spec.noise:
        for label, _method, _cfg in spec.solvers:
            group = rows[idx : idx + len(spec.seeds)]
            idx += len(spec.seeds)
            ok = [r for r in group if r["status"] == "ok"]
            agg = dict(group[0])
            agg["seed"] = "mean"
            agg["status"] = f"ok ({len(ok)}/{len(group)})"
            for col in ("iters", "snr", "ssim", "seconds"):
                vals = [float(r[col]) for r in ok if r[col] != ""]
                agg[col] = f"{sum(vals) / len(vals):.6f}" if vals else ""
            aggregates.append(agg)

    path = out_dir / "results.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_HEADER)
        writer.writeheader()
        for row in rows + aggregates:
            writer.writerow(row)
    return path
