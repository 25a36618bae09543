"""Config-driven experiment runner.

Subcommands mirror the experiment kinds (``contract``, ``physicality``,
``deepvqe``, ``forge``, ``decay``) plus ``validate`` for a parse-only check.
Each takes ``--config <path>`` and optional ``--seed``, ``--out``,
``--threads`` overrides (``HTTNSIM_THREADS`` is the environment fallback).
Artifacts are CSV/JSON files with deterministic bytes for a fixed
(config, seed); one summary line per result row goes to stdout.

Exit status: 0 on success, 2 for config errors (with field diagnostics),
1 for numeric/library failures (reporting the error type).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channels import GateNoisePair
from .config import (
    ConfigError,
    ExperimentConfig,
    complex_matrix_to_json,
    parse_cluster_model,
    parse_decay_config,
    parse_matrix,
    parse_state,
    parse_tensor,
    parse_tree,
    SCHEMA_VERSION,
)
from .contraction import contract_tensor
from .deepvqe import AnsatzSpec, OptimizerSpec, deep_vqe
from .decay import layered_ratio, mixed_layer_ratio, DecayResult
from .errors import HttnError
from .forging import (
    build_sampler_plan,
    forged_expectation,
    forged_htn_expectation,
    forged_sampler,
    schmidt_decompose,
)
from .tensors import GateFamilyPrep
from .tree import (
    effective_noisy_state,
    effective_noisy_state_type4,
    noisy_expectation,
    physicality_check,
)


def _thread_count(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("HTTNSIM_THREADS")
    if env is not None and env.isdigit() and int(env) > 0:
        return int(env)
    return 1


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _out_dir(config: ExperimentConfig, args) -> Path:
    out = args.out or config.out_dir or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_contract(config: ExperimentConfig, args) -> int:
    payload = config.payload
    tensor = parse_tensor(payload.get("tensor"), "contract.tensor")
    observable = parse_matrix(payload.get("observable"), "contract.observable")
    block = contract_tensor(tensor, observable)
    out = _out_dir(config, args)
    _write_json(out / "blocks.json", {
        "m": complex_matrix_to_json(block.m),
        "s": complex_matrix_to_json(block.s),
        "tau": block.tau,
    })
    print(f"contract: tau={block.tau} "
          f"m[0,0]={block.m[0, 0].real:.12g} wrote {out / 'blocks.json'}")
    return 0


def run_physicality(config: ExperimentConfig, args) -> int:
    tree, observables = parse_tree(config.payload.get("tree"), "physicality.tree")
    gate_family = any(isinstance(node.prep, GateFamilyPrep)
                      for layer in tree.layers for node in layer)
    if gate_family:
        state = effective_noisy_state_type4(tree)
    else:
        state = effective_noisy_state(tree)
    report = physicality_check(state)
    out = _out_dir(config, args)
    doc = {"report": report.as_dict(),
           "state": complex_matrix_to_json(state)}
    if observables:
        doc["expectation"] = noisy_expectation(tree, observables)
    _write_json(out / "physicality.json", doc)
    print(f"physicality: min_eigenvalue={report.min_eigenvalue:.12g} "
          f"trace={report.trace.real:.12g} is_physical={report.is_physical}")
    return 0


def run_deepvqe(config: ExperimentConfig, args) -> int:
    payload = config.payload
    model = parse_cluster_model(payload.get("model"), "deepvqe.model")
    ansatz = AnsatzSpec(depth=int(payload.get("ansatz_depth", 3)))
    optimizer = OptimizerSpec(
        method=str(payload.get("optimizer", "lbfgs")),
        restarts=int(payload.get("restarts", 4)),
        maxiter=int(payload.get("maxiter", 4000)))
    result = deep_vqe(model, ansatz, optimizer, seed=config.seed)
    out = _out_dir(config, args)
    _write_json(out / "deepvqe.json", {
        "cluster_energies": [o.energy for o in result.cluster_outcomes],
        "energy": result.energy,
        "effective_dim": int(result.effective.matrix.shape[0]),
        "padded": [list(mask) for mask in result.effective.padded],
    })
    print(f"deepvqe: energy={result.energy:.12g} "
          f"clusters={[round(o.energy, 9) for o in result.cluster_outcomes]}")
    return 0


def run_forge(config: ExperimentConfig, args) -> int:
    payload = config.payload
    psi = parse_state(payload.get("state"), "forge.state")
    ansatz = schmidt_decompose(psi, payload.get("k"))
    o1 = parse_matrix(payload.get("observable_1"), "forge.observable_1")
    o2 = parse_matrix(payload.get("observable_2"), "forge.observable_2")
    exact = forged_expectation(ansatz, o1, o2)
    via_tree = forged_htn_expectation(ansatz, o1, o2)
    doc = {
        "exact": exact,
        "tree_contraction": via_tree,
        "lambda_l1": ansatz.lambda_l1,
        "schmidt_coefficients": [float(x) for x in ansatz.lambdas],
    }
    shots = int(payload.get("shots", 0))
    if shots > 0:
        plan = build_sampler_plan(ansatz, o1, o2)
        sampled = forged_sampler(plan, o1, o2, shots, seed=config.seed)
        doc["sampler"] = {
            "estimate": sampled.estimate,
            "stderr": sampled.stderr,
            "shots": sampled.shots,
            "scale": sampled.scale,
        }
        print(f"forge: exact={exact:.12g} sampler={sampled.estimate:.12g} "
              f"stderr={sampled.stderr:.3g}")
    else:
        print(f"forge: exact={exact:.12g} tree={via_tree:.12g}")
    out = _out_dir(config, args)
    _write_json(out / "forge.json", doc)
    return 0


def _format_float(x) -> str:
    return repr(float(x))


def decay_rows_to_csv(rows: list[DecayResult]) -> str:
    lines = [",".join(DecayResult.CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_float(v) if isinstance(v, float)
                              else str(v) for v in row.csv_row()))
    return "\n".join(lines) + "\n"


def run_decay(config: ExperimentConfig, args) -> int:
    payload = config.payload
    cfg = parse_decay_config(payload, config.seed)
    classical_layers = frozenset(int(x) for x in
                                 payload.get("classical_layers", ()))
    threads = _thread_count(args)

    def run_point(eps: float) -> DecayResult:
        point = replace(cfg, epsilons=(eps,))
        if classical_layers:
            return mixed_layer_ratio(point, classical_layers)[0]
        return layered_ratio(point)[0]

    if threads > 1 and len(cfg.epsilons) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_point, cfg.epsilons))
    else:
        if classical_layers:
            rows = mixed_layer_ratio(cfg, classical_layers)
        else:
            rows = layered_ratio(cfg)
    out = _out_dir(config, args)
    csv_path = out / "decay.csv"
    csv_path.write_text(decay_rows_to_csv(rows), encoding="utf-8")
    for row in rows:
        print(f"decay: N={row.n_branch} L={row.layers} eps={row.epsilon:g} "
              f"ratio={row.ratio:.9g} predicted={row.predicted_ratio:.9g}")
    print(f"decay: wrote {csv_path}")
    return 0


RUNNERS = {
    "contract": run_contract,
    "physicality": run_physicality,
    "deepvqe": run_deepvqe,
    "forge": run_forge,
    "decay": run_decay,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="httnsim",
        description="hybrid tree tensor network experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*RUNNERS, "validate"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--threads", type=int, default=None,
                         help="max parallel grid points "
                              "(HTTNSIM_THREADS as fallback)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.from_file(args.config)
        if args.command == "validate":
            print(f"valid: {config.kind} experiment, seed={config.seed}")
            return 0
        if config.kind != args.command:
            raise ConfigError("experiment",
                              f"config describes {config.kind!r}, "
                              f"but the {args.command!r} subcommand was used")
        if args.seed is not None:
            config = ExperimentConfig(kind=config.kind, seed=args.seed,
                                      payload=config.payload,
                                      out_dir=config.out_dir,
                                      threads=config.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return RUNNERS[config.kind](config, args)
    except HttnError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
