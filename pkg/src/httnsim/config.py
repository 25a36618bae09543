"""JSON experiment configs: schema, parsing, validation, serialization.

One structured JSON document drives every experiment. Numbers are parsed as
doubles; complex entries are ``[re, im]`` pairs; matrices are nested lists;
single-qubit gates and Pauli strings may be given by name (``"H"``,
``"ZZ"``). Exactly one experiment block must be present, matching the
``experiment`` field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .channels import GateNoisePair, NO_NOISE, NoiseSpec
from .deepvqe import ClusterModel, InteractionTerm
from .decay import DecayConfig
from .errors import ValidationError
from .linalg import pauli_matrix
from .tensors import (
    ClassicalTable,
    GateFamilyPrep,
    InitialStatePrep,
    PauliFamilyPrep,
    ProjectedStatePrep,
    QuantumTensor,
)
from .tree import HttnTree, TreeRoot

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = ("contract", "physicality", "deepvqe", "forge", "decay")

NAMED_GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]).astype(complex),
}

NAMED_STATES = {
    "bell": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "zero": np.array([1, 0], dtype=complex),
    "one": np.array([0, 1], dtype=complex),
    "plus": np.array([1, 1], dtype=complex) / np.sqrt(2),
}


class ConfigError(ValidationError):
    """Config parsing/validation failure, carrying the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _complex(value, path: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(path, "expected a number or an [re, im] pair")


def parse_matrix(value, path: str) -> np.ndarray:
    """A named gate / Pauli string, or a nested list of complex entries."""
    if isinstance(value, str):
        if value in NAMED_GATES:
            return NAMED_GATES[value]
        try:
            return pauli_matrix(value)
        except ValueError as exc:
            raise ConfigError(path, f"unknown operator name {value!r}") from exc
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected an operator name or a nested list")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list):
            raise ConfigError(f"{path}[{r}]", "expected a list of entries")
        rows.append([_complex(entry, f"{path}[{r}][{c}]")
                     for c, entry in enumerate(row)])
    mat = np.array(rows, dtype=complex)
    if mat.ndim != 2:
        raise ConfigError(path, "expected a two-dimensional matrix")
    return mat


def parse_state(value, path: str) -> np.ndarray:
    if isinstance(value, str):
        if value in NAMED_STATES:
            return NAMED_STATES[value].copy()
        raise ConfigError(path, f"unknown state name {value!r}")
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a state name or an amplitude list")
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(value)],
                    dtype=complex)


def parse_noise(value, path: str):
    if value is None:
        return NO_NOISE
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a noise object")
    kind = value.get("kind", "none")
    if kind == "none":
        return NO_NOISE
    if kind == "depolarizing":
        if "rate" not in value:
            raise ConfigError(f"{path}.rate", "missing depolarizing rate")
        return NoiseSpec("depolarizing", rate=float(value["rate"]))
    if kind == "kraus":
        ops = value.get("operators")
        if not ops:
            raise ConfigError(f"{path}.operators", "missing Kraus operators")
        return NoiseSpec("kraus", kraus_ops=tuple(
            parse_matrix(op, f"{path}.operators[{i}]")
            for i, op in enumerate(ops)))
    if kind == "gate_pair":
        try:
            return GateNoisePair(p=tuple(float(x) for x in value["p"]),
                                 q=tuple(float(x) for x in value["q"]))
        except KeyError as exc:
            raise ConfigError(path, "gate_pair noise needs p and q lists") from exc
    raise ConfigError(f"{path}.kind", f"unknown noise kind {kind!r}")


def parse_tensor(value, path: str) -> QuantumTensor:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a tensor object")
    try:
        prep_kind = value["prep"]
        tau = int(value["tau"])
        k_width = int(value["k"])
    except KeyError as exc:
        raise ConfigError(path, f"missing tensor field {exc}") from exc
    noise = parse_noise(value.get("noise"), f"{path}.noise")
    if prep_kind == "initial_state":
        prep = InitialStatePrep(parse_matrix(value["unitary"], f"{path}.unitary"))
    elif prep_kind == "projection":
        prep = ProjectedStatePrep(parse_state(value["state"], f"{path}.state"))
    elif prep_kind == "pauli":
        labels = tuple(None if lab is None else str(lab)
                       for lab in value.get("labels", ()))
        prep = PauliFamilyPrep(parse_state(value["state"], f"{path}.state"),
                               labels)
    elif prep_kind == "gates":
        prep = GateFamilyPrep(tuple(
            parse_matrix(u, f"{path}.unitaries[{i}]")
            for i, u in enumerate(value.get("unitaries", ()))))
    elif prep_kind == "classical":
        prep = ClassicalTable(parse_matrix(value["table"], f"{path}.table"))
    else:
        raise ConfigError(f"{path}.prep", f"unknown preparation {prep_kind!r}")
    try:
        return QuantumTensor(prep, tau=tau, k_width=k_width, noise=noise,
                             name=str(value.get("name", "")))
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_tree(value, path: str) -> tuple[HttnTree, list]:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a tree object")
    root_val = value.get("root")
    if not isinstance(root_val, dict):
        raise ConfigError(f"{path}.root", "missing root object")
    if "state" in root_val:
        root = TreeRoot(state=parse_state(root_val["state"], f"{path}.root.state"))
    elif "unitary" in root_val:
        root = TreeRoot(
            unitary=parse_matrix(root_val["unitary"], f"{path}.root.unitary"),
            noise=parse_noise(root_val.get("noise"), f"{path}.root.noise"))
    else:
        raise ConfigError(f"{path}.root", "root needs state= or unitary=")
    layers_val = value.get("layers")
    if not isinstance(layers_val, list) or not layers_val:
        raise ConfigError(f"{path}.layers", "expected a nonempty layer list")
    layers = []
    for li, layer in enumerate(layers_val):
        if not isinstance(layer, list):
            raise ConfigError(f"{path}.layers[{li}]", "expected a tensor list")
        layers.append([parse_tensor(t, f"{path}.layers[{li}][{ti}]")
                       for ti, t in enumerate(layer)])
    try:
        tree = HttnTree(root=root, layers=layers)
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from exc
    observables = []
    for oi, obs in enumerate(value.get("observables", ())):
        observables.append(parse_matrix(obs, f"{path}.observables[{oi}]"))
    return tree, observables


def parse_pauli_terms(value, path: str, num_qubits: int) -> np.ndarray:
    """Either ``[["ZZ", coeff], ...]`` or a dense matrix."""
    if (isinstance(value, list) and value
            and isinstance(value[0], list) and len(value[0]) == 2
            and isinstance(value[0][0], str)):
        total = np.zeros((2**num_qubits, 2**num_qubits), dtype=complex)
        for i, item in enumerate(value):
            labels, coeff = item
            total += _complex(coeff, f"{path}[{i}][1]") * pauli_matrix(labels)
        return total
    return parse_matrix(value, path)


def parse_cluster_model(value, path: str) -> ClusterModel:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a model object")
    clusters = value.get("clusters")
    if not isinstance(clusters, list) or not clusters:
        raise ConfigError(f"{path}.clusters", "expected a nonempty cluster list")
    qubits, hams = [], []
    for ci, cluster in enumerate(clusters):
        n = int(cluster.get("qubits", 0))
        if n < 1:
            raise ConfigError(f"{path}.clusters[{ci}].qubits",
                              "cluster needs a positive qubit count")
        qubits.append(n)
        hams.append(parse_pauli_terms(cluster.get("hamiltonian"),
                                      f"{path}.clusters[{ci}].hamiltonian", n))
    interactions = []
    for ii, item in enumerate(value.get("interactions", ())):
        try:
            interactions.append(InteractionTerm(
                left=int(item["left"]), right=int(item["right"]),
                coeff=float(item["coeff"]),
                op_left=item["op_left"], op_right=item["op_right"]))
        except KeyError as exc:
            raise ConfigError(f"{path}.interactions[{ii}]",
                              f"missing field {exc}") from exc
    excitations = value.get("excitations")
    if excitations is not None:
        excitations = tuple(tuple(d) for d in excitations)
    try:
        return ClusterModel(tuple(qubits), tuple(hams), tuple(interactions),
                            excitations)
    except ValidationError as exc:
        raise ConfigError(path, str(exc)) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    payload: dict
    out_dir: str | None = None
    threads: int | None = None

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as handle:
                doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
        except OSError as exc:
            raise ConfigError(path, str(exc)) from exc
        return ExperimentConfig.from_dict(doc)

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("$", "top level must be an object")
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError("schema_version",
                              f"expected {SCHEMA_VERSION}, got {version!r}")
        kind = doc.get("experiment")
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError("experiment",
                              f"must be one of {', '.join(EXPERIMENT_KINDS)}")
        blocks = [k for k in EXPERIMENT_KINDS if k in doc]
        if blocks != [kind]:
            raise ConfigError("$", "exactly one experiment block must be "
                              f"present and match 'experiment' (found {blocks})")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
            raise ConfigError("seed", "seed must be a 64-bit unsigned integer")
        payload = doc[kind]
        if not isinstance(payload, dict):
            raise ConfigError(kind, "experiment block must be an object")
        threads = doc.get("threads")
        if threads is not None and (not isinstance(threads, int) or threads < 1):
            raise ConfigError("threads", "threads must be a positive integer")
        return ExperimentConfig(kind=kind, seed=seed, payload=payload,
                                out_dir=doc.get("out"), threads=threads)

    def to_dict(self) -> dict:
        doc = {"schema_version": SCHEMA_VERSION, "experiment": self.kind,
               "seed": self.seed, self.kind: self.payload}
        if self.out_dir is not None:
            doc["out"] = self.out_dir
        if self.threads is not None:
            doc["threads"] = self.threads
        return doc


def parse_decay_config(payload: dict, seed: int, path: str = "decay") -> DecayConfig:
    try:
        return DecayConfig(
            n_branch=int(payload["n_branch"]),
            layers=int(payload["layers"]),
            depth=int(payload.get("depth", 2)),
            angle_range=float(payload.get("angle_range", np.pi / 1000)),
            epsilons=tuple(float(e) for e in payload.get("epsilons", (0.0,))),
            seed=seed,
            max_register_qubits=int(payload.get("max_register_qubits", 13)))
    except KeyError as exc:
        raise ConfigError(path, f"missing field {exc}") from exc
    except (ValidationError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


# --- serialization helpers ------------------------------------------------------


def complex_matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(entry.real), float(entry.imag)] for entry in row]
            for row in np.asarray(mat, dtype=complex)]
