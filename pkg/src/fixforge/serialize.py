"""JSON encoding shared by the command line tools.

Complex numbers travel as [re, im] pairs and matrices as row-major nested
arrays of such pairs. Probability vectors are plain real arrays and
stochastic matrices are column-major nested arrays (a list of columns, each
a distribution). Channels are tagged records; the kinds "unitary" and
"mixed_unitary" extend the wire format so every fixer output stays
serializable. Malformed payloads raise ValueError.
"""

from __future__ import annotations

import json

import numpy as np

from .classical import ClassicalFixCertificate, ProbabilityVector, StochasticMatrix
from .counterexamples import CounterexampleInstance
from .fixers import FixResult
from .quantum import (
    Channel,
    DensityMatrix,
    DiamondBounds,
    MixedUnitaryChannel,
    PureState,
)


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v: np.ndarray) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def decode_vector(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("a vector must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def encode_matrix(m: np.ndarray) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("a matrix must be row-major nested [re, im] pairs")
    return arr[:, :, 0] + 1j * arr[:, :, 1]


def encode_probability(p: ProbabilityVector) -> list[float]:
    return [float(x) for x in p.entries]


def decode_probability(obj) -> ProbabilityVector:
    return ProbabilityVector(np.asarray(obj, dtype=float))


def encode_stochastic(s: StochasticMatrix) -> list[list[float]]:
    return [[float(x) for x in s.matrix[:, y]] for y in range(s.dim)]


def decode_stochastic(obj) -> StochasticMatrix:
    columns = np.asarray(obj, dtype=float)
    if columns.ndim != 2:
        raise ValueError("a stochastic matrix must be a nested list of columns")
    return StochasticMatrix(columns.T)


def encode_channel(ch) -> dict:
    if isinstance(ch, MixedUnitaryChannel):
        d = ch.components[0][1].shape[0]
        return {
            "kind": "mixed_unitary",
            "dim_in": d,
            "dim_out": d,
            "components": [
                {"weight": float(p), "unitary": encode_matrix(u)}
                for p, u in ch.components
            ],
        }
    if isinstance(ch, np.ndarray):
        d = ch.shape[0]
        return {"kind": "unitary", "dim_in": d, "dim_out": d, "data": encode_matrix(ch)}
    if not isinstance(ch, Channel):
        raise ValueError(f"cannot encode {type(ch).__name__} as a channel")
    record = {"kind": ch.kind, "dim_in": ch.dim_in, "dim_out": ch.dim_out}
    if ch.kind == "kraus":
        record["data"] = [encode_matrix(k) for k in ch.data]
    else:
        record["data"] = encode_matrix(ch.data)
    if ch.kind == "stinespring":
        record["env_dim"] = ch.env_dim
    return record


def decode_channel(obj: dict):
    try:
        kind = obj["kind"]
    except (TypeError, KeyError):
        raise ValueError("a channel record needs a 'kind' tag") from None
    if kind == "unitary":
        return decode_matrix(obj["data"])
    if kind == "mixed_unitary":
        return MixedUnitaryChannel(
            [(float(c["weight"]), decode_matrix(c["unitary"])) for c in obj["components"]]
        )
    try:
        dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
    except KeyError as exc:
        raise ValueError(f"channel record is missing {exc}") from None
    if kind == "kraus":
        return Channel("kraus", [decode_matrix(k) for k in obj["data"]], dim_in, dim_out)
    if kind == "stinespring":
        return Channel(
            "stinespring", decode_matrix(obj["data"]), dim_in, dim_out,
            env_dim=int(obj["env_dim"]),
        )
    if kind == "choi":
        return Channel("choi", decode_matrix(obj["data"]), dim_in, dim_out)
    raise ValueError(f"unknown channel kind {kind!r}")


def encode_state(state) -> dict:
    if isinstance(state, DensityMatrix):
        return {"type": "density", "matrix": encode_matrix(state.matrix)}
    if isinstance(state, PureState):
        record = {"type": "pure", "vector": encode_vector(state.vector)}
        if state.dims is not None:
            record["dims"] = [int(state.dims[0]), int(state.dims[1])]
        return record
    if isinstance(state, ProbabilityVector):
        return {"type": "probability", "entries": encode_probability(state)}
    raise ValueError(f"cannot encode {type(state).__name__} as a state")


def decode_state(obj: dict):
    try:
        tag = obj["type"]
    except (TypeError, KeyError):
        raise ValueError("a state record needs a 'type' tag") from None
    if tag == "density":
        return DensityMatrix(decode_matrix(obj["matrix"]))
    if tag == "pure":
        dims = obj.get("dims")
        return PureState(
            decode_vector(obj["vector"]),
            dims=None if dims is None else (int(dims[0]), int(dims[1])),
        )
    if tag == "probability":
        return decode_probability(obj["entries"])
    raise ValueError(f"unknown state type {tag!r}")


def encode_diamond_bounds(b: DiamondBounds) -> dict:
    return {"lower": float(b.lower), "upper": float(b.upper), "witnesses": b.witnesses}


def encode_fix_result(result: FixResult) -> dict:
    record = {
        "fix_class": result.fix_class,
        "sigma": encode_state(result.sigma),
        "fixed_channel": encode_channel(result.fixed_channel),
        "epsilon_used": float(result.epsilon_used),
        "state_bound_claimed": float(result.state_bound_claimed),
        "channel_bound_claimed": float(result.channel_bound_claimed),
        "state_distance_measured": float(result.state_distance_measured),
        "channel_distance_certificate": encode_diamond_bounds(
            result.channel_distance_certificate
        ),
        "certificate_norm": result.certificate_norm,
        "fixed_point_residual": float(result.fixed_point_residual),
        "trivial": bool(result.trivial),
        "notes": result.notes,
    }
    if result.local_part is not None:
        record["local_part"] = encode_channel(result.local_part)
    return record


def encode_classical_fix(
    q: ProbabilityVector, s: StochasticMatrix, cert: ClassicalFixCertificate
) -> dict:
    return {
        "fix_class": "classical",
        "q": encode_probability(q),
        "s": encode_stochastic(s),
        "certificate": {
            "epsilon_used": float(cert.epsilon_used),
            "state_bound_claimed": float(cert.state_bound_claimed),
            "map_bound_claimed": float(cert.map_bound_claimed),
            "state_distance": float(cert.state_distance),
            "map_distance": float(cert.map_distance),
            "residual": float(cert.residual),
        },
    }


def encode_channel_like(ch) -> dict:
    if isinstance(ch, StochasticMatrix):
        return {"kind": "stochastic", "columns": encode_stochastic(ch)}
    return encode_channel(ch)


def encode_counterexample(inst: CounterexampleInstance) -> dict:
    return {
        "name": inst.name,
        "epsilon": float(inst.epsilon),
        "states": [encode_state(s) for s in inst.states],
        "channels": [encode_channel_like(c) for c in inst.channels],
        "claimed_facts": [
            [desc, float(value), float(tol)] for desc, value, tol in inst.claimed_facts
        ],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def save(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
