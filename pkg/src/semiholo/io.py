"""JSON codebooks, experiment configs and report schemas."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .algebra import BaseItem, Chain, SystemParams
from .expr import evaluate
from .memory import Codebook, QueryResult, unbind_query

__all__ = [
    "dumps_canonical",
    "codebook_to_dict",
    "codebook_from_dict",
    "dumps_codebook",
    "loads_codebook",
    "load_codebook",
    "save_codebook",
    "redcar_codebook",
    "redcar_demo",
    "REDCAR_EXPRESSION",
    "REDCAR_ROLE",
    "parse_vector",
    "parse_operand",
    "ExperimentConfig",
    "SCHEMAS",
    "validate_report",
]


def dumps_canonical(obj) -> str:
    """Sorted keys, 2-space indent, LF endings, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def codebook_to_dict(cb: Codebook) -> dict:
    return {
        "params": cb.params.as_dict(),
        "vocab": {name: list(cb[name].elems) for name in cb.names},
    }


def codebook_from_dict(doc: dict) -> Codebook:
    _validator("codebook").validate(doc)
    params = SystemParams(**doc["params"])
    return Codebook(params, doc["vocab"])


def dumps_codebook(cb: Codebook) -> str:
    return dumps_canonical(codebook_to_dict(cb))


def loads_codebook(text: str) -> Codebook:
    return codebook_from_dict(json.loads(text))


def load_codebook(path: str | Path) -> Codebook:
    return loads_codebook(Path(path).read_text(encoding="utf-8"))


def save_codebook(cb: Codebook, path: str | Path) -> None:
    Path(path).write_text(dumps_codebook(cb), encoding="utf-8", newline="\n")


def redcar_codebook() -> Codebook:
    """The bundled five-entry red-car vocabulary (p=4, y=2, d=4)."""
    text = resources.files("semiholo").joinpath("data/redcar.json").read_text(encoding="utf-8")
    return loads_codebook(text)


REDCAR_EXPRESSION = "obj*car + col*red"
REDCAR_ROLE = "col"


def redcar_demo(cb: Codebook | None = None) -> QueryResult:
    """Store two bindings, unbind the ``col`` role and clean up the result."""
    cb = cb or redcar_codebook()
    return unbind_query(cb, evaluate(REDCAR_EXPRESSION, cb), REDCAR_ROLE)


def parse_vector(text: str) -> list:
    try:
        v = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"cannot parse operand {text!r}: {exc.msg} at column {exc.colno}") from None
    if not isinstance(v, list):
        raise ValueError(f"operand {text!r} is not a list")
    return v


def parse_operand(text: str, params: SystemParams, cb: Codebook | None = None) -> Chain:
    """Read ``[1,2]`` (item), ``[[1,2],[3,0]]`` (chain) or a codebook name."""
    if cb is not None and text in cb:
        return cb.chain(text)
    v = parse_vector(text)
    if v and all(isinstance(e, list) for e in v):
        return Chain.of(params, *v)
    if not v:
        return Chain(params, ())
    if not all(isinstance(e, int) and not isinstance(e, bool) for e in v):
        raise ValueError(f"operand {text!r} must hold integers")
    if len(v) != params.y:
        raise ValueError(f"operand {text!r} has {len(v)} elements, expected y={params.y}")
    return Chain(params, (BaseItem(tuple(v), params.p),))


@dataclass
class ExperimentConfig:
    """Everything a CLI run needs besides the code version."""

    params: SystemParams = field(default_factory=lambda: SystemParams(4, 2, 4))
    seed: int = 0
    gammas: list[int] = field(default_factory=lambda: [1])
    mc_vocab: list[int] = field(default_factory=list)
    mc_trials: int = 1000
    copu_script: str | None = None
    out: str | None = None

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "seed": self.seed,
            "gammas": list(self.gammas),
            "mc_vocab": list(self.mc_vocab),
            "mc_trials": self.mc_trials,
            "copu_script": self.copu_script,
            "out": self.out,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        _validator("config").validate(doc)
        doc = dict(doc)
        params = SystemParams(**doc.pop("params")) if "params" in doc else SystemParams(4, 2, 4)
        return cls(params=params, **doc)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def dumps(self) -> str:
        return dumps_canonical(self.to_dict())


_PARAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "p": {"type": "integer", "minimum": 2},
        "y": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
    },
    "required": ["p", "y", "d"],
    "additionalProperties": False,
}

CODEBOOK_SCHEMA = {
    "type": "object",
    "properties": {
        "params": _PARAMS_SCHEMA,
        "vocab": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "integer", "minimum": 0},
            },
        },
    },
    "required": ["params", "vocab"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "params": _PARAMS_SCHEMA,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "gammas": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "mc_vocab": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "mc_trials": {"type": "integer", "minimum": 1},
        "copu_script": {"type": ["string", "null"]},
        "out": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

_CHAIN = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
_TOGGLES = {
    "type": "object",
    "properties": {c: {"type": "integer", "minimum": 0}
                   for c in ("input", "datapath", "register", "control")},
    "required": ["input", "datapath", "register", "control"],
}
_STATS = {
    "type": "object",
    "properties": {
        "kind": {"type": ["string", "null"]},
        "cycles": {"type": "integer", "minimum": 0},
        "toggles": _TOGGLES,
        "input_bit_flips": {"type": "integer", "minimum": 0},
        "output_bit_flips": {"type": "integer", "minimum": 0},
        "eq": {"type": "boolean"},
        "result_rank": {"type": "integer", "minimum": 0},
    },
    "required": ["cycles", "toggles", "eq", "result_rank"],
}
_QUERY = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "distance": {"type": "integer", "minimum": 0},
        "runner_up_name": {"type": ["string", "null"]},
        "runner_up_distance": {"type": ["integer", "null"]},
        "ambiguous": {"type": "boolean"},
    },
    "required": ["name", "distance", "runner_up_name", "runner_up_distance", "ambiguous"],
}
_MC = {
    "type": "object",
    "properties": {
        "params": _PARAMS_SCHEMA,
        "vocab_size": {"type": "integer"},
        "Gamma": {"type": "integer"},
        "trials": {"type": "integer"},
        "seed": {"type": ["integer", "null"]},
        "collision_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "ambiguous_query_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "collision_ci": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "ambiguous_query_ci": {"type": "array", "items": {"type": "number"}, "minItems": 2,
                               "maxItems": 2},
    },
    "required": ["params", "vocab_size", "Gamma", "trials", "seed", "collision_rate",
                 "ambiguous_query_rate"],
}

SCHEMAS = {
    "algebra": {
        "type": "object",
        "properties": {
            "command": {"type": "string"},
            "params": _PARAMS_SCHEMA,
            "result": {"type": ["array", "integer"]},
            "rank": {"type": ["integer", "null"]},
            "warning": {"type": "boolean"},
        },
        "required": ["command", "params", "result", "rank"],
    },
    "query": {
        "type": "object",
        "properties": {
            "params": _PARAMS_SCHEMA,
            "expression": {"type": ["string", "null"]},
            "unbind": {"type": ["string", "null"]},
            "probe": _CHAIN,
            "result": _QUERY,
        },
        "required": ["params", "probe", "result"],
    },
    "capacity": {
        "type": "object",
        "properties": {
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "params": _PARAMS_SCHEMA,
                        "Gamma": {"type": "integer", "minimum": 1},
                        "Q": {"type": "string", "pattern": "^[0-9]+$"},
                        "s": {"type": "number"},
                        "Q_s": {"type": "number"},
                        "J": {"type": "number"},
                        "log_J": {"type": "number"},
                        "Q_s_bound": {"type": "number"},
                        "dominant_valid": {"type": "boolean"},
                    },
                    "required": ["params", "Gamma", "Q", "s", "Q_s", "J", "Q_s_bound"],
                },
            },
            "mc": {"type": "array", "items": _MC},
        },
        "required": ["rows"],
    },
    "copu-run": {
        "type": "object",
        "properties": {
            "config": {"type": "object"},
            "results": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "kind": {"type": "string"},
                        "result": _CHAIN,
                        "stats": _STATS,
                        "energy_proxy": {"type": "number"},
                        "trace": {"type": "array", "items": {"type": "string"}},
                    },
                    "required": ["kind", "result", "stats", "energy_proxy"],
                },
            },
        },
        "required": ["config", "results"],
    },
    "copu-worst-case": {
        "type": "object",
        "properties": {
            "config": {"type": "object"},
            "reports": {"type": "array"},
        },
        "required": ["config", "reports"],
    },
    "copu-estimate": {
        "type": "object",
        "properties": {
            k: {"type": "integer", "minimum": 0}
            for k in ("alu", "mux_demux", "datapath", "control", "registers", "total")
        } | {"extrapolated": {"type": "boolean"}},
        "required": ["alu", "mux_demux", "datapath", "control", "registers", "total",
                     "extrapolated"],
    },
}


@functools.cache
def _validator(kind: str):
    # schema checking is the slow part of jsonschema.validate; do it once per schema
    schema = {"codebook": CODEBOOK_SCHEMA, "config": CONFIG_SCHEMA}.get(kind) or SCHEMAS[kind]
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def validate_report(kind: str, doc: dict) -> None:
    _validator(kind).validate(doc)
