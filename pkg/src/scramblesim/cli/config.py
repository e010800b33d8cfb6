"""Experiment configuration: YAML text validated against a strict schema."""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

KINDS = ("otoc", "decode", "state-decode", "grover", "sweep-depolarize", "sweep-coherent",
         "ensemble", "clifford-test", "finite-temp")
NAMED_CIRCUITS = ("qubit_clifford_scrambler", "qutrit_scrambler", "swap", "classical_scrambler",
                  "identity")


class ConfigError(ValueError):
    """Raised for unreadable or schema-invalid configuration."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CircuitSpec(_Strict):
    """Either a named circuit, an explicit gate list, or a random sample."""

    name: Optional[str] = None
    dims: Optional[list[int]] = None
    gates: Optional[list[list]] = None
    random: Optional[Literal["haar", "clifford"]] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _one_source(self):
        sources = [self.name is not None, self.gates is not None, self.random is not None]
        if sum(sources) != 1:
            raise ValueError("circuit needs exactly one of: name, gates, random")
        if self.name is not None and self.name not in NAMED_CIRCUITS:
            raise ValueError(f"unknown circuit {self.name!r}; known: {', '.join(NAMED_CIRCUITS)}")
        if (self.gates is not None or self.random is not None) and not self.dims:
            raise ValueError("dims are required for gate lists and random circuits")
        if self.dims is not None and any(d < 2 for d in self.dims):
            raise ValueError("every dim must be >= 2")
        if self.random == "clifford" and any(d != 2 for d in self.dims):
            raise ValueError("random Clifford circuits are sampled on qubits only")
        return self


class RegionSpec(_Strict):
    A: list[int] = Field(default_factory=lambda: [0])
    D: Optional[list[int]] = None
    pair: Optional[list[int]] = None

    @model_validator(mode="after")
    def _d_or_pair(self):
        if self.D is not None and self.pair is not None:
            raise ValueError("give either D or a wire pair, not both")
        if self.pair is not None and len(self.pair) != 2:
            raise ValueError("a wire pair has two entries")
        return self


class StateDecodeSpec(_Strict):
    states: Literal["mub", "computational", "computational-classical"] = "mub"


class GroverSpec(_Strict):
    m: list[int] = Field(default_factory=lambda: [0, 1])

    @model_validator(mode="after")
    def _nonnegative(self):
        if any(m < 0 for m in self.m):
            raise ValueError("iteration counts must be >= 0")
        return self


class DepolarizeSpec(_Strict):
    p: list[float]

    @model_validator(mode="after")
    def _range(self):
        if any(not 0.0 <= p <= 1.0 for p in self.p):
            raise ValueError("depolarizing strengths must lie in [0, 1]")
        return self


class CoherentSpec(_Strict):
    """Errors ``exp(-i eps H)`` with ``H`` a random Hermitian of unit spectral norm."""

    epsilon: list[float]
    generator_seed: int = 0


class EnsembleSpec(_Strict):
    family: Literal["haar", "clifford"] = "haar"
    samples: int = Field(200, ge=1)
    dims: list[int] = Field(default_factory=lambda: [2, 2, 2, 2])


class FiniteTempSpec(_Strict):
    samples: int = Field(20, ge=1)
    dims: list[int] = Field(default_factory=lambda: [2, 2])
    unitary: Literal["factorizing", "haar"] = "factorizing"


class OutputSpec(_Strict):
    path: Optional[str] = None
    format: Literal["ndjson", "csv"] = "ndjson"


class ExperimentConfig(_Strict):
    kind: Literal[KINDS]
    circuit: Optional[CircuitSpec] = None
    regions: RegionSpec = Field(default_factory=RegionSpec)
    state_decode: Optional[StateDecodeSpec] = None
    grover: Optional[GroverSpec] = None
    depolarize: Optional[DepolarizeSpec] = None
    coherent: Optional[CoherentSpec] = None
    ensemble: Optional[EnsembleSpec] = None
    finite_temp: Optional[FiniteTempSpec] = None
    seed: int = 0
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _sections(self):
        needs_circuit = self.kind not in ("ensemble", "finite-temp")
        if needs_circuit and self.circuit is None:
            raise ValueError(f"kind {self.kind!r} needs a circuit section")
        required = {"sweep-depolarize": "depolarize", "sweep-coherent": "coherent"}
        section = required.get(self.kind)
        if section and getattr(self, section) is None:
            raise ValueError(f"kind {self.kind!r} needs a {section} section")
        return self


def load_config(path: str | Path, kind: str | None = None) -> tuple[ExperimentConfig, str]:
    """Parse and validate a config file; returns the model and the sha256 of its bytes.

    ``kind`` (from the subcommand) fills a missing ``kind`` key and must agree
    with a present one.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(raw) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    if kind is not None:
        if data.setdefault("kind", kind) != kind:
            raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {kind!r}")
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, hashlib.sha256(raw).hexdigest()
