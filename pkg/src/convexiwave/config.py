"""JSON-backed run configuration with the production defaults baked in."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .convexify import ConvexParams
from .solver import DescentConfig, QRConfig


@dataclass
class GridConfig:
    a: float = 5.0
    T: float = 6.0
    nx: int = 3000
    nt: int = 300

    def __post_init__(self):
        if self.a <= 0 or self.T <= 0 or self.nx < 2 or self.nt < 2:
            raise ValueError("grid parameters out of range")


@dataclass
class SourceConfig:
    k: float = 30.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("source k must be positive")


@dataclass
class CorrectionConfig:
    x_hi: float = 0.0067
    t_hi: float = 0.26

    def __post_init__(self):
        if self.x_hi < 0 or self.t_hi < 0:
            raise ValueError("correction box bounds must be nonnegative")


@dataclass
class NoiseConfig:
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


@dataclass
class ForwardConfig:
    medium: list = field(default_factory=list)
    grid: GridConfig = field(default_factory=GridConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    correction: CorrectionConfig = field(default_factory=CorrectionConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)


@dataclass
class InversionConfig:
    eps: float = 0.0
    M: float = 3.0
    T: float = 6.0
    nx: int = 60
    nt: int = 60
    c_upper: float = 15.0
    diff_reg: float = 1e-6
    freeze_time_derivative: bool = True

    def __post_init__(self):
        if not (0 <= self.eps < self.M):
            raise ValueError("need 0 <= eps < M")
        if self.T <= 0 or self.nx < 2 or self.nt < 2:
            raise ValueError("inversion grid parameters out of range")
        if self.c_upper <= 1.0:
            raise ValueError("c_upper must exceed the background value 1")
        if self.diff_reg <= 0:
            raise ValueError("diff_reg must be positive")


@dataclass
class PreprocessConfig:
    half_width_steps: int = 10
    diff_reg: float = 1e-6

    def __post_init__(self):
        if self.half_width_steps < 0 or self.diff_reg <= 0:
            raise ValueError("preprocess parameters out of range")


@dataclass
class RunConfig:
    forward: ForwardConfig = field(default_factory=ForwardConfig)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    convex: ConvexParams = field(default_factory=ConvexParams)
    descent: DescentConfig = field(default_factory=DescentConfig)
    qr: QRConfig = field(default_factory=QRConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        def build(klass, sub):
            return klass(**sub) if sub is not None else klass()

        fwd = data.get("forward", {}) or {}
        forward = ForwardConfig(
            medium=list(fwd.get("medium", [])),
            grid=build(GridConfig, fwd.get("grid")),
            source=build(SourceConfig, fwd.get("source")),
            correction=build(CorrectionConfig, fwd.get("correction")),
            noise=build(NoiseConfig, fwd.get("noise")),
        )
        return cls(
            forward=forward,
            inversion=build(InversionConfig, data.get("inversion")),
            convex=build(ConvexParams, data.get("convex")),
            descent=build(DescentConfig, data.get("descent")),
            qr=build(QRConfig, data.get("qr")),
            preprocess=build(PreprocessConfig, data.get("preprocess")),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def load_config(path: str) -> RunConfig:
    with open(path) as f:
        return RunConfig.from_json(f.read())


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as f:
        f.write(cfg.to_json() + "\n")
