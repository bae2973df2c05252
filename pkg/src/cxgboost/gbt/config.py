from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class TrainConfig:
    """Boosting hyperparameters.

    Defaults follow the usual XGBoost defaults except ``max_depth=5``.
    ``learning_rate=0`` is accepted so that a zero-step fit can be expressed.
    """

    n_estimators: int = 100
    max_depth: int = 5
    reg_lambda: float = 1.0
    learning_rate: float = 0.3
    max_bins: int = 256
    min_child_weight: float = 1.0
    base_score: float = 0.5
    min_split_gain: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n_estimators) < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if int(self.max_depth) < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 2 <= int(self.max_bins) <= 65535:
            raise ValueError(f"max_bins must lie in [2, 65535], got {self.max_bins}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must lie in [0, 1], got {self.learning_rate}")
        if self.reg_lambda < 0 or self.min_child_weight < 0 or self.min_split_gain < 0:
            raise ValueError("reg_lambda, min_child_weight and min_split_gain must be >= 0")
        if int(self.seed) < 0:
            raise ValueError("seed must be unsigned")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown TrainConfig fields: {sorted(unknown)}")
        return cls(**d)
