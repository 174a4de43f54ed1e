from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ConfigError

KINDS = ("logistic_regression", "linear_svm", "random_forest")
UINT64 = 2**64


@dataclass(frozen=True)
class ClassifierConfig:
    """Hyper-parameters for the three classifier families.

    Fields irrelevant to ``kind`` are still validated but otherwise ignored.
    """

    kind: str = "logistic_regression"
    l2_lambda: float = 1e-2
    epochs: int = 500
    learning_rate: float = 0.1
    trees: int = 100
    max_depth: int | None = None
    features_per_split: str | int = "sqrt"
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown classifier kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.l2_lambda >= 0:
            raise ConfigError("l2_lambda must be >= 0")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError("epochs must be a positive integer")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if int(self.trees) != self.trees or self.trees < 1:
            raise ConfigError("trees must be a positive integer")
        if self.max_depth is not None and (int(self.max_depth) != self.max_depth or self.max_depth < 1):
            raise ConfigError("max_depth must be a positive integer or None")
        fps = self.features_per_split
        if fps != "sqrt" and (isinstance(fps, bool) or not isinstance(fps, int) or fps < 1):
            raise ConfigError("features_per_split must be 'sqrt' or a positive integer")
        if not (0 <= int(self.rng_seed) < UINT64):
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)
