"""Run configuration shared by the CLI and the service: one record describing
dataset, category, loop constants, strategy, oracle, and model knobs."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .core import DataError, LoopConfig, Pool, load_pool
from .models import (
    LexiconScorer,
    PromptTemplate,
    TrainConfig,
    ZeroShotLexicon,
    load_lexicon,
)
from .oracles import HumanOracle, HumanQueue, NoisyOracle, Oracle, RemoteOracle, ScriptedOracle
from .synth import default_lexicon


@dataclass
class RunSpec:
    dataset: str
    category: str = "coffee"
    lexicon: Optional[str] = None  # path; None = generator-matched default
    k: int = 16
    max_iterations: int = 9
    n_eval: int = 200
    seed: int = 0
    strategy_id: str = "uncertainty"
    oracle: str = "scripted"  # scripted | noisy:RHO | remote:URL | human
    threshold: float = 0.5
    epochs: int = 30
    lr: float = 0.05
    batch_size: int = 16
    feature_dim: int = 2**18
    warm_start: bool = False

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "category": self.category,
            "lexicon": self.lexicon,
            "k": self.k,
            "max_iterations": self.max_iterations,
            "n_eval": self.n_eval,
            "seed": self.seed,
            "strategy_id": self.strategy_id,
            "oracle": self.oracle,
            "threshold": self.threshold,
            "epochs": self.epochs,
            "lr": self.lr,
            "batch_size": self.batch_size,
            "feature_dim": self.feature_dim,
            "warm_start": self.warm_start,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown run config fields: {sorted(unknown)}")
        if "dataset" not in d:
            raise DataError("run config needs a dataset path")
        return cls(**d)

    @classmethod
    def load(cls, path: str) -> "RunSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    # -- factories -------------------------------------------------------------

    def loop_config(self) -> LoopConfig:
        return LoopConfig(
            k=self.k,
            max_iterations=self.max_iterations,
            n_eval=self.n_eval,
            seed=self.seed,
            strategy_id=self.strategy_id,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            feature_dim=self.feature_dim,
            warm_start=self.warm_start,
        )

    def load_pool(self) -> Pool:
        if not os.path.exists(self.dataset):
            raise DataError(f"dataset file not found: {self.dataset}")
        return load_pool(self.dataset)

    def scorer(self) -> LexiconScorer:
        if self.lexicon:
            return LexiconScorer(load_lexicon(self.lexicon))
        return LexiconScorer(default_lexicon(self.category))

    def template(self) -> PromptTemplate:
        return PromptTemplate(category=self.category)

    def build_oracle(self, queue: Optional[HumanQueue] = None) -> Oracle:
        return build_oracle(self.oracle, self.seed, self.template(), queue)


def build_oracle(
    spec: str,
    seed: int,
    template: Optional[PromptTemplate] = None,
    queue: Optional[HumanQueue] = None,
) -> Oracle:
    """Parse an oracle spec string: scripted | noisy:RHO | remote:URL | human."""
    if spec == "scripted":
        return ScriptedOracle()
    if spec == "human":
        return HumanOracle(queue=queue)
    if spec.startswith("noisy:"):
        try:
            rho = float(spec.split(":", 1)[1])
        except ValueError:
            raise DataError(f"bad noisy oracle spec {spec!r}; expected noisy:RHO") from None
        return NoisyOracle(rho, seed)
    if spec.startswith("remote:"):
        url = spec.split(":", 1)[1]
        if not url:
            raise DataError("remote oracle spec needs a URL: remote:http://...")
        return RemoteOracle(url, template or PromptTemplate())
    raise DataError(
        f"unknown oracle spec {spec!r}; expected scripted, noisy:RHO, remote:URL or human"
    )
