from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from errors import InvalidConfigValue, ShapeMismatch
from tensor_engine import Parameter


@dataclass(frozen=True)
class OptimConfig:
    lr: float = 0.0002
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 800
    batch_size: int = 4
    init_std: float = 0.02
    train_fraction: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not self.lr > 0:
            raise InvalidConfigValue(f"learning rate must be > 0, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidConfigValue(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.eps <= 0 or self.init_std <= 0:
            raise InvalidConfigValue("eps and init_std must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise InvalidConfigValue("epochs must be >= 0 and batch_size >= 1")
        if not 0 < self.train_fraction <= 1:
            raise InvalidConfigValue(f"train_fraction must lie in (0, 1], got {self.train_fraction}")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState,
              cfg: OptimConfig) -> Tuple[np.ndarray, AdamState]:
    """Bias-corrected Adam update for one array."""
    if param.shape != grad.shape or state.m.shape != param.shape:
        raise ShapeMismatch(f"Adam shapes disagree: param {param.shape}, grad {grad.shape}, moment {state.m.shape}")
    step = state.step + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m / (1.0 - cfg.beta1 ** step)
    v_hat = v / (1.0 - cfg.beta2 ** step)
    return param - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps), AdamState(m, v, step)


@dataclass
class Adam:
    """Adam over a named parameter group; state round-trips through checkpoint blocks."""
    group: str
    params: List[Tuple[str, Parameter]]
    cfg: OptimConfig
    states: Dict[str, AdamState] = field(default_factory=dict)

    def __post_init__(self):
        for name, p in self.params:
            self.states.setdefault(name, AdamState(np.zeros_like(p.data), np.zeros_like(p.data)))

    def step(self) -> None:
        for name, p in self.params:
            if p.grad is None:
                continue
            p.data, self.states[name] = adam_step(p.data, p.grad, self.states[name], self.cfg)

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.zero_grad()

    def blocks(self) -> Dict[str, np.ndarray]:
        prefix = f"optim/{self.group}"
        out = {}
        for name, state in self.states.items():
            out[f"{prefix}/m/{name}"] = state.m
            out[f"{prefix}/v/{name}"] = state.v
            out[f"{prefix}/step/{name}"] = np.array(float(state.step))
        return out

    def load_blocks(self, blocks: Dict[str, np.ndarray]) -> None:
        prefix = f"optim/{self.group}"
        for name, _ in self.params:
            try:
                m = blocks[f"{prefix}/m/{name}"]
                v = blocks[f"{prefix}/v/{name}"]
                step = int(blocks[f"{prefix}/step/{name}"])
            except KeyError as e:
                raise ShapeMismatch(f"checkpoint has no optimiser state {e}") from e
            self.states[name] = AdamState(np.array(m), np.array(v), step)
