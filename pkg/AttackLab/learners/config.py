from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

BaseAlgo = Literal['tabular-VI', 'tabular-Q', 'VDN', 'QMIX']


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    episodes: int = Field(default=30000, ge=0)
    eps_start: float = Field(default=1.0, ge=0.0, le=1.0)
    eps_end: float = Field(default=0.05, ge=0.0, le=1.0)
    # None anneals over the first 20% of episodes
    eps_anneal_episodes: int | None = Field(default=None, ge=1)
    # None: 1.0 for tabular learners, 5e-4 for Adam on networks
    learning_rate: float | None = Field(default=None, gt=0.0)
    lr_schedule: Literal['visit', 'constant'] = 'constant'
    batch_size: int = Field(default=32, ge=1)
    buffer_capacity: int = Field(default=5000, ge=1)
    updates_per_episode: int = Field(default=1, ge=1)
    target_update_period: int = Field(default=200, ge=1)
    discount: float | None = Field(default=None, ge=0.0, le=1.0)
    hidden: list[int] = Field(default_factory=lambda: [64], min_length=1)
    mixer_embed: int = Field(default=16, ge=1)
    hypernet_hidden: int = Field(default=32, ge=1)
    grad_clip: float | None = Field(default=10.0, gt=0.0)
    seed: int = 0
    log_every: int = Field(default=1000, ge=1)
    progress: bool = False

    @field_validator('hidden', mode='before')
    @classmethod
    def listify(cls, value):
        return [value] if isinstance(value, int) else value

    def step_size(self, mode: Literal['tabular', 'network']) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 1.0 if mode == 'tabular' else 5e-4

    def epsilon(self, episode: int) -> float:
        anneal = self.eps_anneal_episodes or max(1, int(0.2 * self.episodes))
        fraction = min(1.0, episode / anneal)
        return self.eps_start + fraction * (self.eps_end - self.eps_start)
