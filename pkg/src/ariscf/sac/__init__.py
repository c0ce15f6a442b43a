"""Soft actor-critic phase optimizer."""

from .agent import (
    SacAgent,
    SacConfig,
    TrainResult,
    TrainingDiverged,
    gaussian_tanh_log_prob,
    load_checkpoint,
    polyak_update,
    save_checkpoint,
    train,
)
from .buffer import ReplayBuffer
from .env import RisEnv, action_to_phases
from .nets import AdamOptimizer, DenseNet, SgdOptimizer
