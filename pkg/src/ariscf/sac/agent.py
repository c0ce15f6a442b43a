"""Soft actor-critic over RIS phase vectors: twin Q, target value net, manual gradients."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .buffer import ReplayBuffer
from .env import RisEnv
from .nets import DenseNet, make_optimizer

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_LOG_2PI = float(np.log(2.0 * np.pi))


class TrainingDiverged(RuntimeError):
    """Raised when any loss goes non-finite; carries a diagnostic snapshot."""

    def __init__(self, message: str, snapshot: dict):
        super().__init__(message)
        self.snapshot = snapshot


@dataclass(frozen=True)
class SacConfig:
    """Training hyperparameters (reference-table defaults)."""

    lr: float = 1e-3
    discount: float = 0.99
    polyak: float = 0.005
    entropy_coeff: float = 0.2
    batch: int = 64
    buffer_capacity: int = 32_000
    hidden_units: int = 64
    exploration_noise: float = 0.1
    episode_len: int = 400
    episodes: int = 2000
    optimizer: str = "sgd"  # "adam" available as the adaptive-moment variant

    def __post_init__(self):
        if not (0 < self.polyak <= 1 and 0 < self.discount <= 1):
            raise ValueError("polyak and discount must lie in (0, 1]")
        for name in ("lr", "entropy_coeff", "batch", "buffer_capacity", "hidden_units",
                     "exploration_noise", "episode_len", "episodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def gaussian_tanh_log_prob(u: np.ndarray, mean: np.ndarray, std_eff: np.ndarray) -> np.ndarray:
    """log-density of tanh(u) with u ~ N(mean, std_eff^2), summed over dims.

    Includes the tanh change-of-variables term: the squashed density is the
    Gaussian one divided by prod(1 - tanh(u)^2), so log(1 - tanh(u)^2) is
    subtracted per dimension (written via softplus for stability).
    """
    z = (u - mean) / std_eff
    gauss = -0.5 * z * z - np.log(std_eff) - 0.5 * _LOG_2PI
    # log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u))
    correction = 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))
    return np.sum(gauss - correction, axis=-1)


class SacAgent:
    """Value net, twin Q nets, target value net, and a squashed-Gaussian policy.

    The entropy temperature is folded into the reward (rewards are scaled by
    1/entropy_coeff before storage), so all losses carry a unit entropy
    weight. Exploration noise is the standard deviation of the
    reparameterization variable epsilon.
    """

    def __init__(self, obs_dim: int, act_dim: int, config: SacConfig, seed: int):
        self.config = config
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        keys = np.random.SeedSequence((int(seed), 101)).spawn(4)
        hidden = config.hidden_units
        self.policy = DenseNet(obs_dim, 2 * act_dim, hidden, np.random.default_rng(keys[0]))
        self.q1 = DenseNet(obs_dim + act_dim, 1, hidden, np.random.default_rng(keys[1]))
        self.q2 = DenseNet(obs_dim + act_dim, 1, hidden, np.random.default_rng(keys[2]))
        self.value = DenseNet(obs_dim, 1, hidden, np.random.default_rng(keys[3]))
        self.value_target = self.value.clone()
        self.opt_policy = make_optimizer(self.policy, config.optimizer, config.lr)
        self.opt_q1 = make_optimizer(self.q1, config.optimizer, config.lr)
        self.opt_q2 = make_optimizer(self.q2, config.optimizer, config.lr)
        self.opt_value = make_optimizer(self.value, config.optimizer, config.lr)

    # ---------------- policy ----------------

    def policy_stats(self, obs: np.ndarray):
        out, cache = self.policy.forward(obs)
        mean, log_std_raw = out[:, :self.act_dim], out[:, self.act_dim:]
        log_std = np.clip(log_std_raw, LOG_STD_MIN, LOG_STD_MAX)
        return mean, log_std, log_std_raw, cache

    def policy_sample(self, obs: np.ndarray, eps_hat: np.ndarray):
        """Reparameterized squashed action for standard-normal draws eps_hat.

        epsilon = exploration_noise * eps_hat, u = mean + exp(log_std) * epsilon,
        action = tanh(u). Returns (action, log_prob, internals).
        """
        mean, log_std, log_std_raw, cache = self.policy_stats(obs)
        std_eff = np.exp(log_std) * self.config.exploration_noise
        u = mean + std_eff * eps_hat
        action = np.tanh(u)
        log_prob = gaussian_tanh_log_prob(u, mean, std_eff)
        internals = {"mean": mean, "log_std": log_std, "log_std_raw": log_std_raw,
                     "std_eff": std_eff, "u": u, "cache": cache}
        return action, log_prob, internals

    def act(self, obs: np.ndarray, rng: np.random.Generator, deterministic: bool = False) -> np.ndarray:
        mean, log_std, _, _ = self.policy_stats(obs[None])
        if deterministic:
            return np.tanh(mean[0])
        std_eff = np.exp(log_std) * self.config.exploration_noise
        u = mean + std_eff * rng.standard_normal(mean.shape)
        return np.tanh(u[0])

    # ---------------- critics ----------------

    def q_values(self, obs: np.ndarray, act: np.ndarray):
        x = np.concatenate([obs, act], axis=1)
        q1, c1 = self.q1.forward(x)
        q2, c2 = self.q2.forward(x)
        return q1[:, 0], q2[:, 0], c1, c2

    def min_q_and_action_grad(self, obs: np.ndarray, act: np.ndarray):
        """min(Q1, Q2) per sample and its gradient w.r.t. the action input."""
        q1, q2, c1, c2 = self.q_values(obs, act)
        ones = np.ones((obs.shape[0], 1))
        _, gx1 = self.q1.backward(c1, ones)
        _, gx2 = self.q2.backward(c2, ones)
        take1 = (q1 <= q2)[:, None]
        grad_act = np.where(take1, gx1[:, self.obs_dim:], gx2[:, self.obs_dim:])
        return np.minimum(q1, q2), grad_act

    # ---------------- losses and updates ----------------

    def value_loss_and_grads(self, obs: np.ndarray, eps_hat: np.ndarray):
        """L = 1/2 mean (V(s) - [minQ(s, a~) - log pi(a~|s)])^2 with a~ resampled."""
        action, log_prob, _ = self.policy_sample(obs, eps_hat)
        q_min, _ = self.min_q_and_action_grad(obs, action)
        target = q_min - log_prob
        v, cache = self.value.forward(obs)
        delta = v[:, 0] - target
        loss = 0.5 * float(np.mean(delta ** 2))
        grads, _ = self.value.backward(cache, (delta / delta.size)[:, None])
        return loss, grads

    def q_loss_and_grads(self, obs, act, rew, next_obs):
        """Both critics regress on the shared target r + discount * V_target(s')."""
        target = rew + self.config.discount * self.value_target(next_obs)[:, 0]
        x = np.concatenate([obs, act], axis=1)
        out = []
        for net in (self.q1, self.q2):
            q, cache = net.forward(x)
            delta = q[:, 0] - target
            loss = 0.5 * float(np.mean(delta ** 2))
            grads, _ = net.backward(cache, (delta / delta.size)[:, None])
            out.append((loss, grads))
        return out

    def policy_loss_and_grads(self, obs: np.ndarray, eps_hat: np.ndarray):
        """L = mean(log pi(a~|s) - minQ(s, a~)), gradients through both paths.

        Head gradients (t = tanh(u), all per sample and dimension):
          d log pi / d mean    = 2 t
          d log pi / d log_std = -1 + 2 t (u - mean)
          d (-Q) / d mean      = -(dQ/da) (1 - t^2)
          d (-Q) / d log_std   = -(dQ/da) (1 - t^2) (u - mean)
        with the log_std rows masked wherever the clamp is active.
        """
        action, log_prob, it = self.policy_sample(obs, eps_hat)
        q_min, q_act_grad = self.min_q_and_action_grad(obs, action)
        loss = float(np.mean(log_prob - q_min))

        B = obs.shape[0]
        t = action
        u_centered = it["u"] - it["mean"]
        flow = 2.0 * t - q_act_grad * (1.0 - t * t)
        g_mean = flow / B
        active = (it["log_std_raw"] > LOG_STD_MIN) & (it["log_std_raw"] < LOG_STD_MAX)
        g_log_std = (-1.0 + flow * u_centered) / B * active
        grad_out = np.concatenate([g_mean, g_log_std], axis=1)
        grads, _ = self.policy.backward(it["cache"], grad_out)
        return loss, grads

    def update(self, batch, rng: np.random.Generator) -> dict:
        """One gradient step on V, both Q nets, and the policy, plus a Polyak update."""
        obs, act, rew, next_obs = batch
        eps_v = rng.standard_normal((obs.shape[0], self.act_dim))
        eps_p = rng.standard_normal((obs.shape[0], self.act_dim))

        v_loss, v_grads = self.value_loss_and_grads(obs, eps_v)
        (q1_loss, q1_grads), (q2_loss, q2_grads) = self.q_loss_and_grads(obs, act, rew, next_obs)
        p_loss, p_grads = self.policy_loss_and_grads(obs, eps_p)

        losses = {"value": v_loss, "q1": q1_loss, "q2": q2_loss, "policy": p_loss}
        if not all(np.isfinite(list(losses.values()))):
            raise TrainingDiverged(f"non-finite loss: {losses}",
                                   snapshot={"losses": losses,
                                             "policy": self.policy.get_flat(),
                                             "value": self.value.get_flat(),
                                             "q1": self.q1.get_flat(),
                                             "q2": self.q2.get_flat()})
        self.opt_value.step(v_grads)
        self.opt_q1.step(q1_grads)
        self.opt_q2.step(q2_grads)
        self.opt_policy.step(p_grads)
        self.polyak_update()
        return losses

    def polyak_update(self) -> None:
        polyak_update(self.value_target, self.value, self.config.polyak)


def polyak_update(target: DenseNet, online: DenseNet, tau_bar: float) -> None:
    """target <- tau_bar * online + (1 - tau_bar) * target, elementwise."""
    for pt, po in zip(target.weights + target.biases, online.weights + online.biases):
        pt *= 1.0 - tau_bar
        pt += tau_bar * po


# ---------------- training loop ----------------

@dataclass
class TrainResult:
    episode_rewards: list            # cumulative (sum over steps) reward per episode
    best_phases: np.ndarray
    best_sum_se: float
    agent: SacAgent
    baseline_equal_se: float
    config: SacConfig
    master_seed: int


def train(env: RisEnv, config: SacConfig, master_seed: int) -> TrainResult:
    """Run the training loop on a fixed realization.

    Per environment step: act, store the transition, then (once the buffer
    can fill a batch) one gradient step on every network followed by the
    target update. Rewards are stored scaled by 1/entropy_coeff; the
    learning curve and the best-phases tracking use the raw sum SE.
    Deterministic in master_seed.
    """
    root = np.random.SeedSequence(int(master_seed))
    key_env, key_act, key_batch, key_update = root.spawn(4)
    rng_env = np.random.default_rng(key_env)
    rng_act = np.random.default_rng(key_act)
    rng_batch = np.random.default_rng(key_batch)
    rng_update = np.random.default_rng(key_update)

    agent = SacAgent(env.obs_dim, env.act_dim, config, master_seed)
    buffer = ReplayBuffer(config.buffer_capacity, env.obs_dim, env.act_dim)
    inv_temp = 1.0 / config.entropy_coeff

    baseline_equal = env.sum_se_of(np.zeros(env.act_dim))
    best_se = -np.inf
    best_phases = np.zeros(env.act_dim)
    curve = []

    for _ in range(config.episodes):
        obs = env.reset(rng_env)
        if env.sum_se_of(env.phases) > best_se:
            best_se = env.sum_se_of(env.phases)
            best_phases = env.phases.copy()
        total = 0.0
        for _ in range(config.episode_len):
            action = agent.act(obs, rng_act)
            next_obs, reward = env.step(action)
            total += reward
            if reward > best_se:
                best_se = reward
                best_phases = env.phases.copy()
            buffer.add(obs, action, reward * inv_temp, next_obs)
            obs = next_obs
            if len(buffer) >= config.batch:
                agent.update(buffer.sample(config.batch, rng_batch), rng_update)
        curve.append(total)
    return TrainResult(episode_rewards=curve, best_phases=best_phases, best_sum_se=float(best_se),
                       agent=agent, baseline_equal_se=float(baseline_equal),
                       config=config, master_seed=int(master_seed))


# ---------------- checkpointing ----------------

CHECKPOINT_VERSION = 1


def save_checkpoint(path: str, result: TrainResult) -> None:
    """Versioned npz dump: config JSON, all network weights, best phases.

    Layout: `version`, `config_json`, `obs_dim`, `act_dim`, `best_phases`,
    `best_sum_se`, `master_seed`, and per-net arrays `<net>_w<i>` / `<net>_b<i>`
    for net in (policy, q1, q2, value, value_target), i in 0..2.
    """
    agent = result.agent
    arrays = {
        "version": np.array(CHECKPOINT_VERSION),
        "config_json": np.array(json.dumps(asdict(result.config))),
        "obs_dim": np.array(agent.obs_dim),
        "act_dim": np.array(agent.act_dim),
        "best_phases": result.best_phases,
        "best_sum_se": np.array(result.best_sum_se),
        "master_seed": np.array(result.master_seed),
    }
    for name, net in (("policy", agent.policy), ("q1", agent.q1), ("q2", agent.q2),
                      ("value", agent.value), ("value_target", agent.value_target)):
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays[f"{name}_w{i}"] = w
            arrays[f"{name}_b{i}"] = b
    np.savez(path, **arrays)


def load_checkpoint(path: str) -> dict:
    """Load a checkpoint; returns config, best phases, and the raw weight arrays."""
    data = np.load(path, allow_pickle=False)
    version = int(data["version"])
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    out = {
        "config": SacConfig(**json.loads(str(data["config_json"]))),
        "obs_dim": int(data["obs_dim"]),
        "act_dim": int(data["act_dim"]),
        "best_phases": np.asarray(data["best_phases"]),
        "best_sum_se": float(data["best_sum_se"]),
        "master_seed": int(data["master_seed"]),
        "weights": {key: np.asarray(data[key]) for key in data.files
                    if key.endswith(tuple(f"_{p}{i}" for p in "wb" for i in range(3)))},
    }
    return out
