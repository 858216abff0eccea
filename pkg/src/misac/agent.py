"""Actor-critic agents: heterogeneous mixture-of-experts and baselines.

``ld-hmoe`` splits the policy into a recurrent temporal expert (camera
schedule and CPU split from the sequential AoI/queue/deficit features)
and a feedforward spatial expert (per-vehicle beam phases from the
instantaneous estimate features), trained with strictly isolated
gradients: the temporal parameters follow a clipped-ratio policy
gradient on the Lyapunov reward while the spatial parameters ascend the
beam gain toward the estimated channel and never receive the scheduling
advantage. ``ppo-mono`` is a single feedforward trunk with one joint
gradient over the whole hybrid action; ``moe-homo`` gates two identical
feedforward experts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .channel import channel
from .edge import Action
from .scenario import SimConfig

VARIANTS = ("ld-hmoe", "ppo-mono", "moe-homo")

# observation normalisation constants; recorded in every checkpoint
A_REF = 16.0     # tangential age scale, slots
D_REF = 100.0    # distance scale, m
LOGIT_CLAMP = 30.0
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class AgentObservation:
    """BS-side view: ages, backlogs, deficit, delayed estimates, last gains."""

    a_tan: np.ndarray      # K
    backlog: np.ndarray    # K, cycles
    z: float               # J
    d_hat: np.ndarray      # K
    theta_hat: np.ndarray  # K
    gain: np.ndarray       # K, realised |a^H v|^2 / M of the previous beam


@dataclass(frozen=True)
class AgentAction:
    pi: tuple              # K Bernoulli samples
    f_weights: np.ndarray  # K+1 softmax weights (vehicles + idle share)
    phases: np.ndarray     # K x M, wrapped to [-pi, pi)


@dataclass(frozen=True)
class Transition:
    obs: AgentObservation
    action: AgentAction
    reward: float
    next_obs: AgentObservation
    done: bool
    alloc_z: np.ndarray    # pre-softmax allocation sample
    phase_z: np.ndarray    # pre-wrap phase sample (K*M,), non-recurrent kinds
    logp_old: float
    value_old: float


def observe(state, gains: np.ndarray, cfg: SimConfig) -> AgentObservation:
    return AgentObservation(
        a_tan=np.array([a.a_tan for a in state.aoi], dtype=float),
        backlog=np.array([q.backlog for q in state.queues], dtype=float),
        z=float(state.z),
        d_hat=np.array([v.d_hat for v in state.vehicles]),
        theta_hat=np.array([v.theta_hat for v in state.vehicles]),
        gain=np.asarray(gains, dtype=float),
    )


def temporal_features(obs: AgentObservation, cfg: SimConfig) -> np.ndarray:
    per = np.stack([
        np.minimum(obs.a_tan / A_REF, 4.0),
        np.minimum(obs.backlog / cfg.C_k, 8.0),
        obs.d_hat / D_REF,
        np.sin(obs.theta_hat),
        np.cos(obs.theta_hat),
        obs.gain,
    ], axis=1).ravel()
    return np.concatenate([per, [min(obs.z / cfg.E_budget, 50.0)]])


def spatial_features(obs: AgentObservation, k: int) -> np.ndarray:
    return np.array([np.sin(obs.theta_hat[k]), np.cos(obs.theta_hat[k]),
                     obs.d_hat[k] / D_REF, obs.gain[k]])


def obs_dim(cfg: SimConfig) -> int:
    return 6 * cfg.K + 1


def _wrap(phases: np.ndarray) -> np.ndarray:
    return (phases + np.pi) % (2.0 * np.pi) - np.pi


def _sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-x)),
                    np.exp(x) / (1.0 + np.exp(x)))


def _softmax(x):
    e = np.exp(x - np.max(x))
    return e / e.sum()


def _gauss_logp_np(z, mu, std):
    return float(np.sum(-0.5 * ((z - mu) / std) ** 2 - np.log(std)
                        - 0.5 * _LOG2PI))


def _bernoulli_logp_np(logits, pi):
    lp = 0.0
    for l, a in zip(logits, pi):
        lp += -np.logaddexp(0.0, -l) if a else -np.logaddexp(0.0, l)
    return float(lp)


class Agent:
    """Policy container: parameters, per-group optimisers, update rules."""

    def __init__(self, kind: str, cfg: SimConfig, seed: int | None = None):
        if kind not in VARIANTS:
            raise ValueError(f"unknown agent variant {kind!r}; expected one "
                             f"of {VARIANTS}")
        self.kind = kind
        self.cfg = cfg
        rng = np.random.default_rng(cfg.rng_seed if seed is None else seed)
        D, K, M = obs_dim(cfg), cfg.K, cfg.M
        H, S = cfg.hidden_temporal, cfg.hidden_spatial
        p: dict[str, nn.Tensor] = {}
        if kind == "ld-hmoe":
            p.update(nn.lstm_params("temp.lstm", D, H, rng))
            p.update(nn.dense_params("temp.fc", H, H, rng))
            p.update(nn.dense_params("temp.pi", H, K, rng))
            p.update(nn.dense_params("temp.alloc", H, K + 1, rng))
            p["temp.alloc_logstd"] = nn.tensor(np.full(K + 1, -0.5),
                                               requires_grad=True)
            p.update(nn.dense_params("spat.l1", 4, S, rng))
            p.update(nn.dense_params("spat.l2", S, S, rng))
            p.update(nn.dense_params("spat.out", S, M, rng))
        else:
            trunks = ["mono"] if kind == "ppo-mono" else ["homo.e1", "homo.e2"]
            for t in trunks:
                p.update(nn.dense_params(f"{t}.l1", D, S, rng))
                p.update(nn.dense_params(f"{t}.l2", S, S, rng))
            if kind == "moe-homo":
                p.update(nn.dense_params("homo.gate", D, 2, rng))
            head = self._head()
            p.update(nn.dense_params(f"{head}.pi", S, K, rng))
            p.update(nn.dense_params(f"{head}.alloc", S, K + 1, rng))
            p[f"{head}.alloc_logstd"] = nn.tensor(np.full(K + 1, -0.5),
                                                  requires_grad=True)
            p.update(nn.dense_params(f"{head}.phase", S, K * M, rng))
            p[f"{head}.phase_logstd"] = nn.tensor(np.full(K * M, -0.5),
                                                  requires_grad=True)
        p.update(nn.dense_params("crit.l1", D, 128, rng))
        p.update(nn.dense_params("crit.l2", 128, 128, rng))
        p.update(nn.dense_params("crit.out", 128, 1, rng))
        # start sparse with a load-aware idle share: low activation
        # probability keeps exploration inside the energy budget, and the
        # idle bias is set so the initial per-vehicle service is about
        # 1.2 tasks per slot, which keeps the queue-divergence basin out
        # of reach while the schedule economics are being learned
        head = self._head()
        p[f"{head}.pi.b"].value[:] = -1.5
        share = cfg.F_max * cfg.tau / (1.2 * cfg.C_k) - K
        p[f"{head}.alloc.b"].value[K] = math.log(min(max(share, 0.5), 20.0))
        self.params = p
        self.adam_actor = nn.AdamState(lr=cfg.lr)
        self.adam_spatial = nn.AdamState(lr=cfg.lr)
        self.adam_critic = nn.AdamState(lr=cfg.lr)
        self.reset_memory()

    def _head(self) -> str:
        return {"ld-hmoe": "temp", "ppo-mono": "mono", "moe-homo": "homo"}[self.kind]

    # ------------------------------------------------------------- groups
    def temporal_group(self) -> dict:
        """Parameters updated by the scheduling policy gradient."""
        if self.kind == "ld-hmoe":
            return {k: v for k, v in self.params.items()
                    if k.startswith("temp.")}
        return {k: v for k, v in self.params.items()
                if not k.startswith("crit.")}

    def spatial_group(self) -> dict:
        return {k: v for k, v in self.params.items() if k.startswith("spat.")}

    def critic_group(self) -> dict:
        return {k: v for k, v in self.params.items() if k.startswith("crit.")}

    def has_recurrence(self) -> bool:
        return self.kind == "ld-hmoe"

    # ------------------------------------------------------------ forward
    def reset_memory(self) -> None:
        H = self.cfg.hidden_temporal
        self._hidden = nn.tensor(np.zeros(H))
        self._cell = nn.tensor(np.zeros(H))

    def _trunk(self, feats: nn.Tensor, hidden, cell):
        p = self.params
        if self.kind == "ld-hmoe":
            hidden, cell = nn.recurrent_step(feats, hidden, cell, p, "temp.lstm")
            h = nn.tanh(nn.dense_forward(hidden, p["temp.fc.W"], p["temp.fc.b"]))
            return h, hidden, cell
        if self.kind == "ppo-mono":
            h = nn.tanh(nn.dense_forward(feats, p["mono.l1.W"], p["mono.l1.b"]))
            h = nn.tanh(nn.dense_forward(h, p["mono.l2.W"], p["mono.l2.b"]))
            return h, hidden, cell
        hs = []
        for t in ("homo.e1", "homo.e2"):
            e = nn.tanh(nn.dense_forward(feats, p[f"{t}.l1.W"], p[f"{t}.l1.b"]))
            hs.append(nn.tanh(nn.dense_forward(e, p[f"{t}.l2.W"], p[f"{t}.l2.b"])))
        gate = nn.exp(nn.log_softmax(
            nn.dense_forward(feats, p["homo.gate.W"], p["homo.gate.b"])))
        return nn.add(nn.mul(hs[0], gate[0:1]), nn.mul(hs[1], gate[1:2])), \
            hidden, cell

    def gate_weights(self, obs: AgentObservation) -> np.ndarray:
        if self.kind != "moe-homo":
            raise ValueError("gate weights exist only for moe-homo")
        p = self.params
        x = nn.tensor(temporal_features(obs, self.cfg))
        return np.exp(nn.log_softmax(
            nn.dense_forward(x, p["homo.gate.W"], p["homo.gate.b"])).value)

    def _policy_tensors(self, feats: nn.Tensor, hidden, cell):
        """(pi logits, alloc mu, alloc logstd, phase mu or None, phase
        logstd or None, hidden, cell) as graph tensors."""
        h, hidden, cell = self._trunk(feats, hidden, cell)
        p, head = self.params, self._head()
        pi_logits = nn.dense_forward(h, p[f"{head}.pi.W"], p[f"{head}.pi.b"])
        alloc_mu = nn.dense_forward(h, p[f"{head}.alloc.W"], p[f"{head}.alloc.b"])
        phase_mu = phase_logstd = None
        if self.kind != "ld-hmoe":
            phase_mu = nn.dense_forward(h, p[f"{head}.phase.W"],
                                        p[f"{head}.phase.b"])
            phase_logstd = p[f"{head}.phase_logstd"]
        return (pi_logits, alloc_mu, p[f"{head}.alloc_logstd"],
                phase_mu, phase_logstd, hidden, cell)

    def spatial_phases(self, obs: AgentObservation, k: int) -> nn.Tensor:
        p = self.params
        x = nn.tensor(spatial_features(obs, k))
        h = nn.tanh(nn.dense_forward(x, p["spat.l1.W"], p["spat.l1.b"]))
        h = nn.tanh(nn.dense_forward(h, p["spat.l2.W"], p["spat.l2.b"]))
        return nn.dense_forward(h, p["spat.out.W"], p["spat.out.b"])

    def critic_value(self, obs: AgentObservation) -> float:
        return float(self._critic_tensor(
            temporal_features(obs, self.cfg)).value[0])

    def _critic_tensor(self, feats_value: np.ndarray) -> nn.Tensor:
        p = self.params
        h = nn.tanh(nn.dense_forward(nn.tensor(feats_value),
                                     p["crit.l1.W"], p["crit.l1.b"]))
        h = nn.tanh(nn.dense_forward(h, p["crit.l2.W"], p["crit.l2.b"]))
        return nn.dense_forward(h, p["crit.out.W"], p["crit.out.b"])

    # ---------------------------------------------------------------- act
    def act(self, obs: AgentObservation, rng: np.random.Generator,
            explore: bool = True) -> tuple[AgentAction, dict]:
        cfg = self.cfg
        feats = nn.tensor(temporal_features(obs, cfg))
        pi_logits, alloc_mu, alloc_logstd, phase_mu, phase_logstd, hid, cel = \
            self._policy_tensors(feats, self._hidden, self._cell)
        self._hidden = nn.tensor(hid.value.copy())
        self._cell = nn.tensor(cel.value.copy())
        logits = np.clip(pi_logits.value, -LOGIT_CLAMP, LOGIT_CLAMP)
        mu, std = alloc_mu.value, np.exp(alloc_logstd.value)
        if not (np.all(np.isfinite(logits)) and np.all(np.isfinite(mu))):
            norms = {k: float(np.linalg.norm(v.value))
                     for k, v in self.params.items()}
            raise FloatingPointError(
                f"non-finite policy output; parameter norms: {norms}")
        if explore:
            pi = tuple(int(rng.random() < s) for s in _sigmoid(logits))
            alloc_z = mu + std * rng.standard_normal(mu.shape)
        else:
            pi = tuple(int(l > 0) for l in logits)
            alloc_z = mu.copy()
        logp = _bernoulli_logp_np(logits, pi) + _gauss_logp_np(alloc_z, mu, std)

        if self.kind == "ld-hmoe":
            phase_z = np.concatenate([self.spatial_phases(obs, k).value
                                      for k in range(cfg.K)])
        else:
            pmu, pstd = phase_mu.value, np.exp(phase_logstd.value)
            phase_z = pmu + pstd * rng.standard_normal(pmu.shape) if explore \
                else pmu.copy()
            logp += _gauss_logp_np(phase_z, pmu, pstd)
        action = AgentAction(pi=pi, f_weights=_softmax(alloc_z),
                             phases=_wrap(phase_z.reshape(cfg.K, cfg.M)))
        cache = {"alloc_z": alloc_z, "phase_z": phase_z, "logp": logp}
        return action, cache

    def to_env_action(self, action: AgentAction) -> Action:
        cfg = self.cfg
        f = cfg.F_max * action.f_weights[:cfg.K]
        v = np.exp(1j * action.phases) / math.sqrt(cfg.M)
        return Action(pi=action.pi, f=f, v=v)

    # -------------------------------------------------------- persistence
    def save(self, path, extra_meta: dict | None = None) -> None:
        meta = {"kind": self.kind, "K": self.cfg.K, "M": self.cfg.M,
                "obs_dim": obs_dim(self.cfg), "a_ref": A_REF, "d_ref": D_REF,
                "e_budget": self.cfg.E_budget, "c_k": self.cfg.C_k,
                "hidden_temporal": self.cfg.hidden_temporal,
                "hidden_spatial": self.cfg.hidden_spatial}
        meta.update(extra_meta or {})
        nn.save_params(path, self.params, meta)

    @classmethod
    def load(cls, path, cfg: SimConfig) -> "Agent":
        values, meta = nn.load_params(path)
        if meta.get("K") != cfg.K or meta.get("M") != cfg.M:
            raise ValueError(f"checkpoint built for K={meta.get('K')}, "
                             f"M={meta.get('M')}; config has K={cfg.K}, "
                             f"M={cfg.M}")
        if meta.get("a_ref", A_REF) != A_REF:
            raise ValueError(f"checkpoint normalisation a_ref="
                             f"{meta.get('a_ref')} does not match {A_REF}")
        agent = cls(meta["kind"], cfg)
        for name, arr in values.items():
            agent.params[name].value = arr
        return agent


def make_variant(kind: str, cfg: SimConfig, seed: int | None = None) -> Agent:
    """Agent factory for the three architectures."""
    return Agent(kind, cfg, seed=seed)


# ------------------------------------------------------------------ update

def beam_gain(phases: nn.Tensor, h_hat: np.ndarray) -> nn.Tensor:
    """Normalised beam gain |h^H v|^2 / ||h||^2 for v = e^{j phases}/sqrt(M),
    differentiable in the phases; equals 1 iff perfectly matched."""
    a, b = np.real(h_hat), np.imag(h_hat)
    cosp, sinp = nn.cos(phases), nn.sin(phases)
    re = nn.sum_(nn.add(nn.mul(cosp, a), nn.mul(sinp, b)))
    im = nn.sum_(nn.sub(nn.mul(sinp, a), nn.mul(cosp, b)))
    norm = float(np.sum(a * a + b * b)) * len(h_hat.ravel())
    return nn.div(nn.add(nn.square(re), nn.square(im)), norm)


def discounted_returns(rewards: list[float], gamma: float) -> np.ndarray:
    out = np.empty(len(rewards))
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        out[i] = acc
    return out


def _replay_logp_entropy(agent: Agent, tr: Transition, feats: np.ndarray,
                         hidden, cell):
    """Recompute log-probability and entropy of a stored transition as
    graph tensors. Returns (logp, entropy, hidden, cell)."""
    pi_logits, alloc_mu, alloc_logstd, phase_mu, phase_logstd, hidden, cell = \
        agent._policy_tensors(nn.tensor(feats), hidden, cell)
    a_vec = np.array(tr.action.pi, dtype=float)
    sp_pos = nn.softplus(pi_logits)          # -log(1-p)
    sp_neg = nn.softplus(nn.mul(pi_logits, -1.0))   # -log p
    logp = nn.mul(nn.sum_(nn.add(nn.mul(sp_neg, a_vec),
                                 nn.mul(sp_pos, 1.0 - a_vec))), -1.0)
    # Bernoulli entropy p*softplus(-l) + (1-p)*softplus(l)
    s = nn.sigmoid(pi_logits)
    ent = nn.sum_(nn.add(nn.mul(s, sp_neg),
                         nn.mul(nn.sub(1.0, s), sp_pos)))

    def gauss(z_const, mu_t, logstd_t):
        std = nn.exp(logstd_t)
        diff = nn.div(nn.sub(z_const, mu_t), std)
        lp = nn.sum_(nn.sub(nn.mul(nn.square(diff), -0.5),
                            nn.add(logstd_t, 0.5 * _LOG2PI)))
        h = nn.sum_(nn.add(logstd_t, 0.5 * (_LOG2PI + 1.0)))
        return lp, h

    lp_a, h_a = gauss(tr.alloc_z, alloc_mu, alloc_logstd)
    logp = nn.add(logp, lp_a)
    ent = nn.add(ent, h_a)
    if agent.kind != "ld-hmoe":
        lp_p, h_p = gauss(tr.phase_z, phase_mu, phase_logstd)
        logp = nn.add(logp, lp_p)
        ent = nn.add(ent, h_p)
    return logp, ent, hidden, cell


def decoupled_update(agent: Agent, transitions: list[Transition],
                     spatial_stride: int = 4,
                     update_temporal: bool = True,
                     update_critic: bool = True,
                     update_spatial: bool = True) -> dict:
    """One optimisation pass over an on-policy rollout.

    Scheduling gradient: clipped-ratio policy gradient with a critic
    baseline, applied to the temporal/actor group. Critic: squared error
    to the discounted reward-to-go. Spatial refinement (ld-hmoe): ascent
    on the beam gain toward the channel built from the stored estimates.
    No gradient crosses between the groups; the ``update_*`` switches run
    any subset of the three flows in isolation.
    """
    if not transitions:
        raise ValueError("empty transition batch")
    cfg = agent.cfg
    rewards = [tr.reward for tr in transitions]
    if not np.all(np.isfinite(rewards)):
        raise FloatingPointError("non-finite reward in batch; update aborted")
    returns = discounted_returns(rewards, cfg.discount)
    values = np.array([tr.value_old for tr in transitions])
    adv = returns - values
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    feats = [temporal_features(tr.obs, cfg) for tr in transitions]

    report = {"actor_loss": [], "critic_loss": [], "spatial_gain": []}
    lo, hi = 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio
    for _ in range(cfg.ppo_epochs):
        # --- scheduling / joint actor pass
        if update_temporal:
            nn.zero_grad(agent.params)
            hidden = nn.tensor(np.zeros(cfg.hidden_temporal))
            cell = nn.tensor(np.zeros(cfg.hidden_temporal))
            losses = []
            for t, tr in enumerate(transitions):
                logp, ent, hidden, cell = _replay_logp_entropy(
                    agent, tr, feats[t], hidden, cell)
                ratio = nn.exp(nn.sub(logp, tr.logp_old))
                clipped = nn.minimum(nn.maximum(ratio, lo), hi)
                gain = nn.minimum(nn.mul(ratio, adv[t]),
                                  nn.mul(clipped, adv[t]))
                losses.append(nn.sub(nn.mul(ent, -cfg.entropy_coef), gain))
                if agent.has_recurrence() and (t + 1) % cfg.bptt_window == 0:
                    hidden, cell = hidden.detach(), cell.detach()
            actor_loss = nn.mean(nn.concat(losses))
            actor_loss.backward()
            nn.adam_step(agent.temporal_group(), agent.adam_actor)
            report["actor_loss"].append(float(actor_loss.value))

        # --- critic pass
        if update_critic:
            nn.zero_grad(agent.params)
            errs = []
            for t in range(len(transitions)):
                v = agent._critic_tensor(feats[t])
                errs.append(nn.square(nn.sub(v, returns[t])))
            critic_loss = nn.mul(nn.mean(nn.concat(errs)), 0.5)
            critic_loss.backward()
            nn.adam_step(agent.critic_group(), agent.adam_critic)
            report["critic_loss"].append(float(critic_loss.value))

        # --- spatial refinement pass (isolated)
        if update_spatial and agent.kind == "ld-hmoe" \
                and cfg.spatial_weight != 0.0:
            nn.zero_grad(agent.params)
            gains = []
            for t in range(0, len(transitions), spatial_stride):
                tr = transitions[t]
                for k in range(cfg.K):
                    h_hat = channel(max(tr.obs.d_hat[k], cfg.d_min),
                                    tr.obs.theta_hat[k], cfg).entries
                    phases = agent.spatial_phases(tr.obs, k)
                    gains.append(beam_gain(phases, h_hat))
            spat_loss = nn.mul(nn.mean(nn.concat(gains)), -cfg.spatial_weight)
            spat_loss.backward()
            nn.adam_step(agent.spatial_group(), agent.adam_spatial)
            report["spatial_gain"].append(-float(spat_loss.value)
                                          / cfg.spatial_weight)
    return {k: (v if v else None) for k, v in report.items()}


# ------------------------------------------------------------------- train

def train(agent: Agent, env, episodes: int, slots: int,
          rng: np.random.Generator, log_path=None,
          progress=None) -> list[dict]:
    """Run the training loop: roll an episode, store transitions, compute
    Lyapunov rewards through the environment, then apply the decoupled
    update per episode. Returns per-episode learning curves; on a
    non-finite reward the loop halts and returns the curves so far.

    The parameters kept at the end are the snapshot with the best
    trailing-window mean reward, so a late policy-gradient excursion
    cannot wipe out a converged policy.
    """
    curves = []
    writer = fh = None
    best_score, best_values = -math.inf, None
    window = 5
    if log_path is not None:
        fh = open(log_path, "w", newline="")
        writer = csv.writer(fh)
        writer.writerow(["episode", "mean_reward", "mean_pcrb",
                         "mean_energy", "mean_queue"])
    try:
        for ep in range(episodes):
            state = env.reset()
            agent.reset_memory()
            transitions = []
            stats = {"pcrb": 0.0, "energy": 0.0, "queue": 0.0}
            diverged = False
            for t in range(slots):
                obs = observe(state, env.gains, agent.cfg)
                action, cache = agent.act(obs, rng, explore=True)
                value = agent.critic_value(obs)
                env_action = agent.to_env_action(action)
                state, r, info = env.step(env_action)
                if not math.isfinite(r):
                    diverged = True
                    break
                next_obs = observe(state, env.gains, agent.cfg)
                transitions.append(Transition(
                    obs=obs, action=action, reward=r, next_obs=next_obs,
                    done=(t == slots - 1), alloc_z=cache["alloc_z"],
                    phase_z=cache["phase_z"], logp_old=cache["logp"],
                    value_old=value))
                stats["pcrb"] += float(np.mean(info["pcrb"]))
                stats["energy"] += info["e_total"]
                stats["queue"] += float(np.mean(info["backlog"]))
            if diverged:
                break
            decoupled_update(agent, transitions)
            n = max(1, len(transitions))
            row = {"episode": ep,
                   "mean_reward": float(np.mean([tr.reward
                                                 for tr in transitions])),
                   "mean_pcrb": stats["pcrb"] / n,
                   "mean_energy": stats["energy"] / n,
                   "mean_queue": stats["queue"] / n}
            curves.append(row)
            if len(curves) >= window:
                score = float(np.mean([c["mean_reward"]
                                       for c in curves[-window:]]))
                if score > best_score:
                    best_score = score
                    best_values = {k: v.value.copy()
                                   for k, v in agent.params.items()}
            if writer is not None:
                writer.writerow([row["episode"], repr(row["mean_reward"]),
                                 repr(row["mean_pcrb"]), repr(row["mean_energy"]),
                                 repr(row["mean_queue"])])
                fh.flush()
            if progress is not None:
                progress(row)
    finally:
        if fh is not None:
            fh.close()
    if best_values is not None:
        for name, value in best_values.items():
            agent.params[name].value = value
    return curves
