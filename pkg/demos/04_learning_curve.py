"""
Watching the agent learn
========================

A short training run at desk scale: 8x8 antennas, two users, ten steps per
episode. A few minutes of CPU is enough to see the reward separate from the
random baseline. For full runs use the command line instead:

    isacsim train --desk-scale --seed 0 --out runs/demo
"""

import numpy as np

from isacsim.agent import DdpgAgent, DdpgConfig, train
from isacsim.baselines import random_policy
from isacsim.cli import evaluate
from isacsim.config import DESK_DDPG, default_scenario
from isacsim.env import IsacEnv, mrt_warm_start

EPISODES = 150
SEED = 0

scen = default_scenario(n_tx=8, n_rx=8, n_users=2, n_clusters=3,
                        seed=1000 + SEED, episodes=500)
env = IsacEnv(scen, rho=0.2, steps_per_episode=10)

kw = {k: v for k, v in DESK_DDPG.items() if k not in ("episodes", "steps_per_episode")}
agent = DdpgAgent(env.state_dim, env.action_dim, DdpgConfig(**kw),
                  scen.p_max, scen.n_tx, scen.n_users, p_0=scen.p_0,
                  rng=np.random.default_rng(SEED))

print(f"state dim {env.state_dim}, action dim {env.action_dim}")
print(f"training {EPISODES} episodes (about a minute)...\n")

log = train(env, agent, episodes=EPISODES)
rewards = np.array(log.episode_column("reward"))
blocks = [rewards[lo:lo + 30].mean() for lo in range(0, EPISODES, 30)]
lo_ref, hi_ref = min(blocks), max(blocks)
for i, m in enumerate(blocks):
    bar = "#" * (1 + int(24 * (m - lo_ref) / max(hi_ref - lo_ref, 1e-9)))
    print(f"episodes {30 * i:3d}-{30 * i + 29:3d}: mean reward {m:7.3f}  {bar}")

# Evaluate the frozen policy (no exploration noise) against the baselines
# on a shared batch of fresh episodes.
policy = lambda s: env.project(agent.act(s.features, noise_std=0.0))
rng = np.random.default_rng(123)
rand = lambda s: random_policy(rng, scen.n_tx, scen.n_users, scen.p_max, scen.p_0)
mrt = lambda s: mrt_warm_start(s.raw_snapshot, scen.p_max)

print()
for name, fn in (("learned", policy), ("matched filter", mrt), ("random", rand)):
    rews, rates, sinrs = evaluate(env, fn, episodes=30)
    print(f"{name:>15}: reward {rews.mean():7.3f}, "
          f"sum rate {rates.mean():6.3f} bit/s/Hz, "
          f"sensing SINR {sinrs.mean():7.4f}")

print("""
At this operating point the reward weights sensing heavily, so the agent
pays that term first: after 150 episodes its sensing SINR sits an order of
magnitude above random and well above the matched filter, while its rate
is still catching up. On the composite reward it has cleared random and
nearly caught the matched filter, whose geometry hands it a free start
(one of its beams always points straight at the target). Full-length
training recovers the rate: in the 500-episode benchmark configuration the
learned policy ends well ahead of random on evaluated sum rate while
holding a sensing SINR several times above it.""")
