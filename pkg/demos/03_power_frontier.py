"""
The communication / sensing power frontier
==========================================

With beam shapes held fixed, the only question is how much of the power
budget the sensing beam gets. Sweeping that split traces the frontier the
reward weight rho moves the learned policy along.
"""

import numpy as np

from isacsim.config import default_scenario
from isacsim.env import mrt_warm_start
from isacsim.metrics import BeamformingAction, sensing_sinr, sum_spectral_efficiency
from isacsim.scenario import draw_channel

scen = default_scenario(n_tx=8, n_rx=8, n_users=2, n_clusters=3, episodes=500)

# Average over a handful of episodes so small-scale fading does not dominate.
episodes = range(20)
snaps = [draw_channel(scen, t) for t in episodes]
template = [mrt_warm_start(s, scen.p_max) for s in snaps]


def with_sensing_share(action, share):
    # template splits power evenly over 3 beams; rescale to the asked split
    w = action.comm_beams * np.sqrt((1.0 - share) / (2.0 / 3.0))
    ws = action.sense_beam * np.sqrt(share / (1.0 / 3.0))
    return BeamformingAction(comm_beams=w, sense_beam=ws)


print("sensing share | sum rate (bit/s/Hz) | sensing SINR")
print("-" * 52)
for share in (0.05, 0.15, 0.33, 0.5, 0.7, 0.9):
    rates, sinrs = [], []
    for snap, act in zip(snaps, template):
        a = with_sensing_share(act, share)
        assert abs(a.total_power() - scen.p_max) < 1e-9
        rates.append(sum_spectral_efficiency(snap, a))
        sinrs.append(sensing_sinr(snap, a))
    print(f"     {share:4.2f}     |       {np.mean(rates):6.3f}       |   {np.mean(sinrs):8.4f}")

print("""
Reading the table: the sum rate falls gently as power leaves the users, but
the sensing SINR climbs faster than linearly: the sensing echo grows with
its beam's power while the comm-beam clutter in its denominator shrinks at
the same time. A policy trained with a sensing-heavy reward
(low rho) settles on the lower rows; a communication-heavy one (high rho)
on the upper rows.""")
