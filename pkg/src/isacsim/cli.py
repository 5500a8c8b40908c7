"""Command line front end: train / eval / sweep-rho / bench.

Artifact layout (one directory per run, one subdirectory per seed):

    out/
      resolved.toml            fully-resolved configuration; reloading it
                               reproduces the run
      seed_<n>/
        train_log.csv          one row per environment step
        episodes.csv           one row per episode
        checkpoint.npz         final agent state (DDPG runs)
        eval.csv               frozen-policy evaluation episodes
        eval_summary.csv       mean / median / p5 / p95 of the eval columns

`sweep-rho` nests the layout under rho_<value>/ and adds pooled CDF tables;
`bench` nests it under ddpg/ dqn/ random/ and adds latency measurements.

All CSV files are UTF-8 with a leading `# schema=1` comment line. Floats are
written with repr so reading them back is lossless.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .agent import (
    EPISODE_COLUMNS,
    STEP_COLUMNS,
    DdpgAgent,
    DdpgConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .baselines import DqnAgent, build_codebook, dqn_train, random_policy, random_rollouts
from .config import ConfigError, default_scenario, dump_resolved, load_run_config
from .env import IsacEnv, mrt_warm_start

SCHEMA_LINE = "# schema=1"

# evaluation episodes index the channel stream far past any training episode,
# so their fading draws are disjoint from training while the moving target
# stays clamped at its final waypoint
EVAL_OFFSET = 10_000_019

EVAL_COLUMNS = ("episode", "reward", "sum_rate", "sensing_sinr")
SUMMARY_STATS = ("mean", "median", "p5", "p95")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows):
    """UTF-8 CSV with the schema comment line, lossless float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(SCHEMA_LINE + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path):
    """Inverse of write_csv: returns (columns, list of float-or-str rows)."""
    with open(path, encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f if not ln.startswith("#")]
    columns = tuple(lines[0].split(","))
    rows = []
    for ln in lines[1:]:
        out = []
        for cell in ln.split(","):
            try:
                out.append(float(cell))
            except ValueError:
                out.append(cell)
        rows.append(out)
    return columns, rows


def compute_cdf(values):
    """Empirical CDF: values sorted ascending, cdf_i = (i+1)/n."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("compute_cdf needs a non-empty list of values")
    if not np.all(np.isfinite(arr)):
        raise ValueError("compute_cdf requires finite values")
    order = np.sort(arr)
    return order, np.arange(1, arr.size + 1) / arr.size


def evaluate(env, act_fn, episodes):
    """Frozen-policy rollouts on the post-training channel stream.

    Returns per-episode arrays (reward, sum_rate, sensing_sinr), each the
    mean over the episode's steps. Exploration is the caller's act_fn
    concern; the state normalizer stops adapting here.
    """
    env.normalizer.frozen = True
    rewards = np.empty(episodes)
    rates = np.empty(episodes)
    sinrs = np.empty(episodes)
    for i in range(episodes):
        state = env.reset(EVAL_OFFSET + i)
        ep_r, ep_rate, ep_sinr = 0.0, 0.0, 0.0
        for _ in range(env.steps_per_episode):
            state, r, done, info = env.step(act_fn(state))
            ep_r += r
            ep_rate += info["sum_rate"]
            ep_sinr += info["sensing_sinr"]
        k = env.steps_per_episode
        rewards[i], rates[i], sinrs[i] = ep_r / k, ep_rate / k, ep_sinr / k
    return rewards, rates, sinrs


def write_eval(out_dir, rewards, rates, sinrs):
    out_dir = Path(out_dir)
    rows = [
        (i, rewards[i], rates[i], sinrs[i]) for i in range(len(rewards))
    ]
    write_csv(out_dir / "eval.csv", EVAL_COLUMNS, rows)
    summary_rows = []
    if len(rewards):
        stats = {
            "mean": np.mean,
            "median": np.median,
            "p5": lambda a: np.percentile(a, 5),
            "p95": lambda a: np.percentile(a, 95),
        }
        for name in SUMMARY_STATS:
            fn = stats[name]
            summary_rows.append((name, fn(rewards), fn(rates), fn(sinrs)))
    write_csv(out_dir / "eval_summary.csv", ("stat",) + EVAL_COLUMNS[1:], summary_rows)


def build_ddpg(cfg, env, seed, scen):
    return DdpgAgent(
        env.state_dim,
        env.action_dim,
        cfg.ddpg,
        scen.p_max,
        scen.n_tx,
        scen.n_users,
        p_0=scen.p_0,
        rng=np.random.default_rng(seed),
    )


def build_dqn(cfg, env, seed, scen):
    codebook = build_codebook(scen.n_tx, cfg.dqn.codebook_size, scen.tx_geometry())
    return DqnAgent(
        env.state_dim,
        scen.n_users,
        cfg.dqn,
        codebook,
        scen.p_max,
        scen.n_tx,
        p_0=scen.p_0,
        rng=np.random.default_rng(seed),
    )


def run_seed(cfg, policy, seed, rho, out_dir, episodes=None, eval_episodes=None):
    """Train one (policy, seed) pair and evaluate the frozen result.

    Writes train_log.csv, episodes.csv, eval.csv, eval_summary.csv, and for
    DDPG a final checkpoint.npz, into out_dir. Returns the eval arrays.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scen = cfg.scenario_for_seed(seed)
    env = IsacEnv(scen, rho=rho, steps_per_episode=cfg.steps_per_episode)
    episodes = cfg.episodes if episodes is None else episodes
    eval_episodes = cfg.eval_episodes if eval_episodes is None else eval_episodes

    if policy == "ddpg":
        agent = build_ddpg(cfg, env, seed, scen)
        ckpt_dir = out_dir if cfg.checkpoint_interval > 0 else None
        log = train(
            env,
            agent,
            episodes=episodes,
            checkpoint_dir=ckpt_dir,
            checkpoint_interval=cfg.checkpoint_interval,
        )
        save_checkpoint(out_dir / "checkpoint.npz", agent, env.normalizer, episodes - 1)
        act_fn = lambda s: env.project(agent.act(s.features, noise_std=0.0))
    elif policy == "dqn":
        agent = build_dqn(cfg, env, seed, scen)
        log = dqn_train(env, agent, episodes)
        act_fn = lambda s: agent.assemble(agent.act(s.features, epsilon=0.0))
    elif policy == "random":
        log = random_rollouts(env, episodes, seed)
        eval_rng = np.random.default_rng(seed)
        act_fn = lambda s: random_policy(
            eval_rng, scen.n_tx, scen.n_users, scen.p_max, scen.p_0
        )
    else:
        raise ConfigError(f"unknown policy {policy!r}")

    write_csv(out_dir / "train_log.csv", STEP_COLUMNS, log.step_rows)
    write_csv(out_dir / "episodes.csv", EPISODE_COLUMNS, log.episode_rows)
    rewards, rates, sinrs = evaluate(env, act_fn, eval_episodes)
    write_eval(out_dir, rewards, rates, sinrs)
    return rewards, rates, sinrs, log


def _resolve_seeds(args, cfg):
    if args.seed is not None:
        return (args.seed,)
    env_seed = os.environ.get("ISAC_SEED")
    if env_seed is not None:
        try:
            return (int(env_seed),)
        except ValueError:
            raise ConfigError(f"ISAC_SEED must be an integer, got {env_seed!r}")
    return cfg.seeds


def _load_config(args, episodes_override=True):
    """Fold the command line flags into the [run] table.

    ``eval`` interprets --episodes as the evaluation count, not the training
    length, so it opts out of the override here.
    """
    overrides = {}
    if getattr(args, "desk_scale", False):
        overrides["desk_scale"] = True
    if episodes_override and getattr(args, "episodes", None) is not None:
        overrides["episodes"] = args.episodes
    return load_run_config(path=args.config, run_overrides=overrides or None)


def cmd_train(args):
    cfg = _load_config(args)
    seeds = _resolve_seeds(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_resolved(cfg, out / "resolved.toml")
    for seed in seeds:
        t0 = time.perf_counter()
        rewards, rates, sinrs, log = run_seed(
            cfg, cfg.policy, seed, cfg.rho, out / f"seed_{seed}"
        )
        dt = time.perf_counter() - t0
        mean_rate = float(np.mean(rates)) if len(rates) else float("nan")
        mean_sinr = float(np.mean(sinrs)) if len(sinrs) else float("nan")
        print(
            f"[{cfg.policy} seed {seed}] {dt:.1f}s "
            f"eval sum-rate {mean_rate:.3f} bits/s/Hz, "
            f"sensing SINR {mean_sinr:.4g}, "
            f"updates {log.n_updates}, skipped {log.skipped_updates}"
        )
    return 0


def cmd_eval(args):
    cfg = _load_config(args, episodes_override=False)
    seeds = _resolve_seeds(args, cfg)
    seed = seeds[0]
    episodes = cfg.eval_episodes if args.episodes is None else args.episodes
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scen = cfg.scenario_for_seed(seed)
    env = IsacEnv(scen, rho=cfg.rho, steps_per_episode=cfg.steps_per_episode)

    if args.mrt:
        act_fn = lambda s: mrt_warm_start(s.raw_snapshot, scen.p_max)
    else:
        if args.checkpoint is None:
            raise ConfigError("eval needs --checkpoint (or --mrt)")
        agent, normalizer, _ = load_checkpoint(args.checkpoint)
        if (agent.state_dim, agent.action_dim) != (env.state_dim, env.action_dim):
            raise ConfigError(
                f"checkpoint architecture (state {agent.state_dim}, action "
                f"{agent.action_dim}) does not match the configured scenario "
                f"(state {env.state_dim}, action {env.action_dim})"
            )
        env.normalizer = normalizer
        act_fn = lambda s: env.project(agent.act(s.features, noise_std=0.0))

    rewards, rates, sinrs = evaluate(env, act_fn, episodes)
    write_eval(out, rewards, rates, sinrs)
    label = "mrt" if args.mrt else "checkpoint"
    if len(rates):
        print(
            f"[eval {label} seed {seed}] {episodes} episodes: "
            f"sum-rate {np.mean(rates):.3f} bits/s/Hz, "
            f"sensing SINR {np.mean(sinrs):.4g}"
        )
    else:
        print(f"[eval {label} seed {seed}] 0 episodes: header-only output")
    return 0


def cmd_sweep_rho(args):
    cfg = _load_config(args)
    seeds = _resolve_seeds(args, cfg)
    try:
        rhos = [float(tok) for tok in args.rhos.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--rhos must be a comma-separated float list, got {args.rhos!r}")
    if not rhos:
        raise ConfigError("--rhos named no values")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_resolved(cfg, out / "resolved.toml")
    summary = []
    for rho in rhos:
        if not 0.0 <= rho <= 1.0:
            raise ConfigError(f"rho {rho} outside [0, 1]")
        tag = f"{rho:g}"
        pooled_rates, pooled_sinrs = [], []
        for seed in seeds:
            _, rates, sinrs, _ = run_seed(
                cfg, cfg.policy, seed, rho, out / f"rho_{tag}" / f"seed_{seed}"
            )
            pooled_rates.append(rates)
            pooled_sinrs.append(sinrs)
        rates = np.concatenate(pooled_rates)
        sinrs = np.concatenate(pooled_sinrs)
        values, cdf = compute_cdf(rates)
        write_csv(
            out / f"cdf_sumrate_{tag}.csv", ("sum_rate", "cdf"), zip(values, cdf)
        )
        values, cdf = compute_cdf(sinrs)
        write_csv(
            out / f"cdf_sinr_{tag}.csv", ("sensing_sinr", "cdf"), zip(values, cdf)
        )
        summary.append((tag, float(np.mean(rates)), float(np.mean(sinrs))))
        print(
            f"[sweep rho={tag}] mean sum-rate {summary[-1][1]:.3f} bits/s/Hz, "
            f"mean sensing SINR {summary[-1][2]:.4g}"
        )
    write_csv(
        out / "sweep_summary.csv",
        ("rho", "mean_sum_rate", "mean_sensing_sinr"),
        summary,
    )
    return 0


def measure_actor_latency(n_tx, n_rx, n_users, hidden_sizes, reps=200, seed=0):
    """Per-step decision latency: one actor forward plus the power projection.

    Uses a synthetic scenario at the requested array size so the measurement
    needs no training run. Returns summary statistics in microseconds.
    """
    scen = default_scenario(n_tx=n_tx, n_rx=n_rx, n_users=n_users,
                            n_clusters=3, seed=seed)
    env = IsacEnv(scen, rho=0.5, steps_per_episode=10)
    cfg_small = DdpgConfig(hidden_sizes=tuple(hidden_sizes))
    agent = DdpgAgent(env.state_dim, env.action_dim, cfg_small, scen.p_max,
                      scen.n_tx, scen.n_users, p_0=scen.p_0,
                      rng=np.random.default_rng(seed))
    state = env.reset(0)
    for _ in range(20):  # warm-up
        env.project(agent.act(state.features, noise_std=0.0))
    samples = np.empty(reps)
    for i in range(reps):
        t0 = time.perf_counter_ns()
        env.project(agent.act(state.features, noise_std=0.0))
        samples[i] = (time.perf_counter_ns() - t0) / 1e3
    return {
        "state_dim": env.state_dim,
        "action_dim": env.action_dim,
        "reps": reps,
        "mean_us": float(np.mean(samples)),
        "median_us": float(np.median(samples)),
        "p95_us": float(np.percentile(samples, 95)),
        "max_us": float(np.max(samples)),
    }


def cmd_bench(args):
    cfg = _load_config(args)
    seeds = _resolve_seeds(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_resolved(cfg, out / "resolved.toml")

    summary = []
    for policy in ("ddpg", "dqn", "random"):
        pol_rewards, pol_rates, pol_sinrs, latencies = [], [], [], []
        for seed in seeds:
            rewards, rates, sinrs, log = run_seed(
                cfg, policy, seed, cfg.rho, out / policy / f"seed_{seed}"
            )
            pol_rewards.append(rewards)
            pol_rates.append(rates)
            pol_sinrs.append(sinrs)
            latencies.append(log.step_column("actor_latency_us"))
        summary.append(
            (
                policy,
                float(np.mean(np.concatenate(pol_rewards))),
                float(np.mean(np.concatenate(pol_rates))),
                float(np.mean(np.concatenate(pol_sinrs))),
                float(np.median(np.concatenate(latencies))),
            )
        )
        print(
            f"[bench {policy}] mean sum-rate {summary[-1][2]:.3f} bits/s/Hz, "
            f"mean sensing SINR {summary[-1][3]:.4g}, "
            f"median step latency {summary[-1][4]:.0f} us"
        )
    write_csv(
        out / "bench_summary.csv",
        ("policy", "mean_reward", "mean_sum_rate", "mean_sensing_sinr",
         "median_actor_latency_us"),
        summary,
    )

    rows = []
    for scale, dims in (("desk", (8, 8, 2)), ("full", (16, 16, 4))):
        stats = measure_actor_latency(*dims, cfg.ddpg.hidden_sizes)
        rows.append(
            (scale, stats["state_dim"], stats["action_dim"], stats["reps"],
             stats["mean_us"], stats["median_us"], stats["p95_us"], stats["max_us"])
        )
        print(
            f"[bench latency {scale} scale] median {stats['median_us']:.0f} us, "
            f"p95 {stats['p95_us']:.0f} us per decision"
        )
    write_csv(
        out / "latency.csv",
        ("scale", "state_dim", "action_dim", "reps", "mean_us", "median_us",
         "p95_us", "max_us"),
        rows,
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="ISAC downlink beamforming: DDPG training, baselines, "
        "evaluation, and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="single-seed override (beats ISAC_SEED and the config)")
        p.add_argument("--out", default="runs", help="output directory")
        p.add_argument("--episodes", type=int, default=None,
                       help="training-episode override")
        p.add_argument("--desk-scale", action="store_true", dest="desk_scale",
                       help="small-array preset (8 antennas, 2 users, 500x10)")

    p_train = sub.add_parser("train", help="train the configured policy")
    common(p_train)
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint without noise")
    common(p_eval)
    p_eval.add_argument("--checkpoint", default=None, help="checkpoint.npz path")
    p_eval.add_argument("--mrt", action="store_true",
                        help="evaluate the maximum-ratio warm start instead of "
                        "a checkpoint")
    p_eval.set_defaults(fn=cmd_eval)

    p_sweep = sub.add_parser("sweep-rho", help="train/evaluate across ISAC weights")
    common(p_sweep)
    p_sweep.add_argument("--rhos", default="0.1,0.9",
                         help="comma-separated weight list")
    p_sweep.set_defaults(fn=cmd_sweep_rho)

    p_bench = sub.add_parser("bench", help="paired-seed policy comparison "
                             "plus decision-latency measurement")
    common(p_bench)
    p_bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
