import * as fs from "fs";
import * as path from "path";

import { column, readTable, writeTable } from "./csv.js";
import { checkCdf, cumulativeMean, movingAverage, toDb } from "./series.js";
import { lineChart } from "./svg.js";

export const CAPACITY_WINDOW = 50;

/** Label a run directory by its name, or its parent's when it is a seed dir
 * (bench layouts look like out/ddpg/seed_0). */
export function runLabel(dir: string): string {
  const base = path.basename(path.resolve(dir));
  if (base.startsWith("seed_")) {
    return path.basename(path.dirname(path.resolve(dir)));
  }
  return base;
}

function episodesFile(runDir: string): string {
  const file = path.join(runDir, "episodes.csv");
  if (!fs.existsSync(file)) {
    const seeds = fs.existsSync(runDir)
      ? fs.readdirSync(runDir).filter((n) => n.startsWith("seed_"))
      : [];
    const hint = seeds.length > 0 ? `; did you mean ${path.join(runDir, seeds[0])}?` : "";
    throw new Error(`no episodes.csv in ${runDir}${hint}`);
  }
  return file;
}

/** Instantaneous episode reward and its running cumulative mean. */
export function convergence(runDir: string, outDir: string): { svg: string; data: string } {
  const table = readTable(episodesFile(runDir), ["episode", "reward"]);
  if (table.rows.length === 0) {
    throw new Error(`${episodesFile(runDir)}: no episodes to plot`);
  }
  const episodes = column(table, "episode");
  const reward = column(table, "reward");
  const running = cumulativeMean(reward);

  const svgPath = path.join(outDir, "convergence.svg");
  const dataPath = path.join(outDir, "figure_data_convergence.csv");
  const svg = lineChart(
    [
      { label: "instant", x: episodes, y: reward },
      { label: "cumulative mean", x: episodes, y: running },
    ],
    { title: `Training reward (${runLabel(runDir)})`, xLabel: "episode", yLabel: "reward" },
  );
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(svgPath, svg, "utf-8");
  writeTable(dataPath, ["episode", "reward", "cumulative_mean"],
    episodes.map((e, i) => [e, reward[i], running[i]]));
  return { svg: svgPath, data: dataPath };
}

/** Per-policy trailing moving average of the episode sum rate. */
export function capacity(runDirs: string[], outDir: string): { svg: string; data: string } {
  if (runDirs.length === 0) throw new Error("capacity needs at least one run directory");
  const labels = runDirs.map(runLabel);
  const series = runDirs.map((dir) => {
    const table = readTable(episodesFile(dir), ["episode", "sum_rate"]);
    if (table.rows.length === 0) throw new Error(`${episodesFile(dir)}: no episodes to plot`);
    return column(table, "sum_rate");
  });

  const shortest = Math.min(...series.map((s) => s.length));
  if (series.some((s) => s.length !== shortest)) {
    console.warn(
      `warning: episode counts differ (${series.map((s) => s.length).join(", ")}); truncating to ${shortest}`,
    );
  }
  const episodes = Array.from({ length: shortest }, (_, i) => i);
  const averaged = series.map((s) => movingAverage(s.slice(0, shortest), CAPACITY_WINDOW));

  const svgPath = path.join(outDir, "capacity.svg");
  const dataPath = path.join(outDir, "figure_data_capacity.csv");
  const svg = lineChart(
    averaged.map((y, k) => ({ label: labels[k], x: episodes, y })),
    {
      title: `Sum rate, ${CAPACITY_WINDOW}-episode moving average`,
      xLabel: "episode",
      yLabel: "sum rate (bit/s/Hz)",
    },
  );
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(svgPath, svg, "utf-8");
  writeTable(dataPath, ["episode", ...labels],
    episodes.map((e, i) => [e, ...averaged.map((y) => y[i])]));
  return { svg: svgPath, data: dataPath };
}

function findCdfTables(sweepDir: string, stem: string): { tag: string; file: string }[] {
  if (!fs.existsSync(sweepDir)) throw new Error(`no such directory: ${sweepDir}`);
  const names = fs.readdirSync(sweepDir).filter(
    (n) => n.startsWith(`${stem}_`) && n.endsWith(".csv"),
  );
  names.sort();
  return names.map((n) => ({
    tag: n.slice(stem.length + 1, -".csv".length),
    file: path.join(sweepDir, n),
  }));
}

/** CDFs of evaluated sum rate and sensing SINR, one curve per ISAC weight.
 * Points are passed through untouched; only the SINR axis is displayed in
 * dB, the emitted data stay linear. */
export function cdf(sweepDir: string, outDir: string): { svgs: string[]; data: string[] } {
  const specs = [
    { stem: "cdf_sumrate", valueCol: "sum_rate", xLabel: "sum rate (bit/s/Hz)", db: false },
    { stem: "cdf_sinr", valueCol: "sensing_sinr", xLabel: "sensing SINR (dB)", db: true },
  ];
  const svgs: string[] = [];
  const data: string[] = [];
  fs.mkdirSync(outDir, { recursive: true });
  for (const spec of specs) {
    const tables = findCdfTables(sweepDir, spec.stem);
    if (tables.length === 0) {
      throw new Error(`no ${spec.stem}_<rho>.csv tables found in ${sweepDir}`);
    }
    const series = tables.map(({ tag, file }) => {
      const table = readTable(file, [spec.valueCol, "cdf"]);
      const values = column(table, spec.valueCol);
      const probs = column(table, "cdf");
      checkCdf(values, probs);
      return { tag, values, probs };
    });
    const svgPath = path.join(outDir, `${spec.stem}.svg`);
    const svg = lineChart(
      series.map((s) => ({
        label: `rho=${s.tag}`,
        x: spec.db ? s.values.map(toDb) : s.values,
        y: s.probs,
      })),
      { title: `CDF of evaluated ${spec.valueCol}`, xLabel: spec.xLabel, yLabel: "CDF", markers: true },
    );
    fs.writeFileSync(svgPath, svg, "utf-8");
    const dataPath = path.join(outDir, `figure_data_${spec.stem}.csv`);
    const rows: (number | string)[][] = [];
    for (const s of series) {
      for (let i = 0; i < s.values.length; i++) {
        rows.push([s.tag, s.values[i], s.probs[i]]);
      }
    }
    writeTable(dataPath, ["rho", spec.valueCol, "cdf"], rows);
    svgs.push(svgPath);
    data.push(dataPath);
  }
  return { svgs, data };
}
