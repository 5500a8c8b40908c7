#!/usr/bin/env node
/** Command line: turn simulator run directories into figures and the
 * matching data tables.
 *
 *   isacsim-report convergence <run-dir>          # instant + cumulative reward
 *   isacsim-report capacity <run-dir>...          # per-policy moving-average sum rate
 *   isacsim-report cdf <sweep-dir>                # per-rho CDFs (SINR axis in dB)
 *
 * Common flags: --out DIR (default ./report), --format svg. Run
 * directories are read strictly read-only; everything lands in --out.
 */

import { pathToFileURL } from "url";

import { capacity, cdf, convergence } from "./figures.js";

interface Args {
  command: string;
  dirs: string[];
  out: string;
  format: string;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { command: "", dirs: [], out: "report", format: "svg" };
  const rest = [...argv];
  while (rest.length > 0) {
    const tok = rest.shift() as string;
    if (tok === "--out") {
      const v = rest.shift();
      if (!v) throw new Error("--out needs a value");
      args.out = v;
    } else if (tok === "--format") {
      const v = rest.shift();
      if (!v) throw new Error("--format needs a value");
      args.format = v;
    } else if (tok === "-h" || tok === "--help") {
      args.command = "help";
    } else if (tok.startsWith("-")) {
      throw new Error(`unknown flag ${tok}`);
    } else if (args.command === "") {
      args.command = tok;
    } else {
      args.dirs.push(tok);
    }
  }
  if (args.format !== "svg") {
    throw new Error(
      `unsupported format "${args.format}": this tool renders svg (raster output would need a native canvas backend)`,
    );
  }
  return args;
}

const USAGE = `usage: isacsim-report <convergence|capacity|cdf> <dir>... [--out DIR] [--format svg]`;

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  if (args.command === "help" || args.command === "") {
    console.log(USAGE);
    return args.command === "help" ? 0 : 2;
  }
  try {
    switch (args.command) {
      case "convergence": {
        if (args.dirs.length !== 1) throw new Error("convergence takes exactly one run directory");
        const out = convergence(args.dirs[0], args.out);
        console.log(`wrote ${out.svg} and ${out.data}`);
        return 0;
      }
      case "capacity": {
        const out = capacity(args.dirs, args.out);
        console.log(`wrote ${out.svg} and ${out.data}`);
        return 0;
      }
      case "cdf": {
        if (args.dirs.length !== 1) throw new Error("cdf takes exactly one sweep directory");
        const out = cdf(args.dirs[0], args.out);
        console.log(`wrote ${out.svgs.join(", ")} and ${out.data.join(", ")}`);
        return 0;
      }
      default:
        console.error(`error: unknown command "${args.command}"`);
        console.error(USAGE);
        return 2;
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
