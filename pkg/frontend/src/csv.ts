import * as fs from "fs";
import * as path from "path";

export const SCHEMA_LINE = "# schema=1";

export interface Table {
  columns: string[];
  rows: number[][];
}

/** Read one of the simulator's CSV artifacts.
 *
 * The first line must be the schema marker and the second the header; data
 * cells are numbers except for known string columns (e.g. policy names),
 * which callers access through `rawRows`.
 */
export function readTable(file: string, required: string[] = []): Table & { rawRows: string[][] } {
  const text = fs.readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines[0] !== SCHEMA_LINE) {
    throw new Error(`${file}: first line must be "${SCHEMA_LINE}", got "${lines[0] ?? ""}"`);
  }
  if (lines.length < 2) {
    throw new Error(`${file}: missing header line`);
  }
  const columns = lines[1].split(",");
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new Error(
        `${file}: missing column "${col}"; expected schema includes [${required.join(", ")}], found [${columns.join(", ")}]`,
      );
    }
  }
  const rawRows = lines.slice(2).map((ln) => ln.split(","));
  for (const row of rawRows) {
    if (row.length !== columns.length) {
      throw new Error(`${file}: row has ${row.length} cells, header has ${columns.length}`);
    }
  }
  const rows = rawRows.map((row) => row.map((cell) => Number(cell)));
  return { columns, rows, rawRows };
}

export function column(table: Table, name: string): number[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new Error(`missing column "${name}" (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r) => r[i]);
}

export function writeTable(file: string, columns: string[], rows: (number | string)[][]): void {
  // String(number) is the shortest round-trip form, so output is stable
  // across reruns and parses back to the same doubles.
  const lines = [SCHEMA_LINE, columns.join(",")];
  for (const row of rows) {
    lines.push(row.map((c) => String(c)).join(","));
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, lines.join("\n") + "\n", "utf-8");
}
