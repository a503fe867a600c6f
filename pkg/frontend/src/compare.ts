// Side-by-side comparison of two completed results (e.g. correct vs
// misspecified, AR vs DID). Both must sit at the same x-axis position
// (gap condition), otherwise the panels would not be comparable.

import { formatDelta, formatMetric } from './format.js';
import { gapLabel } from './form.js';
import type { StoredResult } from './types.js';

export class IncompatibleAxes extends Error {}

export interface CompareRow {
  metric: string;
  policy: string;
  a: number | null;
  b: number | null;
  aText: string;
  bText: string;
  deltaText: string;
}

export function compareView(a: StoredResult, b: StoredResult): CompareRow[] {
  const axisA = gapLabel(a.request.gap);
  const axisB = gapLabel(b.request.gap);
  if (axisA !== axisB) {
    throw new IncompatibleAxes(
      `results sit at different gap conditions (${axisA} vs ${axisB}); ` +
      'compare runs that share the x-axis factor',
    );
  }
  const rows: CompareRow[] = [];
  const index = new Map<string, { a?: number; b?: number }>();
  for (const entry of a.payload.panels) {
    index.set(`${entry.metric}|${entry.policy}`, { a: entry.value });
  }
  for (const entry of b.payload.panels) {
    const key = `${entry.metric}|${entry.policy}`;
    const cell = index.get(key) ?? {};
    cell.b = entry.value;
    index.set(key, cell);
  }
  for (const [key, cell] of index) {
    const [metric, policy] = key.split('|');
    const row: CompareRow = {
      metric,
      policy,
      a: cell.a ?? null,
      b: cell.b ?? null,
      aText: formatMetric(metric, cell.a),
      bText: formatMetric(metric, cell.b),
      deltaText:
        cell.a !== undefined && cell.b !== undefined
          ? formatDelta(metric, cell.a, cell.b)
          : '—',
    };
    rows.push(row);
  }
  rows.sort((x, y) => (x.metric + x.policy).localeCompare(y.metric + y.policy));
  return rows;
}
