import { describe, expect, it } from 'vitest';

import { IncompatibleAxes, compareView } from '../src/compare';
import { figure1Result } from './fixtures';

describe('compare view', () => {
  it('same result twice gives all-zero deltas', () => {
    const rows = compareView(figure1Result(), figure1Result());
    expect(rows.length).toBeGreaterThan(0);
    for (const row of rows) {
      expect(row.a).toBe(row.b);
      expect(row.deltaText.replace('+', '')).toMatch(/^[0.%-]+%?$/);
      expect(Number.parseFloat(row.deltaText)).toBe(0);
    }
  });

  it('correct vs misspecified at the same gap shows a relative-bias delta', () => {
    const a = figure1Result();
    const b = figure1Result();
    b.label = 'AR-misspecified C1';
    b.request = { ...b.request, specification: 'misspecified' };
    // misspecified runs report only the primary policy, with large bias
    b.payload.panels = b.payload.panels
      .filter((p) => p.policy === 'primary')
      .map((p) => (p.metric === 'rel_bias_pct' ? { ...p, value: 62.6 } : p));
    const rows = compareView(a, b);
    const rel = rows.find((r) => r.metric === 'rel_bias_pct' && r.policy === 'primary');
    expect(rel).toBeDefined();
    expect(rel!.deltaText).toBe('+65.7%');
    const secondary = rows.find((r) => r.metric === 'coverage' && r.policy === 'secondary');
    expect(secondary!.bText).toBe('—'); // absent on the misspecified side
  });

  it('different gap conditions cannot be compared', () => {
    const a = figure1Result();
    const b = figure1Result();
    b.request = { ...b.request, gap: 'C3' };
    expect(() => compareView(a, b)).toThrow(IncompatibleAxes);
  });
});
