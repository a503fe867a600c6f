// Faceted small multiples, one panel per metric, mirroring the source
// figures' layout. Pure view-model construction plus SVG string rendering;
// nothing here computes statistics, values come straight from payloads.

import { METRIC_TITLES, NON_NULL_METRICS, NULL_METRICS, formatMetric } from './format.js';
import { gapLabel, gapMeanYears } from './form.js';
import type { StoredResult, Thresholds } from './types.js';

export interface PanelPoint {
  x: number; // gap mean in years
  xLabel: string;
  y: number;
  yText: string; // exactly what the UI displays
  policy: string;
  resultLabel: string;
}

export interface Band {
  lo: number;
  hi: number;
  className: string;
}

export interface GuideLine {
  x: number;
  label: string;
}

export interface PanelView {
  metric: string;
  title: string;
  points: PanelPoint[];
  bands: Band[];
  guides: GuideLine[];
}

// Which metric panels to draw: the non-null set when any stored result has
// a nonzero assumed effect, the null set otherwise. Only metrics actually
// present in the payloads are kept.
export function activeMetrics(results: StoredResult[]): string[] {
  const present = new Set<string>();
  for (const res of results) {
    for (const entry of res.payload.panels) {
      present.add(entry.metric);
    }
  }
  const anyNonNull = results.some(
    (r) => r.request.effect_primary !== 0 || r.request.effect_secondary !== 0,
  );
  const order = anyNonNull ? NON_NULL_METRICS : NULL_METRICS;
  return order.filter((m) => present.has(m));
}

function biasBands(metric: string, thresholds: Thresholds | null): Band[] {
  if (!thresholds) {
    return [];
  }
  if (metric === 'rel_bias_pct') {
    const [none, small, moderate] = thresholds.rel_bias_band_edges_pct;
    return [
      { lo: -none, hi: none, className: 'band-none' },
      { lo: small, hi: moderate, className: 'band-moderate' },
      { lo: -moderate, hi: -small, className: 'band-moderate' },
    ];
  }
  if (metric === 'std_bias') {
    const [small, moderate] = thresholds.std_bias_band_edges;
    return [
      { lo: -small, hi: small, className: 'band-none' },
      { lo: small, hi: moderate, className: 'band-moderate' },
      { lo: -moderate, hi: -small, className: 'band-moderate' },
    ];
  }
  return [];
}

function minGapGuides(results: StoredResult[], thresholds: Thresholds | null): GuideLine[] {
  if (!thresholds) {
    return [];
  }
  const guides: GuideLine[] = [];
  const models = new Set(results.map((r) => r.request.model_class));
  if (models.has('AR')) {
    guides.push({ x: thresholds.ar_min_gap_years[0], label: 'AR min gap' });
  }
  if (models.has('DID')) {
    guides.push({ x: thresholds.did_min_gap_years[0], label: 'DID min gap' });
  }
  return guides;
}

export function buildPanelView(
  metric: string,
  results: StoredResult[],
  thresholds: Thresholds | null,
): PanelView {
  const points: PanelPoint[] = [];
  for (const res of results) {
    for (const entry of res.payload.panels) {
      if (entry.metric !== metric) {
        continue;
      }
      points.push({
        x: gapMeanYears(res.request.gap),
        xLabel: gapLabel(res.request.gap),
        y: entry.value,
        yText: formatMetric(metric, entry.value),
        policy: entry.policy,
        resultLabel: res.label,
      });
    }
  }
  return {
    metric,
    title: METRIC_TITLES[metric] ?? metric,
    points,
    bands: biasBands(metric, thresholds),
    guides: minGapGuides(results, thresholds),
  };
}

const W = 300;
const H = 190;
const MARGIN = { top: 26, right: 12, bottom: 30, left: 46 };

function scale(v: number, lo: number, hi: number, outLo: number, outHi: number): number {
  if (hi === lo) {
    return (outLo + outHi) / 2;
  }
  return outLo + ((v - lo) / (hi - lo)) * (outHi - outLo);
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function renderPanelSvg(view: PanelView): string {
  const xs = view.points.map((p) => p.x).concat(view.guides.map((g) => g.x));
  const ys = view.points.map((p) => p.y);
  for (const band of view.bands) {
    ys.push(band.lo, band.hi);
  }
  if (ys.length === 0) {
    ys.push(0, 1);
  }
  if (xs.length === 0) {
    xs.push(0, 10);
  }
  const xLo = Math.min(...xs, 0) - 0.5;
  const xHi = Math.max(...xs, 1) + 0.5;
  let yLo = Math.min(...ys, 0);
  let yHi = Math.max(...ys);
  const pad = (yHi - yLo || 1) * 0.12;
  yLo -= pad;
  yHi += pad;

  const px = (v: number) => scale(v, xLo, xHi, MARGIN.left, W - MARGIN.right);
  const py = (v: number) => scale(v, yLo, yHi, H - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${W} ${H}" class="panel-svg" role="img" aria-label="${esc(view.title)}">`);
  parts.push(`<text x="${W / 2}" y="15" class="panel-title" text-anchor="middle">${esc(view.title)}</text>`);

  for (const band of view.bands) {
    const top = py(Math.min(band.hi, yHi));
    const bottom = py(Math.max(band.lo, yLo));
    if (bottom > top) {
      parts.push(`<rect x="${MARGIN.left}" y="${top.toFixed(1)}" width="${W - MARGIN.left - MARGIN.right}" ` +
        `height="${(bottom - top).toFixed(1)}" class="${band.className}"/>`);
    }
  }

  // axes
  parts.push(`<line x1="${MARGIN.left}" y1="${H - MARGIN.bottom}" x2="${W - MARGIN.right}" ` +
    `y2="${H - MARGIN.bottom}" class="axis"/>`);
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
    `y2="${H - MARGIN.bottom}" class="axis"/>`);
  if (yLo < 0 && yHi > 0) {
    parts.push(`<line x1="${MARGIN.left}" y1="${py(0).toFixed(1)}" x2="${W - MARGIN.right}" ` +
      `y2="${py(0).toFixed(1)}" class="zero-line"/>`);
  }
  parts.push(`<text x="${MARGIN.left - 6}" y="${py(yHi - pad).toFixed(1)}" class="tick" text-anchor="end">` +
    `${esc(formatMetric(view.metric, yHi - pad))}</text>`);
  parts.push(`<text x="${MARGIN.left - 6}" y="${py(yLo + pad).toFixed(1)}" class="tick" text-anchor="end">` +
    `${esc(formatMetric(view.metric, yLo + pad))}</text>`);

  for (const guide of view.guides) {
    const gx = px(guide.x);
    parts.push(`<line x1="${gx.toFixed(1)}" y1="${MARGIN.top}" x2="${gx.toFixed(1)}" ` +
      `y2="${H - MARGIN.bottom}" class="guide"/>`);
    parts.push(`<text x="${gx.toFixed(1)}" y="${H - MARGIN.bottom + 22}" class="guide-label" ` +
      `text-anchor="middle">${esc(guide.label)}</text>`);
  }

  const seenLabels = new Set<string>();
  for (const point of view.points) {
    const cx = px(point.x);
    const cy = py(point.y);
    const cls = point.policy === 'primary' ? 'pt-primary' : 'pt-secondary';
    parts.push(`<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="4" class="${cls}">` +
      `<title>${esc(`${point.resultLabel} ${point.policy}: ${point.yText}`)}</title></circle>`);
    parts.push(`<text x="${(cx + 6).toFixed(1)}" y="${(cy - 6).toFixed(1)}" class="pt-label">` +
      `${esc(point.yText)}</text>`);
    if (!seenLabels.has(point.xLabel)) {
      seenLabels.add(point.xLabel);
      parts.push(`<text x="${cx.toFixed(1)}" y="${H - MARGIN.bottom + 12}" class="tick" ` +
        `text-anchor="middle">${esc(point.xLabel)}</text>`);
    }
  }
  parts.push('</svg>');
  return parts.join('');
}
