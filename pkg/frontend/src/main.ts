// Explorer entry point: form on the left, metric panels on the right,
// compare drawer at the bottom. One polling loop per submitted job.

import { ApiClient, ApiValidationError } from './api.js';
import { guidanceBadge } from './badge.js';
import { activeMetrics, buildPanelView, renderPanelSvg } from './charts.js';
import { IncompatibleAxes, compareView } from './compare.js';
import {
  GAP_LABELS,
  ScenarioForm,
  defaultForm,
  formGap,
  fromRequest,
  gapLabel,
  toRequest,
  validateForm,
} from './form.js';
import type { StoredResult, Thresholds } from './types.js';

const api = new ApiClient('');
const results: StoredResult[] = [];
let thresholds: Thresholds | null = null;
let polling = false;

const app = document.querySelector<HTMLDivElement>('#app');
if (!app) {
  throw new Error('missing #app container');
}

app.innerHTML = `
  <header>
    <h1>Co-occurring policy explorer</h1>
    <p class="lede">Enter a planned study's design to see the bias, variance, and coverage
    you should expect before running the real evaluation.</p>
  </header>
  <div class="layout">
    <form id="scenario-form" class="card">
      <h2>Scenario <span id="badge" class="badge"></span></h2>
      <label>Primary policy effect <span id="eff1-val"></span>
        <input type="range" id="eff1" min="-25" max="0" step="1">
      </label>
      <label>Co-occurring policy effect <span id="eff2-val"></span>
        <input type="range" id="eff2" min="-25" max="0" step="1">
      </label>
      <label>Enactment gap
        <select id="gap">
          ${GAP_LABELS.map((g) => `<option value="${g}">${g}</option>`).join('')}
          <option value="custom">custom interval</option>
        </select>
      </label>
      <div id="custom-gap" class="row hidden">
        <label>low (yrs) <input type="number" id="gap-low" min="0" step="0.5" value="0"></label>
        <label>high (yrs) <input type="number" id="gap-high" min="0" step="0.5" value="1"></label>
      </div>
      <label>Treated states <input type="number" id="k" min="1" max="50" step="1"></label>
      <label>Ordering
        <select id="ordering">
          <option value="random">random</option>
          <option value="primary_first">primary always first</option>
        </select>
      </label>
      <label>Phase-in
        <select id="phase">
          <option value="instantaneous">instantaneous</option>
          <option value="linear_3yr">3-year linear</option>
        </select>
      </label>
      <label>Model
        <select id="model">
          <option value="AR">AR (lagged outcome)</option>
          <option value="DID">DID (two-way FE)</option>
        </select>
      </label>
      <label>Specification
        <select id="spec">
          <option value="correct">correct (both policies)</option>
          <option value="misspecified">misspecified (omits co-occurring)</option>
        </select>
      </label>
      <label>Replications
        <select id="reps">
          <option value="500">500 (interactive)</option>
          <option value="5000">5000 (paper fidelity)</option>
        </select>
      </label>
      <label>Seed <input type="number" id="seed" min="0" step="1" value="0"></label>
      <div id="form-errors" class="errors"></div>
      <button type="submit" id="submit">Run scenario</button>
      <div id="job-status" class="status"></div>
      <div class="progress"><div id="progress-bar"></div></div>
    </form>
    <section class="results">
      <div id="banner" class="banner hidden"></div>
      <div id="panels" class="panels"></div>
      <div class="card compare-card">
        <h2>Compare runs</h2>
        <div class="row">
          <select id="cmp-a"></select>
          <select id="cmp-b"></select>
          <button type="button" id="cmp-go">Compare</button>
        </div>
        <div id="cmp-out"></div>
      </div>
    </section>
  </div>
`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

function readForm(): ScenarioForm {
  return {
    effectPrimaryPct: Number(el<HTMLInputElement>('eff1').value),
    effectSecondaryPct: Number(el<HTMLInputElement>('eff2').value),
    gapChoice: el<HTMLSelectElement>('gap').value,
    customGapLow: Number(el<HTMLInputElement>('gap-low').value),
    customGapHigh: Number(el<HTMLInputElement>('gap-high').value),
    nTreated: Number(el<HTMLInputElement>('k').value),
    ordering: el<HTMLSelectElement>('ordering').value as ScenarioForm['ordering'],
    phaseIn: el<HTMLSelectElement>('phase').value as ScenarioForm['phaseIn'],
    modelClass: el<HTMLSelectElement>('model').value as ScenarioForm['modelClass'],
    specification: el<HTMLSelectElement>('spec').value as ScenarioForm['specification'],
    nReps: Number(el<HTMLSelectElement>('reps').value),
    seed: Number(el<HTMLInputElement>('seed').value),
  };
}

function writeForm(form: ScenarioForm): void {
  el<HTMLInputElement>('eff1').value = String(form.effectPrimaryPct);
  el<HTMLInputElement>('eff2').value = String(form.effectSecondaryPct);
  el<HTMLSelectElement>('gap').value = form.gapChoice;
  el<HTMLInputElement>('gap-low').value = String(form.customGapLow);
  el<HTMLInputElement>('gap-high').value = String(form.customGapHigh);
  el<HTMLInputElement>('k').value = String(form.nTreated);
  el<HTMLSelectElement>('ordering').value = form.ordering;
  el<HTMLSelectElement>('phase').value = form.phaseIn;
  el<HTMLSelectElement>('model').value = form.modelClass;
  el<HTMLSelectElement>('spec').value = form.specification;
  el<HTMLSelectElement>('reps').value = String(form.nReps);
  el<HTMLInputElement>('seed').value = String(form.seed);
  refreshDynamic();
}

function refreshDynamic(): void {
  const form = readForm();
  el('eff1-val').textContent = `${form.effectPrimaryPct}%`;
  el('eff2-val').textContent = `${form.effectSecondaryPct}%`;
  el('custom-gap').classList.toggle('hidden', form.gapChoice !== 'custom');
  const badge = el('badge');
  if (thresholds) {
    const b = guidanceBadge(form.modelClass, formGap(form), thresholds);
    badge.textContent = b.text;
    badge.className = `badge badge-${b.level}`;
  }
}

function showErrors(errors: Map<string, string>): void {
  el('form-errors').innerHTML = [...errors.entries()]
    .map(([field, message]) => `<p><strong>${field}</strong>: ${message}</p>`)
    .join('');
}

function banner(text: string, retry: (() => void) | null): void {
  const node = el('banner');
  node.classList.toggle('hidden', !text);
  node.innerHTML = text ? `<span>${text}</span>` : '';
  if (text && retry) {
    const button = document.createElement('button');
    button.textContent = 'Retry';
    button.addEventListener('click', () => {
      banner('', null);
      retry();
    });
    node.appendChild(button);
  }
}

function renderPanels(): void {
  const host = el('panels');
  if (results.length === 0) {
    host.innerHTML = '<p class="placeholder">Run a scenario to see its metric panels.</p>';
    return;
  }
  host.innerHTML = activeMetrics(results)
    .map((metric) => `<div class="panel">${renderPanelSvg(buildPanelView(metric, results, thresholds))}</div>`)
    .join('');
  const options = results
    .map((r, i) => `<option value="${i}">${r.label}</option>`)
    .join('');
  el<HTMLSelectElement>('cmp-a').innerHTML = options;
  el<HTMLSelectElement>('cmp-b').innerHTML = options;
}

function resultLabel(form: ScenarioForm): string {
  const gap = form.gapChoice === 'custom'
    ? gapLabel([form.customGapLow, form.customGapHigh])
    : form.gapChoice;
  return `${form.modelClass}-${form.specification} ${gap} k=${form.nTreated} ` +
    `(${form.effectPrimaryPct}%,${form.effectSecondaryPct}%) ${form.ordering}`;
}

async function submit(): Promise<void> {
  const form = readForm();
  const errors = validateForm(form);
  showErrors(errors);
  if (errors.size > 0 || polling) {
    return;
  }
  const request = toRequest(form);
  const status = el('job-status');
  const bar = el('progress-bar');
  polling = true;
  el<HTMLButtonElement>('submit').disabled = true;
  try {
    status.textContent = 'submitting...';
    const jobId = await api.submitScenario(request);
    const payload = await api.waitForResults(jobId, (s) => {
      status.textContent = `${s.status} · ${s.progress.completed}/${s.progress.total} replications`;
      bar.style.width = `${Math.round(s.progress.fraction * 100)}%`;
    });
    results.push({ label: resultLabel(form), request, payload });
    status.textContent = `done · ${payload.n_reps} replications, fail rate ${payload.fail_rate}`;
    renderPanels();
  } catch (err) {
    if (err instanceof ApiValidationError) {
      showErrors(new Map(err.fields.map((f) => [f.field, f.message])));
      status.textContent = '';
    } else {
      banner(`service unreachable or failed: ${(err as Error).message}`, () => void submit());
      status.textContent = '';
    }
  } finally {
    polling = false;
    el<HTMLButtonElement>('submit').disabled = false;
    bar.style.width = '0%';
  }
}

function runCompare(): void {
  const a = results[Number(el<HTMLSelectElement>('cmp-a').value)];
  const b = results[Number(el<HTMLSelectElement>('cmp-b').value)];
  const out = el('cmp-out');
  if (!a || !b) {
    out.innerHTML = '<p class="placeholder">Need two completed runs.</p>';
    return;
  }
  try {
    const rows = compareView(a, b);
    out.innerHTML = `
      <table>
        <thead><tr><th>metric</th><th>policy</th><th>${a.label}</th><th>${b.label}</th><th>delta</th></tr></thead>
        <tbody>
          ${rows.map((r) => `<tr><td>${r.metric}</td><td>${r.policy}</td>` +
            `<td>${r.aText}</td><td>${r.bText}</td><td class="delta">${r.deltaText}</td></tr>`).join('')}
        </tbody>
      </table>`;
  } catch (err) {
    if (err instanceof IncompatibleAxes) {
      out.innerHTML = `<p class="errors">${err.message}</p>`;
    } else {
      throw err;
    }
  }
}

el<HTMLFormElement>('scenario-form').addEventListener('submit', (ev) => {
  ev.preventDefault();
  void submit();
});
el('cmp-go').addEventListener('click', runCompare);
for (const id of ['eff1', 'eff2', 'gap', 'model', 'gap-low', 'gap-high']) {
  el(id).addEventListener('input', refreshDynamic);
}

writeForm(fromRequest(toRequest(defaultForm()))); // exercise the lossless round trip
renderPanels();
void api
  .thresholds()
  .then((t) => {
    thresholds = t;
    refreshDynamic();
  })
  .catch(() => banner('could not load guidance thresholds', null));
