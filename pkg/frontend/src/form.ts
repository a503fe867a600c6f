// Scenario form state and its mapping to service requests.
//
// The form speaks percent units (sliders at -25..0); requests carry
// proportions. Validation mirrors the service schema so bad submissions
// never leave the browser.

import type { GapValue, ScenarioRequest } from './types.js';

export const GAP_LABELS = ['C1', 'C2', 'C3', 'C4'] as const;

// Midpoint of each named condition's interval, in years (used for the
// guidance badge and chart x positions).
export const GAP_MIDPOINTS: Record<string, number> = {
  C1: 0.5,
  C2: 3.5,
  C3: 6.5,
  C4: 9.5,
};

export const PANEL_UNITS = 50; // default synthetic panel served by the API

export interface ScenarioForm {
  effectPrimaryPct: number; // percent, e.g. -10
  effectSecondaryPct: number;
  gapChoice: string; // 'C1'..'C4' | 'custom'
  customGapLow: number;
  customGapHigh: number;
  nTreated: number;
  ordering: 'random' | 'primary_first';
  phaseIn: 'instantaneous' | 'linear_3yr';
  modelClass: 'AR' | 'DID';
  specification: 'correct' | 'misspecified';
  nReps: number;
  seed: number;
}

// Figure-1 defaults: both policies -10%, 30 treated states, rapid
// succession, random ordering, correctly specified AR.
export function defaultForm(): ScenarioForm {
  return {
    effectPrimaryPct: -10,
    effectSecondaryPct: -10,
    gapChoice: 'C1',
    customGapLow: 0,
    customGapHigh: 1,
    nTreated: 30,
    ordering: 'random',
    phaseIn: 'instantaneous',
    modelClass: 'AR',
    specification: 'correct',
    nReps: 500,
    seed: 0,
  };
}

export function validateForm(form: ScenarioForm): Map<string, string> {
  const errors = new Map<string, string>();
  if (form.effectPrimaryPct < -100 || form.effectPrimaryPct > 100) {
    errors.set('effect_primary', 'effect must be between -100% and 100%');
  }
  if (form.effectSecondaryPct < -100 || form.effectSecondaryPct > 100) {
    errors.set('effect_secondary', 'effect must be between -100% and 100%');
  }
  if (!Number.isInteger(form.nTreated) || form.nTreated < 1) {
    errors.set('n_treated', 'treated count must be a positive integer');
  } else if (form.nTreated > PANEL_UNITS) {
    errors.set('n_treated', `treated count exceeds the panel's ${PANEL_UNITS} units`);
  }
  if (form.gapChoice === 'custom') {
    if (form.customGapLow < 0 || form.customGapHigh < form.customGapLow) {
      errors.set('gap', 'custom interval needs 0 <= low <= high');
    }
  } else if (!GAP_LABELS.includes(form.gapChoice as (typeof GAP_LABELS)[number])) {
    errors.set('gap', `unknown gap condition ${form.gapChoice}`);
  }
  if (!Number.isInteger(form.nReps) || form.nReps < 2 || form.nReps > 20000) {
    errors.set('n_reps', 'replications must be between 2 and 20000');
  }
  if (!Number.isInteger(form.seed) || form.seed < 0) {
    errors.set('seed', 'seed must be a nonnegative integer');
  }
  return errors;
}

export function formGap(form: ScenarioForm): GapValue {
  if (form.gapChoice === 'custom') {
    return [form.customGapLow, form.customGapHigh];
  }
  return form.gapChoice;
}

export function toRequest(form: ScenarioForm): ScenarioRequest {
  return {
    effect_primary: form.effectPrimaryPct / 100,
    effect_secondary: form.effectSecondaryPct / 100,
    gap: formGap(form),
    n_treated: form.nTreated,
    phase_in: form.phaseIn,
    ordering: form.ordering,
    model_class: form.modelClass,
    specification: form.specification,
    n_reps: form.nReps,
    seed: form.seed,
  };
}

export function fromRequest(req: ScenarioRequest): ScenarioForm {
  const custom = Array.isArray(req.gap);
  return {
    effectPrimaryPct: req.effect_primary * 100,
    effectSecondaryPct: req.effect_secondary * 100,
    gapChoice: custom ? 'custom' : (req.gap as string),
    customGapLow: custom ? (req.gap as [number, number])[0] : 0,
    customGapHigh: custom ? (req.gap as [number, number])[1] : 1,
    nTreated: req.n_treated,
    ordering: req.ordering,
    phaseIn: req.phase_in,
    modelClass: req.model_class,
    specification: req.specification,
    nReps: req.n_reps,
    seed: req.seed,
  };
}

export function gapLabel(gap: GapValue): string {
  return Array.isArray(gap) ? `${gap[0]}–${gap[1]}y` : gap;
}

// Mean gap in years implied by the request (drives the guidance badge).
export function gapMeanYears(gap: GapValue): number {
  if (Array.isArray(gap)) {
    return (gap[0] + gap[1]) / 2;
  }
  return GAP_MIDPOINTS[gap] ?? NaN;
}
