import { describe, expect, it } from 'vitest';

import { defaultForm, fromRequest, gapMeanYears, toRequest, validateForm } from '../src/form';

describe('scenario form', () => {
  it('default form is the Figure-1 scenario', () => {
    const req = toRequest(defaultForm());
    expect(req.effect_primary).toBe(-0.1);
    expect(req.effect_secondary).toBe(-0.1);
    expect(req.gap).toBe('C1');
    expect(req.n_treated).toBe(30);
    expect(req.ordering).toBe('random');
    expect(req.model_class).toBe('AR');
    expect(req.specification).toBe('correct');
    expect(req.n_reps).toBe(500);
  });

  it('form -> request -> form round-trip is lossless', () => {
    const form = defaultForm();
    form.effectPrimaryPct = -15;
    form.gapChoice = 'custom';
    form.customGapLow = 0.5;
    form.customGapHigh = 2.5;
    form.nTreated = 7;
    form.specification = 'misspecified';
    form.nReps = 5000;
    form.seed = 42;
    expect(fromRequest(toRequest(form))).toEqual(form);
  });

  it('k above the panel size is rejected client-side, naming the field', () => {
    const form = defaultForm();
    form.nTreated = 51;
    const errors = validateForm(form);
    expect(errors.has('n_treated')).toBe(true);
    expect(errors.get('n_treated')).toContain('50');
  });

  it('custom interval must be ordered and nonnegative', () => {
    const form = defaultForm();
    form.gapChoice = 'custom';
    form.customGapLow = 3;
    form.customGapHigh = 1;
    expect(validateForm(form).has('gap')).toBe(true);
  });

  it('replication bounds mirror the service schema', () => {
    const form = defaultForm();
    form.nReps = 1;
    expect(validateForm(form).has('n_reps')).toBe(true);
    form.nReps = 20001;
    expect(validateForm(form).has('n_reps')).toBe(true);
    form.nReps = 500;
    expect(validateForm(form).size).toBe(0);
  });

  it('gap midpoints drive the x axis', () => {
    expect(gapMeanYears('C1')).toBe(0.5);
    expect(gapMeanYears('C4')).toBe(9.5);
    expect(gapMeanYears([1, 2])).toBe(1.5);
  });
});
