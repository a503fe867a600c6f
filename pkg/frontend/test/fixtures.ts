// A captured-shape service payload for the Figure-1 default scenario
// (values are arbitrary but the structure matches build_result_payload).

import type { ResultPayload, ScenarioRequest, StoredResult } from '../src/types';

export function figure1Request(): ScenarioRequest {
  return {
    effect_primary: -0.1,
    effect_secondary: -0.1,
    gap: 'C1',
    n_treated: 30,
    phase_in: 'instantaneous',
    ordering: 'random',
    model_class: 'AR',
    specification: 'correct',
    n_reps: 500,
    seed: 0,
  };
}

const PRIMARY = {
  n_reps: 500,
  truth: -1.3044,
  bias: 0.0404,
  std_bias: null,
  rel_bias_pct: -3.0975,
  var_model: 0.14586,
  var_empirical: 0.15948,
  rmse: 0.40124,
  type1: null,
  typeS: 0.012,
  coverage: 0.923,
};

const SECONDARY = {
  n_reps: 500,
  truth: -1.3044,
  bias: -0.0108,
  std_bias: null,
  rel_bias_pct: 0.8305,
  var_model: 0.14642,
  var_empirical: 0.16148,
  rmse: 0.40199,
  type1: null,
  typeS: 0.01,
  coverage: 0.931,
};

function panelsOf(policy: string, summary: typeof PRIMARY) {
  return (
    [
      ['bias', summary.bias],
      ['rel_bias_pct', summary.rel_bias_pct],
      ['var_model', summary.var_model],
      ['var_empirical', summary.var_empirical],
      ['rmse', summary.rmse],
      ['typeS', summary.typeS],
      ['coverage', summary.coverage],
    ] as [string, number][]
  ).map(([metric, value]) => ({ metric, policy, value }));
}

export function figure1Payload(): ResultPayload {
  return {
    scenario: { ...figure1Request() },
    summaries: { primary: { ...PRIMARY }, secondary: { ...SECONDARY } },
    panels: [...panelsOf('primary', PRIMARY), ...panelsOf('secondary', SECONDARY)],
    n_reps: 500,
    n_failed: 0,
    fail_rate: 0,
  };
}

export function figure1Result(): StoredResult {
  return { label: 'AR-correct C1', request: figure1Request(), payload: figure1Payload() };
}
