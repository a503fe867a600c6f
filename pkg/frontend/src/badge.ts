// Study-design guidance: is the planned enactment gap long enough for the
// chosen model class?

import { gapMeanYears } from './form.js';
import type { GapValue, Thresholds } from './types.js';

export interface GuidanceBadge {
  level: 'low' | 'risk';
  text: string;
}

export function guidanceBadge(
  modelClass: 'AR' | 'DID',
  gap: GapValue,
  thresholds: Thresholds,
): GuidanceBadge {
  const [minLow] = modelClass === 'AR' ? thresholds.ar_min_gap_years : thresholds.did_min_gap_years;
  const mean = gapMeanYears(gap);
  if (Number.isFinite(mean) && mean >= minLow) {
    return { level: 'low', text: 'low risk' };
  }
  return {
    level: 'risk',
    text: 'bias risk: control for co-occurring policies and expect inflated variance',
  };
}
