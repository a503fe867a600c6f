// Display formatting. Every number on screen comes through here, so tests
// can compare rendered strings against service payload fields directly.

export function formatMetric(metric: string, value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return '—';
  }
  switch (metric) {
    case 'rel_bias_pct':
      return `${value.toFixed(1)}%`;
    case 'coverage':
    case 'type1':
    case 'typeS':
      return value.toFixed(3);
    case 'bias':
    case 'std_bias':
    case 'rmse':
      return value.toFixed(4);
    case 'var_model':
    case 'var_empirical':
      return value.toFixed(4);
    default:
      return value.toPrecision(4);
  }
}

export function formatDelta(metric: string, a: number, b: number): string {
  const d = b - a;
  const sign = d >= 0 ? '+' : '';
  return `${sign}${formatMetric(metric, d)}`;
}

export const METRIC_TITLES: Record<string, string> = {
  bias: 'Bias (rate scale)',
  std_bias: 'Bias (effect-size scale)',
  rel_bias_pct: 'Relative bias',
  var_model: 'Variance',
  var_empirical: 'Variance (empirical)',
  rmse: 'RMSE',
  type1: 'Type I error rate',
  typeS: 'Type S error rate',
  coverage: '95% CI coverage',
};

// Panels shown for a non-null scenario, in display order.
export const NON_NULL_METRICS = ['bias', 'rel_bias_pct', 'var_model', 'rmse', 'typeS', 'coverage'];
export const NULL_METRICS = ['bias', 'std_bias', 'var_model', 'rmse', 'type1', 'coverage'];
