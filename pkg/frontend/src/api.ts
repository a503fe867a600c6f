// Thin client for the scenario service. The UI computes no statistics:
// everything rendered comes out of these payloads.

import type { JobStatus, ResultPayload, ScenarioRequest, Thresholds } from './types.js';

export class ApiValidationError extends Error {
  fields: { field: string; message: string }[];

  constructor(fields: { field: string; message: string }[]) {
    super(fields.map((f) => `${f.field}: ${f.message}`).join('; '));
    this.fields = fields;
  }
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async submitScenario(req: ScenarioRequest): Promise<string> {
    const resp = await fetch(this.url('/api/scenarios'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(req),
    });
    if (resp.status === 400) {
      const body = await resp.json();
      throw new ApiValidationError(body.detail ?? [{ field: 'request', message: 'invalid' }]);
    }
    if (!resp.ok) {
      throw new Error(`submit failed: HTTP ${resp.status}`);
    }
    const body = await resp.json();
    return body.job_id;
  }

  async jobStatus(jobId: string): Promise<JobStatus> {
    const resp = await fetch(this.url(`/api/scenarios/${jobId}`));
    if (!resp.ok) {
      throw new Error(`status failed: HTTP ${resp.status}`);
    }
    return resp.json();
  }

  async jobResults(jobId: string): Promise<ResultPayload> {
    const resp = await fetch(this.url(`/api/scenarios/${jobId}/results`));
    if (!resp.ok) {
      throw new Error(`results failed: HTTP ${resp.status}`);
    }
    return resp.json();
  }

  async thresholds(): Promise<Thresholds> {
    const resp = await fetch(this.url('/api/reference/thresholds'));
    if (!resp.ok) {
      throw new Error(`thresholds failed: HTTP ${resp.status}`);
    }
    return resp.json();
  }

  // Poll until the job finishes; onProgress fires on every status check.
  async waitForResults(
    jobId: string,
    onProgress: (status: JobStatus) => void,
    intervalMs = 400,
  ): Promise<ResultPayload> {
    for (;;) {
      const status = await this.jobStatus(jobId);
      onProgress(status);
      if (status.status === 'done') {
        return this.jobResults(jobId);
      }
      if (status.status === 'failed') {
        throw new Error('simulation failed on the server');
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
