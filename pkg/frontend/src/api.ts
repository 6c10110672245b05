// Typed client for the degradation/super-resolution HTTP service.
// The panel never computes numerics locally: every displayed value comes
// from these endpoints.

export interface SlotDescriptor {
  index: number; // 1-based vector slot
  name: string;
  group: string;
  kind: 'scalar' | 'flag' | 'onehot';
  stage: number;
  range?: [number, number];
  choice?: string;
  group_indices?: number[];
}

export interface SchemaResponse {
  vector_length: number;
  slots: SlotDescriptor[];
  levels: string[];
  presets: Record<string, number[]>;
}

export interface PredictResponse {
  vector: number[];
  params: Record<string, unknown>;
}

export interface SuperResolveResponse {
  image: string; // base64 PNG
  v_hat: number[];
  a: number[];
}

export interface DegradeResponse {
  image: string; // base64 PNG, 1/4 size
  trace: Array<{ op: string; detail: Record<string, unknown>; out_dims: number[] }>;
  params: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly field: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(`${base}${path}`, init);
  const body = await response.json();
  if (!response.ok) {
    const err = (body as { error?: { field?: string; message?: string } }).error ?? {};
    throw new ApiError(response.status, err.field ?? 'body', err.message ?? 'request failed');
  }
  return body as T;
}

function post<T>(base: string, path: string, payload: unknown): Promise<T> {
  return request<T>(base, path, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(payload),
  });
}

export class ServiceClient {
  constructor(readonly base: string = '') {}

  getSchema(): Promise<SchemaResponse> {
    return request<SchemaResponse>(this.base, '/schema');
  }

  predict(imageB64: string): Promise<PredictResponse> {
    return post<PredictResponse>(this.base, '/predict', { image: imageB64 });
  }

  superResolve(imageB64: string, overrideVector?: number[]): Promise<SuperResolveResponse> {
    const payload: Record<string, unknown> = { image: imageB64 };
    if (overrideVector !== undefined) payload.override_vector = overrideVector;
    return post<SuperResolveResponse>(this.base, '/superresolve', payload);
  }

  degrade(imageB64: string, vector: number[], seed = 0): Promise<DegradeResponse> {
    return post<DegradeResponse>(this.base, '/degrade', { image: imageB64, vector, seed });
  }
}
