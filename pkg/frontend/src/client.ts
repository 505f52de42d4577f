// Thin fetch wrapper over the navigator service. No retries, no caching:
// request discipline (one in flight per class) lives in the controller.

import type {
  BinsDoc,
  ErrorBody,
  InferRequest,
  InferResponse,
  NavigateRequest,
  NavigateResponse,
  SensitivityDoc,
} from "./types.js";

export interface ServiceResult<T> {
  status: number;
  body: T | ErrorBody;
}

export interface ServiceClient {
  bins(): Promise<BinsDoc>;
  sensitivity(): Promise<SensitivityDoc>;
  infer(req: InferRequest, signal?: AbortSignal): Promise<ServiceResult<InferResponse>>;
  navigate(
    req: NavigateRequest,
    signal?: AbortSignal,
  ): Promise<ServiceResult<NavigateResponse>>;
}

export class HttpServiceClient implements ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed with status ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  private async postJson<T>(
    path: string,
    req: unknown,
    signal?: AbortSignal,
  ): Promise<ServiceResult<T>> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    return { status: resp.status, body: await resp.json() };
  }

  bins(): Promise<BinsDoc> {
    return this.getJson<BinsDoc>("/bins");
  }

  sensitivity(): Promise<SensitivityDoc> {
    return this.getJson<SensitivityDoc>("/sensitivity");
  }

  infer(req: InferRequest, signal?: AbortSignal) {
    return this.postJson<InferResponse>("/infer", req, signal);
  }

  navigate(req: NavigateRequest, signal?: AbortSignal) {
    return this.postJson<NavigateResponse>("/navigate", req, signal);
  }
}
