// JSON shapes of the navigator service API, mirrored verbatim.

export interface ContinuousBins {
  variable: string;
  edges: number[];
  labels: string[];
  unit?: string;
}

export interface CategoricalBins {
  variable: string;
  categories: string[];
}

export type VariableBins = ContinuousBins | CategoricalBins;

export interface BinsDoc {
  variables: VariableBins[];
}

export interface SensitivityDoc {
  selected: string[];
  outputs: string[];
  explained_share: Record<string, number>;
  n_base: number;
  ranking: unknown[];
}

export interface InferRequest {
  evidence?: {
    hard?: Record<string, number>;
    soft?: Record<string, number[]>;
  };
  query?: string[];
}

export interface InferResponse {
  posteriors: Record<string, number[]>;
  evidence_probability: number;
}

export interface NavigateRequest {
  targets: Record<string, [number, number]>;
  fixed?: Record<string, number | string>;
}

export interface Recommendation {
  bin: number;
  range_label: string;
}

export interface NavigateResponse {
  posteriors: Record<string, number[]>;
  recommendations: Record<string, Recommendation>;
  targets_resolved: Record<string, number[]>;
  evidence_probability: number;
}

export interface ErrorBody {
  error: {
    code: string;
    message: string;
  };
}

export function isErrorBody(body: unknown): body is ErrorBody {
  return (
    typeof body === "object" &&
    body !== null &&
    "error" in body &&
    typeof (body as ErrorBody).error?.message === "string"
  );
}
