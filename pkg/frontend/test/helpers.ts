// Shared access to the recorded service fixtures.

import { ModelMeta } from "../src/meta.js";
import { Session } from "../src/session.js";
import type {
  BinsDoc,
  ErrorBody,
  InferRequest,
  InferResponse,
  NavigateRequest,
  NavigateResponse,
  SensitivityDoc,
} from "../src/types.js";

import binsFixture from "./fixtures/bins.json";
import sensitivityFixture from "./fixtures/sensitivity.json";
import inferNoPins from "./fixtures/infer_no_pins.json";
import inferFullPins from "./fixtures/infer_full_pins.json";
import inferPartial from "./fixtures/infer_partial.json";
import inferError from "./fixtures/infer_error.json";
import navigateVacuous from "./fixtures/navigate_vacuous.json";
import navigateTarget from "./fixtures/navigate_target.json";
import navigateInfeasible from "./fixtures/navigate_infeasible.json";

export interface PinEntry {
  variable: string;
  entry: number | string;
}

export interface RecordedInfer {
  request: InferRequest;
  status: number;
  body: InferResponse;
  session?: { pins: PinEntry[] };
}

export interface RecordedNavigate {
  request: NavigateRequest;
  status: number;
  body: NavigateResponse;
  session?: {
    pins: PinEntry[];
    target: { variable: string; range: [number, number] };
  };
}

export interface RecordedFailure {
  request: unknown;
  status: number;
  body: ErrorBody;
}

export const fixtures = {
  bins: (binsFixture as { body: unknown }).body as BinsDoc,
  sensitivity: (sensitivityFixture as { body: unknown }).body as SensitivityDoc,
  inferNoPins: inferNoPins as unknown as RecordedInfer,
  inferFullPins: inferFullPins as unknown as RecordedInfer,
  inferPartial: inferPartial as unknown as RecordedInfer,
  inferError: inferError as unknown as RecordedFailure,
  navigateVacuous: navigateVacuous as unknown as RecordedNavigate,
  navigateTarget: navigateTarget as unknown as RecordedNavigate,
  navigateInfeasible: navigateInfeasible as unknown as RecordedFailure,
};

export function makeMeta(): ModelMeta {
  return new ModelMeta(fixtures.bins, fixtures.sensitivity.selected);
}

export function makeSession(): Session {
  return new Session(makeMeta());
}

/** First index of the maximum, the tie rule the service documents. */
export function argmaxFirst(xs: number[]): number {
  let best = 0;
  for (let i = 1; i < xs.length; i++) if (xs[i] > xs[best]) best = i;
  return best;
}
