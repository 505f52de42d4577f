// Client-side session: pins, targets, and the requests they imply.
//
// The session never computes probabilities; it only builds requests, keeps
// the latest accepted response per interaction class, and drops responses
// whose sequence number is stale. Export/import round-trips the pins and
// targets so a restored session issues byte-for-byte identical requests.

import { MetaError, ModelMeta, type VariableMeta } from "./meta.js";
import type {
  ErrorBody,
  InferRequest,
  InferResponse,
  NavigateRequest,
  NavigateResponse,
} from "./types.js";

export class SessionError extends Error {}

export interface Pin {
  variable: string;
  /** what the user entered and what navigate sends as the fixed value */
  entry: number | string;
  bin: number;
  label: string;
}

export interface SessionExport {
  pins: { variable: string; entry: number | string }[];
  targets: { variable: string; range: [number, number] }[];
}

export interface ServiceFailure {
  kind: "infer" | "navigate";
  status: number;
  body: ErrorBody;
}

export type RequestClass = "infer" | "navigate";

export class Session {
  readonly meta: ModelMeta;
  private pinned = new Map<string, Pin>();
  private targeted = new Map<string, [number, number]>();
  private seq: Record<RequestClass, number> = { infer: 0, navigate: 0 };
  private accepted: Record<RequestClass, number> = { infer: 0, navigate: 0 };

  lastInfer: InferResponse | null = null;
  lastNavigate: NavigateResponse | null = null;
  lastFailure: ServiceFailure | null = null;
  pending: Record<RequestClass, boolean> = { infer: false, navigate: false };

  constructor(meta: ModelMeta) {
    this.meta = meta;
  }

  /** Every user-facing validation problem surfaces as a SessionError. */
  private lookup(variable: string): VariableMeta {
    try {
      return this.meta.get(variable);
    } catch (err) {
      if (err instanceof MetaError) throw new SessionError(err.message);
      throw err;
    }
  }

  // -- pins -----------------------------------------------------------------

  get pins(): Pin[] {
    return [...this.pinned.values()];
  }

  isPinned(variable: string): boolean {
    return this.pinned.has(variable);
  }

  /** Pin by physical value or category; re-pinning replaces the old pin. */
  pin(variable: string, entry: number | string): Pin {
    const v = this.lookup(variable);
    if (v.role !== "input") {
      throw new SessionError(`${variable} is an output; set a target instead`);
    }
    let bin: number;
    try {
      bin = this.meta.toBin(variable, entry);
    } catch (err) {
      if (err instanceof MetaError) throw new SessionError(err.message);
      throw err;
    }
    const pin: Pin = { variable, entry, bin, label: v.labels[bin] };
    this.pinned.set(variable, pin);
    return pin;
  }

  /** Pin a bin directly; navigate will send the bin's representative value. */
  pinBin(variable: string, bin: number): Pin {
    const v = this.lookup(variable);
    if (v.role !== "input") {
      throw new SessionError(`${variable} is an output; set a target instead`);
    }
    let entry: number | string;
    try {
      entry = this.meta.representative(variable, bin);
    } catch (err) {
      if (err instanceof MetaError) throw new SessionError(err.message);
      throw err;
    }
    const pin: Pin = { variable, entry, bin, label: v.labels[bin] };
    this.pinned.set(variable, pin);
    return pin;
  }

  unpin(variable: string): void {
    this.pinned.delete(variable);
  }

  // -- targets ----------------------------------------------------------------

  get targets(): { variable: string; range: [number, number] }[] {
    return [...this.targeted.entries()].map(([variable, range]) => ({
      variable,
      range,
    }));
  }

  /**
   * Validate and store a target range. Ranges that cannot intersect any bin
   * are rejected here, before any request is issued.
   */
  setTarget(variable: string, lo: number, hi: number): void {
    const v = this.lookup(variable);
    if (v.role !== "output") {
      throw new SessionError(`${variable} is an input; pin it instead`);
    }
    if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
      throw new SessionError(`${variable} target needs two numbers`);
    }
    if (hi < lo) {
      throw new SessionError(`${variable} target is empty: ${lo} > ${hi}`);
    }
    const [spanLo, spanHi] = this.meta.span(variable);
    if (hi < spanLo || lo > spanHi) {
      throw new SessionError(
        `target [${lo}, ${hi}] lies outside the modeled span of ` +
          `${variable} [${spanLo}, ${spanHi}]`,
      );
    }
    this.targeted.set(variable, [lo, hi]);
  }

  clearTarget(variable: string): void {
    this.targeted.delete(variable);
  }

  // -- requests ----------------------------------------------------------------

  inferRequest(): InferRequest {
    if (this.pinned.size === 0) return {};
    const hard: Record<string, number> = {};
    for (const pin of this.pinned.values()) hard[pin.variable] = pin.bin;
    return { evidence: { hard } };
  }

  navigateRequest(): NavigateRequest {
    if (this.targeted.size === 0) {
      throw new SessionError("no target set");
    }
    const targets: Record<string, [number, number]> = {};
    for (const [name, range] of this.targeted) targets[name] = range;
    if (this.pinned.size === 0) return { targets };
    const fixed: Record<string, number | string> = {};
    for (const pin of this.pinned.values()) fixed[pin.variable] = pin.entry;
    return { targets, fixed };
  }

  // -- response sequencing -------------------------------------------------------

  begin(kind: RequestClass): number {
    this.pending[kind] = true;
    return ++this.seq[kind];
  }

  private fresh(kind: RequestClass, seq: number): boolean {
    if (seq !== this.seq[kind] || seq <= this.accepted[kind]) return false;
    this.accepted[kind] = seq;
    this.pending[kind] = false;
    return true;
  }

  accept(kind: "infer", seq: number, body: InferResponse): boolean;
  accept(kind: "navigate", seq: number, body: NavigateResponse): boolean;
  accept(kind: RequestClass, seq: number, body: unknown): boolean {
    if (!this.fresh(kind, seq)) return false;
    if (kind === "infer") this.lastInfer = body as InferResponse;
    else this.lastNavigate = body as NavigateResponse;
    this.lastFailure = null;
    return true;
  }

  /** Record a service failure; pins and targets are deliberately untouched. */
  fail(kind: RequestClass, seq: number, status: number, body: ErrorBody): boolean {
    if (!this.fresh(kind, seq)) return false;
    this.lastFailure = { kind, status, body };
    return true;
  }

  get infeasible(): boolean {
    return this.lastFailure?.body.error.code === "inconsistent_evidence";
  }

  // -- persistence ------------------------------------------------------------------

  export(): SessionExport {
    return {
      pins: this.pins.map(({ variable, entry }) => ({ variable, entry })),
      targets: this.targets,
    };
  }

  /** Rebuild pins and targets through the same validation as live input. */
  import(doc: SessionExport): void {
    this.pinned.clear();
    this.targeted.clear();
    for (const p of doc.pins) this.pin(p.variable, p.entry);
    for (const t of doc.targets) this.setTarget(t.variable, t.range[0], t.range[1]);
  }
}
