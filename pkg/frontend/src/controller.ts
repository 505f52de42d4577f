// Wires session, client, and views together. One in-flight request per
// interaction class: a newer interaction aborts the older request, and the
// session's sequence numbers drop anything stale that still lands.

import type { ServiceClient } from "./client.js";
import type { RequestClass, Session } from "./session.js";
import { isErrorBody } from "./types.js";
import {
  clear,
  renderCharts,
  renderInfeasibleBanner,
  renderInlineError,
  renderRecommendations,
} from "./views.js";

export interface Panels {
  charts: HTMLElement;
  recommendations: HTMLElement;
  alerts: HTMLElement;
}

export class Controller {
  private inflight: Partial<Record<RequestClass, AbortController>> = {};

  constructor(
    readonly session: Session,
    private client: ServiceClient,
    private panels: Panels,
  ) {}

  /** Pin and refresh: posteriors always, recommendations if a target is set. */
  async pinEvidence(variable: string, entry: number | string): Promise<void> {
    this.session.pin(variable, entry);
    await this.refresh();
  }

  async unpin(variable: string): Promise<void> {
    this.session.unpin(variable);
    await this.refresh();
  }

  /** Validate locally; an unsatisfiable range never reaches the service. */
  async setTarget(variable: string, lo: number, hi: number): Promise<void> {
    this.session.setTarget(variable, lo, hi);
    await this.refreshNavigate();
  }

  async clearTarget(variable: string): Promise<void> {
    this.session.clearTarget(variable);
    clear(this.panels.recommendations);
    await this.refreshInfer();
  }

  async refresh(): Promise<void> {
    const jobs = [this.refreshInfer()];
    if (this.session.targets.length > 0) jobs.push(this.refreshNavigate());
    await Promise.all(jobs);
  }

  async refreshInfer(): Promise<void> {
    const seq = this.session.begin("infer");
    const signal = this.retarget("infer");
    let result;
    try {
      result = await this.client.infer(this.session.inferRequest(), signal);
    } catch (err) {
      if (isAbort(err)) return;
      throw err;
    }
    if (isErrorBody(result.body)) {
      if (this.session.fail("infer", seq, result.status, result.body)) {
        renderInlineError(this.panels.alerts, result.body.error.message);
      }
      return;
    }
    if (!this.session.accept("infer", seq, result.body)) return;
    clear(this.panels.alerts);
    renderCharts(this.panels.charts, result.body.posteriors, this.session.meta);
  }

  async refreshNavigate(): Promise<void> {
    const seq = this.session.begin("navigate");
    const signal = this.retarget("navigate");
    let result;
    try {
      result = await this.client.navigate(this.session.navigateRequest(), signal);
    } catch (err) {
      if (isAbort(err)) return;
      throw err;
    }
    if (isErrorBody(result.body)) {
      if (!this.session.fail("navigate", seq, result.status, result.body)) return;
      if (this.session.infeasible) {
        renderInfeasibleBanner(this.panels.alerts, result.body.error.message);
      } else {
        renderInlineError(this.panels.alerts, result.body.error.message);
      }
      return;
    }
    if (!this.session.accept("navigate", seq, result.body)) return;
    clear(this.panels.alerts);
    renderCharts(this.panels.charts, result.body.posteriors, this.session.meta);
    renderRecommendations(this.panels.recommendations, result.body, this.session.pins);
  }

  private retarget(kind: RequestClass): AbortSignal {
    this.inflight[kind]?.abort();
    const controller = new AbortController();
    this.inflight[kind] = controller;
    return controller.signal;
  }
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
