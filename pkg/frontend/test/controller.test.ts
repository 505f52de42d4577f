// Controller behavior against a scripted client: exact requests on the wire,
// stale responses discarded, failures rendered without losing session state.

import { beforeEach, describe, expect, it } from "vitest";

import type { ServiceClient, ServiceResult } from "../src/client.js";
import { Controller, type Panels } from "../src/controller.js";
import { SessionError } from "../src/session.js";
import type {
  BinsDoc,
  InferRequest,
  InferResponse,
  NavigateRequest,
  NavigateResponse,
  SensitivityDoc,
} from "../src/types.js";
import { fixtures, makeSession } from "./helpers.js";

type InferResult = ServiceResult<InferResponse>;
type NavigateResult = ServiceResult<NavigateResponse>;

function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

/**
 * Scripted service double. Responses come from a queue per route; each call
 * is logged so tests can assert exactly what went on the wire.
 */
class ScriptedClient implements ServiceClient {
  inferCalls: InferRequest[] = [];
  navigateCalls: NavigateRequest[] = [];
  inferQueue: Promise<InferResult>[] = [];
  navigateQueue: Promise<NavigateResult>[] = [];

  bins(): Promise<BinsDoc> {
    return Promise.resolve(fixtures.bins);
  }

  sensitivity(): Promise<SensitivityDoc> {
    return Promise.resolve(fixtures.sensitivity);
  }

  infer(req: InferRequest): Promise<InferResult> {
    this.inferCalls.push(JSON.parse(JSON.stringify(req)));
    const next = this.inferQueue.shift();
    if (!next) throw new Error("unexpected infer call");
    return next;
  }

  navigate(req: NavigateRequest): Promise<NavigateResult> {
    this.navigateCalls.push(JSON.parse(JSON.stringify(req)));
    const next = this.navigateQueue.shift();
    if (!next) throw new Error("unexpected navigate call");
    return next;
  }

  queueInfer(recorded: { status: number; body: unknown }): void {
    this.inferQueue.push(
      Promise.resolve({
        status: recorded.status,
        body: recorded.body,
      } as InferResult),
    );
  }

  queueNavigate(recorded: { status: number; body: unknown }): void {
    this.navigateQueue.push(
      Promise.resolve({
        status: recorded.status,
        body: recorded.body,
      } as NavigateResult),
    );
  }
}

let client: ScriptedClient;
let panels: Panels;
let controller: Controller;

beforeEach(() => {
  document.body.innerHTML = "";
  client = new ScriptedClient();
  panels = {
    charts: document.createElement("div"),
    recommendations: document.createElement("div"),
    alerts: document.createElement("div"),
  };
  for (const panel of Object.values(panels)) document.body.appendChild(panel);
  controller = new Controller(makeSession(), client, panels);
});

function chartVariables(): string[] {
  return [...panels.charts.querySelectorAll<HTMLElement>(".chart")].map(
    (c) => c.dataset.variable ?? "",
  );
}

describe("pinning through the controller", () => {
  it("issues the recorded requests pin by pin and charts the response", async () => {
    const pins = fixtures.inferPartial.session?.pins ?? [];
    client.queueInfer(fixtures.inferNoPins);
    client.queueInfer(fixtures.inferPartial);
    await controller.pinEvidence(pins[0].variable, pins[0].entry);
    await controller.pinEvidence(pins[1].variable, pins[1].entry);

    expect(client.inferCalls).toHaveLength(2);
    expect(client.inferCalls[1]).toEqual(fixtures.inferPartial.request);
    expect(chartVariables().sort()).toEqual(
      Object.keys(fixtures.inferPartial.body.posteriors).sort(),
    );
  });

  it("surfaces a service rejection inline and keeps the pins", async () => {
    client.queueInfer(fixtures.inferNoPins);
    await controller.pinEvidence("Area_PV", 5.0);
    client.queueInfer(fixtures.inferError);
    await controller.refreshInfer();

    const note = panels.alerts.querySelector(".error-inline");
    expect(note).not.toBeNull();
    expect(note!.textContent).toBe(fixtures.inferError.body.error.message);
    expect(controller.session.pins).toHaveLength(1);
  });

  it("rejects invalid pins before any request is issued", async () => {
    await expect(controller.pinEvidence("Area_PV", -10)).rejects.toThrow(
      SessionError,
    );
    expect(client.inferCalls).toHaveLength(0);
  });
});

describe("navigation through the controller", () => {
  const recorded = fixtures.navigateTarget;

  async function pinRecordedEvidence(): Promise<void> {
    for (const pin of recorded.session?.pins ?? []) {
      client.queueInfer(fixtures.inferPartial);
      await controller.pinEvidence(pin.variable, pin.entry);
    }
  }

  it("sends pins as fixed values alongside the target", async () => {
    await pinRecordedEvidence();
    const target = recorded.session?.target;
    if (!target) throw new Error("fixture is missing its session extras");
    client.queueNavigate(recorded);
    await controller.setTarget(
      target.variable,
      target.range[0],
      target.range[1],
    );

    expect(client.navigateCalls).toHaveLength(1);
    expect(client.navigateCalls[0]).toEqual(recorded.request);
    const labels = [
      ...panels.recommendations.querySelectorAll(
        ".recommendation:not(.fixed) .rec-label",
      ),
    ].map((n) => n.textContent);
    expect(labels).toEqual(
      Object.values(recorded.body.recommendations).map((r) => r.range_label),
    );
  });

  it("never calls the service for a target outside the modeled span", async () => {
    await expect(controller.setTarget("beng3", 60, 80)).rejects.toThrow(
      /outside the modeled span/,
    );
    expect(client.navigateCalls).toHaveLength(0);
  });

  it("shows the infeasible banner on zero-probability targets and keeps pins", async () => {
    await pinRecordedEvidence();
    client.queueNavigate(fixtures.navigateInfeasible);
    await controller.setTarget("beng3", 10, 28);

    const banner = panels.alerts.querySelector(".banner.infeasible");
    expect(banner).not.toBeNull();
    expect(banner!.textContent).toContain("Infeasible target");
    expect(banner!.textContent).toContain(
      fixtures.navigateInfeasible.body.error.message,
    );
    expect(controller.session.pins).toHaveLength(2);
    expect(controller.session.infeasible).toBe(true);
  });

  it("clears the recommendation panel when the target is cleared", async () => {
    client.queueNavigate(fixtures.navigateVacuous);
    await controller.setTarget("beng3", 10, 28);
    expect(
      panels.recommendations.querySelectorAll(".recommendation").length,
    ).toBeGreaterThan(0);

    client.queueInfer(fixtures.inferNoPins);
    await controller.clearTarget("beng3");
    expect(panels.recommendations.children).toHaveLength(0);
  });
});

describe("response ordering", () => {
  it("renders only the latest response when an older one resolves late", async () => {
    const slow = deferred<InferResult>();
    const fast = deferred<InferResult>();
    client.inferQueue.push(slow.promise, fast.promise);

    const first = controller.refreshInfer();
    const second = controller.refreshInfer();

    fast.resolve({ status: 200, body: fixtures.inferFullPins.body });
    await second;
    expect(chartVariables().sort()).toEqual(
      Object.keys(fixtures.inferFullPins.body.posteriors).sort(),
    );

    slow.resolve({ status: 200, body: fixtures.inferNoPins.body });
    await first;
    expect(chartVariables().sort()).toEqual(
      Object.keys(fixtures.inferFullPins.body.posteriors).sort(),
    );
  });

  it("drops a stale failure after a newer success", async () => {
    const slow = deferred<NavigateResult>();
    const fast = deferred<NavigateResult>();
    client.navigateQueue.push(slow.promise, fast.promise);

    controller.session.setTarget("beng3", 10, 28);
    const first = controller.refreshNavigate();
    const second = controller.refreshNavigate();

    fast.resolve({ status: 200, body: fixtures.navigateVacuous.body });
    await second;
    slow.resolve({
      status: 409,
      body: fixtures.navigateInfeasible.body,
    } as NavigateResult);
    await first;

    expect(panels.alerts.querySelector(".banner.infeasible")).toBeNull();
    expect(controller.session.infeasible).toBe(false);
  });
});
