// Browser entry point: bootstrap metadata, build the controls, hand the
// interaction flow to the controller. Serve the trained artifacts with
// `mapnav serve` and open index.html with ?service=http://host:port
// (defaults to same origin).

import { HttpServiceClient } from "./client.js";
import { Controller } from "./controller.js";
import { ModelMeta, type VariableMeta } from "./meta.js";
import { Session, SessionError, type SessionExport } from "./session.js";
import { renderInlineError } from "./views.js";

function div(className: string, parent: HTMLElement): HTMLElement {
  const node = document.createElement("div");
  node.className = className;
  parent.appendChild(node);
  return node;
}

function button(text: string, parent: HTMLElement, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = text;
  b.addEventListener("click", onClick);
  parent.appendChild(b);
  return b;
}

function buildPinRow(
  v: VariableMeta,
  controller: Controller,
  alerts: HTMLElement,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "control pin-control";
  row.dataset.variable = v.name;
  const name = document.createElement("label");
  name.textContent = v.name + (v.unit ? ` (${v.unit})` : "");
  row.appendChild(name);

  let read: () => number | string;
  if (v.kind === "categorical") {
    const select = document.createElement("select");
    for (const c of v.categories!) {
      const opt = document.createElement("option");
      opt.value = c;
      opt.textContent = c;
      select.appendChild(opt);
    }
    row.appendChild(select);
    read = () => select.value;
  } else {
    const input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.placeholder = `${v.edges![0]} .. ${v.edges![v.edges!.length - 1]}`;
    row.appendChild(input);
    read = () => Number(input.value);
  }

  const snapped = document.createElement("span");
  snapped.className = "snapped-bin";
  const run = (action: () => Promise<void>) => {
    action()
      .then(() => {
        const pin = controller.session.pins.find((p) => p.variable === v.name);
        snapped.textContent = pin ? `→ ${pin.label}` : "";
      })
      .catch((err) => {
        if (err instanceof SessionError) renderInlineError(alerts, err.message);
        else renderInlineError(alerts, `service unreachable: ${err}`);
      });
  };
  button("pin", row, () => run(() => controller.pinEvidence(v.name, read())));
  button("free", row, () => run(() => controller.unpin(v.name)));
  row.appendChild(snapped);
  return row;
}

function buildTargetRow(
  v: VariableMeta,
  controller: Controller,
  alerts: HTMLElement,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "control target-control";
  row.dataset.variable = v.name;
  const name = document.createElement("label");
  const [lo, hi] = [v.edges![0], v.edges![v.edges!.length - 1]];
  name.textContent = `${v.name} span [${lo.toPrecision(4)}, ${hi.toPrecision(4)}]`;
  row.appendChild(name);
  const loIn = document.createElement("input");
  const hiIn = document.createElement("input");
  for (const input of [loIn, hiIn]) {
    input.type = "number";
    input.step = "any";
    row.appendChild(input);
  }
  const run = (action: () => Promise<void>) => {
    action().catch((err) => {
      if (err instanceof SessionError) renderInlineError(alerts, err.message);
      else renderInlineError(alerts, `service unreachable: ${err}`);
    });
  };
  button("set target", row, () =>
    run(() => controller.setTarget(v.name, Number(loIn.value), Number(hiIn.value))),
  );
  button("clear", row, () => run(() => controller.clearTarget(v.name)));
  return row;
}

function buildSessionBox(controller: Controller, alerts: HTMLElement, parent: HTMLElement): void {
  const box = div("session-box", parent);
  const area = document.createElement("textarea");
  area.rows = 4;
  box.appendChild(area);
  button("export session", box, () => {
    area.value = JSON.stringify(controller.session.export(), null, 1);
  });
  button("import session", box, () => {
    try {
      controller.session.import(JSON.parse(area.value) as SessionExport);
      void controller.refresh();
    } catch (err) {
      renderInlineError(alerts, `import failed: ${err}`);
    }
  });
}

export async function bootstrap(root: HTMLElement): Promise<Controller> {
  const params = new URLSearchParams(window.location.search);
  const client = new HttpServiceClient(params.get("service") ?? "");

  const [bins, sensitivity] = await Promise.all([client.bins(), client.sensitivity()]);
  const meta = new ModelMeta(bins, sensitivity.selected);
  const session = new Session(meta);

  root.textContent = "";
  const alerts = div("alerts", root);
  const controls = div("controls", root);
  const pinsPanel = div("pin-panel", controls);
  pinsPanel.appendChild(Object.assign(document.createElement("h2"), { textContent: "decisions" }));
  const targetPanel = div("target-panel", controls);
  targetPanel.appendChild(
    Object.assign(document.createElement("h2"), { textContent: "targets" }),
  );
  const charts = div("charts", root);
  const recommendations = div("recommendation-panel", root);

  const controller = new Controller(session, client, {
    charts,
    recommendations,
    alerts,
  });
  for (const v of meta.inputs) pinsPanel.appendChild(buildPinRow(v, controller, alerts));
  for (const v of meta.outputs) {
    if (v.kind === "continuous") {
      targetPanel.appendChild(buildTargetRow(v, controller, alerts));
    }
  }
  buildSessionBox(controller, alerts, root);

  await controller.refreshInfer();
  return controller;
}

const mount = document.getElementById("app");
if (mount) {
  bootstrap(mount).catch((err) => {
    mount.textContent = `failed to reach the navigator service: ${err}`;
  });
}
