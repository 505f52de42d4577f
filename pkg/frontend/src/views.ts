// DOM rendering. Every number shown here comes straight from a service
// response; the only client-side arithmetic is display rounding and bar
// widths. Probabilities are shown with two decimals.

import type { ModelMeta } from "./meta.js";
import type { Pin } from "./session.js";
import type { NavigateResponse } from "./types.js";

export function fmt2(x: number): string {
  return x.toFixed(2);
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function clear(container: HTMLElement): void {
  container.textContent = "";
}

/** One bar chart per posterior variable, bins labeled from the scheme. */
export function renderCharts(
  container: HTMLElement,
  posteriors: Record<string, number[]>,
  meta: ModelMeta,
): void {
  clear(container);
  for (const v of meta.variables) {
    const probs = posteriors[v.name];
    if (!probs) continue;
    const chart = el("div", "chart");
    chart.dataset.variable = v.name;
    chart.appendChild(el("h3", "chart-title", v.name));
    const list = el("ul", "bars");
    probs.forEach((p, b) => {
      const row = el("li", "bar-row");
      row.appendChild(el("span", "bin-label", v.labels[b]));
      const track = el("span", "bar-track");
      const fill = el("span", "bar-fill");
      fill.style.width = `${(p * 100).toFixed(1)}%`;
      track.appendChild(fill);
      row.appendChild(track);
      row.appendChild(el("span", "prob", fmt2(p)));
      list.appendChild(row);
    });
    chart.appendChild(list);
    container.appendChild(chart);
  }
}

/** Recommended bin per free input, pins echoed as fixed decisions. */
export function renderRecommendations(
  container: HTMLElement,
  response: NavigateResponse,
  pins: Pin[],
): void {
  clear(container);
  const panel = el("div", "recommendations");
  for (const pin of pins) {
    const row = el("div", "recommendation fixed");
    row.dataset.variable = pin.variable;
    row.appendChild(el("span", "rec-name", pin.variable));
    row.appendChild(el("span", "rec-label", pin.label));
    row.appendChild(el("span", "rec-note", "pinned"));
    panel.appendChild(row);
  }
  for (const [name, rec] of Object.entries(response.recommendations)) {
    const row = el("div", "recommendation");
    row.dataset.variable = name;
    row.dataset.bin = String(rec.bin);
    row.appendChild(el("span", "rec-name", name));
    row.appendChild(el("span", "rec-label", rec.range_label));
    panel.appendChild(row);
  }
  const z = el("div", "target-probability");
  z.appendChild(el("span", "z-caption", "target probability"));
  z.appendChild(el("span", "z-value", fmt2(response.evidence_probability)));
  panel.appendChild(z);
  container.appendChild(panel);
}

/** The explicit banner for targets the model assigns zero probability. */
export function renderInfeasibleBanner(container: HTMLElement, message: string): void {
  clear(container);
  const banner = el("div", "banner infeasible");
  banner.appendChild(el("strong", undefined, "Infeasible target"));
  banner.appendChild(el("span", "banner-message", message));
  container.appendChild(banner);
}

/** Non-fatal service or validation problem, shown without touching state. */
export function renderInlineError(container: HTMLElement, message: string): void {
  clear(container);
  container.appendChild(el("div", "error-inline", message));
}
