// Variable metadata assembled from /bins and /sensitivity. The service is
// the single source of truth; this module only reshapes it for lookup and
// converts physical entries to bin indices the same way the service does.

import type { BinsDoc, ContinuousBins, VariableBins } from "./types.js";

export type Role = "input" | "output";

export interface VariableMeta {
  name: string;
  role: Role;
  kind: "continuous" | "categorical";
  labels: string[];
  nBins: number;
  edges?: number[];
  categories?: string[];
  unit?: string;
}

export class MetaError extends Error {}

function isContinuous(v: VariableBins): v is ContinuousBins {
  return "edges" in v;
}

/** Rightmost bin whose lower edge is at or below the value, clamped. */
export function snapToBin(edges: number[], value: number): number {
  let idx = -1;
  for (let i = 0; i < edges.length; i++) {
    if (edges[i] <= value) idx = i;
    else break;
  }
  return Math.min(Math.max(idx, 0), edges.length - 2);
}

export class ModelMeta {
  private byName = new Map<string, VariableMeta>();

  constructor(bins: BinsDoc, selected: string[]) {
    const inputs = new Set(selected);
    for (const v of bins.variables) {
      const role: Role = inputs.has(v.variable) ? "input" : "output";
      if (isContinuous(v)) {
        this.byName.set(v.variable, {
          name: v.variable,
          role,
          kind: "continuous",
          labels: v.labels,
          nBins: v.edges.length - 1,
          edges: v.edges,
          unit: v.unit,
        });
      } else {
        this.byName.set(v.variable, {
          name: v.variable,
          role,
          kind: "categorical",
          labels: v.categories,
          nBins: v.categories.length,
          categories: v.categories,
        });
      }
    }
  }

  get variables(): VariableMeta[] {
    return [...this.byName.values()];
  }

  get inputs(): VariableMeta[] {
    return this.variables.filter((v) => v.role === "input");
  }

  get outputs(): VariableMeta[] {
    return this.variables.filter((v) => v.role === "output");
  }

  get(name: string): VariableMeta {
    const v = this.byName.get(name);
    if (!v) throw new MetaError(`unknown variable '${name}'`);
    return v;
  }

  /** Physical entry -> bin index, rejecting values the service would reject. */
  toBin(name: string, entry: number | string): number {
    const v = this.get(name);
    if (v.kind === "categorical") {
      const bin = v.categories!.indexOf(String(entry));
      if (bin < 0) {
        throw new MetaError(
          `'${entry}' is not a category of ${name} (${v.categories!.join(", ")})`,
        );
      }
      return bin;
    }
    if (typeof entry !== "number" || !Number.isFinite(entry)) {
      throw new MetaError(`${name} needs a numeric value`);
    }
    const edges = v.edges!;
    if (entry < edges[0] || entry > edges[edges.length - 1]) {
      throw new MetaError(
        `${entry} lies outside the modeled span of ${name} ` +
          `[${edges[0]}, ${edges[edges.length - 1]}]`,
      );
    }
    return snapToBin(edges, entry);
  }

  /** Bin index -> the physical value sent to the service for a fixed input. */
  representative(name: string, bin: number): number | string {
    const v = this.get(name);
    if (bin < 0 || bin >= v.nBins) {
      throw new MetaError(`${name} has no bin ${bin}`);
    }
    if (v.kind === "categorical") return v.categories![bin];
    return (v.edges![bin] + v.edges![bin + 1]) / 2;
  }

  span(name: string): [number, number] {
    const v = this.get(name);
    if (v.kind !== "continuous") {
      throw new MetaError(`${name} has no numeric span`);
    }
    return [v.edges![0], v.edges![v.edges!.length - 1]];
  }
}
