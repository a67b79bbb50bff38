// Run history and run-to-run comparison. History lives in sessionStorage
// (injected as a plain get/set interface so tests can fake it); entries
// are immutable snapshots of finished jobs.

import type { ProfileJson, ReportGroupJson, ReportJson } from "./types.js";

export interface RunHistoryEntry {
  jobId: string;
  specDigest: string;
  budget: string;
  profile: ProfileJson;
  report: ReportJson;
  finishedAt: string;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class RunHistory {
  constructor(
    private readonly storage: StorageLike,
    private readonly key: string = "ctrlgame.history",
  ) {}

  list(): RunHistoryEntry[] {
    const raw = this.storage.getItem(this.key);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as RunHistoryEntry[];
    } catch {
      return [];
    }
  }

  add(entry: RunHistoryEntry): RunHistoryEntry[] {
    const entries = [...this.list(), entry];
    this.storage.setItem(this.key, JSON.stringify(entries));
    return entries;
  }
}

// ── diffing ────────────────────────────────────────────────────────

export interface GroupDiff {
  index: number;
  casesA: number[];
  casesB: number[];
  /** controls present in B's first combo but not A's */
  added: string[];
  /** controls present in A's first combo but not B's */
  removed: string[];
  /** exact decimal string, B minus A; null when either side is infeasible */
  costDelta: string | null;
}

export interface RunDiff {
  identical: boolean;
  budgetDelta: string;
  groups: GroupDiff[];
}

/** Exact difference of two decimal strings (scale fixed at 2). */
export function decimalDelta(a: string, b: string): string {
  const cents = (text: string): bigint => {
    const [whole, frac = ""] = text.split(".");
    const scaled = `${whole || "0"}${frac.padEnd(2, "0").slice(0, 2)}`;
    return BigInt(scaled);
  };
  let delta = cents(b) - cents(a);
  const sign = delta < 0n ? "-" : "";
  if (delta < 0n) delta = -delta;
  const whole = delta / 100n;
  const frac = delta % 100n;
  if (frac === 0n) return `${sign}${whole}`;
  return `${sign}${whole}.${frac.toString().padStart(2, "0").replace(/0+$/, "")}`;
}

function primaryCombo(group: ReportGroupJson | undefined): string[] {
  return group?.combos[0] ?? [];
}

export function diffRuns(a: RunHistoryEntry, b: RunHistoryEntry): RunDiff {
  const count = Math.max(a.report.groups.length, b.report.groups.length);
  const groups: GroupDiff[] = [];
  for (let i = 0; i < count; i++) {
    const ga = a.report.groups[i];
    const gb = b.report.groups[i];
    const comboA = new Set(primaryCombo(ga));
    const comboB = new Set(primaryCombo(gb));
    const added = [...comboB].filter((c) => !comboA.has(c)).sort();
    const removed = [...comboA].filter((c) => !comboB.has(c)).sort();
    const costDelta =
      ga?.cost != null && gb?.cost != null ? decimalDelta(ga.cost, gb.cost) : null;
    groups.push({
      index: i,
      casesA: ga?.cases ?? [],
      casesB: gb?.cases ?? [],
      added,
      removed,
      costDelta,
    });
  }
  const identical =
    a.report.groups.length === b.report.groups.length &&
    groups.every(
      (g) => g.added.length === 0 && g.removed.length === 0 && (g.costDelta === "0" || g.costDelta === null),
    );
  return {
    identical,
    budgetDelta: decimalDelta(a.budget, b.budget),
    groups,
  };
}
