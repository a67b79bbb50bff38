// The acceptance flow against a live service: upload the sensors fixture,
// compose a two-tier profile, submit with a budget, poll to completion,
// render the grouped report from its JSON, then re-run with a different
// budget and diff the two history entries.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { RunHistory, diffRuns, type RunHistoryEntry, type StorageLike } from "../src/history.js";
import { emptyDraft, addTier, canSubmit, setBudget, toProfileJson, toggleTarget } from "../src/profile.js";
import { renderReport } from "../src/render.js";

const PORT = 8461;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = resolve(__dirname, "..", "..");
const FIXTURE = join(REPO_ROOT, "fixtures", "ravenclaw_sensors.csv");

let service: ChildProcess;
let dataDir: string;

function fakeStorage(): StorageLike {
  const map = new Map<string, string>();
  return { getItem: (k) => map.get(k) ?? null, setItem: (k, v) => void map.set(k, v) };
}

async function waitForHealth(timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("service never became healthy");
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "ctrlgame-ui-"));
  service = spawn(
    "python3",
    ["-m", "ctrlgame.service", "--port", String(PORT), "--data-dir", dataDir],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await waitForHealth();
}, 30000);

afterAll(() => {
  service?.kill();
  rmSync(dataDir, { recursive: true, force: true });
});

describe("live service flow", () => {
  const api = new ApiClient(BASE);
  const history = new RunHistory(fakeStorage());

  async function playOnce(budget: string): Promise<RunHistoryEntry> {
    const spec = await api.uploadSpec(readFileSync(FIXTURE, "utf8"), "text/csv");

    // two ordered attacker objectives composed exactly as the UI does
    let draft = emptyDraft();
    draft = toggleTarget(draft, 0, { asset: "Sensors", objective: "C" });
    draft = toggleTarget(draft, 0, { asset: "Sensors", objective: "I" });
    draft = addTier(draft);
    draft = toggleTarget(draft, 1, { asset: "Sensors", objective: "A" });
    draft = setBudget(draft, budget);
    expect(canSubmit(draft)).toBe(true);

    const record = await api.createJob(spec.spec_id, draft.budget, toProfileJson(draft));
    expect(record.state).toBe("queued");
    expect(record.progress.total).toBe(2);
    // the service stores the UI's profile JSON unchanged
    expect(record.profile).toEqual(toProfileJson(draft));

    const seen: number[] = [];
    const done = await api.pollUntilDone(record.job_id, {
      intervalMs: 50,
      onProgress: (r) => seen.push(r.progress.completed),
    });
    expect(done.state).toBe("done");
    expect(done.progress).toEqual({ completed: 2, total: 2 });
    expect(seen.length).toBeGreaterThan(0);

    const report = await api.getReport(record.job_id);
    const entry: RunHistoryEntry = {
      jobId: done.job_id,
      specDigest: spec.digest,
      budget: done.budget,
      profile: done.profile,
      report,
      finishedAt: new Date().toISOString(),
    };
    history.add(entry);
    return entry;
  }

  it("uploads the sensors fixture and reports its shape", async () => {
    const spec = await api.uploadSpec(readFileSync(FIXTURE, "utf8"), "text/csv");
    expect(spec.assets).toEqual(["Sensors"]);
    expect(spec.objectives).toEqual(["C", "I", "A"]);
    expect(spec.controls).toBe(47);
    expect(spec.case_count).toBe(2);

    const again = await api.uploadSpec(readFileSync(FIXTURE, "utf8"), "text/csv");
    expect(again.spec_id).toBe(spec.spec_id);
  }, 20000);

  it("rejects a malformed spec with a located diagnostic", async () => {
    const bad = "Control,Cost,Mandatory,Requires,A,,\n,,,,C,I,A\nx,1,false,,Wild,,\n";
    try {
      await api.uploadSpec(bad, "text/csv");
      expect.unreachable("upload should fail");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const detail = (err as ApiError).detail;
      expect((err as ApiError).status).toBe(400);
      expect(detail.row).toBe(3);
      expect(detail.column).toContain("A/C");
    }
  }, 20000);

  it("plays the game end to end and renders verbatim numbers", async () => {
    const run = await playOnce("950000");
    expect(run.report.groups.length).toBeGreaterThan(0);
    const html = renderReport(run.report);
    for (const group of run.report.groups) {
      expect(html).toContain(`Case(s): ${group.cases.join(", ")}`);
      if (group.cost !== null) {
        expect(html).toContain(group.cost);
        for (const score of group.tier_scores ?? []) {
          expect(html).toContain(score.approx);
          expect(html).toContain(score.exact);
        }
      }
    }
  }, 60000);

  it("re-running with a different budget yields a history diff", async () => {
    const first = history.list()[0] ?? (await playOnce("950000"));
    const second = await playOnce("500000");
    expect(history.list().length).toBeGreaterThanOrEqual(2);

    const diff = diffRuns(first, second);
    expect(diff.budgetDelta).toBe("-450000");
    expect(diff.identical).toBe(false);
    const moved = diff.groups.some(
      (g) => g.added.length > 0 || g.removed.length > 0 || (g.costDelta ?? "0") !== "0",
    );
    expect(moved).toBe(true);

    // identical reruns diff to nothing
    const third = await playOnce("500000");
    expect(diffRuns(second, third).identical).toBe(true);
  }, 120000);

  it("404s on unknown jobs and 409s before completion", async () => {
    await expect(api.getJob("doesnotexist")).rejects.toMatchObject({ status: 404 });
  }, 20000);
});
