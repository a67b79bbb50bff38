// Browser wiring: upload -> compose -> submit -> poll -> report -> compare.
// All state transitions are driven by server responses; this module only
// routes events and re-renders.

import { ApiClient, ApiError } from "./api.js";
import { RunHistory, diffRuns, type RunHistoryEntry } from "./history.js";
import {
  addTier,
  canSubmit,
  emptyDraft,
  removeTier,
  setBudget,
  toProfileJson,
  toggleTarget,
  type ProfileDraft,
} from "./profile.js";
import {
  renderDiff,
  renderErrorBanner,
  renderHistory,
  renderProfileEditor,
  renderProgress,
  renderReport,
  renderSpecSummary,
} from "./render.js";
import type { JobRecord, SpecHandle } from "./types.js";

const api = new ApiClient("");
const history = new RunHistory(window.sessionStorage);

interface UiState {
  spec: SpecHandle | null;
  draft: ProfileDraft;
  expanded: Set<string>;
  job: JobRecord | null;
  error: string;
  selectedRuns: Set<number>;
}

const state: UiState = {
  spec: null,
  draft: emptyDraft(),
  expanded: new Set(),
  job: null,
  error: "",
  selectedRuns: new Set(),
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function renderAll(): void {
  el("error").innerHTML = state.error;
  el("spec").innerHTML = state.spec ? renderSpecSummary(state.spec) : "";
  el("composer").innerHTML = state.spec
    ? renderProfileEditor(state.spec, state.draft, state.expanded, canSubmit(state.draft))
    : "";
  const job = state.job;
  el("progress").innerHTML =
    job && job.state !== "done" && job.state !== "failed"
      ? renderProgress(job.progress)
      : "";
  el("report").innerHTML = job?.result ? renderReport(job.result) : "";
  const entries = history.list();
  el("history").innerHTML = renderHistory(entries, state.selectedRuns);
  const picked = [...state.selectedRuns].sort((a, b) => a - b);
  el("diff").innerHTML =
    picked.length === 2
      ? renderDiff(diffRuns(entries[picked[0]!]!, entries[picked[1]!]!))
      : "";
}

function fail(err: unknown): void {
  state.error =
    err instanceof ApiError
      ? renderErrorBanner(err.detail)
      : renderErrorBanner({ error: String(err) });
  renderAll();
}

async function uploadFile(file: File): Promise<void> {
  state.error = "";
  try {
    const type = file.name.endsWith(".json") ? "application/json" : "text/csv";
    state.spec = await api.uploadSpec(await file.text(), type);
    state.draft = emptyDraft();
    state.expanded = new Set();
    state.job = null;
  } catch (err) {
    state.spec = null;
    fail(err);
    return;
  }
  renderAll();
}

async function submitJob(): Promise<void> {
  if (!state.spec || !canSubmit(state.draft)) return;
  state.error = "";
  try {
    const record = await api.createJob(
      state.spec.spec_id,
      state.draft.budget,
      toProfileJson(state.draft),
    );
    state.job = record;
    renderAll();
    const done = await api.pollUntilDone(record.job_id, {
      onProgress: (polled) => {
        state.job = polled;
        renderAll();
      },
    });
    if (done.state === "failed") {
      fail(new Error(done.error ?? "job failed"));
      return;
    }
    state.job = done;
    history.add({
      jobId: done.job_id,
      specDigest: state.spec.digest,
      budget: done.budget,
      profile: done.profile,
      report: done.result!,
      finishedAt: new Date().toISOString(),
    });
  } catch (err) {
    fail(err);
    return;
  }
  renderAll();
}

function onClick(event: Event): void {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  const action = target.dataset.action;
  if (action === "expand-asset") {
    event.preventDefault();
    const asset = target.dataset.asset!;
    state.expanded.has(asset) ? state.expanded.delete(asset) : state.expanded.add(asset);
  } else if (action === "toggle-target") {
    event.preventDefault();
    state.draft = toggleTarget(state.draft, Number(target.dataset.tier), {
      asset: target.dataset.asset!,
      objective: target.dataset.objective!,
    });
  } else if (action === "add-tier") {
    state.draft = addTier(state.draft);
  } else if (action === "remove-tier") {
    state.draft = removeTier(state.draft);
  } else if (action === "select-run") {
    const index = Number(target.dataset.index);
    state.selectedRuns.has(index)
      ? state.selectedRuns.delete(index)
      : state.selectedRuns.add(index);
  } else {
    return;
  }
  renderAll();
}

function onInput(event: Event): void {
  const target = event.target as HTMLInputElement;
  if (target.dataset.action === "edit-budget") {
    state.draft = setBudget(state.draft, target.value);
    // budget typing must not blow away focus; update only the button
    const form = target.closest("form");
    const submit = form?.querySelector<HTMLButtonElement>("button[type=submit]");
    if (submit) submit.disabled = !canSubmit(state.draft);
  }
}

export function boot(): void {
  el("file").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.files?.[0]) void uploadFile(input.files[0]);
  });
  document.body.addEventListener("click", onClick);
  document.body.addEventListener("input", onInput);
  document.body.addEventListener("submit", (event) => {
    const form = event.target as HTMLElement;
    if (form.matches("[data-action=submit-job]")) {
      event.preventDefault();
      void submitJob();
    }
  });
  renderAll();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
