// HTML renderers. Pure string-in, string-out so tests can assert that
// every displayed cost and score is the report's own string, verbatim.

import type { GroupDiff, RunDiff, RunHistoryEntry } from "./history.js";
import type { ProfileDraft } from "./profile.js";
import { hasTarget } from "./profile.js";
import type {
  ApiErrorDetail,
  JobProgress,
  ReportGroupJson,
  ReportJson,
  SpecHandle,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderErrorBanner(detail: ApiErrorDetail): string {
  const where = [
    detail.row != null ? `row ${detail.row}` : null,
    detail.column != null ? `column ${escapeHtml(String(detail.column))}` : null,
  ].filter(Boolean);
  const suffix = where.length ? ` (${where.join(", ")})` : "";
  return `<div class="banner error">${escapeHtml(detail.error)}${suffix}</div>`;
}

export function renderSpecSummary(spec: SpecHandle): string {
  return `
  <div class="spec-summary">
    <p><strong>${spec.controls}</strong> controls
       (${spec.mandatory} mandatory) across
       <strong>${spec.assets.length}</strong> asset(s);
       ${spec.uncertain_cells} undecided cell(s) &rarr;
       <strong>${spec.case_count}</strong> case(s)</p>
    <p class="digest">digest ${escapeHtml(spec.digest)}</p>
  </div>`;
}

/** One tier's asset buttons, each expanding to its objective toggles. */
function renderTier(
  spec: SpecHandle,
  draft: ProfileDraft,
  tierIndex: number,
  expandedAssets: ReadonlySet<string>,
): string {
  const assets = spec.assets
    .map((asset) => {
      const expanded = expandedAssets.has(asset);
      const objectives = spec.objectives
        .map((objective) => {
          const selected = hasTarget(draft, tierIndex, { asset, objective });
          return `<button class="objective${selected ? " selected" : ""}"
            data-action="toggle-target" data-tier="${tierIndex}"
            data-asset="${escapeHtml(asset)}" data-objective="${objective}">
            ${objective}</button>`;
        })
        .join("");
      return `<span class="asset-block">
        <button class="asset" data-action="expand-asset"
          data-asset="${escapeHtml(asset)}">${escapeHtml(asset)}</button>
        ${expanded ? `<span class="objectives">${objectives}</span>` : ""}
      </span>`;
    })
    .join("");
  return `<fieldset class="tier" data-tier="${tierIndex}">
    <legend>Tier ${tierIndex + 1}</legend>${assets}
  </fieldset>`;
}

export function renderProfileEditor(
  spec: SpecHandle,
  draft: ProfileDraft,
  expandedAssets: ReadonlySet<string>,
  submittable: boolean,
): string {
  const tiers = draft.tiers
    .map((_, i) => renderTier(spec, draft, i, expandedAssets))
    .join("");
  return `
  <form class="profile-editor" data-action="submit-job">
    ${tiers}
    <div class="tier-controls">
      <button type="button" data-action="add-tier">Add attacker objectives</button>
      <button type="button" data-action="remove-tier">Remove attacker objectives</button>
    </div>
    <label>Budget
      <input name="budget" inputmode="decimal" value="${escapeHtml(draft.budget)}"
             data-action="edit-budget" placeholder="e.g. 950000">
    </label>
    <button type="submit" ${submittable ? "" : "disabled"}>Play the game</button>
  </form>`;
}

export function renderProgress(progress: JobProgress): string {
  const percent = progress.total ? Math.floor((100 * progress.completed) / progress.total) : 0;
  return `
  <div class="progress" role="progressbar" aria-valuenow="${progress.completed}"
       aria-valuemax="${progress.total}">
    <div class="bar" style="width:${percent}%"></div>
    <span>${progress.completed}/${progress.total} cases</span>
  </div>`;
}

function renderGroup(group: ReportGroupJson): string {
  const cases = group.cases.join(", ");
  const assignments = group.assignments
    .map(
      (a) =>
        `<li>${escapeHtml(a.control)} @ ${escapeHtml(a.asset)}/${a.objective} = ${a.rating}</li>`,
    )
    .join("");
  if (group.cost === null || group.tier_scores === null) {
    return `<section class="group infeasible">
      <h3>Case(s): ${cases}</h3>
      ${assignments ? `<ul class="assignments">${assignments}</ul>` : ""}
      <p>No feasible combination within budget</p>
    </section>`;
  }
  const combos = group.combos
    .map(
      (combo) =>
        `<li class="combo">${combo
          .map((c) => `<span class="control">${escapeHtml(c)}</span>`)
          .join(" ")}</li>`,
    )
    .join("");
  const scores = group.tier_scores
    .map(
      (s, i) =>
        `<li>Tier ${i + 1}: <span class="approx">${escapeHtml(s.approx)}</span>
         <span class="exact">(${escapeHtml(s.exact)})</span></li>`,
    )
    .join("");
  return `<section class="group">
    <h3>Case(s): ${cases}</h3>
    ${assignments ? `<ul class="assignments">${assignments}</ul>` : ""}
    <ul class="combos">${combos}</ul>
    <p class="cost">Cost: <strong>${escapeHtml(group.cost)}</strong></p>
    <ul class="scores">${scores}</ul>
  </section>`;
}

export function renderReport(report: ReportJson): string {
  const groups = report.groups.map(renderGroup).join("");
  return `
  <article class="report">
    <header>
      <p>Budget ${escapeHtml(report.metadata.budget)} &middot;
         ${report.metadata.case_count} case(s) &middot;
         catalogue ${escapeHtml(report.metadata.catalogue_digest.slice(0, 12))}…</p>
    </header>
    ${groups}
  </article>`;
}

export function renderHistory(entries: RunHistoryEntry[], selected: ReadonlySet<number>): string {
  if (!entries.length) return `<p class="empty">No runs yet.</p>`;
  const rows = entries
    .map((entry, i) => {
      const groupCount = entry.report.groups.length;
      return `<tr>
        <td><input type="checkbox" data-action="select-run" data-index="${i}"
             ${selected.has(i) ? "checked" : ""}></td>
        <td>#${i + 1}</td>
        <td>${escapeHtml(entry.budget)}</td>
        <td>${groupCount} group(s)</td>
        <td>${escapeHtml(entry.finishedAt)}</td>
      </tr>`;
    })
    .join("");
  return `<table class="history">
    <thead><tr><th></th><th>run</th><th>budget</th><th>result</th><th>finished</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

function renderGroupDiff(diff: GroupDiff): string {
  const added = diff.added
    .map((c) => `<span class="control added">+${escapeHtml(c)}</span>`)
    .join(" ");
  const removed = diff.removed
    .map((c) => `<span class="control removed">-${escapeHtml(c)}</span>`)
    .join(" ");
  const cost =
    diff.costDelta === null
      ? "n/a"
      : diff.costDelta.startsWith("-")
        ? diff.costDelta
        : `+${diff.costDelta}`;
  return `<tr>
    <td>group ${diff.index + 1}</td>
    <td>${removed || "&mdash;"}</td>
    <td>${added || "&mdash;"}</td>
    <td>${cost}</td>
  </tr>`;
}

export function renderDiff(diff: RunDiff): string {
  if (diff.identical) {
    return `<div class="diff identical"><p>Runs are identical.</p></div>`;
  }
  const rows = diff.groups.map(renderGroupDiff).join("");
  const budget = diff.budgetDelta.startsWith("-")
    ? diff.budgetDelta
    : `+${diff.budgetDelta}`;
  return `<div class="diff">
    <p>Budget delta: ${budget}</p>
    <table>
      <thead><tr><th></th><th>dropped</th><th>picked up</th><th>cost delta</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}
