// Pure HTML renderers for the wizard, summary and ranking screens.
// Every score, string and severity shown is copied verbatim from a
// service payload; nothing is computed client-side.

import { highlight, renderTree } from "./tree.js";
import type {
  AnswerValue,
  CvssScoreView,
  RankEntryView,
  RecordView,
  SessionView,
  StepView,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function stepAnswers(step: StepView): AnswerValue[] {
  return step.answered.map(([, value]) => value as AnswerValue);
}

export function renderStepCard(step: StepView, active: boolean): string {
  const tree = renderTree(highlight(stepAnswers(step), step.skipped));
  const classes = ["step-card"];
  if (step.skipped) classes.push("dim");
  if (active) classes.push("active");
  const parts = [
    `<section class="${classes.join(" ")}" data-step="${step.step}">`,
    `<h3>Step ${step.step}: ${escapeHtml(step.name)}</h3>`,
    tree,
  ];
  if (step.skipped) {
    parts.push(`<p class="status">Skipped</p>`);
  } else if (step.leaf) {
    parts.push(
      `<p class="status">Leaf ${step.leaf.at}${step.leaf.tai}${step.leaf.g}` +
        ` &middot; score <strong data-score>${step.leaf.score}</strong></p>`
    );
  } else if (step.prompt) {
    parts.push(
      `<p class="prompt" data-awaiting="${step.awaiting}">` +
        `${escapeHtml(step.prompt)}</p>`,
      `<button data-answer="N">N (available)</button>`,
      `<button data-answer="H">H (unavailable)</button>`,
      `<button data-skip>Skip step</button>`,
      `<textarea data-rationale placeholder="rationale"></textarea>`
    );
  }
  parts.push("</section>");
  return parts.join("\n");
}

export function renderWizard(session: SessionView, activeStep: number): string {
  const cards = session.steps
    .map((step) => renderStepCard(step, step.step === activeStep))
    .join("\n");
  return (
    `<div class="wizard" data-session="${session.session_id}">` +
    `<h2>${escapeHtml(session.cve_id)}</h2>${cards}</div>`
  );
}

function renderCvssRow(score: CvssScoreView): string {
  const band = score.severity.toLowerCase();
  return (
    `<li class="cvss ${band}">CVSS ${score.version}: ` +
    `<span data-cvss-score>${score.score}</span> ` +
    `<span class="band">${escapeHtml(score.severity)}</span></li>`
  );
}

export function renderSummary(record: RecordView): string {
  const steps = record.steps
    .map((step) => {
      const body = step.skipped
        ? "skipped"
        : `sub-vector AT:${step.leaf!.at},TAI:${step.leaf!.tai},G:${step.leaf!.g}` +
          ` score ${step.leaf!.score}`;
      return `<li data-step="${step.step}">${escapeHtml(step.name)}: ${body}</li>`;
    })
    .join("");
  const overall =
    record.overall === null
      ? `<span class="badge undefined">Undefined</span>`
      : `<span data-overall>${record.overall}</span>`;
  return [
    `<div class="summary" data-cve="${escapeHtml(record.cve_id)}">`,
    `<h2>${escapeHtml(record.cve_id)} &middot; revision ${record.revision}</h2>`,
    `<ul class="steps">${steps}</ul>`,
    `<p>Overall effort: ${overall}</p>`,
    `<code class="goe-string">${escapeHtml(record.goe_string)}</code>`,
    `<ul class="cvss-list">${record.cvss_scores.map(renderCvssRow).join("")}</ul>`,
    `</div>`,
  ].join("\n");
}

export function renderRanking(entries: RankEntryView[]): string {
  if (entries.length === 0) {
    return `<p class="empty">No finalized assessments yet.</p>`;
  }
  // rows come pre-sorted from the service and are rendered as served
  const rows = entries
    .map((entry) => {
      const goe =
        entry.goe === null
          ? `<span class="badge undefined">Undefined</span>`
          : String(entry.goe);
      const cvss = entry.cvss === null ? "&ndash;" : String(entry.cvss);
      return (
        `<tr data-rank="${entry.rank}"><td>${entry.rank}</td>` +
        `<td>${escapeHtml(entry.cve_id)}</td><td>${goe}</td><td>${cvss}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="ranking"><thead><tr>` +
    `<th>#</th><th>CVE</th><th>GOE</th><th>CVSS</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderError(message: string): string {
  return (
    `<div class="error" role="alert">${escapeHtml(message)} ` +
    `<button data-retry>Retry</button></div>`
  );
}
