// Screen wiring: CVE lookup -> 4-step wizard -> summary, plus the
// ranking view. State only ever advances from confirmed server
// responses; a failed call re-renders the last known state with an
// inline error and a retry button.

import { api, ApiError } from "./api.js";
import { renderError, renderRanking, renderSummary, renderWizard } from "./render.js";
import type { CriterionCode, SessionView } from "./types.js";

interface UiState {
  session: SessionView | null;
  activeStep: number;
  error: string | null;
  rationaleDrafts: Record<string, string>;
}

const state: UiState = {
  session: null,
  activeStep: 1,
  error: null,
  rationaleDrafts: {},
};

function root(): HTMLElement {
  return document.getElementById("app")!;
}

function draftKey(step: number, criterion: string): string {
  return `${state.session?.session_id}:${step}:${criterion}`;
}

function render(): void {
  const parts: string[] = [];
  if (state.error) parts.push(renderError(state.error));
  if (state.session) parts.push(renderWizard(state.session, state.activeStep));
  root().innerHTML = parts.join("\n");
  restoreDrafts();
}

function restoreDrafts(): void {
  for (const area of root().querySelectorAll<HTMLTextAreaElement>(
    "[data-rationale]"
  )) {
    const card = area.closest<HTMLElement>("[data-step]");
    const awaiting = card?.querySelector<HTMLElement>("[data-awaiting]");
    if (!card || !awaiting) continue;
    const key = draftKey(Number(card.dataset.step), awaiting.dataset.awaiting!);
    area.value = state.rationaleDrafts[key] ?? "";
    area.addEventListener("input", () => {
      state.rationaleDrafts[key] = area.value;
    });
  }
}

async function guard<T>(action: () => Promise<T>): Promise<T | null> {
  try {
    const result = await action();
    state.error = null;
    return result;
  } catch (error) {
    state.error =
      error instanceof ApiError ? error.message : "service unreachable";
    render();
    return null;
  }
}

export async function startAssessment(
  cveId: string,
  analyst: string
): Promise<void> {
  const session = await guard(() => api.createSession(cveId, analyst));
  if (!session) return;
  state.session = session;
  state.activeStep = 1;
  render();
}

async function refreshSession(): Promise<void> {
  if (!state.session) return;
  const session = await guard(() => api.getSession(state.session!.session_id));
  if (session) {
    state.session = session;
    render();
  }
}

async function onAnswer(step: number, value: "N" | "H"): Promise<void> {
  const current = state.session?.steps[step - 1];
  const criterion = current?.awaiting as CriterionCode | undefined;
  if (!state.session || !criterion) return;
  const key = draftKey(step, criterion);
  const response = await guard(() =>
    api.answer(
      state.session!.session_id,
      step,
      criterion,
      value,
      state.rationaleDrafts[key] ?? ""
    )
  );
  if (!response) return; // failed calls never advance the UI
  delete state.rationaleDrafts[key];
  await refreshSession();
}

async function onSkip(step: number): Promise<void> {
  if (!state.session) return;
  const response = await guard(() =>
    api.skip(state.session!.session_id, step)
  );
  if (response) await refreshSession();
}

export async function finalize(): Promise<void> {
  if (!state.session) return;
  const record = await guard(() => api.finalize(state.session!.session_id));
  if (record) {
    root().innerHTML = renderSummary(record);
  }
}

export async function showRanking(target: HTMLElement): Promise<void> {
  const entries = await guard(() => api.getRank());
  if (entries) target.innerHTML = renderRanking(entries);
}

function wireEvents(): void {
  root().addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const card = target.closest<HTMLElement>("[data-step]");
    if (!card) return;
    const step = Number(card.dataset.step);
    if (target.dataset.answer === "N" || target.dataset.answer === "H") {
      void onAnswer(step, target.dataset.answer);
    } else if (target.dataset.skip !== undefined) {
      void onSkip(step);
    }
  });
}

export function boot(): void {
  wireEvents();
  const form = document.getElementById("lookup") as HTMLFormElement | null;
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void startAssessment(
      String(data.get("cve_id") ?? ""),
      String(data.get("analyst") ?? "")
    );
  });
  document.getElementById("finalize")?.addEventListener("click", () => {
    void finalize();
  });
  const rankTarget = document.getElementById("ranking");
  if (rankTarget) void showRanking(rankTarget);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
