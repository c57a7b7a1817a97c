// Thin typed client for the service's /api/v1 endpoints.

import type {
  AnswerResponse,
  CriterionCode,
  CveView,
  RankEntryView,
  RecordView,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(
  method: string,
  path: string,
  body?: unknown
): Promise<T> {
  const response = await fetch(`/api/v1${path}`, {
    method,
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const payload = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof payload.detail === "string"
        ? payload.detail
        : JSON.stringify(payload.detail ?? payload);
    throw new ApiError(response.status, detail);
  }
  return payload as T;
}

export const api = {
  createSession(cveId: string, analyst: string): Promise<SessionView> {
    return request("POST", "/sessions", { cve_id: cveId, analyst });
  },
  getSession(sessionId: string): Promise<SessionView> {
    return request("GET", `/sessions/${sessionId}`);
  },
  answer(
    sessionId: string,
    step: number,
    criterion: CriterionCode,
    value: "N" | "H",
    rationale: string
  ): Promise<AnswerResponse> {
    return request("POST", `/sessions/${sessionId}/steps/${step}/answer`, {
      criterion,
      value,
      rationale,
    });
  },
  skip(sessionId: string, step: number): Promise<AnswerResponse> {
    return request("POST", `/sessions/${sessionId}/steps/${step}/skip`);
  },
  finalize(sessionId: string): Promise<RecordView> {
    return request("POST", `/sessions/${sessionId}/finalize`);
  },
  getCve(cveId: string): Promise<CveView> {
    return request("GET", `/cves/${encodeURIComponent(cveId)}`);
  },
  getRank(): Promise<RankEntryView[]> {
    return request("GET", "/rank");
  },
};
