// Console state machine, kept free of DOM so it can be tested directly.
//
// One request is in flight per tab at most. Every request gets an id;
// whatever resolves is compared against the latest issued id and stale
// results are dropped on the floor. The form itself is never cleared by a
// response, so officers can refine a query iteratively.

import { isClassifyResponse, type ClassifyResponse } from "./types.js";

export interface FormState {
  description: string;
  k: number;
  nSentences: number;
}

export type View =
  | { kind: "idle" }
  | { kind: "report"; response: ClassifyResponse }
  | { kind: "error"; code: string; message: string; canRetry: boolean }
  | { kind: "raw"; payload: unknown };

export interface ConsoleState {
  form: FormState;
  inFlight: boolean;
  latestRequestId: number;
  view: View;
}

export const DEFAULT_FORM: FormState = { description: "", k: 3, nSentences: 7 };

export function initialState(): ConsoleState {
  return { form: { ...DEFAULT_FORM }, inFlight: false, latestRequestId: 0, view: { kind: "idle" } };
}

export function setForm(state: ConsoleState, patch: Partial<FormState>): ConsoleState {
  return { ...state, form: { ...state.form, ...patch } };
}

/** Submit is enabled only for a non-blank description with nothing in flight. */
export function canSubmit(state: ConsoleState): boolean {
  return state.form.description.trim().length > 0 && !state.inFlight;
}

export function beginRequest(state: ConsoleState): { state: ConsoleState; requestId: number } {
  const requestId = state.latestRequestId + 1;
  return { state: { ...state, inFlight: true, latestRequestId: requestId }, requestId };
}

function isStale(state: ConsoleState, requestId: number): boolean {
  return requestId !== state.latestRequestId;
}

export function resolveSuccess(
  state: ConsoleState,
  requestId: number,
  payload: unknown,
): ConsoleState {
  if (isStale(state, requestId)) return state;
  const view: View = isClassifyResponse(payload)
    ? { kind: "report", response: payload }
    : { kind: "raw", payload }; // schema drift: show the JSON rather than guess
  return { ...state, inFlight: false, view };
}

export function resolveFailure(
  state: ConsoleState,
  requestId: number,
  error: { status?: number; code?: string; message?: string },
): ConsoleState {
  if (isStale(state, requestId)) return state;
  const status = error.status ?? 0;
  const view: View = {
    kind: "error",
    code: error.code ?? (status === 0 ? "NETWORK_ERROR" : "HTTP_ERROR"),
    message: error.message ?? "request failed",
    // network failures and a missing model are worth retrying as-is;
    // validation errors need the form changed first
    canRetry: status === 0 || status === 503,
  };
  return { ...state, inFlight: false, view };
}
