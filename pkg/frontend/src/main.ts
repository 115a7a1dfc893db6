// DOM wiring: one form, one results region, one state object. All rendering
// goes through the pure builders in render.ts; all transitions through
// state.ts.

import { ApiError, classify } from "./api.js";
import { canonicalJson, downloadText } from "./export.js";
import {
  exportDocument,
  renderError,
  renderRawFallback,
  renderReport,
} from "./render.js";
import {
  beginRequest,
  canSubmit,
  initialState,
  resolveFailure,
  resolveSuccess,
  setForm,
  type ConsoleState,
} from "./state.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery.replace(/\/$/, "");
  const injected = (window as unknown as { HS_ASSIST_API?: string }).HS_ASSIST_API;
  return (injected ?? "http://127.0.0.1:8000").replace(/\/$/, "");
}

const el = {
  description: document.getElementById("description") as HTMLTextAreaElement,
  k: document.getElementById("k") as HTMLSelectElement,
  nSentences: document.getElementById("n-sentences") as HTMLSelectElement,
  submit: document.getElementById("submit") as HTMLButtonElement,
  status: document.getElementById("status") as HTMLElement,
  results: document.getElementById("results") as HTMLElement,
  exportJson: document.getElementById("export-json") as HTMLButtonElement,
  exportHtml: document.getElementById("export-html") as HTMLButtonElement,
};

let state: ConsoleState = initialState();
const base = apiBase();

function fillSelect(select: HTMLSelectElement, from: number, to: number, chosen: number): void {
  for (let v = from; v <= to; v++) {
    const option = document.createElement("option");
    option.value = String(v);
    option.textContent = String(v);
    if (v === chosen) option.selected = true;
    select.appendChild(option);
  }
}

function sync(): void {
  el.submit.disabled = !canSubmit(state);
  el.status.textContent = state.inFlight ? "classifying…" : "";
  const exportable = state.view.kind === "report";
  el.exportJson.disabled = !exportable;
  el.exportHtml.disabled = !exportable;
  switch (state.view.kind) {
    case "idle":
      el.results.innerHTML = "";
      break;
    case "report":
      el.results.innerHTML = renderReport(state.view.response);
      break;
    case "error": {
      el.results.innerHTML = renderError(
        state.view.code, state.view.message, state.view.canRetry,
      );
      const retry = document.getElementById("retry");
      if (retry) retry.addEventListener("click", () => void submit());
      break;
    }
    case "raw":
      el.results.innerHTML = renderRawFallback(state.view.payload);
      break;
  }
}

async function submit(): Promise<void> {
  if (!canSubmit(state)) return;
  const begun = beginRequest(state);
  state = begun.state;
  sync();
  try {
    const payload = await classify(base, {
      description: state.form.description,
      k: state.form.k,
      n_sentences: state.form.nSentences,
    });
    state = resolveSuccess(state, begun.requestId, payload);
  } catch (error) {
    if (error instanceof ApiError) {
      state = resolveFailure(state, begun.requestId, error);
    } else {
      state = resolveFailure(state, begun.requestId, {
        status: 0,
        message: error instanceof Error ? error.message : String(error),
      });
    }
  }
  sync();
}

function wire(): void {
  fillSelect(el.k, 1, 10, state.form.k);
  fillSelect(el.nSentences, 1, 50, state.form.nSentences);

  el.description.addEventListener("input", () => {
    state = setForm(state, { description: el.description.value });
    sync();
  });
  el.k.addEventListener("change", () => {
    state = setForm(state, { k: Number(el.k.value) });
  });
  el.nSentences.addEventListener("change", () => {
    state = setForm(state, { nSentences: Number(el.nSentences.value) });
  });
  el.submit.addEventListener("click", () => void submit());
  el.description.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && (event.ctrlKey || event.metaKey)) void submit();
  });

  el.exportJson.addEventListener("click", () => {
    if (state.view.kind !== "report") return;
    downloadText(
      "suggestion-report.json", "application/json",
      canonicalJson(state.view.response.report),
    );
  });
  el.exportHtml.addEventListener("click", () => {
    if (state.view.kind !== "report") return;
    downloadText("suggestion-report.html", "text/html", exportDocument(state.view.response));
  });
  sync();
}

wire();
