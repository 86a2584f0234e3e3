// Form wiring for the risk-entry page. All state lives in the initApp
// closure so tests can mount a fresh instance per case.

import {
  requestPrediction,
  type PredictPayload,
  type PredictResult,
} from "./api.js";
import { formatScore } from "./format.js";
import { FEATURE_FIELDS, parseField, type FeatureField } from "./validation.js";

const DEFAULT_SERVICE_URL = "http://127.0.0.1:8000";

interface Controls {
  form: HTMLFormElement;
  urlInput: HTMLInputElement;
  submit: HTMLButtonElement;
  banner: HTMLElement;
  bannerMessage: HTMLElement;
  retry: HTMLButtonElement;
  result: HTMLElement;
  probability: HTMLElement;
  badge: HTMLElement;
  votesBody: HTMLElement;
  modelVersion: HTMLElement;
  inputs: Record<FeatureField, HTMLInputElement | HTMLSelectElement>;
  errors: Record<FeatureField, HTMLElement>;
}

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function findControls(doc: Document): Controls {
  const inputs = {} as Controls["inputs"];
  const errors = {} as Controls["errors"];
  for (const field of FEATURE_FIELDS) {
    inputs[field] = byId(doc, field);
    errors[field] = byId(doc, `${field}-error`);
  }
  return {
    form: byId(doc, "risk-form"),
    urlInput: byId(doc, "service-url"),
    submit: byId(doc, "submit"),
    banner: byId(doc, "banner"),
    bannerMessage: byId(doc, "banner-message"),
    retry: byId(doc, "retry"),
    result: byId(doc, "result"),
    probability: byId(doc, "probability"),
    badge: byId(doc, "label-badge"),
    votesBody: byId(doc, "votes-body"),
    modelVersion: byId(doc, "model-version"),
    inputs,
    errors,
  };
}

export function initApp(doc: Document): void {
  const controls = findControls(doc);
  let inFlight = false;
  let lastPayload: PredictPayload | null = null;

  const showFieldError = (field: FeatureField, message: string): void => {
    controls.errors[field].textContent = message;
    controls.errors[field].hidden = false;
  };

  const clearFieldError = (field: FeatureField): void => {
    controls.errors[field].textContent = "";
    controls.errors[field].hidden = true;
  };

  const showBanner = (message: string, retryable: boolean): void => {
    controls.bannerMessage.textContent = message;
    controls.banner.hidden = false;
    controls.retry.hidden = !retryable;
  };

  const hideBanner = (): void => {
    controls.banner.hidden = true;
    controls.retry.hidden = true;
  };

  const allFieldsValid = (): boolean =>
    FEATURE_FIELDS.every(
      (field) => parseField(field, controls.inputs[field].value).error === null,
    );

  const refreshSubmit = (): void => {
    controls.submit.disabled = inFlight || !allFieldsValid();
  };

  const serviceUrl = (): string =>
    controls.urlInput.value.trim() || DEFAULT_SERVICE_URL;

  const collectPayload = (): PredictPayload | null => {
    const values: Partial<Record<FeatureField, number>> = {};
    let firstError = true;
    for (const field of FEATURE_FIELDS) {
      const parsed = parseField(field, controls.inputs[field].value);
      if (parsed.error !== null) {
        showFieldError(field, parsed.error);
        if (firstError) {
          controls.inputs[field].focus();
          firstError = false;
        }
      } else {
        clearFieldError(field);
        values[field] = parsed.value as number;
      }
    }
    if (!firstError) {
      return null;
    }
    return values as unknown as PredictPayload;
  };

  const renderResult = (result: PredictResult): void => {
    controls.probability.textContent = formatScore(result.probability);
    controls.badge.textContent = result.label;
    controls.badge.className = `badge ${result.label}`;
    controls.votesBody.textContent = "";
    for (const vote of result.votes) {
      const row = doc.createElement("tr");
      for (const text of [vote.kind, String(vote.vote), formatScore(vote.score)]) {
        const cell = doc.createElement("td");
        cell.textContent = text;
        row.appendChild(cell);
      }
      controls.votesBody.appendChild(row);
    }
    controls.modelVersion.textContent = `model format ${result.model_version}`;
    controls.result.hidden = false;
  };

  const perform = async (payload: PredictPayload): Promise<void> => {
    inFlight = true;
    refreshSubmit();
    hideBanner();
    controls.result.hidden = true;
    const outcome = await requestPrediction(serviceUrl(), payload);
    inFlight = false;
    refreshSubmit();
    if (outcome.ok) {
      lastPayload = null;
      renderResult(outcome.result);
      return;
    }
    const failure = outcome.failure;
    switch (failure.kind) {
      case "field":
        if ((FEATURE_FIELDS as readonly string[]).includes(failure.field)) {
          showFieldError(failure.field as FeatureField, failure.message);
        } else {
          showBanner(failure.message, false);
        }
        break;
      case "network":
        lastPayload = payload;
        showBanner(`cannot reach the service: ${failure.message}`, true);
        break;
      default:
        showBanner(failure.message, false);
        break;
    }
  };

  for (const field of FEATURE_FIELDS) {
    const onEdit = (): void => {
      const parsed = parseField(field, controls.inputs[field].value);
      if (parsed.error === null) {
        clearFieldError(field);
      } else {
        showFieldError(field, parsed.error);
      }
      refreshSubmit();
    };
    controls.inputs[field].addEventListener("input", onEdit);
    controls.inputs[field].addEventListener("change", onEdit);
  }

  controls.form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (inFlight) {
      return;
    }
    const payload = collectPayload();
    if (payload === null) {
      refreshSubmit();
      return;
    }
    void perform(payload);
  });

  controls.retry.addEventListener("click", () => {
    if (lastPayload !== null && !inFlight) {
      void perform(lastPayload);
    }
  });

  refreshSubmit();
}

// In the browser the module loads after the document is parsed; in tests
// the page is mounted explicitly and initApp is called by hand.
if (typeof document !== "undefined" && document.getElementById("risk-form") !== null) {
  initApp(document);
}
