// Typed client for the risk service's POST /predict endpoint.

export interface PredictPayload {
  fit_result: number;
  bmi: number;
  age: number;
  diabetes: number;
  smoking: number;
}

export interface VoteEntry {
  kind: string;
  vote: number;
  score: number;
}

export interface PredictResult {
  probability: number;
  label: "positive" | "negative";
  votes: VoteEntry[];
  model_version: string;
}

export type PredictFailure =
  | { kind: "field"; field: string; message: string }
  | { kind: "service"; message: string }
  | { kind: "malformed"; message: string }
  | { kind: "network"; message: string };

export type PredictOutcome =
  | { ok: true; result: PredictResult }
  | { ok: false; failure: PredictFailure };

function isVoteEntry(value: unknown): value is VoteEntry {
  if (typeof value !== "object" || value === null) {
    return false;
  }
  const entry = value as Record<string, unknown>;
  return (
    typeof entry.kind === "string" &&
    (entry.vote === 0 || entry.vote === 1) &&
    typeof entry.score === "number" &&
    Number.isFinite(entry.score)
  );
}

/** Check a decoded response body against the /predict wire shape. */
export function parsePredictResult(doc: unknown): PredictResult | null {
  if (typeof doc !== "object" || doc === null) {
    return null;
  }
  const body = doc as Record<string, unknown>;
  if (typeof body.probability !== "number" || !Number.isFinite(body.probability)) {
    return null;
  }
  if (body.label !== "positive" && body.label !== "negative") {
    return null;
  }
  if (!Array.isArray(body.votes) || !body.votes.every(isVoteEntry)) {
    return null;
  }
  if (typeof body.model_version !== "string") {
    return null;
  }
  return {
    probability: body.probability,
    label: body.label,
    votes: body.votes,
    model_version: body.model_version,
  };
}

async function readFailure(response: Response): Promise<PredictFailure> {
  let doc: unknown;
  try {
    doc = await response.json();
  } catch {
    return { kind: "service", message: `service error (HTTP ${response.status})` };
  }
  if (typeof doc === "object" && doc !== null) {
    const error = (doc as Record<string, unknown>).error;
    if (typeof error === "object" && error !== null) {
      const detail = error as Record<string, unknown>;
      if (typeof detail.message === "string") {
        if (typeof detail.field === "string") {
          return { kind: "field", field: detail.field, message: detail.message };
        }
        return { kind: "service", message: detail.message };
      }
    }
  }
  return { kind: "service", message: `service error (HTTP ${response.status})` };
}

function describeError(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

/** POST the five features to {baseUrl}/predict and decode the outcome. */
export async function requestPrediction(
  baseUrl: string,
  payload: PredictPayload,
): Promise<PredictOutcome> {
  const url = `${baseUrl.replace(/\/+$/, "")}/predict`;
  let response: Response;
  try {
    response = await fetch(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  } catch (err) {
    return { ok: false, failure: { kind: "network", message: describeError(err) } };
  }
  if (!response.ok) {
    return { ok: false, failure: await readFailure(response) };
  }
  let doc: unknown;
  try {
    doc = await response.json();
  } catch {
    return {
      ok: false,
      failure: { kind: "malformed", message: "service returned a non-JSON body" },
    };
  }
  const result = parsePredictResult(doc);
  if (result === null) {
    return {
      ok: false,
      failure: {
        kind: "malformed",
        message: "service response did not match the expected shape",
      },
    };
  }
  return { ok: true, result };
}
