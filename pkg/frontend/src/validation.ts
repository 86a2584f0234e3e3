// Client-side copies of the service's input range rules. The wording and
// the order of checks match the service so that a value rejected here is
// rejected there with the same message, and vice versa. The shared fixture
// in ../../tests/fixtures/boundary_cases.json pins that parity.

export const FEATURE_FIELDS = [
  "fit_result",
  "bmi",
  "age",
  "diabetes",
  "smoking",
] as const;

export type FeatureField = (typeof FEATURE_FIELDS)[number];

const CONTINUOUS_RANGES: Partial<Record<FeatureField, readonly [number, number]>> = {
  fit_result: [0, Infinity],
  bmi: [10, 80],
  age: [18, 120],
};

/** Validate one numeric feature value; returns an error message or null. */
export function checkValue(field: FeatureField, value: number): string | null {
  if (!Number.isFinite(value)) {
    return `${field} must be finite`;
  }
  const range = CONTINUOUS_RANGES[field];
  if (range) {
    const [lo, hi] = range;
    if (value < lo || value > hi) {
      if (hi === Infinity) {
        return `${field} must be >= ${lo}, got ${value}`;
      }
      return `${field} must be in [${lo}, ${hi}], got ${value}`;
    }
    return null;
  }
  if (value !== 0 && value !== 1) {
    return `${field} must be 0 or 1, got ${value}`;
  }
  return null;
}

export interface ParsedField {
  value: number | null;
  error: string | null;
}

/** Parse raw form input for a field: empty, non-numeric, then range rules. */
export function parseField(field: FeatureField, raw: string): ParsedField {
  const trimmed = raw.trim();
  if (trimmed === "") {
    return { value: null, error: `${field} is required` };
  }
  const value = Number(trimmed);
  if (Number.isNaN(value)) {
    return { value: null, error: `${field} must be a number` };
  }
  const error = checkValue(field, value);
  return error === null ? { value, error: null } : { value: null, error };
}
