import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  FEATURE_FIELDS,
  checkValue,
  parseField,
  type FeatureField,
} from "../src/validation.js";

interface BoundaryCase {
  name: string;
  payload: Record<FeatureField, number>;
  valid: boolean;
  field: string | null;
}

const fixture = JSON.parse(
  readFileSync(new URL("../../tests/fixtures/boundary_cases.json", import.meta.url), "utf8"),
) as { cases: BoundaryCase[] };

/** First offending field in service order, or null when all rules pass. */
function clientVerdict(payload: Record<FeatureField, number>): string | null {
  for (const field of FEATURE_FIELDS) {
    if (checkValue(field, payload[field]) !== null) {
      return field;
    }
  }
  return null;
}

describe("boundary fixture parity", () => {
  it("covers twelve cases", () => {
    expect(fixture.cases).toHaveLength(12);
  });

  it.each(fixture.cases.map((c) => [c.name, c] as const))(
    "matches the service verdict for %s",
    (_name, testCase) => {
      const offending = clientVerdict(testCase.payload);
      expect(offending === null).toBe(testCase.valid);
      expect(offending).toBe(testCase.field);
    },
  );
});

describe("checkValue", () => {
  it("accepts in-range values for every field", () => {
    expect(checkValue("fit_result", 120)).toBeNull();
    expect(checkValue("bmi", 27.5)).toBeNull();
    expect(checkValue("age", 66)).toBeNull();
    expect(checkValue("diabetes", 1)).toBeNull();
    expect(checkValue("smoking", 0)).toBeNull();
  });

  it("names the field and the allowed range", () => {
    expect(checkValue("bmi", 9)).toBe("bmi must be in [10, 80], got 9");
    expect(checkValue("age", 121)).toBe("age must be in [18, 120], got 121");
    expect(checkValue("fit_result", -5)).toBe("fit_result must be >= 0, got -5");
    expect(checkValue("diabetes", 0.5)).toBe("diabetes must be 0 or 1, got 0.5");
    expect(checkValue("smoking", 2)).toBe("smoking must be 0 or 1, got 2");
  });

  it("rejects non-finite values", () => {
    expect(checkValue("age", Infinity)).toBe("age must be finite");
    expect(checkValue("bmi", -Infinity)).toBe("bmi must be finite");
    expect(checkValue("fit_result", NaN)).toBe("fit_result must be finite");
  });
});

describe("parseField", () => {
  it("flags empty and whitespace-only input as required", () => {
    expect(parseField("bmi", "").error).toBe("bmi is required");
    expect(parseField("age", "   ").error).toBe("age is required");
  });

  it("flags non-numeric input", () => {
    expect(parseField("bmi", "abc").error).toBe("bmi must be a number");
    expect(parseField("age", "12f").error).toBe("age must be a number");
  });

  it("parses numbers and trims whitespace", () => {
    expect(parseField("bmi", " 27.5 ")).toEqual({ value: 27.5, error: null });
    expect(parseField("age", "66")).toEqual({ value: 66, error: null });
    expect(parseField("fit_result", "1e2")).toEqual({ value: 100, error: null });
  });

  it("applies the range rules after parsing", () => {
    expect(parseField("bmi", "9").error).toBe("bmi must be in [10, 80], got 9");
    expect(parseField("smoking", "0.5").error).toBe("smoking must be 0 or 1, got 0.5");
  });

  it("accepts values exactly on the bounds", () => {
    expect(parseField("bmi", "10").error).toBeNull();
    expect(parseField("bmi", "80").error).toBeNull();
    expect(parseField("age", "18").error).toBeNull();
    expect(parseField("age", "120").error).toBeNull();
    expect(parseField("fit_result", "0").error).toBeNull();
  });
});
