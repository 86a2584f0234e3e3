import { describe, expect, it } from "vitest";

import { formatScore, roundHalfEven } from "../src/format.js";

describe("roundHalfEven", () => {
  it("rounds ties to the even neighbour", () => {
    expect(roundHalfEven(2.5, 0)).toBe(2);
    expect(roundHalfEven(3.5, 0)).toBe(4);
    expect(roundHalfEven(0.8725, 3)).toBe(0.872);
    expect(roundHalfEven(0.8735, 3)).toBe(0.874);
  });

  it("rounds non-ties to the nearest value", () => {
    expect(roundHalfEven(0.87349, 3)).toBe(0.873);
    expect(roundHalfEven(0.8736, 3)).toBe(0.874);
    expect(roundHalfEven(0.873, 3)).toBe(0.873);
  });
});

describe("formatScore", () => {
  it("renders three decimals", () => {
    expect(formatScore(0.873)).toBe("0.873");
    expect(formatScore(0)).toBe("0.000");
    expect(formatScore(1)).toBe("1.000");
    expect(formatScore(0.5)).toBe("0.500");
  });

  it("breaks ties toward even", () => {
    expect(formatScore(0.0005)).toBe("0.000");
    expect(formatScore(0.0015)).toBe("0.002");
    expect(formatScore(0.9995)).toBe("1.000");
    expect(formatScore(0.1235)).toBe("0.124");
    expect(formatScore(0.1245)).toBe("0.124");
  });
});
