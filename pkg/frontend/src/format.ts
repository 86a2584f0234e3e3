// Probability display rounding. Scores are shown to three decimals with
// ties broken toward the even digit, so 0.8725 renders as 0.872 and
// 0.8735 as 0.874. A small tolerance absorbs binary noise in the scaled
// value (0.5 is rarely hit exactly after multiplying by 1000).

const TIE_TOLERANCE = 1e-9;

export function roundHalfEven(value: number, digits: number): number {
  const scale = 10 ** digits;
  const scaled = value * scale;
  const floor = Math.floor(scaled);
  const fraction = scaled - floor;
  let units: number;
  if (Math.abs(fraction - 0.5) <= TIE_TOLERANCE * Math.max(1, Math.abs(scaled))) {
    units = floor % 2 === 0 ? floor : floor + 1;
  } else {
    units = fraction > 0.5 ? floor + 1 : floor;
  }
  return units / scale;
}

/** Render a probability or member score as a fixed three-decimal string. */
export function formatScore(value: number): string {
  return roundHalfEven(value, 3).toFixed(3);
}
