// Outcome and error banners, including the parse-error caret line.

import type { Outcome } from "./types.js";

export type Banner =
  | { kind: "none" }
  | { kind: "outcome"; text: string; tone: "ok" | "warn" | "bad" }
  | { kind: "parse-error"; message: string; line: string; caret: string }
  | { kind: "error"; message: string };

const fmt = (v: number) => {
  const a = Math.abs(v);
  return a !== 0 && (a >= 1e6 || a < 1e-4) ? v.toExponential(6) : v.toPrecision(8).replace(/\.?0+$/, "");
};

export function outcomeBanner(outcome: Outcome): Banner {
  switch (outcome.kind) {
    case "converged":
      return {
        kind: "outcome",
        tone: "ok",
        text: `converged to ${fmt(outcome.root)} at iteration ${outcome.at_iter}`,
      };
    case "cycle":
      return {
        kind: "outcome",
        tone: "warn",
        text: `cycle of period ${outcome.period} from iteration ${outcome.first_iter}`,
      };
    case "diverged":
      return { kind: "outcome", tone: "bad", text: `diverged by iteration ${outcome.at_iter}` };
    case "derivative-too-small":
      return {
        kind: "outcome",
        tone: "bad",
        text: `derivative vanished at iteration ${outcome.at_iter}`,
      };
    case "domain-exit":
      return {
        kind: "outcome",
        tone: "bad",
        text: `left the domain at iteration ${outcome.at_iter} (x = ${fmt(outcome.offending_x)})`,
      };
    case "evaluation-fault":
      return {
        kind: "outcome",
        tone: "bad",
        text: `evaluation fault (${outcome.fault.kind}) at iteration ${outcome.at_iter}`,
      };
    case "inconclusive":
      return { kind: "outcome", tone: "warn", text: "inconclusive: iteration budget exhausted" };
  }
}

/** The service reports parse offsets in UTF-8 bytes; map one back to a
 * character index so the caret lands under the right glyph. */
export function byteOffsetToCharIndex(text: string, byteOffset: number): number {
  const encoder = new TextEncoder();
  let bytes = 0;
  let index = 0;
  for (const ch of text) {
    if (bytes >= byteOffset) break;
    bytes += encoder.encode(ch).length;
    index += ch.length; // surrogate pairs count as 2 UTF-16 units
  }
  return Math.min(index, text.length);
}

export function parseErrorBanner(text: string, message: string, byteOffset: number): Banner {
  const caretAt = byteOffsetToCharIndex(text, byteOffset);
  return {
    kind: "parse-error",
    message,
    line: text,
    caret: " ".repeat(caretAt) + "^",
  };
}
