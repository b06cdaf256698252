// Explorer state machine. Pure of DOM concerns: a Transport performs the
// HTTP work and an onChange callback hears every state transition, so the
// whole interaction loop is testable with fakes.

import { Banner, outcomeBanner, parseErrorBanner } from "./banner.js";
import { Clock, DebouncedLatest, systemClock } from "./requests.js";
import type { Viewport } from "./transform.js";
import { ApiFailure, BasinJson, Outcome, SceneJson, TraceJson, Transport } from "./types.js";

export interface UiState {
  functionText: string;
  x0: number;
  k: number;
  viewport: Viewport;
  scene: SceneJson | null;
  outcome: Outcome | null;
  basin: BasinJson | null;
  basinVisible: boolean;
  /** The displayed scene lags the displayed (function, x0, k). */
  stale: boolean;
  pending: boolean;
  banner: Banner;
}

interface PairParams {
  functionText: string;
  x0: number;
  k: number;
  viewport: Viewport;
}

interface PairResult {
  trace: TraceJson;
  scene: SceneJson;
}

const DEFAULT_VIEWPORT: Viewport = { xmin: -3, xmax: 3, ymin: -2, ymax: 2 };
export const BASIN_SAMPLES = 240;

export class ExplorerModel {
  state: UiState;
  private readonly pair: DebouncedLatest<PairParams, PairResult>;
  private readonly basinChannel: DebouncedLatest<PairParams, BasinJson>;

  constructor(
    private readonly transport: Transport,
    private readonly onChange: (state: UiState) => void,
    waitMs = 30,
    clock: Clock = systemClock,
    initial?: Partial<Pick<UiState, "functionText" | "x0" | "k" | "viewport">>,
  ) {
    this.state = {
      functionText: initial?.functionText ?? "x / sqrt(1 + x^2)",
      x0: initial?.x0 ?? 0.9,
      k: initial?.k ?? 8,
      viewport: initial?.viewport ?? DEFAULT_VIEWPORT,
      scene: null,
      outcome: null,
      basin: null,
      basinVisible: false,
      stale: true,
      pending: false,
      banner: { kind: "none" },
    };
    this.pair = new DebouncedLatest(
      (p) => this.sendPair(p),
      (p, r) => this.applyPair(p, r),
      (p, e) => this.failRequest(e),
      waitMs,
      clock,
    );
    this.basinChannel = new DebouncedLatest(
      (p) => this.sendBasin(p),
      (_p, basin) => this.applyBasin(basin),
      (_p, e) => this.failBasin(e),
      waitMs,
      clock,
    );
  }

  /** Kick off the initial scene request. */
  start(): void {
    this.refresh();
  }

  setFunction(text: string): void {
    if (text === this.state.functionText) return;
    this.state.functionText = text;
    this.state.stale = true;
    this.refresh();
    if (this.state.basinVisible) this.refreshBasin();
  }

  /** Drag handler: optimistic handle move plus a debounced request. */
  setX0(x0: number): void {
    if (!Number.isFinite(x0)) return;
    this.state.x0 = x0;
    this.state.stale = true;
    this.refresh();
  }

  setK(k: number): void {
    const clamped = Math.max(1, Math.min(50, Math.round(k)));
    if (clamped === this.state.k) return;
    this.state.k = clamped;
    this.state.stale = true;
    this.refresh();
    if (this.state.basinVisible) this.refreshBasin();
  }

  toggleBasin(): void {
    this.state.basinVisible = !this.state.basinVisible;
    if (this.state.basinVisible && this.state.basin === null) {
      this.refreshBasin();
    }
    this.notify();
  }

  /** Clicking the strip jumps the start point to the clicked sample. */
  clickBasin(worldX: number): void {
    const basin = this.state.basin;
    if (!basin || !this.state.basinVisible || basin.samples.length === 0) return;
    const [a, b] = basin.interval;
    const i = Math.round(((worldX - a) / (b - a)) * basin.n);
    const sample = basin.samples[Math.max(0, Math.min(basin.samples.length - 1, i))];
    if (sample) this.setX0(sample.x0);
  }

  private params(): PairParams {
    return {
      functionText: this.state.functionText,
      x0: this.state.x0,
      k: this.state.k,
      viewport: this.state.viewport,
    };
  }

  private refresh(): void {
    this.pair.request(this.params());
    this.updatePending();
  }

  private refreshBasin(): void {
    this.basinChannel.request(this.params());
    this.updatePending();
  }

  private async sendPair(p: PairParams): Promise<PairResult> {
    const { viewport: v } = p;
    const base = { function: p.functionText, x0: p.x0, k: p.k };
    const [trace, scene] = await Promise.all([
      this.transport.trace(base),
      this.transport.scene({ ...base, viewport: [v.xmin, v.xmax, v.ymin, v.ymax] }),
    ]);
    return { trace, scene };
  }

  private sendBasin(p: PairParams): Promise<BasinJson> {
    return this.transport.basin({
      function: p.functionText,
      interval: [p.viewport.xmin, p.viewport.xmax],
      n: BASIN_SAMPLES,
      k: Math.max(p.k, 40),
    });
  }

  private applyPair(p: PairParams, result: PairResult): void {
    this.state.scene = result.scene;
    this.state.outcome = result.trace.outcome;
    this.state.banner = outcomeBanner(result.trace.outcome);
    this.state.stale = !this.matchesState(p);
    this.notify();
  }

  private failRequest(error: unknown): void {
    if (error instanceof ApiFailure && error.body?.error) {
      const detail = error.body.error;
      if (detail.kind === "parse-error" && detail.offset !== undefined) {
        this.state.banner = parseErrorBanner(this.state.functionText, detail.message, detail.offset);
      } else {
        this.state.banner = { kind: "error", message: detail.message };
      }
    } else {
      this.state.banner = { kind: "error", message: String(error) };
    }
    this.notify();
  }

  private applyBasin(basin: BasinJson): void {
    this.state.basin = basin;
    this.notify();
  }

  private failBasin(_error: unknown): void {
    // strip is hidden on request failure; the main banner already reports
    this.state.basin = null;
    this.state.basinVisible = false;
    this.notify();
  }

  private matchesState(p: PairParams): boolean {
    return (
      p.functionText === this.state.functionText &&
      p.x0 === this.state.x0 &&
      p.k === this.state.k
    );
  }

  private updatePending(): void {
    this.notify();
  }

  private notify(): void {
    this.state.pending = this.pair.pending || this.basinChannel.pending;
    this.onChange(this.state);
  }

  /** diagnostics for tests */
  get maxInFlight(): number {
    return Math.max(this.pair.maxInFlight, this.basinChannel.maxInFlight);
  }
}
