// Debounced, latest-wins request channel: at most one request in flight,
// superseded responses discarded by sequence number, and a trailing
// request fired on completion when the parameters moved meanwhile.

export interface Clock {
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(id: number): void;
}

export const systemClock: Clock = {
  setTimeout: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clearTimeout: (id) => clearTimeout(id),
};

export class DebouncedLatest<P, R> {
  private seq = 0;
  private latest: P | null = null;
  private timer: number | null = null;
  private flying = false;
  private trailing = false;

  /** test/diagnostic counters */
  sendCount = 0;
  inFlightNow = 0;
  maxInFlight = 0;

  constructor(
    private readonly send: (params: P) => Promise<R>,
    private readonly apply: (params: P, result: R) => void,
    private readonly fail: (params: P, error: unknown) => void,
    private readonly waitMs = 30,
    private readonly clock: Clock = systemClock,
  ) {}

  /** True while a response is outstanding or a request is scheduled. */
  get pending(): boolean {
    return this.flying || this.trailing || this.timer !== null;
  }

  request(params: P): void {
    this.latest = params;
    if (this.timer !== null) this.clock.clearTimeout(this.timer);
    this.timer = this.clock.setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.waitMs);
  }

  private fire(): void {
    if (this.flying) {
      this.trailing = true;
      return;
    }
    const params = this.latest as P;
    const seq = ++this.seq;
    this.flying = true;
    this.sendCount += 1;
    this.inFlightNow += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlightNow);
    this.send(params).then(
      (result) => this.finish(seq, () => this.apply(params, result)),
      (error) => this.finish(seq, () => this.fail(params, error)),
    );
  }

  private finish(seq: number, deliver: () => void): void {
    this.flying = false;
    this.inFlightNow -= 1;
    // A newer request is scheduled or queued: this response is superseded.
    const superseded = this.trailing || this.timer !== null || seq < this.seq;
    if (!superseded) deliver();
    if (this.trailing) {
      this.trailing = false;
      this.fire();
    }
  }
}
