import type { Clock } from "../src/requests.js";
import type {
  BasinJson,
  BasinRequest,
  Outcome,
  SceneJson,
  SceneRequest,
  TraceJson,
  TraceRequest,
  Transport,
} from "../src/types.js";

export class FakeClock implements Clock {
  private tasks = new Map<number, () => void>();
  private nextId = 1;

  setTimeout(fn: () => void, _ms: number): number {
    const id = this.nextId++;
    this.tasks.set(id, fn);
    return id;
  }

  clearTimeout(id: number): void {
    this.tasks.delete(id);
  }

  /** Fire everything currently scheduled (debounce windows elapse). */
  flush(): void {
    const fns = [...this.tasks.values()];
    this.tasks.clear();
    fns.forEach((fn) => fn());
  }
}

export function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (error: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let pending promise reactions run. */
export async function settle(): Promise<void> {
  for (let i = 0; i < 8; i++) await Promise.resolve();
}

export function sceneFor(fn: string, x0: number, k: number): SceneJson {
  return {
    scene_version: 1,
    function: fn,
    viewport: { xmin: -3, xmax: 3, ymin: -2, ymax: 2 },
    annotation: { function: fn, x0, iterations: k, x_k: x0, f_x_k: 0.0 },
    graph_polyline: [
      [
        [-1, -0.5],
        [1, 0.5],
      ],
    ],
    axis_points: [[x0, 0]],
    graph_points: [[x0, 0.1]],
    vertical_segments: [],
    tangent_segments: [],
    labels: [
      { text: "X0", x: x0, y: 0 },
      { text: "Xk", x: x0, y: 0 },
    ],
  };
}

export function traceFor(fn: string, x0: number, k: number, outcome: Outcome): TraceJson {
  return { function: fn, x0, k, iterates: [{ x: x0, fx: 0.1, dfx: 1.0 }], outcome };
}

export interface FakeTransportOptions {
  outcomeFor?: (x0: number) => Outcome;
  traceError?: (req: TraceRequest) => unknown | null;
  basin?: BasinJson | null;
  basinError?: unknown | null;
  deferTrace?: boolean;
}

export class FakeTransport implements Transport {
  calls: { trace: TraceRequest[]; scene: SceneRequest[]; basin: BasinRequest[] } = {
    trace: [],
    scene: [],
    basin: [],
  };
  pendingTraces: { req: TraceRequest; resolve: (t: TraceJson) => void; reject: (e: unknown) => void }[] =
    [];

  constructor(private readonly opts: FakeTransportOptions = {}) {}

  private outcome(x0: number): Outcome {
    if (this.opts.outcomeFor) return this.opts.outcomeFor(x0);
    return { kind: "converged", root: 0, at_iter: 3 };
  }

  trace(req: TraceRequest): Promise<TraceJson> {
    this.calls.trace.push(req);
    const err = this.opts.traceError?.(req);
    if (err) return Promise.reject(err);
    if (this.opts.deferTrace) {
      const d = deferred<TraceJson>();
      this.pendingTraces.push({ req, resolve: d.resolve, reject: d.reject });
      return d.promise;
    }
    return Promise.resolve(traceFor(req.function, req.x0, req.k, this.outcome(req.x0)));
  }

  resolveTrace(index = 0): void {
    const entry = this.pendingTraces.splice(index, 1)[0];
    if (!entry) throw new Error("no pending trace");
    entry.resolve(traceFor(entry.req.function, entry.req.x0, entry.req.k, this.outcome(entry.req.x0)));
  }

  scene(req: SceneRequest): Promise<SceneJson> {
    this.calls.scene.push(req);
    return Promise.resolve(sceneFor(req.function, req.x0, req.k));
  }

  basin(req: BasinRequest): Promise<BasinJson> {
    this.calls.basin.push(req);
    if (this.opts.basinError) return Promise.reject(this.opts.basinError);
    if (this.opts.basin) return Promise.resolve(this.opts.basin);
    const [a, b] = req.interval;
    const samples = [];
    for (let i = 0; i <= req.n; i++) {
      const x0 = a + ((b - a) * i) / req.n;
      const outcome = this.outcome(x0);
      samples.push({
        x0,
        outcome: outcome.kind,
        root_index: outcome.kind === "converged" ? 0 : null,
      });
    }
    return Promise.resolve({
      function: req.function,
      interval: req.interval,
      n: req.n,
      k: req.k,
      roots: [{ x_star: 0 }],
      samples,
    });
  }
}
