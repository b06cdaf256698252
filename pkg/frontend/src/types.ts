// Payload shapes mirroring the service's JSON serializers.

export type Outcome =
  | { kind: "converged"; root: number; at_iter: number }
  | { kind: "cycle"; period: number; first_iter: number }
  | { kind: "diverged"; at_iter: number }
  | { kind: "derivative-too-small"; at_iter: number }
  | { kind: "domain-exit"; at_iter: number; offending_x: number }
  | { kind: "evaluation-fault"; at_iter: number; fault: { kind: string } }
  | { kind: "inconclusive" };

export interface TraceIterate {
  x: number;
  fx: number | null;
  dfx: number | null;
}

export interface TraceJson {
  function: string;
  x0: number;
  k: number;
  iterates: TraceIterate[];
  outcome: Outcome;
}

export type Point = [number, number];
export type SegmentJson = [Point, Point];

export interface SceneJson {
  scene_version: number;
  function: string;
  viewport: { xmin: number; xmax: number; ymin: number; ymax: number };
  annotation: {
    function: string;
    x0: number;
    iterations: number;
    x_k: number;
    f_x_k: number | null;
  };
  graph_polyline: Point[][];
  axis_points: Point[];
  graph_points: Point[];
  vertical_segments: SegmentJson[];
  tangent_segments: SegmentJson[];
  labels: { text: string; x: number; y: number }[];
}

export interface BasinSampleJson {
  x0: number;
  outcome: string;
  root_index: number | null;
}

export interface BasinJson {
  function: string;
  interval: [number, number];
  n: number;
  k: number;
  roots: { x_star: number }[];
  samples: BasinSampleJson[];
}

export interface ApiErrorBody {
  error: { kind: string; message: string; offset?: number };
}

/** Thrown by the transport on any non-2xx response. */
export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody | null,
  ) {
    super(body?.error?.message ?? `request failed with status ${status}`);
  }
}

export interface TraceRequest {
  function: string;
  x0: number;
  k: number;
  domain?: string;
  excluded?: number[];
}

export interface SceneRequest extends TraceRequest {
  viewport?: [number, number, number, number];
  graph_samples?: number;
}

export interface BasinRequest {
  function: string;
  interval: [number, number];
  n: number;
  k: number;
  domain?: string;
  excluded?: number[];
}

export interface Transport {
  trace(req: TraceRequest): Promise<TraceJson>;
  scene(req: SceneRequest): Promise<SceneJson>;
  basin(req: BasinRequest): Promise<BasinJson>;
}
