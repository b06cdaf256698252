// HTTP transport for the /api/v1 endpoints. The base URL is configurable
// at runtime via window.NEWTON_LENS_API and defaults to same-origin.

import {
  ApiErrorBody,
  ApiFailure,
  BasinJson,
  BasinRequest,
  SceneJson,
  SceneRequest,
  TraceJson,
  TraceRequest,
  Transport,
} from "./types.js";

declare global {
  interface Window {
    NEWTON_LENS_API?: string;
  }
}

async function postJson<T>(url: string, body: unknown): Promise<T> {
  const resp = await fetch(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    let detail: ApiErrorBody | null = null;
    try {
      detail = (await resp.json()) as ApiErrorBody;
    } catch {
      detail = null;
    }
    throw new ApiFailure(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export function httpTransport(baseUrl?: string): Transport {
  const base = (baseUrl ?? window.NEWTON_LENS_API ?? "").replace(/\/$/, "");
  return {
    trace: (req: TraceRequest) => postJson<TraceJson>(`${base}/api/v1/trace`, req),
    scene: (req: SceneRequest) => postJson<SceneJson>(`${base}/api/v1/scene`, req),
    basin: (req: BasinRequest) => postJson<BasinJson>(`${base}/api/v1/basin`, req),
  };
}
