import { NextHitResponse, StatusPayload, SubmitResponse } from "./types.js";
import { auditPreSubmissionPayload } from "./audit.js";

export interface HttpResponse {
  status: number;
  body: unknown;
}

export type Transport = (
  method: "GET" | "POST",
  path: string,
  params?: Record<string, string>,
  body?: unknown
) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`task service error ${status}`);
  }
}

export function fetchTransport(baseUrl: string): Transport {
  const root = baseUrl.replace(/\/$/, "");
  return async (method, path, params, body) => {
    const query = params ? "?" + new URLSearchParams(params).toString() : "";
    const resp = await fetch(root + path + query, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    let parsed: unknown = null;
    try {
      parsed = await resp.json();
    } catch {
      parsed = null;
    }
    return { status: resp.status, body: parsed };
  };
}

/** Typed client for the three task-service endpoints. The whole client is
 * configured by a single base URL (or an injected transport in tests). */
export class ApiClient {
  private transport: Transport;

  constructor(baseUrlOrTransport: string | Transport) {
    this.transport =
      typeof baseUrlOrTransport === "string"
        ? fetchTransport(baseUrlOrTransport)
        : baseUrlOrTransport;
  }

  async nextHit(worker: string): Promise<NextHitResponse> {
    const resp = await this.transport("GET", "/next-hit", { worker });
    if (resp.status === 403) {
      const detail = (resp.body as { detail?: { reason?: string } })?.detail;
      return { terminal: "blocked", reason: detail?.reason ?? "blocked" };
    }
    if (resp.status !== 200) throw new ApiError(resp.status, resp.body);
    // hard client-side guarantee: no ground truth before submission
    auditPreSubmissionPayload(resp.body);
    return resp.body as NextHitResponse;
  }

  async submit(
    worker: string,
    hitId: string,
    boxes: [number, number, number, number][],
    elapsed: number,
    complete = false
  ): Promise<SubmitResponse> {
    const resp = await this.transport("POST", "/submit", undefined, {
      worker,
      hit_id: hitId,
      boxes,
      elapsed,
      complete,
    });
    if (resp.status !== 200) throw new ApiError(resp.status, resp.body);
    return resp.body as SubmitResponse;
  }

  async status(worker: string): Promise<StatusPayload> {
    const resp = await this.transport("GET", "/status", { worker });
    if (resp.status !== 200) throw new ApiError(resp.status, resp.body);
    return resp.body as StatusPayload;
  }
}
