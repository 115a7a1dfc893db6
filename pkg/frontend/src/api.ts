// Thin fetch client for the classification service. Machine-readable error
// codes from the service surface as ApiError; network failures keep their
// native error so the caller can offer a retry.

import type { ClassifyRequest } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorOf(res: Response): Promise<ApiError> {
  let code = "HTTP_ERROR";
  let message = `request failed with status ${res.status}`;
  try {
    const body = (await res.json()) as { code?: string; message?: string };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(res.status, code, message);
}

export async function classify(baseUrl: string, request: ClassifyRequest): Promise<unknown> {
  const res = await fetch(`${baseUrl}/api/v1/classify`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!res.ok) throw await errorOf(res);
  return res.json();
}

export async function manualGet(baseUrl: string, heading: string): Promise<unknown> {
  const res = await fetch(`${baseUrl}/api/v1/manual/${heading}`);
  if (!res.ok) throw await errorOf(res);
  return res.json();
}

export async function modelInfo(baseUrl: string): Promise<unknown> {
  const res = await fetch(`${baseUrl}/api/v1/model/info`);
  if (!res.ok) throw await errorOf(res);
  return res.json();
}
