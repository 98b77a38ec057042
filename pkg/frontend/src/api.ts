/** Thin typed client for the correction service. All trajectories the UI
 * ever renders originate from these responses; nothing is computed locally. */

import type {
  CommitResponse,
  FinishResponse,
  KernelSpec,
  KernelsResponse,
  NewSessionForm,
  Point,
  PreviewResponse,
  SessionSnapshot,
} from "./types";

export class ServiceError extends Error {
  readonly code: string;
  readonly field?: string;

  constructor(code: string, message: string, field?: string) {
    super(message);
    this.code = code;
    this.field = field;
  }
}

async function parseError(response: Response): Promise<never> {
  let code = `http_${response.status}`;
  let message = response.statusText;
  let field: string | undefined;
  try {
    const body = (await response.json()) as { code?: string; message?: string; field?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
    if (body.field) field = body.field;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(code, message, field);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  kernels(): Promise<KernelsResponse> {
    return this.json("GET", "/kernels");
  }

  createSession(form: NewSessionForm): Promise<SessionSnapshot> {
    return this.json("POST", "/sessions", {
      env_seed: { features: form.features, instances: form.instances, seed: form.seed },
      kernel: form.kernel,
      beta: form.beta,
      ...(form.planner ? { planner: form.planner } : {}),
    });
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.json("GET", `/sessions/${id}`);
  }

  preview(id: string, t: number, q: Point, kernel?: KernelSpec): Promise<PreviewResponse> {
    return this.json("POST", `/sessions/${id}/preview`, {
      t,
      q,
      ...(kernel ? { kernel } : {}),
    });
  }

  commit(id: string, t: number, q: Point): Promise<CommitResponse> {
    return this.json("POST", `/sessions/${id}/corrections`, { t, q });
  }

  async trace(id: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/sessions/${id}/trace`);
    if (!response.ok) await parseError(response);
    return response.text();
  }

  finish(id: string): Promise<FinishResponse> {
    return this.json("POST", `/sessions/${id}/finish`);
  }
}
