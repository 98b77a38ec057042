/** Application state and actions.
 *
 * Single source of truth: every rendered trajectory is a verbatim service
 * response. Dragging fires throttled preview requests (one per selected
 * kernel, up to three); responses carry a sequence number and stale ones
 * are dropped, so the overlay always shows the newest answered position.
 * A commit applies the whole server response in one synchronous snapshot,
 * so no frame can mix data from two iterations.
 */

import { ApiClient, ServiceError } from "./api";
import { clampToWorkspace } from "./geometry";
import type {
  CommitResponse,
  KernelSpec,
  NewSessionForm,
  Point,
  SessionSnapshot,
} from "./types";

export const MAX_PREVIEW_KERNELS = 3;
export const PREVIEW_THROTTLE_MS = 33; // ~30 requests/s per kernel while dragging

export interface PreviewOverlay {
  kernel: KernelSpec;
  /** Latest previewed trajectory for this kernel, straight from the service. */
  trajectory: number[][] | null;
}

export interface DragState {
  index: number;
  /** Candidate position in workspace coordinates, clamped to bounds. */
  position: Point;
  active: boolean; // pointer still down
}

export interface AppState {
  session: SessionSnapshot | null;
  drag: DragState | null;
  previewKernels: KernelSpec[];
  overlays: PreviewOverlay[];
  weights: number[];
  /** Normalized cost of the planned trajectory per iteration (index 0 = iteration 1). */
  costCurve: number[];
  error: string | null;
  busy: boolean;
}

export function kernelLabel(kernel: KernelSpec): string {
  return kernel.variant === "rbf" ? `rbf σ=${kernel.sigma}` : kernel.variant;
}

function sameKernel(a: KernelSpec, b: KernelSpec): boolean {
  return a.variant === b.variant && (a.sigma ?? null) === (b.sigma ?? null);
}

type Listener = (state: AppState) => void;

export class AppStore {
  private state: AppState = {
    session: null,
    drag: null,
    previewKernels: [{ variant: "velocity" }],
    overlays: [],
    weights: [],
    costCurve: [],
    error: null,
    busy: false,
  };

  private listeners: Listener[] = [];
  private sequence = 0;
  private applied: Map<string, number> = new Map();
  private inflight = 0;
  private lastFire = -Infinity;
  private trailing: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly throttleMs: number = PREVIEW_THROTTLE_MS,
  ) {}

  getState(): AppState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(partial: Partial<AppState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Resolves once every fired preview request has been answered. */
  async waitForPreviews(): Promise<void> {
    while (this.inflight > 0 || this.trailing !== null) {
      await new Promise((resolve) => setTimeout(resolve, 5));
    }
  }

  async newSession(form: NewSessionForm): Promise<void> {
    this.update({ busy: true, error: null });
    try {
      const session = await this.api.createSession(form);
      this.applied.clear();
      this.update({
        session,
        drag: null,
        overlays: [],
        weights: session.weights,
        costCurve: session.normalized_cost === null ? [] : [session.normalized_cost],
        busy: false,
        error: null,
      });
    } catch (error) {
      this.update({ busy: false, error: describe(error) });
    }
  }

  setPreviewKernels(kernels: KernelSpec[]): void {
    const chosen = kernels.slice(0, MAX_PREVIEW_KERNELS);
    if (chosen.length === 0) return;
    this.update({ previewKernels: chosen, overlays: [] });
    // Re-preview the current candidate immediately under the new kernels.
    if (this.state.drag) this.firePreviews(this.state.drag);
  }

  beginDrag(index: number): void {
    const session = this.state.session;
    if (!session || session.phase !== "awaiting_correction") return;
    if (index <= 0 || index >= session.trajectory.length - 1) {
      this.update({ error: "endpoints are fixed; drag an interior waypoint" });
      return;
    }
    const position: Point = [session.trajectory[index][0], session.trajectory[index][1]];
    this.update({ drag: { index, position, active: true }, error: null });
  }

  dragTo(position: Point): void {
    const drag = this.state.drag;
    if (!drag || !drag.active) return;
    const clamped = clampToWorkspace(position);
    const next: DragState = { ...drag, position: clamped };
    this.update({ drag: next });
    this.schedulePreviews(next);
  }

  endDrag(): void {
    const drag = this.state.drag;
    if (!drag) return;
    // Candidate stays (so it can be committed); the pointer is just up.
    this.update({ drag: { ...drag, active: false } });
  }

  cancelDrag(): void {
    this.update({ drag: null, overlays: [] });
  }

  private schedulePreviews(drag: DragState): void {
    const now = Date.now();
    const elapsed = now - this.lastFire;
    if (elapsed >= this.throttleMs) {
      this.lastFire = now;
      this.firePreviews(drag);
    } else if (this.trailing === null) {
      this.trailing = setTimeout(() => {
        this.trailing = null;
        const current = this.state.drag;
        if (current) {
          this.lastFire = Date.now();
          this.firePreviews(current);
        }
      }, this.throttleMs - elapsed);
    }
  }

  private firePreviews(drag: DragState): void {
    const session = this.state.session;
    if (!session) return;
    const seq = ++this.sequence;
    for (const kernel of this.state.previewKernels) {
      const key = kernelLabel(kernel);
      this.inflight += 1;
      this.api
        .preview(session.session_id, drag.index, drag.position, kernel)
        .then((response) => {
          if ((this.applied.get(key) ?? -1) >= seq) return; // stale answer
          if (this.state.session?.session_id !== session.session_id) return;
          this.applied.set(key, seq);
          const overlays = this.state.previewKernels.map((k) => {
            const existing = this.state.overlays.find((o) => sameKernel(o.kernel, k));
            return sameKernel(k, kernel)
              ? { kernel: k, trajectory: response.trajectory }
              : (existing ?? { kernel: k, trajectory: null });
          });
          this.update({ overlays });
        })
        .catch((error) => {
          this.update({ error: describe(error) });
        })
        .finally(() => {
          this.inflight -= 1;
        });
    }
  }

  /** Commit the drag candidate as a correction and apply one atomic snapshot. */
  async commit(): Promise<CommitResponse | null> {
    const session = this.state.session;
    const drag = this.state.drag;
    if (!session || !drag) return null;
    this.update({ busy: true, error: null });
    try {
      const response = await this.api.commit(session.session_id, drag.index, drag.position);
      const updatedSession: SessionSnapshot = {
        ...session,
        iteration: response.iteration,
        trajectory: response.planned,
        weights: response.weights,
        phase: response.phase,
        normalized_cost: response.normalized_cost?.planned_after ?? null,
        num_records: session.num_records + 1,
      };
      const costCurve = response.normalized_cost
        ? [...this.state.costCurve, response.normalized_cost.planned_after]
        : this.state.costCurve;
      this.update({
        session: updatedSession,
        weights: response.weights,
        costCurve,
        drag: null,
        overlays: [],
        busy: false,
      });
      return response;
    } catch (error) {
      this.update({ busy: false, error: describe(error) });
      return null;
    }
  }

  async exportTrace(): Promise<string | null> {
    const session = this.state.session;
    if (!session) return null;
    try {
      return await this.api.trace(session.session_id);
    } catch (error) {
      this.update({ error: describe(error) });
      return null;
    }
  }

  async finish(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    try {
      const response = await this.api.finish(session.session_id);
      this.update({
        session: { ...session, phase: response.phase },
        drag: null,
        overlays: [],
      });
    } catch (error) {
      this.update({ error: describe(error) });
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ServiceError) {
    return error.field ? `${error.message} (${error.field})` : error.message;
  }
  return error instanceof Error ? error.message : String(error);
}
