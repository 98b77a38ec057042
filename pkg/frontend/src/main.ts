/** DOM wiring: pointer interaction, forms, panels, and export download. */

import { ApiClient } from "./api";
import { hitTestWaypoint, toWorkspace, type Viewport } from "./geometry";
import { drawCurve, drawScene, drawWeights, overlayLegend, type Canvas2D } from "./renderer";
import { AppStore, MAX_PREVIEW_KERNELS } from "./store";
import type { KernelSpec, Point } from "./types";

const api = new ApiClient("");
const store = new AppStore(api);

const sceneCanvas = document.getElementById("scene") as HTMLCanvasElement;
const weightsCanvas = document.getElementById("weights") as HTMLCanvasElement;
const curveCanvas = document.getElementById("curve") as HTMLCanvasElement;
const errorBox = document.getElementById("error") as HTMLDivElement;
const statusBox = document.getElementById("status") as HTMLDivElement;
const legendBox = document.getElementById("legend") as HTMLDivElement;

const viewport: Viewport = { width: sceneCanvas.width, height: sceneCanvas.height, margin: 24 };

function kernelFromForm(prefix: string): KernelSpec {
  const variant = (document.getElementById(`${prefix}-variant`) as HTMLSelectElement).value;
  if (variant.startsWith("rbf")) {
    return { variant: "rbf", sigma: Number(variant.split(":")[1]) };
  }
  return { variant };
}

function screenPoint(event: PointerEvent): Point {
  const rect = sceneCanvas.getBoundingClientRect();
  return [
    ((event.clientX - rect.left) / rect.width) * sceneCanvas.width,
    ((event.clientY - rect.top) / rect.height) * sceneCanvas.height,
  ];
}

sceneCanvas.addEventListener("pointerdown", (event) => {
  const session = store.getState().session;
  if (!session) return;
  const hit = hitTestWaypoint(session.trajectory, screenPoint(event), viewport);
  if (hit !== null) {
    sceneCanvas.setPointerCapture(event.pointerId);
    store.beginDrag(hit);
  }
});

sceneCanvas.addEventListener("pointermove", (event) => {
  if (!store.getState().drag?.active) return;
  store.dragTo(toWorkspace(screenPoint(event), viewport));
});

sceneCanvas.addEventListener("pointerup", () => store.endDrag());

document.getElementById("new-session")!.addEventListener("click", () => {
  void store.newSession({
    features: Number((document.getElementById("features") as HTMLInputElement).value),
    instances: Number((document.getElementById("instances") as HTMLInputElement).value),
    seed: Number((document.getElementById("seed") as HTMLInputElement).value),
    kernel: kernelFromForm("learn"),
    beta: Number((document.getElementById("beta") as HTMLInputElement).value),
  });
});

document.getElementById("commit")!.addEventListener("click", () => {
  void store.commit();
});

document.getElementById("cancel")!.addEventListener("click", () => store.cancelDrag());

document.getElementById("finish")!.addEventListener("click", () => {
  void store.finish();
});

document.getElementById("export")!.addEventListener("click", async () => {
  const text = await store.exportTrace();
  if (text === null) return;
  const blob = new Blob([text], { type: "application/x-ndjson" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `trace-${store.getState().session?.session_id ?? "session"}.jsonl`;
  link.click();
  URL.revokeObjectURL(link.href);
});

function selectedPreviewKernels(): KernelSpec[] {
  const boxes = Array.from(
    document.querySelectorAll<HTMLInputElement>("#preview-kernels input:checked"),
  );
  const kernels = boxes.map((box) => {
    const [variant, sigma] = box.value.split(":");
    return sigma ? { variant, sigma: Number(sigma) } : { variant };
  });
  return kernels.length > 0 ? kernels : [kernelFromForm("learn")];
}

document.getElementById("preview-kernels")!.addEventListener("change", (event) => {
  const chosen = selectedPreviewKernels();
  if (chosen.length > MAX_PREVIEW_KERNELS) {
    (event.target as HTMLInputElement).checked = false;
    store.getState();
    errorBox.textContent = `at most ${MAX_PREVIEW_KERNELS} preview kernels`;
    return;
  }
  store.setPreviewKernels(chosen);
});

store.subscribe((state) => {
  drawScene(sceneCanvas.getContext("2d") as unknown as Canvas2D, state, viewport);
  drawWeights(
    weightsCanvas.getContext("2d") as unknown as Canvas2D,
    state.weights,
    weightsCanvas.width,
    weightsCanvas.height,
  );
  drawCurve(
    curveCanvas.getContext("2d") as unknown as Canvas2D,
    state.costCurve,
    curveCanvas.width,
    curveCanvas.height,
  );
  errorBox.textContent = state.error ?? "";
  legendBox.textContent = state.overlays.length > 0 ? overlayLegend(state).join("   ") : "";
  const session = state.session;
  statusBox.textContent = session
    ? `session ${session.session_id} · iteration ${session.iteration} · phase ${session.phase}` +
      (session.normalized_cost === null ? "" : ` · cost ${session.normalized_cost.toFixed(4)}`)
    : "no session";
  (document.getElementById("commit") as HTMLButtonElement).disabled =
    !state.drag || state.busy || session?.phase !== "awaiting_correction";
});

// Start with a default session so the page is immediately interactive.
void store.newSession({
  features: 2,
  instances: 1,
  seed: 0,
  kernel: { variant: "velocity" },
  beta: 0.8,
});
