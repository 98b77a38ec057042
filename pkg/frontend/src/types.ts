/** Wire types mirroring the correction service's JSON bodies. */

export interface KernelSpec {
  variant: string;
  sigma?: number | null;
}

export interface ObstacleDoc {
  position: number[];
  type_id: number;
  radius: number;
}

export interface EnvironmentDoc {
  dim: number;
  start: number[];
  goal: number[];
  obstacles: ObstacleDoc[];
  num_types: number;
  ground_truth_w: number[];
  seed: number;
}

export type Point = [number, number];

export interface SessionSnapshot {
  session_id: string;
  phase: string;
  iteration: number;
  trajectory: number[][];
  weights: number[];
  kernel: KernelSpec;
  beta: number;
  env: EnvironmentDoc;
  has_ground_truth: boolean;
  normalized_cost: number | null;
  num_records: number;
}

export interface PreviewResponse {
  trajectory: number[][];
  kernel: KernelSpec;
}

export interface NormalizedCosts {
  planned_before: number;
  corrected: number;
  planned_after: number;
}

export interface CommitResponse {
  iteration: number;
  corrected: number[][];
  weights: number[];
  planned: number[][];
  normalized_cost: NormalizedCosts | null;
  phase: string;
}

export interface FinishResponse {
  phase: string;
  num_records: number;
}

export interface KernelsResponse {
  variants: string[];
  sigma_presets: number[];
}

export interface NewSessionForm {
  features: number;
  instances: number;
  seed: number;
  kernel: KernelSpec;
  beta: number;
  planner?: Record<string, number>;
}
