"""Session-oriented HTTP API for interactive correction-based learning.

Each session owns one environment, one learning kernel, and a weight
estimate. The client inspects the current plan, previews how a candidate
correction would propagate under any kernel (a pure computation, no state
change), commits a correction to run one learning iteration, and reads
back the append-only trace as JSONL. Sessions live in memory; request
logs replay to identical state because session ids are sequential and
every computation is deterministic.

Errors use a uniform JSON shape: {"code", "message", "field"?}.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .deform import DeformError, deform
from .envgen import GenConfig, attach_ground_truth, generate_environment
from .envs import Environment, from_json_dict, normalized_cost, to_json_dict
from .kernels import VARIANTS, KernelError, PropagationKernel, make_kernel
from .learner import LearnerState, TraceRecord, initial_state, run_iteration
from .planner import PlannerConfig, plan
from .trajectory import Correction, Trajectory

SIGMA_PRESETS = (1.0, 3.0, 5.0)

PHASE_AWAITING = "awaiting_correction"
PHASE_DONE = "done"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field_name


class _RWLock:
    """Many concurrent readers (previews, reads) or one writer (commit/finish)."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()


@dataclass
class Session:
    id: str
    env: Environment
    kernel: PropagationKernel
    state: LearnerState
    current_plan: Trajectory
    planner_cfg: PlannerConfig
    phase: str = PHASE_AWAITING
    records: list[TraceRecord] = field(default_factory=list)
    lock: _RWLock = field(default_factory=_RWLock)


class KernelSpec(BaseModel):
    variant: str
    sigma: Optional[float] = None


class EnvSeedSpec(BaseModel):
    features: int
    instances: int
    seed: int = 0
    radius: float = 1.0


class CreateSessionRequest(BaseModel):
    kernel: KernelSpec
    beta: float
    env: Optional[dict] = None
    env_seed: Optional[EnvSeedSpec] = None
    planner: Optional[dict] = None


class PreviewRequest(BaseModel):
    t: int
    q: list[float]
    kernel: Optional[KernelSpec] = None


class CorrectionRequest(BaseModel):
    t: int
    q: list[float]


def _build_kernel(spec: KernelSpec, T: int) -> PropagationKernel:
    try:
        return make_kernel(spec.variant, T, spec.sigma)
    except KernelError as exc:
        raise ApiError(400, "invalid_kernel", str(exc), "kernel") from exc


def _trajectory_json(xi: Trajectory) -> list[list[float]]:
    return xi.waypoints.tolist()


def _norm_cost(env: Environment, xi: Trajectory) -> Optional[float]:
    if env.ground_truth is None:
        return None
    return normalized_cost(xi, env)


def create_app(
    planner_cfg: Optional[PlannerConfig] = None,
    ui_dir: Optional[Path] = None,
    trace_dir: Optional[Path] = None,
) -> FastAPI:
    """Build the service. State is per-app, so tests get isolated instances."""
    default_planner = planner_cfg or PlannerConfig()
    app = FastAPI(title="corrlearn correction service")
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()
    counter = {"next": 1}

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        if exc.field is not None:
            body["field"] = exc.field
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = ".".join(str(p) for p in first.get("loc", []) if p != "body")
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation_error",
                "message": first.get("msg", "invalid request"),
                "field": loc or None,
            },
        )

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        return session

    def _session_snapshot(session: Session) -> dict:
        return {
            "session_id": session.id,
            "phase": session.phase,
            "iteration": session.state.iteration,
            "trajectory": _trajectory_json(session.current_plan),
            "weights": session.state.w.tolist(),
            "kernel": {"variant": session.kernel.variant, "sigma": session.kernel.sigma},
            "beta": session.state.beta,
            "env": to_json_dict(session.env),
            "has_ground_truth": session.env.ground_truth is not None,
            "normalized_cost": _norm_cost(session.env, session.current_plan),
            "num_records": len(session.records),
        }

    @app.get("/kernels")
    def kernels() -> dict:
        return {"variants": list(VARIANTS), "sigma_presets": list(SIGMA_PRESETS)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        if (body.env is None) == (body.env_seed is None):
            raise ApiError(
                400, "invalid_env", "provide exactly one of 'env' or 'env_seed'", "env"
            )
        cfg = default_planner
        if body.planner:
            try:
                cfg = PlannerConfig(**{**cfg.__dict__, **body.planner})
            except (TypeError, ValueError) as exc:
                raise ApiError(400, "invalid_planner", str(exc), "planner") from exc
        if not body.beta > 0:
            raise ApiError(400, "invalid_beta", "beta must be positive", "beta")
        kernel = _build_kernel(body.kernel, cfg.T)

        if body.env_seed is not None:
            gen = GenConfig(radius=body.env_seed.radius, planner=cfg)
            try:
                env = generate_environment(
                    body.env_seed.features, body.env_seed.instances, body.env_seed.seed, gen
                )
            except (ValueError, RuntimeError) as exc:
                raise ApiError(400, "invalid_env", str(exc), "env_seed") from exc
        else:
            try:
                env = from_json_dict(body.env)
            except (KeyError, TypeError, ValueError) as exc:
                raise ApiError(400, "invalid_env", f"malformed environment: {exc}", "env") from exc
            try:
                env = attach_ground_truth(env, cfg)
            except ValueError:
                pass  # no usable normalization; costs are simply omitted

        state = initial_state(env.num_features, body.beta, kernel)
        first_plan = plan(env, state.w, cfg)
        with store_lock:
            session_id = f"s{counter['next']:04d}"
            counter["next"] += 1
            session = Session(
                id=session_id,
                env=env,
                kernel=kernel,
                state=state,
                current_plan=first_plan,
                planner_cfg=cfg,
            )
            sessions[session_id] = session
        return _session_snapshot(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        session = _get_session(session_id)
        session.lock.acquire_read()
        try:
            return _session_snapshot(session)
        finally:
            session.lock.release_read()

    @app.post("/sessions/{session_id}/preview")
    def preview(session_id: str, body: PreviewRequest) -> dict:
        session = _get_session(session_id)
        session.lock.acquire_read()
        try:
            if session.phase != PHASE_AWAITING:
                raise ApiError(409, "phase_violation", "session is finished")
            kernel = session.kernel
            if body.kernel is not None:
                kernel = _build_kernel(body.kernel, session.planner_cfg.T)
            try:
                deformed, _ = deform(
                    session.current_plan, Correction(t=body.t, q=np.array(body.q)), kernel
                )
            except (DeformError, ValueError) as exc:
                raise ApiError(400, "invalid_correction", str(exc), "t") from exc
            return {
                "trajectory": _trajectory_json(deformed),
                "kernel": {"variant": kernel.variant, "sigma": kernel.sigma},
            }
        finally:
            session.lock.release_read()

    @app.post("/sessions/{session_id}/corrections")
    def commit_correction(session_id: str, body: CorrectionRequest) -> dict:
        session = _get_session(session_id)
        session.lock.acquire_write()
        try:
            if session.phase != PHASE_AWAITING:
                raise ApiError(409, "phase_violation", "session is finished")
            correction = Correction(t=body.t, q=np.array(body.q))
            try:
                new_state, record = run_iteration(
                    session.state,
                    session.env,
                    lambda _xi: correction,
                    session.planner_cfg,
                    planned=session.current_plan,
                )
            except (DeformError, ValueError) as exc:
                raise ApiError(400, "invalid_correction", str(exc), "t") from exc
            next_plan = plan(session.env, new_state.w, session.planner_cfg)
            # Atomic commit: state only changes once everything is computed.
            session.state = new_state
            session.records.append(record)
            session.current_plan = next_plan
            env = session.env
            costs = None
            if env.ground_truth is not None:
                costs = {
                    "planned_before": record.normalized_cost,
                    "corrected": normalized_cost(record.corrected, env),
                    "planned_after": normalized_cost(next_plan, env),
                }
            return {
                "iteration": record.iteration,
                "corrected": _trajectory_json(record.corrected),
                "weights": new_state.w.tolist(),
                "planned": _trajectory_json(next_plan),
                "normalized_cost": costs,
                "phase": session.phase,
            }
        finally:
            session.lock.release_write()

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> PlainTextResponse:
        session = _get_session(session_id)
        session.lock.acquire_read()
        try:
            from .learner import LearningTrace

            text = LearningTrace(list(session.records)).to_jsonl()
        finally:
            session.lock.release_read()
        return PlainTextResponse(text, media_type="application/x-ndjson")

    @app.post("/sessions/{session_id}/finish")
    def finish(session_id: str) -> dict:
        session = _get_session(session_id)
        session.lock.acquire_write()
        try:
            session.phase = PHASE_DONE
            if trace_dir is not None:
                from .learner import LearningTrace

                trace_dir.mkdir(parents=True, exist_ok=True)
                LearningTrace(list(session.records)).write_jsonl(
                    trace_dir / f"{session.id}.jsonl"
                )
            return {"phase": session.phase, "num_records": len(session.records)}
        finally:
            session.lock.release_write()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
