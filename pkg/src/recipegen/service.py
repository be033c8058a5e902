"""HTTP generation service: conditioned sampling, model listing, ingredient index.

Checkpoints are loaded once and shared read-only across requests; every
request gets its own rng and sampling state, so concurrent generations
cannot bleed into each other.
"""

from __future__ import annotations

import secrets
import time
from collections import Counter

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .corpus import render_ingredient
from .errors import RecipegenError, ValidationError
from .generator import SamplingParams, generate
from .nn.checkpoint import ModelCheckpoint


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    ingredients: list[str] = Field(min_length=1, max_length=50)
    model: str | None = None  # default: first loaded checkpoint
    temperature: float = Field(default=0.8, ge=0.0, le=4.0)
    top_k: int = Field(default=40, ge=0, le=4096)
    max_new_tokens: int = Field(default=1024, ge=1, le=4096)
    seed: int | None = Field(default=None, ge=0)  # absent: server picks one


class GenerateResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    title: str
    ingredients: list[str]
    instructions: list[str]
    raw_text: str
    malformed: bool
    finish_reason: str
    model: str
    elapsed_ms: float = Field(ge=0)
    seed_used: int


class ModelInfo(BaseModel):
    id: str
    kind: str
    vocab_size: int
    context_len: int


class HealthInfo(BaseModel):
    status: str
    models_loaded: int
    uptime_s: float


def _error_body(code: str, message: str, fieldname: str | None = None) -> dict:
    err: dict = {"code": code, "message": message}
    if fieldname:
        err["field"] = fieldname
    return {"error": err}


def label_checkpoints(checkpoints: list[ModelCheckpoint]) -> dict[str, ModelCheckpoint]:
    """Stable unique ids in load order: the kind, suffixed on collision."""
    seen: Counter = Counter()
    labeled: dict[str, ModelCheckpoint] = {}
    for ckpt in checkpoints:
        seen[ckpt.kind] += 1
        name = ckpt.kind if seen[ckpt.kind] == 1 else f"{ckpt.kind}-{seen[ckpt.kind]}"
        labeled[name] = ckpt
    return labeled


def create_app(
    checkpoints: list[ModelCheckpoint],
    ingredient_names: list[str] | None = None,
    allow_origins: list[str] | None = None,
) -> FastAPI:
    """Build the service around already-loaded checkpoints.

    ingredient_names is the corpus-derived picker vocabulary; None means no
    index was configured and GET /ingredients answers 503.
    """
    app = FastAPI(title="recipegen", docs_url=None, redoc_url=None)
    models = label_checkpoints(checkpoints)
    default_model = next(iter(models)) if models else None
    index = None
    if ingredient_names is not None:
        index = sorted({name.lower() for name in ingredient_names if name})
    started = time.monotonic()

    if allow_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=allow_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        message = "invalid request"
        fieldname = None
        if errors:
            first = errors[0]
            message = first.get("msg", message)
            loc = [str(p) for p in first.get("loc", ()) if p != "body"]
            fieldname = ".".join(loc) or None
        return JSONResponse(
            status_code=400, content=_error_body("bad_request", message, fieldname)
        )

    @app.exception_handler(RecipegenError)
    async def on_engine_error(request: Request, exc: RecipegenError):
        return JSONResponse(
            status_code=500, content=_error_body("internal", str(exc))
        )

    @app.get("/health", response_model=HealthInfo)
    async def health():
        return HealthInfo(
            status="ok" if models else "degraded",
            models_loaded=len(models),
            uptime_s=time.monotonic() - started,
        )

    @app.get("/models", response_model=list[ModelInfo])
    async def list_models():
        return [
            ModelInfo(
                id=name,
                kind=ckpt.kind,
                vocab_size=ckpt.vocab.size,
                context_len=ckpt.config.context_len,
            )
            for name, ckpt in models.items()
        ]

    @app.get("/ingredients")
    async def list_ingredients(q: str = ""):
        if index is None:
            return JSONResponse(
                status_code=503,
                content=_error_body("no_index", "ingredient index not configured"),
            )
        prefix = q.lower()
        if prefix:
            return [name for name in index if name.startswith(prefix)]
        return index

    @app.post("/generate", response_model=GenerateResponse)
    async def generate_recipe(req: GenerateRequest):
        if not models:
            return JSONResponse(
                status_code=503,
                content=_error_body("no_models", "no checkpoints loaded"),
            )
        name = req.model or default_model
        ckpt = models.get(name)
        if ckpt is None:
            return JSONResponse(
                status_code=404,
                content=_error_body("unknown_model", f"no model named {name!r}", "model"),
            )
        for i, item in enumerate(req.ingredients):
            if not (1 <= len(item) <= 100):
                return JSONResponse(
                    status_code=400,
                    content=_error_body(
                        "bad_request",
                        f"ingredient {i} must be 1..100 characters",
                        "ingredients",
                    ),
                )
        seed = req.seed if req.seed is not None else secrets.randbits(31)
        params = SamplingParams(
            temperature=req.temperature,
            top_k=req.top_k,
            max_new_tokens=req.max_new_tokens,
            seed=seed,
        )
        begin = time.perf_counter()
        try:
            result = generate(ckpt, req.ingredients, params)
        except ValidationError as exc:
            return JSONResponse(
                status_code=400,
                content=_error_body("bad_request", str(exc), "ingredients"),
            )
        elapsed_ms = (time.perf_counter() - begin) * 1000.0
        record = result.record
        return GenerateResponse(
            title=record.title if record else "",
            ingredients=[render_ingredient(l) for l in record.ingredients] if record else [],
            instructions=list(record.instructions) if record else [],
            raw_text=result.raw_text,
            malformed=result.malformed,
            finish_reason=result.finish_reason,
            model=name,
            elapsed_ms=elapsed_ms,
            seed_used=seed,
        )

    return app


def service_schema() -> dict:
    """JSON schemas for every request and response body, for the docs tree."""
    return {
        "GenerateRequest": GenerateRequest.model_json_schema(),
        "GenerateResponse": GenerateResponse.model_json_schema(),
        "ModelInfo": ModelInfo.model_json_schema(),
        "HealthInfo": HealthInfo.model_json_schema(),
        "Error": {
            "type": "object",
            "required": ["error"],
            "properties": {
                "error": {
                    "type": "object",
                    "required": ["code", "message"],
                    "properties": {
                        "code": {"type": "string"},
                        "message": {"type": "string"},
                        "field": {"type": "string"},
                    },
                }
            },
        },
    }
