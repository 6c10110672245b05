"""HTTP surface backing the interactive panel.

Endpoints (image payloads are base64 PNG inside JSON envelopes):

    GET  /schema        degradation slot layout, ranges, level presets
    POST /degrade       image + params-or-vector -> LR image + trace
    POST /predict       image -> estimated 33-vector + interpretation
    POST /superresolve  image + optional override vector -> SR + v_hat + a

The service is stateless between requests; weights are loaded once and
never mutated.  Malformed bodies give 400 with a field-level message;
inference routes answer 409 until weights are loaded.
"""

from __future__ import annotations

import base64
import binascii
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import engine, image_io, space, weights_io
from .errors import DegradeForgeError
from .pipeline import run_pipeline


class ApiError(Exception):
    def __init__(self, status: int, field: str, message: str):
        self.status = status
        self.field = field
        self.message = message


class DegradeRequest(BaseModel):
    image: str
    params: Optional[dict] = None
    vector: Optional[list[float]] = None
    seed: int = 0


class PredictRequest(BaseModel):
    image: str


class SuperResolveRequest(BaseModel):
    image: str
    override_vector: Optional[list[float]] = None


def _decode_image(b64: str, field: str = "image") -> np.ndarray:
    try:
        raw = base64.b64decode(b64, validate=True)
        return image_io.decode_png_bytes(raw)
    except (binascii.Error, ValueError, OSError) as exc:
        raise ApiError(400, field, f"not a base64 PNG: {exc}")


def _encode_image(img: np.ndarray) -> str:
    return base64.b64encode(image_io.encode_png_bytes(img)).decode("ascii")


def schema_document() -> dict:
    slots = []
    for group in space.SLOTS:
        for pos, index in enumerate(group.indices):
            entry = {
                "index": index,
                "name": group.name,
                "group": group.group,
                "kind": group.kind,
                "stage": group.stage,
            }
            if group.kind == "scalar":
                lo, hi = space.slot_range(space.DEFAULT_SCHEMA, group.range_key)
                entry["range"] = [lo, hi]
            elif group.kind == "flag":
                entry["range"] = [0, 1]
            else:
                entry["choice"] = group.choices[pos]
                entry["group_indices"] = list(group.indices)
            slots.append(entry)
    presets = {}
    for lv in space.Level:
        params = space.sample_params(lv, np.random.default_rng(0))
        presets[lv.value] = [float(x) for x in space.encode(params)]
    return {
        "vector_length": space.VECTOR_LEN,
        "slots": sorted(slots, key=lambda s: s["index"]),
        "levels": [lv.value for lv in space.Level],
        "presets": presets,
    }


def create_app(weights_path: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="degrade-forge")
    # the panel may be served from a different local port
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    bundle = weights_io.load_bundle(weights_path) if weights_path else None
    app.state.bundle = bundle  # load-once; never reassigned or mutated

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first["loc"] if p != "body") or "body"
        return JSONResponse(status_code=400,
                            content={"error": {"field": field, "message": first["msg"]}})

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"field": exc.field, "message": exc.message}})

    @app.exception_handler(DegradeForgeError)
    async def domain_error_handler(request: Request, exc: DegradeForgeError):
        return JSONResponse(status_code=400,
                            content={"error": {"field": "body",
                                               "message": f"{type(exc).__name__}: {exc}"}})

    def require_bundle() -> weights_io.ModelBundle:
        if bundle is None:
            raise ApiError(409, "weights", "no weights loaded; start with --weights")
        return bundle

    @app.get("/schema")
    def get_schema():
        return schema_document()

    @app.post("/degrade")
    def post_degrade(req: DegradeRequest):
        img = _decode_image(req.image)
        if (req.params is None) == (req.vector is None):
            raise ApiError(400, "params", "provide exactly one of 'params' or 'vector'")
        if req.vector is not None:
            params = space.decode(np.asarray(req.vector, dtype=float))
        else:
            params = space.params_from_dict(req.params)
        params.rng_seed = req.seed
        lr, trace = run_pipeline(img, params)
        return {"image": _encode_image(lr), "trace": trace.to_dict(),
                "params": space.params_to_dict(params)}

    @app.post("/predict")
    def post_predict(req: PredictRequest):
        b = require_bundle()
        img = _decode_image(req.image)
        v_hat = engine.predict_degradation(img, b.predictor)
        interpreted = space.decode(np.clip(v_hat, 0.0, 1.0))
        return {"vector": [float(x) for x in v_hat],
                "params": space.params_to_dict(interpreted)}

    @app.post("/superresolve")
    def post_superresolve(req: SuperResolveRequest):
        b = require_bundle()
        img = _decode_image(req.image)
        override = None
        if req.override_vector is not None:
            override = np.asarray(req.override_vector, dtype=float)
        sr, v_hat, a = engine.super_resolve(img, b.bank, b.predictor, b.weighting,
                                            override_v=override)
        return {"image": _encode_image(sr),
                "v_hat": [float(x) for x in v_hat],
                "a": [float(x) for x in a]}

    return app
