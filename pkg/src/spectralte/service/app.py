"""HTTP service exposing the library over JSON.

All computations are pure functions of the request body, so the service is
stateless and safe to scale horizontally.  Domain errors (invalid
matrices, guard violations) return 400 with the library's message; schema
errors return FastAPI's standard 422.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from . import handlers, schemas

app = FastAPI(
    title="spectralte",
    description=(
        "Eigenvalue bounds and spectral treatment effects for double "
        "randomized experiments with outcome matrices"
    ),
    version=__version__,
)


@app.exception_handler(ValueError)
async def _domain_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/dpo", response_model=schemas.ResultModel)
def dpo(req: schemas.DpoRequest):
    return handlers.handle_dpo(req).to_mapping()


@app.post("/dte", response_model=schemas.ResultModel)
def dte(req: schemas.DteRequest):
    return handlers.handle_dte(req).to_mapping()


@app.post("/cells", response_model=schemas.ResultModel)
def cells(req: schemas.CellsRequest):
    return handlers.handle_cells(req).to_mapping()


@app.post("/ste", response_model=schemas.ResultModel)
def ste(req: schemas.SteRequest):
    return handlers.handle_ste(req).to_mapping()


@app.post("/hetero", response_model=schemas.ResultModel)
def hetero(req: schemas.HeteroRequest):
    return handlers.handle_hetero(req).to_mapping()


@app.post("/bipartite", response_model=schemas.ResultModel)
def bipartite(req: schemas.BipartiteRequest):
    return handlers.handle_bipartite(req).to_mapping()


@app.post("/randtest", response_model=schemas.ResultModel)
def randtest(req: schemas.RandTestRequest):
    return handlers.handle_randtest(req).to_mapping()


@app.post("/smooth", response_model=schemas.ResultModel)
def smooth(req: schemas.SmoothRequest):
    return handlers.handle_smooth(req).to_mapping()


@app.post("/synth", response_model=schemas.ResultModel)
def synth(req: schemas.SynthRequest):
    return handlers.handle_synth(req).to_mapping()


@app.post("/oracle", response_model=schemas.ResultModel)
def oracle(req: schemas.OracleRequest):
    return handlers.handle_oracle(req).to_mapping()


@app.post("/density", response_model=schemas.ResultModel)
def density(req: schemas.DensityRequest):
    return handlers.handle_density(req).to_mapping()
