"""Request and response models for the HTTP service.

Matrices travel as row-major lists of lists; every response is a uniform
result envelope (kind, digest, parameters, payload, version) so that files
written by the CLI and bodies returned by the service carry identical
content.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Matrix = list[list[float]]


class ResultModel(BaseModel):
    kind: str
    inputs_digest: str
    parameters: dict
    payload: dict
    library_version: str


class MatrixPair(BaseModel):
    y1: Matrix
    y0: Matrix


class DpoRequest(BaseModel):
    y1: Matrix
    y0: Matrix
    t1: float
    t0: float
    exclude_diagonal: bool = False


class DteRequest(BaseModel):
    y1: Matrix
    y0: Matrix
    y: Optional[float] = None
    grid: Optional[list[float]] = None
    monotonize: bool = False
    exclude_diagonal: bool = False

    @model_validator(mode="after")
    def _one_of_y_grid(self):
        if (self.y is None) == (self.grid is None):
            raise ValueError("provide exactly one of 'y' or 'grid'")
        return self


class CellsRequest(BaseModel):
    pairs: list[MatrixPair] = Field(min_length=1)
    weights: Optional[list[float]] = None
    exclude_diagonal: bool = False
    hetero_mode: Optional[Literal["conservative", "paperExact"]] = None


class SteRequest(BaseModel):
    y1: Matrix
    y0: Matrix
    basis: Literal["treated", "untreated"] = "treated"


class HeteroRequest(BaseModel):
    op: Literal["dpo", "dte", "ste"]
    y1: Matrix
    y0: Matrix
    mode: Literal["conservative", "paperExact"] = "conservative"
    t1: Optional[float] = None
    t0: Optional[float] = None
    y: Optional[float] = None
    basis: Literal["treated", "untreated"] = "treated"
    exclude_diagonal: bool = False

    @model_validator(mode="after")
    def _fields_for_op(self):
        if self.op == "dpo" and (self.t1 is None or self.t0 is None):
            raise ValueError("op 'dpo' needs 't1' and 't0'")
        if self.op == "dte" and self.y is None:
            raise ValueError("op 'dte' needs 'y'")
        return self


class BipartiteRequest(BaseModel):
    op: Literal["dpo", "cells"] = "dpo"
    b1: Matrix
    b0: Matrix
    t1: Optional[float] = None
    t0: Optional[float] = None
    hetero_mode: Optional[Literal["conservative", "paperExact"]] = None

    @model_validator(mode="after")
    def _fields_for_op(self):
        if self.op == "dpo" and (self.t1 is None or self.t0 is None):
            raise ValueError("op 'dpo' needs 't1' and 't0'")
        return self


class RandTestRequest(BaseModel):
    design: Literal["matched", "conjunctive", "censored"]
    resamples: int = Field(default=99, ge=1)
    seed: Optional[int] = None
    pairs: Optional[list[MatrixPair]] = None
    y: Optional[Matrix] = None
    buyer_groups: Optional[list[int]] = None
    seller_groups: Optional[list[int]] = None
    y1: Optional[Matrix] = None
    y0: Optional[Matrix] = None
    pi: Optional[float] = None

    @model_validator(mode="after")
    def _fields_for_design(self):
        if self.design == "matched":
            if not self.pairs:
                raise ValueError("design 'matched' needs 'pairs'")
        elif self.design == "conjunctive":
            missing = [
                name
                for name in ("y", "buyer_groups", "seller_groups", "pi")
                if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"design 'conjunctive' needs {missing}")
        else:
            missing = [
                name for name in ("y1", "y0", "pi") if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"design 'censored' needs {missing}")
        return self


class SmoothRequest(BaseModel):
    op: Literal["product", "dpo", "cdf"]
    y1: Matrix
    y0: Matrix
    bandwidth: Optional[float] = None
    # default depends on op: symmetricQuartic for cdf, oneSidedQuintic otherwise
    kernel: Optional[Literal["symmetricQuartic", "oneSidedQuintic"]] = None
    t1: Optional[float] = None
    t0: Optional[float] = None
    y: Optional[float] = None
    basis: Literal["treated", "untreated"] = "treated"

    @model_validator(mode="after")
    def _fields_for_op(self):
        if self.op in ("product", "dpo") and (self.t1 is None or self.t0 is None):
            raise ValueError(f"op {self.op!r} needs 't1' and 't0'")
        if self.op == "cdf" and self.y is None:
            raise ValueError("op 'cdf' needs 'y'")
        return self


class SynthRequest(BaseModel):
    generator: Literal["diffusion", "social", "linkformation", "factor"]
    seed: Optional[int] = None
    n: int = Field(default=20, ge=2)
    edge_prob: float = Field(default=0.3, gt=0.0, lt=1.0)
    adjacency: Optional[Matrix] = None
    characteristics: Optional[Matrix] = None
    loadings: Optional[Matrix] = None
    sigma2: Optional[list[float]] = None
    alpha0: float = 0.2
    alpha1: float = 0.3
    periods: int = Field(default=3, ge=1)
    beta0: float = 0.05
    beta1: float = 0.08
    noise_scale: float = 1.0
    rho0: float = 0.7
    rho1: float = 1.3
    n_factors: int = Field(default=5, ge=1)
    include_aligned: bool = True


class OracleRequest(BaseModel):
    op: Literal["dpo", "dte", "bipartite"]
    y1: Matrix
    y0: Matrix
    t1: Optional[float] = None
    t0: Optional[float] = None
    y: Optional[float] = None

    @model_validator(mode="after")
    def _fields_for_op(self):
        if self.op in ("dpo", "bipartite") and (self.t1 is None or self.t0 is None):
            raise ValueError(f"op {self.op!r} needs 't1' and 't0'")
        if self.op == "dte" and self.y is None:
            raise ValueError("op 'dte' needs 'y'")
        return self


class DensityRequest(BaseModel):
    values: list[float] = Field(min_length=1)
    weights: Optional[list[float]] = None
    bandwidth: Optional[float] = None
