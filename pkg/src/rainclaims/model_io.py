"""Versioned flat-text model files.

Floats are written with repr(), which round-trips bit-exactly, so a reloaded
model predicts byte-identically to the one that was saved. The header's
format version is checked on load and rejected when unsupported.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ann import AnnModel
from .errors import ModelFormatError
from .kernels import LINEAR, RBF, KernelSpec
from .pipeline import ControlSummary, TuningProvenance, TwoStageModel
from .svr import Scaler, SvrHyperparams, SvrModel

MAGIC = "rainclaims-model"
FORMAT_VERSION = 1


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values, dtype=float).ravel())


def _svr_lines(model: SvrModel) -> list[str]:
    hp = model.hyperparams
    kernel = f"{hp.kernel.kind} {hp.kernel.sigma_sq!r}" if hp.kernel.kind == RBF else LINEAR
    n, m = model.support_x.shape
    lines = [
        f"c {hp.c!r}",
        f"epsilon {hp.epsilon!r}",
        f"kernel {kernel}",
        f"x_mean {_floats(model.scaler.x_mean)}",
        f"x_std {_floats(model.scaler.x_std)}",
        f"x_const {' '.join(str(int(v)) for v in model.scaler.x_const)}",
        f"y_mean {model.scaler.y_mean!r}",
        f"y_std {model.scaler.y_std!r}",
        f"y_const {int(model.scaler.y_const)}",
        f"bias {model.bias!r}",
        f"theta {_floats(model.theta)}",
        f"rows {n} {m}",
    ]
    lines.extend(_floats(row) for row in model.support_x)
    return lines


def _ann_lines(model: AnnModel) -> list[str]:
    m, h = model.hidden_w.shape
    lines = [
        f"inputs {m}",
        f"hidden {h}",
        f"x_mean {_floats(model.scaler.x_mean)}",
        f"x_std {_floats(model.scaler.x_std)}",
        f"x_const {' '.join(str(int(v)) for v in model.scaler.x_const)}",
        f"y_mean {model.scaler.y_mean!r}",
        f"y_std {model.scaler.y_std!r}",
        f"y_const {int(model.scaler.y_const)}",
        f"out_w {_floats(model.out_w)}",
        f"out_b {model.out_b!r}",
        f"hidden_b {_floats(model.hidden_b)}",
    ]
    lines.extend(_floats(row) for row in model.hidden_w)
    return lines


class _Reader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError("model file ended unexpectedly")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def field(self, name: str) -> list[str]:
        line = self.next()
        parts = line.split()
        if not parts or parts[0] != name:
            raise ModelFormatError(f"expected field {name!r}, got line {line!r}")
        return parts[1:]


def _read_scaler(reader: _Reader) -> Scaler:
    x_mean = np.array([float(v) for v in reader.field("x_mean")])
    x_std = np.array([float(v) for v in reader.field("x_std")])
    x_const = np.array([bool(int(v)) for v in reader.field("x_const")])
    y_mean = float(reader.field("y_mean")[0])
    y_std = float(reader.field("y_std")[0])
    y_const = bool(int(reader.field("y_const")[0]))
    return Scaler(x_mean, x_std, y_mean, y_std, x_const, y_const)


def _read_svr(reader: _Reader) -> SvrModel:
    c = float(reader.field("c")[0])
    epsilon = float(reader.field("epsilon")[0])
    kparts = reader.field("kernel")
    if kparts[0] == RBF:
        kernel = KernelSpec(RBF, float(kparts[1]))
    elif kparts[0] == LINEAR:
        kernel = KernelSpec(LINEAR)
    else:
        raise ModelFormatError(f"unknown kernel {kparts[0]!r}")
    scaler = _read_scaler(reader)
    bias = float(reader.field("bias")[0])
    theta = np.array([float(v) for v in reader.field("theta")])
    n, m = (int(v) for v in reader.field("rows"))
    if theta.shape != (n,):
        raise ModelFormatError(f"theta length {len(theta)} does not match {n} rows")
    rows = np.empty((n, m))
    for i in range(n):
        parts = reader.next().split()
        if len(parts) != m:
            raise ModelFormatError(f"support row {i} has {len(parts)} values, expected {m}")
        rows[i] = [float(v) for v in parts]
    return SvrModel(
        support_x=rows,
        theta=theta,
        bias=bias,
        kernel=kernel,
        scaler=scaler,
        hyperparams=SvrHyperparams(c=c, epsilon=epsilon, kernel=kernel),
    )


def _read_ann(reader: _Reader) -> AnnModel:
    m = int(reader.field("inputs")[0])
    h = int(reader.field("hidden")[0])
    scaler = _read_scaler(reader)
    out_w = np.array([float(v) for v in reader.field("out_w")])
    out_b = float(reader.field("out_b")[0])
    hidden_b = np.array([float(v) for v in reader.field("hidden_b")])
    if out_w.shape != (h,) or hidden_b.shape != (h,):
        raise ModelFormatError("weight shapes do not match the declared hidden size")
    hidden_w = np.empty((m, h))
    for i in range(m):
        parts = reader.next().split()
        if len(parts) != h:
            raise ModelFormatError(f"weight row {i} has {len(parts)} values, expected {h}")
        hidden_w[i] = [float(v) for v in parts]
    return AnnModel(hidden_w=hidden_w, hidden_b=hidden_b, out_w=out_w, out_b=out_b, scaler=scaler)


def _stage_kind(model) -> str:
    return "svr" if isinstance(model, SvrModel) else "ann"


def _stage_lines(model) -> list[str]:
    return _svr_lines(model) if isinstance(model, SvrModel) else _ann_lines(model)


def dump_two_stage(model: TwoStageModel) -> str:
    c = model.control
    p = model.provenance
    lines = [
        f"{MAGIC} {FORMAT_VERSION} two-stage",
        f"tuning {p.mode}",
        f"claims_evaluations {p.claims_evaluations}",
        f"loss_evaluations {p.loss_evaluations}",
        f"control_label {c.label}",
        f"control_weeks {c.weeks}",
        f"control_years {c.years}",
        f"control_claims_sum {c.claims_sum!r}",
        f"control_loss_sum {c.loss_sum!r}",
        f"stage claims {_stage_kind(model.claims_model)}",
        *_stage_lines(model.claims_model),
        f"stage loss {_stage_kind(model.loss_model)}",
        *_stage_lines(model.loss_model),
        "end",
    ]
    return "\n".join(lines) + "\n"


def save_two_stage(model: TwoStageModel, path: str | Path) -> None:
    Path(path).write_text(dump_two_stage(model), encoding="utf-8")


def _read_stage(reader: _Reader, name: str):
    parts = reader.field("stage")
    if len(parts) != 2 or parts[0] != name:
        raise ModelFormatError(f"expected stage {name!r}, got {parts}")
    if parts[1] == "svr":
        return _read_svr(reader)
    if parts[1] == "ann":
        return _read_ann(reader)
    raise ModelFormatError(f"unknown stage model type {parts[1]!r}")


def loads_two_stage(text: str) -> TwoStageModel:
    reader = _Reader(text.splitlines())
    header = reader.next().split()
    if len(header) != 3 or header[0] != MAGIC:
        raise ModelFormatError("not a rainclaims model file")
    try:
        version = int(header[1])
    except ValueError:
        raise ModelFormatError(f"malformed version field {header[1]!r}") from None
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version} (this build reads {FORMAT_VERSION})"
        )
    if header[2] != "two-stage":
        raise ModelFormatError(f"unsupported model record type {header[2]!r}")

    mode = reader.field("tuning")[0]
    claims_evals = int(reader.field("claims_evaluations")[0])
    loss_evals = int(reader.field("loss_evaluations")[0])
    label = " ".join(reader.field("control_label")) or "control"
    weeks = int(reader.field("control_weeks")[0])
    years = int(reader.field("control_years")[0])
    claims_sum = float(reader.field("control_claims_sum")[0])
    loss_sum = float(reader.field("control_loss_sum")[0])
    claims_model = _read_stage(reader, "claims")
    loss_model = _read_stage(reader, "loss")
    if reader.next() != "end":
        raise ModelFormatError("missing end marker")
    return TwoStageModel(
        claims_model=claims_model,
        loss_model=loss_model,
        provenance=TuningProvenance(
            mode=mode, claims_evaluations=claims_evals, loss_evaluations=loss_evals
        ),
        control=ControlSummary(
            claims_sum=claims_sum, loss_sum=loss_sum, weeks=weeks, years=years, label=label
        ),
    )


def load_two_stage(path: str | Path) -> TwoStageModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return loads_two_stage(text)
