"""Built-in datasets and JSON loaders for models, MC data, 2-forms and representations."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .cdga import (
    FiniteCDGA,
    ModelPresentation,
    compile_presentation,
    genus_surface_ring,
    heisenberg_ce,
    presentation_from_dict,
    torus_ce,
)
from .jets import GroupPresentation, JetMap, JetRepresentation
from .linalg import scalar
from .mc import MaurerCartanData
from .symplectic import AlgebroidTwoForm
from .universal import ce_algebra


class DataError(ValueError):
    """Input that cannot be read or does not describe a valid object."""


# -- built-in objects -------------------------------------------------------

def heisenberg_b5() -> MaurerCartanData:
    """Order-4 data on the Heisenberg model: eta1 = a, eta2 = b, eta3 = -c."""
    h = heisenberg_ce()
    return MaurerCartanData(4, h, h.zero(), {1: h["a"], 2: h["b"], 3: h.parse("-c")},
                            name="heisenberg-b5")


def genus_data(g: int, params: Sequence) -> MaurerCartanData:
    """Order-3 data on a genus-g surface.

    ``params`` holds ``x_i, y_i, w_i, z_i`` for ``i = 1..g`` in per-i blocks;
    ``eta1 = sum x_i alpha_i + y_i beta_i`` and ``eta2 = sum w_i alpha_i + z_i beta_i``.
    """
    params = [scalar(p) for p in params]
    if len(params) != 4 * g:
        raise DataError(f"genus {g} needs {4 * g} parameters, got {len(params)}")
    m = genus_surface_ring(g)
    eta1, eta2 = m.zero(), m.zero()
    for i in range(1, g + 1):
        x, y, w, z = params[4 * (i - 1): 4 * i]
        eta1 = eta1 + m[f"alpha{i}"].scale(x) + m[f"beta{i}"].scale(y)
        eta2 = eta2 + m[f"alpha{i}"].scale(w) + m[f"beta{i}"].scale(z)
    return MaurerCartanData(3, m, m.zero(), {1: eta1, 2: eta2}, name=f"genus{g}")


def torus_k3() -> MaurerCartanData:
    t = torus_ce(2)
    return MaurerCartanData(3, t, t.zero(), {1: t["e1"], 2: t["e2"]}, name="torus-k3")


def torus_interval_model(truncation: int = 4) -> FiniteCDGA:
    """Torus model with a transverse coordinate ``u`` and its differential ``du``."""
    return compile_presentation(ModelPresentation(
        "torus_u", [("alpha", 1), ("beta", 1), ("u", 0), ("du", 1)], {"u": "du"},
        poly0_vars=["u"], truncation=truncation,
    ))


def genus_symp(params: Sequence = (1, 0, 0, 1)) -> tuple[MaurerCartanData, AlgebroidTwoForm]:
    """Order-3 data on the torus with ``alpha1 = -u eta2, alpha2 = -2u eta1, alpha3 = du``."""
    x, y, w, z = [scalar(p) for p in params]
    m = torus_interval_model()
    eta1 = m["alpha"].scale(x) + m["beta"].scale(y)
    eta2 = m["alpha"].scale(w) + m["beta"].scale(z)
    d = MaurerCartanData(3, m, m.zero(), {1: eta1, 2: eta2}, name="genus1-symp")
    u = m["u"]
    form = AlgebroidTwoForm(m.parse("alpha*beta"), {
        0: m.zero(),
        1: (u * eta2).scale(-1),
        2: (u * eta1).scale(-2),
        3: m["du"],
    })
    return d, form


def heisenberg_symp() -> tuple[MaurerCartanData, AlgebroidTwoForm]:
    d = heisenberg_b5()
    m = d.model
    form = AlgebroidTwoForm(m.zero(), {0: m.zero(), 1: m.zero(), 2: m.parse("-2*c"),
                                       3: m["b"], 4: m.parse("2*a")})
    return d, form


# -- reading --------------------------------------------------------------------

def _read_json(ref):
    if isinstance(ref, Mapping):
        return ref
    path = Path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {ref}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{ref}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def _parse_params(text: str) -> list[Fraction]:
    try:
        return [scalar(p) for p in text.split(",") if p.strip()]
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad parameter list {text!r}: {exc}") from exc


def load_model(ref, base_dir: Path | None = None) -> FiniteCDGA:
    if isinstance(ref, str) and ref.startswith("builtin:"):
        parts = ref.split(":")[1:]
        name = parts[0]
        try:
            if name == "heisenberg" and len(parts) == 1:
                return heisenberg_ce()
            if name == "torus" and len(parts) == 2:
                return torus_ce(int(parts[1]))
            if name == "genus" and len(parts) == 2:
                return genus_surface_ring(int(parts[1]))
            if name == "ce" and len(parts) == 2:
                return ce_algebra(int(parts[1]))
            if name == "torus-u" and len(parts) == 1:
                return torus_interval_model()
        except ValueError as exc:
            raise DataError(f"{ref}: {exc}") from exc
        raise DataError(f"unknown built-in model {ref!r}")
    if isinstance(ref, str) and base_dir is not None and not Path(ref).is_absolute():
        ref = str(base_dir / ref)
    data = _read_json(ref)
    try:
        return compile_presentation(presentation_from_dict(data))
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed model: {exc}") from exc


def load_mc(ref) -> MaurerCartanData:
    if isinstance(ref, str) and ref.startswith("builtin:"):
        parts = ref.split(":")
        if ref == "builtin:heisenberg-b5":
            return heisenberg_b5()
        if ref == "builtin:torus-k3":
            return torus_k3()
        if parts[1] == "genus" and len(parts) == 4:
            return genus_data(int(parts[2]), _parse_params(parts[3]))
        if parts[1] == "genus-symp" and len(parts) <= 3:
            return genus_symp(_parse_params(parts[2]) if len(parts) == 3 else (1, 0, 0, 1))[0]
        if ref == "builtin:heisenberg-symp":
            return heisenberg_symp()[0]
        raise DataError(f"unknown built-in dataset {ref!r}")
    base_dir = Path(ref).parent if isinstance(ref, str) else None
    data = _read_json(ref)
    try:
        k = int(data["k"])
        model = load_model(data["model"], base_dir) if not isinstance(data["model"], Mapping) \
            else compile_presentation(presentation_from_dict(data["model"]))
        gamma = model.parse(str(data.get("gamma", "0")))
        etas = {int(i): model.parse(str(v)) for i, v in (data.get("etas") or {}).items()}
        return MaurerCartanData(k, model, gamma, etas, name=str(data.get("name", "mc")))
    except KeyError as exc:
        raise DataError(f"MC data is missing field {exc}") from exc


def load_form(ref, d: MaurerCartanData) -> AlgebroidTwoForm:
    if isinstance(ref, str) and ref.startswith("builtin:"):
        parts = ref.split(":")
        if parts[1] == "genus-symp":
            built = genus_symp(_parse_params(parts[2]) if len(parts) == 3 else (1, 0, 0, 1))
        elif ref == "builtin:heisenberg-symp":
            built = heisenberg_symp()
        else:
            raise DataError(f"unknown built-in form {ref!r}")
        form = built[1]
        if form.beta.algebra.labels != d.model.labels:
            raise DataError("built-in form does not match the model of the MC data")
        m = d.model
        return AlgebroidTwoForm(m.parse(str(form.beta)),
                                {r: m.parse(str(a)) for r, a in form.alphas.items()})
    data = _read_json(ref)
    m = d.model
    beta = m.parse(str(data.get("beta", "0")))
    alphas = {int(r): m.parse(str(v)) for r, v in (data.get("alphas") or {}).items()}
    return AlgebroidTwoForm(beta, alphas)


def parse_assignment(text: str) -> dict[str, Fraction]:
    out = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise DataError(f"expected name=value, got {piece!r}")
        k, v = piece.split("=", 1)
        try:
            out[k.strip()] = scalar(v.strip())
        except (TypeError, ValueError) as exc:
            raise DataError(f"bad value in {piece!r}: {exc}") from exc
    return out


def load_jet(l: int, k: int, text) -> JetMap:
    try:
        if isinstance(text, Mapping):
            text = text.get("components")
        return JetMap.parse(l, k, text)
    except (TypeError, ValueError, KeyError) as exc:
        raise DataError(f"bad jet {text!r}: {exc}") from exc


def load_representation(ref) -> JetRepresentation:
    data = _read_json(ref)
    try:
        l, k = int(data["l"]), int(data["k"])
        pres = GroupPresentation(list(data["generators"]), list(data.get("relations") or []))
        images = {g: load_jet(l, k, data["images"][g]) for g in pres.generators}
        return JetRepresentation(pres, images)
    except KeyError as exc:
        raise DataError(f"representation is missing field {exc}") from exc
