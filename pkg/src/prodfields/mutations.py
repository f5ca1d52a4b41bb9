"""Deliberately broken variants of the field operations.

Used to show the verification suites can tell a correct implementation
from a plausible wrong one. ``mutated(name)`` patches the ``fields``
module for the duration of a ``with`` block.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator

from . import fields as fl

_original = {
    "iota_family": fl.iota_family,
    "project_to_family": fl.project_to_family,
    "pullback_oneform": fl.pullback_oneform,
    "horizontal_projection": fl.horizontal_projection,
}


def _iota_without_zeroing(w: fl.VectorFieldFamily) -> fl.VectorField:
    # Complementary slots keep stale values (copies of the family
    # coefficients) instead of being cleared.
    V = w.product
    comps = dict(zip(w.active.coords, w.coefficients))
    k = 0
    coeffs = []
    for c in V.coords:
        if c in comps:
            coeffs.append(comps[c])
        else:
            coeffs.append(w.coefficients[k % len(w.coefficients)])
            k += 1
    return fl.VectorField(V, tuple(coeffs))


def _project_swapped(v: fl.VectorField, active) -> fl.VectorFieldFamily:
    V = v.carrier
    i = V.factors.index(active)
    other = V.factors[(i + 1) % len(V.factors)]
    return _original["project_to_family"](v, other)


def _pullback_dropping_zeros(omega: fl.OneForm, V) -> fl.OneForm:
    # Only the factor's own coefficients, packed at the front: they no
    # longer line up with the product's coordinates.
    form = object.__new__(fl.OneForm)
    object.__setattr__(form, "carrier", V)
    object.__setattr__(form, "coefficients", tuple(omega.coefficients))
    return form


def _horizontal_identity(v: fl.VectorField) -> fl.VectorField:
    return v


MUTATIONS = {
    "iota-no-zeroing": ("iota_family", _iota_without_zeroing),
    "pi-swap-active": ("project_to_family", _project_swapped),
    "oneform-drop-zeros": ("pullback_oneform", _pullback_dropping_zeros),
    "hor-identity": ("horizontal_projection", _horizontal_identity),
}

# The three mutations every default verification run must catch.
CANONICAL = ("iota-no-zeroing", "pi-swap-active", "oneform-drop-zeros")


@contextmanager
def mutated(name: str | None) -> Iterator[None]:
    if name is None:
        yield
        return
    if name not in MUTATIONS:
        raise KeyError(f"unknown mutation {name!r}; choose from {', '.join(MUTATIONS)}")
    attr, replacement = MUTATIONS[name]
    saved = getattr(fl, attr)
    setattr(fl, attr, replacement)
    try:
        yield
    finally:
        setattr(fl, attr, saved)
