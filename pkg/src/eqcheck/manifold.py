"""Coordinate-chart manifold definitions loaded from .mfd files.

A .mfd file is a JSON document describing one metric in one chart:
symbolic metric entries, optional declared Ricci entries, named vector
fields / one-forms / scalars, a positivity domain, and the sample points
at which every numeric check runs.  The loader parses all expressions up
front and validates the sample set, so later stages only ever see a
well-formed spec.

Top-level keys::

    schema          optional, must be "eqcheck/manifold/1" when present
    name            short identifier for reports
    dimension       integer n >= 2
    coordinates     list of n distinct identifiers
    metric          {"i,j": expr} with 1-based indices, upper triangle;
                    missing entries are zero
    declared_ricci  optional, same shape as metric
    vector_fields   optional, {name: [expr] * n} (contravariant components)
    one_forms       optional, {name: [expr] * n} (covariant components)
    scalars         optional, {name: expr}
    domain          optional, list of exprs required to be > 0 on samples
    samples         {"points": [[...], ...]} or
                    {"grid": {coord: {"min": a, "max": b, "count": k}}}
    triple          optional, three vector field names used as (U, V, T)
    tolerances      optional, {check name or "default": positive float}
    claims          optional, free-form dict consumed by the check suites
    notes           optional string
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from .errors import (
    EvalDomainError,
    ExprError,
    ManifoldFormatError,
    ManifoldValidationError,
    UnknownFieldError,
)
from .expr import ScalarExpr, parse_expr
from .expr.kernels import eval_value

SCHEMA_ID = "eqcheck/manifold/1"

_TOP_KEYS = {
    "schema",
    "name",
    "dimension",
    "coordinates",
    "metric",
    "declared_ricci",
    "vector_fields",
    "one_forms",
    "scalars",
    "domain",
    "samples",
    "triple",
    "tolerances",
    "claims",
    "notes",
}

_ENTRY_KEY_RE = re.compile(r"^\s*([0-9]+)\s*,\s*([0-9]+)\s*$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


def _fail(msg: str, path: str | None) -> ManifoldFormatError:
    return ManifoldFormatError(msg, path)


def _parse_in(source: Any, coords: tuple[str, ...], where: str, path: str | None) -> ScalarExpr:
    if not isinstance(source, str):
        raise _fail(f"{where}: expected an expression string, got {type(source).__name__}", path)
    try:
        return parse_expr(source, coords)
    except ExprError as exc:
        raise _fail(f"{where}: {exc}", path) from exc


def _parse_components(
    raw: Any, coords: tuple[str, ...], where: str, path: str | None
) -> tuple[ScalarExpr, ...]:
    n = len(coords)
    if not isinstance(raw, list) or len(raw) != n:
        raise _fail(f"{where}: expected a list of {n} expression strings", path)
    return tuple(_parse_in(src, coords, f"{where}[{i}]", path) for i, src in enumerate(raw))


def _parse_entries(
    raw: Any, coords: tuple[str, ...], where: str, path: str | None
) -> dict[tuple[int, int], ScalarExpr]:
    """Parse an {"i,j": expr} table into 0-based upper-triangle keys."""
    n = len(coords)
    if not isinstance(raw, Mapping):
        raise _fail(f"{where}: expected an object of \"i,j\" entries", path)
    out: dict[tuple[int, int], ScalarExpr] = {}
    for key, src in raw.items():
        m = _ENTRY_KEY_RE.match(key)
        if m is None:
            raise _fail(f"{where}: bad index key {key!r}, expected \"i,j\"", path)
        i, j = int(m.group(1)), int(m.group(2))
        if not (1 <= i <= n and 1 <= j <= n):
            raise _fail(f"{where}[{key}]: indices out of range 1..{n}", path)
        ij = (min(i, j) - 1, max(i, j) - 1)
        if ij in out:
            raise _fail(f"{where}[{key}]: duplicate entry for ({ij[0] + 1},{ij[1] + 1})", path)
        out[ij] = _parse_in(src, coords, f"{where}[{key}]", path)
    return out


def _entry_table_dict(entries: Mapping[tuple[int, int], ScalarExpr]) -> dict[str, str]:
    return {
        f"{i + 1},{j + 1}": entries[(i, j)].canonical_source()
        for (i, j) in sorted(entries)
    }


@dataclass(frozen=True)
class ManifoldSpec:
    """A fully parsed and validated chart definition."""

    name: str
    coordinates: tuple[str, ...]
    metric: Mapping[tuple[int, int], ScalarExpr]
    samples: np.ndarray
    declared_ricci: Mapping[tuple[int, int], ScalarExpr] | None = None
    vector_fields: Mapping[str, tuple[ScalarExpr, ...]] = field(default_factory=dict)
    one_forms: Mapping[str, tuple[ScalarExpr, ...]] = field(default_factory=dict)
    scalars: Mapping[str, ScalarExpr] = field(default_factory=dict)
    domain: tuple[ScalarExpr, ...] = ()
    triple: tuple[str, str, str] | None = None
    tolerances: Mapping[str, float] = field(default_factory=dict)
    claims: Mapping[str, Any] = field(default_factory=dict)
    notes: str | None = None
    path: str | None = None

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_dict(data: Mapping[str, Any], path: str | None = None) -> "ManifoldSpec":
        if not isinstance(data, Mapping):
            raise _fail("top level must be a JSON object", path)
        unknown = sorted(set(data) - _TOP_KEYS)
        if unknown:
            raise _fail(f"unknown top-level keys: {', '.join(unknown)}", path)
        schema = data.get("schema", SCHEMA_ID)
        if schema != SCHEMA_ID:
            raise _fail(f"unsupported schema {schema!r} (expected {SCHEMA_ID!r})", path)
        for key in ("name", "dimension", "coordinates", "metric", "samples"):
            if key not in data:
                raise _fail(f"missing required key {key!r}", path)

        name = data["name"]
        if not isinstance(name, str) or not name:
            raise _fail("name must be a non-empty string", path)

        coords_raw = data["coordinates"]
        if (
            not isinstance(coords_raw, list)
            or not coords_raw
            or not all(isinstance(c, str) and _IDENT_RE.match(c) for c in coords_raw)
        ):
            raise _fail("coordinates must be a list of identifiers", path)
        coords = tuple(coords_raw)
        if len(set(coords)) != len(coords):
            raise _fail("coordinate names must be distinct", path)
        n = len(coords)
        if data["dimension"] != n:
            raise _fail(f"dimension {data['dimension']!r} does not match {n} coordinates", path)
        if n < 2:
            raise _fail("dimension must be at least 2", path)

        metric = _parse_entries(data["metric"], coords, "metric", path)
        if not any(i == j for (i, j) in metric):
            raise _fail("metric has no diagonal entries", path)

        declared = None
        if "declared_ricci" in data:
            declared = _parse_entries(data["declared_ricci"], coords, "declared_ricci", path)

        fields: dict[str, tuple[ScalarExpr, ...]] = {}
        for fname, raw in dict(data.get("vector_fields", {})).items():
            fields[fname] = _parse_components(raw, coords, f"vector_fields[{fname}]", path)
        forms: dict[str, tuple[ScalarExpr, ...]] = {}
        for fname, raw in dict(data.get("one_forms", {})).items():
            forms[fname] = _parse_components(raw, coords, f"one_forms[{fname}]", path)
        scalars: dict[str, ScalarExpr] = {}
        for sname, raw in dict(data.get("scalars", {})).items():
            scalars[sname] = _parse_in(raw, coords, f"scalars[{sname}]", path)

        domain_raw = data.get("domain", [])
        if not isinstance(domain_raw, list):
            raise _fail("domain must be a list of expression strings", path)
        domain = tuple(
            _parse_in(src, coords, f"domain[{i}]", path) for i, src in enumerate(domain_raw)
        )

        samples = _parse_samples(data["samples"], coords, path)

        triple = None
        if "triple" in data:
            t = data["triple"]
            if not isinstance(t, list) or len(t) != 3 or not all(isinstance(x, str) for x in t):
                raise _fail("triple must be a list of three vector field names", path)
            for fname in t:
                if fname not in fields:
                    raise _fail(f"triple references unknown vector field {fname!r}", path)
            triple = (t[0], t[1], t[2])

        tolerances: dict[str, float] = {}
        for tname, value in dict(data.get("tolerances", {})).items():
            if not isinstance(value, (int, float)) or not value > 0:
                raise _fail(f"tolerances[{tname}] must be a positive number", path)
            tolerances[tname] = float(value)

        claims = data.get("claims", {})
        if not isinstance(claims, Mapping):
            raise _fail("claims must be an object", path)

        notes = data.get("notes")
        if notes is not None and not isinstance(notes, str):
            raise _fail("notes must be a string", path)

        spec = ManifoldSpec(
            name=name,
            coordinates=coords,
            metric=metric,
            samples=samples,
            declared_ricci=declared,
            vector_fields=fields,
            one_forms=forms,
            scalars=scalars,
            domain=domain,
            triple=triple,
            tolerances=tolerances,
            claims=dict(claims),
            notes=notes,
            path=path,
        )
        spec._validate_samples()
        return spec

    @staticmethod
    def from_file(path: str) -> "ManifoldSpec":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ManifoldFormatError(f"cannot read file: {exc}", str(path)) from exc
        except json.JSONDecodeError as exc:
            raise ManifoldFormatError(f"invalid JSON: {exc}", str(path)) from exc
        return ManifoldSpec.from_dict(data, path=str(path))

    # -- validation --------------------------------------------------------

    def _validate_samples(self) -> None:
        """Samples must lie in the declared domain with a positive metric."""
        for idx, point in enumerate(self.samples):
            for k, cond in enumerate(self.domain):
                v = self._value_or_fail(cond, point, f"domain[{k}]", idx)
                if not v > 0.0:
                    raise ManifoldValidationError(
                        f"sample point {idx} violates domain[{k}]: "
                        f"{cond.canonical_source()} = {v!r}"
                    )
            try:
                g = self.metric_values(point)
            except EvalDomainError as exc:
                raise ManifoldValidationError(
                    f"metric cannot be evaluated at sample point {idx}: {exc}"
                ) from exc
            for k in range(1, self.dimension + 1):
                minor = float(np.linalg.det(g[:k, :k]))
                if not minor > 0.0:
                    raise ManifoldValidationError(
                        f"metric is not positive definite at sample point {idx} "
                        f"(leading minor {k} = {minor!r})"
                    )

    def _value_or_fail(self, expr: ScalarExpr, point: np.ndarray, where: str, idx: int) -> float:
        try:
            return eval_value(expr.root, point)
        except EvalDomainError as exc:
            raise ManifoldValidationError(
                f"{where} cannot be evaluated at sample point {idx}: {exc}"
            ) from exc

    # -- evaluation helpers ------------------------------------------------

    def _entry_values(
        self, entries: Mapping[tuple[int, int], ScalarExpr], point: np.ndarray
    ) -> np.ndarray:
        n = self.dimension
        out = np.zeros((n, n))
        for (i, j), e in entries.items():
            v = e.value(point)
            out[i, j] = v
            out[j, i] = v
        return out

    def metric_values(self, point: np.ndarray) -> np.ndarray:
        """g_ij at one point, full symmetric matrix."""
        return self._entry_values(self.metric, np.asarray(point, dtype=float))

    def metric_jets(
        self, point: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(g, dg, d2g, d3g) with dg[i,j,k] = d_k g_ij and so on."""
        point = np.asarray(point, dtype=float)
        n = self.dimension
        g = np.zeros((n, n))
        dg = np.zeros((n, n, n))
        d2g = np.zeros((n, n, n, n))
        d3g = np.zeros((n, n, n, n, n))
        for (i, j), e in self.metric.items():
            jet = e.jet(point)
            for a, b in ((i, j), (j, i)) if i != j else ((i, j),):
                g[a, b] = jet.value
                dg[a, b] = jet.grad
                d2g[a, b] = jet.hess
                d3g[a, b] = jet.third
        return g, dg, d2g, d3g

    def declared_ricci_values(self, point: np.ndarray) -> np.ndarray:
        if self.declared_ricci is None:
            raise ManifoldValidationError(f"{self.name}: no declared_ricci table")
        return self._entry_values(self.declared_ricci, np.asarray(point, dtype=float))

    def declared_ricci_jets(self, point: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(S, dS) for the declared Ricci table, dS[i,j,k] = d_k S_ij."""
        if self.declared_ricci is None:
            raise ManifoldValidationError(f"{self.name}: no declared_ricci table")
        point = np.asarray(point, dtype=float)
        n = self.dimension
        s = np.zeros((n, n))
        ds = np.zeros((n, n, n))
        for (i, j), e in self.declared_ricci.items():
            jet = e.jet(point)
            for a, b in ((i, j), (j, i)) if i != j else ((i, j),):
                s[a, b] = jet.value
                ds[a, b] = jet.grad
        return s, ds

    def _components(
        self, table: Mapping[str, tuple[ScalarExpr, ...]], kind: str, name: str
    ) -> tuple[ScalarExpr, ...]:
        try:
            return table[name]
        except KeyError:
            raise UnknownFieldError(kind, name) from None

    def field_values(self, name: str, point: np.ndarray) -> np.ndarray:
        """Contravariant components X^i of a named vector field."""
        comps = self._components(self.vector_fields, "vector field", name)
        point = np.asarray(point, dtype=float)
        return np.array([e.value(point) for e in comps])

    def field_jacobian(self, name: str, point: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(X, J) with J[i, j] = d_j X^i."""
        comps = self._components(self.vector_fields, "vector field", name)
        point = np.asarray(point, dtype=float)
        n = self.dimension
        x = np.empty(n)
        jac = np.empty((n, n))
        for i, e in enumerate(comps):
            jet = e.jet(point)
            x[i] = jet.value
            jac[i] = jet.grad
        return x, jac

    def form_values(self, name: str, point: np.ndarray) -> np.ndarray:
        """Covariant components w_i of a named one-form."""
        comps = self._components(self.one_forms, "one-form", name)
        point = np.asarray(point, dtype=float)
        return np.array([e.value(point) for e in comps])

    def form_jacobian(self, name: str, point: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(w, J) with J[i, j] = d_j w_i."""
        comps = self._components(self.one_forms, "one-form", name)
        point = np.asarray(point, dtype=float)
        n = self.dimension
        w = np.empty(n)
        jac = np.empty((n, n))
        for i, e in enumerate(comps):
            jet = e.jet(point)
            w[i] = jet.value
            jac[i] = jet.grad
        return w, jac

    def scalar_value(self, name: str, point: np.ndarray) -> float:
        try:
            e = self.scalars[name]
        except KeyError:
            raise UnknownFieldError("scalar", name) from None
        return e.value(np.asarray(point, dtype=float))

    def scalar_jet(self, name: str, point: np.ndarray):
        try:
            e = self.scalars[name]
        except KeyError:
            raise UnknownFieldError("scalar", name) from None
        return e.jet(np.asarray(point, dtype=float))

    def orthonormality_residual(self, point: np.ndarray, names: tuple[str, ...]) -> float:
        """max |g(X_a, X_b) - delta_ab| over the named fields."""
        point = np.asarray(point, dtype=float)
        g = self.metric_values(point)
        vecs = [self.field_values(nm, point) for nm in names]
        worst = 0.0
        for a, xa in enumerate(vecs):
            for b, xb in enumerate(vecs):
                gram = float(xa @ g @ xb)
                worst = max(worst, abs(gram - (1.0 if a == b else 0.0)))
        return worst

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        """Canonical JSON form; parsing it back yields an equal spec."""
        out: dict[str, Any] = {
            "schema": SCHEMA_ID,
            "name": self.name,
            "dimension": self.dimension,
            "coordinates": list(self.coordinates),
            "metric": _entry_table_dict(self.metric),
        }
        if self.declared_ricci is not None:
            out["declared_ricci"] = _entry_table_dict(self.declared_ricci)
        if self.vector_fields:
            out["vector_fields"] = {
                nm: [e.canonical_source() for e in comps]
                for nm, comps in sorted(self.vector_fields.items())
            }
        if self.one_forms:
            out["one_forms"] = {
                nm: [e.canonical_source() for e in comps]
                for nm, comps in sorted(self.one_forms.items())
            }
        if self.scalars:
            out["scalars"] = {
                nm: e.canonical_source() for nm, e in sorted(self.scalars.items())
            }
        if self.domain:
            out["domain"] = [e.canonical_source() for e in self.domain]
        out["samples"] = {"points": [[float(v) for v in row] for row in self.samples]}
        if self.triple is not None:
            out["triple"] = list(self.triple)
        if self.tolerances:
            out["tolerances"] = dict(sorted(self.tolerances.items()))
        if self.claims:
            out["claims"] = self.claims
        if self.notes is not None:
            out["notes"] = self.notes
        return out

    @cached_property
    def source_digest(self) -> str:
        """sha256 of the canonical serialization, reported for traceability."""
        import hashlib

        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _parse_samples(raw: Any, coords: tuple[str, ...], path: str | None) -> np.ndarray:
    n = len(coords)
    if not isinstance(raw, Mapping) or set(raw) not in ({"points"}, {"grid"}):
        raise _fail("samples must be {\"points\": ...} or {\"grid\": ...}", path)
    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, list) or not pts:
            raise _fail("samples.points must be a non-empty list", path)
        out = np.empty((len(pts), n))
        for r, row in enumerate(pts):
            if not isinstance(row, list) or len(row) != n:
                raise _fail(f"samples.points[{r}] must have {n} numbers", path)
            for c, v in enumerate(row):
                if not isinstance(v, (int, float)) or not np.isfinite(v):
                    raise _fail(f"samples.points[{r}][{c}] is not a finite number", path)
                out[r, c] = float(v)
        return out
    grid = raw["grid"]
    if not isinstance(grid, Mapping) or set(grid) != set(coords):
        raise _fail("samples.grid must give a range for every coordinate", path)
    axes = []
    for c in coords:
        rng = grid[c]
        if not isinstance(rng, Mapping) or set(rng) != {"min", "max", "count"}:
            raise _fail(f"samples.grid[{c}] must have min, max, count", path)
        lo, hi, count = rng["min"], rng["max"], rng["count"]
        if not isinstance(count, int) or count < 1:
            raise _fail(f"samples.grid[{c}].count must be a positive integer", path)
        if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float)) and lo <= hi):
            raise _fail(f"samples.grid[{c}] needs min <= max", path)
        axes.append(np.linspace(float(lo), float(hi), count))
    rows = [list(combo) for combo in itertools.product(*axes)]
    return np.array(rows)


def load_manifold(path: str) -> ManifoldSpec:
    """Load and validate a .mfd file."""
    return ManifoldSpec.from_file(path)
