"""Decide or estimate whether iterated fields are gradient fields.

Exact verdicts come from rational matrix powers (linear and affine
fields), integer divisibility (plane rotations), or exact polynomial
algebra.  Everything else gets a sampled Jacobian-symmetry test: a
necessary-condition check at finitely many points, reported as evidence,
never as proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Sequence

import numpy as np

from . import rationals
from .fields import (ChainProduct, Field, Iterate, NonFiniteValueError,
                     Rotation2D, asymmetry, jacobian)
from .polynomials import (DEFAULT_MAX_TERMS, PolyField, asymmetry_polys)

DEFAULT_THRESHOLD = 1e-8

NUMERIC_NOTE = "sampled evidence at finitely many points, not a proof"


class SamplingError(RuntimeError):
    """Too many sample evaluations failed for a meaningful verdict."""


@dataclass(frozen=True)
class SamplingConfig:
    """Where numeric checks sample: a ball (default) or an axis-aligned box."""

    count: int = 50
    radius: float = 1.0
    seed: int = 0
    kind: str = "ball"

    def to_dict(self):
        return {"count": self.count, "radius": self.radius,
                "seed": self.seed, "kind": self.kind}


def draw_samples(dimension: int, config: SamplingConfig) -> np.ndarray:
    rng = np.random.default_rng(config.seed)
    if config.kind == "ball":
        g = rng.standard_normal((config.count, dimension))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = config.radius * rng.random(config.count) ** (1.0 / dimension)
        return g / norms * radii[:, None]
    if config.kind == "box":
        return rng.uniform(-config.radius, config.radius, size=(config.count, dimension))
    raise ValueError(f"unknown sampling kind {config.kind!r}")


@dataclass
class Verdict:
    """Outcome of one k-conservatism check.

    kind is one of exact-yes, exact-no, numeric-pass, numeric-fail.
    Exact negatives carry a certificate (a nonzero polynomial or matrix
    entry); numeric verdicts carry the worst residual and, on failure,
    the witness point that produced it.
    """

    kind: str
    residual: float | None = None
    witness: list | None = None
    certificate: str | None = None
    skipped_samples: int = 0

    @property
    def is_yes(self) -> bool:
        return self.kind in ("exact-yes", "numeric-pass")

    @property
    def exact(self) -> bool:
        return self.kind.startswith("exact")

    def to_dict(self) -> dict:
        out = {"verdict": self.kind}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.witness is not None:
            out["witness"] = list(self.witness)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.kind.startswith("numeric"):
            out["note"] = NUMERIC_NOTE
            if self.skipped_samples:
                out["skipped_samples"] = self.skipped_samples
        return out


def check_linear(matrix, k: int) -> Verdict:
    """Exact verdict for x -> A x: is A^k symmetric?

    Entries convert to rationals exactly (floats are dyadic), so the test
    has no tolerance at all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    A = rationals.fraction_matrix(matrix)
    P = rationals.mat_power(A, k)
    n = len(P)
    for i in range(n):
        for j in range(i + 1, n):
            if P[i][j] != P[j][i]:
                gap = P[i][j] - P[j][i]
                return Verdict("exact-no", certificate=(
                    f"power {k} entry ({i + 1},{j + 1}) minus ({j + 1},{i + 1}) = {gap}"))
    return Verdict("exact-yes")


def check_rotation(j: int, k: int) -> Verdict:
    """Exact verdict for the rotation by pi/j: symmetric powers need j | k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k % j == 0:
        return Verdict("exact-yes", certificate=f"{j} divides {k}: rotation angle is a multiple of pi")
    return Verdict("exact-no", certificate=f"{j} does not divide {k}: sin(k*pi/{j}) is nonzero")


def check_poly(polyfield: PolyField, k: int, max_terms: int = DEFAULT_MAX_TERMS) -> Verdict:
    """Exact verdict for a polynomial field via the symbolic asymmetry matrix."""
    D = asymmetry_polys(polyfield, k, max_terms=max_terms)
    n = len(D)
    for i in range(n):
        for j in range(i + 1, n):
            if not D[i][j].is_zero():
                return Verdict("exact-no", certificate=D[i][j].to_text())
    return Verdict("exact-yes")


def check_numeric(field: Field, k: int, samples=None,
                  threshold: float = DEFAULT_THRESHOLD) -> Verdict:
    """Sampled Jacobian-symmetry residuals of the k-fold iterate.

    Non-finite evaluations skip the sample; at least half the samples
    must survive.  Pass/fail compares the worst residual against the
    threshold; failure records the witness point.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if samples is None:
        samples = SamplingConfig()
    if isinstance(samples, SamplingConfig):
        points = draw_samples(field.dimension, samples)
    else:
        points = np.atleast_2d(np.asarray(samples, dtype=float))
    iterated = Iterate(field, k)
    worst = -1.0
    witness = None
    skipped = 0
    for point in points:
        try:
            J = jacobian(iterated, point, ChainProduct())
        except NonFiniteValueError:
            skipped += 1
            continue
        residual = asymmetry(J)
        if residual > worst:
            worst = residual
            witness = point
    if len(points) - skipped < max(1, (len(points) + 1) // 2):
        raise SamplingError(
            f"{skipped} of {len(points)} samples failed to evaluate")
    if worst > threshold:
        return Verdict("numeric-fail", residual=worst,
                       witness=[float(v) for v in witness], skipped_samples=skipped)
    return Verdict("numeric-pass", residual=worst, skipped_samples=skipped)


def _exact_verdict(field: Field, k: int) -> Verdict | None:
    if isinstance(field, Iterate):
        return _exact_verdict(field.inner, k * field.k)
    if isinstance(field, Rotation2D):
        return check_rotation(field.j, k)
    affine = field.as_affine()
    if affine is not None:
        # The Jacobian of an iterated affine map is the matrix power; the
        # offset does not affect symmetry.
        A = affine[0]
        P = rationals.mat_power(A, k)
        n = len(P)
        for i in range(n):
            for j in range(i + 1, n):
                if P[i][j] != P[j][i]:
                    gap = P[i][j] - P[j][i]
                    return Verdict("exact-no", certificate=(
                        f"power {k} entry ({i + 1},{j + 1}) minus ({j + 1},{i + 1}) = {gap}"))
        return Verdict("exact-yes")
    poly = field.as_polyfield()
    if poly is not None:
        return check_poly(poly, k)
    return None


@dataclass
class ConservatismReport:
    """Per-k verdicts for one field, with the sampling setup that produced them."""

    field_desc: str
    threshold: float
    sampling: SamplingConfig | None
    entries: list[tuple[int, Verdict]] = dataclass_field(default_factory=list)

    def verdict(self, k: int) -> Verdict:
        for kk, v in self.entries:
            if kk == k:
                return v
        raise KeyError(f"no verdict for k={k}")

    def pattern(self) -> dict[int, bool]:
        return {k: v.is_yes for k, v in self.entries}

    def to_dict(self) -> dict:
        return {
            "field": self.field_desc,
            "threshold": self.threshold,
            "sampling": self.sampling.to_dict() if self.sampling else None,
            "results": [{"k": k, **v.to_dict()} for k, v in self.entries],
        }


def scan_k(field: Field, k_max: int, mode: str = "auto",
           sampling: SamplingConfig | None = None,
           threshold: float = DEFAULT_THRESHOLD) -> ConservatismReport:
    """Check k-conservatism for every k up to k_max.

    mode "auto" uses the exact path whenever the field is recognizably a
    rotation, an exact affine map, or an exact polynomial field, and the
    sampled numeric path otherwise; mode "numeric" forces sampling.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if mode not in ("auto", "numeric"):
        raise ValueError(f"unknown mode {mode!r}")
    sampling_cfg = sampling or SamplingConfig()
    points = None
    report = ConservatismReport(field.describe(), threshold, None)
    for k in range(1, k_max + 1):
        verdict = _exact_verdict(field, k) if mode == "auto" else None
        if verdict is None:
            if points is None:
                points = draw_samples(field.dimension, sampling_cfg)
                report.sampling = sampling_cfg
            verdict = check_numeric(field, k, points, threshold)
        report.entries.append((k, verdict))
    return report
