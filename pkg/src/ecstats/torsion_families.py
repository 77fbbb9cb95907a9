"""Curves over Q with prescribed torsion, generated by height, and their reduction statistics."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import is_prime
from .cusp_census import rational_cusp_count
from .errors import BadInputError, CoprimalityError, InvariantViolation, ResourceLimitError
from .family_count import (FamilyCounter, _RowGeometry, candidate_bad_primes, degenerate_points,
                           local_densities, observer_labels, p46_classes, row0_degenerate)
from .ff_curves import get_census
from .level_fibers import fiber_size
from .levels import LevelSpec
from .parametrizations import FamilyParametrization, builtin_parametrization
from .wps_rational import _canonical_sign, _content_int, WeightVector, normalize

log = logging.getLogger(__name__)

W46 = WeightVector((4, 6))
FAMILY_CEILING = 2_000_000


@dataclass(frozen=True)
class GlobalCurve:
    """y^2 = x^3 + A x + B, minimal in P(4,6), produced by the parameter t = (t0, t1)."""

    A: int
    B: int
    t: tuple[int, int]

    @property
    def height12(self) -> int:
        """H^12 = max(|A|^3, |B|^2)."""
        return max(abs(self.A) ** 3, self.B * self.B)

    @property
    def height(self) -> float:
        return max(abs(self.A) ** 0.25, abs(self.B) ** (1 / 6))

    def to_json(self) -> str:
        return json.dumps({"t": list(self.t), "A": self.A, "B": self.B, "height12": self.height12})

    @classmethod
    def from_json(cls, line: str) -> "GlobalCurve":
        d = json.loads(line)
        c = cls(int(d["A"]), int(d["B"]), tuple(d["t"]))
        if c.height12 != d["height12"]:
            raise InvariantViolation(f"stored height disagrees for {d}")
        return c


@dataclass
class Family:
    level: LevelSpec
    bound: Fraction
    curves: list[GlobalCurve]
    parameter_points: int  # before deduplication
    complete: bool  # completeness self-test verdict

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def to_jsonl(self) -> str:
        return "".join(c.to_json() + "\n" for c in self.curves)


def _family(level) -> FamilyParametrization:
    if isinstance(level, FamilyParametrization):
        return level
    return builtin_parametrization(level)


def _height_ok(A: int, B: int, bound: Fraction) -> bool:
    # max(|A|^3, B^2) <= bound^12
    return max(abs(A) ** 3, B * B) * bound.denominator**12 <= bound.numerator**12


def generate_family(level, bound, ceiling: int = FAMILY_CEILING) -> Family:
    """Every curve of height <= bound in the family, once each, ordered by parameter."""
    fam = _family(level)
    bound = Fraction(bound)
    counter = FamilyCounter(fam)
    if bound <= 0:
        return Family(fam.level, bound, [], 0, True)
    res = counter.count(bound)
    if res.total > ceiling:
        raise ResourceLimitError(f"{res.total} parameter points exceed the ceiling {ceiling}")
    src = WeightVector(fam.source)
    seen: dict[tuple[int, int], GlobalCurve] = {}
    n_params = 0
    first = 1 if row0_degenerate(fam) else 0
    for x0 in range(first, res.rows):
        geo = _RowGeometry(fam, x0)
        for lo, hi in counter.row_intervals(x0, bound, counter.max_defect, geo):
            for x1 in range(lo, hi + 1):
                x = (x0, x1)
                if x == (0, 0) or _content_int(src, x) != 1 or _canonical_sign(src, x) != x:
                    continue
                f, g = fam.curve(x0, x1)
                if 4 * f**3 + 27 * g * g == 0:
                    continue
                A, B = normalize(W46, (f, g)).coords
                if not _height_ok(A, B, bound):
                    continue
                n_params += 1
                seen.setdefault((A, B), GlobalCurve(A, B, x))
    if n_params != res.total:
        raise InvariantViolation(f"enumeration found {n_params} parameter points, the counter {res.total}")
    return Family(fam.level, bound, list(seen.values()), n_params, res.completeness_ok)


# ---------------------------------------------------------------- reduction types


@dataclass(frozen=True)
class LocalReport:
    q: int
    kind: str  # "good", "split", "nonsplit", "additive"
    a: int | None  # trace of Frobenius for good reduction, +-1 for multiplicative
    reduced: tuple[int, int] | None  # reduced (A, B) after removing q-content; None for additive


def _legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


def local_type(curve: GlobalCurve, q: int, level: LevelSpec | None = None) -> LocalReport:
    """Reduction type of a minimal curve at q.

    Additive reduction raises InvariantViolation when the level is representable.
    """
    if not is_prime(q) or q < 5:
        raise BadInputError(f"q={q} must be a prime at least 5")
    if level is not None and (6 * level.level) % q == 0:
        raise CoprimalityError(f"q={q} divides 6 * {level.level}")
    A, B = curve.A, curve.B
    k = min(_val(A, q) // 4 if A else 99, _val(B, q) // 6 if B else 99)
    if k:
        A //= q ** (4 * k)
        B //= q ** (6 * k)
    Ar, Br = A % q, B % q
    if Ar == 0 and Br == 0:
        if level is not None and level.representable:
            raise InvariantViolation("additive reduction in representable family")
        return LocalReport(q, "additive", None, None)
    if (4 * Ar**3 + 27 * Br * Br) % q:
        census = get_census(q)
        cls = p46_classes(q).lookup(Ar, Br)
        return LocalReport(q, "good", census.classes[cls].trace_a, (Ar, Br))
    alpha = -3 * Br * pow(2 * Ar, -1, q) % q
    split = _legendre(3 * alpha, q) == 1
    return LocalReport(q, "split" if split else "nonsplit", 1 if split else -1, (Ar, Br))


def _val(n: int, q: int) -> int:
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


# ---------------------------------------------------------------- statistics


@dataclass
class LocalStatistics:
    """Tallies of a family at one prime q, with model predictions."""

    level: LevelSpec
    q: int
    bound: Fraction
    class_counts: dict[int, int]  # census class index -> count
    split: int
    nonsplit: int
    additive: int
    predicted_class: dict[int, Fraction] = field(repr=False)
    predicted_split: Fraction = Fraction(0)
    predicted_nonsplit: Fraction = Fraction(0)
    predicted_additive: Fraction = Fraction(0)
    unit: str = "curve"  # "curve" or "parameter point"

    @property
    def total(self) -> int:
        return sum(self.class_counts.values()) + self.split + self.nonsplit + self.additive

    @property
    def multiplicative(self) -> int:
        return self.split + self.nonsplit

    def fraction(self, count: int) -> float:
        return count / self.total if self.total else float("nan")

    @property
    def multiplicative_fraction(self) -> float:
        return self.fraction(self.multiplicative)

    @property
    def predicted_multiplicative(self) -> Fraction:
        """Rational cusps over q+1; only meaningful for representable levels."""
        return Fraction(rational_cusp_count(self.level, self.q), self.q + 1)

    def fiber_prediction(self, idx: int) -> Fraction:
        census = get_census(self.q)
        return fiber_size(self.level, census.classes[idx]) / (self.q + 1)

    def max_class_deviation(self) -> float:
        """max over good classes z of |empirical fraction - fiber_size(z)/(q+1)|."""
        census = get_census(self.q)
        return max(abs(self.fraction(self.class_counts.get(i, 0)) - float(self.fiber_prediction(i)))
                   for i in range(len(census.classes)))

    def by_trace(self) -> dict[int, int]:
        census = get_census(self.q)
        out: dict[int, int] = {}
        for i, n in self.class_counts.items():
            a = census.classes[i].trace_a
            out[a] = out.get(a, 0) + n
        return out

    def rows(self):
        census = get_census(self.q)
        for i, rec in enumerate(census.classes):
            n = self.class_counts.get(i, 0)
            pred = self.predicted_class.get(i, Fraction(0))
            if n or pred:
                yield {"q": self.q, "z_or_kind": f"{rec.A}:{rec.B}", "count": n,
                       "predicted_fraction_num": pred.numerator, "predicted_fraction_den": pred.denominator}
        for kind, n, pred in (("split", self.split, self.predicted_split),
                              ("nonsplit", self.nonsplit, self.predicted_nonsplit),
                              ("additive", self.additive, self.predicted_additive)):
            yield {"q": self.q, "z_or_kind": kind, "count": n,
                   "predicted_fraction_num": pred.numerator, "predicted_fraction_den": pred.denominator}


def _check_q(fam: FamilyParametrization, q: int) -> None:
    if not is_prime(q):
        raise BadInputError(f"q={q} is not prime")
    if (6 * fam.level.level) % q == 0:
        raise CoprimalityError(f"q={q} divides 6 * {fam.level.level}")
    if q in candidate_bad_primes(fam):
        raise BadInputError(f"q={q} is a bad prime of the stored parametrization")


def _predictions(fam: FamilyParametrization, q: int):
    """Densities of the reduction classes among parameter points, exact."""
    cls = p46_classes(q)
    dens = local_densities(fam, q)
    split_id, nonsplit_id = _node_ids(q)
    classes = {i: v for i, v in dens.items() if i < cls.n_good}
    return classes, dens.get(split_id, Fraction(0)), dens.get(nonsplit_id, Fraction(0)), \
        dens.get(cls.star, Fraction(0))


def _node_ids(q: int) -> tuple[int, int]:
    """(split id, nonsplit id): the node [-3a^2, 2a^3] is split iff 3a is a square."""
    cls = p46_classes(q)
    if _legendre(3, q) == 1:
        return cls.node_square, cls.node_nonsquare
    return cls.node_nonsquare, cls.node_square


def _stats_from_labels(fam, q, bound, label_counts: dict[int, int], unit: str) -> LocalStatistics:
    cls = p46_classes(q)
    split_id, nonsplit_id = _node_ids(q)
    additive = label_counts.get(cls.star, 0)
    if additive and fam.level.representable:
        raise InvariantViolation("additive reduction in representable family")
    classes, ps, pn, pa = _predictions(fam, q)
    return LocalStatistics(fam.level, q, bound,
                           {i: n for i, n in label_counts.items() if i < cls.n_good and n},
                           label_counts.get(split_id, 0), label_counts.get(nonsplit_id, 0), additive,
                           classes, ps, pn, pa, unit)


def local_statistics(family: Family, q: int) -> LocalStatistics:
    """Tallies over a materialized family, one count per curve."""
    fam = _family(family.level)
    _check_q(fam, q)
    cls = p46_classes(q)
    split_id, nonsplit_id = _node_ids(q)
    counts: dict[int, int] = {}
    for c in family:
        rep = local_type(c, q, fam.level)
        if rep.kind == "good":
            lab = cls.lookup(*rep.reduced)
        elif rep.kind == "split":
            lab = split_id
        elif rep.kind == "nonsplit":
            lab = nonsplit_id
        else:
            lab = cls.star
        counts[lab] = counts.get(lab, 0) + 1
    return _stats_from_labels(fam, q, family.bound, counts, "curve")


def stream_statistics(level, bound, qs: Sequence[int]) -> dict[int, LocalStatistics]:
    """Tallies over all parameter points of height <= bound, without materializing curves.

    Counts parameter points; a curve with k parametrizations is counted k times.  For
    Gamma1(N), N >= 5, every curve in the family has the same number of parameters
    (the pairs +-P of points of exact order N), so fractions agree with the per-curve ones.
    """
    fam = _family(level)
    for q in qs:
        _check_q(fam, q)
    res = FamilyCounter(fam).count(Fraction(bound), qs=tuple(qs))
    if not res.completeness_ok:
        log.warning("completeness self-test failed for %s at bound %s", fam.level.token, bound)
    out = {}
    for q in qs:
        counts = {i: int(n) for i, n in enumerate(res.observers[q]) if n}
        out[q] = _stats_from_labels(fam, q, Fraction(bound), counts, "parameter point")
    return out


def count_family(level, bound) -> int:
    """Number of parameter points of height <= bound."""
    return FamilyCounter(_family(level)).count(Fraction(bound)).total


def stats_to_csv(stats: Iterable[LocalStatistics]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["q", "z_or_kind", "count", "predicted_fraction_num",
                                        "predicted_fraction_den"], lineterminator="\n")
    w.writeheader()
    for s in stats:
        w.writerows(s.rows())
    return buf.getvalue()


def load_family_jsonl(text: str) -> list[GlobalCurve]:
    return [GlobalCurve.from_json(line) for line in text.splitlines() if line.strip()]
