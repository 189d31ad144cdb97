"""Order-statistic violation bounds.

Every bound is a sum of *g-terms*. A g-term pairs the binomial tail of one
group's cell with the Beta law of the matching order statistic in the
other group:

    g = E_Q[ 1{s(Q) > 0} * P(Bin(n_tail, min(s(Q), 1)) >= k_tail) ],
    Q ~ Beta(k_beta + offset, n_beta - k_beta + 1 - offset),
    s(Q) = (q_scale * Q + q_offset - alpha) / denom.

The expectation is evaluated either by Monte Carlo on a keyed random
stream or by Gauss-Legendre quadrature in the Beta survival coordinate.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .core import (
    CandidateEntry,
    DomainError,
    FairnessSpec,
    GroupedScores,
    InfeasibleError,
    Notion,
    PrevalenceEstimates,
    UsageError,
    ceil_log_ratio,
)

GL_NODES = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)

_NOTION_CODE = {Notion.EOO: 1, Notion.EO: 2, Notion.DP: 3, Notion.PE: 4, Notion.EA: 5}

# term roles: which cells the tail/Beta pair is drawn from
ROLE_LABEL0 = 0
ROLE_LABEL1 = 1
ROLE_POOLED = 2


def binom_tail(n: int, p, k):
    """Upper binomial tail ``P(Bin(n, p) >= k)``.

    Uses ``I_p(k, n - k + 1)`` for ``k >= 1``; ``k = 0`` gives 1.
    Broadcasts over array ``p`` and ``k``.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    k_arr = np.asarray(k)
    if np.any(~np.isfinite(p_arr)) or np.any((p_arr < 0.0) | (p_arr > 1.0)):
        raise DomainError("binomial success probability must lie in [0, 1]")
    if n < 0 or np.any((k_arr < 0) | (k_arr > n)):
        raise DomainError("binom_tail needs 0 <= k <= n")
    k_pos = np.maximum(k_arr, 1)
    out = np.where(k_arr == 0, 1.0, special.betainc(k_pos, n - k_pos + 1, p_arr))
    if out.ndim == 0:
        return float(out)
    return out


def _pmf_matrix(n: int, p: np.ndarray) -> np.ndarray:
    """``P(Bin(n, p_i) = j)`` for every row ``i`` and ``j = 0..n``, via the log-pmf."""
    j = np.arange(n + 1)
    log_choose = special.gammaln(n + 1) - special.gammaln(j + 1) - special.gammaln(n - j + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pmf = log_choose + j * np.log(p)[:, None] + (n - j) * np.log1p(-p)[:, None]
    pmf = np.exp(log_pmf)
    zero = p <= 0.0
    one = p >= 1.0
    if zero.any():
        pmf[zero] = 0.0
        pmf[zero, 0] = 1.0
    if one.any():
        pmf[one] = 0.0
        pmf[one, n] = 1.0
    return pmf


def _tail_matrix(n: int, p: np.ndarray) -> np.ndarray:
    """Tails ``P(Bin(n, p_i) >= k)`` for every row ``i`` and ``k = 0..n``.

    Reversed cumulative sum of the pmf; agrees with :func:`binom_tail` to
    ~1e-13 and is several times faster on grids.
    """
    tails = np.cumsum(_pmf_matrix(n, p)[:, ::-1], axis=1)[:, ::-1]
    return np.minimum(tails, 1.0)


def _weighted_tails(n: int, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``sum_i w_i P(Bin(n, p_i) >= k)`` for ``k = 0..n``.

    The weights are applied to the pmf first, so only one cumulative sum
    is needed.
    """
    mixed = w @ _pmf_matrix(n, p)
    return np.minimum(np.cumsum(mixed[::-1])[::-1], w.sum())


@dataclass(frozen=True)
class BoundTermParams:
    """Arguments of one g-term.

    ``shape_offset`` is 0 when the Beta law is that of a chosen order
    statistic and 1 when it is that of the next order statistic above a
    derived rank (label-0 terms of equalized odds and equalized accuracy).
    With offset 1 the Beta index may be 0..n_beta; ``k_beta = n_beta``
    gives the point mass at 1.
    """

    n_tail: int
    k_tail: int
    n_beta: int
    k_beta: int
    shape_offset: int = 0
    alpha: float = 0.0
    q_scale: float = 1.0
    q_offset: float = 0.0
    denom: float = 1.0

    def __post_init__(self):
        if self.shape_offset not in (0, 1):
            raise DomainError("shape_offset must be 0 or 1")
        if not 0 <= self.k_tail <= self.n_tail:
            raise DomainError(f"k_tail={self.k_tail} outside 0..{self.n_tail}")
        lo = 1 - self.shape_offset
        if not lo <= self.k_beta <= self.n_beta:
            raise DomainError(f"k_beta={self.k_beta} outside {lo}..{self.n_beta}")
        if self.denom <= 0.0 or self.q_scale < 0.0:
            raise DomainError("affine rescaling needs denom > 0 and q_scale >= 0")

    @property
    def beta_shape(self) -> tuple[int, int]:
        return (
            self.k_beta + self.shape_offset,
            self.n_beta - self.k_beta + 1 - self.shape_offset,
        )

    def shifted(self, q):
        """Binomial argument before clamping; the term vanishes where <= 0."""
        return (self.q_scale * q + self.q_offset - self.alpha) / self.denom


def _draw_q(a: int, b: int, size: int, rng: np.random.Generator) -> np.ndarray:
    if b == 0:
        return np.ones(size)
    return rng.beta(a, b, size)


_GRADE_RATIO = 0.1
_GRADE_LEVELS = 12
_GRADE_NODES = 16
_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(_GRADE_NODES)


def _graded_rule(lo: float, hi: float, grade_lo: bool, grade_hi: bool):
    """Gauss-Legendre on ``[lo, hi]``: 64 nodes on the bulk plus small
    panels shrinking geometrically toward each graded endpoint."""
    width = hi - lo
    xs, ws = [], []

    def panel(a, b, x, w):
        xs.append(a + 0.5 * (b - a) * (x + 1.0))
        ws.append(0.5 * (b - a) * w)

    r = _GRADE_RATIO
    b_lo = lo + r * width if grade_lo else lo
    b_hi = hi - r * width if grade_hi else hi
    panel(b_lo, b_hi, _GL_X, _GL_W)
    for end, graded in ((0, grade_lo), (1, grade_hi)):
        if not graded:
            continue
        for level in range(1, _GRADE_LEVELS + 1):
            near, far = r ** (level + 1) * width, r**level * width
            if end == 0:
                panel(lo + near, lo + far, _GL16_X, _GL16_W)
            else:
                panel(hi - far, hi - near, _GL16_X, _GL16_W)
        # innermost sliver next to the endpoint
        tiny = r ** (_GRADE_LEVELS + 1) * width
        if end == 0:
            panel(lo, lo + tiny, _GL16_X, _GL16_W)
        else:
            panel(hi - tiny, hi, _GL16_X, _GL16_W)
    return np.concatenate(xs), np.concatenate(ws)


def _quad_nodes(params: BoundTermParams) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes/weights over the region where the term is active.

    Works in the survival coordinate ``v = P(Q > q)``. Where the binomial
    argument reaches 1 the tail is exactly 1, so that upper region enters
    as a single node at ``q = 1`` carrying its Beta mass. The remaining
    range uses Gauss-Legendre with graded panels at endpoints where ``q``
    is a non-smooth function of ``v``.
    """
    a, b = params.beta_shape
    if b == 0:
        return np.ones(1), np.ones(1)
    if params.q_scale == 0.0:
        # constant argument: integrate the whole Beta mass
        return np.array([0.5]), np.ones(1)
    q_lo = (params.alpha - params.q_offset) / params.q_scale
    q_one = (params.denom + params.alpha - params.q_offset) / params.q_scale
    if q_lo >= 1.0:
        return np.empty(0), np.empty(0)
    v_hi = 1.0 if q_lo <= 0.0 else float(stats.beta.sf(q_lo, a, b))
    v_lo = float(stats.beta.sf(q_one, a, b)) if q_one < 1.0 else 0.0
    if v_hi <= 0.0:
        return np.empty(0), np.empty(0)
    qs, ws = [], []
    if v_lo > 0.0:
        qs.append(np.ones(1))
        ws.append(np.array([v_lo]))
    if v_hi > v_lo:
        # q(v) is singular at v = 0 (q -> 1) and v = 1 (q -> 0); grade toward
        # an endpoint that sits close to one of them
        near = _GRADE_RATIO * (v_hi - v_lo)
        v, w = _graded_rule(
            v_lo, v_hi, grade_lo=(v_lo < near and b > 1), grade_hi=(1.0 - v_hi < near and a > 1)
        )
        qs.append(stats.beta.isf(v, a, b))
        ws.append(w)
    return np.concatenate(qs), np.concatenate(ws)


def _g_column(
    params: BoundTermParams,
    method: str,
    mc_samples: int,
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    """g-term values for every tail start ``k = 0..n_tail`` at once."""
    n = params.n_tail
    if method == "quad":
        q, w = _quad_nodes(params)
        if q.size == 0:
            return np.zeros(n + 1)
        x = params.shifted(q)
        active = x > 0.0
        return _weighted_tails(n, np.minimum(x[active], 1.0), w[active])
    if method != "mc":
        raise UsageError(f"unknown bound method {method!r}")
    if rng is None:
        raise UsageError("Monte Carlo evaluation needs a random stream")
    a, b = params.beta_shape
    q = _draw_q(a, b, mc_samples, rng)
    x = params.shifted(q)
    active = x > 0.0
    if not active.any():
        return np.zeros(n + 1)
    ones = np.ones(int(active.sum()))
    return _weighted_tails(n, np.minimum(x[active], 1.0), ones) / mc_samples


def g_term(
    params: BoundTermParams,
    mc_samples: int = 1000,
    rng: Optional[np.random.Generator] = None,
    method: str = "mc",
) -> float:
    """Estimate a single g-term.

    Parameters
    ----------
    params : BoundTermParams
    mc_samples : int
        Number of Beta draws for ``method="mc"``.
    rng : numpy.random.Generator, optional
        Stream for the Beta draws; a fresh unseeded stream if omitted.
    method : {"mc", "quad"}

    Returns
    -------
    float
        Value in [0, 1].
    """
    if mc_samples < 1:
        raise DomainError("mc_samples must be >= 1")
    if method == "quad":
        q, w = _quad_nodes(params)
        if q.size == 0:
            return 0.0
        x = params.shifted(q)
        vals = np.where(
            x > 0.0, binom_tail(params.n_tail, np.clip(x, 0.0, 1.0), params.k_tail), 0.0
        )
        return float(np.clip(w @ vals, 0.0, 1.0))
    rng = rng if rng is not None else np.random.default_rng()
    a, b = params.beta_shape
    q = _draw_q(a, b, mc_samples, rng)
    x = params.shifted(q)
    vals = np.where(
        x > 0.0, binom_tail(params.n_tail, np.clip(x, 0.0, 1.0), params.k_tail), 0.0
    )
    return float(vals.mean())


def term_stream(
    seed: int, notion: Notion, role: int, tail_group: int, n_tail: int, n_beta: int, k_beta: int
) -> np.random.Generator:
    """Random stream for one Beta law of one term family.

    Keyed only by identifiers, never by evaluation order, so results do not
    depend on which candidates are evaluated or in what order.
    """
    key = [seed % 2**64, _NOTION_CODE[Notion.parse(notion)], role, tail_group, n_tail, n_beta, k_beta]
    return np.random.default_rng(np.random.SeedSequence(key))


@dataclass(frozen=True)
class TermFamily:
    role: int
    tail_group: int
    n_tail: int
    n_beta: int
    shape_offset: int
    q_scale: float = 1.0
    q_offset: float = 0.0
    denom: float = 1.0

    def params(self, k_tail: int, k_beta: int, alpha: float) -> BoundTermParams:
        return BoundTermParams(
            n_tail=self.n_tail,
            k_tail=k_tail,
            n_beta=self.n_beta,
            k_beta=k_beta,
            shape_offset=self.shape_offset,
            alpha=alpha,
            q_scale=self.q_scale,
            q_offset=self.q_offset,
            denom=self.denom,
        )


def check_ea_budget(alpha: float, prevalence: PrevalenceEstimates) -> None:
    gap = abs(prevalence.p_Ya[1] - prevalence.p_Ya[0])
    if not alpha > gap:
        raise InfeasibleError(
            f"equalized accuracy requires alpha > |p_Y1 - p_Y0| = {gap:.6g}, got alpha={alpha}"
        )


def term_families(
    notion: Notion, scores: GroupedScores, prevalence: Optional[PrevalenceEstimates] = None
) -> dict[tuple[int, int], TermFamily]:
    """The g-term families a notion's bound is built from, keyed (role, tail_group)."""
    notion = Notion.parse(notion)
    fams: dict[tuple[int, int], TermFamily] = {}
    if notion is Notion.DP:
        for a in (0, 1):
            fams[ROLE_POOLED, a] = TermFamily(
                ROLE_POOLED, a, scores.pooled_size(a), scores.pooled_size(1 - a), 0
            )
        return fams
    if notion is Notion.PE:
        for a in (0, 1):
            fams[ROLE_LABEL0, a] = TermFamily(
                ROLE_LABEL0, a, scores.size(0, a), scores.size(0, 1 - a), 0
            )
        return fams
    if notion is Notion.EA:
        if prevalence is None:
            raise UsageError("equalized accuracy bounds need prevalence estimates")
        pY = prevalence.p_Ya
        for a in (0, 1):
            if not 0.0 < pY[a] < 1.0:
                raise InfeasibleError(
                    f"equalized accuracy needs both labels present in group {a}"
                )
        for a in (0, 1):
            fams[ROLE_LABEL1, a] = TermFamily(
                ROLE_LABEL1, a, scores.size(1, a), scores.size(1, 1 - a), 0,
                q_scale=pY[1 - a], q_offset=0.0, denom=pY[a],
            )
            fams[ROLE_LABEL0, a] = TermFamily(
                ROLE_LABEL0, a, scores.size(0, a), scores.size(0, 1 - a), 1,
                q_scale=1.0 - pY[1 - a], q_offset=pY[1 - a] - pY[a], denom=1.0 - pY[a],
            )
        return fams
    for a in (0, 1):
        fams[ROLE_LABEL1, a] = TermFamily(
            ROLE_LABEL1, a, scores.size(1, a), scores.size(1, 1 - a), 0
        )
    if notion is Notion.EO:
        for a in (0, 1):
            fams[ROLE_LABEL0, a] = TermFamily(
                ROLE_LABEL0, a, scores.size(0, a), scores.size(0, 1 - a), 1
            )
    return fams


def term_layout(notion: Notion) -> list[tuple[tuple[int, int], str, str]]:
    """Summation order of a notion's terms: (family, tail index, Beta index).

    Index names refer to :class:`CandidateEntry` attributes; ``p0``/``p1``
    are the pooled indices of demographic parity.
    """
    notion = Notion.parse(notion)
    if notion is Notion.DP:
        return [((ROLE_POOLED, 0), "p0", "p1"), ((ROLE_POOLED, 1), "p1", "p0")]
    if notion is Notion.PE:
        return [((ROLE_LABEL0, 0), "k_00", "k_01"), ((ROLE_LABEL0, 1), "k_01", "k_00")]
    layout = [((ROLE_LABEL1, 0), "k_10", "k_11"), ((ROLE_LABEL1, 1), "k_11", "k_10")]
    if notion in (Notion.EO, Notion.EA):
        layout += [((ROLE_LABEL0, 0), "k_00", "k_01"), ((ROLE_LABEL0, 1), "k_01", "k_00")]
    return layout


def _candidate_index(candidate: CandidateEntry, name: str) -> int:
    if name in ("p0", "p1"):
        if candidate.k_pool is None:
            raise UsageError("demographic parity candidates need pooled indices")
        return candidate.k_pool[int(name[1])]
    return getattr(candidate, name)


@functools.lru_cache(maxsize=16384)
def _cached_column(
    fam: TermFamily, k_beta: int, alpha: float, method: str, mc_samples: int, seed: int, notion: Notion
) -> np.ndarray:
    # a column depends on cell sizes and the spec only, never on score values,
    # so fits that share cell sizes share columns
    params = fam.params(0, k_beta, alpha)
    rng = None
    if method == "mc":
        rng = term_stream(seed, notion, fam.role, fam.tail_group, fam.n_tail, fam.n_beta, k_beta)
    col = _g_column(params, method, mc_samples, rng)
    col.setflags(write=False)
    return col


class BoundEvaluator:
    """Cached g-term columns for one calibration sample and spec.

    A column holds the term for every tail start at a fixed Beta index;
    columns are computed once and shared by all candidates, and each is
    produced by the same code path whether requested alone or in bulk.
    """

    def __init__(
        self,
        scores: GroupedScores,
        spec: FairnessSpec,
        prevalence: Optional[PrevalenceEstimates] = None,
        workers: int = 1,
    ):
        self.scores = scores
        self.spec = spec
        self.notion = spec.notion
        if prevalence is None and scores.n > 0:
            prevalence = PrevalenceEstimates.from_scores(scores)
        self.prevalence = prevalence
        if self.notion is Notion.EA:
            check_ea_budget(spec.alpha, prevalence)
        self.families = term_families(self.notion, scores, prevalence)
        self.layout = term_layout(self.notion)
        self.workers = max(1, int(workers))
        self._cache: dict[tuple[tuple[int, int], int], np.ndarray] = {}

    def _compute(self, fam_key: tuple[int, int], k_beta: int) -> np.ndarray:
        spec = self.spec
        mc = spec.mc_samples if spec.bound_method == "mc" else 0
        seed = spec.seed if spec.bound_method == "mc" else 0
        return _cached_column(
            self.families[fam_key], k_beta, spec.alpha, spec.bound_method, mc, seed, self.notion
        )

    def column(self, fam_key: tuple[int, int], k_beta: int) -> np.ndarray:
        key = (fam_key, int(k_beta))
        col = self._cache.get(key)
        if col is None:
            col = self._compute(fam_key, int(k_beta))
            self._cache[key] = col
        return col

    def columns(self, fam_key: tuple[int, int], k_betas: Sequence[int]) -> np.ndarray:
        """Stack of columns, shape ``(len(k_betas), n_tail + 1)``."""
        k_betas = [int(k) for k in k_betas]
        missing = sorted({k for k in k_betas if (fam_key, k) not in self._cache})
        if missing:
            if self.workers > 1 and len(missing) > 1:
                with ThreadPoolExecutor(self.workers) as pool:
                    cols = list(pool.map(lambda k: self._compute(fam_key, k), missing))
            else:
                cols = [self._compute(fam_key, k) for k in missing]
            for k, col in zip(missing, cols):
                self._cache[fam_key, k] = col
        n_tail = self.families[fam_key].n_tail
        if not k_betas:
            return np.empty((0, n_tail + 1))
        return np.stack([self._cache[fam_key, k] for k in k_betas])

    def term(self, fam_key: tuple[int, int], k_tail: int, k_beta: int) -> float:
        fam = self.families[fam_key]
        # validates the index ranges
        fam.params(k_tail, k_beta, self.spec.alpha)
        return float(self.column(fam_key, k_beta)[k_tail])

    def bound(self, candidate: CandidateEntry) -> float:
        total = 0.0
        for fam_key, tail_name, beta_name in self.layout:
            total = total + self.term(
                fam_key, _candidate_index(candidate, tail_name), _candidate_index(candidate, beta_name)
            )
        return total


def violation_bound(
    notion: Notion | str,
    candidate: CandidateEntry,
    scores: GroupedScores,
    prevalence: Optional[PrevalenceEstimates],
    spec: FairnessSpec,
) -> float:
    """Upper bound on the probability that the notion's gap exceeds alpha.

    Raises
    ------
    InfeasibleError
        For equalized accuracy when ``alpha <= |p_Y1 - p_Y0|``.
    DomainError
        When a candidate index is out of range for its cell.
    """
    notion = Notion.parse(notion)
    if notion is not spec.notion:
        spec = FairnessSpec(
            notion, spec.alpha, spec.delta, spec.mc_samples, spec.seed,
            spec.candidate_mode, spec.bound_method,
        )
    return BoundEvaluator(scores, spec, prevalence).bound(candidate)


@dataclass(frozen=True)
class SampleRequirement:
    """Minimum calibration counts for a notion.

    ``minima`` is keyed by ``(y, a)`` for single cells and by ``("*", a)``
    for a pooled group (demographic parity).
    """

    notion: Notion
    minima: dict

    def actual_counts(self, scores: GroupedScores) -> dict:
        out = {}
        for key in self.minima:
            y, a = key
            out[key] = scores.pooled_size(a) if y == "*" else scores.size(y, a)
        return out

    def shortfalls(self, scores: GroupedScores) -> dict:
        actual = self.actual_counts(scores)
        return {k: (v, actual[k]) for k, v in self.minima.items() if actual[k] < v}

    def check(self, scores: GroupedScores) -> None:
        short = self.shortfalls(scores)
        if short:
            desc = ", ".join(f"n^{{{y},{a}}}={got} < {need}" for (y, a), (need, got) in short.items())
            raise InfeasibleError(
                f"calibration sample too small for {self.notion.value}: {desc}",
                required=self.minima,
                actual=self.actual_counts(scores),
            )


def _ea_minimum(delta: float, base: float) -> int:
    if base <= 0.0:
        return 1
    if base >= 1.0:
        raise InfeasibleError("equalized accuracy requirement is unattainable for these rates")
    return max(1, ceil_log_ratio(delta / 4.0, base))


def min_sample_size(
    notion: Notion | str,
    alpha: float,
    delta: float,
    p_Y: Optional[Sequence[float]] = None,
) -> SampleRequirement:
    """Per-cell minimum counts under which the boundary candidate is admissible.

    ``ceil(log(delta/2) / log(1 - alpha))`` on the constrained cells for
    dp (pooled groups), eoo (label 1) and pe (label 0); ``delta/4`` on all
    four cells for eo; for ea, four cell-specific ceilings that depend on
    the positive rates ``p_Y = (p_Y0, p_Y1)``.
    """
    notion = Notion.parse(notion)
    if not 0.0 < alpha <= 1.0 or not 0.0 < delta < 1.0:
        raise DomainError("alpha must lie in (0, 1] and delta in (0, 1)")
    if alpha >= 1.0:
        half = quarter = 1
    else:
        half = max(1, ceil_log_ratio(delta / 2.0, 1.0 - alpha))
        quarter = max(1, ceil_log_ratio(delta / 4.0, 1.0 - alpha))
    if notion is Notion.DP:
        minima = {("*", 0): half, ("*", 1): half}
    elif notion is Notion.EOO:
        minima = {(1, 0): half, (1, 1): half}
    elif notion is Notion.PE:
        minima = {(0, 0): half, (0, 1): half}
    elif notion is Notion.EO:
        minima = {(y, a): quarter for y in (0, 1) for a in (0, 1)}
    else:
        if p_Y is None:
            raise UsageError("equalized accuracy needs positive-rate estimates p_Y")
        pY0, pY1 = float(p_Y[0]), float(p_Y[1])
        if not alpha > abs(pY1 - pY0):
            raise InfeasibleError(
                f"equalized accuracy requires alpha > |p_Y1 - p_Y0| = {abs(pY1 - pY0):.6g}"
            )
        minima = {
            (0, 0): _ea_minimum(delta, 1.0 - alpha / (1.0 - pY0)) if pY0 < 1 else 1,
            (0, 1): _ea_minimum(delta, 1.0 - alpha / (1.0 - pY1)) if pY1 < 1 else 1,
            (1, 0): _ea_minimum(delta, (pY1 - alpha) / pY0) if pY0 > 0 else 1,
            (1, 1): _ea_minimum(delta, (pY0 - alpha) / pY1) if pY1 > 0 else 1,
        }
    return SampleRequirement(notion, minima)


def boundary_bound(
    notion: Notion | str,
    n: int,
    alpha: float,
    method: str = "quad",
    mc_samples: int = 1000,
    seed: int = 0,
) -> float:
    """Bound of the most conservative candidate when every cell has ``n`` scores.

    The boundary candidate puts each threshold at the largest calibration
    score; for equalized odds the label-0 ranks are then ``n`` as well.
    """
    notion = Notion.parse(notion)
    if notion is Notion.EA:
        raise UsageError("the equalized-accuracy boundary depends on positive rates")
    if n < 1:
        raise DomainError("n must be >= 1")
    total = 0.0
    for offset in ([0, 1] if notion is Notion.EO else [0]):
        params = BoundTermParams(n, n, n, n, shape_offset=offset, alpha=alpha)
        rng = np.random.default_rng(np.random.SeedSequence([seed % 2**64, offset, n]))
        total += 2.0 * g_term(params, mc_samples, rng, method=method)
    return total
