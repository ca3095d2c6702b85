"""Homotopy transfer from bar cochains to minimal higher operations.

Every internal block C^{n,s} splits as B + R + U: B is spanned by the
images d(e_j) of the pivot source words one degree down, R by the chosen
class representatives, U by the pivot coordinate words of the block's own
differential.  Inverting the column matrix [B | R | U] once per block
yields the inclusion, projection and contracting homotopy of a strong
deformation retraction, with all five side identities holding exactly.

The higher operations follow the split recursion

    lam_n = sum over s + t = n of
            (-1)^(sigma(s, t) + (t + 1) * D_L) mu(h lam_s (x) h lam_t),

with h lam_1 = -incl and D_L the total cohomological degree of the left
inputs; m_n = proj . lam_n.  The split exponent sigma(s, t) = 1 + s is
pinned by the exact associativity ladder tests in the suite; the Koszul
factor comes from moving the degree 1 - t operator h lam_t past the left
inputs.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

from .bar import BarComplex, CohomologyData, build_bar
from .grading import BigradedMap, BigradedSpace, InternalDegree, internal_zero
from .groups import GradedGroupAlgebra
from .linalg import FpMatrix, rref, vec_add_scaled

DEFAULT_ARITY_CAP = 4
DEFAULT_DEGREE_CAP = 8


def sigma(s: int, t: int) -> int:
    """Pinned split-sign exponent of the transfer recursion."""
    return 1 + s


class CapOverflowError(ValueError):
    """The degree cap cannot be served by the bar complex at hand."""


class _BlockSolver:
    """Coordinates in the B + R + U basis of one (n, s) block."""

    def __init__(self, bar: BarComplex, coh: CohomologyData,
                 n: int, s: InternalDegree):
        self.bar = bar
        self.n = n
        self.s = s
        words = bar.blocks(n).get(s, [])
        self.words = words
        dim = len(words)
        self.dim = dim
        field = bar.field

        b_cols: list[dict] = []
        self.htp_words: list[tuple] = []
        if n > 0:
            below = bar.struct(n - 1, s)
            b_cols = below.boundary_columns()
            src_words = bar.blocks(n - 1).get(s, [])
            self.htp_words = [src_words[j] for j in below.pivot_cols]
        self.labels = coh.block_labels.get((n, s), [])
        r_cols = []
        for label in self.labels:
            rep = coh.representative(label)
            index = {w: i for i, w in enumerate(words)}
            r_cols.append({index[w]: c for w, c in rep.items()})
        here = bar.struct(n, s)
        u_cols = [{j: 1} for j in here.pivot_cols]

        self.nb = len(b_cols)
        self.nr = len(r_cols)
        self.nu = len(u_cols)
        if self.nb + self.nr + self.nu != dim:
            raise AssertionError(
                f"block ({n}, {s}): {self.nb}+{self.nr}+{self.nu} != {dim}")
        cols = b_cols + r_cols + u_cols
        # reduce [M | I]; M invertible, so the right block of the reduced
        # rows reads off M^{-1}
        aug = {}
        for j, col in enumerate(cols):
            for i, c in col.items():
                aug[(i, j)] = c
        for i in range(dim):
            aug[(i, dim + i)] = 1
        red, pivots = rref(FpMatrix(field, dim, 2 * dim, aug))
        if list(pivots) != list(range(dim)):
            raise AssertionError(f"block ({n}, {s}): basis matrix is singular")
        self.inv_rows: list[dict] = [dict() for _ in range(dim)]
        for (r, c), val in red.entries.items():
            if c >= dim:
                self.inv_rows[r][c - dim] = val

    def coords(self, vec: dict[int, int]) -> dict[int, int]:
        p = self.bar.field.p
        out: dict[int, int] = {}
        for i, row in enumerate(self.inv_rows):
            acc = 0
            for j, c in vec.items():
                r = row.get(j)
                if r:
                    acc += r * c
            acc %= p
            if acc:
                out[i] = acc
        return out

    def to_vec(self, cochain: dict[tuple, int]) -> dict[int, int]:
        index = {w: i for i, w in enumerate(self.words)}
        return {index[w]: c for w, c in cochain.items()}


class SDR:
    """Strong deformation retraction of bar cochains onto their cohomology."""

    def __init__(self, bar: BarComplex):
        self.bar = bar
        self.coh = bar.cohomology()
        self._solvers: dict = {}

    def solver(self, n: int, s: InternalDegree) -> _BlockSolver:
        key = (n, s)
        got = self._solvers.get(key)
        if got is None:
            got = _BlockSolver(self.bar, self.coh, n, s)
            self._solvers[key] = got
        return got

    def incl(self, label: str) -> dict[tuple, int]:
        return dict(self.coh.representative(label))

    def proj(self, cochain: dict[tuple, int]) -> dict[str, int]:
        if not cochain:
            return {}
        n, s = _cochain_block(self.bar, cochain)
        sol = self.solver(n, s)
        y = sol.coords(sol.to_vec(cochain))
        lo = sol.nb
        return {sol.labels[i - lo]: c for i, c in y.items()
                if lo <= i < lo + sol.nr}

    def htp(self, cochain: dict[tuple, int]) -> dict[tuple, int]:
        if not cochain:
            return {}
        n, s = _cochain_block(self.bar, cochain)
        sol = self.solver(n, s)
        y = sol.coords(sol.to_vec(cochain))
        return {sol.htp_words[i]: c for i, c in y.items() if i < sol.nb}

    # -- whole-complex views, for the identity checks -------------------------

    def verify_identities(self, up_to: Optional[int] = None) -> int:
        """Exact SDR checks on every block basis vector; returns the number
        of vectors checked.  Covers degrees up to cap - 2 so that the
        homotopy one degree up is always available."""
        bar = self.bar
        p = bar.field.p
        top = bar.cap - 2 if up_to is None else min(up_to, bar.cap - 2)
        checked = 0
        for n in range(top + 1):
            for s, words in bar.blocks(n).items():
                for w in words:
                    e = {w: 1}
                    he = self.htp(e)
                    dhe = _d_cochain(bar, he)
                    hde = self.htp(_d_cochain(bar, e))
                    lhs = dict(dhe)
                    vec_add_scaled(lhs, hde, 1, p)
                    rhs = {w: 1}
                    back = {}
                    for label, c in self.proj(e).items():
                        vec_add_scaled(back, self.incl(label), c, p)
                    vec_add_scaled(rhs, back, p - 1, p)
                    if lhs != rhs:
                        raise AssertionError(f"homotopy identity fails on {w}")
                    if self.htp(he):
                        raise AssertionError(f"h h != 0 on {w}")
                    if self.proj(he):
                        raise AssertionError(f"proj h != 0 on {w}")
                    checked += 1
        for label in self.coh.space.labels():
            rep = self.incl(label)
            if _d_cochain(bar, rep):
                raise AssertionError(f"d incl != 0 on {label}")
            if self.htp(rep):
                raise AssertionError(f"h incl != 0 on {label}")
            if self.proj(rep) != {label: 1}:
                raise AssertionError(f"proj incl != id on {label}")
        return checked

    def bigraded_views(self, up_to: int):
        """(incl, proj, htp, d) as BigradedMaps over the truncated complex."""
        bar = self.bar
        basis = []
        for n in range(up_to + 1):
            for s, words in sorted(bar.blocks(n).items()):
                basis.extend((w, n, s) for w in words)
        total = BigradedSpace(bar.field, basis)
        zero = internal_zero(bar.field.p)
        inc_entries = {}
        for label in self.coh.space.labels():
            if self.coh.space.degrees(label)[0] > up_to:
                continue
            for w, c in self.incl(label).items():
                inc_entries[(w, label)] = c
        proj_entries = {}
        htp_entries = {}
        d_entries = {}
        for n in range(up_to + 1):
            for s, words in bar.blocks(n).items():
                for w in words:
                    for label, c in self.proj({w: 1}).items():
                        proj_entries[(label, w)] = c
                    for w2, c in self.htp({w: 1}).items():
                        htp_entries[(w2, w)] = c
                    if n < up_to:
                        for w2, c in bar.d_row(w).items():
                            d_entries[(w2, w)] = c
        incl = BigradedMap(self.coh.space, total, 0, zero, inc_entries)
        proj = BigradedMap(total, self.coh.space, 0, zero, proj_entries)
        htp = BigradedMap(total, total, -1, zero, htp_entries)
        d = BigradedMap(total, total, 1, zero, d_entries)
        return incl, proj, htp, d


def _cochain_block(bar: BarComplex, cochain: dict) -> tuple[int, InternalDegree]:
    lengths = {len(w) for w in cochain}
    if len(lengths) != 1:
        raise ValueError("cochain mixes word lengths")
    degs = {bar.word_degree(w) for w in cochain}
    if len(degs) != 1:
        raise ValueError("cochain mixes internal degrees")
    return lengths.pop(), degs.pop()


def _d_cochain(bar: BarComplex, cochain: dict) -> dict:
    out: dict = {}
    for w, c in cochain.items():
        vec_add_scaled(out, bar.d_row(w), c, bar.field.p)
    return out


class AInfinityStructure:
    """Minimal higher operations on the cohomology of a bar complex.

    ops[k][labels] is the output of the arity k operation on a tuple of
    class labels, as {label: coeff}; tuples are present exactly when the
    whole computation stays inside the degree cap, so a missing tuple means
    "not computed", not zero.
    """

    def __init__(self, space: BigradedSpace, arity_cap: int, degree_cap: int):
        self.space = space
        self.field = space.field
        self.arity_cap = arity_cap
        self.degree_cap = degree_cap
        self.ops: dict[int, dict[tuple, dict[str, int]]] = {
            k: {} for k in range(2, arity_cap + 1)}

    def op(self, labels: tuple) -> Optional[dict[str, int]]:
        k = len(labels)
        if k not in self.ops:
            return None
        return self.ops[k].get(labels)

    def nonzero(self):
        for k in sorted(self.ops):
            for labels, out in self.ops[k].items():
                if out:
                    yield k, labels, out


def _max_intermediate(degs: list[int]) -> int:
    """Largest cohomological degree of any transfer intermediate: the best
    contiguous run of (deg - 1) plus 2, over runs of length >= 2."""
    best = None
    n = len(degs)
    for i in range(n - 1):
        run = degs[i] - 1
        for j in range(i + 1, n):
            run += degs[j] - 1
            if best is None or run > best:
                best = run
    return (best if best is not None else 0) + 2


class TransferEngine:
    """Split recursion over an SDR, memoized on label tuples."""

    def __init__(self, sdr: SDR, degree_cap: int,
                 sign_rule: Callable[[int, int], int] = sigma):
        self.sdr = sdr
        self.bar = sdr.bar
        self.p = sdr.bar.field.p
        self.degree_cap = degree_cap
        self.sign_rule = sign_rule
        self.coh = sdr.coh
        self._hl: dict[tuple, dict] = {}

    def _cohdeg(self, label: str) -> int:
        return self.coh.space.degrees(label)[0]

    def _mu(self, a: dict, b: dict) -> dict:
        p = self.p
        out: dict = {}
        for w1, c1 in a.items():
            for w2, c2 in b.items():
                w = w1 + w2
                val = (out.get(w, 0) + c1 * c2) % p
                if val:
                    out[w] = val
                else:
                    out.pop(w, None)
        return out

    def hlam(self, labels: tuple) -> dict:
        got = self._hl.get(labels)
        if got is not None:
            return got
        if len(labels) == 1:
            out = {w: (self.p - c) % self.p
                   for w, c in self.sdr.incl(labels[0]).items()}
        else:
            out = self.sdr.htp(self.lam(labels))
        self._hl[labels] = out
        return out

    def lam(self, labels: tuple) -> dict:
        n = len(labels)
        p = self.p
        acc: dict = {}
        for cut in range(1, n):
            left, right = labels[:cut], labels[cut:]
            hl = self.hlam(left)
            if not hl:
                continue
            hr = self.hlam(right)
            if not hr:
                continue
            t = n - cut
            d_left = sum(self._cohdeg(l) for l in left)
            exp = self.sign_rule(cut, t) + (t + 1) * d_left
            coeff = 1 if exp % 2 == 0 else p - 1
            prod = self._mu(hl, hr)
            vec_add_scaled(acc, prod, coeff, p)
        return acc

    def m(self, labels: tuple) -> dict[str, int]:
        return self.sdr.proj(self.lam(labels))


def transfer(source: GradedGroupAlgebra | BarComplex,
             arity_cap: int = DEFAULT_ARITY_CAP,
             degree_cap: int = DEFAULT_DEGREE_CAP,
             sign_rule: Callable[[int, int], int] = sigma) -> AInfinityStructure:
    """Transfer the bar product to minimal operations m_2 .. m_arity_cap.

    Operations are tabulated on every tuple of class labels whose transfer
    intermediates all stay within degree_cap.  The bar complex must reach
    one degree past the cap, otherwise CapOverflowError.
    """
    if isinstance(source, BarComplex):
        bar = source
    else:
        bar = build_bar(source, degree_cap + 1)
    if degree_cap > bar.cap - 1:
        raise CapOverflowError(
            f"degree cap {degree_cap} needs bar words up to length "
            f"{degree_cap + 1}, but the bar complex stops at {bar.cap}")
    if arity_cap < 2:
        raise ValueError("arity cap must be at least 2")
    sdr = SDR(bar)
    engine = TransferEngine(sdr, degree_cap, sign_rule)
    coh = bar.cohomology()
    labels = [l for l in coh.space.labels()
              if coh.space.degrees(l)[0] <= degree_cap]
    struct = AInfinityStructure(coh.space, arity_cap, degree_cap)
    p = bar.field.p
    for k in range(2, arity_cap + 1):
        table = struct.ops[k]
        for tup in itertools.product(labels, repeat=k):
            degs = [engine._cohdeg(l) for l in tup]
            if _max_intermediate(degs) > degree_cap:
                continue
            out = engine.m(tup)
            want_coh = sum(degs) + 2 - k
            want_int = internal_zero(p)
            for l in tup:
                want_int = want_int + coh.space.degrees(l)[1]
            for label, c in out.items():
                got = coh.space.degrees(label)
                if got != (want_coh, want_int):
                    raise AssertionError(
                        f"m_{k}{tup} output {label} violates the bidegree")
            table[tup] = out
    return struct


def stasheff_residuals(struct: AInfinityStructure, n: int):
    """Residuals of the arity n associativity relation on all label tuples
    where every needed operation was tabulated.

    Yields (labels, residual) pairs; a correct transfer yields residual {}
    everywhere.  Tuples with any untabulated term are skipped.
    """
    p = struct.field.p
    labels = struct.space.labels()
    for tup in itertools.product(labels, repeat=n):
        residual: dict[str, int] = {}
        usable = True
        for r in range(n - 1):
            for s_len in range(2, n - r + 1):
                t = n - r - s_len
                if r + 1 + t < 2:
                    continue
                inner = struct.op(tup[r:r + s_len])
                if inner is None:
                    usable = False
                    break
                sign_exp = r + s_len * t
                sign_exp += s_len * sum(struct.space.degrees(l)[0]
                                        for l in tup[:r])
                coeff = 1 if sign_exp % 2 == 0 else p - 1
                for mid, c in inner.items():
                    outer_tup = tup[:r] + (mid,) + tup[r + s_len:]
                    outer = struct.op(outer_tup)
                    if outer is None:
                        usable = False
                        break
                    vec_add_scaled(residual, outer, coeff * c, p)
                if not usable:
                    break
            if not usable:
                break
        if usable:
            yield tup, residual


def check_stasheff(struct: AInfinityStructure,
                   max_n: Optional[int] = None) -> tuple[int, list]:
    """Check all associativity relations up to arity cap + 1.

    Returns (number of tuples checked, list of failing tuples).
    """
    top = struct.arity_cap + 1 if max_n is None else max_n
    checked = 0
    failures = []
    for n in range(3, top + 1):
        for tup, residual in stasheff_residuals(struct, n):
            checked += 1
            if residual:
                failures.append((tup, residual))
    return checked, failures
