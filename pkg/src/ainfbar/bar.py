"""Reduced bar cochain complexes of augmented graded algebras.

Degree-n cochains are spanned by words [u_1|..|u_n] in the dual of the
reduced augmentation ideal; the ideal basis element at index (0, w) stands
for w - 1.  The differential expands one letter at a time into all products
hitting it,

    d [u_1|..|u_n] = sum_i (-1)^i sum_{a,b} c_ab^{u_i} [u_1|..|a|b|..|u_n],

where pi(a b) = sum_u c_ab^u u in the ideal basis; this is the graded dual
of the bar boundary, d^2 = 0 and the Leibniz rule hold on the nose, and the
word length is the cohomological degree.  Every letter is homogeneous for
the internal weight, so the complex splits into finite blocks indexed by
(length, internal degree); all linear algebra happens one block at a time
and cohomology is reported up to cap - 1.
"""

from __future__ import annotations

import itertools
from typing import Optional

from .grading import BigradedSpace, InternalDegree, internal_zero
from .linalg import Eliminator, FpMatrix, kernel_basis, rref, vec_add_scaled
from .groups import AlgebraMap, GradedGroupAlgebra

DEFAULT_WORD_BUDGET = 5_000_000


class BudgetExceededError(RuntimeError):
    """Word count would exceed the memory budget; names the offending degree."""

    def __init__(self, degree: int, needed: int, budget: int):
        self.degree = degree
        self.needed = needed
        self.budget = budget
        super().__init__(
            f"bar complex budget exceeded at degree {degree}: "
            f"{needed} words needed, budget {budget}")


class BarComplex:
    """Reduced bar cochains of a graded group algebra up to a degree cap."""

    def __init__(self, algebra: GradedGroupAlgebra, cap: int,
                 budget: int = DEFAULT_WORD_BUDGET):
        if cap < 1:
            raise ValueError("bar cap must be >= 1")
        self.algebra = algebra
        self.field = algebra.field
        self.cap = cap
        self.budget = budget
        self.letters = algebra.iota_letters()
        self.letter_deg = {u: algebra.degree(u) for u in self.letters}
        total = 0
        nletters = len(self.letters)
        for n in range(cap + 1):
            total += nletters ** n
            if total > budget:
                raise BudgetExceededError(n, total, budget)
        self._comult = self._build_comult()
        self._blocks: dict[int, dict[InternalDegree, list[tuple]]] = {}
        self._ranks: dict[tuple[int, InternalDegree], int] = {}
        self._structs: dict = {}
        self._cohomology: Optional[CohomologyData] = None

    def _build_comult(self) -> dict[int, list[tuple[int, int, int]]]:
        out: dict[int, list] = {u: [] for u in self.letters}
        for a in self.letters:
            for b in self.letters:
                for u, c in self.algebra.iota_product(a, b).items():
                    out[u].append((a, b, c))
        return out

    def blocks(self, n: int) -> dict[InternalDegree, list[tuple]]:
        """Words of length n grouped by internal degree, lex order inside."""
        cached = self._blocks.get(n)
        if cached is not None:
            return cached
        if n > self.cap:
            raise ValueError(f"degree {n} beyond cap {self.cap}")
        zero = internal_zero(self.field.p)
        blocks: dict[InternalDegree, list[tuple]] = {}
        if n == 0:
            blocks[zero] = [()]
        else:
            for word in itertools.product(self.letters, repeat=n):
                s = zero
                for u in word:
                    s = s + self.letter_deg[u]
                blocks.setdefault(s, []).append(word)
        self._blocks[n] = blocks
        return blocks

    def word_degree(self, word: tuple) -> InternalDegree:
        s = internal_zero(self.field.p)
        for u in word:
            s = s + self.letter_deg[u]
        return s

    def d_row(self, word: tuple) -> dict[tuple, int]:
        """Differential of a dual word, as a dict over target words."""
        p = self.field.p
        out: dict[tuple, int] = {}
        for i, u in enumerate(word):
            sign = p - 1 if (i + 1) % 2 else 1
            for a, b, c in self._comult[u]:
                target = word[:i] + (a, b) + word[i + 1:]
                val = (out.get(target, 0) + sign * c) % p
                if val:
                    out[target] = val
                else:
                    out.pop(target, None)
        return out

    def rank(self, n: int, s: InternalDegree) -> int:
        """Rank of the differential leaving block (n, s).

        Source words are fed in reverse lex order: the lead target of a
        split row then tends to be unoccupied on arrival, which keeps the
        elimination near-triangular.
        """
        if n >= self.cap:
            raise ValueError("rank needs the target degree within the cap")
        key = (n, s)
        cached = self._ranks.get(key)
        if cached is not None:
            return cached
        words = self.blocks(n).get(s, [])
        elim = Eliminator(self.field)
        for word in reversed(words):
            row = self.d_row(word)
            if row:
                elim.add_row(row)
        self._ranks[key] = elim.rank
        return elim.rank

    def _iter_words(self, n: int, s: InternalDegree):
        """Words of length n and internal degree s, in lex order, without
        materializing the whole degree.  Depth-first with degree-window
        pruning: a partial word survives only while the remaining degree
        stays between k * min and k * max over the k open positions."""
        cached = self._blocks.get(n)
        if cached is not None:
            yield from cached.get(s, [])
            return
        letters = self.letters
        degs = [self.letter_deg[u] for u in letters]
        lo, hi = min(degs), max(degs)

        def rec(prefix: tuple, rem: InternalDegree, k: int):
            if k == 0:
                if rem.is_zero():
                    yield prefix
                return
            for u, d in zip(letters, degs):
                rem2 = rem - d
                if lo.scaled(k - 1) <= rem2 <= hi.scaled(k - 1):
                    yield from rec(prefix + (u,), rem2, k - 1)

        yield from rec((), s, n)

    def internal_degrees(self, n: int) -> list[InternalDegree]:
        return sorted(self.blocks(n).keys())

    def dims(self, n: int) -> dict[InternalDegree, int]:
        """Cohomology dimensions in degree n < cap, per internal block."""
        if n >= self.cap:
            raise ValueError(f"cohomology is reported up to cap - 1 = {self.cap - 1}")
        out: dict[InternalDegree, int] = {}
        degrees = set(self.blocks(n).keys())
        if n > 0:
            degrees |= set(self.blocks(n - 1).keys())
        for s in sorted(degrees):
            size = len(self.blocks(n).get(s, []))
            cut = self.rank(n, s)
            prev = self.rank(n - 1, s) if n > 0 else 0
            dim = size - cut - prev
            if dim:
                out[s] = dim
        return out

    def struct(self, n: int, s: InternalDegree) -> "BlockStruct":
        """Full elimination data for block (n, s); small blocks only."""
        key = (n, s)
        cached = self._structs.get(key)
        if cached is not None:
            return cached
        source = self.blocks(n).get(s, [])
        target = list(self._iter_words(n + 1, s)) if n + 1 <= self.cap else []
        tindex = {w: i for i, w in enumerate(target)}
        entries: dict[tuple[int, int], int] = {}
        for j, word in enumerate(source):
            for tw, c in self.d_row(word).items():
                entries[(tindex[tw], j)] = c
        matrix = FpMatrix(self.field, len(target), len(source), entries)
        red, pivots = rref(matrix)
        kernels = kernel_basis(matrix)
        st = BlockStruct(self, n, s, source, target, tindex, matrix,
                         list(pivots), kernels)
        self._structs[key] = st
        return st

    def cohomology(self) -> "CohomologyData":
        if self._cohomology is None:
            self._cohomology = CohomologyData(self)
        return self._cohomology


class BlockStruct:
    """Elimination data of the differential leaving one (n, s) block.

    pivot_cols index the source words whose images greedily span the
    boundary space one degree up; kernels follow the standard free-variable
    rule, so everything downstream is deterministic.
    """

    def __init__(self, bar: BarComplex, n: int, s: InternalDegree,
                 source: list[tuple], target: list[tuple], tindex: dict,
                 matrix: FpMatrix, pivot_cols: list[int], kernels: list[dict]):
        self.bar = bar
        self.n = n
        self.s = s
        self.source = source
        self.target = target
        self.tindex = tindex
        self.matrix = matrix
        self.pivot_cols = pivot_cols
        self.kernels = kernels

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    def boundary_columns(self) -> list[dict]:
        """Unreduced boundary basis: d(e_j) for each pivot source position j."""
        return [ {i: c for (i, jj), c in self.matrix.entries.items() if jj == j}
                 for j in self.pivot_cols ]


class CohomologyData:
    """Bigraded cohomology of a bar complex, with lazy representatives.

    Labels look like "h2:1#0": degree, internal degree, then the index of
    the class inside its block.  Representatives are kernel vectors reduced
    against the boundary space in elimination order.
    """

    def __init__(self, bar: BarComplex):
        self.bar = bar
        p = bar.field.p
        basis = []
        self.block_of: dict[str, tuple[int, InternalDegree, int]] = {}
        self.block_labels: dict[tuple[int, InternalDegree], list[str]] = {}
        for n in range(bar.cap):
            for s, dim in bar.dims(n).items():
                labels = []
                for k in range(dim):
                    label = f"h{n}:{s}#{k}"
                    basis.append((label, n, s))
                    self.block_of[label] = (n, s, k)
                    labels.append(label)
                self.block_labels[(n, s)] = labels
        self.space = BigradedSpace(bar.field, basis)
        self._reps: dict[str, dict[tuple, int]] = {}
        self._coords_elims: dict = {}
        self._rep_vectors: dict = {}
        self._boundary_elims: dict = {}

    def dims_by_degree(self) -> dict[int, int]:
        out: dict[int, int] = {n: 0 for n in range(self.bar.cap)}
        for _, n, _ in self.space.basis:
            out[n] += 1
        return out

    # -- representatives -------------------------------------------------------

    def _block_reps(self, n: int, s: InternalDegree) -> list[dict]:
        """Representative vectors (position space) for one block."""
        key = (n, s)
        cached = self._rep_vectors.get(key)
        if cached is not None:
            return cached
        st = self.bar.struct(n, s)
        elim = Eliminator(self.bar.field)
        if n > 0:
            below = self.bar.struct(n - 1, s)
            for col in below.boundary_columns():
                elim.add_row(col)
        reps = []
        for kv in st.kernels:
            reduced = elim.reduce(kv)
            if reduced:
                elim.add_row(reduced)
                reps.append(reduced)
        self._rep_vectors[key] = reps
        return reps

    def representative(self, label: str) -> dict[tuple, int]:
        """Cocycle representative as {word: coeff}."""
        cached = self._reps.get(label)
        if cached is not None:
            return cached
        n, s, k = self.block_of[label]
        vec = self._block_reps(n, s)[k]
        words = self.bar.blocks(n)[s]
        rep = {words[i]: c for i, c in vec.items()}
        self._reps[label] = rep
        return rep

    # -- class coordinates -------------------------------------------------------

    def _coords_elim(self, n: int, s: InternalDegree):
        key = (n, s)
        cached = self._coords_elims.get(key)
        if cached is not None:
            return cached
        dim = len(self.bar.blocks(n).get(s, []))
        elim = Eliminator(self.bar.field)
        if n > 0:
            below = self.bar.struct(n - 1, s)
            for col in below.boundary_columns():
                elim.add_row(col)
        for k, rep in enumerate(self._block_reps(n, s)):
            row = dict(rep)
            row[dim + k] = 1
            elim.add_row(row)
        self._coords_elims[key] = (elim, dim)
        return elim, dim

    def class_coordinates(self, n: int, s: InternalDegree,
                          vec: dict[int, int]) -> dict[str, int]:
        """Coordinates of a cocycle (position vector) in the class basis.

        Raises if the vector is not a cocycle of the block modulo boundaries.
        """
        p = self.bar.field.p
        elim, dim = self._coords_elim(n, s)
        rem = elim.reduce(dict(vec))
        real = {i: c for i, c in rem.items() if i < dim}
        if real:
            raise ValueError("vector is not a cocycle modulo boundaries in this block")
        labels = self.block_labels.get((n, s), [])
        return {labels[i - dim]: (p - c) % p for i, c in rem.items() if i >= dim}

    @staticmethod
    def _word_length(cochain: dict[tuple, int]) -> int:
        lengths = {len(w) for w in cochain}
        if len(lengths) != 1:
            raise ValueError("cochain mixes word lengths")
        return lengths.pop()

    def reduce_cocycle(self, cochain: dict[tuple, int]) -> dict[str, int]:
        """Class of a homogeneous cocycle given as {word: coeff}."""
        if not cochain:
            return {}
        n = self._word_length(cochain)
        degs = {self.bar.word_degree(w) for w in cochain}
        if len(degs) != 1:
            raise ValueError("cochain mixes internal degrees")
        s = degs.pop()
        words = self.bar.blocks(n).get(s, [])
        index = {w: i for i, w in enumerate(words)}
        vec = {index[w]: c for w, c in cochain.items()}
        return self.class_coordinates(n, s, vec)

    def is_nonzero_class(self, cochain: dict[tuple, int]) -> bool:
        """Whether a homogeneous cocycle is not a coboundary.

        Cheaper than full class coordinates: only the boundary space of the
        block is eliminated, with words as column keys, so it stays usable
        on blocks too large for the representative machinery.
        """
        if not cochain:
            return False
        n = self._word_length(cochain)
        degs = {self.bar.word_degree(w) for w in cochain}
        if len(degs) != 1:
            raise ValueError("cochain mixes internal degrees")
        s = degs.pop()
        p = self.bar.field.p
        coboundary: dict[tuple, int] = {}
        for w, c in cochain.items():
            vec_add_scaled(coboundary, self.bar.d_row(w), c, p)
        if coboundary:
            raise ValueError("not a cocycle")
        key = (n, s)
        elim = self._boundary_elims.get(key)
        if elim is None:
            elim = Eliminator(self.bar.field)
            if n > 0:
                for word in reversed(self.bar.blocks(n - 1).get(s, [])):
                    row = self.bar.d_row(word)
                    if row:
                        elim.add_row(row)
            self._boundary_elims[key] = elim
        return bool(elim.reduce(dict(cochain)))

    def cup(self, label1: str, label2: str) -> dict[str, int]:
        """Cup product of two classes via concatenation of representatives."""
        p = self.bar.field.p
        r1 = self.representative(label1)
        r2 = self.representative(label2)
        n1, _, _ = self.block_of[label1]
        n2, _, _ = self.block_of[label2]
        if n1 + n2 > self.bar.cap - 1:
            raise ValueError("cup product lands beyond the reported range")
        prod: dict[tuple, int] = {}
        for w1, c1 in r1.items():
            for w2, c2 in r2.items():
                w = w1 + w2
                val = (prod.get(w, 0) + c1 * c2) % p
                if val:
                    prod[w] = val
                else:
                    prod.pop(w, None)
        if not prod:
            return {}
        return self.reduce_cocycle(prod)


def build_bar(algebra: GradedGroupAlgebra, cap: int,
              budget: int = DEFAULT_WORD_BUDGET) -> BarComplex:
    return BarComplex(algebra, cap, budget)


class Restriction:
    """Cochain-level restriction along an algebra inclusion, plus the map
    it induces on cohomology.

    For f: A -> B the dual map sends a word over B-letters to words over
    A-letters through the transpose of f on the reduced ideals; it commutes
    with both differentials, which is verified degree by degree at
    construction.
    """

    def __init__(self, high: BarComplex, low: BarComplex, fmap: AlgebraMap):
        if fmap.source is not low.algebra or fmap.target is not high.algebra:
            raise ValueError("restriction needs fmap: low.algebra -> high.algebra")
        if high.cap != low.cap:
            raise ValueError("bar caps must match")
        self.high = high
        self.low = low
        self.fmap = fmap
        p = high.field.p
        # transpose of f restricted to the reduced ideals
        self.tcol: dict[int, dict[int, int]] = {u: {} for u in high.letters}
        for low_letter in low.letters:
            for high_idx, c in fmap.columns[low_letter].items():
                if high_idx == high.algebra.unit_index:
                    raise ValueError("algebra map does not preserve the ideal")
                self.tcol[high_idx][low_letter] = c
        self._check_commutes()

    def cochain_image(self, word: tuple) -> dict[tuple, int]:
        p = self.low.field.p
        acc: dict[tuple, int] = {(): 1}
        for u in word:
            col = self.tcol[u]
            nxt: dict[tuple, int] = {}
            for prefix, c in acc.items():
                for lo, c2 in col.items():
                    val = (c * c2) % p
                    if val:
                        w = prefix + (lo,)
                        nxt[w] = (nxt.get(w, 0) + val) % p
            acc = {w: c for w, c in nxt.items() if c}
            if not acc:
                return {}
        return acc

    def _apply_to_cochain(self, cochain: dict[tuple, int]) -> dict[tuple, int]:
        p = self.low.field.p
        out: dict[tuple, int] = {}
        for w, c in cochain.items():
            vec_add_scaled(out, self.cochain_image(w), c, p)
        return out

    def _check_commutes(self) -> None:
        for n in range(self.high.cap):
            for s, words in self.high.blocks(n).items():
                for w in words:
                    lhs = self._apply_to_cochain(self.high.d_row(w))
                    rhs: dict[tuple, int] = {}
                    for lw, c in self.cochain_image(w).items():
                        vec_add_scaled(rhs, self.low.d_row(lw), c, self.low.field.p)
                    if lhs != rhs:
                        raise AssertionError(
                            f"restriction does not commute with d on {w}")

    def on_cohomology(self):
        """BigradedMap from the source cohomology to the target cohomology."""
        from .grading import BigradedMap
        hc = self.high.cohomology()
        lc = self.low.cohomology()
        entries: dict[tuple[str, str], int] = {}
        for label in hc.space.labels():
            rep = hc.representative(label)
            image = self._apply_to_cochain(rep)
            if not image:
                continue
            for lo_label, c in lc.reduce_cocycle(image).items():
                entries[(lo_label, label)] = c
        return BigradedMap(hc.space, lc.space, 0,
                           internal_zero(self.high.field.p), entries)


def restriction(high: BarComplex, low: BarComplex, fmap: AlgebraMap) -> Restriction:
    return Restriction(high, low, fmap)
