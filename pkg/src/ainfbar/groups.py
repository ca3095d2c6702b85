"""Graded group algebras of finite p-torus approximations with coprime twists.

A depth-n approximation of a rank-r p-torus is mu_{p^{n_1}} x .. x mu_{p^{n_r}};
its mod-p group algebra is the truncated polynomial ring
F_p[X_1..X_r]/(X_i^{p^{n_i}}) on X_i = g_i - 1, graded by the internal weight
|X_i| = 1/p^{n_i}.  An integer matrix group W of order coprime to p may act on
the torus; conjugation then mixes the naive weights, so the algebra is built
on the canonical W-stable generator lifts obtained by Reynolds-averaging the
naive degree-one projection.  In the lifted monomial basis the multiplication
is genuinely graded again, which is what the bar complex downstream needs.

Group descriptions are parsed from a small grammar:

    spec  := atom | atom "x" spec
    atom  := "cyclic(" p "^" n ")" | "torus(" p "," n "," r ")"
           | "semidirect(" spec "," weyl ")"
    weyl  := "Z" k ":" [[..],..] | "inversion"

with "colimit( ... )" around a spec whose depths are "inf" for the union over
all depths.  "Z k : M" is the cyclic group of order k acting through the
single generator matrix M; "inversion" is Z/2 acting by -identity.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Optional

from .linalg import PrimeField, vec_add_scaled
from .grading import InternalDegree, internal_zero


class SpecError(ValueError):
    """Malformed or semantically invalid group description."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


# -- spec data model ----------------------------------------------------------

@dataclass(frozen=True)
class WeylSpec:
    """Description of the acting group before realization.

    kind "inversion": Z/2 through -I.  kind "cyclic": Z/k through one
    generator matrix.  kind "matrix": closure of explicit generators
    (API only, not reachable from the grammar).
    """
    kind: str
    k: int = 0
    matrix: Optional[tuple[tuple[int, ...], ...]] = None
    gens: Optional[tuple[tuple[tuple[int, ...], ...], ...]] = None


@dataclass(frozen=True)
class GroupSpec:
    p: int
    depths: tuple[Optional[int], ...]  # one per torus factor; None = colimit
    weyl: Optional[WeylSpec] = None
    colimit: bool = False

    @property
    def rank(self) -> int:
        return len(self.depths)

    @property
    def uniform_depth(self) -> Optional[int]:
        ds = set(self.depths)
        return self.depths[0] if len(ds) == 1 else None


# -- tokenizer / parser -------------------------------------------------------

_TOKEN_RE = re.compile(r"(?P<ws>\s+)|(?P<name>[A-Za-z]+|∞)|(?P<int>\d+)"
                       r"|(?P<sym>[()^,:\[\]\-])")

_INF_NAMES = {"inf", "infinity", "∞"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SpecError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None):
        k, v, pos = self.next()
        if k != kind or (value is not None and v != value):
            want = value if value is not None else kind
            raise SpecError(f"expected {want!r}, found {v!r}", pos)
        return v, pos

    def expect_int(self) -> tuple[int, int]:
        k, v, pos = self.next()
        if k != "int":
            raise SpecError(f"expected integer, found {v!r}", pos)
        return int(v), pos

    def depth_token(self) -> tuple[Optional[int], int]:
        k, v, pos = self.next()
        if k == "int":
            return int(v), pos
        if k == "name" and v.lower() in _INF_NAMES:
            return None, pos
        raise SpecError(f"expected depth integer or 'inf', found {v!r}", pos)

    def signed_int(self) -> int:
        k, v, pos = self.peek()
        if k == "sym" and v == "-":
            self.next()
            n, _ = self.expect_int()
            return -n
        n, _ = self.expect_int()
        return n


def _parse_matrix(ps: _Parser) -> tuple[tuple[int, ...], ...]:
    ps.expect("sym", "[")
    rows = []
    while True:
        ps.expect("sym", "[")
        row = [ps.signed_int()]
        while ps.peek()[:2] == ("sym", ","):
            ps.next()
            row.append(ps.signed_int())
        ps.expect("sym", "]")
        rows.append(tuple(row))
        k, v, _ = ps.peek()
        if (k, v) == ("sym", ","):
            ps.next()
            continue
        break
    ps.expect("sym", "]")
    return tuple(rows)


def _parse_weyl(ps: _Parser) -> WeylSpec:
    k, v, pos = ps.next()
    if k == "name" and v == "inversion":
        return WeylSpec("inversion", 2)
    if k == "name" and v == "Z":
        order, _ = ps.expect_int()
        ps.expect("sym", ":")
        matrix = _parse_matrix(ps)
        return WeylSpec("cyclic", order, matrix)
    raise SpecError(f"expected weyl action ('inversion' or 'Z k : matrix'), found {v!r}", pos)


def _parse_atom(ps: _Parser):
    """Returns (p or None, [depths], weyl or None, pos)."""
    k, v, pos = ps.next()
    if k != "name":
        raise SpecError(f"expected group atom, found {v!r}", pos)
    if v == "cyclic":
        ps.expect("sym", "(")
        p, _ = ps.expect_int()
        ps.expect("sym", "^")
        n, _ = ps.depth_token()
        ps.expect("sym", ")")
        return p, [n], None, pos
    if v == "torus":
        ps.expect("sym", "(")
        p, _ = ps.expect_int()
        ps.expect("sym", ",")
        n, _ = ps.depth_token()
        ps.expect("sym", ",")
        r, rpos = ps.expect_int()
        ps.expect("sym", ")")
        if r < 1:
            raise SpecError("torus rank must be >= 1", rpos)
        return p, [n] * r, None, pos
    if v == "semidirect":
        ps.expect("sym", "(")
        p, depths, weyl, _ = _parse_spec_body(ps)
        if weyl is not None:
            raise SpecError("nested semidirect is not supported", pos)
        ps.expect("sym", ",")
        w = _parse_weyl(ps)
        ps.expect("sym", ")")
        return p, depths, w, pos
    raise SpecError(f"unknown group atom {v!r}", pos)


def _parse_spec_body(ps: _Parser):
    p, depths, weyl, pos = _parse_atom(ps)
    while ps.peek()[:2] == ("name", "x"):
        ps.next()
        p2, d2, w2, pos2 = _parse_atom(ps)
        if weyl is not None or w2 is not None:
            raise SpecError("semidirect must be the outermost construction", pos2)
        if p2 != p:
            raise SpecError(f"mixed primes {p} and {p2} in one product", pos2)
        depths.extend(d2)
    return p, depths, weyl, pos


def parse_group_spec(text: str) -> GroupSpec:
    """Parse a group description; raises SpecError with a position on bad input."""
    ps = _Parser(text)
    k, v, pos = ps.peek()
    colimit = False
    if (k, v) == ("name", "colimit"):
        ps.next()
        ps.expect("sym", "(")
        p, depths, weyl, _ = _parse_spec_body(ps)
        ps.expect("sym", ")")
        colimit = True
    else:
        p, depths, weyl, _ = _parse_spec_body(ps)
    k, v, pos = ps.peek()
    if k is not None:
        raise SpecError(f"trailing input {v!r}", pos)
    spec = _normalize_spec(GroupSpec(p, tuple(depths), weyl, colimit))
    validate_spec(spec)
    return spec


def _normalize_spec(spec: GroupSpec) -> GroupSpec:
    """Reduce action matrix entries rowwise; fold Z2 by -identity into inversion."""
    w = spec.weyl
    if w is None or w.kind != "cyclic" or w.matrix is None:
        return spec
    if len(w.matrix) != spec.rank or any(len(row) != spec.rank for row in w.matrix):
        return spec  # shape errors reported by validate_spec
    reduced = _reduce_matrix(w.matrix, _row_mods(spec))
    if w.k == 2 and _is_minus_identity(reduced, spec):
        return GroupSpec(spec.p, spec.depths, WeylSpec("inversion", 2), spec.colimit)
    return GroupSpec(spec.p, spec.depths, WeylSpec("cyclic", w.k, reduced), spec.colimit)


def validate_spec(spec: GroupSpec) -> None:
    try:
        PrimeField(spec.p)
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    has_inf = any(d is None for d in spec.depths)
    if spec.colimit:
        if not all(d is None for d in spec.depths):
            raise SpecError("colimit requires every depth to be 'inf'")
    elif has_inf:
        raise SpecError("infinite depth is only allowed inside colimit(...)")
    for d in spec.depths:
        if d is not None and d < 1:
            raise SpecError("depth must be >= 1")
    w = spec.weyl
    if w is None:
        return
    r = spec.rank
    if w.kind == "inversion":
        if spec.p == 2:
            raise SpecError("inversion needs odd p: |W| = 2 must be coprime to p")
    elif w.kind == "cyclic":
        if w.k < 1:
            raise SpecError("cyclic action order must be >= 1")
        if math.gcd(w.k, spec.p) != 1:
            raise SpecError(f"|W| = {w.k} must be coprime to p = {spec.p}")
        if w.matrix is None or len(w.matrix) != r or any(len(row) != r for row in w.matrix):
            raise SpecError(f"action matrix must be {r}x{r}")
        mods = _row_mods(spec)
        acc = _reduce_matrix(_identity_matrix(r), mods)
        gen = _reduce_matrix(w.matrix, mods)
        for _ in range(w.k):
            acc = _mat_mul(acc, gen, mods)
        if acc != _reduce_matrix(_identity_matrix(r), mods):
            raise SpecError(f"action matrix must have order dividing {w.k} at these depths")
    elif w.kind == "matrix":
        if not w.gens:
            raise SpecError("matrix action needs at least one generator")
        for g in w.gens:
            if len(g) != r or any(len(row) != r for row in g):
                raise SpecError(f"action matrices must be {r}x{r}")
    else:
        raise SpecError(f"unknown weyl kind {w.kind!r}")
    if not spec.colimit and spec.weyl is not None and spec.uniform_depth is None:
        raise SpecError("a weyl action requires all torus depths to be equal")


def canonical_spec(spec: GroupSpec) -> str:
    """Deterministic printer; parse(canonical_spec(s)) describes the same group."""
    def depth_str(d):
        return "inf" if d is None else str(d)
    ds = spec.depths
    if len(set(ds)) == 1:
        if len(ds) == 1:
            inner = f"cyclic({spec.p}^{depth_str(ds[0])})"
        else:
            inner = f"torus({spec.p},{depth_str(ds[0])},{len(ds)})"
    else:
        inner = " x ".join(f"cyclic({spec.p}^{depth_str(d)})" for d in ds)
    if spec.weyl is not None:
        w = spec.weyl
        if w.kind == "inversion" or (w.kind == "cyclic" and w.k == 2 and w.matrix is not None
                                     and _is_minus_identity(w.matrix, spec)):
            wtxt = "inversion"
        elif w.kind == "cyclic":
            reduced = _reduce_matrix(w.matrix, _row_mods(spec))
            rows = ",".join("[" + ",".join(str(e) for e in row) + "]" for row in reduced)
            wtxt = f"Z{w.k}:[{rows}]"
        else:
            raise SpecError("matrix actions have no grammar form; use the API spec object")
        inner = f"semidirect({inner}, {wtxt})"
    return f"colimit({inner})" if spec.colimit else inner


def _is_minus_identity(matrix, spec: GroupSpec) -> bool:
    r = spec.rank
    mods = [spec.p if d is None else spec.p ** d for d in spec.depths]
    for i in range(r):
        for j in range(r):
            want = -1 if i == j else 0
            if (matrix[i][j] - want) % mods[i]:
                return False
    return True


# -- Weyl group realization ---------------------------------------------------

class WeylGroup:
    """A finite group acting on the torus by integer matrices.

    Matrices are stored rowwise-reduced: entry (i, j) lives mod the order
    p^{n_i} of the i-th coordinate (mod p at infinite depth).  Element 0 is
    always the identity.
    """

    def __init__(self, matrices: list[tuple[tuple[int, ...], ...]],
                 table: list[list[int]], labels: list[str]):
        self.matrices = matrices
        self.table = table
        self.labels = labels
        inv = [None] * len(matrices)
        for i in range(len(matrices)):
            for j in range(len(matrices)):
                if table[i][j] == 0:
                    inv[i] = j
        if any(v is None for v in inv):
            raise SpecError("action matrices do not form a group (missing inverses)")
        self.inverse = inv

    @property
    def size(self) -> int:
        return len(self.matrices)

    def mult(self, i: int, j: int) -> int:
        return self.table[i][j]

    def matrix(self, i: int):
        return self.matrices[i]


def _row_mods(spec: GroupSpec) -> list[int]:
    return [spec.p if d is None else spec.p ** d for d in spec.depths]


def _reduce_matrix(m, mods) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(e % mods[i] for e in row) for i, row in enumerate(m))


def _mat_mul(a, b, mods):
    r = len(a)
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            row.append(sum(a[i][k] * b[k][j] for k in range(r)) % mods[i])
        out.append(tuple(row))
    return tuple(out)


def _identity_matrix(r) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(1 if i == j else 0 for j in range(r)) for i in range(r))


_CLOSURE_CAP = 64


def realize_weyl(spec: GroupSpec) -> WeylGroup:
    """Build the acting group at this spec's depths (trivial group if none)."""
    r = spec.rank
    mods = _row_mods(spec)
    ident = _reduce_matrix(_identity_matrix(r), mods)
    w = spec.weyl
    if w is None:
        return WeylGroup([ident], [[0]], ["w0"])
    if w.kind in ("inversion", "cyclic"):
        if w.kind == "inversion":
            gen = _reduce_matrix(tuple(tuple(-1 if i == j else 0 for j in range(r))
                                       for i in range(r)), mods)
            k = 2
        else:
            gen = _reduce_matrix(w.matrix, mods)
            k = w.k
        powers = [ident]
        for _ in range(k - 1):
            powers.append(_mat_mul(powers[-1], gen, mods))
        if _mat_mul(powers[-1], gen, mods) != ident:
            raise SpecError(f"action matrix does not have order dividing {k} at these depths")
        table = [[(i + j) % k for j in range(k)] for i in range(k)]
        return WeylGroup(powers, table, [f"w{i}" for i in range(k)])
    # explicit generators: breadth-first closure, discovery order, capped
    gens = [_reduce_matrix(g, mods) for g in w.gens]
    elements = [ident]
    seen = {ident: 0}
    queue = [ident]
    while queue:
        cur = queue.pop(0)
        for g in gens:
            nxt = _mat_mul(cur, g, mods)
            if nxt not in seen:
                if len(elements) >= _CLOSURE_CAP:
                    raise SpecError(f"weyl closure exceeds cap {_CLOSURE_CAP}")
                seen[nxt] = len(elements)
                elements.append(nxt)
                queue.append(nxt)
    if len(elements) % spec.p == 0:
        raise SpecError(f"|W| = {len(elements)} is not coprime to p = {spec.p}")
    table = [[seen[_mat_mul(a, b, mods)] for b in elements] for a in elements]
    return WeylGroup(elements, table, [f"w{i}" for i in range(len(elements))])


# -- truncated polynomial helpers ----------------------------------------------

def poly_mul(u: dict, v: dict, caps: tuple[int, ...], p: int) -> dict:
    out: dict = {}
    for a, ca in u.items():
        for b, cb in v.items():
            e = tuple(x + y for x, y in zip(a, b))
            if any(x >= c for x, c in zip(e, caps)):
                continue
            val = (out.get(e, 0) + ca * cb) % p
            if val:
                out[e] = val
            else:
                out.pop(e, None)
    return out


def poly_pow(u: dict, k: int, caps: tuple[int, ...], p: int) -> dict:
    r = len(caps)
    out = {tuple([0] * r): 1}
    for _ in range(k):
        out = poly_mul(out, u, caps, p)
    return out


def _one_plus_gen_pow(i: int, c: int, caps: tuple[int, ...], p: int) -> dict:
    """(1 + Y_i)^c truncated, for c >= 0, by binomial coefficients mod p."""
    r = len(caps)
    out = {}
    for j in range(caps[i]):
        coeff = math.comb(c, j) % p if c >= j else 0
        if c >= j and coeff:
            e = tuple(j if t == i else 0 for t in range(r))
            out[e] = coeff
    return out


def conj_generator_images(weyl: WeylGroup, spec: GroupSpec) -> list[list[dict]]:
    """images[w][j] = expansion of w X_j w^{-1} = prod_i (1+Y_i)^{A_w[i][j]} - 1."""
    caps = tuple(spec.p ** d for d in spec.depths)
    p = spec.p
    r = spec.rank
    zero = tuple([0] * r)
    images = []
    for w in range(weyl.size):
        a = weyl.matrix(w)
        per_gen = []
        for j in range(r):
            acc = {zero: 1}
            for i in range(r):
                acc = poly_mul(acc, _one_plus_gen_pow(i, a[i][j], caps, p), caps, p)
            acc.pop(zero, None)  # subtract 1; group-like, so constant term was 1
            per_gen.append(acc)
        images.append(per_gen)
    return images


def _apply_conj_linear(images_w: list[dict], linear: dict, p: int) -> dict:
    """Conjugation applied to a linear combination of the generators Y_j."""
    out: dict = {}
    for e, c in linear.items():
        j = next(i for i, x in enumerate(e) if x)
        vec_add_scaled(out, images_w[j], c, p)
    return out


def _conj_monomial(images_w: list[dict], exp: tuple[int, ...],
                   caps: tuple[int, ...], p: int) -> dict:
    r = len(caps)
    acc = {tuple([0] * r): 1}
    for j, e in enumerate(exp):
        for _ in range(e):
            acc = poly_mul(acc, images_w[j], caps, p)
    return acc


# -- equivariant splitting ------------------------------------------------------

class SplittingChoice:
    """Consistent W-stable generator lifts, one list per level 1..depth.

    lifts[n][i] is a dict {exponent tuple: coeff} over the level-n monomial
    basis, congruent to Y_i modulo the square of the augmentation ideal.
    Level n lifts are the image of level n+1 under the exponent truncation
    induced by x -> x^p consistency.
    """

    def __init__(self, p: int, rank: int, depth: int,
                 lifts: dict[int, list[dict]], weyl_text: Optional[str]):
        self.p = p
        self.rank = rank
        self.depth = depth
        self.lifts = lifts
        self.weyl_text = weyl_text

    def lift(self, level: int, i: int) -> dict:
        return dict(self.lifts[level][i])

    def __eq__(self, other) -> bool:
        return (isinstance(other, SplittingChoice)
                and (self.p, self.rank, self.depth, self.weyl_text)
                == (other.p, other.rank, other.depth, other.weyl_text)
                and self.lifts == other.lifts)


def equivariant_splitting(spec: GroupSpec) -> SplittingChoice:
    """Reynolds-averaged W-stable lifts of the degree-one generators.

    The projector pi = |W|^{-1} sum_w rho(w) q rho(w)^{-1}, with q the naive
    projection onto span(Y_i) along all other monomials, is applied at the
    top depth; lower levels are the Frobenius-consistent truncations.
    Verified here: congruence to Y_i mod J^2, exact W-stability with the
    mod-p action matrix, and z^p-consistency across levels.
    """
    if spec.colimit:
        raise SpecError("splitting choices exist level by level; pass a finite spec")
    n = spec.uniform_depth
    if n is None:
        raise SpecError("equivariant splitting needs uniform torus depths")
    p, r = spec.p, spec.rank
    weyl = realize_weyl(spec)
    caps = tuple(p ** d for d in spec.depths)
    images = conj_generator_images(weyl, spec)
    inv_order = PrimeField(p).inv(weyl.size % p)
    top = []
    for i in range(r):
        e_i = tuple(1 if t == i else 0 for t in range(r))
        acc: dict = {}
        for w in range(weyl.size):
            winv = weyl.inverse[w]
            moved = images[winv][i]  # rho(w^-1)(Y_i)
            linear = {e: c for e, c in moved.items() if sum(e) == 1}
            vec_add_scaled(acc, _apply_conj_linear(images[w], linear, p), 1, p)
        top.append({e: (c * inv_order) % p for e, c in acc.items()})
    _check_lifts(top, images, weyl, spec)
    lifts = {n: top}
    for level in range(n - 1, 0, -1):
        bound = p ** level
        lifts[level] = [{e: c for e, c in v.items() if all(x < bound for x in e)}
                        for v in lifts[level + 1]]
    return SplittingChoice(p, r, n, lifts,
                           None if spec.weyl is None else canonical_spec(spec))


def _check_lifts(top: list[dict], images, weyl: WeylGroup, spec: GroupSpec) -> None:
    p, r = spec.p, spec.rank
    caps = tuple(p ** d for d in spec.depths)
    for i, v in enumerate(top):
        for e, c in v.items():
            s = sum(e)
            if s == 0:
                raise SpecError("lift has a constant term")
            if s == 1:
                want = 1 if e[i] == 1 else 0
                if c % p != want:
                    raise SpecError(f"lift {i} is not congruent to Y_{i+1} mod J^2")
    # exact stability: rho(w) X~_j = sum_k (A_w mod p)_{kj} X~_k
    for w in range(weyl.size):
        a = weyl.matrix(w)
        for j in range(r):
            moved: dict = {}
            for e, c in top[j].items():
                vec_add_scaled(moved, _conj_monomial(images[w], e, caps, p), c, p)
            expect: dict = {}
            for k in range(r):
                vec_add_scaled(expect, top[k], a[k][j] % p, p)
            if moved != expect:
                raise SpecError("lift span is not W-stable; averaging failed")


# -- the graded algebra ---------------------------------------------------------

class GradedGroupAlgebra:
    """F_p basis {X^a w}, X the canonical lifted generators, w in W.

    The multiplication table is exact: (X^a w)(X^b w') expands
    w X^b w^{-1} through the mod-p action matrix (linear in the lifts, a
    consequence of stability), multiplies in the truncated polynomial ring,
    and shifts by a.  Every table entry is checked to preserve the internal
    degree sum(a_i / p^{n_i}); elements of W sit in degree zero.
    """

    def __init__(self, spec: GroupSpec, weyl: WeylGroup,
                 splitting: Optional[SplittingChoice]):
        self.spec = spec
        self.field = PrimeField(spec.p)
        self.weyl = weyl
        self.splitting = splitting
        p = spec.p
        caps = tuple(p ** d for d in spec.depths)
        self.caps = caps
        r = spec.rank
        exps = list(itertools.product(*(range(c) for c in caps)))
        self.basis_keys: list[tuple[tuple[int, ...], int]] = [
            (a, w) for a in exps for w in range(weyl.size)]
        self.index = {key: i for i, key in enumerate(self.basis_keys)}
        self.dim = len(self.basis_keys)
        emax = max(d for d in spec.depths)
        self._degrees = []
        for a, w in self.basis_keys:
            num = sum(ai * p ** (emax - ni) for ai, ni in zip(a, spec.depths))
            self._degrees.append(InternalDegree(p, num, emax))
        self.unit_index = self.index[(tuple([0] * r), 0)]
        self.labels = [self._label(key) for key in self.basis_keys]
        self._table: dict[tuple[int, int], dict[int, int]] = {}
        self._conj_pow: dict[tuple[int, tuple[int, ...]], dict] = {}
        self._build_table()
        self._iota_cache: dict[tuple[int, int], dict[int, int]] = {}

    def _label(self, key) -> str:
        a, w = key
        parts = []
        for i, e in enumerate(a):
            if e == 1:
                parts.append(f"X{i+1}")
            elif e > 1:
                parts.append(f"X{i+1}^{e}")
        if w != 0:
            parts.append(self.weyl.labels[w])
        return "*".join(parts) if parts else "1"

    def degree(self, i: int) -> InternalDegree:
        return self._degrees[i]

    def _conj_power(self, w: int, b: tuple[int, ...]) -> dict:
        """Expansion of w X^b w^{-1} in the lifted exponent ring."""
        key = (w, b)
        cached = self._conj_pow.get(key)
        if cached is not None:
            return cached
        p = self.spec.p
        r = self.spec.rank
        a = self.weyl.matrix(w)
        acc = {tuple([0] * r): 1}
        for j, e in enumerate(b):
            if not e:
                continue
            linear = {}
            for k in range(r):
                c = a[k][j] % p
                if c:
                    linear[tuple(1 if t == k else 0 for t in range(r))] = c
            acc = poly_mul(acc, poly_pow(linear, e, self.caps, p), self.caps, p)
        self._conj_pow[key] = acc
        return acc

    def _build_table(self) -> None:
        p = self.spec.p
        for i, (a, w) in enumerate(self.basis_keys):
            dega = self._degrees[i]
            for j, (b, w2) in enumerate(self.basis_keys):
                conj = self._conj_power(w, b)
                w_out = self.weyl.mult(w, w2)
                out: dict[int, int] = {}
                for m, c in conj.items():
                    e = tuple(x + y for x, y in zip(a, m))
                    if any(x >= cap for x, cap in zip(e, self.caps)):
                        continue
                    k = self.index[(e, w_out)]
                    out[k] = (out.get(k, 0) + c) % p
                out = {k: c for k, c in out.items() if c}
                want = dega + self._degrees[j]
                for k in out:
                    if self._degrees[k] != want:
                        raise SpecError("multiplication is not graded; lift construction broken")
                self._table[(i, j)] = out

    def mult(self, i: int, j: int) -> dict[int, int]:
        return self._table[(i, j)]

    def mult_vec(self, u: dict[int, int], v: dict[int, int]) -> dict[int, int]:
        p = self.field.p
        out: dict[int, int] = {}
        for i, ci in u.items():
            for j, cj in v.items():
                vec_add_scaled(out, self._table[(i, j)], ci * cj, p)
        return out

    def augmentation(self, i: int) -> int:
        a, _ = self.basis_keys[i]
        return 1 if not any(a) else 0

    # reduced augmentation ideal: basis indexed by non-unit algebra basis
    # elements, where index (0, w) stands for the difference w - 1

    def iota_letters(self) -> list[int]:
        return [i for i in range(self.dim) if i != self.unit_index]

    def _letter_vec(self, i: int) -> dict[int, int]:
        a, w = self.basis_keys[i]
        if not any(a) and w != 0:
            return {i: 1, self.unit_index: self.field.p - 1}
        return {i: 1}

    def iota_product(self, i: int, j: int) -> dict[int, int]:
        """Product of reduced-ideal basis elements, projected back to the ideal."""
        key = (i, j)
        cached = self._iota_cache.get(key)
        if cached is not None:
            return cached
        prod = self.mult_vec(self._letter_vec(i), self._letter_vec(j))
        eps = sum(c for k, c in prod.items() if self.augmentation(k)) % self.field.p
        if eps:
            raise AssertionError("product of ideal elements left the ideal")
        out = {k: c for k, c in prod.items() if k != self.unit_index}
        self._iota_cache[key] = out
        return out

    def __repr__(self) -> str:
        return f"GradedGroupAlgebra({canonical_spec(self.spec)}, dim={self.dim})"


def build_group_algebra(spec: GroupSpec | str) -> GradedGroupAlgebra:
    """Construct the graded algebra for a finite spec.

    Checks performed: unit, gradedness of every product (during table
    construction), associativity (all triples when dim <= 200, a
    deterministic sample above), and that the augmentation is an algebra map.
    """
    if isinstance(spec, str):
        spec = parse_group_spec(spec)
    validate_spec(spec)
    if spec.colimit or any(d is None for d in spec.depths):
        raise SpecError("cannot build a finite algebra from a colimit spec")
    weyl = realize_weyl(spec)
    splitting = equivariant_splitting(spec) if weyl.size > 1 else None
    alg = GradedGroupAlgebra(spec, weyl, splitting)
    _verify_algebra(alg)
    return alg


def _verify_algebra(alg: GradedGroupAlgebra) -> None:
    n = alg.dim
    u = alg.unit_index
    for i in range(n):
        if alg.mult(u, i) != {i: 1} or alg.mult(i, u) != {i: 1}:
            raise SpecError("unit element fails")
    if n <= 200:
        triples = itertools.product(range(n), repeat=3)
    else:
        step = max(1, n // 12)
        picks = list(range(0, n, step))
        triples = itertools.product(picks, repeat=3)
    for i, j, k in triples:
        left = alg.mult_vec(alg.mult(i, j), {k: 1})
        right = alg.mult_vec({i: 1}, alg.mult(j, k))
        if left != right:
            raise SpecError(f"associativity fails on basis triple {(i, j, k)}")
    p = alg.field.p
    for i in range(n):
        for j in range(n):
            eps = sum(c for k, c in alg.mult(i, j).items() if alg.augmentation(k)) % p
            if eps != (alg.augmentation(i) * alg.augmentation(j)) % p:
                raise SpecError("augmentation is not an algebra map")


# -- maps between algebras -------------------------------------------------------

class AlgebraMap:
    """Degree-preserving algebra map, sparse columns over basis indices."""

    def __init__(self, source: GradedGroupAlgebra, target: GradedGroupAlgebra,
                 columns: dict[int, dict[int, int]]):
        self.source = source
        self.target = target
        self.columns = columns  # source index -> {target index: coeff}

    def apply(self, v: dict[int, int]) -> dict[int, int]:
        p = self.target.field.p
        out: dict[int, int] = {}
        for i, c in v.items():
            vec_add_scaled(out, self.columns[i], c, p)
        return out


def power_inclusion(lower: GradedGroupAlgebra, higher: GradedGroupAlgebra) -> AlgebraMap:
    """The algebra map induced by including each depth-n torus factor into
    depth n+1 via g -> g^p; on lifted monomials it is X^a w -> X^{pa} w.

    Verified: both sides have consecutive depths, the same prime and action,
    the map preserves internal degree, the unit, and multiplication.
    """
    ls, hs = lower.spec, higher.spec
    if ls.p != hs.p or ls.rank != hs.rank:
        raise SpecError("power inclusion needs the same prime and rank")
    if any(ln is None or hn is None or hn != ln + 1
           for ln, hn in zip(ls.depths, hs.depths)):
        raise SpecError("power inclusion connects consecutive depths only")
    if (ls.weyl is None) != (hs.weyl is None):
        raise SpecError("power inclusion needs matching weyl parts")
    if ls.weyl is not None and (ls.weyl.kind, ls.weyl.k, ls.weyl.matrix, ls.weyl.gens) \
            != (hs.weyl.kind, hs.weyl.k, hs.weyl.matrix, hs.weyl.gens):
        raise SpecError("power inclusion needs identical weyl descriptions")
    p = ls.p
    columns = {}
    for i, (a, w) in enumerate(lower.basis_keys):
        target_key = (tuple(p * x for x in a), w)
        j = higher.index[target_key]
        if higher.degree(j) != lower.degree(i):
            raise SpecError("power inclusion broke internal degrees")
        columns[i] = {j: 1}
    fmap = AlgebraMap(lower, higher, columns)
    for i in range(lower.dim):
        for j in range(lower.dim):
            left = fmap.apply(lower.mult(i, j))
            right = higher.mult_vec(fmap.apply({i: 1}), fmap.apply({j: 1}))
            if left != right:
                raise SpecError("power inclusion is not multiplicative; "
                                "splitting consistency broken")
    return fmap
