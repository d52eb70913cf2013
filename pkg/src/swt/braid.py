"""Braid word engine: analysis, rewriting moves, and summand exclusion.

Words live on ``n`` numbered strands and are sequences of signed letters
``(i, sign)`` standing for the generator that crosses strands ``i`` and
``i + 1``.  Everything downstream (genus, candidate slope, the rewrite
search) is defined for positive words; the data model still admits signs
so that move preservation properties can be tested on random signed
input.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

DEPTH_ENV = "SWT_DEPTH_DEFAULT"
DEPTH_FALLBACK = 8


class WordError(ValueError):
    """Malformed braid word, move, or precondition failure."""


def default_depth() -> int:
    raw = os.environ.get(DEPTH_ENV)
    if raw is None:
        return DEPTH_FALLBACK
    try:
        value = int(raw)
    except ValueError as exc:
        raise WordError(f"{DEPTH_ENV} must be an integer, got {raw!r}") from exc
    if value < 0:
        raise WordError(f"{DEPTH_ENV} must be nonnegative, got {value}")
    return value


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid group on ``strands`` strands.

    ``letters`` holds ``(index, sign)`` pairs with ``1 <= index <= strands - 1``
    and ``sign`` in ``{+1, -1}``.
    """

    strands: int
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.strands < 1:
            raise WordError(f"strand count must be >= 1, got {self.strands}")
        object.__setattr__(self, "letters", tuple((int(i), int(s)) for i, s in self.letters))
        for pos, (index, sign) in enumerate(self.letters):
            if not 1 <= index <= self.strands - 1:
                raise WordError(
                    f"letter {pos}: index {index} out of range 1..{self.strands - 1}"
                )
            if sign not in (-1, 1):
                raise WordError(f"letter {pos}: sign must be +1 or -1, got {sign}")

    @property
    def positive(self) -> bool:
        return all(sign == 1 for _, sign in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def exponents(self) -> tuple[int, ...]:
        """Signed exponent sum per generator index, entry ``k`` for index ``k+1``."""
        sums = [0] * (self.strands - 1)
        for index, sign in self.letters:
            sums[index - 1] += sign
        return tuple(sums)

    def closure_permutation(self) -> tuple[int, ...]:
        """Permutation of strand starts induced by the word, composed left to right.

        Entry ``k`` is the 0-based strand where strand ``k`` ends up.
        """
        perm = list(range(self.strands))
        for index, _ in self.letters:
            a = index - 1
            perm[a], perm[a + 1] = perm[a + 1], perm[a]
        out = [0] * self.strands
        for start, end in enumerate(perm):
            out[end] = start
        return tuple(out)

    def closure_components(self) -> int:
        perm = self.closure_permutation()
        seen = [False] * self.strands
        count = 0
        for start in range(self.strands):
            if seen[start]:
                continue
            count += 1
            k = start
            while not seen[k]:
                seen[k] = True
                k = perm[k]
        return count

    def display(self) -> str:
        return " ".join(str(i * s) for i, s in self.letters) or "(empty)"


def parse_word(text: str, strands: Optional[int] = None) -> BraidWord:
    """Parse whitespace-separated signed generator indices.

    ``"1 1 1"`` is the positive third power of the first generator, ``"-2"``
    a single negative second generator.  Strand count defaults to one more
    than the largest index used (one for the empty word).
    """
    letters = []
    for token in text.split():
        try:
            value = int(token)
        except ValueError as exc:
            raise WordError(f"letter {token!r} is not an integer") from exc
        if value == 0:
            raise WordError("generator index 0 is not allowed")
        letters.append((abs(value), 1 if value > 0 else -1))
    if strands is None:
        strands = 1 + max((i for i, _ in letters), default=0)
    return BraidWord(strands, tuple(letters))


@dataclass(frozen=True)
class BraidAnalysis:
    """Derived quantities of a braid word and its closure."""

    strands: int
    e: int
    e_i: tuple[int, ...]
    s: Optional[int]
    components: int
    is_knot: bool
    genus: Optional[int]
    candidate_slope: Optional[int]
    bridge_upper_bound: int

    def as_dict(self) -> dict:
        return {
            "strands": self.strands,
            "e": self.e,
            "e_i": list(self.e_i),
            "s": self.s,
            "components": self.components,
            "is_knot": self.is_knot,
            "genus": self.genus,
            "candidate_slope": self.candidate_slope,
            "bridge_upper_bound": self.bridge_upper_bound,
        }


def analyze(word: BraidWord) -> BraidAnalysis:
    """Exponent sums, closure components, and (for positive knots) genus.

    The Seifert surface of a positive word has Euler characteristic
    ``strands - e``, so a positive knot closure has ``2g - 1 = e - n``.
    ``s`` normalizes the exponent sum as ``e = 2n - 2 + s`` and is reported
    for positive words only.
    """
    e_i = word.exponents()
    e = sum(e_i)
    components = word.closure_components()
    is_knot = components == 1
    positive = word.positive
    s = e - 2 * word.strands + 2 if positive else None
    genus = None
    slope = None
    if positive and is_knot:
        # e - n is odd for any knot closure: e fixes the permutation parity.
        genus = (e - word.strands + 1) // 2
        slope = e - word.strands
    return BraidAnalysis(
        strands=word.strands,
        e=e,
        e_i=e_i,
        s=s,
        components=components,
        is_knot=is_knot,
        genus=genus,
        candidate_slope=slope,
        bridge_upper_bound=word.strands,
    )


@dataclass(frozen=True)
class Commute:
    """Swap adjacent letters whose indices differ by at least two."""

    pos: int


@dataclass(frozen=True)
class BraidRelation:
    """Rewrite ``a b a -> b a b`` for adjacent indices, same sign, at ``pos``."""

    pos: int


@dataclass(frozen=True)
class Cycle:
    """Conjugate by the first letter: rotate it to the end."""


@dataclass(frozen=True)
class Destabilize:
    """Drop a final, sole, positive top-index letter and its strand."""


@dataclass(frozen=True)
class Stabilize:
    """Add a strand and append the new positive top-index letter."""


Move = Commute | BraidRelation | Cycle | Destabilize | Stabilize


def apply_move(word: BraidWord, move: Move) -> BraidWord:
    """Apply one rewrite move, rejecting it when the pattern does not match.

    Every move preserves the closure as a link, hence also the component
    count; e - n is preserved as well (destabilization drops both by one).
    """
    letters = word.letters
    if isinstance(move, Commute):
        pos = move.pos
        if not 0 <= pos < len(letters) - 1:
            raise WordError(f"commute position {pos} out of range")
        (a, sa), (b, sb) = letters[pos], letters[pos + 1]
        if abs(a - b) < 2:
            raise WordError(f"letters at {pos} have indices {a},{b}; need distance >= 2")
        swapped = letters[:pos] + ((b, sb), (a, sa)) + letters[pos + 2 :]
        return BraidWord(word.strands, swapped)
    if isinstance(move, BraidRelation):
        pos = move.pos
        if not 0 <= pos < len(letters) - 2:
            raise WordError(f"braid relation position {pos} out of range")
        (a, sa), (b, sb), (c, sc) = letters[pos : pos + 3]
        if not (a == c and abs(a - b) == 1 and sa == sb == sc):
            raise WordError(
                f"letters at {pos} do not form a same-sign a b a pattern with |a-b|=1"
            )
        replaced = letters[:pos] + ((b, sb), (a, sa), (b, sb)) + letters[pos + 3 :]
        return BraidWord(word.strands, replaced)
    if isinstance(move, Cycle):
        if not letters:
            return word
        return BraidWord(word.strands, letters[1:] + letters[:1])
    if isinstance(move, Destabilize):
        top = word.strands - 1
        if top < 1 or not letters:
            raise WordError("nothing to destabilize")
        occurrences = [k for k, (i, _) in enumerate(letters) if i == top]
        e_top = sum(s for i, s in letters if i == top)
        if e_top != 1 or len(occurrences) != 1:
            raise WordError(f"destabilization needs e_{top} = 1, got {e_top}")
        if occurrences[0] != len(letters) - 1:
            raise WordError("top letter must be final; cycle first")
        return BraidWord(word.strands - 1, letters[:-1])
    if isinstance(move, Stabilize):
        return BraidWord(word.strands + 1, letters + ((word.strands, 1),))
    raise WordError(f"unknown move {move!r}")


def parse_moves(text: str) -> list[Move]:
    """Parse a move list like ``"braid@0 cycle destab"``.

    Positional moves take ``@pos``; separators are spaces or commas.
    """
    moves: list[Move] = []
    for token in text.replace(",", " ").split():
        name, _, arg = token.partition("@")
        if name in ("commute", "braid"):
            try:
                pos = int(arg)
            except ValueError as exc:
                raise WordError(f"move {token!r} needs an integer position") from exc
            moves.append(Commute(pos) if name == "commute" else BraidRelation(pos))
        elif name == "cycle" and not arg:
            moves.append(Cycle())
        elif name == "destab" and not arg:
            moves.append(Destabilize())
        elif name == "stab" and not arg:
            moves.append(Stabilize())
        else:
            raise WordError(f"unknown move {token!r}")
    return moves


def split_connected_sum(word: BraidWord, i: int) -> tuple[BraidWord, BraidWord]:
    """Split a positive word at a generator used exactly once.

    A sphere through that single crossing separates the closure into a
    connected sum: letters below ``i`` on strands ``1..i`` and letters above
    ``i``, reindexed, on the remaining strands.
    """
    if not word.positive:
        raise WordError("split requires a positive word")
    if not 1 <= i <= word.strands - 1:
        raise WordError(f"generator {i} out of range 1..{word.strands - 1}")
    e_i = sum(1 for index, _ in word.letters if index == i)
    if e_i != 1:
        raise WordError(f"split requires e_{i} = 1, got {e_i}")
    left = tuple(l for l in word.letters if l[0] < i)
    right = tuple((index - i, sign) for index, sign in word.letters if index > i)
    return BraidWord(i, left), BraidWord(word.strands - i, right)


def _rotation_canonical(letters: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    if len(letters) < 2:
        return letters
    best = letters
    current = letters
    for _ in range(len(letters) - 1):
        current = current[1:] + current[:1]
        if current < best:
            best = current
    return best


def _free_neighbors(letters: tuple[tuple[int, int], ...]) -> Iterable[tuple[tuple[int, int], ...]]:
    # Cyclic far-commutation swaps; rotation is identified away by the key.
    e = len(letters)
    for k in range(e):
        j = (k + 1) % e
        if abs(letters[k][0] - letters[j][0]) >= 2:
            if j:
                yield letters[:k] + (letters[j], letters[k]) + letters[j + 1 :]
            else:
                yield letters[1:-1] + (letters[0], letters[-1])


def _relation_neighbors(letters: tuple[tuple[int, int], ...]) -> Iterable[tuple[tuple[int, int], ...]]:
    # Cyclic a b a -> b a b windows; wrapping windows are reached by free
    # rotation first, so enumerate them here directly.
    e = len(letters)
    if e < 3:
        return
    for k in range(e):
        a, b, c = letters[k], letters[(k + 1) % e], letters[(k + 2) % e]
        if a[0] == c[0] and abs(a[0] - b[0]) == 1 and a[1] == b[1] == c[1]:
            rotated = letters[k:] + letters[:k]
            yield (b, a, b) + rotated[3:]


def _search_reduction(
    word: BraidWord, depth: int, target: Optional[int], require_trivial: bool
) -> Optional[tuple[tuple[tuple[int, int], ...], int]]:
    """Breadth-first search for a state with some ``e_j`` driven to 1.

    Conjugation and far commutation are treated as free normalization and
    do not consume depth; each braid-relation application costs one.
    Returns the witness state and split index, or None.

    With ``require_trivial``, a hit must split off an empty one-strand
    summand (``j`` at either end of the index range), which is what a
    strand-count reduction needs; without it, any ``e_j = 1`` counts, which
    is what connected-sum detection needs.
    """
    n = word.strands

    def admissible(j: int) -> bool:
        if target is not None and j != target:
            return False
        if require_trivial and j not in (1, n - 1):
            return False
        return True

    def hit(letters: tuple[tuple[int, int], ...]) -> Optional[int]:
        counts = [0] * (n - 1)
        for index, _ in letters:
            counts[index - 1] += 1
        for j in range(1, n):
            if counts[j - 1] == 1 and admissible(j):
                return j
        return None

    start = _rotation_canonical(word.letters)
    found = hit(start)
    if found is not None:
        return start, found
    # Free moves preserve every per-generator count, and one relation moves a
    # single unit between adjacent counts, so an admissible generator must
    # start within `depth` units of count 1.
    counts = [0] * (n - 1)
    for index, _ in start:
        counts[index - 1] += 1
    if not any(
        admissible(j) and abs(counts[j - 1] - 1) <= depth for j in range(1, n)
    ):
        return None
    dist: dict[tuple, int] = {start: 0}
    queue: deque[tuple[tuple[tuple[int, int], ...], int]] = deque([(start, 0)])
    while queue:
        letters, d = queue.popleft()
        if d > dist.get(letters, d):
            continue
        if d == depth:
            # Free neighbors keep the count profile, so no new hits at the
            # depth horizon; relation neighbors would exceed it.
            continue
        for neighbor in _free_neighbors(letters):
            key = _rotation_canonical(neighbor)
            if dist.get(key, d + 1) <= d:
                continue
            dist[key] = d
            queue.appendleft((key, d))
        for neighbor in _relation_neighbors(letters):
            key = _rotation_canonical(neighbor)
            if dist.get(key, d + 2) <= d + 1:
                continue
            dist[key] = d + 1
            found = hit(key)
            if found is not None:
                return key, found
            queue.append((key, d + 1))
    return None


def eliminate_generator(
    word: BraidWord, i: int, depth: Optional[int] = None
) -> Optional[BraidWord]:
    """Try to remove strands by rewriting until generator ``i`` is used once.

    Searches conjugation, far commutation, and braid relations (breadth
    first, at most ``depth`` relation applications), then splits off the
    empty summand.  Returns the positive word on fewer strands with the
    same knot closure, or None when no reduction is found.
    """
    if not word.positive:
        raise WordError("eliminate_generator requires a positive word")
    if not 1 <= i <= word.strands - 1:
        raise WordError(f"generator {i} out of range 1..{word.strands - 1}")
    if depth is None:
        depth = default_depth()
    found = _search_reduction(word, depth, target=i, require_trivial=True)
    if found is None:
        return None
    letters, j = found
    left, right = split_connected_sum(BraidWord(word.strands, letters), j)
    return right if j == 1 else left


def exclude_three_summands(word: BraidWord, depth: Optional[int] = None) -> dict:
    """Run the three-summand exclusion pipeline on a positive knot word.

    Verdicts, in priority order: ``excluded-by-bridge`` for n <= 5 (the
    closure is an n-bridge presentation), ``excluded-by-slope`` for s >= 3
    (then the candidate slope 2g - 1 = n + s - 2 exceeds the bridge bound),
    ``word-reducible`` when some generator is already used at most once or
    the rewrite search exhibits a connected-sum split, else
    ``inconclusive``.
    """
    if not word.positive:
        raise WordError("exclusion pipeline requires a positive word")
    if depth is None:
        depth = default_depth()
    summary = analyze(word)
    if not summary.is_knot:
        raise WordError(f"closure has {summary.components} components; need a knot")
    report = {
        "word": word.display(),
        "strands": word.strands,
        "e": summary.e,
        "s": summary.s,
        "genus": summary.genus,
        "candidate_slope": summary.candidate_slope,
        "depth": depth,
        "reducible": None,
        "split_generator": None,
        "verdict": None,
    }
    if word.strands <= 5:
        report["verdict"] = "excluded-by-bridge"
        return report
    if summary.s is not None and summary.s >= 3:
        report["verdict"] = "excluded-by-slope"
        return report
    surface = [j + 1 for j, e_j in enumerate(summary.e_i) if e_j <= 1]
    if surface:
        report["reducible"] = True
        report["split_generator"] = surface[0]
    else:
        found = _search_reduction(word, depth, target=None, require_trivial=False)
        report["reducible"] = found is not None
        if found is not None:
            report["split_generator"] = found[1]
    report["verdict"] = "word-reducible" if report["reducible"] else "inconclusive"
    return report


def random_word(rng, max_strands: int = 8, max_length: int = 20) -> BraidWord:
    """Random signed word for property sweeps; deterministic under a seeded rng."""
    n = rng.randrange(2, max_strands + 1)
    length = rng.randrange(0, max_length + 1)
    letters = tuple(
        (rng.randrange(1, n), rng.choice((-1, 1))) for _ in range(length)
    )
    return BraidWord(n, letters)


def all_positive_words(strands: int, length: int) -> Iterable[BraidWord]:
    """Every positive word with the exact strand count and length."""
    indices = range(1, strands)
    for combo in itertools.product(indices, repeat=length):
        yield BraidWord(strands, tuple((i, 1) for i in combo))
