"""Seeded random models for the presets."""

from __future__ import annotations

import itertools

import numpy as np

from .semantics import CModel, derive_intuitionistic


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def _add_letters(M: CModel, rng, letters, density=0.5):
    for p in letters:
        M.add_relation(p, [(int(w),) for w in np.flatnonzero(rng.random(M.size) < density)], 1)


def random_kripke(seed, max_worlds=6, letters=("p",), density=None, name="M") -> CModel:
    """Random Kripke model with binary relation ``r`` and the given letters."""
    rng = _rng(seed)
    n = int(rng.integers(1, max_worlds + 1))
    d = rng.uniform(0.1, 0.6) if density is None else density
    r = [(int(a), int(b)) for a, b in zip(*np.nonzero(rng.random((n, n)) < d))]
    M = CModel.from_indices(n, {}, name)
    M.add_relation("r", r, 2)
    _add_letters(M, rng, letters)
    return M


def random_ternary(seed, max_worlds=5, letters=("p",), density=None, name="M") -> CModel:
    """Random model with a ternary relation ``r`` (Lambek frames)."""
    rng = _rng(seed)
    n = int(rng.integers(1, max_worlds + 1))
    d = rng.uniform(0.02, 0.3) if density is None else density
    r = [tuple(int(i) for i in t) for t in zip(*np.nonzero(rng.random((n, n, n)) < d))]
    M = CModel.from_indices(n, {}, name)
    M.add_relation("r", r, 3)
    _add_letters(M, rng, letters)
    return M


def random_preorder(rng, n, density=0.4) -> np.ndarray:
    R = (rng.random((n, n)) < density) | np.eye(n, dtype=bool)
    # transitive closure by repeated squaring
    while True:
        R2 = R | ((R.astype(np.int32) @ R.astype(np.int32)) > 0)
        if (R2 == R).all():
            return R
        R = R2


def random_upset(rng, R: np.ndarray, density=0.4) -> set[int]:
    seeds = np.flatnonzero(rng.random(R.shape[0]) < density)
    return {int(w) for s in seeds for w in np.flatnonzero(R[s])}


def random_intuitionistic(seed, max_worlds=5, letters=("p",), name="M", modal=False,
                          min_worlds=1) -> CModel:
    """Random preorder ``r`` with persistent letters, converted to a C-model.

    With ``modal`` set a random binary relation ``rd`` is added for the
    modal connectives.
    """
    rng = _rng(seed)
    n = int(rng.integers(min_worlds, max_worlds + 1))
    R = random_preorder(rng, n, rng.uniform(0.1, 0.6))
    rels = {"r": [(int(a), int(b)) for a, b in zip(*np.nonzero(R))]}
    for p in letters:
        rels[p] = [(w,) for w in sorted(random_upset(rng, R, rng.uniform(0.1, 0.6)))]
    M = CModel.from_indices(n, {}, name)
    M.add_relation("r", rels["r"], 2)
    for p in letters:
        M.add_relation(p, rels[p], 1)
    if modal:
        rd = (rng.random((n, n)) < rng.uniform(0.1, 0.6))
        M.add_relation("rd", [(int(a), int(b)) for a, b in zip(*np.nonzero(rd))], 2)
    return derive_intuitionistic(M, "r", letters)


def random_model(preset_name: str, seed, letters=("p",), name="M", max_worlds=None) -> CModel:
    """Random model suited to a preset."""
    if preset_name == "modal":
        return random_kripke(seed, max_worlds or 6, letters, name=name)
    if preset_name == "lambek":
        return random_ternary(seed, max_worlds or 5, letters, name=name)
    if preset_name == "intuitionistic":
        return random_intuitionistic(seed, max_worlds or 5, letters, name=name)
    if preset_name == "modal-intuitionistic":
        return random_intuitionistic(seed, max_worlds or 5, letters, name=name, modal=True)
    if preset_name == "modal-atomic":
        M = random_kripke(seed, max_worlds or 6, letters, name=name)
        n = M.size
        M.add_relation("d", [(i, i, i) for i in range(n)], 3)
        M.add_relation("top", [(i,) for i in range(n)], 1)
        M.add_relation("bot", [(i,) for i in range(n)], 1)
        return M
    raise KeyError(f"no generator for preset {preset_name!r}")


# --------------------------------------------------------------------------
# related pairs

def lifted_copy(M: CModel, seed, max_worlds: int, name="N") -> CModel:
    """Copy of ``M`` in which some worlds are duplicated.

    Every relation tuple is lifted to all combinations of copies, so the map
    sending a copy to its original preserves and reflects every relation and
    the two models are bisimilar world by world.  The copy never has more
    than ``max_worlds`` worlds.
    """
    rng = _rng(seed)
    n = M.size
    extra = int(rng.integers(0, max(max_worlds - n, 0) + 1))
    origin = list(range(n)) + [int(w) for w in rng.integers(0, n, size=extra)]
    origin = [origin[i] for i in rng.permutation(len(origin))]
    copies = {w: [i for i, o in enumerate(origin) if o == w] for w in range(n)}
    N = CModel.from_indices(len(origin), {}, name)
    for g, rows in sorted(M.relations.items()):
        lifted = [t for row in rows for t in itertools.product(*[copies[w] for w in row])]
        N.add_relation(g, lifted, M.arities.get(g))
    return N


def _toggle(M: CModel, rng, group: str):
    arity = M.arities[group]
    t = tuple(int(i) for i in rng.integers(0, M.size, size=arity))
    rows = set(M.relations[group]) ^ {t}
    M.add_relation(group, rows, arity)


def perturb(M: CModel, seed, groups) -> CModel:
    """Flip membership of one random tuple in one of ``groups`` (in place)."""
    rng = _rng(seed)
    _toggle(M, rng, groups[int(rng.integers(0, len(groups)))])
    return M


def shrink_upset(M: CModel, seed, letter: str, order="r") -> CModel:
    """Remove from ``letter`` one world whose removal keeps it persistent (in place)."""
    rng = _rng(seed)
    ext = {t[0] for t in M.relations[letter]}
    R = M.relations[order]
    minimal = sorted(w for w in ext if not any((v, w) in R for v in ext if v != w))
    if minimal:
        w = minimal[int(rng.integers(0, len(minimal)))]
        M.add_relation(letter, [(v,) for v in ext - {w}], 1)
    return M


PAIR_LIMITS = {"modal": 6, "modal-atomic": 6, "lambek": 5, "intuitionistic": 5, "modal-intuitionistic": 5}


def random_pair(preset_name: str, seed, letters=("p",)) -> tuple[CModel, CModel]:
    """A pair of models for bisimulation experiments.

    Seeds cycle through three kinds of pair: independent models, a model with
    a lifted copy of itself, and a lifted copy with one small perturbation.
    The last two kinds give non-trivial maximal bisimulations.
    """
    rng = _rng(seed)
    limit = PAIR_LIMITS[preset_name]
    kind = int(seed) % 3 if not isinstance(seed, np.random.Generator) else int(rng.integers(0, 3))
    if kind == 0:
        A = random_model(preset_name, rng, letters, "A", limit)
        B = random_model(preset_name, rng, letters, "B", limit)
        return A, B
    A = random_model(preset_name, rng, letters, "A", max(limit // 2, 1) + 1)
    B = lifted_copy(A, rng, limit, "B")
    if kind == 2:
        if preset_name in ("intuitionistic", "modal-intuitionistic"):
            if preset_name == "modal-intuitionistic" and rng.random() < 0.5:
                perturb(B, rng, ["rd"])
            else:
                shrink_upset(B, rng, letters[int(rng.integers(0, len(letters)))])
        else:
            perturb(B, rng, ["r", *letters])
    return A, B
