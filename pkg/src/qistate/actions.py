"""Automorphisms of block algebras and their closure into finite groups.

Every *-automorphism of a direct sum of matrix blocks is a
dimension-preserving permutation of the blocks composed with one unitary
conjugation per block: g(a)_i = u_i a_{perm^-1(i)} u_i*.  Unitaries are
only determined up to a phase per block, so map equality is tested by
action, not by comparing unitaries.
"""

import numpy as np

from . import matcore
from .algebra import AlgebraDescriptor, AlgebraElement
from .matcore import InputError, TOL_EQ, dagger


class Automorphism:
    """Block permutation plus per-block unitary conjugation.

    ``perm[j]`` is the block index that input block j is carried to;
    ``unitaries[i]`` conjugates on the target block i.
    """

    __slots__ = ("descriptor", "perm", "unitaries", "inv_perm")

    def __init__(self, descriptor: AlgebraDescriptor, perm, unitaries,
                 tol_eq: float = TOL_EQ):
        perm = tuple(int(p) for p in perm)
        k = descriptor.num_blocks
        if sorted(perm) != list(range(k)):
            raise InputError(f"perm {perm} is not a permutation of 0..{k - 1}")
        dims = descriptor.block_dims
        for j, p in enumerate(perm):
            if dims[p] != dims[j]:
                raise InputError(
                    f"permutation maps block {j} (dim {dims[j]}) to "
                    f"block {p} (dim {dims[p]})"
                )
        unitaries = [matcore.as_square(u) for u in unitaries]
        if tuple(u.shape[0] for u in unitaries) != dims:
            raise InputError("unitary shapes do not match block dims")
        for i, u in enumerate(unitaries):
            if not matcore.is_unitary(u, tol_eq):
                raise InputError(f"matrix for block {i} is not unitary")
        inv_perm = [0] * k
        for j, p in enumerate(perm):
            inv_perm[p] = j
        self.descriptor = descriptor
        self.perm = perm
        self.unitaries = unitaries
        self.inv_perm = tuple(inv_perm)

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        return apply(self, a)


def identity_automorphism(descriptor: AlgebraDescriptor) -> Automorphism:
    return Automorphism(descriptor, range(descriptor.num_blocks),
                        [np.eye(n) for n in descriptor.block_dims])


def apply(g: Automorphism, a: AlgebraElement) -> AlgebraElement:
    """g(a)_i = u_i a_{perm^-1(i)} u_i*."""
    if g.descriptor != a.descriptor:
        raise InputError("automorphism and element live on different algebras")
    blocks = [u @ a.blocks[j] @ dagger(u)
              for u, j in zip(g.unitaries, g.inv_perm)]
    return AlgebraElement(a.descriptor, blocks)


def compose(g: Automorphism, h: Automorphism) -> Automorphism:
    """The automorphism a |-> g(h(a))."""
    if g.descriptor != h.descriptor:
        raise InputError("cannot compose automorphisms of different algebras")
    perm = tuple(g.perm[p] for p in h.perm)
    unitaries = [g.unitaries[i] @ h.unitaries[g.inv_perm[i]]
                 for i in range(g.descriptor.num_blocks)]
    return Automorphism(g.descriptor, perm, unitaries)


def inverse(g: Automorphism) -> Automorphism:
    unitaries = [dagger(g.unitaries[g.perm[j]])
                 for j in range(g.descriptor.num_blocks)]
    return Automorphism(g.descriptor, g.inv_perm, unitaries)


def predual(g: Automorphism, rho: AlgebraElement) -> AlgebraElement:
    """Predual action on densities: tr(predual(g, rho) a) = tr(rho g(a)).

    Since block automorphisms preserve the total trace this is just
    g^-1 applied to the density.
    """
    return apply(inverse(g), rho)


def equal_as_maps(g: Automorphism, h: Automorphism, tol: float = TOL_EQ) -> bool:
    """True when g and h act identically; unitaries may differ by phases."""
    if g.descriptor != h.descriptor:
        return False
    if g.perm != h.perm:
        # Maps with different block permutations differ on some matrix unit.
        return False
    for ug, uh in zip(g.unitaries, h.unitaries):
        # uh* ug must be a scalar phase for the conjugations to agree.
        w = dagger(uh) @ ug
        n = w.shape[0]
        t = np.trace(w) / n
        if abs(t) < 0.5:  # far from any phase: cheap reject
            return False
        phase = t / abs(t)
        if matcore.op_norm(w - phase * np.eye(n)) > tol * max(1.0, float(n)):
            return False
    return True


class FiniteGroup:
    """Closed list of automorphisms with composition and inverse tables."""

    __slots__ = ("descriptor", "elements", "mult", "inv")

    def __init__(self, descriptor, elements, mult, inv):
        self.descriptor = descriptor
        self.elements = elements
        self.mult = mult            # mult[i][j] = index of elements[i] o elements[j]
        self.inv = inv

    @property
    def order(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def identity_index(self) -> int:
        return 0

    def element_index(self, g: Automorphism, tol: float = TOL_EQ) -> int:
        for i, e in enumerate(self.elements):
            if equal_as_maps(e, g, tol):
                return i
        raise InputError("automorphism is not an element of the group")

    def block_orbits(self):
        """Orbits of the block-permutation action on block indices."""
        k = self.descriptor.num_blocks
        seen, orbits = set(), []
        for start in range(k):
            if start in seen:
                continue
            orbit, frontier = {start}, [start]
            while frontier:
                j = frontier.pop()
                for g in self.elements:
                    p = g.perm[j]
                    if p not in orbit:
                        orbit.add(p)
                        frontier.append(p)
            seen |= orbit
            orbits.append(sorted(orbit))
        return orbits


def close_group(generators, cap: int = 10000, tol: float = TOL_EQ) -> FiniteGroup:
    """Breadth-first closure of a generator set under composition.

    Deduplication compares automorphisms as maps.  Raises once the closure
    exceeds ``cap`` elements (generators of infinite order).
    """
    if not generators:
        raise InputError("need at least one generator")
    desc = generators[0].descriptor
    for g in generators:
        if g.descriptor != desc:
            raise InputError("generators live on different algebras")

    elements = [identity_automorphism(desc)]

    def find(g):
        for i, e in enumerate(elements):
            if equal_as_maps(e, g, tol):
                return i
        return -1

    frontier = []
    for g in generators:
        if find(g) < 0:
            elements.append(g)
            frontier.append(g)
    while frontier:
        new_frontier = []
        for g in frontier:
            for s in generators:
                gs = compose(g, s)
                if find(gs) < 0:
                    if len(elements) >= cap:
                        raise InputError(f"group not finite at cap {cap}")
                    elements.append(gs)
                    new_frontier.append(gs)
        frontier = new_frontier

    n = len(elements)
    mult = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            idx = find(compose(elements[i], elements[j]))
            if idx < 0:
                raise InputError("closure is inconsistent: product left the set")
            mult[i, j] = idx
    inv = [0] * n
    for i in range(n):
        hits = np.nonzero(mult[i] == 0)[0]
        if len(hits) != 1:
            raise InputError("closure is inconsistent: no unique inverse")
        inv[i] = int(hits[0])
    return FiniteGroup(desc, elements, mult, inv)


def trivial_group(descriptor: AlgebraDescriptor) -> FiniteGroup:
    return close_group([identity_automorphism(descriptor)], cap=2)
