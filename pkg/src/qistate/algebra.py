"""Finite-dimensional von Neumann algebras as direct sums of matrix blocks.

An algebra is described by its block dimensions (n_1, ..., n_k); its
elements are lists of dense complex blocks.  Normal states are stored by
their density matrix.  The Hilbert-Schmidt space of block matrices doubles
as the GNS space: vectors use the same block layout as algebra elements,
the algebra acts by left multiplication, and the cyclic vector of a
faithful state is the positive root of its density.

Vectorization convention for linear operators on the Hilbert-Schmidt
space: block-major, column-major within each block.
"""

from dataclasses import dataclass

import numpy as np

from . import matcore
from .matcore import InputError, PreconditionError, TOL_EQ, TOL_HERM, TOL_POS, dagger


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Block dimensions (n_1, ..., n_k) of a sum of full matrix algebras."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n < 1 for n in dims):
            raise InputError(f"block dims must be positive integers, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dim(self) -> int:
        """Linear dimension sum(n_i^2); also the Hilbert-Schmidt dimension."""
        return int(sum(n * n for n in self.block_dims))


class AlgebraElement:
    """One complex n_i x n_i block per summand of the algebra."""

    __slots__ = ("descriptor", "blocks")

    def __init__(self, descriptor: AlgebraDescriptor, blocks):
        blocks = [matcore.as_square(b) for b in blocks]
        dims = tuple(b.shape[0] for b in blocks)
        if dims != descriptor.block_dims:
            raise InputError(
                f"block shapes {dims} do not match descriptor {descriptor.block_dims}"
            )
        self.descriptor = descriptor
        self.blocks = blocks

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        _same_descriptor(self, other)
        return AlgebraElement(self.descriptor,
                              [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        _same_descriptor(self, other)
        return AlgebraElement(self.descriptor,
                              [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar):
        return AlgebraElement(self.descriptor, [complex(scalar) * b for b in self.blocks])

    __rmul__ = __mul__

    def __matmul__(self, other):
        _same_descriptor(self, other)
        return AlgebraElement(self.descriptor,
                              [a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self):
        return AlgebraElement(self.descriptor, [dagger(b) for b in self.blocks])

    def inv(self):
        return AlgebraElement(self.descriptor, [np.linalg.inv(b) for b in self.blocks])

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def op_norm(self) -> float:
        return max(matcore.op_norm(b) for b in self.blocks)

    def hs_norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks)))

    def herm_residual(self) -> float:
        return max(matcore.herm_residual(b) for b in self.blocks)

    def is_hermitian(self, tol: float = TOL_EQ) -> bool:
        return self.herm_residual() <= tol * max(1.0, self.op_norm())

    def min_eig(self, tol_herm: float = TOL_HERM) -> float:
        return min(matcore.min_eig(b, tol_herm=tol_herm) for b in self.blocks)

    def min_sv(self) -> float:
        return min(matcore.min_sv(b) for b in self.blocks)

    def copy(self):
        return AlgebraElement(self.descriptor, [b.copy() for b in self.blocks])


# The Hilbert-Schmidt space reuses the block-matrix layout.
L2Vector = AlgebraElement


def _same_descriptor(a, b):
    if a.descriptor != b.descriptor:
        raise InputError(
            f"descriptor mismatch: {a.descriptor.block_dims} vs {b.descriptor.block_dims}"
        )


def identity(descriptor: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement(descriptor, [np.eye(n) for n in descriptor.block_dims])


def zero(descriptor: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement(descriptor, [np.zeros((n, n)) for n in descriptor.block_dims])


def from_block(descriptor: AlgebraDescriptor, index: int, block) -> AlgebraElement:
    """Element supported on a single block."""
    blocks = [np.zeros((n, n), dtype=complex) for n in descriptor.block_dims]
    blocks[index] = matcore.as_square(block)
    return AlgebraElement(descriptor, blocks)


def matrix_unit_basis(descriptor: AlgebraDescriptor):
    """Hilbert-Schmidt orthonormal basis of matrix units, block by block."""
    basis = []
    for i, n in enumerate(descriptor.block_dims):
        for c in range(n):
            for r in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[r, c] = 1.0
                basis.append(from_block(descriptor, i, e))
    return basis


# -- vectorization of the Hilbert-Schmidt space -----------------------------

def vec(x: AlgebraElement) -> np.ndarray:
    """Flatten to coordinates: block-major, column-major within a block."""
    return np.concatenate([b.flatten(order="F") for b in x.blocks])


def unvec(descriptor: AlgebraDescriptor, v: np.ndarray) -> AlgebraElement:
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != descriptor.dim:
        raise InputError(f"vector length {v.size} != descriptor dim {descriptor.dim}")
    blocks, ofs = [], 0
    for n in descriptor.block_dims:
        blocks.append(v[ofs:ofs + n * n].reshape((n, n), order="F"))
        ofs += n * n
    return AlgebraElement(descriptor, blocks)


def l2_inner(xi: L2Vector, eta: L2Vector) -> complex:
    """<xi, eta> = sum_i tr(xi_i* eta_i), conjugate-linear in the first slot."""
    _same_descriptor(xi, eta)
    return complex(sum(np.trace(dagger(a) @ b) for a, b in zip(xi.blocks, eta.blocks)))


def left_mult_matrix(x: AlgebraElement) -> np.ndarray:
    """Matrix of xi |-> x xi on Hilbert-Schmidt coordinates."""
    mats = [np.kron(np.eye(b.shape[0]), b) for b in x.blocks]
    n = x.descriptor.dim
    out = np.zeros((n, n), dtype=complex)
    ofs = 0
    for m in mats:
        k = m.shape[0]
        out[ofs:ofs + k, ofs:ofs + k] = m
        ofs += k
    return out


# -- states -----------------------------------------------------------------

class State:
    """Normal state given by its density: Hermitian PSD blocks, total trace 1."""

    __slots__ = ("descriptor", "density")

    def __init__(self, descriptor: AlgebraDescriptor, density: AlgebraElement,
                 tol_eq: float = TOL_EQ, tol_pos: float = TOL_POS):
        if density.descriptor != descriptor:
            raise InputError("density descriptor does not match the algebra")
        res = density.herm_residual()
        if res > TOL_HERM * max(1.0, density.op_norm()):
            raise InputError(f"density is not Hermitian: residual {res:.3e}")
        mn = density.min_eig()
        if mn < -tol_pos:
            raise InputError(f"density is not PSD: min eigenvalue {mn:.3e}")
        tr = density.trace()
        if abs(tr - 1.0) > tol_eq * 1.0:
            raise InputError(f"density trace {tr.real:.12g} != 1")
        self.descriptor = descriptor
        self.density = density

    def __call__(self, a: AlgebraElement) -> complex:
        return evaluate(self, a)


def state_from_density(density: AlgebraElement, **kw) -> State:
    return State(density.descriptor, density, **kw)


def evaluate(phi: State, a: AlgebraElement) -> complex:
    """phi(a) = sum_i tr(rho_i a_i)."""
    _same_descriptor(phi.density, a)
    return complex(sum(np.trace(r @ b) for r, b in zip(phi.density.blocks, a.blocks)))


def is_faithful(phi: State, tol_pos: float = TOL_POS):
    """(faithful?, minimum eigenvalue across blocks)."""
    mn = phi.density.min_eig()
    return mn > tol_pos, mn


def require_faithful(phi: State, tol_pos: float = TOL_POS) -> None:
    ok, mn = is_faithful(phi, tol_pos)
    if not ok:
        raise PreconditionError(
            f"state is not faithful: min density eigenvalue {mn:.3e} <= {tol_pos:.1e}"
        )


def support_projection(x: AlgebraElement, tol_pos: float = TOL_POS) -> AlgebraElement:
    """Spectral projection of a Hermitian PSD element onto eigenvalues > tol_pos."""
    blocks = []
    for b in x.blocks:
        w, v = matcore.herm_eig(b)
        keep = (w > tol_pos).astype(float)
        blocks.append((v * keep) @ dagger(v))
    return AlgebraElement(x.descriptor, blocks)


EQUIVALENT = "equivalent"
FIRST_IN_SECOND = "first<<second"
SECOND_IN_FIRST = "second<<first"
INCOMPARABLE = "incomparable"


def support_comparison(phi: State, psi: State, tol_pos: float = TOL_POS,
                       tol_eq: float = TOL_EQ) -> str:
    """Compare supports: absolute continuity of one state w.r.t. the other."""
    if phi.descriptor != psi.descriptor:
        raise InputError("states live on different algebras")
    sp = support_projection(phi.density, tol_pos)
    sq = support_projection(psi.density, tol_pos)
    # s <= t for projections iff s t s = s.
    phi_in_psi = (sp - sp @ sq @ sp).op_norm() <= tol_eq
    psi_in_phi = (sq - sq @ sp @ sq).op_norm() <= tol_eq
    if phi_in_psi and psi_in_phi:
        return EQUIVALENT
    if phi_in_psi:
        return FIRST_IN_SECOND
    if psi_in_phi:
        return SECOND_IN_FIRST
    return INCOMPARABLE


def density_power(phi: State, z: complex, tol_pos: float = TOL_POS) -> AlgebraElement:
    """rho^{iz} blockwise; requires a faithful state."""
    require_faithful(phi, tol_pos)
    return AlgebraElement(
        phi.descriptor,
        [matcore.imag_power(b, z, tol_pos=tol_pos) for b in phi.density.blocks],
    )


def modular_flow(phi: State, a: AlgebraElement, z: complex,
                 tol_pos: float = TOL_POS) -> AlgebraElement:
    """The flow a |-> rho^{iz} a rho^{-iz}; algebraic at finite dimension.

    z real is the usual one-parameter group; z = -i/2 and z = -i are its
    analytic extensions rho^{1/2} a rho^{-1/2} and rho a rho^{-1}.
    """
    require_faithful(phi, tol_pos)
    _same_descriptor(phi.density, a)
    left = density_power(phi, z, tol_pos)
    right = density_power(phi, -z, tol_pos)
    return left @ a @ right


def gns_embed(phi: State, x: AlgebraElement, tol_pos: float = TOL_POS) -> L2Vector:
    """x |-> x rho^{1/2}: the cyclic embedding of the algebra into its
    Hilbert-Schmidt space; <gns(x), gns(y)> = phi(x* y)."""
    require_faithful(phi, tol_pos)
    _same_descriptor(phi.density, x)
    root = density_power(phi, -0.5j, tol_pos)
    return x @ root


def center_basis(descriptor: AlgebraDescriptor):
    """Minimal central projections z_j (identity on block j, zero elsewhere)."""
    return [from_block(descriptor, j, np.eye(n))
            for j, n in enumerate(descriptor.block_dims)]
