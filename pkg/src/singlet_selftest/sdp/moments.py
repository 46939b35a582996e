"""Moment matrices, localizing matrices and the fidelity-minimization SDP.

Variables are the real-symmetrized moments of canonical words; the identity
moment is fixed to 1.  Blocks are affine maps ``const + sum_k y_k coef_k``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..algebra import (
    MomentPolynomial,
    Poly,
    adjoint,
    expand_swap_fidelity,
    key_order,
    moment_key,
    word_str,
)
from ..errors import UnhousedMoment
from ..geometry import AnglePoint, mayers_yao_point
from ..simulator import StateVector, phi_plus, rotated_target

_COS_TOL = 1e-12


@dataclass(frozen=True)
class Controls:
    za: Poly
    xa: Poly
    zb: Poly
    xb: Poly


@dataclass(frozen=True)
class CriterionConfig:
    """One self-testing criterion together with its tolerance ``epsilon``.

    ``ideal`` maps ``(x, y)`` to the ideal correlator ``<A_x B_y>`` that is
    box-constrained; ``localizers`` holds ``(aux_letter, xtilde)`` pairs
    imposing ``aux * xtilde >= 0``.
    """

    name: str
    controls: Controls
    target: StateVector
    ideal: dict
    localizers: tuple = ()
    epsilon: float = 0.0
    angles: Optional[AnglePoint] = None

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")

    def with_epsilon(self, eps: float) -> "CriterionConfig":
        return CriterionConfig(
            self.name, self.controls, self.target, self.ideal, self.localizers, float(eps), self.angles
        )

    @property
    def alphabet(self) -> tuple:
        letters = {"A0", "A1", "B0", "B1"}
        for p in (self.controls.za, self.controls.xa, self.controls.zb, self.controls.xb):
            letters |= p.letters()
        for x, y in self.ideal:
            letters |= {f"A{x}", f"B{y}"}
        for aux, xt in self.localizers:
            letters |= {aux} | xt.letters()
        return tuple(sorted(letters))


def criterion_from_angles(a: AnglePoint, epsilon: float = 0.0, name: Optional[str] = None) -> CriterionConfig:
    """Four-setting criterion for a canonical angle point.

    ``Z'_A = A0`` and ``Z'_B = B0`` with the target rotated by ``alpha00``.
    ``X'_A`` is ``A1`` when the ideal combination reduces to it, otherwise an
    auxiliary ``A2`` pinned by a localizing matrix; likewise ``X'_B``.
    """
    (a00, a01), (a10, a11) = a.alpha
    theta = a00 + a10
    beta = a10 + a11
    A0, A1, A2, B0, B1, B2 = (Poly.letter(n) for n in ("A0", "A1", "A2", "B0", "B1", "B2"))
    localizers = []
    if abs(math.cos(theta)) <= _COS_TOL:
        xa = A1 / math.sin(theta)
    else:
        xa = A2
        localizers.append(("A2", A1 - math.cos(theta) * A0))
    if abs(math.cos(beta)) <= _COS_TOL:
        xb = B1 / math.sin(beta)
    else:
        xb = B2
        localizers.append(("B2", B1 - math.cos(beta) * B0))
    ideal = {(x, y): math.cos(a.alpha[x][y]) for x in range(2) for y in range(2)}
    if name is None:
        name = "alpha=(" + ",".join(f"{v:.6g}" for v in a.flat()) + ")"
    return CriterionConfig(
        name, Controls(A0, xa, B0, xb), rotated_target(a00), ideal, tuple(localizers), float(epsilon), a
    )


def mayers_yao_config(epsilon: float = 0.0) -> CriterionConfig:
    """Five-setting Mayers-Yao criterion: Bob's third setting is a real measurement."""
    e = mayers_yao_point().matrix
    ideal = {(x, y): float(e[x, y]) for x in range(2) for y in range(3)}
    A0, A1, B0, B1 = (Poly.letter(n) for n in ("A0", "A1", "B0", "B1"))
    return CriterionConfig("mayers-yao-5", Controls(A0, A1, B0, B1), phi_plus(), ideal, (), float(epsilon))


FIG5_ALPHA01 = (
    ("alpha01=pi/2", math.pi / 2),
    ("alpha01=7pi/12", 7 * math.pi / 12),
    ("alpha01=2pi/3", 2 * math.pi / 3),
    ("chsh", 3 * math.pi / 4),
)


def fig5_configs(epsilon: float = 0.0) -> list:
    """The four ``(theta=pi/2, alpha00=pi/4, alpha01)`` criteria and Mayers-Yao."""
    out = [
        criterion_from_angles(AnglePoint.canonical(math.pi / 2, math.pi / 4, a01), epsilon, name)
        for name, a01 in FIG5_ALPHA01
    ]
    out.append(mayers_yao_config(epsilon))
    return out


@dataclass
class MomentStructure:
    basis: list
    gamma: list  # gamma[u][v] = moment key
    localizers: list  # (name, local basis, matrix of MomentPolynomial)
    keys: list  # variable keys, identity excluded
    fidelity: MomentPolynomial

    @property
    def gamma_keys(self) -> set:
        return {k for row in self.gamma for k in row}

    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.keys)}


def _basis(cfg: CriterionConfig, fidelity: MomentPolynomial) -> list:
    alpha = cfg.alphabet
    a_letters = [x for x in alpha if x[0] == "A"]
    b_letters = [x for x in alpha if x[0] == "B"]
    basis = [()]
    basis += [(x,) for x in a_letters + b_letters]
    basis += [(x, y) for x, y in itertools.permutations(a_letters, 2)]
    basis += [(x, y) for x, y in itertools.permutations(b_letters, 2)]
    basis += [(x, y) for x in a_letters for y in b_letters]
    # third-order words only as far as the fidelity needs them
    third = set()
    for k in fidelity.coeffs:
        for party in "AB":
            part = tuple(x for x in k if x[0] == party)
            if len(part) == 3:
                third.add(moment_key(part))
    basis += sorted(third, key=key_order)
    return basis


def _local_basis(aux: str) -> list:
    party = aux[0]
    return [(), (f"{party}0",), (f"{party}1",), (aux,)]


def build_moment_structure(cfg: CriterionConfig) -> MomentStructure:
    """Moment-matrix and localizing-matrix layouts for ``cfg``."""
    fidelity = expand_swap_fidelity(cfg.controls, cfg.target)
    basis = _basis(cfg, fidelity)
    gamma = [[moment_key(adjoint(u) + v) for v in basis] for u in basis]
    locs = []
    for aux, xt in cfg.localizers:
        lb = _local_basis(aux)
        op = Poly.letter(aux) * xt
        mat = [[(Poly({adjoint(u): 1.0}) * op * Poly({v: 1.0})).expectation() for v in lb] for u in lb]
        locs.append((f"{aux}*xtilde", lb, mat))
    keys = set(k for row in gamma for k in row)
    for _, _, mat in locs:
        for row in mat:
            for entry in row:
                keys |= set(entry.coeffs)
    keys.discard(())
    housed = keys | {()}
    for k in fidelity.coeffs:
        if k not in housed:
            raise UnhousedMoment(word_str(k))
    return MomentStructure(basis, gamma, locs, sorted(keys, key=key_order), fidelity)


@dataclass
class Block:
    """Affine symmetric matrix ``const + sum_k y[k] * coefs[k]``."""

    name: str
    const: np.ndarray
    coefs: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def evaluate(self, y) -> np.ndarray:
        out = self.const.copy()
        for k, m in self.coefs.items():
            out += y[k] * m
        return out


@dataclass
class SdpInstance:
    """Minimize ``objective . y + objective_const`` over moment vectors ``y``.

    Constraints: every block PSD, ``equalities`` (rows ``(coef dict, rhs)``)
    and the box ``lower <= y[k] <= upper`` for each ``(k, lower, upper)`` in ``boxes``.
    """

    keys: list
    blocks: list
    equalities: list
    boxes: list
    objective: np.ndarray
    objective_const: float
    epsilon: float
    bounded: np.ndarray  # True where |y_k| <= 1 is implied by the moment matrix
    name: str = ""

    @property
    def n_vars(self) -> int:
        return len(self.keys)

    def objective_value(self, y) -> float:
        return float(self.objective @ y + self.objective_const)

    def moment_vector(self, moments) -> np.ndarray:
        get = moments if callable(moments) else moments.__getitem__
        return np.array([get(k) for k in self.keys])

    def violations(self, y, tol: float = 1e-9) -> dict:
        """Constraint violations of a moment vector (empty when feasible within tol)."""
        out = {}
        for b in self.blocks:
            m = b.evaluate(y)
            if np.abs(m - m.T).max() > tol:
                out[b.name + ":asymmetric"] = float(np.abs(m - m.T).max())
            lam = float(np.linalg.eigvalsh((m + m.T) / 2).min())
            if lam < -tol:
                out[b.name] = lam
        for i, (row, rhs) in enumerate(self.equalities):
            r = sum(c * y[k] for k, c in row.items()) - rhs
            if abs(r) > tol:
                out[f"equality{i}"] = r
        for k, lo, hi in self.boxes:
            if y[k] < lo - tol or y[k] > hi + tol:
                out[f"box:{word_str(self.keys[k])}"] = float(y[k])
        return out


def _poly_block(name: str, entries, index: dict) -> Block:
    n = len(entries)
    const = np.zeros((n, n))
    coefs: dict = {}
    for u in range(n):
        for v in range(n):
            for k, c in entries[u][v].items():
                if k == ():
                    const[u, v] += c
                else:
                    i = index[k]
                    if i not in coefs:
                        coefs[i] = np.zeros((n, n))
                    coefs[i][u, v] += c
    return Block(name, const, coefs)


def assemble_sdp(cfg: CriterionConfig, structure: Optional[MomentStructure] = None) -> SdpInstance:
    """SDP minimizing the swap fidelity over the relaxed moment set."""
    st = structure or build_moment_structure(cfg)
    index = st.index()
    housed = st.gamma_keys | {()}
    for _, _, mat in st.localizers:
        for row in mat:
            for entry in row:
                housed |= set(entry.coeffs)
    for k in st.fidelity.coeffs:
        if k not in housed:
            raise UnhousedMoment(word_str(k))

    blocks = [_poly_block("gamma", [[{k: 1.0} for k in row] for row in st.gamma], index)]
    equalities = []
    for name, _, mat in st.localizers:
        n = len(mat)
        sym = [[{} for _ in range(n)] for _ in range(n)]
        for u in range(n):
            for v in range(n):
                for k, c in mat[u][v].coeffs.items():
                    sym[u][v][k] = sym[u][v].get(k, 0.0) + 0.5 * c
                    sym[v][u][k] = sym[v][u].get(k, 0.0) + 0.5 * c
        blocks.append(_poly_block(name, sym, index))
        for u, v in itertools.combinations(range(n), 2):
            diff: dict = {}
            for k, c in mat[u][v].coeffs.items():
                diff[k] = diff.get(k, 0.0) + c
            for k, c in mat[v][u].coeffs.items():
                diff[k] = diff.get(k, 0.0) - c
            rhs = -diff.pop((), 0.0)
            row = {index[k]: c for k, c in diff.items() if abs(c) > 1e-13}
            if row:
                equalities.append((row, rhs))

    boxes = []
    for (x, y), e in sorted(cfg.ideal.items()):
        k = index[moment_key((f"A{x}", f"B{y}"))]
        if cfg.epsilon == 0.0:
            equalities.append(({k: 1.0}, e))
        else:
            boxes.append((k, e - cfg.epsilon, e + cfg.epsilon))

    c = np.zeros(len(st.keys))
    for k, v in st.fidelity.coeffs.items():
        if k != ():
            c[index[k]] += v
    gk = st.gamma_keys
    bounded = np.array([k in gk for k in st.keys])
    return SdpInstance(
        st.keys, blocks, equalities, boxes, c, st.fidelity.constant, cfg.epsilon, bounded, cfg.name
    )


def ideal_moments(cfg: CriterionConfig):
    """Moment evaluator of the ideal qubit realization of ``cfg``.

    Auxiliary letters are set to the ideal control operators, so every
    localizing matrix is PSD and the fidelity is 1.
    """
    from ..algebra import moment_evaluator
    from ..realization import build_realization
    from ..simulator import plane_observable

    if cfg.angles is not None:
        r = build_realization(cfg.angles)
        letters = r.observables()
        for aux, xt in cfg.localizers:
            own = {k: v for k, v in letters.items() if k[0] == aux[0]}
            m = np.real(xt.matrix(own))
            # normalized combination equals the ideal control operator
            letters[aux] = m / math.sqrt(np.real(np.trace(m @ m)) / 2)
        return moment_evaluator(r.state.amplitudes, letters, 2, 2)
    # five-setting Mayers-Yao: A at 0, pi/2; B at 0, pi/2, pi/4
    letters = {
        "A0": plane_observable(0.0),
        "A1": plane_observable(math.pi / 2),
        "B0": plane_observable(0.0),
        "B1": plane_observable(math.pi / 2),
        "B2": plane_observable(math.pi / 4),
    }
    return moment_evaluator(phi_plus().amplitudes, letters, 2, 2)
