"""Measurement sets, POVM shrinking, and convex-membership machinery.

The built-in set places projective measurements along the six upper-half
vertices of a regular icosahedron (standard golden-ratio coordinates).  Its
convex-decomposition family consists of every outcome relabeling of those
projective pairs padded with two zero outcomes, plus the four relabelings
of the trivial identity POVM: 6 x 12 + 4 = 76 members.

Shrinking mixes a POVM toward the trivial one built from a reference state
xi = p|0><0| + (1-p) I/2:  M_a -> eta M_a + (1-eta) Tr[xi M_a] 1.  The
largest eta keeping the shrunk POVM inside the family's convex hull is a
linear program because the shrunk POVM is affine in eta.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import SolverError, ValidationError
from .linalg import complex_matrix, hermitize, min_eig

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

#: largest feasible Bloch length along a symmetry axis through an edge
#: midpoint of the icosahedron: golden / sqrt(2 + golden)
EDGE_MIDPOINT_RADIUS = GOLDEN / math.sqrt(2.0 + GOLDEN)

MEMBERSHIP_TOL = 1e-9
STRATEGY_LIMIT = 10 ** 6


def bloch_projector(direction: Sequence[float]) -> np.ndarray:
    """Rank-1 projector (1 + n.sigma)/2 for a unit Bloch vector n."""
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise ValidationError(f"Bloch direction must be a 3-vector, got shape {n.shape}")
    nr = float(np.linalg.norm(n))
    if abs(nr - 1.0) > 1e-10:
        raise ValidationError(f"Bloch direction must be unit length, |n| = {nr:.12g}")
    M = np.eye(2, dtype=np.complex128)
    for k in range(3):
        M = M + n[k] * _PAULIS[k]
    return M / 2.0


def _bloch_of_element(M: np.ndarray) -> tuple[float, np.ndarray]:
    w = float(np.trace(M).real)
    if w < 1e-14:
        return 0.0, np.zeros(3)
    r = np.array([float(np.trace(M @ P).real) for P in _PAULIS]) / w
    return w, r


@dataclass
class Povm:
    """A qubit POVM: PSD 2x2 elements summing to the identity."""

    elements: list[np.ndarray]
    label: str = ""

    def __post_init__(self) -> None:
        checked = []
        total = np.zeros((2, 2), dtype=np.complex128)
        for k, E in enumerate(self.elements):
            E = complex_matrix(E, shape=(2, 2))
            E = hermitize(E, tol=1e-8)
            if min_eig(E) < -1e-10:
                raise ValidationError(
                    f"POVM element {k} of {self.label!r} is not PSD "
                    f"(min eigenvalue {min_eig(E):.3e})"
                )
            checked.append(E)
            total += E
        if np.max(np.abs(total - np.eye(2))) > 1e-10:
            raise ValidationError(
                f"POVM {self.label!r} does not sum to identity "
                f"(deviation {np.max(np.abs(total - np.eye(2))):.3e})"
            )
        self.elements = checked

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def padded(self, k: int) -> "Povm":
        """Same POVM with zero elements appended up to k outcomes."""
        if k < self.n_outcomes:
            raise ValidationError(
                f"cannot pad POVM with {self.n_outcomes} outcomes down to {k}"
            )
        extra = [np.zeros((2, 2), dtype=np.complex128)] * (k - self.n_outcomes)
        return Povm(self.elements + extra, label=self.label)

    def to_json(self) -> dict[str, Any]:
        elems = []
        for E in self.elements:
            w, r = _bloch_of_element(E)
            elems.append({"weight": w, "bloch": [float(x) for x in r]})
        return {"label": self.label, "elements": elems}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Povm":
        elems = []
        for cell in data.get("elements", []):
            w = float(cell["weight"])
            r = np.asarray(cell["bloch"], dtype=float)
            M = w * np.eye(2, dtype=np.complex128) / 2.0
            for k in range(3):
                M = M + w * r[k] * _PAULIS[k] / 2.0
            elems.append(M)
        return cls(elems, label=str(data.get("label", "")))


@dataclass
class MeasurementSet:
    """An ordered collection of POVMs sharing a common outcome count."""

    povms: list[Povm]
    outcomes_per_povm: int = 0

    def __post_init__(self) -> None:
        if not self.povms:
            raise ValidationError("measurement set must contain at least one POVM")
        k = max(p.n_outcomes for p in self.povms)
        k = max(k, self.outcomes_per_povm)
        self.povms = [p.padded(k) for p in self.povms]
        self.outcomes_per_povm = k

    @property
    def count(self) -> int:
        return len(self.povms)

    def to_json(self) -> dict[str, Any]:
        return {
            "outcomes_per_povm": self.outcomes_per_povm,
            "povms": [p.to_json() for p in self.povms],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "MeasurementSet":
        return cls([Povm.from_json(p) for p in data.get("povms", [])],
                   outcomes_per_povm=int(data.get("outcomes_per_povm", 0)))


@dataclass(frozen=True)
class DeterministicStrategy:
    """A fixed outcome assignment: POVM index x maps to outcome assignment[x]."""

    assignment: tuple[int, ...]
    index: int


@dataclass(frozen=True)
class ShrinkConfig:
    """Shrinking parameters: reference state xi = p|0><0| + (1-p) I/2."""

    p: float
    eta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta!r}")

    def xi_matrix(self) -> np.ndarray:
        return np.diag([(1.0 + self.p) / 2.0, (1.0 - self.p) / 2.0]).astype(np.complex128)


# ---------------------------------------------------------------------------
# the icosahedron measurement set


def icosahedron_vertices() -> np.ndarray:
    """All 12 unit vertices: cyclic coordinate shifts of (0, +-1, +-phi)."""
    base = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            base.append((0.0, s1, s2 * GOLDEN))
            base.append((s1, s2 * GOLDEN, 0.0))
            base.append((s2 * GOLDEN, 0.0, s1))
    V = np.array(base) / math.sqrt(1.0 + GOLDEN ** 2)
    return V


def upper_half_vertices() -> np.ndarray:
    """One representative per antipodal pair: z > 0, ties broken by y > 0."""
    V = icosahedron_vertices()
    keep = []
    for v in V:
        if v[2] > 1e-12 or (abs(v[2]) <= 1e-12 and v[1] > 0):
            keep.append(v)
    out = np.array(keep)
    if out.shape != (6, 3):
        raise SolverError(f"expected 6 upper-half vertices, found {out.shape[0]}")
    return out


def icosahedron_set() -> MeasurementSet:
    """The six active projective POVMs, each padded to four outcomes."""
    povms = []
    for i, v in enumerate(upper_half_vertices()):
        P_plus = bloch_projector(v)
        P_minus = np.eye(2, dtype=np.complex128) - P_plus
        povms.append(Povm([P_plus, P_minus], label=f"ico-{i}").padded(4))
    return MeasurementSet(povms, outcomes_per_povm=4)


def icosahedron_family() -> MeasurementSet:
    """The 76-member decomposition family: all relabelings of the active set.

    Each of the 6 projective pairs contributes the 12 distinct arrangements
    of (P+, P-, 0, 0) over four outcome slots; the trivial identity POVM
    contributes its 4 arrangements of (1, 0, 0, 0).
    """
    zero = np.zeros((2, 2), dtype=np.complex128)
    members: list[Povm] = []
    for i, v in enumerate(upper_half_vertices()):
        P_plus = bloch_projector(v)
        P_minus = np.eye(2, dtype=np.complex128) - P_plus
        seen: set[tuple[int, ...]] = set()
        for perm in itertools.permutations((0, 1, 2, 2)):
            if perm in seen:
                continue
            seen.add(perm)
            ops = {0: P_plus, 1: P_minus, 2: zero}
            members.append(
                Povm([ops[j] for j in perm], label=f"ico-{i}-perm{len(seen)}")
            )
    for slot in range(4):
        elems = [zero.copy() for _ in range(4)]
        elems[slot] = np.eye(2, dtype=np.complex128)
        members.append(Povm(elems, label=f"trivial-{slot}"))
    if len(members) != 76:
        raise SolverError(f"expected 76 family members, built {len(members)}")
    return MeasurementSet(members, outcomes_per_povm=4)


# ---------------------------------------------------------------------------
# deterministic strategies


def enumerate_strategies(ms: MeasurementSet) -> list[DeterministicStrategy]:
    """All outcome assignments over the nonzero outcomes of each POVM.

    Outcomes whose operator is exactly zero are skipped: a strategy choosing
    one would force its hidden-state contribution to vanish, so the pruned
    enumeration spans the same feasible set with exponentially fewer terms.
    """
    choices: list[list[int]] = []
    for p in ms.povms:
        live = [a for a, E in enumerate(p.elements) if float(np.max(np.abs(E))) > 0.0]
        if not live:
            raise ValidationError(f"POVM {p.label!r} has no nonzero outcome")
        choices.append(live)
    total = 1
    for c in choices:
        total *= len(c)
    if total > STRATEGY_LIMIT:
        raise ValidationError(
            f"deterministic strategy count {total} exceeds limit {STRATEGY_LIMIT}"
        )
    out = []
    for idx, combo in enumerate(itertools.product(*choices)):
        out.append(DeterministicStrategy(assignment=tuple(combo), index=idx))
    return out


# ---------------------------------------------------------------------------
# shrinking


def shrink_povm(m: Povm, cfg: ShrinkConfig) -> Povm:
    """Mix each element toward the trivial POVM defined by the reference state."""
    xi = cfg.xi_matrix()
    eye = np.eye(2, dtype=np.complex128)
    elems = []
    for E in m.elements:
        c = float(np.trace(xi @ E).real)
        elems.append(cfg.eta * E + (1.0 - cfg.eta) * c * eye)
    return Povm(elems, label=f"{m.label}|eta={cfg.eta:g},p={cfg.p:g}")


def _element_rows(E: np.ndarray) -> list[float]:
    return [E[0, 0].real, E[1, 1].real, E[0, 1].real, E[0, 1].imag]


def _linprog_eq(cost: np.ndarray, A_eq: np.ndarray, b_eq: np.ndarray,
                bounds: list[tuple[float, float | None]]):
    """HiGHS equality-form solve with a presolve-off retry.

    Presolve can misreport feasible systems as infeasible when a POVM element
    has near-zero norm (~1e-9, e.g. the closure outcome of a refined
    candidate); the unpresolved solve decides those correctly.
    """
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                      method="highs", options={"presolve": False})
    return res


def _family_matrix(family: MeasurementSet) -> np.ndarray:
    """Column x = stacked real coordinates of family member x's elements."""
    k = family.outcomes_per_povm
    cols = []
    for p in family.povms:
        col: list[float] = []
        for a in range(k):
            col.extend(_element_rows(p.elements[a]))
        cols.append(col)
    return np.array(cols).T  # (4k, n)


def _target_vector(target: Povm, k: int) -> np.ndarray:
    t = target.padded(k)
    vec: list[float] = []
    for a in range(k):
        vec.extend(_element_rows(t.elements[a]))
    return np.array(vec)


def membership_lp(target: Povm, family: MeasurementSet) -> tuple[bool, np.ndarray | None]:
    """Decide whether target is a convex combination of the family members.

    Solves a least-absolute-deviation program: minimize the L1 residual of
    the element-matching equations over the weight simplex.  Feasibility
    means the optimal residual vanishes (within tolerance); returned weights
    are re-verified by direct substitution.
    """
    k = max(family.outcomes_per_povm, target.n_outcomes)
    fam = family if family.outcomes_per_povm == k else MeasurementSet(
        family.povms, outcomes_per_povm=k)
    A = _family_matrix(fam)          # (4k, n)
    b = _target_vector(target, k)
    n = A.shape[1]
    rows = A.shape[0]
    # variables: weights (n), residual split u, v (rows each)
    A_eq = np.zeros((rows + 1, n + 2 * rows))
    A_eq[:rows, :n] = A
    A_eq[:rows, n:n + rows] = -np.eye(rows)
    A_eq[:rows, n + rows:] = np.eye(rows)
    A_eq[rows, :n] = 1.0
    b_eq = np.concatenate([b, [1.0]])
    cost = np.concatenate([np.zeros(n), np.ones(2 * rows)])
    res = _linprog_eq(cost, A_eq, b_eq, [(0, None)] * (n + 2 * rows))
    if res.status != 0:
        raise SolverError(f"membership LP failed: {res.message} (status {res.status})")
    if res.fun > MEMBERSHIP_TOL:
        return False, None
    weights = np.clip(res.x[:n], 0.0, None)
    s = weights.sum()
    if s <= 0:
        raise SolverError("membership LP returned an empty weight vector")
    weights = weights / s
    recon = A @ weights
    if float(np.max(np.abs(recon - b))) > 2.0 * MEMBERSHIP_TOL:
        raise SolverError(
            "membership LP weights fail substitution check "
            f"(residual {float(np.max(np.abs(recon - b))):.3e})"
        )
    return True, weights


def max_shrink_eta(target: Povm, family: MeasurementSet, p: float,
                   method: str = "lp", tol: float = 1e-4) -> float:
    """Largest eta keeping the shrunk target inside the family's hull.

    The shrunk POVM is affine in eta, so the exact maximum is itself a
    linear program ("lp" method).  The "bisect" method brackets the same
    value through repeated membership tests; it exists as an independent
    cross-check of the direct program.
    """
    if method == "bisect":
        return _max_eta_bisect(target, family, p, tol)
    if method != "lp":
        raise ValidationError(f"unknown method {method!r}")
    k = max(family.outcomes_per_povm, target.n_outcomes)
    fam = family if family.outcomes_per_povm == k else MeasurementSet(
        family.povms, outcomes_per_povm=k)
    A = _family_matrix(fam)
    t = target.padded(k)
    xi = ShrinkConfig(p, 1.0).xi_matrix()
    eye = np.eye(2, dtype=np.complex128)
    base: list[float] = []
    slope: list[float] = []
    for a in range(k):
        E = t.elements[a]
        c = float(np.trace(xi @ E).real)
        base.extend(_element_rows(c * eye))
        slope.extend(_element_rows(E - c * eye))
    base_v = np.array(base)
    slope_v = np.array(slope)
    rows, n = A.shape
    # variables: weights (n), eta (1); constraints A w - eta * slope = base
    A_eq = np.zeros((rows + 1, n + 1))
    A_eq[:rows, :n] = A
    A_eq[:rows, n] = -slope_v
    A_eq[rows, :n] = 1.0
    b_eq = np.concatenate([base_v, [1.0]])
    cost = np.zeros(n + 1)
    cost[n] = -1.0
    res = _linprog_eq(cost, A_eq, b_eq, [(0, None)] * n + [(0.0, 1.0)])
    if res.status == 2:
        raise SolverError(
            "shrinking LP infeasible even at eta = 0; family lacks the trivial POVM"
        )
    if res.status != 0:
        raise SolverError(f"shrinking LP failed: {res.message} (status {res.status})")
    return float(res.x[n])


def _max_eta_bisect(target: Povm, family: MeasurementSet, p: float, tol: float) -> float:
    def feasible(eta: float) -> bool:
        shrunk = shrink_povm(target.padded(max(4, target.n_outcomes)),
                             ShrinkConfig(p, eta))
        ok, _ = membership_lp(shrunk, family)
        return ok

    lo, hi = 0.0, 1.0
    if feasible(1.0):
        return 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# shrinking-factor estimation over a net of extremal POVMs


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform unit vectors via the golden-angle spiral."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _rotation_to(u: np.ndarray) -> np.ndarray:
    """A rotation matrix sending the z axis to the unit vector u."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, u))
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(z, u)
    s = float(np.linalg.norm(axis))
    axis = axis / s
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def _rot_z(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


_TETRA_REF = np.array(
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
) / math.sqrt(3.0)

_TRINE_REF = np.array(
    [[1.0, 0.0, 0.0], [-0.5, math.sqrt(3.0) / 2.0, 0.0], [-0.5, -math.sqrt(3.0) / 2.0, 0.0]]
)


def rank_one_povm(directions: np.ndarray, weights: Sequence[float], label: str = "") -> Povm:
    """POVM with elements w_i (1 + n_i.sigma)/2; completeness is validated."""
    elems = [float(w) * bloch_projector(n) for w, n in zip(weights, directions)]
    return Povm(elems, label=label)


def _net_candidates(net_resolution: float) -> list[Povm]:
    d = float(net_resolution)
    if d <= 0:
        raise ValidationError(f"net_resolution must be positive, got {net_resolution!r}")
    n_proj = max(24, int(math.ceil((2.6 / d) ** 2)))
    n_axes = max(12, int(math.ceil((2.0 / d) ** 2 / 2)))
    n_az = max(4, int(math.ceil((2.0 * math.pi / 3.0) / d)))
    cands: list[Povm] = []
    for j, v in enumerate(fibonacci_sphere(n_proj)):
        if v[2] < 0:
            continue  # antipodal partner already covered via relabelings
        P = bloch_projector(v)
        cands.append(Povm([P, np.eye(2, dtype=np.complex128) - P],
                          label=f"net-proj-{j}").padded(4))
    for j, axis in enumerate(fibonacci_sphere(n_axes)):
        R0 = _rotation_to(axis)
        for m in range(n_az):
            R = R0 @ _rot_z(2.0 * math.pi / 3.0 * m / n_az)
            tet = _TETRA_REF @ R.T
            cands.append(rank_one_povm(tet, [0.5] * 4, label=f"net-tet-{j}-{m}"))
            tri = _TRINE_REF @ R.T
            cands.append(rank_one_povm(tri, [2.0 / 3.0] * 3,
                                       label=f"net-tri-{j}-{m}").padded(4))
    return cands


def _povm_to_params(m: Povm) -> np.ndarray:
    """Free parameters (3 directions + 3 weights) of a 4-outcome rank-1 POVM."""
    x = []
    weights = []
    for E in m.padded(4).elements[:3]:
        w, r = _bloch_of_element(E)
        nr = float(np.linalg.norm(r))
        if nr > 1e-9:
            r = r / nr
            th = math.acos(max(-1.0, min(1.0, r[2])))
            ph = math.atan2(r[1], r[0])
        else:
            th, ph = 0.0, 0.0
        x.extend([th, ph])
        weights.append(w)
    return np.array(x + weights)


def _params_to_povm(x: np.ndarray) -> tuple[Povm | None, float]:
    """Rebuild a POVM from parameters; returns (povm, constraint violation)."""
    dirs = []
    for i in range(3):
        th, ph = x[2 * i], x[2 * i + 1]
        dirs.append([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    w = np.asarray(x[6:9], dtype=float)
    viol = float(np.sum(np.maximum(0.0, -w)) + max(0.0, np.sum(w) - 2.0))
    if viol > 0:
        return None, viol
    elems = [float(w[i]) * bloch_projector(dirs[i]) for i in range(3)]
    last = np.eye(2, dtype=np.complex128) - sum(elems)
    lam = min_eig(last)
    if lam < -1e-9:
        return None, float(-lam)
    if lam < 0:
        # lift the spectrum and renormalize the whole POVM; the perturbation
        # is below 1e-9 and keeps every element PSD with an exact identity sum
        lift = -lam
        scale = 1.0 / (1.0 + 2.0 * lift)
        elems = [E * scale for E in elems]
        last = (last + 2.0 * lift * np.eye(2)) * scale
    try:
        return Povm(elems + [last], label="refine"), 0.0
    except ValidationError:
        return None, 1e-9


def shrinking_factor_estimate(
    family: MeasurementSet,
    p: float,
    net_resolution: float = 0.2,
    slack_constant: float = 2.0,
    refine: bool = True,
    extra_candidates: Iterable[Povm] = (),
    candidates: Iterable[Povm] | None = None,
) -> tuple[float, float]:
    """Estimate the family's shrinking factor at reference parameter p.

    Scans projective, trine and tetrahedral rank-1 POVMs over a
    deterministic net, takes the minimum of each candidate's exact maximal
    feasible eta, then locally polishes the worst candidate over the
    (directions, weights) parameter space.  Returns
    (eta_lower_estimate, eta_upper_bound) where the lower value subtracts a
    continuity slack slack_constant * net_resolution; the upper value is a
    true upper bound on the shrinking factor.  Passing ``candidates``
    replaces the built-in net entirely.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p!r}")
    if candidates is not None:
        cands = list(candidates)
    else:
        cands = _net_candidates(net_resolution)
    cands.extend(extra_candidates)
    best_eta = 1.0
    best: Povm | None = None
    for cand in cands:
        eta = max_shrink_eta(cand, family, p)
        if eta < best_eta:
            best_eta, best = eta, cand
    if refine and best is not None:
        x0 = _povm_to_params(best)

        def objective(x: np.ndarray) -> float:
            povm, viol = _params_to_povm(x)
            if povm is None:
                return best_eta + 1.0 + 10.0 * viol
            return max_shrink_eta(povm, family, p)

        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": 400, "xatol": 1e-3, "fatol": 1e-4})
        if res.fun < best_eta:
            best_eta = float(res.fun)
            povm, _ = _params_to_povm(res.x)
            if povm is not None:
                best = povm
    lower = max(0.0, best_eta - slack_constant * net_resolution)
    return lower, best_eta


def shrinking_profile(
    family: MeasurementSet,
    p_values: Sequence[float],
    net_resolution: float = 0.2,
    slack_constant: float = 2.0,
) -> list[dict[str, float]]:
    """Shrinking estimates across several p values with a shared candidate pool.

    Each p gets the full net sweep plus every minimizer found at the other
    p values, which keeps the profile consistent (the same worst-case POVM
    is offered everywhere).
    """
    cands = _net_candidates(net_resolution)
    per_p: list[tuple[float, Povm | None, float]] = []
    for p in p_values:
        best_eta, best = 1.0, None
        for cand in cands:
            eta = max_shrink_eta(cand, family, p)
            if eta < best_eta:
                best_eta, best = eta, cand
        if best is not None:
            x0 = _povm_to_params(best)

            def objective(x: np.ndarray, _p=p, _b=best_eta) -> float:
                povm, viol = _params_to_povm(x)
                if povm is None:
                    return _b + 1.0 + 10.0 * viol
                return max_shrink_eta(povm, family, _p)

            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"maxfev": 400, "xatol": 1e-3, "fatol": 1e-4})
            if res.fun < best_eta:
                povm, _ = _params_to_povm(res.x)
                if povm is not None:
                    best_eta, best = float(res.fun), povm
        per_p.append((p, best, best_eta))
    pool = [b for _, b, _ in per_p if b is not None]
    out = []
    for p, _, best_eta in per_p:
        for cand in pool:
            best_eta = min(best_eta, max_shrink_eta(cand, family, p))
        lower = max(0.0, best_eta - slack_constant * net_resolution)
        out.append({"p": p, "eta_lower_estimate": lower, "eta_upper_bound": best_eta})
    return out


# ---------------------------------------------------------------------------
# published reference values


#: published lower bounds on the shrinking factor of all qubit POVMs with
#: respect to the icosahedron family, indexed by the reference parameter p
SHRINKING_TABLE = {
    0.0: 0.67, 0.1: 0.67, 0.2: 0.66, 0.3: 0.66, 0.4: 0.66,
    0.5: 0.66, 0.6: 0.62, 0.7: 0.56, 0.8: 0.47, 0.9: 0.32,
}


def table_eta(p: float) -> float:
    """Conservative published shrinking bound for arbitrary p in [0, 0.9].

    The table value at the next tabulated p at or above the query is valid
    because the shrinking factor is non-increasing in p.
    """
    if not 0.0 <= p <= 0.9 + 1e-12:
        raise ValidationError(f"no tabulated shrinking bound for p = {p!r}")
    for key in sorted(SHRINKING_TABLE):
        if p <= key + 1e-12:
            return SHRINKING_TABLE[key]
    raise ValidationError(f"no tabulated shrinking bound for p = {p!r}")
