"""Dense-matrix core: economical SVD via one-sided Jacobi rotations, rank
truncation, Moore-Penrose pseudo-inverse, the induced L2 operator norm, and
parameter/constraint counting helpers.

All routines work on plain 2-D float64 numpy arrays.  Matrices must be finite;
NaN/Inf anywhere is rejected up front.  Every function here is pure and
deterministic: the same input always produces bit-identical output.
"""

import csv

import numpy as np

from .errors import InvalidInputError, NumericalFailureError

EPS = float(np.finfo(np.float64).eps)

# One-sided Jacobi stops once the largest normalized off-diagonal dot product
# seen in a full sweep drops below this; the hard sweep cap turns stagnation
# into an explicit failure instead of a silent bad result.
SWEEP_TOL = 1e-14
MAX_SWEEPS = 60

# Rows whose squared norm falls below this (relative to a max-abs-scaled
# matrix) are rounding residue: zeroing them keeps every surviving square
# in the normal float range, where dot products retain full precision.
_DEFLATE_FLOOR_SQ = 1e-280


def as_matrix(a):
    """Validate *a* as a finite 2-D float64 matrix and return it as ndarray."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    m, n = arr.shape
    if m < 1 or n < 1:
        raise InvalidInputError(f"matrix needs at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix contains NaN or Inf entries")
    return arr


def default_rank_tol(m, n):
    """Standard numerical-rank cutoff factor for an m-by-n matrix."""
    return EPS * max(m, n)


class SvdFactors:
    """Economical SVD triple: ``a = u @ diag(s) @ v.T``.

    ``u`` is m-by-r and ``v`` is n-by-r, both with orthonormal columns;
    ``s`` holds the r singular values sorted descending.  r equals
    min(m, n) for a full decomposition and may be smaller after
    truncation.
    """

    __slots__ = ("u", "s", "v")

    def __init__(self, u, s, v):
        u = np.asarray(u, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if u.ndim != 2 or v.ndim != 2 or s.ndim != 1:
            raise InvalidInputError("factor shapes are inconsistent")
        r = s.shape[0]
        if u.shape[1] != r or v.shape[1] != r:
            raise InvalidInputError(
                f"factor shapes are inconsistent: u {u.shape}, s ({r},), v {v.shape}"
            )
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(s)) and np.all(np.isfinite(v))):
            raise InvalidInputError("factors contain NaN or Inf entries")
        if np.any(s < 0.0) or np.any(s[1:] > s[:-1]):
            raise InvalidInputError("singular values must be non-negative and descending")
        self.u = u
        self.s = s
        self.v = v

    @property
    def rank(self):
        """Number of retained singular values (r)."""
        return self.s.shape[0]

    @property
    def shape(self):
        """Shape (m, n) of the matrix the factors reconstruct."""
        return (self.u.shape[0], self.v.shape[0])


def _pair_schedule(k):
    """Round-robin tournament rounds covering every index pair once per sweep.

    Each round is a pair of index arrays (ii, jj) with all entries distinct,
    so the rotations of one round act on disjoint rows and commute.
    """
    slots = k if k % 2 == 0 else k + 1
    players = list(range(slots))
    rounds = []
    for _ in range(slots - 1):
        ii, jj = [], []
        for idx in range(slots // 2):
            a, b = players[idx], players[slots - 1 - idx]
            if a < k and b < k:
                ii.append(min(a, b))
                jj.append(max(a, b))
        rounds.append((np.array(ii, dtype=np.intp), np.array(jj, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _orthogonalize_rows(b):
    """Drive the rows of *b* (p-by-q, p <= q) to mutual orthogonality.

    Returns ``(rot, w, sweeps)`` with ``w = rot @ b`` and ``rot`` the
    accumulated product of plane rotations (p-by-p, exactly orthogonal up
    to rounding).  Raises NumericalFailureError when the sweep cap is hit.
    """
    p = b.shape[0]
    w = b.copy()
    rot = np.eye(p)
    if p < 2:
        return rot, w, 0

    def deflate_residue():
        norms_sq = np.einsum("ij,ij->i", w, w)
        junk = (norms_sq > 0.0) & (norms_sq < _DEFLATE_FLOOR_SQ)
        if np.any(junk):
            w[junk] = 0.0

    deflate_residue()
    schedule = _pair_schedule(p)
    for sweep in range(1, MAX_SWEEPS + 1):
        off = 0.0
        for ii, jj in schedule:
            wi = w[ii]
            wj = w[jj]
            alpha = np.einsum("ij,ij->i", wi, wi)
            beta = np.einsum("ij,ij->i", wj, wj)
            gamma = np.einsum("ij,ij->i", wi, wj)
            denom = np.sqrt(alpha * beta)
            live = denom > 0.0
            if np.any(live):
                off = max(off, float(np.max(np.abs(gamma[live]) / denom[live])))
            spin = live & (gamma != 0.0)
            if not np.any(spin):
                continue
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                zeta = np.where(spin, (beta - alpha) / np.where(spin, 2.0 * gamma, 1.0), 0.0)
                # hypot keeps the tangent finite even for extreme norm ratios
                t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            t = np.where(spin, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            cc = c[:, None]
            ss = s[:, None]
            w[ii] = cc * wi - ss * wj
            w[jj] = ss * wi + cc * wj
            ri = rot[ii]
            rj = rot[jj]
            rot[ii] = cc * ri - ss * rj
            rot[jj] = ss * ri + cc * rj
        deflate_residue()
        if off < SWEEP_TOL:
            return rot, w, sweep
    raise NumericalFailureError(
        f"Jacobi sweeps did not converge within {MAX_SWEEPS} sweeps "
        f"(normalized off-diagonal residual {off:.3e})",
        residual=off,
    )


def _fill_orthonormal_columns(q_mat, missing):
    """Fill zero columns of *q_mat* with unit vectors orthogonal to the rest.

    Deterministic: each gap takes the coordinate direction with the largest
    residual after projecting out all current columns (first index wins ties).
    """
    d = q_mat.shape[0]
    for k in missing:
        residual_sq = 1.0 - np.einsum("ij,ij->i", q_mat, q_mat)
        pick = int(np.argmax(residual_sq))
        cand = np.zeros(d)
        cand[pick] = 1.0
        for _ in range(2):  # double Gram-Schmidt pass for clean orthogonality
            cand -= q_mat @ (q_mat.T @ cand)
        cand /= np.sqrt(cand @ cand)
        q_mat[:, k] = cand


def _apply_sign_convention(u, v):
    """Flip each singular pair so v's largest-magnitude entry is positive."""
    for k in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, k])))
        if v[idx, k] < 0.0:
            v[:, k] = -v[:, k]
            u[:, k] = -u[:, k]


def svd_decompose(a):
    """Economical SVD of *a* computed with one-sided Jacobi rotations.

    The rotations orthogonalize the min(m, n) rows of the wide orientation
    of *a* (the transpose is decomposed when m > n), so each rotated vector
    lives in the wider dimension.  Singular values come back sorted
    descending; signs follow a fixed convention (largest-magnitude entry of
    each column of v is positive) so results are reproducible byte for byte.
    """
    a = as_matrix(a)
    m, n = a.shape
    r = min(m, n)
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return SvdFactors(np.eye(m, r), np.zeros(r), np.eye(n, r))

    transposed = m > n
    b = (a.T if transposed else a) / scale
    rot, w, _ = _orthogonalize_rows(b)

    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    alive = norms > 0.0
    # Rotations between a dominant row and cancellation residue can leave a
    # denormal-norm row still parallel to a kept direction; deflate such rows
    # (their singular value sits far below the noise floor of the others).
    if np.any(alive):
        directions = np.zeros_like(w)
        directions[alive] = w[alive] / norms[alive, None]
        gram = directions @ directions.T
        np.fill_diagonal(gram, 0.0)
        if np.max(np.abs(gram)) > 1e-8:
            accepted = []
            for k in np.argsort(-norms, kind="stable"):
                if not alive[k]:
                    continue
                if accepted and np.max(np.abs(gram[k, accepted])) > 1e-8:
                    alive[k] = False
                    norms[k] = 0.0
                else:
                    accepted.append(k)

    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    w = w[order]
    alive = alive[order]
    small = rot.T[:, order]

    big = np.zeros((b.shape[1], b.shape[0]))
    big[:, alive] = (w[alive] / norms[alive, None]).T
    _fill_orthonormal_columns(big, np.nonzero(~alive)[0])

    if transposed:
        u, v = big, small
    else:
        u, v = small, big
    _apply_sign_convention(u, v)
    return SvdFactors(u, norms * scale, v)


def reconstruct(f):
    """Multiply the factors back together: ``u @ diag(s) @ v.T``."""
    if not isinstance(f, SvdFactors):
        raise InvalidInputError("reconstruct expects SvdFactors")
    return f.u @ (f.s[:, None] * f.v.T)


def truncate(f, k):
    """Keep the k largest singular values and matching columns of u and v.

    The reconstruction of the result is the best rank-k approximation of
    the original matrix in the L2 operator norm.
    """
    if not isinstance(f, SvdFactors):
        raise InvalidInputError("truncate expects SvdFactors")
    k = int(k)
    if k < 0 or k > f.rank:
        raise InvalidInputError(f"truncation rank {k} outside [0, {f.rank}]")
    return SvdFactors(f.u[:, :k], f.s[:k], f.v[:, :k])


def pseudo_inverse_factors(f, rank_tol=None):
    """Moore-Penrose pseudo-inverse assembled from existing SVD factors."""
    m, n = f.shape
    if rank_tol is None:
        rank_tol = default_rank_tol(m, n)
    if rank_tol < 0.0:
        raise InvalidInputError("rank_tol must be non-negative")
    s_max = float(f.s[0]) if f.rank > 0 else 0.0
    keep = f.s > rank_tol * s_max if s_max > 0.0 else np.zeros(f.rank, dtype=bool)
    if not np.any(keep):
        return np.zeros((n, m))
    return (f.v[:, keep] / f.s[keep]) @ f.u[:, keep].T


def pseudo_inverse(a, rank_tol=None):
    """Moore-Penrose pseudo-inverse of *a* via SVD.

    Singular values at or below ``rank_tol * s_max`` are treated as zero
    rather than inverted; the default tolerance is the standard
    ``eps * max(m, n)`` heuristic.
    """
    return pseudo_inverse_factors(svd_decompose(a), rank_tol)


def operator_norm_l2(a):
    """Induced L2 norm of *a*: its largest singular value."""
    f = svd_decompose(a)
    return float(f.s[0]) if f.rank > 0 else 0.0


def numerical_rank(f, rank_tol=None):
    """Count singular values strictly above ``rank_tol * s_max``."""
    if not isinstance(f, SvdFactors):
        raise InvalidInputError("numerical_rank expects SvdFactors")
    if rank_tol is None:
        rank_tol = default_rank_tol(*f.shape)
    if rank_tol < 0.0:
        raise InvalidInputError("rank_tol must be non-negative")
    if f.rank == 0:
        return 0
    s_max = float(f.s[0])
    if s_max == 0.0:
        return 0
    return int(np.count_nonzero(f.s > rank_tol * s_max))


def svd_free_param_count(m, n):
    """Free parameters of an economical m-by-n SVD; always equals m*n.

    The raw (m + n + 1) * r parameter count of the factor triple, minus the
    r unit-norm and r*(r-1) orthogonality constraints on each of the two
    orthonormal factors' shared column count r = min(m, n).
    """
    m = int(m)
    n = int(n)
    if m < 1 or n < 1:
        raise InvalidInputError("dimensions must be positive")
    r = min(m, n)
    return (m + n + 1) * r - r * r - r


def orthogonality_gap_fraction(r, m, q):
    """Share of orthogonality constraints among the parameters of a width-r map.

    For output dimension m and input dimension q*m (q >= 1), returns the
    exact fraction (r*r + r) / ((m + q*m + 1) * r) together with its
    large-problem approximation r / ((1 + q) * m).
    """
    r = int(r)
    m = int(m)
    q = float(q)
    if r < 1 or m < 1:
        raise InvalidInputError("r and m must be positive")
    if q < 1.0:
        raise InvalidInputError("q must be >= 1")
    exact = (r * r + r) / ((m + q * m + 1.0) * r)
    approx = r / ((1.0 + q) * m)
    return exact, approx


def load_matrix_csv(path):
    """Read a matrix from CSV: one row per line, no header, finite floats.

    Ragged rows, empty files, unparsable cells, and non-finite values all
    raise InvalidInputError.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record:
                continue
            try:
                row = [float(cell) for cell in record]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: unparsable cell ({exc})") from exc
            rows.append(row)
    if not rows:
        raise InvalidInputError(f"{path}: no rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise InvalidInputError(f"{path}:{lineno}: ragged row (expected {width} cells)")
    return as_matrix(rows)


def save_matrix_csv(path, a):
    """Write a matrix as CSV with 17 significant digits (round-trip exact)."""
    a = as_matrix(a)
    with open(path, "w", newline="") as fh:
        for row in a:
            fh.write(",".join(format(x, ".17g") for x in row))
            fh.write("\n")
