"""Dense simplex engine for the l1-minimisation linear programs.

The problem family solved here is

    minimise ||beta||_1  subject to  ||a @ beta - b||_inf <= lam,

with ``a`` symmetric, rewritten with the split beta = u - v, u >= 0, v >= 0
and one slack per constraint row:

    a @ (u - v) + s = b + lam,    0 <= s <= 2 * lam.

The fast path is a *revised* bounded simplex in product form: the basis
inverse is never stored explicitly but kept as a chain of elementary
eta operations (plus row-sign flips from the bounded-slack updates), so a
pivot costs O(chain length x d) instead of the O(d^2) of an explicit
inverse update.  The chains stay short because solutions of these programs
are sparse.  Symmetry of ``a`` means every needed matrix slice is a
contiguous row.  On top of that sits column sifting: only a working set of
structural columns is priced, starting from the rows violated at beta = 0
and growing until the full dual certificate ``|a @ y|_inf <= 1`` holds,
which certifies optimality over all columns.

Two jitted kernels drive the solve:

* ``_dual_phase`` -- bounded dual simplex from a dual-feasible state.
  Leaving row: largest bound violation, ties broken by the lowest row
  index.  Entering column: smallest reduced-cost ratio, ties broken by the
  lowest column index (u block, then v block, then slacks).

* ``_primal_phase`` -- bounded primal simplex from a primal-feasible state,
  used after the working set grows (the new columns arrive with negative
  reduced costs).  Entering column: most negative reduced cost, ties broken
  by the lowest column index.  Ratio test: smallest step, basis changes
  preferred over bound flips, ties broken by the lowest row index.

Pivot candidates with magnitude <= 1e-10 are treated as zero.  Everything
is deterministic: identical inputs produce identical pivot sequences, hence
bit-identical solutions, regardless of thread counts.

``bland_two_phase_solve`` is the authoritative fallback: a textbook
two-phase primal simplex with Bland's rule (lowest-index entering column;
smallest ratio, ties broken by the lowest row index) on the full
formulation with both constraint blocks written out.  It is slower but
carries Bland's termination guarantee, re-solves anything the fast path
gives up on, and confirms every infeasibility verdict.
"""

from __future__ import annotations

import numpy as np
from numba import njit

#: Pivot entries at or below this magnitude are treated as zero.
ZERO_TOL = 1e-10
#: Bound violations at or below this magnitude count as feasible.
FEAS_TOL = 1e-9
#: Reduced costs above minus this threshold count as optimal.
RCOST_TOL = 1e-9
#: Slack allowed on the dual certificate |a @ y|_inf <= 1 during sifting.
CERT_TOL = 1e-9

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_PIVOT_LIMIT = 2
STATUS_UNBOUNDED = 3
#: numerical breakdown (pricing and pivot column disagree near the zero
#: tolerance); the caller re-solves with the guaranteed fallback
STATUS_BREAKDOWN = 4
#: the fast path finished but its solution misses the residual bound
STATUS_RESIDUAL = 5
#: internal to the sifting loop: the eta chain hit capacity and the solve
#: restarts from the all-slack basis with the working set kept
STATUS_REFRESH = 6


def default_pivot_cap(d: int) -> int:
    """Default pivot budget for a d-dimensional problem: ``100 * (2d + 1)``."""
    return 100 * (2 * d + 1)


# ---------------------------------------------------------------------------
# revised bounded simplex kernels, product-form basis inverse
#
# Shared state (stored space: every nonbasic variable sits at zero; a
# variable flagged in ``flipped`` is stored as ``ub - value``):
#   a        d x d symmetric constraint matrix (read-only)
#   xb       d     basic values
#   basis    d     variable id per row; ids: u_j = j, v_j = d + j, s_i = 2d + i
#   in_basis 3d    membership flags
#   flipped  3d    bound-flip flags (only slacks ever flip)
#   rc       3d    reduced costs of active columns (u/v outside the working
#                  set are untracked and must not be read)
#   work     k     sorted structural working set
#   active   d     membership flags for the working set
#   slack_ub       scalar 2 * lam
#
# The basis inverse is the operator chain  M = O_n ... O_1  applied with
# `_ftran_ops` (columns, forward order) and `_btran_ops` (rows, reverse
# order).  Each operation is either an elementary eta from a pivot (kind 0:
# row, pivot value, transformed entering column) or a row negation from a
# basic-slack bound flip (kind 1).  `nops` entries of the op arrays are
# valid; capacity overflow triggers a restart from the all-slack basis.
# ---------------------------------------------------------------------------

# allow fused multiply-add and reassociation so the d-length reductions can
# vectorise; division and NaN semantics stay exact
_FASTMATH = {"contract", "reassoc"}


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _ftran_ops(v, op_kind, op_row, op_piv, eta_col, nops):  # pragma: no cover
    """In place v <- M v: apply the operator chain in forward order."""
    for k in range(nops):
        r = op_row[k]
        if op_kind[k] == 1:
            v[r] = -v[r]
        else:
            vr = v[r] / op_piv[k]
            if vr != 0.0:
                col = eta_col[k]
                for i in range(v.size):
                    v[i] -= col[i] * vr
            v[r] = vr


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _btran_ops(w, op_kind, op_row, op_piv, eta_col, nops):  # pragma: no cover
    """In place w <- w M: apply the operator chain in reverse order."""
    for k in range(nops - 1, -1, -1):
        r = op_row[k]
        if op_kind[k] == 1:
            w[r] = -w[r]
        else:
            col = eta_col[k]
            s = 0.0
            for i in range(w.size):
                s += w[i] * col[i]
            w[r] = (w[r] - (s - w[r] * col[r])) / op_piv[k]


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _load_column(a, q, flipped, out):  # pragma: no cover - jitted
    """Write the stored-space constraint column of variable q into out."""
    d = a.shape[0]
    if q < d:
        for i in range(d):
            out[i] = a[q, i]
    elif q < 2 * d:
        for i in range(d):
            out[i] = -a[q - d, i]
    else:
        for i in range(d):
            out[i] = 0.0
        out[q - 2 * d] = -1.0 if flipped[q] == 1 else 1.0


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _push_eta(op_kind, op_row, op_piv, eta_col, nops, r, tcol):  # pragma: no cover
    op_kind[nops] = 0
    op_row[nops] = r
    op_piv[nops] = tcol[r]
    for i in range(tcol.size):
        eta_col[nops, i] = tcol[i]
    return nops + 1


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _dual_phase(a, a_work, op_kind, op_row, op_piv, eta_col, nops, wbuf, tbuf,
                xb, basis, in_basis, flipped, rc, work,
                slack_ub, ztol, feas_tol, max_pivots):  # pragma: no cover
    """Repair primal bound violations while keeping reduced costs >= 0.

    ``a_work`` holds the working-set rows of ``a`` contiguously so pricing
    is a single matrix-vector product.  Returns ``(status, pivots,
    stuck_row, nops)``.
    """
    d = a.shape[0]
    nwork = work.size
    cap_ops = op_kind.size
    banned = np.zeros(3 * d, dtype=np.int64)
    stamp = 0
    pivots = 0
    while True:
        # leaving row: worst violation, ties -> lowest row
        r = -1
        worst = 0.0
        above = False
        for i in range(d):
            val = xb[i]
            if val < -feas_tol:
                if -val > worst:
                    worst = -val
                    r = i
                    above = False
            elif basis[i] >= 2 * d and val > slack_ub + feas_tol:
                if val - slack_ub > worst:
                    worst = val - slack_ub
                    r = i
                    above = True
        if r == -1:
            return STATUS_OPTIMAL, pivots, -1, nops
        if pivots >= max_pivots:
            return STATUS_PIVOT_LIMIT, pivots, r, nops
        if nops + 2 > cap_ops:
            return STATUS_REFRESH, pivots, r, nops

        if above:
            # flip the basic slack: store it as distance below its bound
            k = basis[r]
            op_kind[nops] = 1
            op_row[nops] = r
            nops += 1
            xb[r] = slack_ub - xb[r]
            flipped[k] = 1 - flipped[k]

        # effective row r of the basis inverse
        for i in range(d):
            wbuf[i] = 0.0
        wbuf[r] = 1.0
        _btran_ops(wbuf, op_kind, op_row, op_piv, eta_col, nops)
        alpha_u = np.dot(a_work, wbuf)

        stamp += 1
        while True:
            # entering column: min ratio rc / (-alpha) over alpha < -ztol,
            # scanned in global id order (u block, v block, slack block);
            # columns whose recomputed pivot vanished are banned for this row
            q = -1
            best = np.inf
            qalpha = 0.0
            for t in range(nwork):
                j = work[t]
                au = alpha_u[t]
                if in_basis[j] == 0 and au < -ztol and banned[j] != stamp:
                    ratio = rc[j] / (-au)
                    if ratio < best:
                        best = ratio
                        q = j
                        qalpha = au
            for t in range(nwork):
                j = work[t]
                av = -alpha_u[t]
                if in_basis[d + j] == 0 and av < -ztol and banned[d + j] != stamp:
                    ratio = rc[d + j] / (-av)
                    if ratio < best:
                        best = ratio
                        q = d + j
                        qalpha = av
            for i in range(d):
                sid = 2 * d + i
                if in_basis[sid] == 0 and banned[sid] != stamp:
                    asl = -wbuf[i] if flipped[sid] == 1 else wbuf[i]
                    if asl < -ztol:
                        ratio = rc[sid] / (-asl)
                        if ratio < best:
                            best = ratio
                            q = sid
                            qalpha = asl
            if q == -1:
                return STATUS_INFEASIBLE, pivots, r, nops

            _load_column(a, q, flipped, tbuf)
            _ftran_ops(tbuf, op_kind, op_row, op_piv, eta_col, nops)
            if tbuf[r] < -ztol:
                break
            if qalpha < -1e-6:
                # the recomputed pivot flatly disagrees with a solidly
                # negative priced value: the chain is corrupted, bail out
                return STATUS_BREAKDOWN, pivots, r, nops
            # the priced pivot was tolerance-small and vanished under the
            # exact recomputation; treat it as zero and pick another column
            banned[q] = stamp

        theta_d = rc[q] / qalpha
        theta_p = xb[r] / tbuf[r]

        # reduced costs: rc_j -= theta_d * alpha_j over active nonbasics
        if theta_d != 0.0:
            for t in range(nwork):
                j = work[t]
                if in_basis[j] == 0:
                    rc[j] -= theta_d * alpha_u[t]
                if in_basis[d + j] == 0:
                    rc[d + j] += theta_d * alpha_u[t]
            for i in range(d):
                sid = 2 * d + i
                if in_basis[sid] == 0:
                    asl = -wbuf[i] if flipped[sid] == 1 else wbuf[i]
                    rc[sid] -= theta_d * asl
        leaving = basis[r]
        rc[leaving] = -theta_d
        rc[q] = 0.0
        nops = _push_eta(op_kind, op_row, op_piv, eta_col, nops, r, tbuf)
        for i in range(d):
            if i != r:
                xb[i] -= tbuf[i] * theta_p
        xb[r] = theta_p
        in_basis[leaving] = 0
        in_basis[q] = 1
        basis[r] = q
        pivots += 1


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _primal_phase(a, a_work, op_kind, op_row, op_piv, eta_col, nops, wbuf, tbuf,
                  xb, basis, in_basis, flipped, rc, work,
                  slack_ub, ztol, rc_tol, max_pivots):  # pragma: no cover
    """Drive negative reduced costs out while keeping the basics in bounds.

    Returns ``(status, pivots, nops)``.
    """
    d = a.shape[0]
    nwork = work.size
    cap_ops = op_kind.size
    pivots = 0
    while True:
        # entering column: most negative reduced cost, ties -> lowest id
        q = -1
        best = -rc_tol
        for t in range(nwork):
            j = work[t]
            if in_basis[j] == 0 and rc[j] < best:
                best = rc[j]
                q = j
        for t in range(nwork):
            j = work[t]
            if in_basis[d + j] == 0 and rc[d + j] < best:
                best = rc[d + j]
                q = d + j
        for i in range(d):
            sid = 2 * d + i
            if in_basis[sid] == 0 and rc[sid] < best:
                best = rc[sid]
                q = sid
        if q == -1:
            return STATUS_OPTIMAL, pivots, nops
        if pivots >= max_pivots:
            return STATUS_PIVOT_LIMIT, pivots, nops
        if nops >= cap_ops:
            return STATUS_REFRESH, pivots, nops

        _load_column(a, q, flipped, tbuf)
        _ftran_ops(tbuf, op_kind, op_row, op_piv, eta_col, nops)

        # bounded ratio test; entering variable itself is bounded by its
        # upper bound when it is a slack
        theta_self = slack_ub if q >= 2 * d else np.inf
        theta = np.inf
        r = -1
        leave_at_ub = False
        for i in range(d):
            ti = tbuf[i]
            if ti > ztol:
                limit = xb[i] / ti
                if limit < theta:
                    theta = limit
                    r = i
                    leave_at_ub = False
            elif ti < -ztol and basis[i] >= 2 * d:
                limit = (slack_ub - xb[i]) / (-ti)
                if limit < theta:
                    theta = limit
                    r = i
                    leave_at_ub = True
        if r == -1 and not np.isfinite(theta_self):
            return STATUS_UNBOUNDED, pivots, nops

        if theta <= theta_self:
            # basis change in row r; pre-pivot inverse row prices the update
            for i in range(d):
                wbuf[i] = 0.0
            wbuf[r] = 1.0
            _btran_ops(wbuf, op_kind, op_row, op_piv, eta_col, nops)
            alpha_u = np.dot(a_work, wbuf)
            factor = rc[q] / tbuf[r]
            for t in range(nwork):
                j = work[t]
                if in_basis[j] == 0:
                    rc[j] -= factor * alpha_u[t]
                if in_basis[d + j] == 0:
                    rc[d + j] += factor * alpha_u[t]
            for i in range(d):
                sid = 2 * d + i
                if in_basis[sid] == 0:
                    asl = -wbuf[i] if flipped[sid] == 1 else wbuf[i]
                    rc[sid] -= factor * asl
            leaving = basis[r]
            rc[leaving] = -factor
            rc[q] = 0.0
            nops = _push_eta(op_kind, op_row, op_piv, eta_col, nops, r, tbuf)
            for i in range(d):
                if i != r:
                    xb[i] -= tbuf[i] * theta
            xb[r] = theta
            in_basis[leaving] = 0
            in_basis[q] = 1
            basis[r] = q
            if leave_at_ub:
                # the leaving slack sits at its upper bound: flip so its
                # stored (nonbasic) value is zero
                flipped[leaving] = 1 - flipped[leaving]
                rc[leaving] = -rc[leaving]
        else:
            # bound flip of the entering slack, no basis change
            for i in range(d):
                xb[i] -= tbuf[i] * theta_self
            flipped[q] = 1 - flipped[q]
            rc[q] = -rc[q]
        pivots += 1


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _sift_kernel(a, b, lam, work0, max_pivots,
                 ztol, feas_tol, rc_tol, cert_tol):  # pragma: no cover
    """Full sifting loop around the dual and primal phases.

    ``work0`` holds the sorted ids of the initially active columns; the
    certificate rounds below grow the set as needed, so the seed only
    affects speed, never the verdict.  Returns ``(status, beta,
    pivots_total)`` with ``beta`` meaningful only when the status is
    optimal.
    """
    d = a.shape[0]
    beta = np.zeros(d)
    if d == 0:
        return STATUS_OPTIMAL, beta, 0
    slack_ub = 2.0 * lam

    active = np.zeros(d, dtype=np.uint8)
    work_buf = np.empty(d, dtype=np.int64)
    a_work = np.empty((d, d))
    nwork = 0
    for t in range(work0.size):
        j = work0[t]
        active[j] = 1
        work_buf[nwork] = j
        for s in range(d):
            a_work[nwork, s] = a[j, s]
        nwork += 1

    xb = np.empty(d)
    basis = np.empty(d, dtype=np.int64)
    in_basis = np.zeros(3 * d, dtype=np.uint8)
    flipped = np.zeros(3 * d, dtype=np.uint8)
    rc = np.zeros(3 * d)

    # operator chain for the product-form basis inverse; capacity is a
    # safety valve, typical solves use a few dozen slots
    cap_ops = 6 * d + 16
    op_kind = np.empty(cap_ops, dtype=np.uint8)
    op_row = np.empty(cap_ops, dtype=np.int64)
    op_piv = np.empty(cap_ops)
    eta_col = np.empty((cap_ops, d))
    nops = 0
    wbuf = np.empty(d)
    tbuf = np.empty(d)

    def _reset(xb, basis, in_basis, flipped, rc, work_buf, nwork, b, lam, d):
        for i in range(d):
            xb[i] = b[i] + lam
            basis[i] = 2 * d + i
        for j in range(3 * d):
            in_basis[j] = 0
            flipped[j] = 0
            rc[j] = 0.0
        for i in range(d):
            in_basis[2 * d + i] = 1
        for t in range(nwork):
            j = work_buf[t]
            rc[j] = 1.0
            rc[d + j] = 1.0

    _reset(xb, basis, in_basis, flipped, rc, work_buf, nwork, b, lam, d)
    pivots_total = 0
    need_dual = True
    while True:
        if pivots_total >= max_pivots:
            return STATUS_PIVOT_LIMIT, beta, pivots_total
        if need_dual:
            status, pivots, stuck, nops = _dual_phase(
                a, a_work[:nwork], op_kind, op_row, op_piv, eta_col, nops,
                wbuf, tbuf, xb, basis, in_basis, flipped, rc,
                work_buf[:nwork], slack_ub, ztol, feas_tol,
                max_pivots - pivots_total,
            )
            pivots_total += pivots
            if status == STATUS_PIVOT_LIMIT or status == STATUS_BREAKDOWN:
                return status, beta, pivots_total
            if status == STATUS_REFRESH:
                # chain at capacity: restart from the all-slack basis with
                # the working set kept; the pivot budget bounds the replays
                _reset(xb, basis, in_basis, flipped, rc,
                       work_buf, nwork, b, lam, d)
                nops = 0
                continue
            if status == STATUS_INFEASIBLE:
                if nwork == d:
                    return STATUS_INFEASIBLE, beta, pivots_total
                # columns able to repair the stuck row; none anywhere means
                # the full problem is infeasible
                for i in range(d):
                    wbuf[i] = 0.0
                wbuf[stuck] = 1.0
                _btran_ops(wbuf, op_kind, op_row, op_piv, eta_col, nops)
                gains = np.dot(a, wbuf)
                grew = False
                for j in range(d):
                    if active[j] == 0 and abs(gains[j]) > ztol:
                        active[j] = 1
                        grew = True
                if not grew:
                    return STATUS_INFEASIBLE, beta, pivots_total
                nwork = 0
                for j in range(d):
                    if active[j] == 1:
                        work_buf[nwork] = j
                        for t in range(d):
                            a_work[nwork, t] = a[j, t]
                        nwork += 1
                # restart with the wider set; restarts are rare and cheap
                _reset(xb, basis, in_basis, flipped, rc,
                       work_buf, nwork, b, lam, d)
                nops = 0
                continue
        # optimal over the working set: full dual certificate from the
        # exact multipliers y = c_B @ binv, formed by one BTRAN of c_B
        for i in range(d):
            wbuf[i] = 1.0 if basis[i] < 2 * d else 0.0
        _btran_ops(wbuf, op_kind, op_row, op_piv, eta_col, nops)
        cert = np.dot(a, wbuf)
        # refresh reduced costs of active nonbasics from y, clearing any
        # drift the incremental updates accumulated
        worst = 0.0
        for t in range(nwork):
            j = work_buf[t]
            if in_basis[j] == 0:
                rc[j] = 1.0 - cert[j]
                if rc[j] < worst:
                    worst = rc[j]
            if in_basis[d + j] == 0:
                rc[d + j] = 1.0 + cert[j]
                if rc[d + j] < worst:
                    worst = rc[d + j]
        for i in range(d):
            sid = 2 * d + i
            if in_basis[sid] == 0:
                rc[sid] = wbuf[i] if flipped[sid] == 1 else -wbuf[i]
                if rc[sid] < worst:
                    worst = rc[sid]
        grew = False
        for j in range(d):
            if active[j] == 0 and abs(cert[j]) > 1.0 + cert_tol:
                active[j] = 1
                rc[j] = 1.0 - cert[j]
                rc[d + j] = 1.0 + cert[j]
                work_buf[nwork] = j
                for t in range(d):
                    a_work[nwork, t] = a[j, t]
                nwork += 1
                grew = True
        if grew:
            # keep the working set sorted so pricing order is canonical
            order = np.argsort(work_buf[:nwork], kind="mergesort")
            sorted_ids = work_buf[:nwork][order]
            for t in range(nwork):
                j = sorted_ids[t]
                work_buf[t] = j
                for s in range(d):
                    a_work[t, s] = a[j, s]
        elif worst >= -rc_tol:
            for i in range(d):
                v = basis[i]
                if v < d:
                    beta[v] += xb[i]
                elif v < 2 * d:
                    beta[v - d] -= xb[i]
            return STATUS_OPTIMAL, beta, pivots_total
        if pivots_total >= max_pivots:
            return STATUS_PIVOT_LIMIT, beta, pivots_total
        status, pivots, nops = _primal_phase(
            a, a_work[:nwork], op_kind, op_row, op_piv, eta_col, nops,
            wbuf, tbuf, xb, basis, in_basis, flipped, rc,
            work_buf[:nwork], slack_ub, ztol, rc_tol,
            max_pivots - pivots_total,
        )
        pivots_total += pivots
        if status == STATUS_PIVOT_LIMIT:
            return STATUS_PIVOT_LIMIT, beta, pivots_total
        if status == STATUS_UNBOUNDED:
            return STATUS_UNBOUNDED, beta, pivots_total
        if status == STATUS_REFRESH:
            _reset(xb, basis, in_basis, flipped, rc,
                   work_buf, nwork, b, lam, d)
            nops = 0
            need_dual = True
            continue
        # the primal phase may leave basics only tolerance-close to their
        # bounds; one more dual sweep guarantees clean feasibility
        need_dual = True


def sifted_solve(a: np.ndarray, b: np.ndarray, lam: float, max_pivots: int):
    """Solve ``min ||beta||_1 s.t. ||a beta - b||_inf <= lam`` for symmetric a.

    Returns ``(status, beta, pivots_total)``; ``beta`` is None unless the
    status is optimal.  The dual phase restores primal feasibility over the
    working set; on optimality the full dual certificate
    ``|a @ y|_inf <= 1`` is checked and violated indices join the set, after
    which the primal phase restores optimality.  The set grows strictly, so
    the loop terminates; in every use here it ends after a handful of
    rounds.
    """
    work0 = np.flatnonzero(np.abs(b) > lam).astype(np.int64)
    status, beta, pivots = _sift_kernel(
        a, b, lam, work0, max_pivots, ZERO_TOL, FEAS_TOL, RCOST_TOL, CERT_TOL
    )
    if status != STATUS_OPTIMAL:
        return status, None, pivots
    return status, beta, pivots


@njit(cache=True, nogil=True, fastmath=_FASTMATH)
def _clime_kernel(a, lam, max_pivots, j_lo, j_hi, theta, status_out,
                  ztol, feas_tol, rc_tol, cert_tol,
                  resid_slack):  # pragma: no cover - jitted
    """Solve precision-matrix columns ``j_lo <= j < j_hi`` in one call.

    Each column solves the unit-vector problem b = e_j, seeded exactly like
    the stand-alone path (from the entries of b above the tolerance level).
    Solutions are validated against the residual bound before being written
    into ``theta[:, j - j_lo]``; the per-column status lets the caller
    re-solve failures through the slow exact path.  ``theta`` must be
    d x (j_hi - j_lo) and ``status_out`` of length j_hi - j_lo, so disjoint
    ranges can run on separate threads against slices of shared output
    arrays.
    """
    d = a.shape[0]
    b = np.zeros(d)
    work0 = np.empty(d, dtype=np.int64)
    for j in range(j_lo, j_hi):
        b[j] = 1.0
        nseed = 0
        for i in range(d):
            if abs(b[i]) > lam:
                work0[nseed] = i
                nseed += 1
        status, beta, _ = _sift_kernel(
            a, b, lam, work0[:nseed], max_pivots,
            ztol, feas_tol, rc_tol, cert_tol,
        )
        if status == STATUS_OPTIMAL:
            resid = np.dot(a, beta)
            resid[j] -= 1.0
            worst = 0.0
            for i in range(d):
                v = abs(resid[i])
                if v > worst:
                    worst = v
            if worst > lam + resid_slack:
                status = STATUS_RESIDUAL
            else:
                for i in range(d):
                    theta[i, j - j_lo] = beta[i]
        status_out[j - j_lo] = status
        b[j] = 0.0


def clime_block(a: np.ndarray, lam: float, max_pivots: int,
                j_lo: int, j_hi: int, theta: np.ndarray,
                status_out: np.ndarray, resid_slack: float) -> None:
    """Driver for `_clime_kernel` over one column range (thread-safe)."""
    _clime_kernel(
        a, lam, max_pivots, j_lo, j_hi, theta, status_out,
        ZERO_TOL, FEAS_TOL, RCOST_TOL, CERT_TOL, resid_slack,
    )


# ---------------------------------------------------------------------------
# fallback path: two-phase primal simplex with Bland's rule
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _bland_kernel(T, basis, in_basis, allow,
                  ztol, rc_tol, max_pivots):  # pragma: no cover - jitted
    """Primal simplex with Bland's rule, in place.  Returns (status, pivots)."""
    nrows = T.shape[0] - 1
    ncols = T.shape[1] - 1
    pivots = 0
    while True:
        q = -1
        for j in range(ncols):
            if allow[j] == 1 and in_basis[j] == 0 and T[nrows, j] < -rc_tol:
                q = j
                break
        if q == -1:
            return STATUS_OPTIMAL, pivots
        if pivots >= max_pivots:
            return STATUS_PIVOT_LIMIT, pivots

        r = -1
        best = np.inf
        for i in range(nrows):
            coef = T[i, q]
            if coef > ztol:
                ratio = T[i, ncols] / coef
                if ratio < best:
                    best = ratio
                    r = i
        if r == -1:
            return STATUS_UNBOUNDED, pivots

        pivot = T[r, q]
        inv = 1.0 / pivot
        for j in range(ncols + 1):
            T[r, j] *= inv
        for i in range(nrows + 1):
            if i != r:
                factor = T[i, q]
                if factor != 0.0:
                    for j in range(ncols + 1):
                        T[i, j] -= factor * T[r, j]
                    T[i, q] = 0.0
        leaving = basis[r]
        in_basis[leaving] = 0
        in_basis[q] = 1
        basis[r] = q
        pivots += 1


def _python_pivot(T, basis, in_basis, r, q):
    pivot = T[r, q]
    T[r, :] /= pivot
    for i in range(T.shape[0]):
        if i != r:
            factor = T[i, q]
            if factor != 0.0:
                T[i, :] -= factor * T[r, :]
                T[i, q] = 0.0
    in_basis[basis[r]] = 0
    in_basis[q] = 1
    basis[r] = q


def bland_two_phase_solve(a: np.ndarray, b: np.ndarray, lam: float,
                          max_pivots: int):
    """Two-phase primal simplex with Bland's rule on the 2d-row formulation.

    Returns ``(status, beta, pivots)``.  Slow but steady: used when the
    revised fast path hits its pivot cap or fails validation, and to confirm
    infeasibility verdicts.
    """
    d = a.shape[0]
    if d == 0:
        return STATUS_OPTIMAL, np.zeros(0), 0
    nrows = 2 * d
    nstruct = 4 * d  # u, v, s_upper, s_lower

    body = np.zeros((nrows, nstruct))
    body[:d, :d] = a
    body[:d, d:2 * d] = -a
    body[d:, :d] = -a
    body[d:, d:2 * d] = a
    idx = np.arange(nrows)
    body[idx, 2 * d + idx] = 1.0
    rhs = np.concatenate([b + lam, lam - b])

    negative = rhs < 0.0
    body[negative] *= -1.0
    rhs = np.where(negative, -rhs, rhs)
    art_rows = np.flatnonzero(negative)
    nart = art_rows.size
    ncols = nstruct + nart

    T = np.zeros((nrows + 1, ncols + 1))
    T[:nrows, :nstruct] = body
    T[art_rows, nstruct + np.arange(nart)] = 1.0
    T[:nrows, ncols] = rhs

    basis = np.empty(nrows, dtype=np.int64)
    basis[:] = 2 * d + idx
    basis[art_rows] = nstruct + np.arange(nart)
    in_basis = np.zeros(ncols, dtype=np.uint8)
    in_basis[basis] = 1

    pivots_total = 0
    if nart:
        # phase 1: minimise the sum of artificials
        T[nrows, :] = 0.0
        T[nrows, nstruct:ncols] = 1.0
        for i in art_rows:
            T[nrows, :] -= T[i, :]
        allow = np.ones(ncols, dtype=np.uint8)
        status, pivots = _bland_kernel(
            T, basis, in_basis, allow, ZERO_TOL, RCOST_TOL, max_pivots
        )
        pivots_total += pivots
        if status == STATUS_PIVOT_LIMIT:
            return STATUS_PIVOT_LIMIT, None, pivots_total
        if status == STATUS_UNBOUNDED:
            return STATUS_UNBOUNDED, None, pivots_total
        phase1_obj = -T[nrows, ncols]
        scale = max(1.0, float(np.max(np.abs(rhs))))
        if phase1_obj > 1e-7 * scale:
            return STATUS_INFEASIBLE, None, pivots_total
        # drive any idle artificials out of the basis; rows that cannot be
        # repaired are redundant and get dropped
        drop_rows = []
        for i in range(nrows):
            if basis[i] >= nstruct:
                target = -1
                best_coef = ZERO_TOL
                for j in range(nstruct):
                    coef = abs(T[i, j])
                    if in_basis[j] == 0 and coef > best_coef:
                        target = j
                        best_coef = coef
                if target >= 0:
                    _python_pivot(T, basis, in_basis, i, target)
                else:
                    drop_rows.append(i)
        if drop_rows:
            keep = np.setdiff1d(np.arange(nrows), np.array(drop_rows))
            T = np.vstack([T[keep], T[-1:]])
            basis = basis[keep]
            nrows = keep.size
    # strip artificial columns, install the phase-2 objective
    T = np.hstack([T[:, :nstruct], T[:, ncols:ncols + 1]])
    in_basis = in_basis[:nstruct]
    T[nrows, :] = 0.0
    T[nrows, :2 * d] = 1.0
    for i in range(nrows):
        if basis[i] < 2 * d:
            T[nrows, :] -= T[i, :]
    allow = np.ones(nstruct, dtype=np.uint8)
    status, pivots = _bland_kernel(
        T, basis, in_basis, allow, ZERO_TOL, RCOST_TOL, max_pivots
    )
    pivots_total += pivots
    if status != STATUS_OPTIMAL:
        return status, None, pivots_total
    stored = np.zeros(nstruct)
    stored[basis] = T[:nrows, nstruct]
    beta = stored[:d] - stored[d:2 * d]
    return STATUS_OPTIMAL, beta, pivots_total
