"""Cross-model distance over three feature distributions: generated images
(f), real images (r), and text (l).

cmd = Dis(f,r) + |Dis(f,l) - Dis(r,l)|; the absolute-difference component
(itdis) measures image-text consistency, Dis(f,r) measures image quality.
cmd_expanded evaluates the algebraically expanded form and exists only to
cross-check compute_cmd.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg_stats import (
    GaussianStats,
    _trace_sqrt_product,
    frechet_distance,
    frechet_distance_with_info,
)


@dataclass(frozen=True)
class CmdReport:
    dis_fr: float
    dis_fl: float
    dis_rl: float
    itdis: float
    cmd: float
    regularized: dict[str, bool]

    def __post_init__(self):
        assert self.itdis == abs(self.dis_fl - self.dis_rl)
        assert self.cmd == self.dis_fr + self.itdis


def _check_dims(f: GaussianStats, r: GaussianStats, l: GaussianStats) -> None:
    if not (f.dim == r.dim == l.dim):
        raise DimensionMismatch(
            f"dimensions differ: f={f.dim}, r={r.dim}, l={l.dim}"
        )


def compute_itdis(
    f: GaussianStats, r: GaussianStats, l: GaussianStats
) -> float:
    """|Dis(f,l) - Dis(r,l)|: how differently generated and real images sit
    relative to the text distribution."""
    _check_dims(f, r, l)
    return abs(frechet_distance(f, l) - frechet_distance(r, l))


def compute_cmd(
    f: GaussianStats, r: GaussianStats, l: GaussianStats
) -> CmdReport:
    _check_dims(f, r, l)
    dis_fr, reg_fr = frechet_distance_with_info(f, r)
    dis_fl, reg_fl = frechet_distance_with_info(f, l)
    dis_rl, reg_rl = frechet_distance_with_info(r, l)
    itdis = abs(dis_fl - dis_rl)
    return CmdReport(
        dis_fr=dis_fr,
        dis_fl=dis_fl,
        dis_rl=dis_rl,
        itdis=itdis,
        cmd=dis_fr + itdis,
        regularized={"fr": reg_fr, "fl": reg_fl, "rl": reg_rl},
    )


def cmd_expanded(
    f: GaussianStats, r: GaussianStats, l: GaussianStats
) -> float:
    """Expanded form of cmd, branching on the sign of
    Dis(f,l) - Dis(r,l); used as an independent cross-check.

    sign > 0: 2[(mu_f-mu_r).(mu_f-mu_l)
                + Tr(cov_f - sqrt(cov_f cov_l) + sqrt(cov_r cov_l)
                     - sqrt(cov_f cov_r))]
    sign < 0 is the mirrored form with f and r swapped in the mean and
    pure-covariance terms. sign == 0 degenerates to Dis(f,r).
    """
    _check_dims(f, r, l)
    bias = frechet_distance(f, l) - frechet_distance(r, l)
    if bias == 0.0:
        return frechet_distance(f, r)
    tr_fl = _trace_sqrt_product(f.cov, l.cov)
    tr_rl = _trace_sqrt_product(r.cov, l.cov)
    tr_fr = _trace_sqrt_product(f.cov, r.cov)
    if bias > 0.0:
        mean_term = float((f.mean - r.mean) @ (f.mean - l.mean))
        trace_term = float(np.trace(f.cov)) - tr_fl + tr_rl - tr_fr
    else:
        mean_term = float((r.mean - f.mean) @ (r.mean - l.mean))
        trace_term = float(np.trace(r.cov)) + tr_fl - tr_rl - tr_fr
    return 2.0 * (mean_term + trace_term)
