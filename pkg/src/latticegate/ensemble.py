"""Ensemble truth-table measurement with unpaired-atom background removal.

A randomly loaded lattice contains well pairs where both wells hold an atom
(these feel the gate) and single-occupied wells whose atom rides along
unaffected but still fluoresces at readout. Site-resolved detection cannot
tell a missing atom from a dark logical-0 one, so every occupied site is
binned into the four two-qubit populations with absent partners read as 0.
The measured populations are then a paired/unpaired mixture; a second run
with the pairing broken measures the unpaired response alone, and a linear
estimator recovers the gate-only row. The double-gate stage (gate, flush of
logical-0 targets, gate again) is kept as a diagnostic of pair survival.

All sampling is multinomial counting noise; generators are seeded from
(fill seed, stage index, input index) so stages are independently
reproducible and safe to run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gate import IDEAL_CNOT_OUTPUT, STATE_LABELS, TruthTable

__all__ = [
    "STAGES",
    "LatticeFill",
    "MeasurementStage",
    "CorrectedRow",
    "NonIdentifiableError",
    "simulate_fill",
    "run_stage",
    "background_subtract",
    "apparent_fidelity",
    "stages_to_csv",
]

STAGES = ("paired_and_unpaired", "unpaired_only", "double_gate_with_flush")

_BIN_LABELS = STATE_LABELS + ("leaked",)


class NonIdentifiableError(RuntimeError):
    """The stage set cannot separate gate signal from background."""


@dataclass(frozen=True)
class LatticeFill:
    """Occupancy of n_sites well pairs; column 0 is the control well,
    column 1 the target well."""

    n_sites: int
    occupancy: np.ndarray
    fill_probability: float
    seed: int

    def __post_init__(self) -> None:
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.shape != (self.n_sites, 2):
            raise ValueError("occupancy must have shape (n_sites, 2)")
        object.__setattr__(self, "occupancy", occ)
        if not 0.0 <= self.fill_probability <= 1.0:
            raise ValueError("fill_probability must lie in [0, 1]")

    @property
    def n_paired(self) -> int:
        return int(np.sum(self.occupancy[:, 0] & self.occupancy[:, 1]))

    @property
    def n_control_only(self) -> int:
        return int(np.sum(self.occupancy[:, 0] & ~self.occupancy[:, 1]))

    @property
    def n_target_only(self) -> int:
        return int(np.sum(~self.occupancy[:, 0] & self.occupancy[:, 1]))

    @property
    def n_atoms(self) -> int:
        return int(np.sum(self.occupancy))


def simulate_fill(n_sites: int, p: float, seed: int) -> LatticeFill:
    """Independent Bernoulli occupancy per well, reproducible from seed."""
    if n_sites <= 0:
        raise ValueError("n_sites must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError("fill probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    occupancy = rng.random((n_sites, 2)) < p
    return LatticeFill(n_sites=n_sites, occupancy=occupancy, fill_probability=p, seed=seed)


@dataclass(frozen=True)
class MeasurementStage:
    """Binned readout of one stage: site counts over the four two-qubit
    populations plus pairs lost to scattering, with the paired/single
    composition that produced them."""

    stage: str
    input_label: str
    counts: np.ndarray
    leaked: int
    n_paired: int
    n_single: int

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}")
        if self.input_label not in STATE_LABELS:
            raise ValueError(f"input_label must be one of {STATE_LABELS}")
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (4,):
            raise ValueError("counts must be a length-4 vector")
        object.__setattr__(self, "counts", counts)
        if np.any(counts < 0) or self.leaked < 0 or self.n_paired < 0 or self.n_single < 0:
            raise ValueError("counts must be nonnegative")
        if int(counts.sum()) + self.leaked != self.n_paired + self.n_single:
            raise ValueError("bin counts must add up to the number of measured sites")

    @property
    def n_measured(self) -> int:
        """Entries binned: paired sites count once, single atoms once each."""
        return self.n_paired + self.n_single

    @property
    def total_atoms(self) -> int:
        return 2 * self.n_paired + self.n_single

    @property
    def fractions(self) -> np.ndarray:
        """(p00, p01, p10, p11, leaked) as fractions of measured entries."""
        if self.n_measured == 0:
            return np.zeros(5)
        return np.append(self.counts, self.leaked) / self.n_measured


def _row_pvec(table: TruthTable, label: str) -> np.ndarray:
    row = table.row(label)
    pvec = np.append(row, table.leakage[STATE_LABELS.index(label)])
    # guard the 1e-9 norm slack so multinomial sees an exact distribution
    return pvec / pvec.sum()


def _bin_index(control: str, target: str) -> int:
    return STATE_LABELS.index(control + target)


def run_stage(
    fill: LatticeFill,
    table: TruthTable | None,
    input_label: str,
    stage: str,
) -> MeasurementStage:
    """Simulate one readout of the filled lattice.

    Paired sites are drawn from the truth-table row for the prepared input;
    single atoms pass through unchanged and read as their prepared logical
    state with the absent partner read as 0. unpaired_only breaks every
    pair and reads all atoms individually (table unused); the double-gate
    stage pulses, flushes logical-0 targets, and pulses again, with the
    second pulse applied to pairs that kept their target.
    """
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}")
    if input_label not in STATE_LABELS:
        raise ValueError(f"input_label must be one of {STATE_LABELS}")
    if table is None and stage != "unpaired_only":
        raise ValueError(f"stage {stage!r} involves the gate and needs a truth table")

    control_bit, target_bit = input_label[0], input_label[1]
    rng = np.random.default_rng([fill.seed, STAGES.index(stage), STATE_LABELS.index(input_label)])
    counts = np.zeros(4, dtype=np.int64)
    leaked = 0

    if stage == "unpaired_only":
        n_control = int(np.sum(fill.occupancy[:, 0]))
        n_target = int(np.sum(fill.occupancy[:, 1]))
        counts[_bin_index(control_bit, "0")] += n_control
        counts[_bin_index("0", target_bit)] += n_target
        return MeasurementStage(stage, input_label, counts, 0, 0, n_control + n_target)

    counts[_bin_index(control_bit, "0")] += fill.n_control_only
    counts[_bin_index("0", target_bit)] += fill.n_target_only
    n_single = fill.n_control_only + fill.n_target_only

    if stage == "paired_and_unpaired":
        drawn = rng.multinomial(fill.n_paired, _row_pvec(table, input_label))
        counts += drawn[:4]
        leaked = int(drawn[4])
        return MeasurementStage(stage, input_label, counts, leaked, fill.n_paired, n_single)

    # double_gate_with_flush
    first = rng.multinomial(fill.n_paired, _row_pvec(table, input_label))
    leaked = int(first[4])
    for j, out_label in enumerate(STATE_LABELS):
        n_out = int(first[j])
        if n_out == 0:
            continue
        if out_label[1] == "0":
            # flush removes the logical-0 target; the control reads alone
            counts[_bin_index(out_label[0], "0")] += n_out
        else:
            second = rng.multinomial(n_out, _row_pvec(table, out_label))
            counts += second[:4]
            leaked += int(second[4])
    return MeasurementStage(stage, input_label, counts, leaked, fill.n_paired, n_single)


@dataclass(frozen=True)
class CorrectedRow:
    """Background-subtracted truth-table row with one-sigma errors.

    probabilities + leaked sum to 1 by construction of the linear
    estimator; paired_fraction is the exactly known mixture weight from
    the stage composition.
    """

    input_label: str
    probabilities: np.ndarray
    leaked: float
    errors: np.ndarray
    leaked_error: float
    paired_fraction: float


def _multinomial_se(fractions: np.ndarray, n: int) -> np.ndarray:
    return np.sqrt(np.clip(fractions * (1.0 - fractions), 0.0, None) / n)


def background_subtract(stages: list[MeasurementStage]) -> CorrectedRow:
    """Remove the unpaired-atom background from a measured stage set.

    The mixed stage measures m = alpha * g + (1 - alpha) * u per site,
    with alpha the exactly counted paired fraction; the unpaired-only
    stage measures u; solving for g is a single linear step with
    multinomial errors propagated through it. A double-gate stage may be
    present and is ignored here. With no unpaired atoms in the
    unpaired-only stage there is nothing to subtract and the mixed-stage
    fractions are returned as-is.
    """
    mixed = [s for s in stages if s.stage == "paired_and_unpaired"]
    background = [s for s in stages if s.stage == "unpaired_only"]
    if len(mixed) != 1:
        raise ValueError("need exactly one paired_and_unpaired stage")
    if len(background) > 1:
        raise ValueError("need at most one unpaired_only stage")
    m_stage = mixed[0]
    labels = {s.input_label for s in stages}
    if len(labels) != 1:
        raise ValueError(f"stages mix prepared inputs {sorted(labels)}")

    if m_stage.n_paired == 0:
        raise NonIdentifiableError(
            "no paired sites in the mixed stage: the gate row does not appear "
            "in the measurement at all"
        )
    alpha = m_stage.n_paired / m_stage.n_measured
    m = m_stage.fractions
    m_err = _multinomial_se(m, m_stage.n_measured)

    u_stage = background[0] if background else None
    if u_stage is None or u_stage.n_measured == 0:
        corrected, err = m, m_err
    else:
        u = u_stage.fractions
        u_err = _multinomial_se(u, u_stage.n_measured)
        corrected = (m - (1.0 - alpha) * u) / alpha
        err = np.sqrt(m_err**2 + ((1.0 - alpha) * u_err) ** 2) / alpha

    return CorrectedRow(
        input_label=m_stage.input_label,
        probabilities=corrected[:4],
        leaked=float(corrected[4]),
        errors=err[:4],
        leaked_error=float(err[4]),
        paired_fraction=alpha,
    )


def apparent_fidelity(stage: MeasurementStage) -> float:
    """Fraction of measured sites on the ideal output bin, background included."""
    ideal = IDEAL_CNOT_OUTPUT[stage.input_label]
    return float(stage.fractions[STATE_LABELS.index(ideal)])


def stages_to_csv(stages: list[MeasurementStage]) -> str:
    """Serialize stages as CSV: stage,input,p00,p01,p10,p11,leaked,n."""
    lines = ["stage,input,p00,p01,p10,p11,leaked,n"]
    for s in stages:
        fracs = ",".join("%.9g" % x for x in s.fractions)
        lines.append(f"{s.stage},{s.input_label},{fracs},{s.n_measured}")
    return "\n".join(lines) + "\n"
