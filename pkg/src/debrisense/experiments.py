"""Simulation campaigns: condition grids, end-to-end sample generation,
train/evaluate splits and result files.

A campaign is a grid of conditions; each condition generates a fixed
number of samples balanced across its labels.  Per-sample randomness is
derived from the master seed by counter-based stream splitting so that a
campaign is a pure function of (config, seed), samples stay paired across
SNR sweeps (same scenes/channels, rescaled noise), and debris-interaction
draws nest across frequencies (activation probabilities rise with f).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import (ArrayConfig, PathContribution, apply_rician_smallscale,
                      assemble_subband, subband_grid)
from .configio import SimulationConfig, CampaignGrid, default_config
from .errors import ConfigError, DebrisenseError, EqualizationError, TrainingError
from .linksim import (CsiMethod, complex_normal, estimate_csi,
                      qpsk_demodulate, qpsk_modulate, transmit, zf_equalize)
from .propagation import (Polarization, ScatterGeometry, diffracted_response,
                          los_response, reflected_response, scattered_response)
from .scene import (DebrisClass, DebrisScene, LinkGeometry, Mechanism,
                    PathGeometry, SceneConfig, generate_scene, incidence_angle,
                    path_lengths, perpendicular_clearance)
from .sensing import (FeatureVector, LabeledDataset, SvmModel, extract_features,
                      svm_train)

NO_DEBRIS_LABEL = "none"

# Stream tags for counter-based seed derivation.
_STREAM_SCENE = 11
_STREAM_INTERACT = 12
_STREAM_FADING = 13
_STREAM_NOISE = 14
_STREAM_SPLIT = 15

_TABLE_TAGS = {"density_frequency": 1, "frequency_snr": 2, "mimo_frequency": 3,
               "trend": 7}


# ---------------------------------------------------------------------------
# Conditions and campaign grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionSpec:
    condition_id: str
    table_tag: int
    f_idx: int
    frequency_hz: float
    snr_idx: int
    snr_db: float
    mimo_idx: int
    n_antennas: int
    density_idx: int
    density_per_km3: float
    labels: tuple[str, ...]
    samples: int


@dataclass(frozen=True)
class EvaluationGroup:
    """Conditions pooled into one train/evaluate unit."""
    group_id: str
    condition_ids: tuple[str, ...]
    frequency_hz: float
    axis_value: float  # density / snr / mimo, depending on the campaign


@dataclass
class SampleRecord:
    condition_id: str
    sample_idx: int
    label: str
    ber: float
    features: FeatureVector
    det_value: float | None = None
    pred_label: str | None = None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class MetricsSummary:
    n_records: int
    mean_ber: float
    ber_ci95: float
    det_acc: float
    cls_acc: float
    confusion: dict
    detection_model: SvmModel | None = None
    classification_model: SvmModel | None = None


def balanced_partition(total: int, classes) -> dict:
    """Exact floor/ceil split of ``total`` across classes in fixed order."""
    base, extra = divmod(total, len(classes))
    return {cls: base + (1 if i < extra else 0) for i, cls in enumerate(classes)}


def _cond_id(grid_kind, f, snr, mimo, density, labels) -> str:
    tag = _TABLE_TAGS[grid_kind]
    label_part = labels[0] if len(labels) == 1 else "all"
    return (f"t{tag}-f{f:g}-snr{snr:g}-m{mimo}-rho{density:g}-{label_part}")


def enumerate_conditions(cfg: SimulationConfig):
    """Expand the campaign grid into conditions plus evaluation groups."""
    grid = cfg.campaign
    tag = _TABLE_TAGS[grid.kind]
    debris_classes = tuple(c for c in grid.classes if c != NO_DEBRIS_LABEL)
    conditions: list[ConditionSpec] = []
    groups: list[EvaluationGroup] = []

    def add(f_idx, snr_idx, mimo_idx, density_idx, labels, density):
        cid = _cond_id(grid.kind, grid.frequencies_hz[f_idx],
                       grid.snr_values_db[snr_idx], grid.mimo_sizes[mimo_idx],
                       density, labels)
        conditions.append(ConditionSpec(
            condition_id=cid, table_tag=tag,
            f_idx=f_idx, frequency_hz=grid.frequencies_hz[f_idx],
            snr_idx=snr_idx, snr_db=grid.snr_values_db[snr_idx],
            mimo_idx=mimo_idx, n_antennas=grid.mimo_sizes[mimo_idx],
            density_idx=density_idx, density_per_km3=density,
            labels=labels, samples=grid.samples_per_condition))
        return cid

    if grid.kind == "density_frequency":
        # one no-debris cell per frequency, shared by every density group
        for f_idx in range(len(grid.frequencies_hz)):
            none_id = add(f_idx, 0, 0, 0, (NO_DEBRIS_LABEL,), 0.0)
            per_density_members = {d: [none_id] for d in range(len(grid.densities_per_km3))}
            for cls in debris_classes:
                for d_idx, density in enumerate(grid.densities_per_km3):
                    cid = add(f_idx, 0, 0, d_idx, (cls,), density)
                    per_density_members[d_idx].append(cid)
            for d_idx, density in enumerate(grid.densities_per_km3):
                groups.append(EvaluationGroup(
                    group_id=f"g-f{grid.frequencies_hz[f_idx]:g}-rho{density:g}",
                    condition_ids=tuple(per_density_members[d_idx]),
                    frequency_hz=grid.frequencies_hz[f_idx],
                    axis_value=density))
    else:
        if grid.kind == "frequency_snr" or grid.kind == "trend":
            axes = [(f_idx, snr_idx, 0, 0)
                    for f_idx in range(len(grid.frequencies_hz))
                    for snr_idx in range(len(grid.snr_values_db))]
            if grid.kind == "trend":
                # density comparison leg at the lowest frequency, highest SNR
                axes += [(0, len(grid.snr_values_db) - 1, 0, d_idx)
                         for d_idx in range(1, len(grid.densities_per_km3))]
        else:  # mimo_frequency
            axes = [(f_idx, 0, m_idx, 0)
                    for f_idx in range(len(grid.frequencies_hz))
                    for m_idx in range(len(grid.mimo_sizes))]
        for f_idx, snr_idx, mimo_idx, d_idx in axes:
            density = grid.densities_per_km3[d_idx]
            cid = add(f_idx, snr_idx, mimo_idx, d_idx, grid.classes, density)
            if grid.kind == "mimo_frequency":
                axis = float(grid.mimo_sizes[mimo_idx])
            elif d_idx > 0:
                axis = density
            else:
                axis = grid.snr_values_db[snr_idx]
            groups.append(EvaluationGroup(
                group_id=f"g-{cid}", condition_ids=(cid,),
                frequency_hz=grid.frequencies_hz[f_idx], axis_value=axis))

    return conditions, groups


def table_config(which: int, samples: int | None = None) -> SimulationConfig:
    """Campaign configuration for the three headline experiment tables."""
    cfg = default_config()
    if which == 1:
        grid = CampaignGrid(
            kind="density_frequency",
            frequencies_hz=(30e9, 300e9, 3e12, 5e12),
            snr_values_db=(15.0,),
            mimo_sizes=(16,),
            densities_per_km3=(1e-7, 5e-7, 1e-6),
            samples_per_condition=samples or 200)
    elif which == 2:
        grid = CampaignGrid(
            kind="frequency_snr",
            frequencies_hz=(30e9, 3e12, 5e12),
            snr_values_db=(5.0, 10.0, 15.0, 20.0),
            mimo_sizes=(16,),
            densities_per_km3=(1e-6,),
            samples_per_condition=samples or 200)
    elif which == 3:
        grid = CampaignGrid(
            kind="mimo_frequency",
            frequencies_hz=(30e9, 300e9, 3e12, 5e12),
            snr_values_db=(20.0,),
            mimo_sizes=(4, 16, 64),
            densities_per_km3=(1e-6,),
            samples_per_condition=samples or 200)
    else:
        raise ConfigError(f"table must be 1, 2 or 3, got {which}")
    return replace(cfg, campaign=grid)


def trend_config(samples: int = 100) -> SimulationConfig:
    """Reduced-scale campaign covering the headline frequency/SNR/density trends."""
    cfg = default_config()
    grid = CampaignGrid(
        kind="trend",
        frequencies_hz=(30e9, 3e12, 5e12),
        snr_values_db=(5.0, 10.0, 15.0, 20.0),
        mimo_sizes=(16,),
        densities_per_km3=(1e-6, 1e-7),
        samples_per_condition=samples)
    return replace(cfg, campaign=grid)


# ---------------------------------------------------------------------------
# Seed streams
# ---------------------------------------------------------------------------

def _rng(master_seed: int, stream: int, *key) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(stream),
                                *(int(k) for k in key)]))


# ---------------------------------------------------------------------------
# Interactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interaction:
    object_index: int
    mechanism: Mechanism
    scatter_azimuth: float


def draw_interactions(scene: DebrisScene, f_hz: float, table,
                      rng: np.random.Generator) -> list[Interaction]:
    """Independently activate each (object, mechanism) with its table probability.

    One uniform draw per (object, mechanism) is consumed in a fixed order,
    so activation sets are nested across frequencies whenever the table is
    monotone in frequency.  Scatter azimuths are drawn for every object up
    front for the same reason.
    """
    n = len(scene.objects)
    mechanisms = (Mechanism.REFLECTION, Mechanism.SCATTERING, Mechanism.DIFFRACTION)
    draws = rng.random((n, len(mechanisms))) if n else np.zeros((0, 3))
    azimuths = rng.uniform(0.0, 2.0 * math.pi, size=n) if n else np.zeros(0)
    out = []
    for i, obj in enumerate(scene.objects):
        for m_idx, mech in enumerate(mechanisms):
            p = table.probability(obj.debris_class, mech, f_hz)
            if draws[i, m_idx] < p:
                out.append(Interaction(object_index=i, mechanism=mech,
                                       scatter_azimuth=float(azimuths[i])))
    return out


def _angles(scene: DebrisScene, position_km) -> tuple[tuple[float, float],
                                                      tuple[float, float]]:
    """(aod, aoa) for a debris relay; arrays are ULAs along the y axis."""
    tx = scene.tx_position_km
    rx = scene.rx_position_km
    p = np.asarray(position_km)
    u_t = (p - tx) / np.linalg.norm(p - tx)
    u_r = (p - rx) / np.linalg.norm(p - rx)
    el_t = math.asin(float(np.clip(u_t[1], -1.0, 1.0)))
    el_r = math.asin(float(np.clip(u_r[1], -1.0, 1.0)))
    return (0.0, el_t), (0.0, el_r)


def interaction_geometry(scene: DebrisScene, object_index: int,
                         mechanism: Mechanism) -> PathGeometry | None:
    """Resolve one activated interaction into its path geometry.

    Reflection and scattering use the slant legs of the relay triangle;
    diffraction uses the along-axis split at the obstruction and needs the
    debris to project onto the open segment (returns None otherwise).
    """
    obj = scene.objects[object_index]
    tx = scene.tx_position_km
    rx = scene.rx_position_km
    clearance = perpendicular_clearance(tx, rx, obj.position_km)
    if mechanism is Mechanism.DIFFRACTION:
        if clearance is None or clearance[0] == 0.0:
            return None
        h_m, s1_km, s2_km = clearance
        return PathGeometry(s1_km=s1_km, s2_km=s2_km,
                            d_km=scene.geometry.distance_km,
                            incidence_angle_rad=0.0, clearance_m=h_m,
                            mechanism=mechanism)
    s1_km, s2_km, d_km = path_lengths(tx, rx, obj.position_km)
    theta = min(incidence_angle(s1_km, s2_km, d_km), math.pi / 2 - 1e-9)
    return PathGeometry(s1_km=s1_km, s2_km=s2_km, d_km=d_km,
                        incidence_angle_rad=theta,
                        clearance_m=clearance[0] if clearance else 0.0,
                        mechanism=mechanism)


def _path_gain_and_delay(geom: PathGeometry, f_hz: float, material,
                         pol: Polarization, scatter_azimuth: float):
    from .constants import SPEED_OF_LIGHT
    s1_m, s2_m = geom.s1_km * 1e3, geom.s2_km * 1e3
    if geom.mechanism is Mechanism.REFLECTION:
        gain = reflected_response(f_hz, s1_m, s2_m, geom.d_km * 1e3, material, pol)
        delay = (s1_m + s2_m) / SPEED_OF_LIGHT
    elif geom.mechanism is Mechanism.SCATTERING:
        sgeom = ScatterGeometry(theta1=geom.incidence_angle_rad,
                                theta2=geom.incidence_angle_rad,
                                theta3=scatter_azimuth)
        gain = scattered_response(f_hz, s1_m, s2_m, geom.d_km * 1e3, sgeom,
                                  material, pol)
        delay = (s1_m + s2_m) / SPEED_OF_LIGHT
    else:
        gain = diffracted_response(f_hz, s1_m, s2_m, geom.clearance_m)
        delta = geom.clearance_m ** 2 * (s1_m + s2_m) / (2 * s1_m * s2_m)
        delay = (s1_m + s2_m + delta) / SPEED_OF_LIGHT
    return gain, delay


def build_paths(scene: DebrisScene, interactions, f_hz: float,
                cfg: SimulationConfig, flags: list) -> list[PathContribution]:
    """Evaluate every activated interaction into a path at frequency f_hz.

    Geometry failures (grazing scattering, no knife-edge projection) skip
    the path and append a flag instead of aborting the sample.
    """
    pol = Polarization.TE if cfg.channel.polarization == "te" else Polarization.TM
    paths = [PathContribution(
        mechanism=Mechanism.LOS,
        gain=los_response(f_hz, scene.geometry.distance_m),
        delay_s=scene.geometry.los_delay_s,
        aod=(0.0, 0.0), aoa=(0.0, 0.0))]
    for inter in interactions:
        obj = scene.objects[inter.object_index]
        material = cfg.materials[obj.debris_class.value]
        try:
            geom = interaction_geometry(scene, inter.object_index,
                                        inter.mechanism)
            if geom is None:
                flags.append("diff_skip")
                continue
            gain, delay = _path_gain_and_delay(geom, f_hz, material, pol,
                                               inter.scatter_azimuth)
            aod, aoa = _angles(scene, obj.position_km)
            paths.append(PathContribution(mechanism=inter.mechanism, gain=gain,
                                          delay_s=delay, aod=aod, aoa=aoa))
        except DebrisenseError:
            flags.append(f"path_error:{inter.mechanism.value}")
    return paths


# ---------------------------------------------------------------------------
# Per-sample simulation
# ---------------------------------------------------------------------------

def _frame_lengths(total_symbols: int, n_subbands: int) -> list[int]:
    base, extra = divmod(total_symbols, n_subbands)
    return [base + (1 if i < extra else 0) for i in range(n_subbands)]


def simulate_sample(cond: ConditionSpec, label: str, sample_idx: int,
                    cfg: SimulationConfig, master_seed: int,
                    label_idx: int) -> SampleRecord:
    """Scene -> interactions -> channel -> link for one sample."""
    flags: list[str] = []
    scene_rng = _rng(master_seed, _STREAM_SCENE, cond.table_tag,
                     cond.density_idx, label_idx, sample_idx)
    inter_rng = _rng(master_seed, _STREAM_INTERACT, cond.table_tag,
                     cond.density_idx, label_idx, sample_idx)
    fading_rng = _rng(master_seed, _STREAM_FADING, cond.table_tag,
                      cond.density_idx, label_idx, sample_idx, cond.mimo_idx)
    noise_rng = _rng(master_seed, _STREAM_NOISE, cond.table_tag, cond.f_idx,
                     cond.density_idx, label_idx, sample_idx, cond.mimo_idx)

    geometry = LinkGeometry(distance_km=cfg.link.distance_km,
                            velocity_km_s=cfg.link.velocity_km_s)
    if label == NO_DEBRIS_LABEL:
        scene_cfg = SceneConfig(geometry=geometry, density_per_km3=0.0,
                                semi_axes_km=cfg.scene.semi_axes(geometry.distance_km))
    else:
        scene_cfg = SceneConfig(geometry=geometry,
                                density_per_km3=cond.density_per_km3,
                                debris_class=DebrisClass(label),
                                semi_axes_km=cfg.scene.semi_axes(geometry.distance_km),
                                debris_size_m=cfg.scene.debris_size_m)
    scene = generate_scene(scene_cfg, seed=int(scene_rng.integers(0, 2 ** 63)))
    interactions = draw_interactions(scene, cond.frequency_hz,
                                     cfg.interactions, inter_rng)

    array = ArrayConfig(n_tx=cond.n_antennas, n_rx=cond.n_antennas,
                        spacing_tx=cfg.channel.spacing,
                        spacing_rx=cfg.channel.spacing)
    grid = subband_grid(cond.frequency_hz, cfg.channel.n_subbands,
                        cfg.channel.bandwidth_hz)
    lengths = _frame_lengths(cfg.linksim.frame_symbols, cfg.channel.n_subbands)
    pilot_len = cfg.linksim.pilot_factor * cond.n_antennas
    method = (CsiMethod.PERFECT if cfg.linksim.csi_method == "perfect"
              else CsiMethod.LEAST_SQUARES)

    err_bits = 0.0
    total_bits = 0
    csi_stack = []
    for f_i, n_syms in zip(grid, lengths):
        paths = build_paths(scene, interactions, float(f_i), cfg, flags)
        sb = assemble_subband(paths, array, float(f_i), geometry.velocity_m_s,
                              los_indicator=cfg.channel.los_indicator)
        h = sb.matrix
        if len(paths) > 1:
            k_db = cfg.channel.k_factor(label, cond.frequency_hz)
            h = apply_rician_smallscale(h, k_db, fading_rng)

        bits = noise_rng.integers(0, 2, size=2 * cond.n_antennas * n_syms).astype(np.int8)
        frame = qpsk_modulate(bits).reshape(cond.n_antennas, n_syms)
        noise_unit = complex_normal(noise_rng, (cond.n_antennas, n_syms))
        error_unit = complex_normal(noise_rng, (cond.n_antennas, cond.n_antennas))
        y = transmit(h, frame, cond.snr_db, rng=None, noise_unit=noise_unit)
        csi = estimate_csi(h, pilot_len, cond.snr_db, rng=None, method=method,
                           error_unit=error_unit)
        csi_stack.append(csi.matrix)
        try:
            est = zf_equalize(y, csi)
            rx_bits = qpsk_demodulate(est.ravel())
            err_bits += float(np.count_nonzero(rx_bits != bits))
        except EqualizationError:
            err_bits += bits.size * 0.5
            flags.append("eq_error")
        total_bits += bits.size

    features = extract_features(np.stack(csi_stack))
    return SampleRecord(condition_id=cond.condition_id, sample_idx=sample_idx,
                        label=label, ber=err_bits / total_bits,
                        features=features, flags=tuple(sorted(set(flags))))


def run_condition(cond: ConditionSpec, cfg: SimulationConfig,
                  master_seed: int) -> list[SampleRecord]:
    """Generate all samples of one condition, balanced across its labels."""
    counts = balanced_partition(cond.samples, cond.labels)
    class_order = list(cfg.campaign.classes)
    records = []
    sample_idx = 0
    for label in cond.labels:
        for _ in range(counts[label]):
            records.append(simulate_sample(
                cond, label, sample_idx, cfg, master_seed,
                label_idx=class_order.index(label)))
            sample_idx += 1
    return records


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def stratified_split(labels, train_fraction: float,
                     rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Per-class 70/30-style index split; errors name a degenerate class."""
    labels = list(labels)
    train, test = [], []
    for cls in sorted(set(labels)):
        idx = [i for i, lab in enumerate(labels) if lab == cls]
        n_train = int(round(train_fraction * len(idx)))
        if n_train < 1 or n_train >= len(idx):
            raise TrainingError(f"degenerate split for class {cls!r}: "
                                f"{len(idx)} rows at fraction {train_fraction}")
        perm = rng.permutation(len(idx))
        train.extend(idx[int(k)] for k in perm[:n_train])
        test.extend(idx[int(k)] for k in perm[n_train:])
    return sorted(train), sorted(test)


def evaluate_condition(records, split_seed: int,
                       cfg: SimulationConfig | None = None) -> MetricsSummary:
    """Train detection/classification machines and score the held-out split.

    Detection is trained on a binary relabelling (no-debris vs any debris)
    of every record; classification on debris rows only.  Both accuracies
    are computed exclusively on held-out rows.  Records are annotated in
    place with decision values, predicted labels and split membership;
    records shared between evaluation groups keep the last evaluation's
    annotations (split markers are replaced, not accumulated).
    """
    cfg = cfg or default_config()
    records = list(records)
    if not records:
        raise TrainingError("no records to evaluate")
    features = np.array([r.features.as_array() for r in records])
    labels = [r.label for r in records]
    rng = np.random.default_rng(np.random.SeedSequence(split_seed))
    train_idx, test_idx = stratified_split(labels, cfg.svm.train_fraction, rng)

    binary = ["debris" if lab != NO_DEBRIS_LABEL else NO_DEBRIS_LABEL
              for lab in labels]
    if len(set(binary[i] for i in train_idx)) < 2:
        raise TrainingError("detection training split lacks both classes")
    det_model = svm_train(
        LabeledDataset(features=features[train_idx],
                       labels=tuple(binary[i] for i in train_idx),
                       classes=(NO_DEBRIS_LABEL, "debris")),
        kernel=cfg.svm.kernel, c=cfg.svm.c, tol=cfg.svm.tol,
        gamma=cfg.svm.gamma, positive_class="debris")

    debris_classes = tuple(c for c in cfg.campaign.classes if c != NO_DEBRIS_LABEL)
    cls_train = [i for i in train_idx if labels[i] != NO_DEBRIS_LABEL]
    cls_model = None
    if len(set(labels[i] for i in cls_train)) >= 2:
        cls_model = svm_train(
            LabeledDataset(features=features[cls_train],
                           labels=tuple(labels[i] for i in cls_train),
                           classes=debris_classes),
            kernel=cfg.svm.kernel, c=cfg.svm.c, tol=cfg.svm.tol,
            gamma=cfg.svm.gamma,
            positive_class=debris_classes[-1] if len(debris_classes) == 2 else None)

    # annotate every record; accuracies use the held-out rows only
    test_set = set(test_idx)
    det_hits = 0
    cls_hits = 0
    cls_total = 0
    confusion = {t: {p: 0 for p in debris_classes} for t in debris_classes}
    for i, rec in enumerate(records):
        fv = rec.features
        value = det_model.decision_value(fv)
        detected = value >= 0.0
        pred = NO_DEBRIS_LABEL
        if detected and cls_model is not None:
            pred = cls_model.predict(fv)
        elif detected:
            pred = debris_classes[0] if debris_classes else "debris"
        rec.det_value = value
        rec.pred_label = pred
        base_flags = set(rec.flags) - {"train", "test"}
        rec.flags = tuple(sorted(base_flags |
                                 {"test" if i in test_set else "train"}))
        if i in test_set:
            truth_detected = rec.label != NO_DEBRIS_LABEL
            det_hits += int(detected == truth_detected)
            if truth_detected and cls_model is not None:
                cls_total += 1
                cls_pred = cls_model.predict(fv)
                confusion[rec.label][cls_pred] += 1
                cls_hits += int(cls_pred == rec.label)

    bers = np.array([r.ber for r in records])
    ci = 1.96 * float(np.std(bers, ddof=1)) / math.sqrt(len(bers)) if len(bers) > 1 else 0.0
    return MetricsSummary(
        n_records=len(records),
        mean_ber=float(np.mean(bers)),
        ber_ci95=ci,
        det_acc=det_hits / len(test_idx),
        cls_acc=(cls_hits / cls_total) if cls_total else float("nan"),
        confusion=confusion,
        detection_model=det_model,
        classification_model=cls_model)


# ---------------------------------------------------------------------------
# Campaign driver and result files
# ---------------------------------------------------------------------------

SAMPLE_CSV_HEADER = ("condition_id,sample_idx,label,ber,f_mean,f_var,f_max,"
                     "f_min,f_skew,det_value,pred_label,flags")
METRICS_CSV_HEADER = ("condition_id,frequency_hz,mimo,snr_db,density,"
                      "mean_ber,ber_ci95,det_acc,cls_acc")


def _run_condition_worker(args):
    cond, cfg, master_seed = args
    return run_condition(cond, cfg, master_seed)


@dataclass
class CampaignResult:
    conditions: list
    groups: list
    records: dict          # condition_id -> list[SampleRecord]
    summaries: dict        # group_id -> MetricsSummary
    cond_group_acc: dict   # condition_id -> (det_acc, cls_acc)


def run_campaign(cfg: SimulationConfig, master_seed: int,
                 threads: int = 1) -> CampaignResult:
    """Run every condition of the campaign grid and evaluate its groups."""
    conditions, groups = enumerate_conditions(cfg)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_condition_worker,
                                    [(c, cfg, master_seed) for c in conditions]))
    else:
        results = [run_condition(c, cfg, master_seed) for c in conditions]
    records = {c.condition_id: recs for c, recs in zip(conditions, results)}

    summaries = {}
    acc_by_cond: dict[str, list] = {}
    for g_idx, group in enumerate(groups):
        pooled = []
        for cid in group.condition_ids:
            pooled.extend(records[cid])
        split_seed = int(np.random.SeedSequence(
            [master_seed, _STREAM_SPLIT, g_idx]).generate_state(1)[0])
        summary = evaluate_condition(pooled, split_seed, cfg)
        summaries[group.group_id] = summary
        for cid in group.condition_ids:
            acc_by_cond.setdefault(cid, []).append(
                (summary.det_acc, summary.cls_acc))
    cond_group_acc = {}
    for cid, pairs in acc_by_cond.items():
        det = float(np.mean([p[0] for p in pairs]))
        cls_vals = [p[1] for p in pairs if not math.isnan(p[1])]
        cls = float(np.mean(cls_vals)) if cls_vals else float("nan")
        cond_group_acc[cid] = (det, cls)
    return CampaignResult(conditions=conditions, groups=groups, records=records,
                          summaries=summaries, cond_group_acc=cond_group_acc)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_campaign_outputs(result: CampaignResult, cfg: SimulationConfig,
                           out_dir) -> None:
    """Write per-condition sample CSVs, the metrics CSV and plot-data CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cond in result.conditions:
        lines = [SAMPLE_CSV_HEADER]
        for rec in result.records[cond.condition_id]:
            fv = rec.features
            lines.append(",".join([
                rec.condition_id, str(rec.sample_idx), rec.label, _fmt(rec.ber),
                _fmt(fv.mean), _fmt(fv.variance), _fmt(fv.maximum),
                _fmt(fv.minimum), _fmt(fv.skewness),
                _fmt(rec.det_value) if rec.det_value is not None else "",
                rec.pred_label or "", "|".join(rec.flags)]))
        (out / f"samples_{cond.condition_id}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")

    lines = [METRICS_CSV_HEADER]
    for cond in result.conditions:
        det, cls = result.cond_group_acc[cond.condition_id]
        recs = result.records[cond.condition_id]
        bers = np.array([r.ber for r in recs])
        ci = (1.96 * float(np.std(bers, ddof=1)) / math.sqrt(len(bers))
              if len(bers) > 1 else 0.0)
        lines.append(",".join([
            cond.condition_id, _fmt(cond.frequency_hz), str(cond.n_antennas),
            _fmt(cond.snr_db), _fmt(cond.density_per_km3),
            _fmt(float(np.mean(bers))), _fmt(ci), _fmt(det), _fmt(cls)]))
    (out / "metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    _write_plot_files(result, cfg, out)


def _write_plot_files(result: CampaignResult, cfg: SimulationConfig, out: Path):
    kind = cfg.campaign.kind
    ber_lines = ["x,series,value"]
    for cond in result.conditions:
        recs = result.records[cond.condition_id]
        by_label: dict[str, list] = {}
        for rec in recs:
            by_label.setdefault(rec.label, []).append(rec.ber)
        if kind == "frequency_snr" or kind == "trend":
            x = cond.snr_db
            series_base = f"f{cond.frequency_hz:g}"
        elif kind == "mimo_frequency":
            x = cond.frequency_hz
            series_base = f"m{cond.n_antennas}"
        else:
            x = cond.frequency_hz
            series_base = f"rho{cond.density_per_km3:g}"
        for label in sorted(by_label):
            ber_lines.append(f"{_fmt(float(x))},{series_base}|{label},"
                             f"{_fmt(float(np.mean(by_label[label])))}")
    (out / "plot_ber.csv").write_text("\n".join(ber_lines) + "\n", encoding="utf-8")

    det_lines = ["x,series,value"]
    cls_lines = ["x,series,value"]
    for group in result.groups:
        summary = result.summaries[group.group_id]
        det_lines.append(f"{_fmt(float(group.frequency_hz))},"
                         f"{_fmt(float(group.axis_value))},{_fmt(summary.det_acc)}")
        cls_lines.append(f"{_fmt(float(group.frequency_hz))},"
                         f"{_fmt(float(group.axis_value))},{_fmt(summary.cls_acc)}")
    (out / "plot_detection_accuracy.csv").write_text(
        "\n".join(det_lines) + "\n", encoding="utf-8")
    (out / "plot_classification_accuracy.csv").write_text(
        "\n".join(cls_lines) + "\n", encoding="utf-8")


def reproduce_table(which: int, master_seed: int, out_dir,
                    threads: int = 1, samples: int | None = None) -> CampaignResult:
    """Run one of the three headline campaigns and write its outputs."""
    cfg = table_config(which, samples=samples)
    result = run_campaign(cfg, master_seed, threads=threads)
    write_campaign_outputs(result, cfg, out_dir)
    return result
