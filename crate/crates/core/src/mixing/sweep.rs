//! Fitted decay bases over ensemble roofs and circle frequencies.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{correlation_spectral_many, decay_rate_fit};
use crate::aniso::WeightScheme;
use crate::ensemble::{build_eigenbasis, sample, sample_rng};
use crate::exec::try_map_indexed;
use crate::operator::assemble_auto;
use crate::pressure::rate_thresholds;
use crate::torus::{AnosovMap, Freq, TrigPoly};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Laplace eigenvalue cutoff of the roof ensemble.
    pub cutoff: f64,
    pub samples: usize,
    pub seed: u64,
    /// Frequencies `1..=q_max`.
    pub q_max: i64,
    /// Truncation box `|α|_∞ ≤ k`.
    pub k: usize,
    pub r: f64,
    pub min_grid: usize,
    /// Correlations are computed for `N = 0..=n_max`.
    pub n_max: usize,
    /// Observables `f = e_α`, `g = e_β` for all `α, β` in this list.
    pub modes: Vec<Freq>,
    pub bins: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            cutoff: 4.0 * PI * PI,
            samples: 100,
            seed: 0,
            q_max: 20,
            k: 8,
            r: 0.02,
            min_grid: 64,
            n_max: 20,
            modes: vec![[1, 0], [0, 1], [-1, 0], [0, -1]],
            bins: 20,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub sample: usize,
    pub q: i64,
    /// Largest fitted base over the observable pairs; `None` when every
    /// pair is below the noise floor.
    pub base: Option<f64>,
    pub grid: usize,
    /// Some observable reached beyond the truncation box.
    pub flagged: bool,
}

/// Counts of fitted bases in equal bins on `[0, 1]`; larger values go to
/// the last bin.
#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub below_noise_floor: usize,
}

impl Histogram {
    fn new(values: impl Iterator<Item = Option<f64>>, bins: usize) -> Self {
        let mut counts = vec![0; bins];
        let mut below_noise_floor = 0;
        for v in values {
            match v {
                Some(b) => {
                    let i = ((b.max(0.0) * bins as f64) as usize).min(bins - 1);
                    counts[i] += 1;
                }
                None => below_noise_floor += 1,
            }
        }
        Histogram {
            edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
            counts,
            below_noise_floor,
        }
    }

    /// Columns `lo, hi, count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lo", "hi", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.write_record([
                self.edges[i].to_string(),
                self.edges[i + 1].to_string(),
                c.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    /// `λ^{−1/2}`.
    pub upper_threshold: f64,
    /// `λ^{−5/2}`.
    pub lower_threshold: f64,
    pub max_base: Option<f64>,
    /// `(sample, q)` of the largest base.
    pub argmax: Option<(usize, i64)>,
    pub flagged_cells: usize,
    pub histogram: Histogram,
    pub cells: Vec<SweepCell>,
}

/// For each ensemble roof and each `q = 1..=q_max`, fits the decay base
/// of every spectral correlation `⟨L_qᴺ e_α, e_β⟩` and keeps the largest.
pub fn decay_sweep(config: &SweepConfig, map: &AnosovMap) -> Result<SweepReport> {
    if config.q_max < 1 || config.samples == 0 || config.modes.is_empty() || config.bins == 0 {
        return Err(Error::InvalidInput(
            "sweep needs q_max >= 1, samples >= 1, bins >= 1 and at least one mode".into(),
        ));
    }
    let basis = build_eigenbasis(config.cutoff)?;
    let scheme = WeightScheme::new(map.matrix(), config.r)?;
    let (lower, upper) = rate_thresholds(map.matrix())?;
    let obs: Vec<TrigPoly> = config.modes.iter().map(|&a| TrigPoly::mode(a)).collect();
    let qs = config.q_max as usize;

    let cells = try_map_indexed(config.samples * qs, |i| {
        let (s, q) = (i / qs, (i % qs) as i64 + 1);
        let tau = sample(&basis, &mut sample_rng(config.seed, s as u64));
        let t = assemble_auto(map, &tau, q, &scheme, config.k, config.min_grid)?;
        let corr = correlation_spectral_many(&t, &obs, &obs, config.n_max)?;
        let mut base: Option<f64> = None;
        let mut flagged = false;
        for c in corr.iter().flatten() {
            flagged |= c.flagged;
            if let Some(b) = decay_rate_fit(&c.values)?.base() {
                base = Some(base.map_or(b, |m| m.max(b)));
            }
        }
        Ok::<_, Error>(SweepCell {
            sample: s,
            q,
            base,
            grid: t.info.grid,
            flagged,
        })
    })?;

    let mut max_base: Option<f64> = None;
    let mut argmax = None;
    for c in &cells {
        if let Some(b) = c.base {
            if max_base.is_none_or(|m| b > m) {
                max_base = Some(b);
                argmax = Some((c.sample, c.q));
            }
        }
    }
    Ok(SweepReport {
        config: config.clone(),
        upper_threshold: upper,
        lower_threshold: lower,
        max_base,
        argmax,
        flagged_cells: cells.iter().filter(|c| c.flagged).count(),
        histogram: Histogram::new(cells.iter().map(|c| c.base), config.bins),
        cells,
    })
}
