//! Metropolis-Hastings birth/death/move sampler for finite-volume Gibbs point processes
//! with density proportional to `z^n exp(-H(omega))` and an empty outside configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CellIndex, Configuration, Window};
use crate::models::{local_energy, total_energy, GibbsModel};

/// Proposal probabilities; must sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalMix {
    pub birth: f64,
    pub death: f64,
    #[serde(rename = "move")]
    pub shift: f64,
}

impl Default for ProposalMix {
    fn default() -> Self {
        ProposalMix { birth: 0.35, death: 0.35, shift: 0.30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub steps: u64,
    /// Fraction of the energy trace treated as burn-in by the stationarity diagnostic.
    /// The returned configuration is always the final state.
    pub burn_in: f64,
    pub mix: ProposalMix,
    /// Half-width of the uniform displacement used by move proposals.
    pub move_scale: f64,
    pub seed: u64,
    /// Keep the point count fixed (moves only), starting from this many points.
    pub fixed_n: Option<usize>,
    /// Record the energy every this many steps.
    pub trace_every: Option<u64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            steps: 500_000,
            burn_in: 0.5,
            mix: ProposalMix::default(),
            move_scale: 0.05,
            seed: 0,
            fixed_n: None,
            trace_every: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidSampler("steps must be positive".into()));
        }
        let m = self.mix;
        if [m.birth, m.death, m.shift].iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidSampler("proposal probabilities must be nonnegative".into()));
        }
        if (m.birth + m.death + m.shift - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSampler(format!(
                "proposal probabilities sum to {}, not 1",
                m.birth + m.death + m.shift
            )));
        }
        if (m.birth > 0.0) != (m.death > 0.0) {
            return Err(Error::InvalidSampler("birth and death must both be enabled or both disabled".into()));
        }
        if !(self.move_scale > 0.0) && m.shift > 0.0 {
            return Err(Error::InvalidSampler("move scale must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.burn_in) {
            return Err(Error::InvalidSampler("burn-in fraction must lie in [0, 1]".into()));
        }
        if self.trace_every == Some(0) {
            return Err(Error::InvalidSampler("trace interval must be positive".into()));
        }
        Ok(())
    }
}

/// Child seed for replicate `index` of a run seeded with `master` (SplitMix64 mixing).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Acceptance probability for adding a point with local energy `dh` to `n` points.
pub fn birth_acceptance(z: f64, volume: f64, n: usize, dh: f64) -> f64 {
    (z * volume / (n as f64 + 1.0) * (-dh).exp()).min(1.0)
}

/// Acceptance probability for removing a point with local energy `dh` from `n` points.
pub fn death_acceptance(z: f64, volume: f64, n: usize, dh: f64) -> f64 {
    (n as f64 / (z * volume) * dh.exp()).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub energy: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub points: Vec<TracePoint>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Split-half check on the trace after discarding `burn_in`: the two half means of the
    /// energy must agree within `tolerance` standard deviations of the retained trace.
    pub fn looks_stationary(&self, burn_in: f64, tolerance: f64) -> bool {
        let start = ((self.points.len() as f64) * burn_in).floor() as usize;
        let kept: Vec<f64> = self.points[start..].iter().map(|p| p.energy).collect();
        if kept.len() < 4 {
            return false;
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let m = mean(&kept);
        let sd = (kept.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (kept.len() - 1) as f64).sqrt();
        let (a, b) = kept.split_at(kept.len() / 2);
        let diff = (mean(a) - mean(b)).abs();
        diff <= tolerance * sd || diff <= 1e-12 * m.abs().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStats {
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
}

/// One Markov chain. The cell index is the state: point ids are index ids.
pub struct Chain<'a> {
    model: &'a GibbsModel,
    window: Window,
    volume: f64,
    index: CellIndex,
    energy: f64,
    rng: ChaCha8Rng,
    cfg: SamplerConfig,
    scratch: Vec<f64>,
    pub stats: ChainStats,
}

impl<'a> Chain<'a> {
    pub fn new(model: &'a GibbsModel, window: &Window, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut index = CellIndex::empty(window, model.basis.range())?;
        let d = window.dim();
        let mut scratch = vec![0.0; d];
        if let Some(n) = cfg.fixed_n {
            for _ in 0..n {
                // a few tries to avoid starting inside a hard core
                for attempt in 0..100 {
                    uniform_point(&mut rng, window, &mut scratch);
                    if attempt == 99 || local_energy(&model.basis, &model.theta, &index, &scratch, None).is_finite() {
                        break;
                    }
                }
                index.insert(&scratch);
            }
        }
        let mut chain = Chain {
            model,
            window: window.clone(),
            volume: window.volume(),
            index,
            energy: 0.0,
            rng,
            cfg: cfg.clone(),
            scratch,
            stats: ChainStats::default(),
        };
        chain.energy = chain.recompute_energy();
        Ok(chain)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Incrementally tracked total energy.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn recompute_energy(&self) -> f64 {
        total_energy(&self.configuration(), self.model, &self.index)
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::from_flat_unchecked(self.window.clone(), self.index.flat_coords().to_vec())
    }

    /// Runs `n` proposals.
    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn step(&mut self) {
        let mix = if self.cfg.fixed_n.is_some() {
            ProposalMix { birth: 0.0, death: 0.0, shift: 1.0 }
        } else {
            self.cfg.mix
        };
        let u: f64 = self.rng.random();
        if u < mix.birth {
            self.birth();
        } else if u < mix.birth + mix.death {
            self.death();
        } else {
            self.shift();
        }
    }

    fn local(&self, x: &[f64], skip: Option<usize>) -> f64 {
        local_energy(&self.model.basis, &self.model.theta, &self.index, x, skip)
    }

    fn birth(&mut self) {
        self.stats.proposed[0] += 1;
        let mut x = std::mem::take(&mut self.scratch);
        uniform_point(&mut self.rng, &self.window, &mut x);
        let dh = self.local(&x, None);
        let a = birth_acceptance(self.model.z, self.volume, self.index.len(), dh);
        if self.rng.random::<f64>() < a {
            self.index.insert(&x);
            self.energy += dh;
            self.stats.accepted[0] += 1;
        }
        self.scratch = x;
    }

    fn death(&mut self) {
        self.stats.proposed[1] += 1;
        let n = self.index.len();
        if n == 0 {
            return;
        }
        let i = self.rng.random_range(0..n);
        let dh = self.local(self.index.point(i), Some(i));
        let a = death_acceptance(self.model.z, self.volume, n, dh);
        if self.rng.random::<f64>() < a {
            self.index.swap_remove(i);
            if dh.is_finite() && self.energy.is_finite() {
                self.energy -= dh;
            } else {
                self.energy = self.recompute_energy();
            }
            self.stats.accepted[1] += 1;
        }
    }

    fn shift(&mut self) {
        self.stats.proposed[2] += 1;
        let n = self.index.len();
        if n == 0 {
            return;
        }
        let i = self.rng.random_range(0..n);
        let mut x = std::mem::take(&mut self.scratch);
        let scale = self.cfg.move_scale;
        for (k, v) in x.iter_mut().enumerate() {
            *v = self.index.point(i)[k] + scale * (2.0 * self.rng.random::<f64>() - 1.0);
        }
        // the uniform draw is consumed even when the proposal leaves the window
        let u: f64 = self.rng.random();
        if self.window.contains(&x) {
            let new = self.local(&x, Some(i));
            let old = self.local(self.index.point(i), Some(i));
            let accept = if new.is_infinite() {
                false
            } else if old.is_infinite() {
                true
            } else {
                u < (old - new).exp().min(1.0)
            };
            if accept {
                self.index.relocate(i, &x);
                if old.is_finite() && self.energy.is_finite() {
                    self.energy += new - old;
                } else {
                    self.energy = self.recompute_energy();
                }
                self.stats.accepted[2] += 1;
            }
        }
        self.scratch = x;
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, window: &Window, out: &mut [f64]) {
    for (k, v) in out.iter_mut().enumerate() {
        *v = window.lower()[k] + window.extent(k) * rng.random::<f64>();
    }
}

/// Runs the chain for `cfg.steps` proposals and returns the final configuration.
pub fn simulate(model: &GibbsModel, window: &Window, cfg: &SamplerConfig) -> Result<Configuration> {
    let mut chain = Chain::new(model, window, cfg)?;
    chain.run(cfg.steps);
    Ok(chain.configuration())
}

/// Like [`simulate`], also recording `(step, energy, count)` every `every` steps.
pub fn simulate_with_trace(
    model: &GibbsModel,
    window: &Window,
    cfg: &SamplerConfig,
    every: u64,
) -> Result<(Configuration, EnergyTrace)> {
    if every == 0 {
        return Err(Error::InvalidSampler("trace interval must be positive".into()));
    }
    let mut chain = Chain::new(model, window, cfg)?;
    let mut trace = EnergyTrace::default();
    let mut done = 0;
    while done + every <= cfg.steps {
        chain.run(every);
        done += every;
        trace.points.push(TracePoint { step: done, energy: chain.energy(), count: chain.len() });
    }
    chain.run(cfg.steps - done);
    Ok((chain.configuration(), trace))
}
