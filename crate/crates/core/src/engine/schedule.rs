//! Per-member kernels: groups, scouts and the adapted scale.

use super::adapt::{epoch_boundaries, AdaptationEvent, BetaAdapter};
use super::config::{RunConfig, ScoutSpec};
use crate::kernels::ProposalKernel;
use crate::Result;
use std::ops::Range;

pub(crate) struct ScaleSchedule {
    base: ProposalKernel,
    ensemble_size: usize,
    groups: usize,
    scouts: Option<ScoutSpec>,
    adapter: Option<BetaAdapter>,
    boundaries: Vec<usize>,
    next_boundary: usize,
    kernels: Vec<ProposalKernel>,
    pub events: Vec<AdaptationEvent>,
}

impl ScaleSchedule {
    pub fn new(config: &RunConfig, dim: usize) -> Result<Self> {
        let base = config.kernel.build(dim)?;
        let adapter = config
            .adaptation
            .enabled
            .then(|| BetaAdapter::new(&config.adaptation, config.kernel.beta));
        let boundaries = if adapter.is_some() {
            epoch_boundaries(
                config.adaptation.n0,
                config.adaptation.growth,
                config.iterations.max(1),
            )
        } else {
            Vec::new()
        };
        let mut s = ScaleSchedule {
            base,
            ensemble_size: config.ensemble_size,
            groups: config.groups(),
            scouts: config.kernel.scouts.clone(),
            adapter,
            boundaries,
            next_boundary: 0,
            kernels: Vec::new(),
            events: Vec::new(),
        };
        s.rebuild()?;
        Ok(s)
    }

    pub fn group_ranges(&self) -> Vec<Range<usize>> {
        let m = self.ensemble_size;
        if self.groups == 1 {
            vec![0..m]
        } else {
            vec![0..m / 2, m / 2..m]
        }
    }

    /// Groups that form separate sub-ensembles this iteration: the two
    /// halves until the search has frozen, one ensemble otherwise.
    pub fn step_groups(&self) -> Vec<Range<usize>> {
        match &self.adapter {
            Some(a) if !a.is_frozen() => self.group_ranges(),
            _ => vec![0..self.ensemble_size],
        }
    }

    fn group_betas(&self) -> [f64; 2] {
        match &self.adapter {
            Some(a) => a.group_betas(),
            None => [self.base.beta(); 2],
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        let betas = self.group_betas();
        let mut kernels = Vec::with_capacity(self.ensemble_size);
        for (g, range) in self.group_ranges().into_iter().enumerate() {
            let start = range.start;
            for j in range {
                let scout = self
                    .scouts
                    .as_ref()
                    .filter(|s| j - start < s.count)
                    .map_or(1.0, |s| s.multiplier);
                kernels.push(self.base.with_beta(betas[g] * scout)?);
            }
        }
        self.kernels = kernels;
        Ok(())
    }

    pub fn kernels(&self) -> &[ProposalKernel] {
        &self.kernels
    }

    /// Local (non-scout) scale reported in diagnostics.
    pub fn current_beta(&self) -> f64 {
        self.adapter
            .as_ref()
            .map_or(self.base.beta(), BetaAdapter::current)
    }

    pub fn is_searching(&self) -> bool {
        self.adapter
            .as_ref()
            .is_some_and(|a| !a.is_frozen() && self.next_boundary > 0)
    }

    pub fn observe(&mut self, lower: f64, upper: f64) {
        if let Some(a) = &mut self.adapter {
            a.observe(lower, upper);
        }
    }

    /// Advances the epoch state after iteration `iteration` has completed.
    pub fn after_iteration(&mut self, iteration: usize) -> Result<()> {
        let next = iteration + 1;
        if self.boundaries.get(self.next_boundary) != Some(&next) {
            return Ok(());
        }
        self.next_boundary += 1;
        if let Some(a) = &mut self.adapter {
            if a.is_frozen() {
                return Ok(());
            }
            if let Some(event) = a.end_epoch(next) {
                self.events.push(event);
            }
            self.rebuild()?;
        }
        Ok(())
    }
}
