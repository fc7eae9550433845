//! Monte Carlo execution of the public-communication protocols.
//!
//! Parties are deterministic maps over a per-round record. Each round the
//! sources are drawn, one value is written to the public channel, and every
//! party computes its output from the inputs it is allowed to read.
//!
//! Rounds are grouped in chunks of [`CHUNK_ROUNDS`]; chunk `k` draws from
//! substream `k` of the run seed (see [`crate::gauss::substream_rng`]).
//! Chunk Gram matrices are combined by a pairwise reduction in chunk order,
//! so the result does not depend on the number of worker threads.
//!
//! Standard error of a CCM entry at `n` rounds:
//! `SE_ij = √((X_ii X_jj + X_ij²) / n)`, the Gaussian fourth-moment formula
//! (identical in CCM and standard scale up to the common factor).

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound_info::pi_distribution;
use crate::bound_info::protocol::{
    compose_protocol, Splitting, SplittingProtocol, ALICE, BOB, CLARE,
};
use crate::error::{GbiError, Result};
use crate::gauss::{substream_rng, GaussianSampler, GaussianVector};

pub const MIN_ROUNDS: usize = 10_000;
pub const CHUNK_ROUNDS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartyName {
    Alice,
    Bob,
    Clare,
    Eve,
}

/// A jointly drawn private Gaussian source.
#[derive(Debug, Clone)]
pub struct Source {
    /// One label per component, e.g. `["zA", "zC"]`.
    pub components: Vec<String>,
    pub holders: Vec<PartyName>,
    pub ccm: DMatrix<f64>,
    /// Component published on the channel, if any.
    pub broadcast: Option<usize>,
    sampler: GaussianSampler,
}

impl Source {
    pub fn new(
        components: &[&str],
        holders: &[PartyName],
        ccm: DMatrix<f64>,
        broadcast: Option<usize>,
    ) -> Result<Self> {
        if components.len() != ccm.nrows() {
            return Err(GbiError::Dimension(
                "source labels do not match its CCM".into(),
            ));
        }
        Ok(Self {
            components: components.iter().map(|s| s.to_string()).collect(),
            holders: holders.to_vec(),
            sampler: GaussianSampler::new(&ccm)?,
            ccm,
            broadcast,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Private(String),
    Broadcast,
}

#[derive(Debug, Clone)]
pub struct Party {
    pub name: PartyName,
    /// Source components this party holds.
    pub private_sources: Vec<String>,
    /// Output as a weighted sum of inputs.
    pub displacement_rule: Vec<(Input, f64)>,
    pub output: String,
}

/// Sources and parties of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolModel {
    pub splitting: Splitting,
    pub sources: Vec<Source>,
    pub parties: Vec<Party>,
    /// Resolved `(slot, weight)` terms per party; slot `None` is the channel.
    plan: Vec<Vec<(Option<usize>, f64)>>,
    broadcast_slot: usize,
    slots: usize,
}

const HONEST: [(PartyName, usize, &str, &str); 3] = [
    (PartyName::Alice, ALICE, "zA", "A"),
    (PartyName::Bob, BOB, "zB", "B"),
    (PartyName::Clare, CLARE, "zC", "C"),
];

impl ProtocolModel {
    pub fn new(p: &SplittingProtocol) -> Result<Self> {
        let [i, j] = p.splitting.pair();
        let k = p.splitting.lone();
        let pair_holders = [HONEST[i].0, HONEST[j].0];
        let sources = vec![
            Source::new(
                &[HONEST[i].2, HONEST[j].2],
                &pair_holders,
                p.private_ccm.clone(),
                None,
            )?,
            Source::new(
                &["xE"],
                &pair_holders,
                DMatrix::from_element(1, 1, 2.0 * p.public_variance),
                Some(0),
            )?,
            Source::new(
                &[HONEST[k].2],
                &[HONEST[k].0],
                DMatrix::from_element(1, 1, 2.0 * p.solo_variance),
                None,
            )?,
        ];
        let mut parties: Vec<Party> = HONEST
            .iter()
            .map(|&(name, idx, z, out)| Party {
                name,
                private_sources: sources
                    .iter()
                    .filter(|s| s.holders.contains(&name))
                    .flat_map(|s| s.components.iter().cloned())
                    .collect(),
                displacement_rule: vec![
                    (Input::Private(z.into()), 1.0),
                    (Input::Broadcast, p.coeffs_x[idx]),
                ],
                output: out.into(),
            })
            .collect();
        parties.push(Party {
            name: PartyName::Eve,
            private_sources: Vec::new(),
            displacement_rule: vec![(Input::Broadcast, 1.0)],
            output: p.splitting.public_label().into(),
        });
        Self::assemble(p.splitting, sources, parties)
    }

    fn assemble(splitting: Splitting, sources: Vec<Source>, parties: Vec<Party>) -> Result<Self> {
        let labels: Vec<String> = sources
            .iter()
            .flat_map(|s| s.components.iter().cloned())
            .collect();
        let mut broadcast_slot = None;
        let mut offset = 0;
        for s in &sources {
            if let Some(b) = s.broadcast {
                if broadcast_slot.replace(offset + b).is_some() {
                    return Err(GbiError::Domain("more than one broadcast source".into()));
                }
            }
            offset += s.components.len();
        }
        let broadcast_slot =
            broadcast_slot.ok_or_else(|| GbiError::Domain("no broadcast source".into()))?;
        let mut plan = Vec::new();
        for party in &parties {
            let mut terms = Vec::new();
            for (input, w) in &party.displacement_rule {
                match input {
                    Input::Broadcast => terms.push((None, *w)),
                    Input::Private(label) => {
                        if !party.private_sources.contains(label) {
                            return Err(GbiError::Domain(format!(
                                "{:?} reads `{label}` it does not hold",
                                party.name
                            )));
                        }
                        let slot = labels
                            .iter()
                            .position(|l| l == label)
                            .ok_or_else(|| GbiError::UnknownLabel(label.clone()))?;
                        terms.push((Some(slot), *w));
                    }
                }
            }
            plan.push(terms);
        }
        let model = Self {
            splitting,
            sources,
            parties,
            plan,
            broadcast_slot,
            slots: labels.len(),
        };
        model.check_channel_discipline()?;
        Ok(model)
    }

    pub fn output_labels(&self) -> Vec<String> {
        self.parties.iter().map(|p| p.output.clone()).collect()
    }

    /// Communication across the splitting goes through the broadcast only:
    /// the lone party reads nothing but its own draw and the channel, and no
    /// source is shared across the cut.
    pub fn check_channel_discipline(&self) -> Result<()> {
        let lone = HONEST[self.splitting.lone()].0;
        for s in &self.sources {
            if s.holders.contains(&lone) && s.holders.len() > 1 {
                return Err(GbiError::Domain(format!(
                    "source {:?} crosses the splitting",
                    s.components
                )));
            }
        }
        for party in &self.parties {
            let holds: Vec<&String> = self
                .sources
                .iter()
                .filter(|s| s.holders.contains(&party.name))
                .flat_map(|s| s.components.iter())
                .collect();
            for (input, _) in &party.displacement_rule {
                if let Input::Private(l) = input {
                    if !holds.contains(&l) {
                        return Err(GbiError::Domain(format!(
                            "{:?} reads foreign variable `{l}`",
                            party.name
                        )));
                    }
                }
            }
            if party.name == PartyName::Eve
                && party
                    .displacement_rule
                    .iter()
                    .any(|(i, _)| *i != Input::Broadcast)
            {
                return Err(GbiError::Domain("Eve reads a private variable".into()));
            }
        }
        Ok(())
    }

    /// One round: draw sources, publish one value, apply displacements.
    /// Returns the number of broadcast messages written.
    fn round<R: Rng + ?Sized>(&self, rng: &mut R, slots: &mut [f64], out: &mut [f64]) -> u32 {
        let mut offset = 0;
        for s in &self.sources {
            let d = s.sampler.dim();
            s.sampler.draw_into(rng, &mut slots[offset..offset + d]);
            offset += d;
        }
        let channel = slots[self.broadcast_slot];
        for (o, terms) in out.iter_mut().zip(&self.plan) {
            *o = terms
                .iter()
                .map(|(slot, w)| w * slot.map_or(channel, |s| slots[s]))
                .sum();
        }
        1
    }
}

/// Outcome of a simulation, serialized as the report JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub protocol: String,
    pub r: f64,
    #[serde(rename = "n")]
    pub n_rounds: usize,
    pub seed: u64,
    pub labels: Vec<String>,
    pub empirical_ccm: Vec<Vec<f64>>,
    pub analytic_ccm: Vec<Vec<f64>>,
    pub max_abs_dev: f64,
    pub max_dev_in_se: f64,
}

impl SimReport {
    fn build(
        protocol: &str,
        r: f64,
        n: usize,
        seed: u64,
        analytic: &GaussianVector,
        empirical: DMatrix<f64>,
    ) -> Self {
        let x = analytic.ccm();
        let d = x.nrows();
        let mut max_abs_dev = 0.0_f64;
        let mut max_dev_in_se = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let dev = (empirical[(i, j)] - x[(i, j)]).abs();
                let se = ((x[(i, i)] * x[(j, j)] + x[(i, j)] * x[(i, j)]) / n as f64).sqrt();
                max_abs_dev = max_abs_dev.max(dev);
                max_dev_in_se = max_dev_in_se.max(dev / se);
            }
        }
        let rows = |m: &DMatrix<f64>| {
            (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)]).collect())
                .collect()
        };
        SimReport {
            protocol: protocol.to_owned(),
            r,
            n_rounds: n,
            seed,
            labels: analytic.labels().to_vec(),
            empirical_ccm: rows(&empirical),
            analytic_ccm: rows(x),
            max_abs_dev,
            max_dev_in_se,
        }
    }

    pub fn empirical_matrix(&self) -> DMatrix<f64> {
        let d = self.labels.len();
        DMatrix::from_fn(d, d, |i, j| self.empirical_ccm[i][j])
    }

    /// Plug-in Gaussian fitted to the empirical CCM.
    pub fn empirical_gaussian(&self) -> Result<GaussianVector> {
        GaussianVector::new(&self.labels, self.empirical_matrix())
    }

    pub fn within_se(&self, bound: f64) -> bool {
        self.max_dev_in_se <= bound
    }
}

fn check_rounds(n: usize) -> Result<()> {
    if n < MIN_ROUNDS {
        return Err(GbiError::Domain(format!(
            "need at least {MIN_ROUNDS} rounds, got {n}"
        )));
    }
    Ok(())
}

/// Run `n` rounds in chunks, returning `2/n · Σ vvᵀ` over the produced vectors.
fn accumulate<F>(n: usize, seed: u64, dim: usize, draw: F) -> Result<DMatrix<f64>>
where
    F: Fn(&mut rand_chacha::ChaCha20Rng, &mut [f64]) -> u32 + Sync,
{
    let chunks = n.div_ceil(CHUNK_ROUNDS);
    let partial: Vec<(Vec<f64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let rounds = CHUNK_ROUNDS.min(n - c * CHUNK_ROUNDS);
            let mut rng = substream_rng(seed, c as u64);
            let mut gram = vec![0.0; dim * dim];
            let mut v = vec![0.0; dim];
            let mut messages = 0u64;
            for _ in 0..rounds {
                messages += u64::from(draw(&mut rng, &mut v));
                for i in 0..dim {
                    for j in 0..=i {
                        gram[i * dim + j] += v[i] * v[j];
                    }
                }
            }
            (gram, messages)
        })
        .collect();
    let messages: u64 = partial.iter().map(|p| p.1).sum();
    if messages != n as u64 {
        return Err(GbiError::Numerical(format!(
            "{messages} broadcasts in {n} rounds"
        )));
    }
    let grams: Vec<Vec<f64>> = partial.into_iter().map(|p| p.0).collect();
    let total = pairwise_sum(&grams);
    let scale = 2.0 / n as f64;
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = if j <= i { (i, j) } else { (j, i) };
        total[a * dim + b] * scale
    }))
}

fn pairwise_sum(parts: &[Vec<f64>]) -> Vec<f64> {
    match parts.len() {
        0 => Vec::new(),
        1 => parts[0].clone(),
        len => {
            let (l, r) = parts.split_at(len / 2);
            let mut a = pairwise_sum(l);
            for (x, y) in a.iter_mut().zip(pairwise_sum(r)) {
                *x += y;
            }
            a
        }
    }
}

/// Simulate `n` rounds of the protocol and compare the empirical CCM of
/// `(x_A, x_B, x_C, x_E)` with the exact composition.
pub fn simulate(p: &SplittingProtocol, n: usize, seed: u64) -> Result<SimReport> {
    check_rounds(n)?;
    let model = ProtocolModel::new(p)?;
    let analytic = compose_protocol(p)?;
    let outputs = model.output_labels();
    if outputs
        .iter()
        .map(String::as_str)
        .ne(analytic.labels().iter().map(String::as_str))
    {
        return Err(GbiError::Dimension(
            "party outputs do not match the composed labels".into(),
        ));
    }
    let dim = outputs.len();
    let empirical = accumulate(n, seed, dim, |rng, out| {
        let mut slots = [0.0_f64; 8];
        model.round(rng, &mut slots[..model.slots], out)
    })?;
    Ok(SimReport::build(
        p.splitting.slug(),
        p.r,
        n,
        seed,
        &analytic,
        empirical,
    ))
}

/// Sample all five variables of `Π(r)` directly and compare with `X(r)`.
pub fn simulate_full(r: f64, n: usize, seed: u64) -> Result<SimReport> {
    check_rounds(n)?;
    let pi = pi_distribution(r)?;
    let sampler = pi.sampler()?;
    let empirical = accumulate(n, seed, pi.dim(), |rng, out| {
        sampler.draw_into(rng, out);
        1
    })?;
    Ok(SimReport::build("full", r, n, seed, &pi, empirical))
}
