//! Classical leakage-flag Monte Carlo on the surface-code layout.
//!
//! Every physical qubit carries one flag (OK or leaked).  Data qubits sit on
//! an `n × n` grid, ancillas on the rotated-code stabilizer positions
//! (`n² − 1` of them) plus one extra column of `n` ancillas on the right edge,
//! which is what makes a perfect data→ancilla matching possible.
//!
//! Coordinates are doubled so that data live on even points and ancillas on
//! points at Chebyshev distance one from their neighbours.
//!
//! A round has four schedule steps.  In every step each qubit performs one
//! operation (a parity-check interaction or an idle slot) and leaks with
//! probability `p_leak` if it was OK.  Interacting pairs with exactly one
//! leaked member may swap flags (`transfer_prob`).  Because data and
//! ancillas then have identical per-step marginals, transfers leave the data
//! marginal unchanged and the stationary pre-LRU fraction is `1 − (1 − p)⁴`.
//!
//! Ordinary measurement does not remove leakage.  Only the LRU stage
//! initializes ancillas; with `lru_mode = none` leakage therefore accumulates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};

/// Parity-check operations per data qubit and round.
pub const PARITY_STEPS: usize = 4;
/// Number of SINL applications after which the layout returns to itself.
pub const RELABEL_PERIOD: usize = 2;

const STEP_OFFSETS: [(i32, i32); PARITY_STEPS] = [(1, 1), (-1, 1), (1, -1), (-1, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LruMode {
    #[default]
    None,
    Sil,
    Sinl,
}

impl fmt::Display for LruMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LruMode::None => "none",
            LruMode::Sil => "sil",
            LruMode::Sinl => "sinl",
        })
    }
}

impl FromStr for LruMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(LruMode::None),
            "sil" => Ok(LruMode::Sil),
            "sinl" => Ok(LruMode::Sinl),
            _ => Err(Error::InvalidConfig(format!("unknown lru mode {s:?}"))),
        }
    }
}

fn default_transfer() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

/// User-facing simulation parameters (the JSON config).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub n: usize,
    pub p_leak: f64,
    #[serde(default)]
    pub lru_mode: LruMode,
    #[serde(default)]
    pub lru_failure: f64,
    #[serde(default = "default_transfer")]
    pub transfer_prob: f64,
    #[serde(default)]
    pub seed: u64,
    pub rounds: usize,
    #[serde(default)]
    pub burn_in: usize,
    /// Include the extra right-edge ancilla column.
    #[serde(default = "default_true")]
    pub edge_column: bool,
}

impl LatticeParams {
    pub fn new(n: usize, p_leak: f64, lru_mode: LruMode) -> Self {
        LatticeParams {
            n,
            p_leak,
            lru_mode,
            lru_failure: 0.0,
            transfer_prob: default_transfer(),
            seed: 0,
            rounds: 1000,
            burn_in: 0,
            edge_column: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        for (name, p) in [
            ("p_leak", self.p_leak),
            ("lru_failure", self.lru_failure),
            ("transfer_prob", self.transfer_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.rounds <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "rounds ({}) must exceed burn_in ({})",
                self.rounds, self.burn_in
            )));
        }
        Ok(())
    }
}

/// Geometry: sites, adjacency, matching and the parity-check schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeLayout {
    pub n: usize,
    pub data_sites: Vec<(i32, i32)>,
    pub ancilla_sites: Vec<(i32, i32)>,
    /// Ancillas adjacent to each data qubit.
    pub adjacency: Vec<Vec<usize>>,
    /// Matched ancilla for each data qubit (empty if no perfect matching).
    pub matching: Vec<usize>,
    /// Partner ancilla of each data qubit in each schedule step.
    pub schedule: [Vec<Option<usize>>; PARITY_STEPS],
}

impl LatticeLayout {
    pub fn n_data(&self) -> usize {
        self.data_sites.len()
    }

    pub fn n_ancilla(&self) -> usize {
        self.ancilla_sites.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data() + self.n_ancilla()
    }

    pub fn has_perfect_matching(&self) -> bool {
        self.matching.len() == self.n_data()
    }
}

/// Builds the layout for side length `n`.
pub fn build_layout(n: usize, edge_column: bool) -> Result<LatticeLayout> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("n must be at least 2, got {n}")));
    }
    let ni = n as i32;
    let data_sites: Vec<(i32, i32)> =
        (0..ni).flat_map(|y| (0..ni).map(move |x| (2 * x, 2 * y))).collect();

    let mut ancilla_sites = Vec::with_capacity(n * n - 1 + n);
    // Interior plaquettes.
    for y in 0..ni - 1 {
        for x in 0..ni - 1 {
            ancilla_sites.push((2 * x + 1, 2 * y + 1));
        }
    }
    // Weight-two boundary checks, alternating between opposite edges.
    for x in 0..ni - 1 {
        let y = if x % 2 == 0 { -1 } else { 2 * ni - 1 };
        ancilla_sites.push((2 * x + 1, y));
    }
    for y in 0..ni - 1 {
        let x = if y % 2 == 0 { 2 * ni - 1 } else { -1 };
        ancilla_sites.push((x, 2 * y + 1));
    }
    if edge_column {
        for y in 0..ni {
            ancilla_sites.push((2 * ni - 1, 2 * y));
        }
    }

    let index: HashMap<(i32, i32), usize> =
        ancilla_sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let adjacency: Vec<Vec<usize>> = data_sites
        .iter()
        .map(|&(x, y)| {
            let mut adj: Vec<usize> = (-1..=1)
                .flat_map(|dy| (-1..=1).map(move |dx| (x + dx, y + dy)))
                .filter_map(|s| index.get(&s).copied())
                .collect();
            adj.sort_unstable();
            adj
        })
        .collect();
    let schedule = STEP_OFFSETS.map(|(dx, dy)| {
        data_sites.iter().map(|&(x, y)| index.get(&(x + dx, y + dy)).copied()).collect()
    });
    let matching = max_matching(&adjacency, ancilla_sites.len());
    let matching = if matching.iter().all(Option::is_some) {
        matching.into_iter().flatten().collect()
    } else {
        Vec::new()
    };
    Ok(LatticeLayout { n, data_sites, ancilla_sites, adjacency, matching, schedule })
}

/// Maximum bipartite matching by augmenting paths.  Returns the partner of
/// each left vertex.
pub fn max_matching(adjacency: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    fn augment(
        u: usize,
        adjacency: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &v in &adjacency[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adjacency, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; n_right];
    for u in 0..adjacency.len() {
        let mut seen = vec![false; n_right];
        augment(u, adjacency, &mut seen, &mut owner);
    }
    let mut partner = vec![None; adjacency.len()];
    for (v, u) in owner.iter().enumerate() {
        if let Some(u) = *u {
            partner[u] = Some(v);
        }
    }
    partner
}

/// Parameters plus validated geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig {
    pub params: LatticeParams,
    pub layout: LatticeLayout,
}

pub fn build_lattice(params: LatticeParams) -> Result<LatticeConfig> {
    params.validate()?;
    let layout = build_layout(params.n, params.edge_column)?;
    if layout.adjacency.iter().any(Vec::is_empty) {
        return Err(Error::InvalidConfig("a data site has no adjacent ancilla".into()));
    }
    if params.lru_mode != LruMode::None && !layout.has_perfect_matching() {
        return Err(Error::InvalidConfig(format!(
            "no perfect data→ancilla matching for n = {} with {} ancillas",
            params.n,
            layout.n_ancilla()
        )));
    }
    Ok(LatticeConfig { params, layout })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// OK → leaked events on any qubit.
    pub leak_events: u64,
    /// Of those, events on data qubits.
    pub data_leak_events: u64,
    /// Leaked flags cleared during the LRU stage (ancilla initialization and
    /// discard).
    pub lru_corrections: u64,
    /// Leaked data qubits the LRU failed to fix.
    pub lru_failures: u64,
    pub lru_ops: u64,
    pub parity_slots: u64,
    pub interactions: u64,
    pub transfers: u64,
    pub catalyzed_errors: u64,
}

impl Counters {
    fn add(&mut self, o: &Counters) {
        self.leak_events += o.leak_events;
        self.data_leak_events += o.data_leak_events;
        self.lru_corrections += o.lru_corrections;
        self.lru_failures += o.lru_failures;
        self.lru_ops += o.lru_ops;
        self.parity_slots += o.parity_slots;
        self.interactions += o.interactions;
        self.transfers += o.transfers;
        self.catalyzed_errors += o.catalyzed_errors;
    }
}

/// Flags are indexed by physical site: data sites first, then ancillas.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub leaked: Vec<bool>,
    pub round: usize,
    pub counters: Counters,
    /// Number of SINL relabelings modulo the relabeling period.
    pub layout_offset: usize,
}

impl LatticeState {
    pub fn new(layout: &LatticeLayout) -> Self {
        LatticeState {
            leaked: vec![false; layout.n_qubits()],
            round: 0,
            counters: Counters::default(),
            layout_offset: 0,
        }
    }

    /// Physical site currently holding data qubit `i`.
    pub fn data_site(&self, layout: &LatticeLayout, i: usize) -> usize {
        if self.layout_offset % 2 == 1 {
            layout.n_data() + layout.matching[i]
        } else {
            i
        }
    }

    /// Physical site currently playing ancilla `j`.
    pub fn ancilla_site(&self, layout: &LatticeLayout, j: usize, owner: &[Option<usize>]) -> usize {
        match (self.layout_offset % 2, owner.get(j).copied().flatten()) {
            (1, Some(i)) => i,
            _ => layout.n_data() + j,
        }
    }

    pub fn data_leaked_count(&self, layout: &LatticeLayout) -> usize {
        (0..layout.n_data()).filter(|&i| self.leaked[self.data_site(layout, i)]).count()
    }

    pub fn total_leaked(&self) -> usize {
        self.leaked.iter().filter(|&&l| l).count()
    }

    pub fn data_leaked_fraction(&self, layout: &LatticeLayout) -> f64 {
        self.data_leaked_count(layout) as f64 / layout.n_data() as f64
    }
}

/// Per-round observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pre_lru_fraction: f64,
    pub leaked_fraction: f64,
}

/// Inverse of the matching: ancilla → data.
fn owners(layout: &LatticeLayout) -> Vec<Option<usize>> {
    let mut owner = vec![None; layout.n_ancilla()];
    for (i, &a) in layout.matching.iter().enumerate() {
        owner[a] = Some(i);
    }
    owner
}

/// One syndrome round followed by the LRU stage.
pub fn step_round(state: &mut LatticeState, config: &LatticeConfig, rng: &mut impl Rng) -> RoundRecord {
    let owner = owners(&config.layout);
    step_round_with(state, config, &owner, rng)
}

fn step_round_with(
    state: &mut LatticeState,
    config: &LatticeConfig,
    owner: &[Option<usize>],
    rng: &mut impl Rng,
) -> RoundRecord {
    let p = &config.params;
    let layout = &config.layout;
    let nd = layout.n_data();
    let data: Vec<usize> = (0..nd).map(|i| state.data_site(layout, i)).collect();
    let mut is_data = vec![false; layout.n_qubits()];
    for &d in &data {
        is_data[d] = true;
    }
    let mut c = Counters::default();

    for step in &layout.schedule {
        for (site, flag) in state.leaked.iter_mut().enumerate() {
            if !*flag && p.p_leak > 0.0 && rng.random_bool(p.p_leak) {
                *flag = true;
                c.leak_events += 1;
                if is_data[site] {
                    c.data_leak_events += 1;
                }
            }
        }
        c.parity_slots += nd as u64;
        for (i, partner) in step.iter().enumerate() {
            let Some(j) = *partner else { continue };
            let (d, a) = (data[i], state.ancilla_site(layout, j, owner));
            c.interactions += 1;
            if state.leaked[d] != state.leaked[a] {
                c.catalyzed_errors += 1;
                if p.transfer_prob > 0.0 && rng.random_bool(p.transfer_prob) {
                    state.leaked.swap(d, a);
                    c.transfers += 1;
                }
            }
        }
    }

    let pre = data.iter().filter(|&&d| state.leaked[d]).count();

    if p.lru_mode != LruMode::None {
        // Fresh ancillas for the LRU.
        for site in 0..layout.n_qubits() {
            if !is_data[site] && state.leaked[site] {
                state.leaked[site] = false;
                c.lru_corrections += 1;
            }
        }
        for i in 0..nd {
            let d = data[i];
            let a = state.ancilla_site(layout, layout.matching[i], owner);
            c.lru_ops += 1;
            let fixed = !state.leaked[d] || {
                let failed = p.lru_failure > 0.0 && rng.random_bool(p.lru_failure);
                if failed {
                    c.lru_failures += 1;
                }
                !failed
            };
            match p.lru_mode {
                // Leakage moves into the ancilla; the computational state stays.
                LruMode::Sil => {
                    if !fixed {
                        continue;
                    }
                    state.leaked.swap(d, a);
                }
                // Computational state moves into the ancilla; leakage stays
                // behind on what is now the ancilla position.
                LruMode::Sinl => {
                    if !fixed {
                        state.leaked.swap(d, a);
                    }
                }
                LruMode::None => unreachable!(),
            }
        }
        if p.lru_mode == LruMode::Sinl {
            state.layout_offset = (state.layout_offset + 1) % RELABEL_PERIOD;
        }
        // Discard: ancillas are re-initialized after use.
        let data_now: Vec<usize> = (0..nd).map(|i| state.data_site(layout, i)).collect();
        let mut keep = vec![false; layout.n_qubits()];
        for &d in &data_now {
            keep[d] = true;
        }
        for site in 0..layout.n_qubits() {
            if !keep[site] && state.leaked[site] {
                state.leaked[site] = false;
                c.lru_corrections += 1;
            }
        }
    }

    state.round += 1;
    state.counters.add(&c);
    let post = state.data_leaked_count(layout);
    RoundRecord {
        round: state.round,
        pre_lru_fraction: pre as f64 / nd as f64,
        leaked_fraction: post as f64 / nd as f64,
    }
}

/// Stationary pre-LRU leaked fraction of the per-qubit chain.
pub fn analytic_steady_state(p_leak: f64, k_ops: usize, lru_failure: f64) -> f64 {
    let q = (1.0 - p_leak).powi(k_ops as i32);
    let denom = 1.0 - lru_failure * q;
    if denom <= 0.0 {
        // p = 0 and the LRU never works: nothing ever leaks.
        return 0.0;
    }
    (1.0 - q) / denom
}

/// Summary statistics of one series over the measurement window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: f64,
    pub variance: f64,
    /// Batch-means standard error of the mean.
    pub std_error: f64,
}

impl SeriesStats {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len().max(1) as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let variance = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SeriesStats { mean, variance, std_error: batch_std_error(xs) }
    }
}

fn batch_std_error(xs: &[f64]) -> f64 {
    let batches = xs.len().min(32);
    if batches < 2 {
        return 0.0;
    }
    let size = xs.len() / batches;
    let start = xs.len() - batches * size;
    let means: Vec<f64> =
        xs[start..].chunks(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (var / batches as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub params: LatticeParams,
    pub n_data: usize,
    pub n_ancilla: usize,
    pub rounds: usize,
    pub burn_in: usize,
    /// Data leakage right before the LRU stage.
    pub pre_lru: SeriesStats,
    /// Data leakage at the end of each round.
    pub end_of_round: SeriesStats,
    pub final_leaked_fraction: f64,
    pub analytic: f64,
    /// (pre-LRU mean − analytic) / standard error; absent when the error is zero.
    pub z_score: Option<f64>,
    pub layout_offset: usize,
    pub counters: Counters,
    #[serde(skip)]
    pub series: Vec<RoundRecord>,
}

impl SimReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,leaked_fraction,pre_lru_fraction\n");
        for r in &self.series {
            out.push_str(&format!("{},{},{}\n", r.round, r.leaked_fraction, r.pre_lru_fraction));
        }
        out
    }
}

/// RNG for repetition `rep`: one stream per repetition.
pub fn repetition_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

pub fn run(config: &LatticeConfig) -> SimReport {
    run_with_rng(config, &mut repetition_rng(config.params.seed, 0))
}

pub fn run_with_rng(config: &LatticeConfig, rng: &mut impl Rng) -> SimReport {
    let p = &config.params;
    let layout = &config.layout;
    let owner = owners(layout);
    let mut state = LatticeState::new(layout);
    let series: Vec<RoundRecord> =
        (0..p.rounds).map(|_| step_round_with(&mut state, config, &owner, rng)).collect();
    let window = &series[p.burn_in..];
    let pre: Vec<f64> = window.iter().map(|r| r.pre_lru_fraction).collect();
    let end: Vec<f64> = window.iter().map(|r| r.leaked_fraction).collect();
    let pre_lru = SeriesStats::of(&pre);
    let failure = if p.lru_mode == LruMode::None { 1.0 } else { p.lru_failure };
    let analytic = analytic_steady_state(p.p_leak, PARITY_STEPS, failure);
    let z_score = (pre_lru.std_error > 0.0).then(|| (pre_lru.mean - analytic) / pre_lru.std_error);
    SimReport {
        params: p.clone(),
        n_data: layout.n_data(),
        n_ancilla: layout.n_ancilla(),
        rounds: p.rounds,
        burn_in: p.burn_in,
        pre_lru,
        end_of_round: SeriesStats::of(&end),
        final_leaked_fraction: series.last().map_or(0.0, |r| r.leaked_fraction),
        analytic,
        z_score,
        layout_offset: state.layout_offset,
        counters: state.counters,
        series,
    }
}

/// Independent repetitions, each on its own RNG stream.
pub fn run_repetitions(config: &LatticeConfig, reps: usize, exec: Execution) -> Vec<SimReport> {
    map_indexed(reps, exec, |rep| {
        run_with_rng(config, &mut repetition_rng(config.params.seed, rep as u64))
    })
}
