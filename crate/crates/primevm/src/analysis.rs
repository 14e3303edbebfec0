//! Capacity and firing-probability formulas, and the spiking versus
//! non-spiking filtering comparison on ideal disjoint attractors.

use crate::error::{Error, Result};
use crate::memory;
use crate::substrate::spike_fn;
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityParams {
    pub c1: f64,
    pub c2: f64,
    pub gamma: f64,
    pub m: f64,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl CapacityParams {
    pub fn validate(&self) -> Result<Vec<String>> {
        let all = [self.c1, self.c2, self.gamma, self.theta, self.kappa];
        if all.iter().any(|&v| !(v > 0.0)) || [self.m, self.s, self.t].iter().any(|&v| v < 0.0) {
            return Err(Error::Config("capacity parameters must be positive".into()));
        }
        if self.c1 >= 1.0 || self.c2 >= 1.0 {
            return Err(Error::Config("coverages must lie in (0, 1)".into()));
        }
        let mut warnings = Vec::new();
        for (n, c) in [("c1", self.c1), ("c2", self.c2)] {
            if c > 0.05 {
                warnings.push(format!("{n} = {c} is not small; the bound's approximations weaken"));
            }
        }
        Ok(warnings)
    }

    pub fn capacity_bound(&self) -> u64 {
        memory::capacity_bound(self.c1, self.c2, self.gamma, self.m, self.s, self.t)
    }
}

/// Minimum coverage θ/κ that gives each neuron θ feedback synapses.
pub fn min_coverage(theta: f64, kappa: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= kappa) {
        return Err(Error::Config(format!("need 0 < theta <= kappa, got {theta}, {kappa}")));
    }
    Ok(theta / kappa)
}

/// (P(N(θ, √θ) > 1/(k·a)), ((1-c2)/c2)·P(N(θ/γ, √(θ/γ)) > 1/(k·a))).
pub fn firing_probabilities(theta: f64, gamma: f64, ka: f64, c2: f64) -> Result<(f64, f64)> {
    if theta <= 0.0 || gamma <= 0.0 || ka <= 0.0 || !(c2 > 0.0 && c2 < 1.0) {
        return Err(Error::Config("firing probabilities need positive parameters".into()));
    }
    let threshold = 1.0 / ka;
    let tail = |mean: f64| -> f64 {
        let n = Normal::new(mean, mean.sqrt()).expect("positive variance");
        n.sf(threshold)
    };
    let p_signal = tail(theta);
    let p_noise = if gamma.is_infinite() { 0.0 } else { tail(theta / gamma) };
    Ok((p_signal, (1.0 - c2) / c2 * p_noise))
}

/// X[n+1] = C(W X[n] + sP) for a dense row-major W.
pub fn nonspiking_step(w: &[f32], x: &[f32], sp: &[f32]) -> Result<Vec<f32>> {
    let n = x.len();
    if w.len() != n * n || sp.len() != n {
        return Err(Error::Dimension {
            what: "nonspiking step".into(),
            expected: n * n,
            got: w.len(),
        });
    }
    Ok((0..n)
        .map(|j| {
            let row = &w[j * n..(j + 1) * n];
            let v: f32 = row.iter().zip(x).map(|(a, b)| a * b).sum::<f32>() + sp[j];
            v.clamp(0.0, 1.0)
        })
        .collect())
}

/// The ideal weights W* defined by W*·A_i = (1+α)A_i − α·1 on disjoint
/// attractors, applied in structured form.
#[derive(Clone, Debug)]
pub struct IdealWeights {
    n: usize,
    attractors: Vec<Vec<usize>>,
    alpha: f32,
}

impl IdealWeights {
    pub fn new(n: usize, attractors: Vec<Vec<usize>>, alpha: f32) -> Result<Self> {
        let mut seen = vec![false; n];
        for a in &attractors {
            if a.is_empty() {
                return Err(Error::Pattern("empty attractor".into()));
            }
            for &j in a {
                if j >= n || seen[j] {
                    return Err(Error::Pattern("attractors must be disjoint and in range".into()));
                }
                seen[j] = true;
            }
        }
        Ok(IdealWeights { n, attractors, alpha })
    }

    /// Contiguous blocks of `size` neurons.
    pub fn blocks(n: usize, count: usize, size: usize, alpha: f32) -> Result<Self> {
        let attractors = (0..count)
            .map(|i| (i * size..(i + 1) * size).collect())
            .collect();
        Self::new(n, attractors, alpha)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn attractors(&self) -> &[Vec<usize>] {
        &self.attractors
    }

    /// W*[j][k] = ((1+α)[j∈A_i] − α)/|A_i| for k ∈ A_i; 0 for k outside every attractor.
    pub fn apply(&self, x: &[f32]) -> Vec<f32> {
        let mut out = vec![0.0f32; self.n];
        let mut background = 0.0f32;
        for a in &self.attractors {
            let mass: f32 = a.iter().map(|&k| x[k]).sum::<f32>() / a.len() as f32;
            background += mass;
            for &j in a {
                out[j] += (1.0 + self.alpha) * mass;
            }
        }
        for v in &mut out {
            *v -= self.alpha * background;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f32> {
        let n = self.n;
        let mut w = vec![0.0f32; n * n];
        for a in &self.attractors {
            let inv = 1.0 / a.len() as f32;
            let inside = a.clone();
            for j in 0..n {
                let on = inside.contains(&j);
                for &k in a {
                    w[j * n + k] = ((1.0 + self.alpha) * on as u8 as f32 - self.alpha) * inv;
                }
            }
        }
        w
    }

    pub fn indicator(&self, i: usize) -> Vec<f32> {
        let mut v = vec![0.0f32; self.n];
        for &j in &self.attractors[i] {
            v[j] = 1.0;
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterParams {
    pub l: usize,
    pub epsilon: f32,
    pub c: f64,
    pub alpha: f32,
    pub s: f32,
    pub steps: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            l: 100,
            epsilon: 0.3,
            c: 0.01,
            alpha: 0.1,
            s: 0.25,
            steps: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpikingOutcome {
    /// Only A₁ fires from `from` onward.
    Recovered { from: usize },
    /// Several attractors fired together at `at`.
    Tie { at: usize, attractors: Vec<usize> },
    Silent,
    Other,
}

#[derive(Clone, Debug)]
pub struct FilterReport {
    pub params: FilterParams,
    pub n: usize,
    /// Max component of the non-spiking state after each step (step 1 first).
    pub nonspiking_max: Vec<f32>,
    pub nonspiking_zero_at: Option<usize>,
    /// Attractor indices firing at each spiking step (step 1 first).
    pub spiking_firing: Vec<Vec<usize>>,
    pub outcome: SpikingOutcome,
    pub spiking_states: Vec<Vec<f32>>,
}

impl FilterParams {
    /// Attractor size round(1/c); the cluster holds l of them.
    pub fn block(&self) -> usize {
        (1.0 / self.c).round() as usize
    }
}

/// P* = A₁ + ε·Σ_{i>1} A_i.
pub fn noisy_signal(w: &IdealWeights, epsilon: f32) -> Vec<f32> {
    let mut p = vec![0.0f32; w.n()];
    for (i, a) in w.attractors().iter().enumerate() {
        let v = if i == 0 { 1.0 } else { epsilon };
        for &j in a {
            p[j] = v;
        }
    }
    p
}

/// X[n+1] = C(X[n]) − S(X[n]) + W*·S(X[n]) + sP.
pub fn spiking_step(w: &IdealWeights, x: &[f32], sp: &[f32]) -> Vec<f32> {
    let s: Vec<f32> = x.iter().map(|&v| spike_fn(v) as f32).collect();
    let ws = w.apply(&s);
    (0..x.len())
        .map(|j| x[j].clamp(0.0, 1.0) - s[j] + ws[j] + sp[j])
        .collect()
}

pub fn compare_filtering(params: &FilterParams) -> Result<FilterReport> {
    if params.l == 0 || !(params.c > 0.0 && params.c <= 1.0) {
        return Err(Error::Config("need l >= 1 and c in (0, 1]".into()));
    }
    let block = params.block();
    let n = block * params.l;
    let w = IdealWeights::blocks(n, params.l, block, params.alpha)?;
    let p = noisy_signal(&w, params.epsilon);
    let sp: Vec<f32> = p.iter().map(|&v| params.s * v).collect();

    let mut x = vec![0.0f32; n];
    let mut nonspiking_max = Vec::new();
    let mut nonspiking_zero_at = None;
    for step in 1..=params.steps {
        let wx = w.apply(&x);
        x = (0..n).map(|j| (wx[j] + sp[j]).clamp(0.0, 1.0)).collect();
        let m = x.iter().cloned().fold(0.0f32, f32::max);
        nonspiking_max.push(m);
        if m == 0.0 && nonspiking_zero_at.is_none() {
            nonspiking_zero_at = Some(step);
        }
    }

    let mut x = vec![0.0f32; n];
    let mut firing = Vec::new();
    let mut states = Vec::new();
    for _ in 0..params.steps {
        x = spiking_step(&w, &x, &sp);
        states.push(x.clone());
        let on: Vec<usize> = w
            .attractors()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.iter().any(|&j| spike_fn(x[j]) == 1))
            .map(|(i, _)| i)
            .collect();
        firing.push(on);
    }
    let first = firing.iter().position(|f| !f.is_empty());
    let outcome = match first {
        None => SpikingOutcome::Silent,
        Some(at) if firing[at].len() > 1 => SpikingOutcome::Tie {
            at: at + 1,
            attractors: firing[at].clone(),
        },
        Some(at) => {
            let a1_full = |k: usize| w.attractors()[0].iter().all(|&j| spike_fn(states[k][j]) == 1);
            if firing[at..].iter().all(|f| f == &[0]) && (at..firing.len()).all(a1_full) {
                SpikingOutcome::Recovered { from: at + 1 }
            } else {
                SpikingOutcome::Other
            }
        }
    };
    Ok(FilterReport {
        params: *params,
        n,
        nonspiking_max,
        nonspiking_zero_at,
        spiking_firing: firing,
        outcome,
        spiking_states: states,
    })
}

/// Closed-form spiking state at step n (n ≤ ⌈1/s⌉ + 1) for a member of
/// A₁, a competitor, and a neuron outside every attractor.
pub fn closed_form_spiking(params: &FilterParams, n: usize) -> (f32, f32, f32) {
    let n0 = (1.0 / params.s).ceil() as usize;
    let nf = n as f32;
    if n <= n0 {
        (nf * params.s, nf * params.s * params.epsilon, 0.0)
    } else {
        let k = (n - n0) as f32;
        (
            1.0 + params.s,
            nf * params.s * params.epsilon - k * params.alpha,
            -k * params.alpha,
        )
    }
}
