//! Brute-force Heisenberg evolution in Haar-random brickwork circuits.
//!
//! Qubit 0 is the leftmost site and the most significant bit of the matrix
//! index. Layers alternate between gates on `(0,1),(2,3),…` (layer 0, 2, …)
//! and `(1,2),(3,4),…` (layer 1, 3, …). The evolved operator is always of
//! the form `O_act ⊗ 1`, where `O_act` lives on the leftmost `s` qubits
//! that the light cone has reached; only `O_act` is stored.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocorr::evolve_density;
use crate::error::{Error, Result};
use crate::matrices::build_transfer;

pub const MAX_QUBITS: usize = 12;

/// Haar-averaged probability that a gate leaves the endpoint on its right
/// qubit, `q²/(q²+1)` at `q = 2`.
pub const QUBIT_P: f64 = 0.8;

pub type Gate = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [[Complex64; 2]; 2] {
        let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        match self {
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        }
    }
}

/// Heisenberg-evolved operator `O_act ⊗ 1` on `n_qubits`, normalized so that
/// `Tr(O†O)/2ⁿ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorState {
    n_qubits: usize,
    support: usize,
    /// Row-major `2^support × 2^support`.
    active: Vec<Complex64>,
}

impl OperatorState {
    /// Single Pauli on qubit 0.
    pub fn seed(n_qubits: usize, pauli: Pauli) -> Result<Self> {
        check_qubits(n_qubits)?;
        let m = pauli.matrix();
        Ok(OperatorState {
            n_qubits,
            support: 1,
            active: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of leftmost qubits the operator may act on nontrivially.
    pub fn support(&self) -> usize {
        self.support
    }

    fn dim(&self) -> usize {
        1 << self.support
    }

    /// `Tr(O†O)/2ⁿ`.
    pub fn norm(&self) -> f64 {
        self.active.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64
    }

    /// Full `2ⁿ × 2ⁿ` matrix; only sensible for small `n`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut s = self.clone();
        while s.support < s.n_qubits {
            s.extend();
        }
        s.active
    }

    /// `O_act → O_act ⊗ 1₂`.
    fn extend(&mut self) {
        let d = self.dim();
        let nd = 2 * d;
        let mut out = vec![Complex64::new(0.0, 0.0); nd * nd];
        for r in 0..d {
            for c in 0..d {
                let v = self.active[r * d + c];
                out[(2 * r) * nd + 2 * c] = v;
                out[(2 * r + 1) * nd + 2 * c + 1] = v;
            }
        }
        self.active = out;
        self.support += 1;
    }

    /// `O → U†OU` for `gate` on qubits `(j, j+1)`.
    pub fn conjugate(&mut self, j: usize, gate: &Gate) {
        assert!(j + 1 < self.n_qubits, "gate outside the chain");
        if j >= self.support {
            return;
        }
        if j + 1 == self.support {
            self.extend();
        }
        let d = self.dim();
        let hi = self.support - 1 - j;
        let lo = hi - 1;
        let groups = group_bases(d, hi, lo);
        let offsets = [0, 1 << lo, 1 << hi, (1 << hi) | (1 << lo)];

        // rows: O ← G† O
        let mut rows = vec![Complex64::new(0.0, 0.0); 4 * d];
        for &r0 in &groups {
            for a in 0..4 {
                let src = (r0 + offsets[a]) * d;
                rows[a * d..(a + 1) * d].copy_from_slice(&self.active[src..src + d]);
            }
            for a in 0..4 {
                let dst = (r0 + offsets[a]) * d;
                let coeffs = [gate[0][a].conj(), gate[1][a].conj(), gate[2][a].conj(), gate[3][a].conj()];
                let out = &mut self.active[dst..dst + d];
                for (c, o) in out.iter_mut().enumerate() {
                    *o = coeffs[0] * rows[c]
                        + coeffs[1] * rows[d + c]
                        + coeffs[2] * rows[2 * d + c]
                        + coeffs[3] * rows[3 * d + c];
                }
            }
        }
        // columns: O ← O G
        for row in self.active.chunks_exact_mut(d) {
            for &c0 in &groups {
                let v = [
                    row[c0 + offsets[0]],
                    row[c0 + offsets[1]],
                    row[c0 + offsets[2]],
                    row[c0 + offsets[3]],
                ];
                for b in 0..4 {
                    row[c0 + offsets[b]] =
                        v[0] * gate[0][b] + v[1] * gate[1][b] + v[2] * gate[2][b] + v[3] * gate[3][b];
                }
            }
        }
    }
}

/// Indices in `0..d` with bits `hi` and `lo` cleared.
fn group_bases(d: usize, hi: usize, lo: usize) -> Vec<usize> {
    let mask = (1 << hi) | (1 << lo);
    (0..d).filter(|i| i & mask == 0).collect()
}

fn check_qubits(n: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::param("n_qubits", n as f64, "must satisfy 2 <= n <= 12"));
    }
    Ok(())
}

/// Haar-random 4×4 unitary: Gram-Schmidt (applied twice) on the columns
/// of a complex Gaussian matrix. The implied R has a positive diagonal, so
/// no further phase correction is needed.
pub fn haar_unitary(rng: &mut impl RngCore) -> Gate {
    let mut cols = [[Complex64::new(0.0, 0.0); 4]; 4];
    for col in cols.iter_mut() {
        for z in col.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    for k in 0..4 {
        for _ in 0..2 {
            for j in 0..k {
                let dot: Complex64 = (0..4).map(|i| cols[j][i].conj() * cols[k][i]).sum();
                for i in 0..4 {
                    let v = cols[j][i];
                    cols[k][i] -= dot * v;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[k].iter_mut().for_each(|z| *z /= norm);
    }
    let mut u = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            u[r][c] = z;
        }
    }
    u
}

/// `max |(U†U - 1)_{ij}|`.
pub fn unitarity_residual(u: &Gate) -> f64 {
    let mut r = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let z: Complex64 = (0..4).map(|k| u[k][i].conj() * u[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((z - target).norm());
        }
    }
    r
}

/// Right-endpoint weights after one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliWeightProfile {
    /// Number of layers applied.
    pub t: usize,
    /// `ρ_R(x)` for sites `x = 1..=n` (qubit `x-1`).
    pub weights: Vec<f64>,
    /// Weight on the identity string.
    pub identity_weight: f64,
    pub realizations: usize,
}

/// `W(x) = Tr[O_x O_x†]/2ˣ` by tracing out one qubit at a time from the
/// right, `ρ_R(x) = W(x) - W(x-1)`.
pub fn endpoint_profile(o: &OperatorState, t: usize) -> PauliWeightProfile {
    let n = o.n_qubits;
    let mut cumulative = vec![1.0; n + 1];
    let mut m = o.active.clone();
    let mut d = o.dim();
    cumulative[o.support] = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / d as f64;
    for x in (0..o.support).rev() {
        let h = d / 2;
        let mut next = vec![Complex64::new(0.0, 0.0); h * h];
        for a in 0..h {
            for b in 0..h {
                next[a * h + b] = (m[(2 * a) * d + 2 * b] + m[(2 * a + 1) * d + 2 * b + 1]) * 0.5;
            }
        }
        m = next;
        d = h;
        cumulative[x] = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / d as f64;
    }
    let norm = cumulative[o.support];
    for w in cumulative.iter_mut().skip(o.support + 1) {
        *w = norm;
    }
    PauliWeightProfile {
        t,
        weights: (1..=n).map(|x| cumulative[x] - cumulative[x - 1]).collect(),
        identity_weight: cumulative[0],
        realizations: 1,
    }
}

/// Gate pairs `(j, j+1)` of layer `layer` (0-based).
pub fn layer_pairs(n_qubits: usize, layer: usize) -> impl Iterator<Item = usize> {
    (layer % 2..n_qubits.saturating_sub(1)).step_by(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Profiles for `t = 0..=depth`; `t = 0` is the seed.
    pub profiles: Vec<PauliWeightProfile>,
    pub final_state: OperatorState,
}

/// One circuit realization. Every gate of every layer is drawn from the
/// seeded stream, including gates outside the light cone, so the circuit
/// depends only on `(n_qubits, depth, seed)`.
pub fn evolve_realization(n_qubits: usize, depth: usize, seed: u64, pauli: Pauli) -> Result<Realization> {
    let mut state = OperatorState::seed(n_qubits, pauli)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profiles = Vec::with_capacity(depth + 1);
    profiles.push(endpoint_profile(&state, 0));
    for layer in 0..depth {
        for j in layer_pairs(n_qubits, layer) {
            let gate = haar_unitary(&mut rng);
            state.conjugate(j, &gate);
        }
        profiles.push(endpoint_profile(&state, layer + 1));
    }
    Ok(Realization {
        profiles,
        final_state: state,
    })
}

/// Seed of realization `index` under `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Realization-averaged profiles; `stderr` is the standard error of each mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedProfiles {
    pub n_qubits: usize,
    pub depth: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub mean: Vec<PauliWeightProfile>,
    pub stderr: Vec<Vec<f64>>,
    /// Largest `|Σ_x ρ_R(x) + W(0) - 1|` over realizations and layers.
    pub max_parseval_error: f64,
}

/// Runs `realizations` circuits in parallel and averages in index order.
pub fn run_ruc_ensemble(
    n_qubits: usize,
    depth: usize,
    realizations: usize,
    master_seed: u64,
) -> Result<AveragedProfiles> {
    check_qubits(n_qubits)?;
    if realizations == 0 {
        return Err(Error::param("realizations", 0.0, "need at least one"));
    }
    let runs: Vec<Vec<PauliWeightProfile>> = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            evolve_realization(n_qubits, depth, realization_seed(master_seed, i), Pauli::Z)
                .map(|r| r.profiles)
        })
        .collect::<Result<_>>()?;
    let r = realizations as f64;
    let mut mean = Vec::with_capacity(depth + 1);
    let mut stderr = Vec::with_capacity(depth + 1);
    let mut max_parseval_error = 0.0f64;
    for t in 0..=depth {
        let mut s = vec![0.0; n_qubits];
        let mut s2 = vec![0.0; n_qubits];
        let mut id = 0.0;
        for run in &runs {
            let prof = &run[t];
            let total: f64 = prof.weights.iter().sum::<f64>() + prof.identity_weight;
            max_parseval_error = max_parseval_error.max((total - 1.0).abs());
            for (x, &w) in prof.weights.iter().enumerate() {
                s[x] += w;
                s2[x] += w * w;
            }
            id += prof.identity_weight;
        }
        let m: Vec<f64> = s.iter().map(|v| v / r).collect();
        let e = m
            .iter()
            .zip(&s2)
            .map(|(mu, q)| {
                if realizations > 1 {
                    ((q / r - mu * mu).max(0.0) / (r - 1.0)).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        mean.push(PauliWeightProfile {
            t,
            weights: m,
            identity_weight: id / r,
            realizations,
        });
        stderr.push(e);
    }
    Ok(AveragedProfiles {
        n_qubits,
        depth,
        realizations,
        master_seed,
        mean,
        stderr,
        max_parseval_error,
    })
}

/// Qubit-to-cell alignment. With `offset = 0`, cell `G` holds qubits
/// `(2G, 2G+1)` and hydro step `k` is read after layer `2k`; this is the
/// alignment under which the averaged endpoint walk is exactly `T(p)`,
/// boundaries included. With `offset = 1`, cells are `({0}, (1,2), (3,4), …)`
/// read after layer `2k+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMapping {
    pub offset: usize,
}

impl CellMapping {
    pub fn cell(&self, qubit: usize) -> usize {
        (qubit + self.offset) / 2
    }

    pub fn n_cells(&self, n_qubits: usize) -> usize {
        self.cell(n_qubits - 1) + 1
    }

    /// Layers applied before hydro step `k` is read.
    pub fn layers_for_step(&self, k: usize) -> usize {
        2 * k + 1 + self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub step: usize,
    pub layers: usize,
    pub ruc: Vec<f64>,
    pub hydro: Vec<f64>,
    pub total_variation: f64,
    pub ruc_mean: f64,
    pub hydro_mean: f64,
    pub ruc_width: f64,
    pub hydro_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroComparison {
    pub mapping: CellMapping,
    pub p: f64,
    pub steps: Vec<StepComparison>,
    /// Slope of the mean cell position against step, cells per step.
    pub front_velocity_ruc: Option<f64>,
    pub front_velocity_hydro: Option<f64>,
}

pub const MIN_REALIZATIONS: usize = 50;

/// Coarse-grains averaged profiles into cells and overlays `T(p)^k δ_1`.
/// `p` also defines the drift of the prediction (0.8 for Haar qubits).
pub fn compare_to_hydro(avg: &AveragedProfiles, mapping: CellMapping, p: f64) -> Result<HydroComparison> {
    if avg.realizations < MIN_REALIZATIONS {
        return Err(Error::InsufficientData(format!(
            "{} realizations; at least {MIN_REALIZATIONS} needed",
            avg.realizations
        )));
    }
    if mapping.offset > 1 {
        return Err(Error::param("offset", mapping.offset as f64, "must be 0 or 1"));
    }
    let cells = mapping.n_cells(avg.n_qubits);
    let mut n_steps = 0;
    while mapping.layers_for_step(n_steps) <= avg.depth {
        n_steps += 1;
    }
    let hydro = evolve_density(
        &build_transfer(p, cells.max(2))?,
        1,
        n_steps.saturating_sub(1),
        &(0..n_steps).collect::<Vec<_>>(),
    )?;
    let mut steps = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let layers = mapping.layers_for_step(k);
        let prof = &avg.mean[layers];
        let mut ruc = vec![0.0; cells];
        for (q, &w) in prof.weights.iter().enumerate() {
            ruc[mapping.cell(q)] += w;
        }
        let h = &hydro.checkpoints[k].values[..cells];
        let total_variation = 0.5 * ruc.iter().zip(h).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let (ruc_mean, ruc_width) = moments(&ruc);
        let (hydro_mean, hydro_width) = moments(h);
        steps.push(StepComparison {
            step: k,
            layers,
            ruc,
            hydro: h.to_vec(),
            total_variation,
            ruc_mean,
            hydro_mean,
            ruc_width,
            hydro_width,
        });
    }
    let slope = |f: &dyn Fn(&StepComparison) -> f64| {
        (steps.len() >= 2).then(|| {
            let ks: Vec<f64> = steps.iter().map(|s| s.step as f64).collect();
            let ys: Vec<f64> = steps.iter().map(f).collect();
            let mk = ks.iter().sum::<f64>() / ks.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let sxy: f64 = ks.iter().zip(&ys).map(|(k, y)| (k - mk) * (y - my)).sum();
            let sxx: f64 = ks.iter().map(|k| (k - mk).powi(2)).sum();
            sxy / sxx
        })
    };
    let front_velocity_ruc = slope(&|s| s.ruc_mean);
    let front_velocity_hydro = slope(&|s| s.hydro_mean);
    Ok(HydroComparison {
        mapping,
        p,
        steps,
        front_velocity_ruc,
        front_velocity_hydro,
    })
}

/// Mean and standard deviation of cell index under (unnormalized) weights.
fn moments(w: &[f64]) -> (f64, f64) {
    let total: f64 = w.iter().sum();
    let mean = w.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>() / total;
    let var = w
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 - mean).powi(2) * v)
        .sum::<f64>()
        / total;
    (mean, var.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadingEstimate {
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
}

/// Weight on the right qubit after one Haar gate acts on `Z ⊗ 1`, averaged
/// over `samples` gates.
pub fn single_gate_spreading(samples: usize, seed: u64) -> Result<SpreadingEstimate> {
    if samples < 2 {
        return Err(Error::param("samples", samples as f64, "need at least two"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let mut o = OperatorState::seed(2, Pauli::Z)?;
        o.conjugate(0, &haar_unitary(&mut rng));
        let w = endpoint_profile(&o, 1).weights[1];
        s += w;
        s2 += w * w;
    }
    let n = samples as f64;
    let mean = s / n;
    Ok(SpreadingEstimate {
        samples,
        mean,
        stderr: ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kron_dense(n: usize, j: usize, g: &Gate) -> Vec<Complex64> {
        // I_{2^j} ⊗ G ⊗ I_{2^{n-j-2}}
        let d = 1 << n;
        let lo = n - j - 2;
        let mut u = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                let rest_r = r & !(3 << lo);
                let rest_c = c & !(3 << lo);
                if rest_r == rest_c {
                    u[r * d + c] = g[(r >> lo) & 3][(c >> lo) & 3];
                }
            }
        }
        u
    }

    fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = a[i * d + k];
                for j in 0..d {
                    out[i * d + j] += aik * b[k * d + j];
                }
            }
        }
        out
    }

    fn dagger(a: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = a[i * d + j].conj();
            }
        }
        out
    }

    #[test]
    fn haar_gates_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(unitarity_residual(&haar_unitary(&mut rng)) < 1e-12);
        }
    }

    #[test]
    fn conjugation_matches_dense_product() {
        let n = 4;
        let d = 1 << n;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut o = OperatorState::seed(n, Pauli::Y).unwrap();
        let mut dense = o.to_dense();
        for &j in &[0, 1, 2, 0, 1] {
            let g = haar_unitary(&mut rng);
            o.conjugate(j, &g);
            let u = kron_dense(n, j, &g);
            dense = matmul(&matmul(&dagger(&u, d), &dense, d), &u, d);
        }
        let got = o.to_dense();
        let err = got.iter().zip(&dense).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn seed_profile_is_delta() {
        let o = OperatorState::seed(6, Pauli::Z).unwrap();
        let p = endpoint_profile(&o, 0);
        assert!((p.weights[0] - 1.0).abs() < 1e-15);
        assert!(p.weights[1..].iter().all(|w| w.abs() < 1e-15));
        assert!(p.identity_weight.abs() < 1e-15);
        let r = evolve_realization(6, 0, 3, Pauli::Z).unwrap();
        assert_eq!(r.profiles.len(), 1);
        assert_eq!(r.final_state, o);
    }

    #[test]
    fn norm_and_parseval_preserved() {
        let r = evolve_realization(8, 50, 4, Pauli::X).unwrap();
        assert!((r.final_state.norm() - 1.0).abs() < 1e-10);
        for p in &r.profiles {
            let s: f64 = p.weights.iter().sum::<f64>() + p.identity_weight;
            assert!((s - 1.0).abs() < 1e-9);
            assert!(p.weights.iter().all(|&w| w > -1e-12));
        }
    }

    #[test]
    fn light_cone_grows_one_site_per_layer() {
        let r = evolve_realization(10, 4, 5, Pauli::Z).unwrap();
        assert_eq!(r.final_state.support(), 5);
        for p in &r.profiles {
            let edge = (p.t + 1).min(10);
            assert!(p.weights[edge..].iter().all(|w| w.abs() < 1e-12));
        }
    }

    #[test]
    fn traceless_seed_has_no_identity_weight() {
        let r = evolve_realization(6, 7, 6, Pauli::Z).unwrap();
        assert!(r.profiles.iter().all(|p| p.identity_weight.abs() < 1e-12));
    }

    #[test]
    fn ensemble_is_deterministic() {
        let a = run_ruc_ensemble(6, 4, 8, 7).unwrap();
        let b = run_ruc_ensemble(6, 4, 8, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.max_parseval_error < 1e-9);
    }

    #[test]
    fn mapping_layout() {
        let m0 = CellMapping { offset: 0 };
        assert_eq!((m0.cell(0), m0.cell(1), m0.cell(2)), (0, 0, 1));
        assert_eq!(m0.n_cells(12), 6);
        assert_eq!(m0.layers_for_step(0), 1);
        let m1 = CellMapping { offset: 1 };
        assert_eq!((m1.cell(0), m1.cell(1), m1.cell(2)), (0, 1, 1));
        assert_eq!(m1.n_cells(12), 7);
    }

    #[test]
    fn comparison_needs_enough_realizations() {
        let a = run_ruc_ensemble(4, 3, 10, 1).unwrap();
        assert!(matches!(
            compare_to_hydro(&a, CellMapping { offset: 0 }, QUBIT_P),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn first_step_is_exact() {
        let a = run_ruc_ensemble(6, 1, 50, 3).unwrap();
        let c = compare_to_hydro(&a, CellMapping { offset: 0 }, QUBIT_P).unwrap();
        assert_eq!(c.steps.len(), 1);
        assert!(c.steps[0].total_variation < 1e-12);
    }
}
