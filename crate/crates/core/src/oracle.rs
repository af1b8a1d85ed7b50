//! Exact references for small instances.
//!
//! Everything here is brute force: dense Pauli distributions over all `4^n`
//! Paulis (n ≤ 3), complex state vectors (n ≤ 4) and density matrices
//! (n ≤ 3). The fast paths elsewhere in the crate are checked against these.
//! Caps are hard errors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::BitString;
use crate::circuit::MirrorCircuit;
use crate::clifford::{Clifford1Q, Generator};
use crate::error::{check_dims, Error, Result};
use crate::layer::{Layer, Op};
use crate::noise::{ErrorModel, StochasticPauliChannel};
use crate::pauli::{Pauli, PauliString};

pub const CHANNEL_CAP: usize = 3;
pub const STATEVECTOR_CAP: usize = 4;
pub const DENSITY_CAP: usize = 3;

fn cap(what: &'static str, cap: usize, n: usize) -> Result<()> {
    if n > cap {
        Err(Error::OracleCap { what, cap, n })
    } else {
        Ok(())
    }
}

/// `M_{jk} = C(k, j) 2^j / 3^k`, the probability that a locally twirled
/// weight-`k` error flips `j` output bits. Stored as exact numerators over `3^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTransferMatrix {
    n: usize,
    /// `num[j][k] = C(k, j) 2^j`.
    num: Vec<Vec<u128>>,
}

pub fn build_m(n: usize) -> WeightTransferMatrix {
    assert!(n <= 64, "weight transfer matrix limited to n <= 64");
    let mut num = vec![vec![0u128; n + 1]; n + 1];
    for k in 0..=n {
        let mut c: u128 = 1;
        for j in 0..=k {
            num[j][k] = c << j;
            c = c * (k - j) as u128 / (j + 1) as u128;
        }
    }
    WeightTransferMatrix { n, num }
}

impl WeightTransferMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn numerator(&self, j: usize, k: usize) -> u128 {
        self.num[j][k]
    }

    pub fn denominator(k: usize) -> u128 {
        3u128.pow(k as u32)
    }

    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.num[j][k] as f64 / Self::denominator(k) as f64
    }

    /// Column `k` sums to 1, checked in exact integer arithmetic.
    pub fn column_is_stochastic(&self, k: usize) -> bool {
        self.num.iter().map(|row| row[k]).sum::<u128>() == Self::denominator(k)
    }

    /// `h = M p`.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.n + 1);
        (0..=self.n).map(|j| (0..=self.n).map(|k| self.entry(j, k) * p[k]).sum()).collect()
    }
}

pub use crate::analysis::recover_p0;

/// A probability for every `n`-qubit Pauli, identity included, indexed by
/// [`PauliString::dense_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensePauliDistribution {
    pub n: usize,
    pub probs: Vec<f64>,
}

impl DensePauliDistribution {
    pub fn identity(n: usize) -> Result<Self> {
        cap("dense Pauli distribution", CHANNEL_CAP, n)?;
        let mut probs = vec![0.0; 1 << (2 * n)];
        probs[0] = 1.0;
        Ok(DensePauliDistribution { n, probs })
    }

    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        cap("dense Pauli distribution", CHANNEL_CAP, n)?;
        if probs.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch { expected: 1 << (2 * n), found: probs.len() });
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidChannel("dense distribution must be non-negative and sum to 1".into()));
        }
        Ok(DensePauliDistribution { n, probs })
    }

    pub fn from_channel(ch: &StochasticPauliChannel) -> Result<Self> {
        let mut d = Self::identity(ch.num_qubits())?;
        for (p, q) in ch.entries() {
            d.probs[p.dense_index()] = *q;
        }
        d.probs[0] = 1.0 - ch.infidelity();
        Ok(d)
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.probs[p.dense_index()]
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.probs[0]
    }

    pub fn polarization(&self) -> f64 {
        crate::noise::polarization(self.n, self.infidelity())
    }

    /// The distribution of `U P U†` for a layer `U`, phases dropped.
    pub fn conjugate_by(&self, layer: &Layer) -> Result<Self> {
        check_dims(self.n, layer.num_qubits())?;
        let mut out = vec![0.0; self.probs.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut ps = PauliString::from_dense_index(self.n, i);
            layer.conjugate_in_place(&mut ps);
            out[ps.dense_index()] += p;
        }
        Ok(DensePauliDistribution { n: self.n, probs: out })
    }
}

/// Distribution of the product of independent errors drawn from `a` and `b`:
/// `out[P] = Σ_Q a[Q] b[P Q]`.
pub fn compose_dense(a: &DensePauliDistribution, b: &DensePauliDistribution) -> Result<DensePauliDistribution> {
    check_dims(a.n, b.n)?;
    cap("dense Pauli distribution", CHANNEL_CAP, a.n)?;
    let len = a.probs.len();
    let mut out = vec![0.0; len];
    for (q, &aq) in a.probs.iter().enumerate() {
        if aq == 0.0 {
            continue;
        }
        for (r, &br) in b.probs.iter().enumerate() {
            out[q ^ r] += aq * br;
        }
    }
    Ok(DensePauliDistribution { n: a.n, probs: out })
}

/// `η = Σ_j (a_j − ε_A/(4^n − 1)) (b_j − ε_B/(4^n − 1))` over non-identity Paulis.
///
/// With this normalization the exact composition law is
/// `γ(AB) = γ(A) γ(B) + 4^n/(4^n − 1) · η`.
pub fn eta(a: &DensePauliDistribution, b: &DensePauliDistribution) -> Result<f64> {
    check_dims(a.n, b.n)?;
    let m = (a.probs.len() - 1) as f64;
    let (ea, eb) = (a.infidelity(), b.infidelity());
    Ok(a.probs[1..].iter().zip(&b.probs[1..]).map(|(x, y)| (x - ea / m) * (y - eb / m)).sum())
}

/// Prefactor `4^n/(4^n − 1)` multiplying `η` in the composition law.
pub fn eta_prefactor(n: usize) -> f64 {
    let d2 = 4f64.powi(n as i32);
    d2 / (d2 - 1.0)
}

/// Average of `g P g†` over the 24 single-qubit Cliffords.
pub fn twirl_1q_clifford(ch: &DensePauliDistribution) -> Result<DensePauliDistribution> {
    if ch.n != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: ch.n });
    }
    let mut out = [0.0; 4];
    for g in Clifford1Q::all() {
        for p in Pauli::ALL {
            let img = g.conjugate(p);
            out[PauliString::single(1, 0, img).dense_index()] += ch.get(&PauliString::single(1, 0, p)) / 24.0;
        }
    }
    Ok(DensePauliDistribution { n: 1, probs: out.to_vec() })
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn pauli_matrix(p: Pauli) -> Mat2 {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// The 2×2 unitary of a Clifford, built from its H/S/Pauli decomposition.
pub fn clifford_matrix(g: Clifford1Q) -> Mat2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h: Mat2 = [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]];
    let s: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]];
    let (gens, p) = g.decomposition();
    let mut u = pauli_matrix(Pauli::I);
    for gen in gens {
        let m = match gen {
            Generator::H => &h,
            Generator::S => &s,
        };
        u = mat2_mul(m, &u);
    }
    mat2_mul(&pauli_matrix(p), &u)
}

/// `U P U† = ±Q`: the matrix image of `p` under `g`, if it is a signed Pauli.
pub fn matrix_conjugate(g: Clifford1Q, p: Pauli) -> Option<(Pauli, bool)> {
    let u = clifford_matrix(g);
    let mut udag = u;
    for i in 0..2 {
        for j in 0..2 {
            udag[i][j] = u[j][i].conj();
        }
    }
    let m = mat2_mul(&mat2_mul(&u, &pauli_matrix(p)), &udag);
    for q in Pauli::ALL {
        let pm = pauli_matrix(q);
        for (sign, neg) in [(1.0, false), (-1.0, true)] {
            let close = (0..2).all(|i| (0..2).all(|j| (m[i][j] - pm[i][j] * sign).norm() < 1e-12));
            if close {
                return Some((q, neg));
            }
        }
    }
    None
}

fn apply_1q_vec(psi: &mut [Complex64], q: usize, u: &Mat2) {
    let bit = 1 << q;
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a, b) = (psi[i], psi[i | bit]);
            psi[i] = u[0][0] * a + u[0][1] * b;
            psi[i | bit] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn apply_cnot_vec(psi: &mut [Complex64], control: usize, target: usize) {
    for i in 0..psi.len() {
        if (i >> control) & 1 == 1 && (i >> target) & 1 == 0 {
            psi.swap(i, i | (1 << target));
        }
    }
}

fn apply_layer_vec(psi: &mut [Complex64], layer: &Layer) {
    for op in layer.ops() {
        match *op {
            Op::Single { qubit, gate } => apply_1q_vec(psi, qubit, &clifford_matrix(gate)),
            Op::Cnot { control, target } => apply_cnot_vec(psi, control, target),
        }
    }
}

/// Ideal output of a Clifford layer sequence on `|0…0⟩`, by state vector.
/// Fails unless the final state is a computational basis state.
pub fn dense_statevector_run(n: usize, layers: &[Layer]) -> Result<BitString> {
    cap("state vector", STATEVECTOR_CAP, n)?;
    let mut psi = vec![c(0.0, 0.0); 1 << n];
    psi[0] = c(1.0, 0.0);
    for l in layers {
        check_dims(n, l.num_qubits())?;
        apply_layer_vec(&mut psi, l);
    }
    let (idx, amp) = psi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty");
    if (amp.norm_sqr() - 1.0).abs() > 1e-9 {
        let q = (0..n).find(|&q| psi.iter().enumerate().any(|(i, a)| a.norm_sqr() > 1e-12 && (i ^ idx) >> q & 1 == 1));
        return Err(Error::NonDeterministicOutput { qubit: q.unwrap_or(0) });
    }
    Ok(BitString::from_index(n, idx))
}

/// Applies readout flips to a distribution over bit strings (little-endian index).
fn apply_readout_dist(dist: &[f64], readout: &[f64]) -> Vec<f64> {
    let mut cur = dist.to_vec();
    for (q, &r) in readout.iter().enumerate() {
        let mut next = vec![0.0; cur.len()];
        for (i, &p) in cur.iter().enumerate() {
            next[i] += (1.0 - r) * p;
            next[i ^ (1 << q)] += r * p;
        }
        cur = next;
    }
    cur
}

/// Exact output distribution (indexed by [`BitString::to_index`]) of a noisy
/// circuit, from the distribution of the accumulated error Pauli.
pub fn dense_channel_output(circuit: &MirrorCircuit, model: &ErrorModel) -> Result<Vec<f64>> {
    let n = circuit.num_qubits();
    cap("dense Pauli distribution", CHANNEL_CAP, n)?;
    model.check_layers(circuit.layers())?;
    let mut frame = DensePauliDistribution::identity(n)?;
    for layer in circuit.layers() {
        frame = frame.conjugate_by(layer)?;
        for op in layer.ops() {
            for ch in &model.noise(op)?.components {
                frame = compose_dense(&frame, &DensePauliDistribution::from_channel(ch)?)?;
            }
        }
    }
    let target = circuit.target().to_index();
    let mut out = vec![0.0; 1 << n];
    for (i, &p) in frame.probs.iter().enumerate() {
        let x = i & ((1 << n) - 1);
        out[target ^ x] += p;
    }
    Ok(apply_readout_dist(&out, model.readout()))
}

type Mat = Vec<Vec<Complex64>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dagger(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

/// Full `2^n × 2^n` matrix of `u` on qubit `q`.
fn embed_1q(n: usize, q: usize, u: &Mat2) -> Mat {
    let d = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for i in 0..d {
        for j in 0..d {
            if (i ^ j) & !(1 << q) == 0 {
                m[i][j] = u[(i >> q) & 1][(j >> q) & 1];
            }
        }
    }
    m
}

fn identity_mat(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

fn op_matrix(n: usize, op: &Op) -> Mat {
    match *op {
        Op::Single { qubit, gate } => embed_1q(n, qubit, &clifford_matrix(gate)),
        Op::Cnot { control, target } => {
            let d = 1 << n;
            let mut m = vec![vec![c(0.0, 0.0); d]; d];
            for j in 0..d {
                let i = if (j >> control) & 1 == 1 { j ^ (1 << target) } else { j };
                m[i][j] = c(1.0, 0.0);
            }
            m
        }
    }
}

fn pauli_string_matrix(p: &PauliString) -> Mat {
    let n = p.num_qubits();
    let mut m = identity_mat(1 << n);
    for q in 0..n {
        if p.get(q) != Pauli::I {
            m = mat_mul(&embed_1q(n, q, &pauli_matrix(p.get(q))), &m);
        }
    }
    m
}

/// Exact output distribution of a noisy circuit by density-matrix evolution,
/// using complex matrices for every gate and every error.
pub fn density_matrix_output(circuit: &MirrorCircuit, model: &ErrorModel) -> Result<Vec<f64>> {
    let n = circuit.num_qubits();
    cap("density matrix", DENSITY_CAP, n)?;
    model.check_layers(circuit.layers())?;
    let d = 1 << n;
    let mut rho = vec![vec![c(0.0, 0.0); d]; d];
    rho[0][0] = c(1.0, 0.0);
    for layer in circuit.layers() {
        for op in layer.ops() {
            let u = op_matrix(n, op);
            rho = mat_mul(&mat_mul(&u, &rho), &dagger(&u));
        }
        for op in layer.ops() {
            for ch in &model.noise(op)?.components {
                let keep = 1.0 - ch.infidelity();
                let mut next: Mat = rho.iter().map(|row| row.iter().map(|x| x * keep).collect()).collect();
                for (p, prob) in ch.entries() {
                    let pm = pauli_string_matrix(p);
                    let term = mat_mul(&mat_mul(&pm, &rho), &dagger(&pm));
                    for i in 0..d {
                        for j in 0..d {
                            next[i][j] += term[i][j] * *prob;
                        }
                    }
                }
                rho = next;
            }
        }
    }
    let diag: Vec<f64> = (0..d).map(|i| rho[i][i].re).collect();
    Ok(apply_readout_dist(&diag, model.readout()))
}

/// Pearson chi-square goodness of fit of `counts` against `probs`. Bins with
/// expected count below 5 are pooled. Returns the p-value; 0 when a
/// zero-probability outcome was observed.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<f64> {
    if counts.len() != probs.len() {
        return Err(Error::DimensionMismatch { expected: probs.len(), found: counts.len() });
    }
    let total: u64 = counts.iter().sum();
    let total = total as f64;
    if counts.iter().zip(probs).any(|(&k, &p)| k > 0 && p <= 0.0) {
        return Ok(0.0);
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&k, &p) in counts.iter().zip(probs) {
        let e = p * total;
        if e < 5.0 {
            pool_o += k as f64;
            pool_e += e;
        } else {
            bins.push((k as f64, e));
        }
    }
    if pool_e > 0.0 {
        bins.push((pool_o, pool_e));
    }
    if bins.len() < 2 {
        return Ok(1.0);
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new((bins.len() - 1) as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(dist.sf(stat))
}

/// Dense count vector (little-endian index) from a shot record.
pub fn counts_vector(result: &crate::sim::ShotResult) -> Vec<u64> {
    let mut v = vec![0u64; 1 << result.n];
    for (b, &k) in &result.counts {
        v[b.to_index()] += k;
    }
    v
}

pub const VALIDATION_SCHEMA: &str = "mrb-validation/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed, detail }
}

/// Runs the oracle checks: identities exactly, executors statistically.
/// `shots` is per executor comparison.
pub fn run_validation(seed: u64, shots: usize) -> Result<ValidationReport> {
    use rand::Rng;

    use crate::graph::ConnectivityGraph;
    use crate::noise::{sample_random_model, RandomModelSpec};
    use crate::sampling::{sample_layer, SamplerSpec};
    use crate::seed::{derive_rng, derive_seed};
    use crate::sim::{simulate_shots_seeded, Executor};
    use crate::tableau::{tableau_run, Step};

    let mut checks = Vec::new();
    let mut rng = derive_rng(seed, &[0]);

    let stochastic = (1..=16).all(|n| (0..=n).all(|k| build_m(n).column_is_stochastic(k)));
    checks.push(check("m_column_stochastic", stochastic, "n <= 16, exact integers".into()));

    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let m = build_m(n);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
            let t: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / t).collect();
            worst = worst.max((recover_p0(&m.apply(&p)) - p[0]).abs());
        }
    }
    checks.push(check("p0_round_trip", worst < 1e-12, format!("max error {worst:.1e}")));

    let images_ok = Clifford1Q::all().all(|g| {
        let im = g.images();
        [(Pauli::X, im[0]), (Pauli::Z, im[1])]
            .into_iter()
            .all(|(p, img)| matrix_conjugate(g, p) == Some((img.pauli, img.negative)))
    });
    checks.push(check("clifford_matrices", images_ok, "24 gates, X and Z images with signs".into()));

    let mut random_dist = |n: usize| {
        let len = 1usize << (2 * n);
        let mut v: Vec<f64> = (0..len).map(|_| if rng.random::<f64>() < 0.4 { rng.random() } else { 0.0 }).collect();
        v[0] += len as f64 * rng.random::<f64>();
        let t: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= t);
        DensePauliDistribution { n, probs: v }
    };
    let mut eta_err: f64 = 0.0;
    let mut twirl_err: f64 = 0.0;
    for k in 0..300 {
        let n = 1 + k % 3;
        let (a, b) = (random_dist(n), random_dist(n));
        let lhs = compose_dense(&a, &b)?.polarization();
        let rhs = a.polarization() * b.polarization() + eta_prefactor(n) * eta(&a, &b)?;
        eta_err = eta_err.max((lhs - rhs).abs());
        if n == 1 {
            let t = twirl_1q_clifford(&a)?;
            twirl_err = twirl_err
                .max((t.probs[1] - t.probs[2]).abs())
                .max((t.probs[1] - t.probs[3]).abs())
                .max((t.infidelity() - a.infidelity()).abs());
        }
    }
    checks.push(check("eta_identity", eta_err < 1e-12, format!("max error {eta_err:.1e}")));
    checks.push(check("twirl_marginals", twirl_err < 1e-12, format!("max error {twirl_err:.1e}")));

    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let g = ConnectivityGraph::grid(1, n);
        let spec = SamplerSpec::edge_grab(g.max_density().min(0.5));
        let len = rng.random_range(0..12);
        let layers: Vec<Layer> = (0..len).map(|_| sample_layer(&g, &spec, &mut rng)).collect::<Result<_>>()?;
        let same = match (dense_statevector_run(n, &layers), tableau_run(n, layers.iter().map(Step::Layer))) {
            (Ok(a), Ok(b)) => a == b,
            (Err(Error::NonDeterministicOutput { .. }), Err(Error::NonDeterministicOutput { .. })) => true,
            _ => false,
        };
        mismatches += usize::from(!same);
    }
    checks.push(check("tableau_vs_statevector", mismatches == 0, format!("{mismatches} of 200 sequences differ")));

    let noisy = RandomModelSpec { gamma_1q: (0.0, 0.05), gamma_2q: (0.0, 0.2), kappa: (0.5, 1.0), readout: (0.0, 0.05) };
    let (mut min_p, mut max_dm, mut identical) = (1.0f64, 0.0f64, true);
    let instances = 10u64;
    for i in 0..instances {
        let mut r = derive_rng(seed, &[1, i]);
        let n = 1 + (i as usize % 3);
        let g = ConnectivityGraph::grid(1, n);
        let model = sample_random_model(&g, &noisy, &mut r)?;
        let sampler = if n == 1 { SamplerSpec::edge_grab(0.0) } else { SamplerSpec::edge_grab(0.5) };
        let c = MirrorCircuit::sample(&g, &sampler, 2 * (1 + i as usize % 4), r.random())?;
        let exact = dense_channel_output(&c, &model)?;
        let dm = density_matrix_output(&c, &model)?;
        max_dm = max_dm.max(exact.iter().zip(&dm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let shot_seed = derive_seed(seed, &[1, i, 2]);
        let frame = simulate_shots_seeded("v", &c, &model, shots, shot_seed, Executor::Frame)?;
        let tableau = simulate_shots_seeded("v", &c, &model, shots, shot_seed, Executor::Tableau)?;
        identical &= frame == tableau;
        min_p = min_p.min(chi_square_gof(&counts_vector(&frame), &exact)?);
    }
    checks.push(check("channel_vs_density_matrix", max_dm < 1e-12, format!("max difference {max_dm:.1e}")));
    checks.push(check("frame_vs_tableau", identical, format!("{instances} instances, {shots} shots, same stream")));
    checks.push(check(
        "frame_vs_dense_channel",
        min_p > 0.001,
        format!("min chi-square p = {min_p:.4} over {instances} instances"),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { schema: VALIDATION_SCHEMA.into(), seed, passed, checks })
}
