//! Dense statevector checks of the identities the resource model relies on:
//! phase-gradient catalysis, exact block decomposition of the QFT, the
//! phase-gradient QFT circuit and truncation error.
//!
//! Bit ordering: basis index bit `q - 1` is the most significant qubit, and
//! qubit `j` is index bit `j`. Every builder here follows that convention.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest register simulated as a statevector.
pub const MAX_STATE_QUBITS: usize = 14;
/// Largest register materialised as a dense unitary (4^q amplitudes).
pub const MAX_UNITARY_QUBITS: usize = 12;

const PHASE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(q: usize) -> Result<Self> {
        Self::basis(q, 0)
    }

    pub fn basis(q: usize, index: usize) -> Result<Self> {
        check_state_size(q)?;
        if index >= 1 << q {
            return domain(format!("basis index {index} out of range for {q} qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << q];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { q, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return domain(format!("amplitude count {len} is not a power of two"));
        }
        let q = len.trailing_zeros() as usize;
        check_state_size(q)?;
        Ok(Self { q, amps })
    }

    /// `|grad_k> = 2^{-k/2} sum_x e^{2 pi i x / 2^k} |x>`.
    pub fn phase_gradient(k: usize) -> Result<Self> {
        check_state_size(k)?;
        let dim = 1usize << k;
        let norm = (dim as f64).sqrt().recip();
        let amps = (0..dim)
            .map(|x| Complex64::from_polar(norm, 2.0 * PI * x as f64 / dim as f64))
            .collect();
        Ok(Self { q: k, amps })
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tensor product with `self` on the low qubits.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        check_state_size(self.q + high.q)?;
        let mut amps = Vec::with_capacity(self.amps.len() * high.amps.len());
        for h in &high.amps {
            for l in &self.amps {
                amps.push(l * h);
            }
        }
        Ok(Self {
            q: self.q + high.q,
            amps,
        })
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn hadamard(&mut self, qubit: usize) {
        let bit = 1 << qubit;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * s;
                self.amps[i | bit] = (a - b) * s;
            }
        }
    }

    /// Phase `e^{i angle}` on basis states with both qubits set.
    pub fn controlled_phase(&mut self, control: usize, target: usize, angle: f64) {
        let mask = (1 << control) | (1 << target);
        let phase = Complex64::from_polar(1.0, angle);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
    }

    /// Applies a basis permutation `index -> f(index)`.
    pub fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[f(i)] += a;
        }
        self.amps = out;
    }

    /// Multiplies each amplitude by `e^{i phase(index)}`.
    pub fn diagonal(&mut self, phase: impl Fn(usize) -> f64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, phase(i));
        }
    }

    /// Reverses the order of qubits `lo..lo+len`.
    pub fn reverse_bits(&mut self, lo: usize, len: usize) {
        self.permute(|i| {
            let field = (i >> lo) & ((1 << len) - 1);
            (i & !(((1 << len) - 1) << lo)) | (reverse(field, len) << lo)
        });
    }
}

fn check_state_size(q: usize) -> Result<()> {
    if q > MAX_STATE_QUBITS {
        return Err(Error::Resource(format!(
            "{q} qubits exceeds the {MAX_STATE_QUBITS}-qubit statevector cap"
        )));
    }
    Ok(())
}

fn reverse(value: usize, bits: usize) -> usize {
    (0..bits).fold(0, |acc, b| acc | (((value >> b) & 1) << (bits - 1 - b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    q: usize,
    /// Row-major `2^q x 2^q`.
    matrix: Vec<Complex64>,
}

impl DenseUnitary {
    /// Builds the matrix column by column from the action on basis states.
    pub fn from_action(q: usize, mut action: impl FnMut(&mut StateVector)) -> Result<Self> {
        if q > MAX_UNITARY_QUBITS {
            return Err(Error::Resource(format!(
                "{q} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit dense unitary cap"
            )));
        }
        let dim = 1usize << q;
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let mut s = StateVector::basis(q, col)?;
            action(&mut s);
            for (row, a) in s.amps.iter().enumerate() {
                matrix[row * dim + col] = *a;
            }
        }
        Ok(Self { q, matrix })
    }

    pub fn from_fn(q: usize, entry: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        if q > MAX_UNITARY_QUBITS {
            return Err(Error::Resource(format!(
                "{q} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit dense unitary cap"
            )));
        }
        let dim = 1usize << q;
        let matrix = (0..dim * dim).map(|i| entry(i / dim, i % dim)).collect();
        Ok(Self { q, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        1 << self.q
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            q: self.q,
            matrix: self.matrix.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn max_deviation(&self, other: &DenseUnitary) -> Result<f64> {
        self.check_dims(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entry of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let dot: Complex64 = (0..dim)
                    .map(|r| self.entry(r, i).conj() * self.entry(r, j))
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).norm());
            }
        }
        worst
    }

    fn check_dims(&self, other: &DenseUnitary) -> Result<()> {
        if self.q != other.q {
            return domain(format!(
                "dimension mismatch: {} vs {} qubits",
                self.q, other.q
            ));
        }
        Ok(())
    }
}

/// `||U - V||_F / 2^{q/2}`.
pub fn frobenius_distance(u: &DenseUnitary, v: &DenseUnitary) -> Result<f64> {
    u.check_dims(v)?;
    let sum: f64 = u
        .matrix
        .iter()
        .zip(&v.matrix)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((sum / u.dim() as f64).sqrt())
}

/// Textbook QFT circuit without the final reversal, on qubits
/// `lo..lo+len`. Rotations with exponent `k >= cutoff` are dropped.
fn qft_core(s: &mut StateVector, lo: usize, len: usize, cutoff_k: Option<u32>) {
    for j in (0..len).rev() {
        s.hadamard(lo + j);
        for l in (0..j).rev() {
            let k = (j - l) as u32;
            if cutoff_k.is_some_and(|c| k >= c) {
                continue;
            }
            s.controlled_phase(lo + l, lo + j, PI / 2f64.powi(k as i32));
        }
    }
}

/// Textbook QFT with final bit reversal; exact when `cutoff_k` is `None`.
pub fn apply_qft(s: &StateVector, cutoff_k: Option<u32>) -> Result<StateVector> {
    check_state_size(s.q)?;
    let mut out = s.clone();
    qft_core(&mut out, 0, s.q, cutoff_k);
    out.reverse_bits(0, s.q);
    Ok(out)
}

pub fn qft_unitary(q: usize, cutoff_k: Option<u32>) -> Result<DenseUnitary> {
    DenseUnitary::from_action(q, |s| {
        qft_core(s, 0, q, cutoff_k);
        s.reverse_bits(0, q);
    })
}

/// Builds `QFT_n` as intra-block QFTs interleaved with block-phased
/// rotations and compares it against the direct circuit. Returns the largest
/// element-wise deviation.
///
/// Processing blocks from the most significant down, block `b` receives its
/// own QFT and then one BPR with every lower block `b'`:
/// `exp(2 pi i X rev(Y) / 2^{(b - b' + 1) m})`, where `X` is the content of
/// block `b'` and `rev(Y)` the bit-reversed content of block `b`.
pub fn check_block_decomposition(n: usize, m: usize) -> Result<f64> {
    if m == 0 || !n.is_multiple_of(m) || n > MAX_UNITARY_QUBITS {
        return domain(format!("invalid block decomposition sizes n={n}, m={m}"));
    }
    let blocks = n / m;
    let mask = (1usize << m) - 1;
    let decomposed = DenseUnitary::from_action(n, |s| {
        for b in (0..blocks).rev() {
            qft_core(s, b * m, m, None);
            for lower in 0..b {
                let denom = 1u128 << ((b - lower + 1) * m);
                s.diagonal(|i| {
                    let x = (i >> (lower * m)) & mask;
                    let y = reverse((i >> (b * m)) & mask, m);
                    let num = (x as u128 * y as u128) % denom;
                    2.0 * PI * num as f64 / denom as f64
                });
            }
        }
        s.reverse_bits(0, n);
    })?;
    let direct = qft_unitary(n, None)?;
    decomposed.max_deviation(&direct)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalysisCheck {
    pub phase: Complex64,
    pub deviation: f64,
}

/// Adds `a` modulo `2^k` into `|grad_k>` and measures the global phase picked
/// up and the residual distance from `phase * |grad_k>`.
pub fn pg_catalysis_phase(k: usize, a: usize) -> Result<CatalysisCheck> {
    if k == 0 || k > MAX_STATE_QUBITS {
        return domain(format!(
            "phase-gradient size must be in 1..={MAX_STATE_QUBITS}"
        ));
    }
    let dim = 1usize << k;
    if a >= dim {
        return domain(format!("addend {a} out of range for {k} bits"));
    }
    let reference = StateVector::phase_gradient(k)?;
    let mut state = reference.clone();
    state.permute(|x| (x + a) % dim);
    let phase = global_phase(&state, &reference);
    let expected = StateVector {
        q: k,
        amps: reference.amps.iter().map(|r| r * phase).collect(),
    };
    Ok(CatalysisCheck {
        phase,
        deviation: state.distance(&expected),
    })
}

/// Phase of `state` relative to `reference`, read off the reference's
/// largest-magnitude amplitude.
fn global_phase(state: &StateVector, reference: &StateVector) -> Complex64 {
    let (idx, _) = reference
        .amps
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bm), (i, a)| {
            if a.norm() > bm + PHASE_TOL {
                (i, a.norm())
            } else {
                (bi, bm)
            }
        });
    let ratio = state.amps[idx] / reference.amps[idx];
    ratio / ratio.norm()
}

/// How a controlled rotation block is pushed into the phase-gradient
/// register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgMode {
    /// Subtract the rotation numerator.
    Subtract,
    /// Add the negated numerator: bitwise complement plus a unit increment.
    NegateAndAdd,
}

/// Runs the phase-gradient QFT on data qubits `0..n` with a `cutoff_k`-bit
/// gradient register above them.
fn pg_qft_circuit(s: &mut StateVector, n: usize, cutoff_k: usize, mode: PgMode) {
    let pg_mask = (1usize << cutoff_k) - 1;
    for j in (0..n).rev() {
        s.hadamard(j);
        s.permute(|i| {
            if (i >> j) & 1 == 0 {
                return i;
            }
            // Numerator of the rotations on target j, in units of 2pi/2^c.
            let mut a = 0usize;
            for d in 1..cutoff_k {
                if d > j {
                    break;
                }
                a |= ((i >> (j - d)) & 1) << (cutoff_k - 1 - d);
            }
            let pg = (i >> n) & pg_mask;
            let updated = match mode {
                PgMode::Subtract => pg.wrapping_sub(a) & pg_mask,
                PgMode::NegateAndAdd => (pg + ((!a & pg_mask) + 1)) & pg_mask,
            };
            (i & !(pg_mask << n)) | (updated << n)
        });
    }
    s.reverse_bits(0, n);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgQftCheck {
    /// Distance of the data-register output from the truncated QFT.
    pub data_deviation: f64,
    /// Distance of the joint output from `data (x) |grad>`.
    pub catalyst_deviation: f64,
}

impl PgQftCheck {
    pub fn max_deviation(&self) -> f64 {
        self.data_deviation.max(self.catalyst_deviation)
    }
}

pub fn check_pg_qft_circuit(n: usize, cutoff_k: usize) -> Result<PgQftCheck> {
    check_pg_qft_circuit_mode(n, cutoff_k, PgMode::Subtract)
}

/// Checks the phase-gradient QFT against [`apply_qft`] on every data basis
/// state, and that the gradient register comes back untouched.
pub fn check_pg_qft_circuit_mode(n: usize, cutoff_k: usize, mode: PgMode) -> Result<PgQftCheck> {
    if n == 0 || cutoff_k == 0 {
        return domain("register sizes must be positive");
    }
    if n + cutoff_k > MAX_STATE_QUBITS {
        return Err(Error::Resource(format!(
            "{n} data + {cutoff_k} gradient qubits exceeds the statevector cap"
        )));
    }
    let grad = StateVector::phase_gradient(cutoff_k)?;
    let mut worst = PgQftCheck {
        data_deviation: 0.0,
        catalyst_deviation: 0.0,
    };
    for x in 0..1usize << n {
        let input = StateVector::basis(n, x)?;
        let mut joint = input.tensor(&grad)?;
        pg_qft_circuit(&mut joint, n, cutoff_k, mode);

        // Project the gradient register onto |grad>.
        let data_dim = 1usize << n;
        let data_amps = (0..data_dim)
            .map(|d| {
                (0..grad.amps.len())
                    .map(|p| grad.amps[p].conj() * joint.amps[d | (p << n)])
                    .sum()
            })
            .collect();
        let data = StateVector::from_amplitudes(data_amps)?;
        let expected = apply_qft(&input, Some(cutoff_k as u32))?;
        let rebuilt = data.tensor(&grad)?;
        worst.data_deviation = worst.data_deviation.max(data.distance(&expected));
        worst.catalyst_deviation = worst.catalyst_deviation.max(joint.distance(&rebuilt));
    }
    Ok(worst)
}

/// Unitary on the data register implemented by the phase-gradient circuit,
/// read off with the gradient register projected back onto `|grad>`.
pub fn pg_qft_unitary(n: usize, cutoff_k: usize, mode: PgMode) -> Result<DenseUnitary> {
    if n + cutoff_k > MAX_STATE_QUBITS || n > MAX_UNITARY_QUBITS {
        return Err(Error::Resource("phase-gradient QFT too large".into()));
    }
    let grad = StateVector::phase_gradient(cutoff_k)?;
    let dim = 1usize << n;
    let mut columns = Vec::with_capacity(dim);
    for x in 0..dim {
        let mut joint = StateVector::basis(n, x)?.tensor(&grad)?;
        pg_qft_circuit(&mut joint, n, cutoff_k, mode);
        let col: Vec<Complex64> = (0..dim)
            .map(|d| {
                (0..grad.amps.len())
                    .map(|p| grad.amps[p].conj() * joint.amps[d | (p << n)])
                    .sum()
            })
            .collect();
        columns.push(col);
    }
    DenseUnitary::from_fn(n, |r, c| columns[c][r])
}

/// Compares the subtracting phase-gradient QFT with its reflected form
/// (complemented numerator plus increment, added). Returns the largest
/// element-wise deviation between the two data-register unitaries.
pub fn check_reflected_equivalence(n: usize, cutoff_k: usize) -> Result<f64> {
    let direct = pg_qft_unitary(n, cutoff_k, PgMode::Subtract)?;
    let reflected = pg_qft_unitary(n, cutoff_k, PgMode::NegateAndAdd)?;
    direct.max_deviation(&reflected)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form of the truncated QFT, independent of gate application:
    /// `<rev(y)| U |x> = 2^{-q/2} exp(i pi sum_j y_j sum_{l<=j, j-l<c} x_l / 2^{j-l})`.
    fn truncated_qft_closed_form(q: usize, cutoff: Option<u32>) -> DenseUnitary {
        let norm = ((1usize << q) as f64).sqrt().recip();
        DenseUnitary::from_fn(q, |row, x| {
            let y = reverse(row, q);
            let mut angle = 0.0;
            for j in 0..q {
                if (y >> j) & 1 == 0 {
                    continue;
                }
                for l in 0..=j {
                    let k = (j - l) as u32;
                    if k > 0 && cutoff.is_some_and(|c| k >= c) {
                        continue;
                    }
                    if (x >> l) & 1 == 1 {
                        angle += PI / f64::powi(2.0, k as i32);
                    }
                }
            }
            Complex64::from_polar(norm, angle)
        })
        .unwrap()
    }

    #[test]
    fn single_qubit_is_hadamard() {
        let out = apply_qft(&StateVector::zero(1).unwrap(), None).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitudes()[0] - s).norm() < 1e-12);
        assert!((out.amplitudes()[1] - s).norm() < 1e-12);
    }

    #[test]
    fn three_qubits_match_dft() {
        for x in 0..8 {
            let out = apply_qft(&StateVector::basis(3, x).unwrap(), None).unwrap();
            for y in 0..8 {
                let expect =
                    Complex64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * (x * y) as f64 / 8.0);
                assert!((out.amplitudes()[y] - expect).norm() < 1e-12, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn truncation_error_shrinks_with_cutoff() {
        let exact = qft_unitary(8, None).unwrap();
        let mut last = f64::INFINITY;
        for c in 2..=8 {
            let d = frobenius_distance(&exact, &qft_unitary(8, Some(c)).unwrap()).unwrap();
            assert!(d <= last + 1e-12, "cutoff {c}: {d} > {last}");
            if c == 3 {
                assert!(d > 0.0);
            }
            last = d;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn closed_form_agrees_with_circuit() {
        for cutoff in [None, Some(2), Some(4)] {
            let circuit = qft_unitary(6, cutoff).unwrap();
            let closed = truncated_qft_closed_form(6, cutoff);
            assert!(circuit.max_deviation(&closed).unwrap() < 1e-10);
        }
    }

    #[test]
    fn frobenius_basics() {
        let u = qft_unitary(4, None).unwrap();
        assert!(frobenius_distance(&u, &u).unwrap().abs() < 1e-15);
        let neg = u.scaled(Complex64::new(-1.0, 0.0));
        assert!((frobenius_distance(&u, &neg).unwrap() - 2.0).abs() < 1e-12);
        let other = qft_unitary(3, None).unwrap();
        assert!(frobenius_distance(&u, &other).is_err());
    }

    #[test]
    fn frobenius_against_brute_force() {
        let exact = truncated_qft_closed_form(8, None);
        let cut = truncated_qft_closed_form(8, Some(4));
        let mut sum = 0.0;
        for r in 0..256 {
            for c in 0..256 {
                sum += (exact.entry(r, c) - cut.entry(r, c)).norm_sqr();
            }
        }
        let brute = (sum / 256.0).sqrt();
        let via_sim = frobenius_distance(
            &qft_unitary(8, None).unwrap(),
            &qft_unitary(8, Some(4)).unwrap(),
        )
        .unwrap();
        assert!((brute - via_sim).abs() < 1e-10, "{brute} vs {via_sim}");
        assert!(brute > 0.0);
    }

    #[test]
    fn qft_is_unitary() {
        assert!(qft_unitary(5, Some(3)).unwrap().unitarity_defect() < 1e-9);
    }

    #[test]
    fn block_decompositions_exact() {
        for (n, m) in [(4, 2), (6, 3), (6, 2), (6, 1), (8, 4)] {
            let dev = check_block_decomposition(n, m).unwrap();
            assert!(dev < 1e-10, "n={n} m={m}: {dev}");
        }
        assert!(check_block_decomposition(5, 2).is_err());
    }

    #[test]
    fn catalysis_examples() {
        let id = pg_catalysis_phase(4, 0).unwrap();
        assert!((id.phase - 1.0).norm() < 1e-12 && id.deviation < 1e-12);
        let c = pg_catalysis_phase(3, 1).unwrap();
        assert!((c.phase - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-10);
        let c = pg_catalysis_phase(5, 7).unwrap();
        assert!((c.phase - Complex64::from_polar(1.0, -2.0 * PI * 7.0 / 32.0)).norm() < 1e-10);
        assert!(c.deviation < 1e-10);
        assert!(pg_catalysis_phase(3, 8).is_err());
    }

    #[test]
    fn catalysis_exhaustive_small() {
        for k in 1..=6 {
            for a in 0..1usize << k {
                let c = pg_catalysis_phase(k, a).unwrap();
                let expect = Complex64::from_polar(1.0, -2.0 * PI * a as f64 / (1 << k) as f64);
                assert!(c.deviation < 1e-10, "k={k} a={a}");
                assert!((c.phase - expect).norm() < 1e-10, "k={k} a={a}");
            }
        }
    }

    #[test]
    fn pg_qft_examples() {
        assert!(check_pg_qft_circuit(2, 1).unwrap().max_deviation() < 1e-10);
        assert!(check_pg_qft_circuit(4, 3).unwrap().max_deviation() < 1e-9);
        assert!(check_pg_qft_circuit(8, 3).unwrap().max_deviation() < 1e-9);
        assert!(check_pg_qft_circuit(10, 5).is_err());
    }

    #[test]
    fn reflected_form_matches() {
        for n in 2..=6 {
            for c in [2, 3, n] {
                assert!(
                    check_reflected_equivalence(n, c).unwrap() < 1e-10,
                    "n={n} c={c}"
                );
            }
        }
    }

    #[test]
    fn state_cap() {
        assert!(StateVector::zero(15).is_err());
        assert!(apply_qft(&StateVector::zero(14).unwrap(), None).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn catalysis_holds(k in 1usize..=10, seed in any::<u64>()) {
                let a = (seed as usize) % (1 << k);
                let c = pg_catalysis_phase(k, a).unwrap();
                prop_assert!(c.deviation < 1e-10);
            }

            #[test]
            fn large_cutoff_is_exact(q in 1usize..=7, extra in 0u32..4) {
                let exact = qft_unitary(q, None).unwrap();
                let cut = qft_unitary(q, Some(q as u32 + extra)).unwrap();
                prop_assert!(exact.max_deviation(&cut).unwrap() < 1e-10);
            }

            #[test]
            fn qft_preserves_norm(q in 1usize..=8, idx in any::<usize>()) {
                let s = StateVector::basis(q, idx % (1 << q)).unwrap();
                let out = apply_qft(&s, Some(3)).unwrap();
                prop_assert!((out.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
