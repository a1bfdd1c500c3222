//! Dense complex linear algebra for multi-qubit pure states and density
//! matrices: single-qubit measurements in arbitrary bases, exact Born
//! distributions, and partial traces.
//!
//! States are immutable; every operation is a pure function returning a new
//! value, so any state may be shared freely across threads.

use num_complex::Complex64;
use rand::Rng;

use crate::bits;
use crate::dist::ClassicalDistribution;
use crate::error::{Error, Result};
use crate::tol::TOL;

/// Hard cap for dense statevectors.
pub const PURE_QUBIT_CAP: usize = 24;
/// Hard cap for dense density matrices.
pub const DENSE_QUBIT_CAP: usize = 11;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_pure_cap(r: usize) -> Result<()> {
    if !(1..=PURE_QUBIT_CAP).contains(&r) {
        return Err(Error::QubitCapExceeded {
            requested: r,
            cap: PURE_QUBIT_CAP,
        });
    }
    Ok(())
}

fn check_dense_cap(r: usize) -> Result<()> {
    if !(1..=DENSE_QUBIT_CAP).contains(&r) {
        return Err(Error::QubitCapExceeded {
            requested: r,
            cap: DENSE_QUBIT_CAP,
        });
    }
    Ok(())
}

/// Validate a 1-based qubit index and return the bit position it owns.
fn check_qubit(j: usize, num_qubits: usize) -> Result<usize> {
    if j < 1 || j > num_qubits {
        return Err(Error::QubitOutOfRange {
            index: j,
            num_qubits,
        });
    }
    Ok(j - 1)
}

/// An orthonormal single-qubit measurement basis. Columns of `matrix` are
/// the basis states labeled 0 and 1.
#[derive(Clone, Debug)]
pub struct QubitBasis {
    /// `matrix[i][k]` is component `i` of basis vector `k`.
    matrix: [[Complex64; 2]; 2],
}

impl QubitBasis {
    /// Build a basis from two column vectors; rejects non-unitary pairs.
    pub fn new(v0: [Complex64; 2], v1: [Complex64; 2]) -> Result<Self> {
        let matrix = [[v0[0], v1[0]], [v0[1], v1[1]]];
        if !is_unitary_2x2(&matrix) {
            return Err(Error::NotUnitary);
        }
        Ok(QubitBasis { matrix })
    }

    /// The computational basis {|0>, |1>}.
    pub fn computational() -> Self {
        QubitBasis {
            matrix: [
                [Complex64::new(1.0, 0.0), ZERO],
                [ZERO, Complex64::new(1.0, 0.0)],
            ],
        }
    }

    /// The X basis {|+>, |->}.
    pub fn x() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        QubitBasis {
            matrix: [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
        }
    }

    /// Z–X-plane basis {cos t |0> + sin t |1>, sin t |0> - cos t |1>}.
    pub fn zx_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        QubitBasis {
            matrix: [
                [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
            ],
        }
    }

    /// X–Y-plane basis {(|0> + e^{ia}|1>)/sqrt 2, (|0> - e^{ia}|1>)/sqrt 2}.
    pub fn xy_angle(alpha: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phase = Complex64::from_polar(h, alpha);
        QubitBasis {
            matrix: [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [phase, -phase],
            ],
        }
    }

    /// Basis whose 0-vector is the +1 eigenstate of `axis . sigma` for a
    /// unit Bloch vector.
    pub fn from_bloch_axis(x: f64, y: f64, z: f64) -> Self {
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let e = Complex64::from_polar(1.0, phi);
        QubitBasis {
            matrix: [
                [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                [e * s, -e * c],
            ],
        }
    }

    /// Uniformly random basis axis (for tests and detectors).
    pub fn random(rng: &mut impl Rng) -> Self {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        Self::from_bloch_axis(r * phi.cos(), r * phi.sin(), z)
    }

    /// Component `i` of basis vector `k`.
    pub fn component(&self, i: usize, k: usize) -> Complex64 {
        self.matrix[i][k]
    }

    /// Basis vector `k` as a column.
    pub fn vector(&self, k: u8) -> [Complex64; 2] {
        [self.matrix[0][k as usize], self.matrix[1][k as usize]]
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.matrix
    }

    /// Equality up to a global phase on each vector (labels must match).
    pub fn same_up_to_phase(&self, other: &QubitBasis) -> bool {
        (0..2).all(|k| {
            let inner: Complex64 = (0..2)
                .map(|i| self.matrix[i][k].conj() * other.matrix[i][k])
                .sum();
            (inner.norm() - 1.0).abs() < TOL
        })
    }

    /// Same measurement axis: equal up to per-vector phase and possibly a
    /// swap of the outcome labels.
    pub fn same_up_to_relabel(&self, other: &QubitBasis) -> bool {
        let swapped = QubitBasis {
            matrix: [
                [other.matrix[0][1], other.matrix[0][0]],
                [other.matrix[1][1], other.matrix[1][0]],
            ],
        };
        self.same_up_to_phase(other) || self.same_up_to_phase(&swapped)
    }
}

fn is_unitary_2x2(m: &[[Complex64; 2]; 2]) -> bool {
    let col = |k: usize| [m[0][k], m[1][k]];
    let dot = |a: [Complex64; 2], b: [Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    (dot(col(0), col(0)).re - 1.0).abs() < TOL
        && (dot(col(1), col(1)).re - 1.0).abs() < TOL
        && dot(col(0), col(1)).norm() < TOL
}

/// One measurement basis per qubit, ordered by qubit index.
#[derive(Clone, Debug)]
pub struct LocalProductBasis {
    bases: Vec<QubitBasis>,
}

impl LocalProductBasis {
    pub fn new(bases: Vec<QubitBasis>) -> Self {
        LocalProductBasis { bases }
    }

    pub fn computational(num_qubits: usize) -> Self {
        LocalProductBasis {
            bases: (0..num_qubits).map(|_| QubitBasis::computational()).collect(),
        }
    }

    pub fn all_x(num_qubits: usize) -> Self {
        LocalProductBasis {
            bases: (0..num_qubits).map(|_| QubitBasis::x()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Basis of qubit `j` (1-based).
    pub fn qubit(&self, j: usize) -> &QubitBasis {
        &self.bases[j - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &QubitBasis> {
        self.bases.iter()
    }

    pub fn same_up_to_phase(&self, other: &LocalProductBasis) -> bool {
        self.len() == other.len()
            && self
                .bases
                .iter()
                .zip(other.bases.iter())
                .all(|(a, b)| a.same_up_to_phase(b))
    }

    fn check_len(&self, num_qubits: usize) -> Result<()> {
        if self.len() != num_qubits {
            return Err(Error::BitLengthMismatch {
                expected: num_qubits,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// Result of a single-qubit measurement on a pure state.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: u8,
    pub state: PureState,
    pub probability: f64,
}

/// A normalized statevector over `2^r` amplitudes, `r <= 24`.
///
/// Basis string `m` (qubit `j` at bit `j - 1`) indexes amplitude `m`.
#[derive(Clone, Debug)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// |+>^r : all amplitudes equal 2^(-r/2).
    pub fn plus_state(num_qubits: usize) -> Result<Self> {
        check_pure_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(PureState {
            num_qubits,
            amps: vec![a; dim],
        })
    }

    /// Computational basis state |bits>.
    pub fn computational(num_qubits: usize, bits: u64) -> Result<Self> {
        check_pure_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        if bits >= dim as u64 {
            return Err(Error::invalid(
                "bits",
                format!("{bits} does not fit in {num_qubits} qubits"),
            ));
        }
        let mut amps = vec![ZERO; dim];
        amps[bits as usize] = Complex64::new(1.0, 0.0);
        Ok(PureState { num_qubits, amps })
    }

    /// Wrap a raw amplitude vector; length must be a power of two and the
    /// norm must be 1 within tolerance.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(
                "amplitudes",
                format!("length {dim} is not a power of two >= 2"),
            ));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_pure_cap(num_qubits)?;
        let state = PureState { num_qubits, amps };
        if !state.is_normalized() {
            return Err(Error::invalid(
                "amplitudes",
                format!("norm {} is not 1", state.norm()),
            ));
        }
        Ok(state)
    }

    /// Normalized state with i.i.d. complex Gaussian amplitudes
    /// (Haar-distributed direction).
    pub fn random(num_qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        check_pure_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            amps.push(Complex64::new(gaussian(rng), gaussian(rng)));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Ok(PureState { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: u64) -> Complex64 {
        self.amps[bits as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < TOL
    }

    /// Probability of outcome `bits` in the computational basis.
    pub fn probability(&self, bits: u64) -> f64 {
        self.amps[bits as usize].norm_sqr()
    }

    /// CZ between qubits `i` and `j`: negates amplitudes where both bits
    /// are 1. Self-inverse.
    pub fn apply_cz(&self, i: usize, j: usize) -> Result<PureState> {
        let bi = check_qubit(i, self.num_qubits)?;
        let bj = check_qubit(j, self.num_qubits)?;
        if i == j {
            return Err(Error::invalid("qubits", "CZ requires two distinct qubits"));
        }
        let mask = (1u64 << bi) | (1u64 << bj);
        let mut amps = self.amps.clone();
        for (y, a) in amps.iter_mut().enumerate() {
            if y as u64 & mask == mask {
                *a = -*a;
            }
        }
        Ok(PureState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Controlled phase: multiplies amplitudes with both bits set by e^{i phi}.
    pub fn apply_controlled_phase(&self, i: usize, j: usize, phi: f64) -> Result<PureState> {
        let bi = check_qubit(i, self.num_qubits)?;
        let bj = check_qubit(j, self.num_qubits)?;
        if i == j {
            return Err(Error::invalid(
                "qubits",
                "controlled phase requires two distinct qubits",
            ));
        }
        let mask = (1u64 << bi) | (1u64 << bj);
        let phase = Complex64::from_polar(1.0, phi);
        let mut amps = self.amps.clone();
        for (y, a) in amps.iter_mut().enumerate() {
            if y as u64 & mask == mask {
                *a *= phase;
            }
        }
        Ok(PureState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Swap two qubits by permuting amplitudes.
    pub fn apply_swap(&self, i: usize, j: usize) -> Result<PureState> {
        let bi = check_qubit(i, self.num_qubits)?;
        let bj = check_qubit(j, self.num_qubits)?;
        if i == j {
            return Ok(self.clone());
        }
        let mut amps = self.amps.clone();
        for y in 0..amps.len() {
            let b1 = (y >> bi) & 1;
            let b2 = (y >> bj) & 1;
            if b1 != b2 {
                let swapped = y ^ (1 << bi) ^ (1 << bj);
                if y < swapped {
                    amps.swap(y, swapped);
                }
            }
        }
        Ok(PureState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Apply a single-qubit unitary `u` (rows × columns) to qubit `j`.
    pub fn apply_single_qubit(&self, j: usize, u: &[[Complex64; 2]; 2]) -> Result<PureState> {
        let bit = check_qubit(j, self.num_qubits)?;
        if !is_unitary_2x2(u) {
            return Err(Error::NotUnitary);
        }
        let mut amps = self.amps.clone();
        apply_unitary_at_bit(&mut amps, bit, u);
        Ok(PureState {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Project qubit `j` onto both outcomes of `basis`, returning the Born
    /// probability and normalized collapsed state (when the probability is
    /// nonzero) for outcomes 0 and 1.
    pub fn project_qubit(
        &self,
        j: usize,
        basis: &QubitBasis,
    ) -> Result<[(f64, Option<PureState>); 2]> {
        let bit = check_qubit(j, self.num_qubits)?;
        let step = 1usize << bit;
        let mut out: [(f64, Option<PureState>); 2] = [(0.0, None), (0.0, None)];
        for k in 0..2u8 {
            let v = basis.vector(k);
            let mut amps = vec![ZERO; self.amps.len()];
            let mut prob = 0.0;
            for base in (0..self.amps.len()).step_by(2 * step) {
                for offset in 0..step {
                    let y0 = base + offset;
                    let y1 = y0 | step;
                    // Coefficient <v_k | pair>, then re-embed the basis vector.
                    let c = v[0].conj() * self.amps[y0] + v[1].conj() * self.amps[y1];
                    prob += c.norm_sqr();
                    amps[y0] = c * v[0];
                    amps[y1] = c * v[1];
                }
            }
            if prob > 1e-18 {
                let scale = prob.sqrt().recip();
                for a in &mut amps {
                    *a *= scale;
                }
                out[k as usize] = (
                    prob,
                    Some(PureState {
                        num_qubits: self.num_qubits,
                        amps,
                    }),
                );
            } else {
                out[k as usize] = (prob.max(0.0), None);
            }
        }
        Ok(out)
    }

    /// Measure qubit `j` in `basis`. Outcome 0 is chosen iff
    /// `random_draw < P(0)`; returns the outcome, the collapsed state, and
    /// the Born probability of the returned outcome.
    pub fn measure_qubit(
        &self,
        j: usize,
        basis: &QubitBasis,
        random_draw: f64,
    ) -> Result<Measurement> {
        let branches = self.project_qubit(j, basis)?;
        let outcome = u8::from(random_draw >= branches[0].0);
        let (prob, state) = &branches[outcome as usize];
        let state = state.clone().ok_or_else(|| {
            Error::invalid("random_draw", "selected a zero-probability branch")
        })?;
        Ok(Measurement {
            outcome,
            state,
            probability: *prob,
        })
    }

    /// Full Born distribution over all `2^r` outcome strings for a product
    /// basis measurement of every qubit.
    pub fn exact_distribution(&self, basis: &LocalProductBasis) -> Result<ClassicalDistribution> {
        basis.check_len(self.num_qubits)?;
        // Rotate each qubit by the adjoint of its basis, then read
        // computational probabilities.
        let mut amps = self.amps.clone();
        for (q, b) in basis.iter().enumerate() {
            let m = b.matrix();
            let adj = [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ];
            apply_unitary_at_bit(&mut amps, q, &adj);
        }
        ClassicalDistribution::from_probabilities(
            self.num_qubits,
            amps.iter()
                .enumerate()
                .map(|(y, a)| (y as u64, a.norm_sqr())),
        )
    }

    /// Tensor product; `self` occupies qubits `1..=r_a`, `other` the rest.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let r = self.num_qubits + other.num_qubits;
        check_pure_cap(r)?;
        let mut amps = vec![ZERO; 1 << r];
        for (hi, b) in other.amps.iter().enumerate() {
            if *b == ZERO {
                continue;
            }
            let base = hi << self.num_qubits;
            for (lo, a) in self.amps.iter().enumerate() {
                amps[base | lo] = *a * *b;
            }
        }
        Ok(PureState { num_qubits: r, amps })
    }

    /// Dense |psi><psi| projector; requires `r <= 11`.
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        check_dense_cap(self.num_qubits)?;
        let dim = self.amps.len();
        let mut entries = vec![ZERO; dim * dim];
        for row in 0..dim {
            if self.amps[row] == ZERO {
                continue;
            }
            for col in 0..dim {
                entries[row * dim + col] = self.amps[row] * self.amps[col].conj();
            }
        }
        Ok(DensityMatrix {
            num_qubits: self.num_qubits,
            entries,
        })
    }

    /// Crate-internal constructor for hot paths that build amplitudes in
    /// place (gate loops, QFT). Callers guarantee normalization.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Complex64>) -> PureState {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        PureState { num_qubits, amps }
    }
}

/// In-place 2x2 unitary on one bit position of an amplitude vector.
pub(crate) fn apply_unitary_at_bit(amps: &mut [Complex64], bit: usize, u: &[[Complex64; 2]; 2]) {
    let step = 1usize << bit;
    for base in (0..amps.len()).step_by(2 * step) {
        for offset in 0..step {
            let y0 = base + offset;
            let y1 = y0 | step;
            let a = amps[y0];
            let b = amps[y1];
            amps[y0] = u[0][0] * a + u[0][1] * b;
            amps[y1] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; u1 in (0, 1] avoids log(0).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A dense Hermitian, unit-trace, positive matrix over `r <= 11` qubits.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Wrap raw row-major entries, validating Hermiticity, unit trace, and
    /// positivity within tolerance.
    pub fn from_entries(num_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dense_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        if entries.len() != dim * dim {
            return Err(Error::invalid(
                "entries",
                format!("expected {} entries, got {}", dim * dim, entries.len()),
            ));
        }
        let dm = DensityMatrix { num_qubits, entries };
        dm.validate()?;
        Ok(dm)
    }

    pub fn from_pure(state: &PureState) -> Result<Self> {
        state.density_matrix()
    }

    /// Maximally mixed state I / 2^r.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_dense_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut entries = vec![ZERO; dim * dim];
        let p = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            entries[i * dim + i] = p;
        }
        Ok(DensityMatrix { num_qubits, entries })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i]).sum()
    }

    /// Hermiticity, unit trace, and positivity (pivoted Cholesky) within
    /// tolerance.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for r in 0..dim {
            for c in r..dim {
                let a = self.entries[r * dim + c];
                let b = self.entries[c * dim + r];
                if (a - b.conj()).norm() >= TOL {
                    return Err(Error::invalid("entries", "matrix is not Hermitian"));
                }
            }
        }
        if (self.trace() - Complex64::new(1.0, 0.0)).norm() >= TOL {
            return Err(Error::invalid(
                "entries",
                format!("trace {} is not 1", self.trace().re),
            ));
        }
        if !self.is_positive_within(TOL) {
            return Err(Error::invalid(
                "entries",
                "matrix has an eigenvalue below -1e-9",
            ));
        }
        Ok(())
    }

    /// Diagonally pivoted Cholesky test: true iff all eigenvalues exceed
    /// `-tol` (up to factorization roundoff).
    fn is_positive_within(&self, tol: f64) -> bool {
        let dim = self.dim();
        let mut a = self.entries.clone();
        let mut order: Vec<usize> = (0..dim).collect();
        for step in 0..dim {
            // Pick the largest remaining diagonal as pivot.
            let (pos, &piv) = order
                .iter()
                .enumerate()
                .skip(step)
                .max_by(|x, y| {
                    let dx = a[*x.1 * dim + *x.1].re;
                    let dy = a[*y.1 * dim + *y.1].re;
                    dx.partial_cmp(&dy).unwrap()
                })
                .unwrap();
            order.swap(step, pos);
            let d = a[piv * dim + piv].re;
            if d < -tol {
                return false;
            }
            if d <= tol {
                // Remaining block is numerically zero on the diagonal; any
                // clearly negative leftover diagonal means not PSD.
                return order[step..]
                    .iter()
                    .all(|&q| a[q * dim + q].re >= -tol);
            }
            // Eliminate the pivot row/column from the trailing block.
            let trailing: Vec<usize> = order[(step + 1)..].to_vec();
            for &x in &trailing {
                let lx = a[x * dim + piv] / d;
                for &y in &trailing {
                    let sub = lx * a[piv * dim + y];
                    a[x * dim + y] -= sub;
                }
            }
        }
        true
    }

    /// Partial trace onto the qubits in `keep` (1-based, ascending in the
    /// result). Trace is preserved.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::invalid("keep", "keep set must be nonempty"));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &j in &keep {
            check_qubit(j, self.num_qubits)?;
        }
        let k = keep.len();
        let kept_bits: Vec<usize> = keep.iter().map(|j| j - 1).collect();
        let traced_bits: Vec<usize> = (0..self.num_qubits)
            .filter(|b| !kept_bits.contains(b))
            .collect();

        let spread = |value: usize, positions: &[usize]| -> usize {
            positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | (((value >> i) & 1) << b))
        };

        let dim_out = 1usize << k;
        let dim_in = self.dim();
        let mut entries = vec![ZERO; dim_out * dim_out];
        for p in 0..dim_out {
            let pk = spread(p, &kept_bits);
            for q in 0..dim_out {
                let qk = spread(q, &kept_bits);
                let mut sum = ZERO;
                for t in 0..(1usize << traced_bits.len()) {
                    let tt = spread(t, &traced_bits);
                    sum += self.entries[(pk | tt) * dim_in + (qk | tt)];
                }
                entries[p * dim_out + q] = sum;
            }
        }
        Ok(DensityMatrix {
            num_qubits: k,
            entries,
        })
    }

    /// Marginal of a single qubit as a 2x2 matrix.
    pub fn qubit_marginal(&self, j: usize) -> Result<[[Complex64; 2]; 2]> {
        let m = self.partial_trace(&[j])?;
        Ok([
            [m.entry(0, 0), m.entry(0, 1)],
            [m.entry(1, 0), m.entry(1, 1)],
        ])
    }

    /// Express the matrix in `basis`: returns (tensor B)^† rho (tensor B),
    /// whose diagonal holds the Born probabilities of measuring in `basis`.
    pub fn rotate_to_basis(&self, basis: &LocalProductBasis) -> Result<DensityMatrix> {
        basis.check_len(self.num_qubits)?;
        let mut out = self.clone();
        for (q, b) in basis.iter().enumerate() {
            let m = b.matrix();
            let adj = [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ];
            out.conjugate_qubit(q, &adj);
        }
        Ok(out)
    }

    /// Inverse of [`rotate_to_basis`]: (tensor B) rho (tensor B)^†.
    pub fn rotate_from_basis(&self, basis: &LocalProductBasis) -> Result<DensityMatrix> {
        basis.check_len(self.num_qubits)?;
        let mut out = self.clone();
        for (q, b) in basis.iter().enumerate() {
            out.conjugate_qubit(q, b.matrix());
        }
        Ok(out)
    }

    /// In-place U . U^† on one qubit's bit position.
    fn conjugate_qubit(&mut self, bit: usize, u: &[[Complex64; 2]; 2]) {
        let dim = self.dim();
        let step = 1usize << bit;
        // Rows: for every column, mix paired rows by U.
        for col in 0..dim {
            for base in (0..dim).step_by(2 * step) {
                for offset in 0..step {
                    let r0 = base + offset;
                    let r1 = r0 | step;
                    let a = self.entries[r0 * dim + col];
                    let b = self.entries[r1 * dim + col];
                    self.entries[r0 * dim + col] = u[0][0] * a + u[0][1] * b;
                    self.entries[r1 * dim + col] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
        // Columns: mix paired columns by U^†.
        for row in 0..dim {
            for base in (0..dim).step_by(2 * step) {
                for offset in 0..step {
                    let c0 = base + offset;
                    let c1 = c0 | step;
                    let a = self.entries[row * dim + c0];
                    let b = self.entries[row * dim + c1];
                    self.entries[row * dim + c0] = a * u[0][0].conj() + b * u[0][1].conj();
                    self.entries[row * dim + c1] = a * u[1][0].conj() + b * u[1][1].conj();
                }
            }
        }
    }

    /// Born distribution of a product-basis measurement of every qubit.
    pub fn exact_distribution(&self, basis: &LocalProductBasis) -> Result<ClassicalDistribution> {
        let rotated = self.rotate_to_basis(basis)?;
        let dim = rotated.dim();
        ClassicalDistribution::from_probabilities(
            self.num_qubits,
            (0..dim).map(|i| (i as u64, rotated.entries[i * dim + i].re)),
        )
    }

    /// Project qubit `j` onto both outcomes of `basis`; returns probability
    /// and normalized post-measurement matrix per outcome.
    pub fn project_qubit(
        &self,
        j: usize,
        basis: &QubitBasis,
    ) -> Result<[(f64, Option<DensityMatrix>); 2]> {
        let bit = check_qubit(j, self.num_qubits)?;
        let dim = self.dim();
        let step = 1usize << bit;
        let mut out: [(f64, Option<DensityMatrix>); 2] = [(0.0, None), (0.0, None)];
        for k in 0..2u8 {
            let v = basis.vector(k);
            let mut entries = vec![ZERO; dim * dim];
            let mut prob = 0.0;
            for rbase in (0..dim).step_by(2 * step) {
                for roff in 0..step {
                    let r0 = rbase + roff;
                    let r1 = r0 | step;
                    for cbase in (0..dim).step_by(2 * step) {
                        for coff in 0..step {
                            let c0 = cbase + coff;
                            let c1 = c0 | step;
                            // s = <v| block |v> over the 2x2 qubit block.
                            let s = v[0].conj() * self.entries[r0 * dim + c0] * v[0]
                                + v[0].conj() * self.entries[r0 * dim + c1] * v[1]
                                + v[1].conj() * self.entries[r1 * dim + c0] * v[0]
                                + v[1].conj() * self.entries[r1 * dim + c1] * v[1];
                            entries[r0 * dim + c0] = v[0] * s * v[0].conj();
                            entries[r0 * dim + c1] = v[0] * s * v[1].conj();
                            entries[r1 * dim + c0] = v[1] * s * v[0].conj();
                            entries[r1 * dim + c1] = v[1] * s * v[1].conj();
                            if r0 == c0 {
                                prob += s.re;
                            }
                        }
                    }
                }
            }
            if prob > 1e-18 {
                let scale = prob.recip();
                for e in &mut entries {
                    *e *= scale;
                }
                out[k as usize] = (
                    prob,
                    Some(DensityMatrix {
                        num_qubits: self.num_qubits,
                        entries,
                    }),
                );
            } else {
                out[k as usize] = (prob.max(0.0), None);
            }
        }
        Ok(out)
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let dim = self.dim();
        let mut max = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                if r != c {
                    max = max.max(self.entries[r * dim + c].norm());
                }
            }
        }
        max
    }

    /// Tr(rho^2); 1 for pure states.
    pub fn purity(&self) -> f64 {
        let dim = self.dim();
        let mut sum = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                sum += (self.entries[r * dim + c] * self.entries[c * dim + r]).re;
            }
        }
        sum
    }

    pub(crate) fn from_raw(num_qubits: usize, entries: Vec<Complex64>) -> DensityMatrix {
        debug_assert_eq!(entries.len(), (1 << num_qubits) * (1 << num_qubits));
        DensityMatrix { num_qubits, entries }
    }
}

/// Format a basis string of this system, most-significant qubit first.
pub fn format_outcome(value: u64, num_qubits: usize) -> String {
    bits::format_bits(value, num_qubits)
}
