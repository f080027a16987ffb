//! The five basic spin-tensorial fields of the Dirac bundle in a canonically
//! associated frame pair, the complex-conjugation involution, and the
//! pointwise algebraic identities they satisfy.
//!
//! All indices are 0-based. A spinor index `a` here corresponds to the
//! 1-based index `a + 1` of the usual component notation; tensor indices
//! `q = 0..=3` are unchanged. Matrices are stored `m[row][col]` with the
//! row being the first (upper, for mixed fields) index.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat4, RealMat4, I, ONE, ZERO};

/// Reduced Planck constant in erg·s.
pub const HBAR_CGS: f64 = 1.05457168e-27;
/// Speed of light in cm/s.
pub const C_CGS: f64 = 2.99792458e10;
/// Neutron rest mass in grams, the default neutral spin-1/2 particle.
pub const NEUTRON_MASS_CGS: f64 = 1.67492728e-24;

/// hbar, c and the particle mass, either in CGS or in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub mass: f64,
    pub natural: bool,
}

impl PhysicalConstants {
    /// hbar = c = 1.
    pub fn natural(mass: f64) -> Result<Self> {
        Self::new(1.0, 1.0, mass, true)
    }

    pub fn cgs(mass: f64) -> Result<Self> {
        Self::new(HBAR_CGS, C_CGS, mass, false)
    }

    pub fn new(hbar: f64, c: f64, mass: f64, natural: bool) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConstants(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidConstants(format!("mass must be finite and >= 0, got {mass}")));
        }
        Ok(Self { hbar, c, mass, natural })
    }

    /// Inverse reduced Compton length m c / hbar, the mass term of the
    /// evolution equation in coordinate units.
    pub fn mass_term(&self) -> f64 {
        self.mass * self.c / self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: HBAR_CGS,
            c: C_CGS,
            mass: NEUTRON_MASS_CGS,
            natural: false,
        }
    }
}

/// Valence `(r, s | r̄, s̄ | m, n)` of a spin-tensorial field: upper and lower
/// spinor indices, upper and lower conjugate-spinor indices, upper and lower
/// tensor indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinTensorSignature {
    pub spinor_up: usize,
    pub spinor_down: usize,
    pub conj_up: usize,
    pub conj_down: usize,
    pub tensor_up: usize,
    pub tensor_down: usize,
}

impl SpinTensorSignature {
    pub const fn new(r: usize, s: usize, rb: usize, sb: usize, m: usize, n: usize) -> Self {
        Self {
            spinor_up: r,
            spinor_down: s,
            conj_up: rb,
            conj_down: sb,
            tensor_up: m,
            tensor_down: n,
        }
    }

    pub const METRIC: Self = Self::new(0, 0, 0, 0, 0, 2);
    pub const SPIN_METRIC: Self = Self::new(0, 2, 0, 0, 0, 0);
    pub const CHIRALITY: Self = Self::new(1, 1, 0, 0, 0, 0);
    pub const DIRAC_FORM: Self = Self::new(0, 1, 0, 1, 0, 0);
    pub const GAMMA: Self = Self::new(1, 1, 0, 0, 1, 0);

    pub fn rank(&self) -> usize {
        self.spinor_up + self.spinor_down + self.conj_up + self.conj_down + self.tensor_up + self.tensor_down
    }

    /// Number of components, every index ranging over four values.
    pub fn component_count(&self) -> usize {
        4usize.pow(self.rank() as u32)
    }

    /// Signature of the conjugated field: spinor and conjugate-spinor
    /// valences trade places.
    pub fn conjugated(&self) -> Self {
        Self::new(
            self.conj_up,
            self.conj_down,
            self.spinor_up,
            self.spinor_down,
            self.tensor_up,
            self.tensor_down,
        )
    }
}

impl fmt::Display for SpinTensorSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{}|{},{}|{},{})",
            self.spinor_up, self.spinor_down, self.conj_up, self.conj_down, self.tensor_up, self.tensor_down
        )
    }
}

/// Components of a spin-tensorial field at one point.
///
/// Layout is row-major over the index groups in the order: upper spinor,
/// lower spinor, upper conjugate, lower conjugate, upper tensor, lower tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTensor {
    signature: SpinTensorSignature,
    data: Vec<C64>,
}

impl SpinTensor {
    pub fn new(signature: SpinTensorSignature, data: Vec<C64>) -> Result<Self> {
        if data.len() != signature.component_count() {
            return Err(Error::DataLength {
                signature,
                len: data.len(),
                expected: signature.component_count(),
            });
        }
        Ok(Self { signature, data })
    }

    pub fn signature(&self) -> SpinTensorSignature {
        self.signature
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// The involution of complex conjugation.
    pub fn tau(&self) -> SpinTensor {
        let sig = self.signature;
        let spinor_len = 4usize.pow((sig.spinor_up + sig.spinor_down) as u32);
        let conj_len = 4usize.pow((sig.conj_up + sig.conj_down) as u32);
        let tensor_len = 4usize.pow((sig.tensor_up + sig.tensor_down) as u32);
        let mut out = vec![ZERO; self.data.len()];
        // Source index (s, cb, t) lands at (cb, s, t) in the conjugated layout.
        for s in 0..spinor_len {
            for cb in 0..conj_len {
                for t in 0..tensor_len {
                    let src = (s * conj_len + cb) * tensor_len + t;
                    let dst = (cb * spinor_len + s) * tensor_len + t;
                    out[dst] = self.data[src].conj();
                }
            }
        }
        SpinTensor {
            signature: sig.conjugated(),
            data: out,
        }
    }

    pub fn max_abs_diff(&self, other: &SpinTensor) -> Option<f64> {
        if self.signature != other.signature {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())),
        )
    }
}

/// Apply the involution to `x`, which must carry `signature`.
pub fn tau_conjugate(x: &SpinTensor, signature: SpinTensorSignature) -> Result<SpinTensor> {
    if x.signature != signature {
        return Err(Error::SignatureMismatch {
            expected: signature,
            found: x.signature,
        });
    }
    Ok(x.tau())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicField {
    Metric,
    SpinMetric,
    Chirality,
    DiracForm,
    Gamma,
}

impl BasicField {
    pub const ALL: [BasicField; 5] = [
        BasicField::Metric,
        BasicField::SpinMetric,
        BasicField::Chirality,
        BasicField::DiracForm,
        BasicField::Gamma,
    ];

    pub fn signature(&self) -> SpinTensorSignature {
        match self {
            BasicField::Metric => SpinTensorSignature::METRIC,
            BasicField::SpinMetric => SpinTensorSignature::SPIN_METRIC,
            BasicField::Chirality => SpinTensorSignature::CHIRALITY,
            BasicField::DiracForm => SpinTensorSignature::DIRAC_FORM,
            BasicField::Gamma => SpinTensorSignature::GAMMA,
        }
    }
}

/// Matrix realization of γ, H, D, g and d in a frame pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    /// `gamma[q][a][b]`: tensor index q, row a (upper spinor), column b.
    pub gamma: [Mat4; 4],
    /// Chirality operator `H[a][b]`.
    pub chirality: Mat4,
    /// Dirac form `D[a][ā]`: row is the spinor index, column the conjugate one.
    pub dirac_form: Mat4,
    /// Frame components of the metric.
    pub metric: RealMat4,
    /// Skew-symmetric spin metric `d[a][b]`.
    pub spin_metric: Mat4,
}

/// The constant matrices of the canonically associated chiral frame pair.
pub fn canonical_gamma_set() -> GammaSet {
    let (o, l, m) = (ZERO, ONE, -ONE);
    let (p, n) = (I, -I);
    let gamma = [
        [[o, o, l, o], [o, o, o, l], [l, o, o, o], [o, l, o, o]],
        [[o, o, o, m], [o, o, m, o], [o, l, o, o], [l, o, o, o]],
        [[o, o, o, p], [o, o, n, o], [o, n, o, o], [p, o, o, o]],
        [[o, o, m, o], [o, o, o, l], [l, o, o, o], [o, m, o, o]],
    ];
    let chirality = [[l, o, o, o], [o, l, o, o], [o, o, m, o], [o, o, o, m]];
    let dirac_form = [[o, o, l, o], [o, o, o, l], [l, o, o, o], [o, l, o, o]];
    let metric = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ];
    let spin_metric = [[o, l, o, o], [m, o, o, o], [o, o, o, m], [o, o, l, o]];
    GammaSet {
        gamma,
        chirality,
        dirac_form,
        metric,
        spin_metric,
    }
}

impl GammaSet {
    /// Components of one of the five basic fields as a spin tensor.
    pub fn field_tensor(&self, field: BasicField) -> SpinTensor {
        let mut data = Vec::with_capacity(field.signature().component_count());
        match field {
            BasicField::Metric => {
                for row in &self.metric {
                    data.extend(row.iter().map(|&x| c(x, 0.0)));
                }
            }
            BasicField::SpinMetric => data.extend(self.spin_metric.iter().flatten()),
            BasicField::Chirality => data.extend(self.chirality.iter().flatten()),
            BasicField::DiracForm => data.extend(self.dirac_form.iter().flatten()),
            BasicField::Gamma => {
                for a in 0..4 {
                    for b in 0..4 {
                        for q in 0..4 {
                            data.push(self.gamma[q][a][b]);
                        }
                    }
                }
            }
        }
        SpinTensor {
            signature: field.signature(),
            data,
        }
    }

    /// Components after the spinor frame change `ψ' = S ψ`. The tensor frame
    /// is unchanged.
    pub fn spinor_frame_change(&self, s: &Mat4) -> Option<GammaSet> {
        let s_inv = linalg::inverse(s)?;
        let s_inv_t = linalg::transpose(&s_inv);
        let similar = |m: &Mat4| linalg::mul(&linalg::mul(s, m), &s_inv);
        Some(GammaSet {
            gamma: [
                similar(&self.gamma[0]),
                similar(&self.gamma[1]),
                similar(&self.gamma[2]),
                similar(&self.gamma[3]),
            ],
            chirality: similar(&self.chirality),
            dirac_form: linalg::mul(&linalg::mul(&s_inv_t, &self.dirac_form), &linalg::conj(&s_inv)),
            metric: self.metric,
            spin_metric: linalg::mul(&linalg::mul(&s_inv_t, &self.spin_metric), &s_inv),
        })
    }

    /// Inverse frame metric (diagonal ±1 in the canonical frame).
    pub fn inverse_metric(&self) -> RealMat4 {
        linalg::inverse_real(&self.metric).expect("frame metric is nonsingular")
    }
}

/// Residuals of the Hermiticity of D and of the D–γ compatibility identity
/// used to show that the action and the current are real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracFormResiduals {
    /// max |D[a][ā] − conj(D[ā][a])|
    pub hermiticity: f64,
    /// max over (q, b, ā) of |Σ_a D[a][ā] γ^q[a][b] − Σ_s D[b][s] conj(γ^q[s][ā])|
    pub gamma_compatibility: f64,
}

pub fn check_dirac_form_identities(gs: &GammaSet) -> DiracFormResiduals {
    let d = &gs.dirac_form;
    let mut hermiticity: f64 = 0.0;
    for a in 0..4 {
        for ab in 0..4 {
            hermiticity = hermiticity.max((d[a][ab] - d[ab][a].conj()).norm());
        }
    }
    let mut compat: f64 = 0.0;
    for g in &gs.gamma {
        for b in 0..4 {
            for ab in 0..4 {
                let lhs: C64 = (0..4).map(|a| d[a][ab] * g[a][b]).sum();
                let rhs: C64 = (0..4).map(|s| d[b][s] * g[s][ab].conj()).sum();
                compat = compat.max((lhs - rhs).norm());
            }
        }
    }
    DiracFormResiduals {
        hermiticity,
        gamma_compatibility: compat,
    }
}

/// |γ^p γ^q + γ^q γ^p − 2 g^{pq} I| for one pair of directions.
pub fn anticommutator_residual(gs: &GammaSet, p: usize, q: usize) -> f64 {
    let g_inv = gs.inverse_metric();
    let lhs = linalg::anticommutator(&gs.gamma[p], &gs.gamma[q]);
    let rhs = linalg::scale(&linalg::identity(), c(2.0 * g_inv[p][q], 0.0));
    linalg::max_abs(&linalg::sub(&lhs, &rhs))
}

/// Largest Clifford-relation residual over all direction pairs.
pub fn clifford_residual(gs: &GammaSet) -> f64 {
    let mut r: f64 = 0.0;
    for p in 0..4 {
        for q in 0..4 {
            r = r.max(anticommutator_residual(gs, p, q));
        }
    }
    r
}
