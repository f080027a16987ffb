//! Antisymmetrized multiparticle wave functions and the fermionic Fock space
//! over an orthonormal mode basis.
//!
//! Occupations are bitsets over at most 64 modes. A basis state lists its
//! modes in increasing order and stands for the antisymmetrized product of
//! those modes in that order. Ladder operators carry the positional sign
//! (−1)^{number of occupied modes below i}.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, Spinor, ZERO};

pub const MAX_MODES: usize = 64;
/// Largest mode count for the exhaustive operator-algebra report.
pub const MAX_REPORT_MODES: usize = 8;

/// A finite set of occupied modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OccupationState(u64);

impl OccupationState {
    pub const VACUUM: Self = OccupationState(0);

    pub fn from_bits(bits: u64) -> Self {
        OccupationState(bits)
    }

    /// From strictly increasing mode indices.
    pub fn from_sorted(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for (n, &i) in indices.iter().enumerate() {
            if i >= MAX_MODES {
                return Err(Error::UnknownMode {
                    index: i,
                    modes: MAX_MODES,
                });
            }
            if n > 0 && indices[n - 1] >= i {
                return Err(Error::Parse(format!("mode indices {indices:?} are not strictly increasing")));
            }
            bits |= 1 << i;
        }
        Ok(OccupationState(bits))
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < MAX_MODES && self.0 >> i & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_vacuum(&self) -> bool {
        self.0 == 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..MAX_MODES).filter(|&i| self.contains(i)).collect()
    }

    /// Occupied modes below `i`.
    pub fn count_below(&self, i: usize) -> usize {
        (self.0 & ((1u64 << i) - 1)).count_ones() as usize
    }

    /// `a⁺_i` on the basis state: the new state and its sign, or `None`.
    pub fn create(&self, i: usize) -> Option<(Self, i8)> {
        if self.contains(i) {
            None
        } else {
            Some((OccupationState(self.0 | 1 << i), sign(self.count_below(i))))
        }
    }

    /// `a_i` on the basis state: the new state and its sign, or `None`.
    pub fn annihilate(&self, i: usize) -> Option<(Self, i8)> {
        if self.contains(i) {
            Some((OccupationState(self.0 & !(1 << i)), sign(self.count_below(i))))
        } else {
            None
        }
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (n, i) in self.indices().iter().enumerate() {
            if n > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{i}")?;
        }
        f.write_char(']')
    }
}

fn sign(n: usize) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Finitely supported vector over occupation states. Exact zeros are not
/// stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockVector {
    coeffs: BTreeMap<OccupationState, C64>,
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::basis(OccupationState::VACUUM)
    }

    pub fn basis(state: OccupationState) -> Self {
        let mut v = Self::zero();
        v.add_term(state, c(1.0, 0.0));
        v
    }

    /// The basis state of strictly increasing `indices`.
    pub fn sorted(indices: &[usize]) -> Result<Self> {
        Ok(Self::basis(OccupationState::from_sorted(indices)?))
    }

    pub fn add_term(&mut self, state: OccupationState, value: C64) {
        let e = self.coeffs.entry(state).or_insert(ZERO);
        *e += value;
        if *e == ZERO {
            self.coeffs.remove(&state);
        }
    }

    pub fn get(&self, state: OccupationState) -> C64 {
        self.coeffs.get(&state).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (OccupationState, C64)> + '_ {
        self.coeffs.iter().map(|(s, v)| (*s, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, a: C64) -> Self {
        let mut out = Self::zero();
        for (s, v) in self.iter() {
            out.add_term(s, v * a);
        }
        out
    }

    pub fn plus(&self, other: &FockVector) -> Self {
        let mut out = self.clone();
        for (s, v) in other.iter() {
            out.add_term(s, v);
        }
        out
    }

    pub fn minus(&self, other: &FockVector) -> Self {
        self.plus(&other.scaled(c(-1.0, 0.0)))
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Particle numbers with nonzero weight.
    pub fn sectors(&self) -> Vec<usize> {
        let mut n: Vec<usize> = self.coeffs.keys().map(|s| s.count()).collect();
        n.dedup();
        n.sort_unstable();
        n.dedup();
        n
    }

    /// Text dump, one `[i j ...] re im` line per stored state.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, v) in self.iter() {
            let _ = writeln!(out, "{s} {} {}", v.re, v.im);
        }
        out
    }

    /// Parse the text dump. Blank lines and `#` comments are skipped and
    /// repeated states are summed.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut v = Self::zero();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {raw:?}", lineno + 1));
            let rest = line.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
            let (inside, tail) = rest.split_once(']').ok_or_else(|| bad("expected ']'"))?;
            let indices = inside
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| bad("bad mode index")))
                .collect::<Result<Vec<_>>>()?;
            let nums: Vec<&str> = tail.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(bad("expected two numbers after the index set"));
            }
            let re = nums[0].parse::<f64>().map_err(|_| bad("bad real part"))?;
            let im = nums[1].parse::<f64>().map_err(|_| bad("bad imaginary part"))?;
            let state = OccupationState::from_sorted(&indices).map_err(|e| bad(&e.to_string()))?;
            v.add_term(state, c(re, im));
        }
        Ok(v)
    }
}

/// Pairing of two Fock vectors over an orthonormal mode basis: sectors are
/// orthogonal, basis states orthonormal and the vacuum has norm 1.
pub fn multiparticle_inner(u: &FockVector, v: &FockVector) -> C64 {
    u.iter().map(|(s, a)| a.conj() * v.get(s)).sum()
}

/// Pairing of antisymmetrized basis states for modes with Gram matrix
/// `gram`: the determinant of the Gram submatrix on the two index sets.
pub fn basis_pairing(gram: &[Vec<C64>], s: OccupationState, t: OccupationState) -> C64 {
    if s.count() != t.count() {
        return ZERO;
    }
    let si = s.indices();
    let ti = t.indices();
    let rows: Vec<Vec<C64>> = si.iter().map(|&i| ti.iter().map(|&j| gram[i][j]).collect()).collect();
    linalg::determinant(&rows)
}

/// [`multiparticle_inner`] for modes with a general Gram matrix.
pub fn multiparticle_inner_with(gram: &[Vec<C64>], u: &FockVector, v: &FockVector) -> C64 {
    let mut s = ZERO;
    for (a, x) in u.iter() {
        for (b, y) in v.iter() {
            s += x.conj() * y * basis_pairing(gram, a, b);
        }
    }
    s
}

/// Linear combination of ordered mode tuples (i₁, …, i_n), each standing
/// for the product ψ_{i₁}(p₁) ⊗ … ⊗ ψ_{i_n}(p_n).
///
/// The value is `Σ terms / √divisor`; keeping the normalization as an
/// integer divisor makes pairings of integer-weighted expansions exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductExpansion {
    terms: BTreeMap<Vec<usize>, C64>,
    divisor: u64,
}

impl Default for ProductExpansion {
    fn default() -> Self {
        Self::with_divisor(1)
    }
}

impl ProductExpansion {
    pub fn with_divisor(divisor: u64) -> Self {
        Self {
            terms: BTreeMap::new(),
            divisor: divisor.max(1),
        }
    }

    pub fn product(indices: &[usize]) -> Self {
        let mut p = Self::default();
        p.add_term(indices.to_vec(), c(1.0, 0.0));
        p
    }

    pub fn divisor(&self) -> u64 {
        self.divisor
    }

    /// Coefficient of `tuple` including the normalization.
    pub fn coefficient(&self, tuple: &[usize]) -> C64 {
        self.terms.get(tuple).copied().unwrap_or(ZERO) / (self.divisor as f64).sqrt()
    }

    pub fn add_term(&mut self, tuple: Vec<usize>, value: C64) {
        let e = self.terms.entry(tuple.clone()).or_insert(ZERO);
        *e += value;
        if *e == ZERO {
            self.terms.remove(&tuple);
        }
    }

    /// Unnormalized terms.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], C64)> + '_ {
        self.terms.iter().map(|(t, v)| (t.as_slice(), *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, a: C64) -> Self {
        let mut out = Self::with_divisor(self.divisor);
        for (t, v) in self.iter() {
            out.add_term(t.to_vec(), v * a);
        }
        out
    }

    /// Component `b₁…b_n` at points `p₁…p_n`, with `eval(mode, point)`
    /// returning the single-mode spinor.
    pub fn evaluate<P>(&self, points: &[P], components: &[usize], eval: impl Fn(usize, &P) -> Spinor) -> C64 {
        let sum: C64 = self
            .iter()
            .map(|(t, v)| {
                debug_assert_eq!(t.len(), points.len());
                t.iter()
                    .zip(points.iter().zip(components))
                    .fold(v, |acc, (&mode, (p, &b))| acc * eval(mode, p)[b])
            })
            .sum();
        sum / (self.divisor as f64).sqrt()
    }
}

/// The product-space pairing `⟨(i…)|(j…)⟩ = Π_s G[i_s][j_s]`, extended
/// sesquilinearly. With `G = I` it is the Kronecker product of deltas.
pub fn product_inner_with(gram: &[Vec<C64>], a: &ProductExpansion, b: &ProductExpansion) -> C64 {
    let mut s = ZERO;
    for (ta, va) in a.iter() {
        for (tb, vb) in b.iter() {
            if ta.len() != tb.len() {
                continue;
            }
            let p = ta.iter().zip(tb).fold(c(1.0, 0.0), |acc, (&i, &j)| acc * gram[i][j]);
            s += va.conj() * vb * p;
        }
    }
    if a.divisor == b.divisor {
        s / a.divisor as f64
    } else {
        s / ((a.divisor as f64) * (b.divisor as f64)).sqrt()
    }
}

/// All permutations of `0..n` with their parity sign, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i8)>) {
        let n = used.len();
        if prefix.len() == n {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| prefix[i] > prefix[j])
                .count();
            out.push((prefix.clone(), sign(inversions)));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// The antisymmetrized wave function of a mode tuple, in both the product
/// representation and the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Antisymmetrized {
    pub product: ProductExpansion,
    pub fock: FockVector,
}

/// `Σ_σ (−1)^σ / √n! ψ_{i_σ1} ⊗ … ⊗ ψ_{i_σn}`.
pub fn antisymmetrize(indices: &[usize]) -> Result<Antisymmetrized> {
    let n = indices.len();
    if n > MAX_REPORT_MODES + 2 {
        return Err(Error::TooManyModes(n));
    }
    let factorial: u64 = (1..=n as u64).product();
    let mut product = ProductExpansion::with_divisor(factorial);
    for (perm, s) in permutations(n) {
        let tuple: Vec<usize> = perm.iter().map(|&k| indices[k]).collect();
        product.add_term(tuple, c(f64::from(s), 0.0));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let fock = if sorted.windows(2).any(|w| w[0] == w[1]) {
        FockVector::zero()
    } else {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| indices[i] > indices[j])
            .count();
        FockVector::sorted(&sorted)?.scaled(c(f64::from(sign(inversions)), 0.0))
    };
    Ok(Antisymmetrized { product, fock })
}

/// Creation or annihilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Fock space over `modes` single-particle modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
}

impl FockSpace {
    pub fn new(modes: usize) -> Result<Self> {
        if modes > MAX_MODES {
            return Err(Error::TooManyModes(modes));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.modes {
            return Err(Error::UnknownMode {
                index: i,
                modes: self.modes,
            });
        }
        Ok(())
    }

    /// Every occupation state, ordered by bitset value.
    pub fn basis(&self) -> Result<Vec<OccupationState>> {
        if self.modes > MAX_REPORT_MODES * 2 {
            return Err(Error::TooManyModes(self.modes));
        }
        Ok((0..1u64 << self.modes).map(OccupationState).collect())
    }

    pub fn apply(&self, op: Ladder, i: usize, v: &FockVector) -> Result<FockVector> {
        self.check_mode(i)?;
        let mut out = FockVector::zero();
        for (s, a) in v.iter() {
            let r = match op {
                Ladder::Create => s.create(i),
                Ladder::Annihilate => s.annihilate(i),
            };
            if let Some((t, sg)) = r {
                out.add_term(t, a * f64::from(sg));
            }
        }
        Ok(out)
    }

    pub fn create(&self, i: usize, v: &FockVector) -> Result<FockVector> {
        self.apply(Ladder::Create, i, v)
    }

    pub fn annihilate(&self, i: usize, v: &FockVector) -> Result<FockVector> {
        self.apply(Ladder::Annihilate, i, v)
    }

    /// Matrix `M[s][t] = ⟨s| op_i |t⟩` in the antisymmetrized basis built
    /// from modes with Gram matrix `gram`.
    pub fn operator_matrix(&self, op: Ladder, i: usize, gram: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
        let basis = self.basis()?;
        let dim = basis.len();
        let mut m = vec![vec![ZERO; dim]; dim];
        for (col, &t) in basis.iter().enumerate() {
            let image = self.apply(op, i, &FockVector::basis(t))?;
            for (row, &s) in basis.iter().enumerate() {
                m[row][col] = image.iter().map(|(u, a)| a * basis_pairing(gram, s, u)).sum();
            }
        }
        Ok(m)
    }
}

/// A signed partial permutation: column `t` maps to `(row, sign)` or zero.
type SignedMap = Vec<Option<(usize, i8)>>;

fn ladder_map(basis: &[OccupationState], op: Ladder, i: usize) -> SignedMap {
    let pos: BTreeMap<OccupationState, usize> = basis.iter().enumerate().map(|(n, s)| (*s, n)).collect();
    basis
        .iter()
        .map(|s| {
            let r = match op {
                Ladder::Create => s.create(i),
                Ladder::Annihilate => s.annihilate(i),
            };
            r.map(|(t, sg)| (pos[&t], sg))
        })
        .collect()
}

/// 1-norm (max column sum) of `{A, B} − δ I` with integer arithmetic.
fn anticommutator_residual(a: &SignedMap, b: &SignedMap, delta: i64) -> f64 {
    let dim = a.len();
    let mut worst = 0i64;
    for col in 0..dim {
        let mut column: BTreeMap<usize, i64> = BTreeMap::new();
        for (x, y) in [(a, b), (b, a)] {
            if let Some((mid, s1)) = y[col] {
                if let Some((row, s2)) = x[mid] {
                    *column.entry(row).or_insert(0) += i64::from(s1) * i64::from(s2);
                }
            }
        }
        *column.entry(col).or_insert(0) -= delta;
        worst = worst.max(column.values().map(|v| v.abs()).sum());
    }
    worst as f64
}

/// Exhaustive check of the canonical anticommutation relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarReport {
    pub modes: usize,
    pub dimension: usize,
    /// max over i, j of ‖{a_i, a_j}‖₁.
    pub annihilators: f64,
    /// max over i, j of ‖{a⁺_i, a⁺_j}‖₁.
    pub creators: f64,
    /// max over i, j of ‖{a_i, a⁺_j} − δ_ij I‖₁.
    pub mixed: f64,
    /// max over i of the largest entry of a_i − (a⁺_i)†.
    pub adjointness: f64,
    /// max over i and basis pairs of |⟨a_i u, v⟩ − ⟨u, a⁺_i v⟩|.
    pub pairing_adjointness: f64,
}

impl CarReport {
    pub fn max(&self) -> f64 {
        self.annihilators
            .max(self.creators)
            .max(self.mixed)
            .max(self.adjointness)
            .max(self.pairing_adjointness)
    }
}

pub fn car_report(modes: usize) -> Result<CarReport> {
    if modes > MAX_REPORT_MODES {
        return Err(Error::TooManyModes(modes));
    }
    let space = FockSpace::new(modes)?;
    let basis = space.basis()?;
    let create: Vec<SignedMap> = (0..modes).map(|i| ladder_map(&basis, Ladder::Create, i)).collect();
    let annihilate: Vec<SignedMap> = (0..modes).map(|i| ladder_map(&basis, Ladder::Annihilate, i)).collect();
    let mut report = CarReport {
        modes,
        dimension: basis.len(),
        annihilators: 0.0,
        creators: 0.0,
        mixed: 0.0,
        adjointness: 0.0,
        pairing_adjointness: 0.0,
    };
    for i in 0..modes {
        for j in 0..modes {
            report.annihilators = report.annihilators.max(anticommutator_residual(&annihilate[i], &annihilate[j], 0));
            report.creators = report.creators.max(anticommutator_residual(&create[i], &create[j], 0));
            let delta = i64::from(i == j);
            report.mixed = report.mixed.max(anticommutator_residual(&annihilate[i], &create[j], delta));
        }
        // a_i[row][col] must equal conj(a⁺_i[col][row]); all entries are real.
        let dim = basis.len();
        let mut dense_a = vec![vec![0i64; dim]; dim];
        let mut dense_c = vec![vec![0i64; dim]; dim];
        for col in 0..dim {
            if let Some((row, s)) = annihilate[i][col] {
                dense_a[row][col] = i64::from(s);
            }
            if let Some((row, s)) = create[i][col] {
                dense_c[row][col] = i64::from(s);
            }
        }
        for r in 0..dim {
            for c_ in 0..dim {
                report.adjointness = report.adjointness.max((dense_a[r][c_] - dense_c[c_][r]).abs() as f64);
            }
        }
        for &u in &basis {
            let au = space.annihilate(i, &FockVector::basis(u))?;
            for &v in &basis {
                let cv = space.create(i, &FockVector::basis(v))?;
                let lhs = multiparticle_inner(&au, &FockVector::basis(v));
                let rhs = multiparticle_inner(&FockVector::basis(u), &cv);
                report.pairing_adjointness = report.pairing_adjointness.max((lhs - rhs).norm());
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(m: usize) -> Vec<Vec<C64>> {
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { c(1.0, 0.0) } else { ZERO }).collect())
            .collect()
    }

    #[test]
    fn two_mode_antisymmetrization() {
        let a = antisymmetrize(&[1, 2]).unwrap();
        let mut expected = ProductExpansion::with_divisor(2);
        expected.add_term(vec![1, 2], c(1.0, 0.0));
        expected.add_term(vec![2, 1], c(-1.0, 0.0));
        assert_eq!(a.product, expected);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a.product.coefficient(&[2, 1]) + r).norm() < 1e-15);
        assert_eq!(a.fock, FockVector::sorted(&[1, 2]).unwrap());

        let swapped = antisymmetrize(&[2, 1]).unwrap();
        assert_eq!(swapped.product, a.product.scaled(c(-1.0, 0.0)));
        assert_eq!(swapped.fock, a.fock.scaled(c(-1.0, 0.0)));

        let repeated = antisymmetrize(&[1, 1]).unwrap();
        assert!(repeated.product.is_zero());
        assert!(repeated.fock.is_zero());
    }

    #[test]
    fn orthonormal_antisymmetrized_states() {
        let g = identity(4);
        let a12 = antisymmetrize(&[1, 2]).unwrap();
        let a13 = antisymmetrize(&[1, 3]).unwrap();
        assert_eq!(product_inner_with(&g, &a12.product, &a12.product), c(1.0, 0.0));
        assert_eq!(product_inner_with(&g, &a12.product, &a13.product), ZERO);
        assert_eq!(multiparticle_inner(&a12.fock, &a12.fock), c(1.0, 0.0));
        assert_eq!(multiparticle_inner(&FockVector::vacuum(), &FockVector::sorted(&[1]).unwrap()), ZERO);
        assert_eq!(multiparticle_inner(&FockVector::vacuum(), &FockVector::vacuum()), c(1.0, 0.0));
    }

    #[test]
    fn ladder_examples() {
        let f = FockSpace::new(4).unwrap();
        let vac = FockVector::vacuum();
        let s = |v: &[usize]| FockVector::sorted(v).unwrap();
        assert_eq!(f.create(1, &vac).unwrap(), s(&[1]));
        assert!(f.create(1, &s(&[1])).unwrap().is_zero());
        assert!(f.annihilate(1, &vac).unwrap().is_zero());
        assert_eq!(f.annihilate(1, &s(&[1])).unwrap(), vac);
        assert_eq!(f.annihilate(1, &s(&[1, 2])).unwrap(), s(&[2]));
        assert_eq!(f.annihilate(2, &s(&[1, 2])).unwrap(), s(&[1]).scaled(c(-1.0, 0.0)));
        assert!(f.annihilate(3, &s(&[1, 2])).unwrap().is_zero());
        assert!(matches!(f.create(4, &vac), Err(Error::UnknownMode { index: 4, modes: 4 })));
    }

    #[test]
    fn car_exact_for_small_spaces() {
        for m in [0, 1, 2, 3] {
            let r = car_report(m).unwrap();
            assert_eq!(r.max(), 0.0, "M = {m}: {r:?}");
            assert_eq!(r.dimension, 1 << m);
        }
        assert!(car_report(9).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let mut v = FockVector::vacuum().scaled(c(0.5, -0.25));
        v.add_term(OccupationState::from_sorted(&[0, 3, 7]).unwrap(), c(-1e-3, 2.0));
        let text = v.to_text();
        assert_eq!(text, "[] 0.5 -0.25\n[0 3 7] -0.001 2\n");
        assert_eq!(FockVector::from_text(&text).unwrap(), v);
        assert!(FockVector::from_text("[2 1] 1 0").is_err());
        assert!(FockVector::from_text("[1] x 0").is_err());
        assert!(FockVector::from_text("1 2 3").is_err());
    }

    #[test]
    fn permutation_parities() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|(_, s)| i32::from(*s)).sum::<i32>(), 0);
        assert_eq!(p[1], (vec![0, 2, 1], -1));
    }
}
