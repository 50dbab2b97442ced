//! Random-field Ising instances on an open square lattice, spin
//! configurations and the classical energy
//! `E(s) = -J Σ_<ij> s_i s_j - Σ_i h_i s_i`.
//!
//! Sites are indexed row-major, `index = y * width + x`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::scalar::Real;

/// Lattice boundary condition. Only open boundaries are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
}

/// A random-field Ising model instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    width: usize,
    height: usize,
    coupling: T,
    fields: Vec<T>,
    boundary: Boundary,
    seed: u64,
    adjacency: Vec<Vec<usize>>,
}

impl<T: Real> Instance<T> {
    /// Builds an instance from explicit fields. The recorded seed is 0.
    pub fn new(width: usize, height: usize, coupling: T, fields: Vec<T>) -> Result<Self> {
        Self::with_seed(width, height, coupling, fields, 0)
    }

    pub(crate) fn with_seed(
        width: usize,
        height: usize,
        coupling: T,
        fields: Vec<T>,
        seed: u64,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return arg(format!("lattice dimensions must be positive, got {width}x{height}"));
        }
        if !(coupling.is_finite() && coupling > T::zero()) {
            return arg(format!("coupling must be positive and finite, got {coupling}"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| crate::Error::Argument("lattice too large".into()))?;
        if fields.len() != n {
            return arg(format!("expected {n} fields, got {}", fields.len()));
        }
        if let Some(bad) = fields.iter().find(|h| !h.is_finite()) {
            return arg(format!("non-finite field value {bad}"));
        }
        Ok(Self {
            width,
            height,
            coupling,
            fields,
            boundary: Boundary::Open,
            seed,
            adjacency: open_adjacency(width, height),
        })
    }

    /// Same lattice and fields with a different coupling.
    pub fn with_coupling(&self, coupling: T) -> Result<Self> {
        Self::with_seed(self.width, self.height, coupling, self.fields.clone(), self.seed)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn fields(&self) -> &[T] {
        &self.fields
    }

    pub fn field(&self, site: usize) -> T {
        self.fields[site]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn site_count(&self) -> usize {
        self.fields.len()
    }

    /// `L(M-1) + M(L-1)` for an open `L x M` lattice.
    pub fn bond_count(&self) -> usize {
        self.width * (self.height - 1) + self.height * (self.width - 1)
    }

    /// Neighbors of `site` in the order left, right, up, down (absent ones omitted).
    pub fn neighbor_list(&self, site: usize) -> Result<&[usize]> {
        match self.adjacency.get(site) {
            Some(n) => Ok(n),
            None => arg(format!("site {site} out of range (N = {})", self.site_count())),
        }
    }

    /// Unchecked variant of [`Instance::neighbor_list`]; panics on out-of-range sites.
    #[inline]
    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }

    /// Nearest-neighbor pairs `(i, j)` with `i < j`, each bond once.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.site_count()).flat_map(move |i| {
            let (x, y) = (i % self.width, i / self.width);
            let right = (x + 1 < self.width).then_some((i, i + 1));
            let down = (y + 1 < self.height).then_some((i, i + self.width));
            right.into_iter().chain(down)
        })
    }

    /// Classical energy of `config`.
    pub fn energy(&self, config: &SpinConfiguration) -> Result<T> {
        if config.len() != self.site_count() {
            return arg(format!(
                "configuration has {} spins, instance has {} sites",
                config.len(),
                self.site_count()
            ));
        }
        Ok(self.energy_of(config.spins()))
    }

    /// Energy of a raw ±1 spin slice. The caller guarantees the length.
    pub(crate) fn energy_of(&self, spins: &[i8]) -> T {
        // The bond sum is an integer and therefore exact.
        let bond_sum: i64 = self
            .bonds()
            .map(|(i, j)| i64::from(spins[i]) * i64::from(spins[j]))
            .sum();
        let field_term: T = self
            .fields
            .iter()
            .zip(spins)
            .map(|(&h, &s)| if s > 0 { h } else { -h })
            .sum();
        -self.coupling * T::from_i64(bond_sum).unwrap() - field_term
    }

    /// Largest possible `|local field|`, `4J + max |h_i|`.
    pub fn max_local_field(&self) -> T {
        let hmax = self.fields.iter().fold(T::zero(), |m, h| m.max(h.abs()));
        T::lit(4.0) * self.coupling + hmax
    }
}

fn open_adjacency(width: usize, height: usize) -> Vec<Vec<usize>> {
    (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            let mut n = Vec::with_capacity(4);
            if x > 0 {
                n.push(i - 1);
            }
            if x + 1 < width {
                n.push(i + 1);
            }
            if y > 0 {
                n.push(i - width);
            }
            if y + 1 < height {
                n.push(i + width);
            }
            n
        })
        .collect()
}

/// Generates an instance whose fields are independent fair ±1 draws.
///
/// The stream is `ChaCha8Rng::seed_from_u64(seed)`, one `bool` per site in
/// row-major order (`true` maps to +1).
pub fn generate_instance<T: Real>(
    width: usize,
    height: usize,
    coupling: T,
    seed: u64,
) -> Result<Instance<T>> {
    if width == 0 || height == 0 {
        return arg(format!("lattice dimensions must be positive, got {width}x{height}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..width * height)
        .map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() })
        .collect();
    Instance::with_seed(width, height, coupling, fields, seed)
}

/// Free-function form of [`Instance::energy`].
pub fn classical_energy<T: Real>(instance: &Instance<T>, config: &SpinConfiguration) -> Result<T> {
    instance.energy(config)
}

/// Free-function form of [`Instance::neighbor_list`].
pub fn neighbor_list<T: Real>(instance: &Instance<T>, site: usize) -> Result<&[usize]> {
    instance.neighbor_list(site)
}

/// A classical spin state, every entry ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return arg(format!("spin values must be +1 or -1, got {bad}"));
        }
        Ok(Self { spins })
    }

    pub fn uniform(n: usize, spin: i8) -> Result<Self> {
        Self::new(vec![spin; n])
    }

    /// Spins of a basis index with bit `b_i = (1 - s_i) / 2` at position `i`.
    pub fn from_basis_index(index: usize, n: usize) -> Self {
        let spins = (0..n)
            .map(|i| if index >> i & 1 == 0 { 1 } else { -1 })
            .collect();
        Self { spins }
    }

    /// Inverse of [`SpinConfiguration::from_basis_index`].
    pub fn basis_index(&self) -> usize {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn flipped(&self, site: usize) -> Self {
        let mut spins = self.spins.clone();
        spins[site] = -spins[site];
        Self { spins }
    }

    pub fn magnetization(&self) -> f64 {
        let sum: i64 = self.spins.iter().map(|&s| i64::from(s)).sum();
        sum as f64 / self.spins.len().max(1) as f64
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.spins.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Quantum driver used in place of the classical potential at early times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KineticKind {
    /// `-Σ σx_i`
    TransverseField,
    /// `-Σ σx_i - Σ_<ij> σx_i σx_j`
    FerroInteraction,
}

impl KineticKind {
    pub fn tag(self) -> &'static str {
        match self {
            KineticKind::TransverseField => "tf",
            KineticKind::FerroInteraction => "fi",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "tf" => Ok(KineticKind::TransverseField),
            "fi" => Ok(KineticKind::FerroInteraction),
            other => arg(format!("unknown kinetic kind '{other}' (expected tf or fi)")),
        }
    }
}

/// Annealing scheme compared in the ensemble experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Bethe quantum annealing driven by the transverse field.
    QaTf,
    /// Bethe quantum annealing driven by transverse ferromagnetic interactions.
    QaFi,
    /// Bethe thermal annealing.
    Sa,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::QaTf, Scheme::QaFi, Scheme::Sa];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::QaTf => "qa-tf",
            Scheme::QaFi => "qa-fi",
            Scheme::Sa => "sa",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().replace('_', "-").as_str() {
            "qa-tf" => Ok(Scheme::QaTf),
            "qa-fi" => Ok(Scheme::QaFi),
            "sa" => Ok(Scheme::Sa),
            other => arg(format!("unknown scheme '{other}' (expected qa-tf, qa-fi or sa)")),
        }
    }

    /// Quantum driver of a QA scheme.
    pub fn kinetic(self) -> Option<KineticKind> {
        match self {
            Scheme::QaTf => Some(KineticKind::TransverseField),
            Scheme::QaFi => Some(KineticKind::FerroInteraction),
            Scheme::Sa => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Linear annealing schedule: `steps` equal increments of the reduced
/// time `s = t / tau`, ending at `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    tau: f64,
    steps: usize,
}

impl Schedule {
    /// One sweep per unit of annealing time: `steps = round(tau)`, at least 1.
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return arg(format!("tau must be positive and finite, got {tau}"));
        }
        Self::new(tau, (tau.round() as usize).max(1))
    }

    pub fn new(tau: f64, steps: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return arg(format!("tau must be positive and finite, got {tau}"));
        }
        if steps == 0 {
            return arg("schedule needs at least one step");
        }
        Ok(Self { tau, steps })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Reduced time `k / steps`; exactly 0 at `k = 0` and 1 at `k = steps`.
    pub fn s_at<T: Real>(&self, k: usize) -> T {
        if k >= self.steps {
            T::one()
        } else {
            T::from_count(k) / T::from_count(self.steps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_has_no_bonds() {
        let inst = generate_instance(1, 1, 2.0, 99).unwrap();
        assert_eq!(inst.bond_count(), 0);
        assert!(inst.neighbor_list(0).unwrap().is_empty());
        assert!(inst.fields()[0] == 1.0 || inst.fields()[0] == -1.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(2, 2, 2.0, 7).unwrap();
        let b = generate_instance(2, 2, 2.0, 7).unwrap();
        assert_eq!(a.fields(), b.fields());
        assert_eq!(a.seed(), 7);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_instance(0, 3, 1.0, 1).is_err());
        assert!(generate_instance(3, 3, 0.0, 1).is_err());
        assert!(generate_instance(3, 3, -1.0, 1).is_err());
        assert!(generate_instance(3, 3, f64::NAN, 1).is_err());
        assert!(Instance::new(2, 2, 1.0, vec![1.0; 3]).is_err());
    }

    #[test]
    fn field_mean_is_unbiased() {
        let mut sum = 0.0;
        let mut count = 0.0;
        for seed in 1..=80 {
            let inst = generate_instance::<f64>(100, 100, 2.0, seed).unwrap();
            sum += inst.fields().iter().sum::<f64>();
            count += inst.site_count() as f64;
        }
        let mean = sum / count;
        let sigma = 1.0 / 8000.0_f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn aligned_two_by_two_energy() {
        let inst = Instance::new(2, 2, 2.0, vec![1.0; 4]).unwrap();
        let up = SpinConfiguration::uniform(4, 1).unwrap();
        assert_eq!(inst.energy(&up).unwrap(), -12.0);
    }

    #[test]
    fn mixed_pair_energy() {
        let inst = Instance::new(1, 2, 0.5, vec![1.0, -1.0]).unwrap();
        let cfg = SpinConfiguration::new(vec![1, -1]).unwrap();
        assert_eq!(inst.energy(&cfg).unwrap(), -1.5);
    }

    #[test]
    fn energy_length_mismatch() {
        let inst = Instance::new(2, 2, 1.0, vec![1.0; 4]).unwrap();
        let cfg = SpinConfiguration::uniform(3, 1).unwrap();
        assert!(inst.energy(&cfg).is_err());
    }

    #[test]
    fn neighbor_counts_and_order() {
        let inst = generate_instance::<f64>(3, 3, 1.0, 1).unwrap();
        assert_eq!(inst.neighbor_list(4).unwrap(), &[3, 5, 1, 7]);
        assert_eq!(inst.neighbor_list(0).unwrap(), &[1, 3]);
        assert_eq!(inst.neighbor_list(8).unwrap().len(), 2);
        assert!(inst.neighbor_list(9).is_err());
        for l in 1..7 {
            let inst = generate_instance::<f64>(l, l, 1.0, 1).unwrap();
            let degree: usize = (0..l * l).map(|i| inst.neighbors(i).len()).sum();
            assert_eq!(degree / 2, 2 * l * (l - 1));
            assert_eq!(inst.bonds().count(), inst.bond_count());
        }
    }

    #[test]
    fn rejects_bad_spins() {
        assert!(SpinConfiguration::new(vec![1, 0, -1]).is_err());
        assert!(SpinConfiguration::new(vec![1, 2]).is_err());
    }

    #[test]
    fn basis_index_round_trip() {
        for idx in 0..32 {
            let c = SpinConfiguration::from_basis_index(idx, 5);
            assert_eq!(c.basis_index(), idx);
        }
        assert_eq!(SpinConfiguration::from_basis_index(0, 3).spins(), &[1, 1, 1]);
        assert_eq!(SpinConfiguration::from_basis_index(1, 3).spins(), &[-1, 1, 1]);
    }

    #[test]
    fn schedule_endpoints() {
        let sch = Schedule::from_tau(100.0).unwrap();
        assert_eq!(sch.steps(), 100);
        assert_eq!(sch.s_at::<f64>(0), 0.0);
        assert_eq!(sch.s_at::<f64>(100), 1.0);
        assert_eq!(Schedule::from_tau(0.3).unwrap().steps(), 1);
        assert!(Schedule::from_tau(0.0).is_err());
        assert!(Schedule::new(1.0, 0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let inst = Instance::<f32>::new(1, 2, 0.5, vec![1.0, -1.0]).unwrap();
        let cfg = SpinConfiguration::new(vec![1, -1]).unwrap();
        assert_eq!(inst.energy(&cfg).unwrap(), -1.5f32);
    }
}
