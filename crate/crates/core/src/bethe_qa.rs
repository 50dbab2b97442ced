//! Mean-field quantum annealing in the Bethe cluster approximation.
//!
//! Each site `i` is treated together with its nearest neighbours `j`
//! exactly; every spin `k` outside the cluster is replaced by its current
//! magnetisation. The cluster Hamiltonian is
//!
//! ```text
//! H_i(s) = (1 - s) K_i + s P_i
//! P_i = -J σz_i Σ_j σz_j - h_i σz_i - Σ_j (h_j + J Σ_{k∈S(j)\i} mz_k) σz_j
//! K_i = -σx_i Σ_j σx_j - σx_i - Σ_j (1 + Σ_{k∈S(j)\i} mx_k) σx_j     (FI)
//! K_i = -σx_i - Σ_j σx_j                                            (TF)
//! ```
//!
//! Cluster basis: bit 0 is the centre, bit `1 + n` the `n`-th neighbour
//! in [`Instance::neighbor_list`] order; a set bit means spin down.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Result};
use crate::linalg::{lanczos_lowest_from, symmetric_eigen, LanczosOptions};
use crate::model::{Instance, KineticKind, Schedule, Scheme, SpinConfiguration};
use crate::scalar::Real;

/// Ground-state degeneracy threshold inside a cluster.
pub const CLUSTER_DEGENERACY_TOL: f64 = 1e-12;

/// Per-site `(mz, mx)` carried between cluster solves.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationField<T> {
    mz: Vec<T>,
    mx: Vec<T>,
}

impl<T: Real> MagnetizationField<T> {
    /// Product of `+x` eigenstates: `mz = 0`, `mx = 1` everywhere.
    pub fn x_polarized(n: usize) -> Self {
        Self {
            mz: vec![T::zero(); n],
            mx: vec![T::one(); n],
        }
    }

    /// `mz = 0`, `mx = 0` everywhere (infinite temperature).
    pub fn unpolarized(n: usize) -> Self {
        Self {
            mz: vec![T::zero(); n],
            mx: vec![T::zero(); n],
        }
    }

    pub fn from_parts(mz: Vec<T>, mx: Vec<T>) -> Result<Self> {
        if mz.len() != mx.len() {
            return arg("mz and mx lengths differ");
        }
        let bound = pauli_bound::<T>();
        if mz.iter().chain(&mx).any(|m| m.is_nan() || m.abs() > bound) {
            return arg("magnetisations must lie in [-1, 1]");
        }
        Ok(Self { mz, mx })
    }

    pub fn len(&self) -> usize {
        self.mz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mz.is_empty()
    }

    pub fn mz(&self) -> &[T] {
        &self.mz
    }

    pub fn mx(&self) -> &[T] {
        &self.mx
    }

    #[inline]
    pub(crate) fn set(&mut self, site: usize, mz: T, mx: T) {
        debug_assert!(mz.abs() <= pauli_bound::<T>(), "|mz| = {mz} exceeds 1");
        debug_assert!(mx.abs() <= pauli_bound::<T>(), "|mx| = {mx} exceeds 1");
        self.mz[site] = mz;
        self.mx[site] = mx;
    }

    #[inline]
    pub(crate) fn set_mz(&mut self, site: usize, mz: T) {
        debug_assert!(mz.abs() <= pauli_bound::<T>(), "|mz| = {mz} exceeds 1");
        self.mz[site] = mz;
    }

    /// `sign(mz)` with ties resolved to +1.
    pub fn rounded(&self) -> SpinConfiguration {
        let spins = self.mz.iter().map(|&m| if m < T::zero() { -1 } else { 1 }).collect();
        SpinConfiguration::new(spins).expect("signs are ±1")
    }
}

pub(crate) fn pauli_bound<T: Real>() -> T {
    T::one() + T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// One site's cluster Hamiltonian with the current mean fields frozen in.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterProblem<T> {
    pub center: usize,
    pub neighbors: Vec<usize>,
    /// `h_j + J Σ_{k∈S(j)\i} mz_k` per neighbour.
    pub z_fields: Vec<T>,
    /// `1 + Σ_{k∈S(j)\i} mx_k` per neighbour (FI), 1 for TF.
    pub x_fields: Vec<T>,
    pub s: T,
    pub coupling: T,
    pub h_center: T,
    pub kind: KineticKind,
    /// Coefficient of `σx_i σx_j`: 1 for FI, 0 for TF.
    pair_coupling: T,
}

impl<T: Real> ClusterProblem<T> {
    pub fn dimension(&self) -> usize {
        1 << (self.neighbors.len() + 1)
    }

    pub fn sites(&self) -> usize {
        self.neighbors.len() + 1
    }

    /// Diagonal of `P_i`.
    pub fn potential_diagonal(&self) -> Vec<T> {
        (0..self.dimension())
            .map(|a| self.classical_energy(a))
            .collect()
    }

    fn classical_energy(&self, a: usize) -> T {
        let spin = |bit: usize| if a >> bit & 1 == 0 { T::one() } else { -T::one() };
        let sc = spin(0);
        let mut e = -self.h_center * sc;
        for (n, &zf) in self.z_fields.iter().enumerate() {
            let sj = spin(n + 1);
            e -= self.coupling * sc * sj + zf * sj;
        }
        e
    }

    /// Flip strings `(mask, c)` of `K_i = -Σ c σx...`.
    pub fn kinetic_terms(&self) -> Vec<(usize, T)> {
        let mut terms = Vec::with_capacity(2 * self.neighbors.len() + 1);
        terms.push((1usize, T::one()));
        for (n, &xf) in self.x_fields.iter().enumerate() {
            terms.push((1 << (n + 1), xf));
            if self.pair_coupling != T::zero() {
                terms.push((1 | 1 << (n + 1), self.pair_coupling));
            }
        }
        terms
    }

    /// Row-major dense `H_i(s)`.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dimension();
        let diag = self.potential_diagonal();
        let kin = self.kinetic_terms();
        let mut m = vec![T::zero(); n * n];
        for a in 0..n {
            m[a * n + a] = self.s * diag[a];
            for &(mask, c) in &kin {
                m[a * n + (a ^ mask)] -= (T::one() - self.s) * c;
            }
        }
        m
    }

    /// Drops the `σx σx` coupling and the `mx` feedback, leaving the TF driver.
    pub fn strip_transverse_interaction(&mut self) {
        self.pair_coupling = T::zero();
        self.x_fields.iter_mut().for_each(|x| *x = T::one());
    }
}

/// Builds the cluster centred on `center` from the current mean fields.
pub fn build_cluster<T: Real>(
    instance: &Instance<T>,
    mags: &MagnetizationField<T>,
    center: usize,
    s: T,
    kind: KineticKind,
) -> Result<ClusterProblem<T>> {
    let neighbors = instance.neighbor_list(center)?.to_vec();
    if !(s >= T::zero() && s <= T::one()) {
        return arg(format!("reduced time must lie in [0, 1], got {s}"));
    }
    if mags.len() != instance.site_count() {
        return arg("magnetisation field does not match the instance");
    }
    Ok(cluster_unchecked(instance, mags, center, neighbors, s, kind))
}

/// `Σ_{k∈S(j)\i} m_k` for every neighbour `j` of `center`.
pub(crate) fn outer_sums<T: Real>(instance: &Instance<T>, m: &[T], center: usize, neighbors: &[usize]) -> Vec<T> {
    neighbors
        .iter()
        .map(|&nb| {
            instance
                .neighbors(nb)
                .iter()
                .filter(|&&k| k != center)
                .map(|&k| m[k])
                .sum()
        })
        .collect()
}

/// Classical (`s = 1`) cluster built from `mz` alone.
pub(crate) fn classical_cluster<T: Real>(instance: &Instance<T>, mz: &[T], center: usize) -> ClusterProblem<T> {
    let neighbors = instance.neighbors(center).to_vec();
    let j = instance.coupling();
    let z_fields = outer_sums(instance, mz, center, &neighbors)
        .into_iter()
        .zip(&neighbors)
        .map(|(sum, &nb)| instance.field(nb) + j * sum)
        .collect();
    ClusterProblem {
        center,
        x_fields: vec![T::one(); neighbors.len()],
        neighbors,
        z_fields,
        s: T::one(),
        coupling: j,
        h_center: instance.field(center),
        kind: KineticKind::TransverseField,
        pair_coupling: T::zero(),
    }
}

fn cluster_unchecked<T: Real>(
    instance: &Instance<T>,
    mags: &MagnetizationField<T>,
    center: usize,
    neighbors: Vec<usize>,
    s: T,
    kind: KineticKind,
) -> ClusterProblem<T> {
    let j = instance.coupling();
    let fi = kind == KineticKind::FerroInteraction;
    let z_fields = outer_sums(instance, &mags.mz, center, &neighbors)
        .into_iter()
        .zip(&neighbors)
        .map(|(sum, &nb)| instance.field(nb) + j * sum)
        .collect();
    let x_fields = if fi {
        outer_sums(instance, &mags.mx, center, &neighbors)
            .into_iter()
            .map(|sum| T::one() + sum)
            .collect()
    } else {
        vec![T::one(); neighbors.len()]
    };
    ClusterProblem {
        center,
        neighbors,
        z_fields,
        x_fields,
        s,
        coupling: j,
        h_center: instance.field(center),
        kind,
        pair_coupling: if fi { T::one() } else { T::zero() },
    }
}

/// Ground-state `<σz>` and `<σx>` of every cluster site, centre first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterExpectations<T> {
    pub mz: Vec<T>,
    pub mx: Vec<T>,
}

/// How cluster ground states are obtained for `s < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterSolver {
    /// Full dense diagonalisation, degeneracies averaged.
    Dense,
    /// Lanczos for the ground state only. The cluster operator is
    /// stoquastic with a connected flip graph for `s < 1`, so the ground
    /// state is unique.
    #[default]
    Krylov,
}

/// Ground-state expectations of the cluster with the default solver.
pub fn cluster_ground_expectations<T: Real>(cluster: &ClusterProblem<T>) -> ClusterExpectations<T> {
    solve_cluster(cluster, ClusterSolver::default())
}

pub fn solve_cluster<T: Real>(cluster: &ClusterProblem<T>, solver: ClusterSolver) -> ClusterExpectations<T> {
    solve_cluster_warm(cluster, solver, &mut Vec::new())
}

/// `warm` holds the previous ground state of this cluster (or nothing) and
/// receives the new one; consecutive sweeps change it only slightly.
fn solve_cluster_warm<T: Real>(
    cluster: &ClusterProblem<T>,
    solver: ClusterSolver,
    warm: &mut Vec<T>,
) -> ClusterExpectations<T> {
    if cluster.s >= T::one() {
        let mz = classical_ground_average(&cluster.potential_diagonal(), cluster.sites());
        let mx = vec![T::zero(); cluster.sites()];
        return ClusterExpectations { mz, mx };
    }
    match solver {
        ClusterSolver::Dense => dense_expectations(cluster),
        ClusterSolver::Krylov => krylov_expectations(cluster, warm),
    }
}

/// Average spins over the minimum-energy classical states of a diagonal.
pub(crate) fn classical_ground_average<T: Real>(diag: &[T], sites: usize) -> Vec<T> {
    let emin = diag.iter().cloned().fold(T::infinity(), T::min);
    let tol = T::lit(CLUSTER_DEGENERACY_TOL) * emin.abs().max(T::one());
    let mut acc = vec![T::zero(); sites];
    let mut count = 0usize;
    for (a, &e) in diag.iter().enumerate() {
        if e - emin <= tol {
            count += 1;
            for (bit, m) in acc.iter_mut().enumerate() {
                if a >> bit & 1 == 0 {
                    *m += T::one();
                } else {
                    *m -= T::one();
                }
            }
        }
    }
    let c = T::from_count(count);
    acc.iter_mut().for_each(|m| *m /= c);
    acc
}

fn expectations_of<T: Real>(psi: &[T], sites: usize, acc: &mut ClusterExpectations<T>, weight: T) {
    for bit in 0..sites {
        let mask = 1usize << bit;
        let mut z = T::zero();
        let mut x = T::zero();
        for (a, &amp) in psi.iter().enumerate() {
            let p = amp * amp;
            if a & mask == 0 {
                z += p;
            } else {
                z -= p;
            }
            x += amp * psi[a ^ mask];
        }
        acc.mz[bit] += weight * z;
        acc.mx[bit] += weight * x;
    }
}

fn dense_expectations<T: Real>(cluster: &ClusterProblem<T>) -> ClusterExpectations<T> {
    let n = cluster.dimension();
    let sites = cluster.sites();
    let eig = symmetric_eigen(&cluster.to_dense(), n).expect("dense cluster solve");
    let e0 = eig.values[0];
    let tol = T::lit(CLUSTER_DEGENERACY_TOL) * e0.abs().max(T::one());
    let g = eig.values.iter().take_while(|&&e| e - e0 < tol).count();
    let mut out = ClusterExpectations {
        mz: vec![T::zero(); sites],
        mx: vec![T::zero(); sites],
    };
    let w = T::one() / T::from_count(g);
    for k in 0..g {
        expectations_of(&eig.vector(k), sites, &mut out, w);
    }
    clamp_rounding(&mut out);
    out
}

fn krylov_expectations<T: Real>(cluster: &ClusterProblem<T>, warm: &mut Vec<T>) -> ClusterExpectations<T> {
    let n = cluster.dimension();
    let sites = cluster.sites();
    let diag = cluster.potential_diagonal();
    let kin = cluster.kinetic_terms();
    let s = cluster.s;
    let one_minus = T::one() - s;
    let sdiag: Vec<T> = diag.iter().map(|&d| s * d).collect();
    let scratch = std::cell::RefCell::new(vec![T::zero(); n]);
    let apply = |x: &[T], y: &mut [T]| {
        for ((ya, &d), &xa) in y.iter_mut().zip(&sdiag).zip(x) {
            *ya = d * xa;
        }
        let mut tmp = scratch.borrow_mut();
        for &(mask, c) in &kin {
            let w = -one_minus * c;
            let low = mask & mask.wrapping_neg();
            if mask == low {
                flip_accumulate(x, y, low, w);
            } else {
                // Two flipped sites: permute by the higher one first.
                tmp.iter_mut().for_each(|v| *v = T::zero());
                flip_accumulate(x, &mut tmp, mask ^ low, T::one());
                flip_accumulate(&tmp, y, low, w);
            }
        }
    };
    let norm = s * diag.iter().fold(T::zero(), |m, d| m.max(d.abs()))
        + one_minus * kin.iter().map(|t| t.1).sum::<T>();
    let opts = LanczosOptions {
        rel_tol: 1e-9,
        check_every: 8,
        ..LanczosOptions::default()
    };
    let start = (warm.len() == n).then_some(warm.as_slice());
    let mut pairs = match lanczos_lowest_from(apply, n, 1, &[], norm, &opts, start) {
        Ok(p) => p,
        Err(_) => {
            warm.clear();
            return dense_expectations(cluster);
        }
    };
    let mut out = ClusterExpectations {
        mz: vec![T::zero(); sites],
        mx: vec![T::zero(); sites],
    };
    expectations_of(&pairs[0].1, sites, &mut out, T::one());
    clamp_rounding(&mut out);
    *warm = pairs.swap_remove(0).1;
    out
}

/// `y[a] += w * x[a ^ bit]` for a single-bit mask `bit`.
fn flip_accumulate<T: Real>(x: &[T], y: &mut [T], bit: usize, w: T) {
    for (xc, yc) in x.chunks_exact(2 * bit).zip(y.chunks_exact_mut(2 * bit)) {
        let (xl, xh) = xc.split_at(bit);
        let (yl, yh) = yc.split_at_mut(bit);
        for (yv, &xv) in yl.iter_mut().zip(xh) {
            *yv += w * xv;
        }
        for (yv, &xv) in yh.iter_mut().zip(xl) {
            *yv += w * xv;
        }
    }
}

// Normalised states give |<σ>| <= 1 up to rounding; only that rounding is removed.
fn clamp_rounding<T: Real>(e: &mut ClusterExpectations<T>) {
    for m in e.mz.iter_mut().chain(e.mx.iter_mut()) {
        debug_assert!(m.abs() <= pauli_bound::<T>(), "Pauli expectation {m} out of range");
        *m = m.max(-T::one()).min(T::one());
    }
}

/// Which cluster sites are written back after a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateScope {
    /// Centre and all neighbours (Gauss–Seidel on every cluster site).
    #[default]
    Cluster,
    /// Centre only.
    Center,
}

/// Order in which sites are visited as cluster centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Row-major.
    #[default]
    Raster,
    /// Fresh random permutation per sweep from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub order: SweepOrder,
    pub scope: UpdateScope,
    pub solver: ClusterSolver,
}

pub(crate) fn visit_order<T: Real>(instance: &Instance<T>, order: SweepOrder, step: u64) -> Vec<usize> {
    let mut sites: Vec<usize> = (0..instance.site_count()).collect();
    if let SweepOrder::Random(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(step.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        sites.shuffle(&mut rng);
    }
    sites
}

/// One pass over the lattice at reduced time `s`, updating `mags` in place.
pub fn sweep<T: Real>(
    instance: &Instance<T>,
    mags: &mut MagnetizationField<T>,
    s: T,
    kind: KineticKind,
    opts: &SweepOptions,
) -> Result<()> {
    if mags.len() != instance.site_count() {
        return arg("magnetisation field does not match the instance");
    }
    if !(s >= T::zero() && s <= T::one()) {
        return arg(format!("reduced time must lie in [0, 1], got {s}"));
    }
    let order = visit_order(instance, opts.order, 0);
    let mut warm = vec![Vec::new(); instance.site_count()];
    sweep_with(mags, &order, opts, &mut warm, |m, c| {
        cluster_unchecked(instance, m, c, instance.neighbors(c).to_vec(), s, kind)
    });
    Ok(())
}

fn sweep_with<T: Real>(
    mags: &mut MagnetizationField<T>,
    order: &[usize],
    opts: &SweepOptions,
    warm: &mut [Vec<T>],
    build: impl Fn(&MagnetizationField<T>, usize) -> ClusterProblem<T>,
) {
    for &center in order {
        let cluster = build(mags, center);
        let e = solve_cluster_warm(&cluster, opts.solver, &mut warm[center]);
        mags.set(center, e.mz[0], e.mx[0]);
        if opts.scope == UpdateScope::Cluster {
            for (n, &nb) in cluster.neighbors.iter().enumerate() {
                mags.set(nb, e.mz[n + 1], e.mx[n + 1]);
            }
        }
    }
}

/// Outcome of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult<T> {
    pub final_magnetization: MagnetizationField<T>,
    pub rounded_config: SpinConfiguration,
    pub final_energy: T,
    pub scheme: Scheme,
    pub tau: f64,
}

/// Quantum annealing: start from the `+x` product state and perform one
/// sweep at each `s = k / steps`, `k = 1..=steps`.
pub fn anneal<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    schedule: &Schedule,
    opts: &SweepOptions,
) -> AnnealResult<T> {
    let mut mags = MagnetizationField::x_polarized(instance.site_count());
    let mut warm = vec![Vec::new(); instance.site_count()];
    for k in 1..=schedule.steps() {
        let s = schedule.s_at::<T>(k);
        let order = visit_order(instance, opts.order, k as u64);
        sweep_with(&mut mags, &order, opts, &mut warm, |m, c| {
            cluster_unchecked(instance, m, c, instance.neighbors(c).to_vec(), s, kind)
        });
    }
    let rounded_config = mags.rounded();
    let final_energy = instance.energy_of(rounded_config.spins());
    AnnealResult {
        final_magnetization: mags,
        rounded_config,
        final_energy,
        scheme: match kind {
            KineticKind::TransverseField => Scheme::QaTf,
            KineticKind::FerroInteraction => Scheme::QaFi,
        },
        tau: schedule.tau(),
    }
}
