//! Exact diagonalisation of the interpolated Hamiltonian
//! `H(s) = (1 - s) H_kin + s H_pot` for small lattices, and the derived
//! gap, transition matrix element and characteristic time.
//!
//! States live in the σz product basis; bit `i` of a basis index is
//! `(1 - s_i) / 2`, so index 0 is the all-up state.

use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::linalg::{lanczos_lowest, residual_norm, symmetric_eigen, LanczosOptions};
use crate::model::{Instance, KineticKind};
use crate::scalar::{dot, Real};

/// Largest lattice the operator can be built for.
pub const MAX_SITES: usize = 24;
/// Lattices up to this size are diagonalised densely.
pub const DENSE_MAX_SITES: usize = 6;
/// Gaps below this are treated as exact degeneracies.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `H(s)` on the full `2^N` space, applied matrix-free.
///
/// The kinetic part is a sum of `-c σx...σx` strings, stored as bit masks.
#[derive(Debug, Clone)]
pub struct HamiltonianOperator<T> {
    sites: usize,
    s: T,
    potential: Vec<T>,
    kinetic: Vec<(usize, T)>,
}

impl<T: Real> HamiltonianOperator<T> {
    pub fn dimension(&self) -> usize {
        self.potential.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Always true: every term is real symmetric in the σz basis.
    pub fn is_hermitian(&self) -> bool {
        true
    }

    /// `y = kin_coef * H_kin x + pot_coef * H_pot x`
    pub fn apply_combination(&self, kin_coef: T, pot_coef: T, x: &[T], y: &mut [T]) {
        for ((yi, &xi), &p) in y.iter_mut().zip(x).zip(&self.potential) {
            *yi = pot_coef * p * xi;
        }
        for &(mask, c) in &self.kinetic {
            let w = kin_coef * c;
            for (a, yi) in y.iter_mut().enumerate() {
                *yi -= w * x[a ^ mask];
            }
        }
    }

    /// `y = H(s) x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        self.apply_combination(T::one() - self.s, self.s, x, y);
    }

    /// `y = dH/ds x = (H_pot - H_kin) x`
    pub fn apply_derivative(&self, x: &[T], y: &mut [T]) {
        self.apply_combination(-T::one(), T::one(), x, y);
    }

    /// Row-sum bound on `‖H(s)‖`.
    pub fn norm_estimate(&self) -> T {
        let pmax = self.potential.iter().fold(T::zero(), |m, p| m.max(p.abs()));
        let ksum: T = self.kinetic.iter().map(|&(_, c)| c.abs()).sum();
        self.s * pmax + (T::one() - self.s) * ksum
    }

    /// Row-major dense matrix of `H(s)`.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dimension();
        let mut m = vec![T::zero(); n * n];
        let one_minus = T::one() - self.s;
        for a in 0..n {
            m[a * n + a] = self.s * self.potential[a];
            for &(mask, c) in &self.kinetic {
                m[a * n + (a ^ mask)] -= one_minus * c;
            }
        }
        m
    }

    /// `|<psi1| dH/ds |psi0>|`
    pub fn transition_element(&self, psi0: &[T], psi1: &[T]) -> Result<T> {
        let n = self.dimension();
        if psi0.len() != n || psi1.len() != n {
            return arg(format!(
                "state dimensions {} and {} do not match operator dimension {n}",
                psi0.len(),
                psi1.len()
            ));
        }
        let mut tmp = vec![T::zero(); n];
        self.apply_derivative(psi0, &mut tmp);
        Ok(dot(psi1, &tmp).abs())
    }
}

/// Builds `(1 - s) H_kin + s H_pot` for the chosen driver, with unit
/// kinetic coefficients.
pub fn build_hamiltonian<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    s: T,
) -> Result<HamiltonianOperator<T>> {
    let n = instance.site_count();
    if n > MAX_SITES {
        return Err(Error::Capacity(format!(
            "{n} sites exceed the exact-diagonalisation limit of {MAX_SITES}"
        )));
    }
    if !(s >= T::zero() && s <= T::one()) {
        return arg(format!("reduced time must lie in [0, 1], got {s}"));
    }
    let dim = 1usize << n;
    let j = instance.coupling();
    let bonds: Vec<(usize, usize)> = instance.bonds().collect();
    let potential = (0..dim)
        .map(|a| {
            let bond_sum: i64 = bonds
                .iter()
                .map(|&(p, q)| if (a >> p ^ a >> q) & 1 == 0 { 1 } else { -1 })
                .sum();
            let field_term: T = instance
                .fields()
                .iter()
                .enumerate()
                .map(|(i, &h)| if a >> i & 1 == 0 { h } else { -h })
                .sum();
            -j * T::from_i64(bond_sum).unwrap() - field_term
        })
        .collect();
    let mut kinetic: Vec<(usize, T)> = (0..n).map(|i| (1usize << i, T::one())).collect();
    if kind == KineticKind::FerroInteraction {
        kinetic.extend(bonds.iter().map(|&(p, q)| (1usize << p | 1usize << q, T::one())));
    }
    Ok(HamiltonianOperator {
        sites: n,
        s,
        potential,
        kinetic,
    })
}

/// One eigenpair of `H(s)`.
#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub energy: T,
    pub vector: Vec<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Search the complement of the converged vectors for missed
    /// degenerate copies (iterative path only).
    pub verify_multiplicity: bool,
    pub lanczos: LanczosOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            verify_multiplicity: true,
            lanczos: LanczosOptions::default(),
        }
    }
}

/// The `k` lowest eigenpairs, energies nondecreasing, vectors orthonormal.
pub fn lowest_eigenpairs<T: Real>(
    h: &HamiltonianOperator<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<Eigenpair<T>>> {
    let dim = h.dimension();
    if k == 0 || k > dim {
        return arg(format!("requested {k} eigenpairs of a {dim}-dimensional operator"));
    }
    if h.sites() <= DENSE_MAX_SITES {
        let eig = symmetric_eigen(&h.to_dense(), dim)?;
        return Ok((0..k)
            .map(|i| Eigenpair {
                energy: eig.values[i],
                vector: eig.vector(i),
            })
            .collect());
    }

    let apply = |x: &[T], y: &mut [T]| h.apply(x, y);
    let norm = h.norm_estimate();
    let mut pairs = lanczos_lowest(apply, dim, k, &[], norm, &opts.lanczos)?;
    if opts.verify_multiplicity {
        let tol = T::lit(DEGENERACY_TOL) * norm.max(T::one());
        loop {
            let locked: Vec<Vec<T>> = pairs.iter().map(|p| p.1.clone()).collect();
            let extra = lanczos_lowest(apply, dim, 1, &locked, norm, &opts.lanczos)?;
            let Some(candidate) = extra.into_iter().next() else { break };
            if candidate.0 >= pairs[k - 1].0 - tol {
                break;
            }
            pairs.push(candidate);
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            pairs.truncate(k);
        }
    }
    Ok(pairs
        .into_iter()
        .map(|(energy, vector)| Eigenpair { energy, vector })
        .collect())
}

/// `‖H v - E v‖` for a returned pair.
pub fn eigen_residual<T: Real>(h: &HamiltonianOperator<T>, pair: &Eigenpair<T>) -> T {
    residual_norm(&|x: &[T], y: &mut [T]| h.apply(x, y), pair.energy, &pair.vector)
}

/// `|<psi1| (H_pot - H_kin) |psi0>|` for the driver `kind` on `instance`.
pub fn transition_matrix_element<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    psi0: &[T],
    psi1: &[T],
) -> Result<T> {
    build_hamiltonian(instance, kind, T::zero())?.transition_element(psi0, psi1)
}

/// Gap and matrix-element traces along the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTrace<T> {
    pub s_values: Vec<T>,
    pub ground_energy: Vec<T>,
    pub gap01: Vec<T>,
    pub gap02: Option<Vec<T>>,
    pub matrix_element: Vec<T>,
}

impl<T: Real> SpectralTrace<T> {
    pub fn len(&self) -> usize {
        self.s_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_values.is_empty()
    }

    /// CSV with header `s,gap01,gap02,matrix_element`; `gap02` is empty
    /// when the second gap was not computed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,gap01,gap02,matrix_element\n");
        for i in 0..self.len() {
            let g2 = self
                .gap02
                .as_ref()
                .map(|g| g[i].to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.s_values[i], self.gap01[i], g2, self.matrix_element[i]
            ));
        }
        out
    }

    fn insert(&mut self, point: TracePoint<T>) {
        let idx = self.s_values.partition_point(|&x| x < point.s);
        if self.s_values.get(idx) == Some(&point.s) {
            return;
        }
        self.s_values.insert(idx, point.s);
        self.ground_energy.insert(idx, point.ground);
        self.gap01.insert(idx, point.gap01);
        if let (Some(g), Some(v)) = (self.gap02.as_mut(), point.gap02) {
            g.insert(idx, v);
        }
        self.matrix_element.insert(idx, point.element);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Also compute `E2 - E0`.
    pub second_gap: bool,
    /// Bisect around the gap minimum until the bracket is below this width.
    pub refine_to: Option<f64>,
    pub eigen: EigenOptions,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            second_gap: true,
            refine_to: None,
            eigen: EigenOptions::default(),
        }
    }
}

/// `n` uniform points covering `[0, 1]` (201 is the usual choice).
pub fn uniform_grid<T: Real>(n: usize) -> Vec<T> {
    match n {
        0 => vec![],
        1 => vec![T::zero()],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    T::one()
                } else {
                    T::from_count(k) / T::from_count(n - 1)
                }
            })
            .collect(),
    }
}

struct TracePoint<T> {
    s: T,
    ground: T,
    gap01: T,
    gap02: Option<T>,
    element: T,
}

fn eval_point<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    s: T,
    opts: &TraceOptions,
) -> Result<(TracePoint<T>, Vec<Eigenpair<T>>)> {
    let h = build_hamiltonian(instance, kind, s)?;
    let k = if opts.second_gap { 3 } else { 2 }.min(h.dimension());
    if k < 2 {
        return arg("a trace needs at least two levels");
    }
    // For s < 1 both drivers are stoquastic with a connected flip graph, so
    // the ground state is unique and one Krylov space yields E0 and E1.
    let mut eigen = opts.eigen;
    eigen.verify_multiplicity &= k > 2 || s == T::one();
    let pairs = lowest_eigenpairs(&h, k, &eigen)?;
    let element = h.transition_element(&pairs[0].vector, &pairs[1].vector)?;
    let point = TracePoint {
        s,
        ground: pairs[0].energy,
        gap01: (pairs[1].energy - pairs[0].energy).max(T::zero()),
        gap02: (k > 2).then(|| (pairs[2].energy - pairs[0].energy).max(T::zero())),
        element,
    };
    Ok((point, pairs))
}

fn annotate<T: Real>(s: T, e: Error) -> Error {
    Error::AtSchedulePoint {
        s: s.as_f64(),
        source: Box::new(e),
    }
}

/// Evaluates the trace on `grid`, calling `visit` with every point's
/// eigenpairs. Eigenvector signs are aligned with the previous grid point.
pub fn spectral_trace_with<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    grid: &[T],
    opts: &TraceOptions,
    mut visit: impl FnMut(T, &[Eigenpair<T>]),
) -> Result<SpectralTrace<T>> {
    if grid.is_empty() {
        return arg("empty s grid");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return arg("s grid must be strictly increasing");
    }
    if grid[0] < T::zero() || grid[grid.len() - 1] > T::one() {
        return arg("s grid must lie within [0, 1]");
    }
    let mut trace = SpectralTrace {
        s_values: Vec::with_capacity(grid.len()),
        ground_energy: Vec::with_capacity(grid.len()),
        gap01: Vec::with_capacity(grid.len()),
        // A single spin has no second excited level.
        gap02: (opts.second_gap && instance.site_count() > 1).then(Vec::new),
        matrix_element: Vec::with_capacity(grid.len()),
    };
    let mut previous: Option<Vec<Eigenpair<T>>> = None;
    for &s in grid {
        let (point, mut pairs) = eval_point(instance, kind, s, opts).map_err(|e| annotate(s, e))?;
        if let Some(prev) = &previous {
            for (p, q) in pairs.iter_mut().zip(prev) {
                if dot(&p.vector, &q.vector) < T::zero() {
                    p.vector.iter_mut().for_each(|x| *x = -*x);
                }
            }
        }
        visit(s, &pairs);
        trace.s_values.push(point.s);
        trace.ground_energy.push(point.ground);
        trace.gap01.push(point.gap01);
        if let (Some(g), Some(v)) = (trace.gap02.as_mut(), point.gap02) {
            g.push(v);
        }
        trace.matrix_element.push(point.element);
        previous = Some(pairs);
    }
    if let Some(width) = opts.refine_to {
        refine_minimum(&mut trace, instance, kind, opts, T::lit(width))?;
    }
    Ok(trace)
}

pub fn spectral_trace<T: Real>(
    instance: &Instance<T>,
    kind: KineticKind,
    grid: &[T],
    opts: &TraceOptions,
) -> Result<SpectralTrace<T>> {
    spectral_trace_with(instance, kind, grid, opts, |_, _| {})
}

/// Adds points around the smallest `gap01` until the bracketing interval
/// is narrower than `width`.
pub fn refine_minimum<T: Real>(
    trace: &mut SpectralTrace<T>,
    instance: &Instance<T>,
    kind: KineticKind,
    opts: &TraceOptions,
    width: T,
) -> Result<()> {
    if trace.len() < 3 {
        return Ok(());
    }
    let argmin = |t: &SpectralTrace<T>| {
        let last = t.len() - 1;
        // The final point may be a classical degeneracy; it is not an avoided crossing.
        let upto = if t.gap01[last] < T::lit(DEGENERACY_TOL) { last } else { last + 1 };
        (0..upto).fold(0, |best, i| if t.gap01[i] < t.gap01[best] { i } else { best })
    };
    for _ in 0..64 {
        let i = argmin(trace);
        let lo = trace.s_values[i.saturating_sub(1)];
        let hi = trace.s_values[(i + 1).min(trace.len() - 1)];
        if hi - lo < width {
            break;
        }
        let mid = trace.s_values[i];
        let half = T::lit(0.5);
        for s in [half * (lo + mid), half * (mid + hi)] {
            if s > lo && s < hi && s != mid {
                let (point, _) = eval_point(instance, kind, s, opts).map_err(|e| annotate(s, e))?;
                trace.insert(point);
            }
        }
    }
    Ok(())
}

/// Minimum gap, maximum matrix element and the two characteristic-time
/// conventions derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharTimeReport<T> {
    pub eps_min: T,
    pub s_at_eps_min: T,
    pub m_max: T,
    pub s_at_m_max: T,
    /// `m_max / eps_min^2`, extrema taken separately.
    pub tau_c_paper: T,
    /// `max_s m(s) / gap(s)^2`.
    pub tau_c_pointwise: T,
    /// The final point was dropped because the classical ground state is degenerate.
    pub endpoint_excluded: bool,
}

impl<T: Real> CharTimeReport<T> {
    pub fn csv_header() -> &'static str {
        "eps_min,s*,m_max,s*,tau_c_paper,tau_c_pointwise"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.eps_min,
            self.s_at_eps_min,
            self.m_max,
            self.s_at_m_max,
            self.tau_c_paper,
            self.tau_c_pointwise
        )
    }
}

pub fn characteristic_time<T: Real>(trace: &SpectralTrace<T>) -> Result<CharTimeReport<T>> {
    if trace.is_empty() {
        return arg("empty trace");
    }
    let tol = T::lit(DEGENERACY_TOL);
    let last = trace.len() - 1;
    let endpoint_excluded = trace.s_values[last] == T::one() && trace.gap01[last] < tol;
    let upto = if endpoint_excluded { last } else { last + 1 };
    if upto == 0 || trace.gap01[..upto].iter().all(|&g| g < tol) {
        return Err(Error::Degenerate(
            "every grid point has a vanishing gap".into(),
        ));
    }
    let (mut i_gap, mut i_elem) = (0, 0);
    let mut pointwise = T::zero();
    for i in 0..upto {
        if trace.gap01[i] < trace.gap01[i_gap] {
            i_gap = i;
        }
        if trace.matrix_element[i] > trace.matrix_element[i_elem] {
            i_elem = i;
        }
        let g = trace.gap01[i];
        pointwise = pointwise.max(trace.matrix_element[i] / (g * g));
    }
    let eps_min = trace.gap01[i_gap];
    let m_max = trace.matrix_element[i_elem];
    Ok(CharTimeReport {
        eps_min,
        s_at_eps_min: trace.s_values[i_gap],
        m_max,
        s_at_m_max: trace.s_values[i_elem],
        tau_c_paper: m_max / (eps_min * eps_min),
        tau_c_pointwise: pointwise,
        endpoint_excluded,
    })
}

/// Runs both drivers on one instance and returns `(TF, FI)` reports.
pub fn driver_comparison<T: Real>(
    instance: &Instance<T>,
    grid: &[T],
    opts: &TraceOptions,
) -> Result<(CharTimeReport<T>, CharTimeReport<T>)> {
    let reports: Vec<Result<CharTimeReport<T>>> =
        [KineticKind::TransverseField, KineticKind::FerroInteraction]
            .par_iter()
            .map(|&kind| characteristic_time(&spectral_trace(instance, kind, grid, opts)?))
            .collect();
    let mut it = reports.into_iter();
    Ok((it.next().unwrap()?, it.next().unwrap()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;

    fn single(h: f64) -> Instance<f64> {
        Instance::new(1, 1, 1.0, vec![h]).unwrap()
    }

    #[test]
    fn single_spin_classical_end() {
        for kind in [KineticKind::TransverseField, KineticKind::FerroInteraction] {
            let h = build_hamiltonian(&single(1.0), kind, 1.0).unwrap();
            assert_eq!(h.to_dense(), vec![-1.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn single_spin_kinetic_end() {
        let h = build_hamiltonian(&single(1.0), KineticKind::TransverseField, 0.0).unwrap();
        let pairs = lowest_eigenpairs(&h, 2, &EigenOptions::default()).unwrap();
        assert!((pairs[0].energy + 1.0).abs() < 1e-14);
        assert!((pairs[1].energy - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pairs[0].vector[0].abs() - r).abs() < 1e-14);
        assert!((pairs[0].vector[0] - pairs[0].vector[1]).abs() < 1e-14);
    }

    #[test]
    fn fi_ground_energy_at_start() {
        let inst = generate_instance::<f64>(3, 3, 2.0, 5).unwrap();
        let h = build_hamiltonian(&inst, KineticKind::FerroInteraction, 0.0).unwrap();
        let pairs = lowest_eigenpairs(&h, 2, &EigenOptions::default()).unwrap();
        assert!((pairs[0].energy + 21.0).abs() < 1e-9);
    }

    #[test]
    fn tf_start_multiplicity_is_resolved() {
        let inst = generate_instance(3, 3, 1.0, 2).unwrap();
        let h = build_hamiltonian(&inst, KineticKind::TransverseField, 0.0).unwrap();
        let pairs = lowest_eigenpairs(&h, 3, &EigenOptions::default()).unwrap();
        let e: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
        assert!((e[0] + 9.0).abs() < 1e-9);
        assert!((e[1] + 7.0).abs() < 1e-9);
        assert!((e[2] + 7.0).abs() < 1e-9, "{e:?}");
        assert!(dot(&pairs[1].vector, &pairs[2].vector).abs() < 1e-8);
    }

    #[test]
    fn rejects_out_of_range() {
        let inst = generate_instance::<f64>(5, 5, 1.0, 1).unwrap();
        assert!(matches!(
            build_hamiltonian(&inst, KineticKind::TransverseField, 0.5),
            Err(Error::Capacity(_))
        ));
        assert!(build_hamiltonian(&single(1.0), KineticKind::TransverseField, 1.5).is_err());
        let h = build_hamiltonian(&single(1.0), KineticKind::TransverseField, 0.5).unwrap();
        assert!(lowest_eigenpairs(&h, 3, &EigenOptions::default()).is_err());
        assert!(h.transition_element(&[1.0, 0.0], &[1.0]).is_err());
    }

    #[test]
    fn transition_element_of_orthogonal_eigenvectors_vanishes() {
        // Eigenvectors of dH/ds itself: the element between them is zero.
        let h = build_hamiltonian(&single(1.0), KineticKind::TransverseField, 0.5).unwrap();
        // dH/ds = σx - σz = [[-1, 1], [1, 1]]
        let a = std::f64::consts::PI / 8.0;
        let v0 = [a.sin(), a.cos()];
        let v1 = [a.cos(), -a.sin()];
        let mut y = [0.0; 2];
        h.apply_derivative(&v0, &mut y);
        let lambda = dot(&v0, &y);
        assert!((y[0] - lambda * v0[0]).abs() < 1e-12 && (y[1] - lambda * v0[1]).abs() < 1e-12);
        assert!(h.transition_element(&v0, &v1).unwrap() < 1e-12);
    }

    #[test]
    fn single_spin_midpoint_element() {
        let h = build_hamiltonian(&single(1.0), KineticKind::TransverseField, 0.5).unwrap();
        let pairs = lowest_eigenpairs(&h, 2, &EigenOptions::default()).unwrap();
        let m = h.transition_element(&pairs[0].vector, &pairs[1].vector).unwrap();
        assert!((m - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_trace_report() {
        let trace = SpectralTrace {
            s_values: vec![0.0, 0.5, 1.0],
            ground_energy: vec![0.0; 3],
            gap01: vec![2.0; 3],
            gap02: None,
            matrix_element: vec![3.0; 3],
        };
        let r = characteristic_time(&trace).unwrap();
        assert_eq!(r.tau_c_paper, 0.75);
        assert_eq!(r.tau_c_pointwise, 0.75);
        assert!(!r.endpoint_excluded);
    }

    #[test]
    fn degenerate_endpoint_is_excluded() {
        let trace = SpectralTrace {
            s_values: vec![0.0, 0.5, 1.0],
            ground_energy: vec![0.0; 3],
            gap01: vec![2.0, 1.0, 0.0],
            gap02: None,
            matrix_element: vec![1.0, 1.0, 5.0],
        };
        let r = characteristic_time(&trace).unwrap();
        assert!(r.endpoint_excluded);
        assert_eq!(r.eps_min, 1.0);
        assert_eq!(r.m_max, 1.0);
        let all_zero = SpectralTrace {
            gap01: vec![0.0; 3],
            ..trace
        };
        assert!(matches!(characteristic_time(&all_zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn refinement_brackets_minimum() {
        let inst = generate_instance(2, 2, 2.0, 11).unwrap();
        let grid = uniform_grid(11);
        let opts = TraceOptions {
            refine_to: Some(1e-3),
            ..Default::default()
        };
        let trace = spectral_trace(&inst, KineticKind::TransverseField, &grid, &opts).unwrap();
        assert!(trace.len() > 11);
        assert!(trace.s_values.windows(2).all(|w| w[0] < w[1]));
        let coarse = spectral_trace(&inst, KineticKind::TransverseField, &grid, &TraceOptions::default()).unwrap();
        let fine_min = trace.gap01.iter().cloned().fold(f64::INFINITY, f64::min);
        let coarse_min = coarse.gap01.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(fine_min <= coarse_min);
    }

    #[test]
    fn grid_validation() {
        let inst = single(1.0);
        let opts = TraceOptions::default();
        assert!(spectral_trace(&inst, KineticKind::TransverseField, &[], &opts).is_err());
        assert!(spectral_trace(&inst, KineticKind::TransverseField, &[0.5, 0.5], &opts).is_err());
        assert!(spectral_trace(&inst, KineticKind::TransverseField, &[0.0, 1.2], &opts).is_err());
    }

    #[test]
    fn single_precision_trace() {
        let inst = Instance::<f32>::new(1, 1, 1.0, vec![1.0]).unwrap();
        let grid = uniform_grid::<f32>(21);
        let opts = TraceOptions {
            second_gap: false,
            ..Default::default()
        };
        let trace = spectral_trace(&inst, KineticKind::TransverseField, &grid, &opts).unwrap();
        let r = characteristic_time(&trace).unwrap();
        assert!((r.tau_c_paper - std::f32::consts::FRAC_1_SQRT_2).abs() < 1e-5);
    }
}
