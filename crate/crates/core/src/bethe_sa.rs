//! Thermal counterpart of the Bethe annealer: the kinetic term is dropped
//! and each cluster spin takes its Boltzmann average over the classical
//! cluster states, with the temperature lowered linearly to zero.

use crate::bethe_qa::{classical_cluster, classical_ground_average, visit_order, AnnealResult, MagnetizationField, SweepOptions, UpdateScope};
use crate::error::{arg, Result};
use crate::model::{Instance, Scheme};
use crate::scalar::Real;

/// `T(k) = t0 (1 - k / steps)`, reaching exactly zero at the last step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSchedule {
    t0: f64,
    tau: f64,
    steps: usize,
}

impl ThermalSchedule {
    /// One sweep per unit of annealing time.
    pub fn from_tau(t0: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return arg(format!("tau must be positive and finite, got {tau}"));
        }
        Self::new(t0, tau, (tau.round() as usize).max(1))
    }

    pub fn new(t0: f64, tau: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return arg(format!("initial temperature must be positive, got {t0}"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return arg(format!("tau must be positive and finite, got {tau}"));
        }
        if steps == 0 {
            return arg("schedule needs at least one step");
        }
        Ok(Self { t0, tau, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn temperature_at<T: Real>(&self, k: usize) -> T {
        if k >= self.steps {
            T::zero()
        } else {
            T::lit(self.t0) * (T::one() - T::from_count(k) / T::from_count(self.steps))
        }
    }
}

/// `2 (4J + max |h_i|)`: twice the largest local field any spin can feel.
pub fn default_initial_temperature<T: Real>(instance: &Instance<T>) -> T {
    T::lit(2.0) * instance.max_local_field()
}

/// Boltzmann averages of every cluster spin (centre first) at temperature
/// `temp`; `temp = 0` averages over the degenerate ground states.
pub fn thermal_cluster_mz<T: Real>(
    instance: &Instance<T>,
    mz: &[T],
    center: usize,
    temp: T,
) -> Result<Vec<T>> {
    instance.neighbor_list(center)?;
    if mz.len() != instance.site_count() {
        return arg("magnetisation field does not match the instance");
    }
    if temp.is_nan() || temp < T::zero() {
        return arg(format!("temperature must be nonnegative, got {temp}"));
    }
    Ok(cluster_mz(instance, mz, center, temp))
}

fn cluster_mz<T: Real>(instance: &Instance<T>, mz: &[T], center: usize, temp: T) -> Vec<T> {
    let cluster = classical_cluster(instance, mz, center);
    let energies = cluster.potential_diagonal();
    let sites = cluster.sites();
    if temp == T::zero() {
        return classical_ground_average(&energies, sites);
    }
    let emin = energies.iter().cloned().fold(T::infinity(), T::min);
    let mut z = T::zero();
    let mut acc = vec![T::zero(); sites];
    for (a, &e) in energies.iter().enumerate() {
        let w = (-(e - emin) / temp).exp();
        z += w;
        for (bit, m) in acc.iter_mut().enumerate() {
            if a >> bit & 1 == 0 {
                *m += w;
            } else {
                *m -= w;
            }
        }
    }
    acc.iter_mut().for_each(|m| *m = (*m / z).max(-T::one()).min(T::one()));
    acc
}

/// One thermal pass at temperature `temp`. Only `mz` is touched.
pub fn thermal_sweep<T: Real>(
    instance: &Instance<T>,
    mags: &mut MagnetizationField<T>,
    temp: T,
    opts: &SweepOptions,
) -> Result<()> {
    if mags.len() != instance.site_count() {
        return arg("magnetisation field does not match the instance");
    }
    if temp.is_nan() || temp < T::zero() {
        return arg(format!("temperature must be nonnegative, got {temp}"));
    }
    sweep_at(instance, mags, temp, &visit_order(instance, opts.order, 0), opts.scope);
    Ok(())
}

fn sweep_at<T: Real>(
    instance: &Instance<T>,
    mags: &mut MagnetizationField<T>,
    temp: T,
    order: &[usize],
    scope: UpdateScope,
) {
    for &center in order {
        let m = cluster_mz(instance, mags.mz(), center, temp);
        mags.set_mz(center, m[0]);
        if scope == UpdateScope::Cluster {
            for (n, &nb) in instance.neighbors(center).iter().enumerate() {
                mags.set_mz(nb, m[n + 1]);
            }
        }
    }
}

/// Thermal annealing from `mz = 0`, one sweep per temperature step.
pub fn anneal_thermal<T: Real>(
    instance: &Instance<T>,
    schedule: &ThermalSchedule,
    opts: &SweepOptions,
) -> AnnealResult<T> {
    let mut mags = MagnetizationField::unpolarized(instance.site_count());
    for k in 1..=schedule.steps() {
        let temp = schedule.temperature_at::<T>(k);
        let order = visit_order(instance, opts.order, k as u64);
        sweep_at(instance, &mut mags, temp, &order, opts.scope);
    }
    let rounded_config = mags.rounded();
    let final_energy = instance.energy_of(rounded_config.spins());
    AnnealResult {
        final_magnetization: mags,
        rounded_config,
        final_energy,
        scheme: Scheme::Sa,
        tau: schedule.tau(),
    }
}
