//! Exact classical ground states of the ferromagnetic RFIM.
//!
//! Min-cut mapping (spin +1 on the source side, -1 on the sink side):
//!
//! ```text
//! -J s_i s_j = -J + 2J [s_i != s_j]       arcs i <-> j, capacity 2J
//! -h s_i     = -|h| + 2|h| [s_i != sgn h]  source -> i (h > 0) or i -> sink (h < 0)
//! ```
//!
//! so `E = -J * bonds - Σ|h_i| + cut`. Capacities are multiplied by a
//! power-of-ten `scale` (10 for one-decimal inputs) and rounded, which
//! keeps the flow computation in exact integer arithmetic.

use crate::error::{arg, Error, Result};
use crate::maxflow::FlowNetwork;
use crate::model::{Instance, SpinConfiguration};
use crate::scalar::Real;

/// Largest lattice the enumerator accepts.
pub const BRUTE_FORCE_MAX_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundStateMethod {
    BruteForce,
    MinCut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult<T> {
    /// Always `instance.energy(&config)`.
    pub energy: T,
    pub config: SpinConfiguration,
    pub method: GroundStateMethod,
    /// Several configurations attain the minimum (brute force only).
    pub degenerate: bool,
}

/// Enumerates all `2^N` states in Gray-code order.
///
/// Ties go to the lexicographically smallest configuration read row-major
/// with `+1 < -1`.
pub fn brute_force_ground_state<T: Real>(instance: &Instance<T>) -> Result<GroundStateResult<T>> {
    let n = instance.site_count();
    if n > BRUTE_FORCE_MAX_SITES {
        return Err(Error::Capacity(format!(
            "{n} sites exceed the enumeration limit of {BRUTE_FORCE_MAX_SITES}"
        )));
    }
    let j = instance.coupling();
    let h = instance.fields();
    let scale_est = j * T::from_count(instance.bond_count())
        + h.iter().map(|x| x.abs()).sum::<T>()
        + T::one();
    let tol = T::lit(1e-9) * scale_est;

    let mut spins = vec![1i8; n];
    let mut bond_sum: i64 = instance.bond_count() as i64;
    let mut field_sum: T = h.iter().cloned().sum();
    let energy = |b: i64, f: T| -j * T::from_i64(b).unwrap() - f;

    let mut code: u32 = 0;
    let mut best = energy(bond_sum, field_sum);
    let mut candidates: Vec<u32> = vec![0];
    for i in 1u64..(1u64 << n) {
        let k = i.trailing_zeros() as usize;
        let sk = spins[k];
        let local: i64 = instance.neighbors(k).iter().map(|&q| i64::from(spins[q])).sum();
        bond_sum -= 2 * i64::from(sk) * local;
        if sk > 0 {
            field_sum -= h[k] + h[k];
        } else {
            field_sum += h[k] + h[k];
        }
        spins[k] = -sk;
        code ^= 1 << k;
        if i & 0xfff == 0 {
            field_sum = h.iter().zip(&spins).map(|(&x, &s)| if s > 0 { x } else { -x }).sum();
        }
        let e = energy(bond_sum, field_sum);
        if e < best - tol {
            best = e;
            candidates.clear();
            candidates.push(code);
        } else if (e - best).abs() <= tol {
            candidates.push(code);
        }
    }

    let configs: Vec<(T, SpinConfiguration)> = candidates
        .iter()
        .map(|&c| {
            let cfg = SpinConfiguration::from_basis_index(c as usize, n);
            (instance.energy_of(cfg.spins()), cfg)
        })
        .collect();
    let emin = configs.iter().map(|c| c.0).fold(T::infinity(), T::min);
    let ties: Vec<&(T, SpinConfiguration)> =
        configs.iter().filter(|c| c.0 - emin <= tol).collect();
    let lex_key = |cfg: &SpinConfiguration| -> Vec<i8> { cfg.spins().iter().map(|&s| -s).collect() };
    let best_cfg = ties
        .iter()
        .filter(|c| c.0 == emin)
        .min_by_key(|c| lex_key(&c.1))
        .expect("at least one minimiser");
    Ok(GroundStateResult {
        energy: best_cfg.0,
        config: best_cfg.1.clone(),
        method: GroundStateMethod::BruteForce,
        degenerate: ties.len() > 1,
    })
}

/// Flow network of an instance with integer capacities and its scale.
#[derive(Debug, Clone)]
pub struct RfimNetwork {
    pub network: FlowNetwork,
    /// Capacities are `round(scale * real capacity)`.
    pub scale: i64,
}

fn integral(x: f64, scale: i64) -> Option<i64> {
    let y = x * scale as f64;
    let r = y.round();
    ((y - r).abs() <= 1e-9 * r.abs().max(1.0) && r.abs() < 1e15).then_some(r as i64)
}

/// Smallest power of ten making every `2J` and `2|h_i|` an integer.
pub fn capacity_scale<T: Real>(instance: &Instance<T>) -> Result<i64> {
    let values: Vec<f64> = std::iter::once(instance.coupling())
        .chain(instance.fields().iter().cloned())
        .map(|x| 2.0 * x.as_f64().abs())
        .collect();
    let mut scale = 1i64;
    for _ in 0..=6 {
        if values.iter().all(|&v| integral(v, scale).is_some()) {
            return Ok(scale);
        }
        scale *= 10;
    }
    arg("coupling and fields need more than six decimals; min-cut capacities would not be exact")
}

pub fn build_flow_network<T: Real>(instance: &Instance<T>) -> Result<RfimNetwork> {
    let scale = capacity_scale(instance)?;
    let n = instance.site_count();
    let (source, sink) = (n, n + 1);
    let mut network = FlowNetwork::new(n + 2, source, sink);
    let bond_cap = integral(2.0 * instance.coupling().as_f64(), scale).unwrap();
    for (i, j) in instance.bonds() {
        network.add_arc(i, j, bond_cap);
        network.add_arc(j, i, bond_cap);
    }
    for (i, &h) in instance.fields().iter().enumerate() {
        let h = h.as_f64();
        let cap = integral(2.0 * h.abs(), scale).unwrap();
        if h > 0.0 {
            network.add_arc(source, i, cap);
        } else if h < 0.0 {
            network.add_arc(i, sink, cap);
        }
    }
    Ok(RfimNetwork { network, scale })
}

/// `2 * scale * E(config)` in integer arithmetic, for exact comparisons
/// between ground states found by different methods.
pub fn scaled_energy<T: Real>(instance: &Instance<T>, config: &SpinConfiguration, scale: i64) -> Result<i64> {
    if config.len() != instance.site_count() {
        return arg("configuration does not match the instance");
    }
    let inexact = || Error::Argument(format!("values are not integral at scale {scale}"));
    let bond = integral(2.0 * instance.coupling().as_f64(), scale).ok_or_else(inexact)?;
    let s = config.spins();
    let balance: i64 = instance.bonds().map(|(a, b)| i64::from(s[a] * s[b])).sum();
    let mut total = -bond * balance;
    for (&h, &si) in instance.fields().iter().zip(s) {
        total -= integral(2.0 * h.as_f64(), scale).ok_or_else(inexact)? * i64::from(si);
    }
    Ok(total)
}

/// `-J * bonds - Σ|h_i| + cut / scale`
pub fn energy_from_cut<T: Real>(instance: &Instance<T>, cut: i64, scale: i64) -> f64 {
    let offset = -instance.coupling().as_f64() * instance.bond_count() as f64
        - instance.fields().iter().map(|h| h.as_f64().abs()).sum::<f64>();
    offset + cut as f64 / scale as f64
}

/// Ground state from the minimum s-t cut; the source side of the cut
/// (the sites reachable in the residual network) is spin up.
pub fn min_cut_ground_state<T: Real>(instance: &Instance<T>) -> Result<GroundStateResult<T>> {
    let mut net = build_flow_network(instance)?;
    net.network.max_flow();
    let side = net.network.source_side();
    let spins = (0..instance.site_count())
        .map(|i| if side[i] { 1 } else { -1 })
        .collect();
    let config = SpinConfiguration::new(spins)?;
    Ok(GroundStateResult {
        energy: instance.energy_of(config.spins()),
        config,
        method: GroundStateMethod::MinCut,
        degenerate: false,
    })
}
