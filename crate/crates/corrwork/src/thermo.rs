//! Ideal-gas semipermeable-membrane networks.
//!
//! A vessel is a chain of regions separated by walls. Each molecular species
//! equilibrates over its accessible volume: the run of regions it can reach
//! through walls permeable to it. Partial pressures are ideal and rarefied,
//! count * kT / accessible volume, which is all the membrane microphysics
//! the work integrals need.

use crate::states::{binary_entropy, CorrelationParam};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::LN_2;
use thiserror::Error;

/// Bisection tolerance for piston equilibria, as a fraction of V.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
/// Bracket shrink factor keeping bisection off the exact vessel wall.
pub const BRACKET_EPS: f64 = 1e-9;
/// Relative volume below which an occupied component is singular.
pub const ZERO_VOLUME_EPS: f64 = 1e-12;
/// Maximum interval-halving depth for the adaptive Simpson quadrature.
pub const MAX_QUAD_DEPTH: u32 = 40;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("species `{species}` occupies a zero-volume component (count {count})")]
    ZeroVolume { species: String, count: f64 },
    #[error("wall {0} is not a movable piston")]
    NotAPiston(usize),
    #[error("piston pressure gap has no root in the displacement bracket")]
    NoRoot,
    #[error("piston path is not monotone")]
    PathNotMonotone,
    #[error("integrand denominator collapsed below {0:.1e} of the vessel volume")]
    Singularity(f64),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Gas-wide constants: molecule count N, temperature T, Boltzmann constant k,
/// and the half-vessel volume V (total vessel is 2V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    pub n_molecules: f64,
    pub temperature: f64,
    pub boltzmann: f64,
    pub half_volume: f64,
}

impl GasSpec {
    pub fn new(
        n_molecules: f64,
        temperature: f64,
        boltzmann: f64,
        half_volume: f64,
    ) -> Result<Self, ThermoError> {
        for (name, v) in [
            ("n_molecules", n_molecules),
            ("temperature", temperature),
            ("boltzmann", boltzmann),
            ("half_volume", half_volume),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ThermoError::Domain(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            n_molecules,
            temperature,
            boltzmann,
            half_volume,
        })
    }

    /// kT.
    pub fn kt(&self) -> f64 {
        self.boltzmann * self.temperature
    }

    /// NkT, the natural work unit of every result in this crate.
    pub fn nkt(&self) -> f64 {
        self.n_molecules * self.kt()
    }
}

impl Default for GasSpec {
    fn default() -> Self {
        Self {
            n_molecules: 1.0,
            temperature: 1.0,
            boltzmann: 1.0,
            half_volume: 1.0,
        }
    }
}

/// Piston displacements from the membrane-insertion position: v1 for the
/// right piston (rightward positive), v2 for the left piston (leftward
/// positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonDisplacement {
    pub v1: f64,
    pub v2: f64,
}

impl PistonDisplacement {
    pub fn new(v1: f64, v2: f64) -> Result<Self, ThermoError> {
        if !v1.is_finite() || !v2.is_finite() || v1 < 0.0 || v2 < 0.0 {
            return Err(ThermoError::Domain(format!(
                "displacements must be finite and non-negative, got ({v1}, {v2})"
            )));
        }
        Ok(Self { v1, v2 })
    }

    pub fn zero() -> Self {
        Self { v1: 0.0, v2: 0.0 }
    }

    /// Symmetric displacement v1 = v2 = v.
    pub fn symmetric(v: f64) -> Result<Self, ThermoError> {
        Self::new(v, v)
    }
}

/// Result of solving the piston force balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub displacement: PistonDisplacement,
    /// True when the gap vanished identically (p = 1/2: no imbalance).
    pub degenerate: bool,
}

/// Which way a piston sweeps when the gas between the membranes pushes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WallKind {
    Fixed,
    Piston { outward: Side },
}

/// Wall between adjacent regions `left_region` and `left_region + 1`.
#[derive(Debug, Clone)]
pub struct Wall {
    pub left_region: usize,
    pub right_region: usize,
    pub permeable: BTreeSet<String>,
    pub kind: WallKind,
}

#[derive(Debug, Clone)]
pub struct Region {
    pub volume: f64,
    counts: BTreeMap<String, f64>,
}

impl Region {
    pub fn counts(&self) -> &BTreeMap<String, f64> {
        &self.counts
    }
}

/// Chain of gas regions separated by fixed or movable, possibly
/// semipermeable, walls.
#[derive(Debug, Clone)]
pub struct MembraneNetwork {
    regions: Vec<Region>,
    walls: Vec<Wall>,
    total_volume: f64,
}

impl MembraneNetwork {
    /// Single open vessel holding the given species counts.
    pub fn single_region(
        total_volume: f64,
        counts: BTreeMap<String, f64>,
    ) -> Result<Self, ThermoError> {
        if !total_volume.is_finite() || total_volume <= 0.0 {
            return Err(ThermoError::Domain(format!(
                "vessel volume must be positive, got {total_volume}"
            )));
        }
        for (label, count) in &counts {
            if !count.is_finite() || *count < 0.0 {
                return Err(ThermoError::Domain(format!(
                    "count for `{label}` must be non-negative, got {count}"
                )));
            }
        }
        Ok(Self {
            regions: vec![Region {
                volume: total_volume,
                counts,
            }],
            walls: Vec::new(),
            total_volume,
        })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// All labels declared in any region, sorted.
    pub fn species_labels(&self) -> Vec<String> {
        let mut labels = BTreeSet::new();
        for region in &self.regions {
            labels.extend(region.counts.keys().cloned());
        }
        labels.into_iter().collect()
    }

    /// Total molecule count of one species over the whole vessel.
    pub fn total_count(&self, species: &str) -> f64 {
        self.regions
            .iter()
            .map(|r| r.counts.get(species).copied().unwrap_or(0.0))
            .sum()
    }

    /// Total molecule count over all species.
    pub fn total_population(&self) -> f64 {
        self.species_labels()
            .iter()
            .map(|s| self.total_count(s))
            .sum()
    }

    pub fn replace_region_counts(&mut self, region: usize, counts: BTreeMap<String, f64>) {
        self.regions[region].counts = counts;
    }

    /// Split the single open vessel in half with a fixed impermeable wall.
    ///
    /// Species counts split evenly with the volume, matching an equilibrated
    /// gas; the operation performs no work.
    pub fn insert_center_partition(&mut self) -> Result<(), ThermoError> {
        if self.regions.len() != 1 {
            return Err(ThermoError::Domain(
                "a partition can only be inserted into a single open vessel".into(),
            ));
        }
        let whole = self.regions.pop().expect("one region");
        let half_counts: BTreeMap<String, f64> =
            whole.counts.iter().map(|(k, v)| (k.clone(), v * 0.5)).collect();
        let half = whole.volume * 0.5;
        self.regions.push(Region {
            volume: half,
            counts: half_counts.clone(),
        });
        self.regions.push(Region {
            volume: half,
            counts: half_counts,
        });
        self.walls.push(Wall {
            left_region: 0,
            right_region: 1,
            permeable: BTreeSet::new(),
            kind: WallKind::Fixed,
        });
        Ok(())
    }

    /// Swap the central fixed wall for two movable semipermeable pistons,
    /// both starting at the center with an empty middle region between them.
    pub fn replace_center_with_semipermeable(
        &mut self,
        left_permeable: BTreeSet<String>,
        right_permeable: BTreeSet<String>,
    ) -> Result<(), ThermoError> {
        if self.regions.len() != 2 || self.walls.len() != 1 {
            return Err(ThermoError::Domain(
                "semipermeable pistons replace a single central partition".into(),
            ));
        }
        if self.walls[0].kind != WallKind::Fixed {
            return Err(ThermoError::Domain(
                "central wall is already a piston".into(),
            ));
        }
        self.regions.insert(
            1,
            Region {
                volume: 0.0,
                counts: BTreeMap::new(),
            },
        );
        self.walls = vec![
            Wall {
                left_region: 0,
                right_region: 1,
                permeable: left_permeable,
                kind: WallKind::Piston {
                    outward: Side::Left,
                },
            },
            Wall {
                left_region: 1,
                right_region: 2,
                permeable: right_permeable,
                kind: WallKind::Piston {
                    outward: Side::Right,
                },
            },
        ];
        Ok(())
    }

    /// Remove every wall and merge the chain back into one open vessel.
    pub fn remove_all_walls(&mut self) {
        let mut counts: BTreeMap<String, f64> = BTreeMap::new();
        for region in &self.regions {
            for (label, count) in &region.counts {
                *counts.entry(label.clone()).or_insert(0.0) += count;
            }
        }
        self.regions = vec![Region {
            volume: self.total_volume,
            counts,
        }];
        self.walls.clear();
    }

    fn wall_open_for(&self, wall: &Wall, species: &str) -> bool {
        wall.permeable.contains(species)
    }

    /// Contiguous run of regions reachable from `start` by `species`, with
    /// its total volume and total count of that species.
    fn component(&self, species: &str, start: usize) -> (usize, usize, f64, f64) {
        let mut lo = start;
        while lo > 0 && self.wall_open_for(&self.walls[lo - 1], species) {
            lo -= 1;
        }
        let mut hi = start;
        while hi + 1 < self.regions.len() && self.wall_open_for(&self.walls[hi], species) {
            hi += 1;
        }
        let mut volume = 0.0;
        let mut count = 0.0;
        for r in lo..=hi {
            volume += self.regions[r].volume;
            count += self.regions[r].counts.get(species).copied().unwrap_or(0.0);
        }
        (lo, hi, volume, count)
    }

    /// Total volume reachable by `species` from every region where it
    /// resides (through walls permeable to it).
    pub fn accessible_volume(&self, species: &str) -> Result<f64, ThermoError> {
        if !self
            .regions
            .iter()
            .any(|r| r.counts.contains_key(species))
        {
            return Err(ThermoError::UnknownSpecies(species.to_string()));
        }
        let mut seen_lo: Vec<usize> = Vec::new();
        let mut volume = 0.0;
        for (idx, region) in self.regions.iter().enumerate() {
            if region.counts.get(species).copied().unwrap_or(0.0) <= 0.0 {
                continue;
            }
            let (lo, _hi, vol, _count) = self.component(species, idx);
            if !seen_lo.contains(&lo) {
                seen_lo.push(lo);
                volume += vol;
            }
        }
        if seen_lo.is_empty() {
            // Declared but empty everywhere: its own region's volume.
            let idx = self
                .regions
                .iter()
                .position(|r| r.counts.contains_key(species))
                .expect("declared species");
            let (_, _, vol, _) = self.component(species, idx);
            volume = vol;
        }
        Ok(volume)
    }

    /// Total ideal-gas pressure in one region: the sum over species reaching
    /// it of count * kT / accessible volume.
    pub fn region_pressure(&self, spec: &GasSpec, region: usize) -> Result<f64, ThermoError> {
        assert!(region < self.regions.len(), "region index out of range");
        let mut pressure = 0.0;
        for species in self.species_labels() {
            let (_lo, _hi, volume, count) = self.component(&species, region);
            if count <= 0.0 {
                continue;
            }
            if volume < ZERO_VOLUME_EPS * self.total_volume {
                return Err(ThermoError::ZeroVolume { species, count });
            }
            pressure += count * spec.kt() / volume;
        }
        Ok(pressure)
    }

    /// Net outward pressure on a movable piston: inside (between the
    /// membranes) minus outside. Positive pushes the piston outward.
    pub fn piston_pressure_gap(&self, spec: &GasSpec, wall: usize) -> Result<f64, ThermoError> {
        let w = self
            .walls
            .get(wall)
            .ok_or(ThermoError::NotAPiston(wall))?;
        let outward = match w.kind {
            WallKind::Piston { outward } => outward,
            WallKind::Fixed => return Err(ThermoError::NotAPiston(wall)),
        };
        let (inside, outside) = match outward {
            Side::Left => (w.right_region, w.left_region),
            Side::Right => (w.left_region, w.right_region),
        };
        Ok(self.region_pressure(spec, inside)? - self.region_pressure(spec, outside)?)
    }

    fn piston_index(&self, outward: Side) -> Result<usize, ThermoError> {
        self.walls
            .iter()
            .position(|w| w.kind == WallKind::Piston { outward })
            .ok_or(ThermoError::NotAPiston(usize::MAX))
    }

    /// Copy of the network with both pistons advanced by `d` from their
    /// current positions.
    pub fn with_displacement(&self, d: PistonDisplacement) -> Result<Self, ThermoError> {
        let left = self.piston_index(Side::Left)?;
        let right = self.piston_index(Side::Right)?;
        let mut out = self.clone();
        let transfers = [
            (self.walls[left].left_region, self.walls[left].right_region, d.v2),
            (self.walls[right].right_region, self.walls[right].left_region, d.v1),
        ];
        for (from, to, dv) in transfers {
            if out.regions[from].volume - dv < -ZERO_VOLUME_EPS * self.total_volume {
                return Err(ThermoError::Domain(format!(
                    "displacement {dv} exceeds region volume {}",
                    out.regions[from].volume
                )));
            }
            out.regions[from].volume = (out.regions[from].volume - dv).max(0.0);
            out.regions[to].volume += dv;
        }
        Ok(out)
    }

    /// Solve the piston force balance by bisection along the symmetric
    /// displacement diagonal, to within 1e-12 of the half-volume.
    ///
    /// Returns the degenerate zero displacement when no pressure imbalance
    /// exists, and the full sweep when the gap stays positive all the way to
    /// the vessel wall.
    pub fn equilibrium_displacement(&self, spec: &GasSpec) -> Result<Equilibrium, ThermoError> {
        let left = self.piston_index(Side::Left)?;
        let right = self.piston_index(Side::Right)?;
        let sweep_right = self.regions[self.walls[right].right_region].volume;
        let sweep_left = self.regions[self.walls[left].left_region].volume;

        let gap_scale = spec.nkt() / self.total_volume;
        let degenerate_eps = 1e-12 * gap_scale;

        let solve = |wall: usize, sweep: f64| -> Result<(f64, bool), ThermoError> {
            let gap = |v: f64| -> Result<f64, ThermoError> {
                self.with_displacement(PistonDisplacement::symmetric(v)?)?
                    .piston_pressure_gap(spec, wall)
            };
            let g0 = gap(0.0)?;
            if g0.abs() <= degenerate_eps {
                return Ok((0.0, true));
            }
            if g0 < 0.0 {
                return Err(ThermoError::NoRoot);
            }
            let hi = sweep * (1.0 - BRACKET_EPS);
            if gap(hi)? > 0.0 {
                // Pressure never balances: the pistons reach the vessel ends.
                return Ok((sweep, false));
            }
            let (mut lo, mut hi) = (0.0, hi);
            let tol = EQUILIBRIUM_TOL * spec.half_volume;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if gap(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok((0.5 * (lo + hi), false))
        };

        let (v1, degen_r) = solve(right, sweep_right)?;
        let (v2, degen_l) = solve(left, sweep_left)?;
        Ok(Equilibrium {
            displacement: PistonDisplacement::new(v1, v2)?,
            degenerate: degen_r && degen_l,
        })
    }

    /// Work extracted by moving the pistons quasistatically along a monotone
    /// path of displacement waypoints starting at zero.
    ///
    /// Integrates gap_right dV1 + gap_left dV2 segment by segment with
    /// adaptive Simpson quadrature at absolute tolerance `abs_tol` (energy
    /// units). The default protocol path is the single symmetric segment.
    pub fn quasistatic_work(
        &self,
        spec: &GasSpec,
        path: &[PistonDisplacement],
        abs_tol: f64,
    ) -> Result<f64, ThermoError> {
        if path.is_empty() {
            return Ok(0.0);
        }
        if path[0].v1.abs() > 1e-15 || path[0].v2.abs() > 1e-15 {
            return Err(ThermoError::Domain(
                "piston path must start at zero displacement".into(),
            ));
        }
        for pair in path.windows(2) {
            if pair[1].v1 < pair[0].v1 - 1e-15 || pair[1].v2 < pair[0].v2 - 1e-15 {
                return Err(ThermoError::PathNotMonotone);
            }
        }
        let left = self.piston_index(Side::Left)?;
        let right = self.piston_index(Side::Right)?;

        let singular = |e: ThermoError| match e {
            ThermoError::ZeroVolume { .. } => ThermoError::Singularity(ZERO_VOLUME_EPS),
            other => other,
        };

        let segments = path.len().saturating_sub(1).max(1);
        let seg_tol = abs_tol / segments as f64;
        let mut work = 0.0;
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (dv1, dv2) = (b.v1 - a.v1, b.v2 - a.v2);
            if dv1.abs() <= 1e-18 && dv2.abs() <= 1e-18 {
                continue;
            }
            let integrand = |t: f64| -> Result<f64, ThermoError> {
                let d = PistonDisplacement::new(a.v1 + t * dv1, a.v2 + t * dv2)?;
                let net = self.with_displacement(d)?;
                let mut f = 0.0;
                if dv1.abs() > 0.0 {
                    f += net.piston_pressure_gap(spec, right).map_err(singular)? * dv1;
                }
                if dv2.abs() > 0.0 {
                    f += net.piston_pressure_gap(spec, left).map_err(singular)? * dv2;
                }
                Ok(f)
            };
            work += adaptive_simpson(&integrand, 0.0, 1.0, seg_tol, MAX_QUAD_DEPTH)?;
        }
        Ok(work)
    }

    /// Configurational entropy of the gas, sum over species components of
    /// count * ln(volume / count), in nats. Only differences are meaningful.
    pub fn positional_entropy(&self) -> f64 {
        let mut entropy = 0.0;
        for species in self.species_labels() {
            let mut idx = 0;
            while idx < self.regions.len() {
                let (lo, hi, volume, count) = self.component(&species, idx);
                debug_assert_eq!(lo, idx.min(lo));
                if count > 1e-15 {
                    entropy += count * (volume / count).ln();
                }
                idx = hi + 1;
            }
        }
        entropy
    }
}

/// Analytic mixing work NkT (ln 2 - h(p)): the closed-form oracle the
/// quadrature is checked against.
pub fn closed_form_work(p: CorrelationParam, spec: &GasSpec) -> f64 {
    let h = binary_entropy(p.value()).expect("correlation parameter lies in [0, 1]");
    spec.nkt() * (LN_2 - h)
}

fn adaptive_simpson<F>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<f64, ThermoError>
where
    F: Fn(f64) -> Result<f64, ThermoError>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64, ThermoError>
where
    F: Fn(f64) -> Result<f64, ThermoError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * abs_tol {
        return Ok(left + right + delta / 15.0);
    }
    let half_tol = 0.5 * abs_tol;
    Ok(
        simpson_step(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const RHO1: &str = "rho1";
    const RHO2: &str = "rho2";

    fn spec() -> GasSpec {
        GasSpec::default()
    }

    fn counts(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// Vessel just after membrane insertion for the partially correlated
    /// protocols: measured species on both sides, pistons at the center.
    fn partial_setup(p: f64, spec: &GasSpec) -> MembraneNetwork {
        let n = spec.n_molecules;
        let v = spec.half_volume;
        let mut net = MembraneNetwork::single_region(2.0 * v, counts(&[])).unwrap();
        net.insert_center_partition().unwrap();
        net.replace_region_counts(
            0,
            counts(&[(RHO1, p * n / 2.0), (RHO2, (1.0 - p) * n / 2.0)]),
        );
        net.replace_region_counts(
            1,
            counts(&[(RHO1, (1.0 - p) * n / 2.0), (RHO2, p * n / 2.0)]),
        );
        net.replace_center_with_semipermeable(
            [RHO1.to_string()].into(),
            [RHO2.to_string()].into(),
        )
        .unwrap();
        net
    }

    fn full_setup(spec: &GasSpec) -> MembraneNetwork {
        partial_setup(1.0, spec)
    }

    #[test]
    fn accessible_volume_cases() {
        let s = spec();
        let net = full_setup(&s);
        // Zero displacement: rho1 reaches left + (empty) middle.
        assert_abs_diff_eq!(net.accessible_volume(RHO1).unwrap(), 1.0, epsilon = 1e-12);
        let displaced = net
            .with_displacement(PistonDisplacement::new(0.25, 0.4).unwrap())
            .unwrap();
        // V + v1 for the left gas, V + v2 for the right gas.
        assert_abs_diff_eq!(displaced.accessible_volume(RHO1).unwrap(), 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(displaced.accessible_volume(RHO2).unwrap(), 1.4, epsilon = 1e-12);
        assert!(matches!(
            net.accessible_volume("nope"),
            Err(ThermoError::UnknownSpecies(_))
        ));

        // All walls impermeable: each species sees only its region.
        let mut sealed = MembraneNetwork::single_region(2.0, counts(&[(RHO1, 1.0)])).unwrap();
        sealed.insert_center_partition().unwrap();
        assert_abs_diff_eq!(sealed.accessible_volume(RHO1).unwrap(), 2.0, epsilon = 1e-12);
        sealed.replace_region_counts(1, counts(&[(RHO1, 0.0)]));
        assert_abs_diff_eq!(sealed.accessible_volume(RHO1).unwrap(), 1.0, epsilon = 1e-12);

        // No walls at all: the whole vessel.
        let open = MembraneNetwork::single_region(2.0, counts(&[(RHO1, 1.0)])).unwrap();
        assert_abs_diff_eq!(open.accessible_volume(RHO1).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pressures_match_closed_forms_at_zero_displacement() {
        let s = spec();
        let net = full_setup(&s);
        // P_m = (N kT / 2)(1/V + 1/V) = 1, P_left = (N/2) kT / V = 0.5.
        assert_abs_diff_eq!(net.region_pressure(&s, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(net.region_pressure(&s, 0).unwrap(), 0.5, epsilon = 1e-12);
        // Gap on the right piston: P_m - P_2 = 0.5.
        assert_abs_diff_eq!(net.piston_pressure_gap(&s, 1).unwrap(), 0.5, epsilon = 1e-12);

        // Partial case: P_mp = p N kT / V.
        let p = 0.75;
        let netp = partial_setup(p, &s);
        assert_abs_diff_eq!(netp.region_pressure(&s, 1).unwrap(), p, epsilon = 1e-12);
    }

    #[test]
    fn partial_gap_matches_formula_along_displacement() {
        let s = spec();
        let p = 0.75;
        let net = partial_setup(p, &s);
        for v in [0.0, 0.1, 0.3, 0.45] {
            let displaced = net
                .with_displacement(PistonDisplacement::symmetric(v).unwrap())
                .unwrap();
            let gap = displaced.piston_pressure_gap(&s, 1).unwrap();
            let expected = 0.5 * (p / (1.0 + v) - (1.0 - p) / (1.0 - v));
            assert_abs_diff_eq!(gap, expected, epsilon = 1e-12);
        }
        // Vanishes at (2p - 1) V.
        let at_eq = net
            .with_displacement(PistonDisplacement::symmetric(0.5).unwrap())
            .unwrap();
        assert_abs_diff_eq!(at_eq.piston_pressure_gap(&s, 1).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn wall_indexing_after_replacement() {
        let s = spec();
        let net = partial_setup(0.75, &s);
        // Wall 0 is the left piston, wall 1 the right piston after insertion;
        // indices here follow the chain: walls()[0] between regions 0-1.
        assert!(matches!(net.walls()[0].kind, WallKind::Piston { outward: Side::Left }));
        assert!(matches!(net.walls()[1].kind, WallKind::Piston { outward: Side::Right }));
        assert!(net.piston_pressure_gap(&s, 0).is_ok());
        assert!(matches!(
            MembraneNetwork::single_region(2.0, counts(&[(RHO1, 1.0)]))
                .unwrap()
                .piston_pressure_gap(&s, 0),
            Err(ThermoError::NotAPiston(_))
        ));
    }

    #[test]
    fn equilibrium_matches_2p_minus_1() {
        let s = spec();
        for p in [0.55, 0.6, 0.75, 0.9, 0.99] {
            let net = partial_setup(p, &s);
            let eq = net.equilibrium_displacement(&s).unwrap();
            assert!(!eq.degenerate);
            assert_abs_diff_eq!(eq.displacement.v1, 2.0 * p - 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(eq.displacement.v2, 2.0 * p - 1.0, epsilon = 1e-9);
        }
        // Full correlation: the pistons reach the vessel ends.
        let eq = full_setup(&s).equilibrium_displacement(&s).unwrap();
        assert_abs_diff_eq!(eq.displacement.v1, 1.0, epsilon = 1e-12);
        assert!(!eq.degenerate);
        // p = 1/2: no imbalance at all.
        let eq = partial_setup(0.5, &s).equilibrium_displacement(&s).unwrap();
        assert_abs_diff_eq!(eq.displacement.v1, 0.0, epsilon = 1e-15);
        assert!(eq.degenerate);
    }

    #[test]
    fn quadrature_reproduces_closed_form_work() {
        let s = spec();
        let tol = 1e-10 * s.nkt();
        for p in [0.55, 0.6, 0.75, 0.9, 1.0] {
            let net = partial_setup(p, &s);
            let eq = net.equilibrium_displacement(&s).unwrap();
            let path = [PistonDisplacement::zero(), eq.displacement];
            let work = net.quasistatic_work(&s, &path, tol).unwrap();
            let expected = closed_form_work(CorrelationParam::new(p).unwrap(), &s);
            assert_abs_diff_eq!(work, expected, epsilon = 1e-6 * s.nkt());
        }
    }

    #[test]
    fn work_scales_with_nkt() {
        let s = GasSpec::new(50.0, 2.0, 1.0, 1.0).unwrap();
        let p = 0.6;
        let net = partial_setup(p, &s);
        let eq = net.equilibrium_displacement(&s).unwrap();
        let path = [PistonDisplacement::zero(), eq.displacement];
        let work = net.quasistatic_work(&s, &path, 1e-10 * s.nkt()).unwrap();
        // 100 (ln 2 - h(0.6)) = 2.0135514.
        assert_abs_diff_eq!(work, 2.0135514, epsilon = 1e-5);
    }

    #[test]
    fn path_validation() {
        let s = spec();
        let net = partial_setup(0.75, &s);
        let bad_start = [PistonDisplacement::new(0.1, 0.0).unwrap()];
        assert!(matches!(
            net.quasistatic_work(&s, &bad_start, 1e-10),
            Err(ThermoError::Domain(_))
        ));
        let not_monotone = [
            PistonDisplacement::zero(),
            PistonDisplacement::new(0.3, 0.3).unwrap(),
            PistonDisplacement::new(0.2, 0.4).unwrap(),
        ];
        assert!(matches!(
            net.quasistatic_work(&s, &not_monotone, 1e-10),
            Err(ThermoError::PathNotMonotone)
        ));
        // Zero-length path does no work.
        let nothing = [PistonDisplacement::zero(), PistonDisplacement::zero()];
        assert_abs_diff_eq!(
            net.quasistatic_work(&s, &nothing, 1e-10).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn volume_and_count_conservation() {
        let s = spec();
        let net = partial_setup(0.75, &s);
        let total_volume: f64 = net.regions().iter().map(|r| r.volume).sum();
        assert_abs_diff_eq!(total_volume, 2.0, epsilon = 1e-12);
        let before = (net.total_count(RHO1), net.total_count(RHO2));

        let displaced = net
            .with_displacement(PistonDisplacement::symmetric(0.3).unwrap())
            .unwrap();
        let total_volume: f64 = displaced.regions().iter().map(|r| r.volume).sum();
        assert_abs_diff_eq!(total_volume, 2.0, epsilon = 1e-12);
        assert_eq!(
            (displaced.total_count(RHO1), displaced.total_count(RHO2)),
            before
        );

        let mut merged = displaced.clone();
        merged.remove_all_walls();
        assert_abs_diff_eq!(merged.total_count(RHO1), before.0, epsilon = 1e-12);
        assert_abs_diff_eq!(merged.regions()[0].volume, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn positional_entropy_change_matches_work_over_kt() {
        let s = spec();
        let p = 0.75;
        let net = partial_setup(p, &s);
        let eq = net.equilibrium_displacement(&s).unwrap();
        let displaced = net.with_displacement(eq.displacement).unwrap();
        let delta = displaced.positional_entropy() - net.positional_entropy();
        // N (ln 2 - h(p)) in nats.
        let expected = closed_form_work(CorrelationParam::new(p).unwrap(), &s) / s.kt();
        assert_abs_diff_eq!(delta, expected, epsilon = 1e-9);
    }

    #[test]
    fn closed_form_work_values() {
        let s = spec();
        let p1 = CorrelationParam::new(1.0).unwrap();
        assert_abs_diff_eq!(closed_form_work(p1, &s), LN_2, epsilon = 1e-15);
        let p_half = CorrelationParam::new(0.5).unwrap();
        assert_abs_diff_eq!(closed_form_work(p_half, &s), 0.0, epsilon = 1e-15);
        // 100 (ln 2 - h(0.9)) = 36.8064207.
        let s100 = GasSpec::new(100.0, 1.0, 1.0, 1.0).unwrap();
        let p9 = CorrelationParam::new(0.9).unwrap();
        assert_abs_diff_eq!(closed_form_work(p9, &s100), 36.8064207, epsilon = 1e-6);
    }

    #[test]
    fn closed_form_work_monotone_in_p() {
        let s = spec();
        let mut last = -1.0;
        for i in 0..=20 {
            let p = 0.5 + 0.5 * (i as f64) / 20.0;
            let w = closed_form_work(CorrelationParam::new(p).unwrap(), &s);
            assert!(w > last, "work not increasing at p = {p}");
            last = w;
        }
    }

    #[test]
    fn gas_spec_validation() {
        assert!(GasSpec::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(GasSpec::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(GasSpec::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn no_root_when_membranes_block_everything() {
        // Impermeable pistons never see pressure from between themselves, so
        // the gap starts negative and there is no outward equilibrium.
        let s = spec();
        let mut net = MembraneNetwork::single_region(2.0, counts(&[(RHO1, 1.0)])).unwrap();
        net.insert_center_partition().unwrap();
        net.replace_center_with_semipermeable(BTreeSet::new(), BTreeSet::new())
            .unwrap();
        assert!(matches!(
            net.equilibrium_displacement(&s),
            Err(ThermoError::NoRoot)
        ));
    }

    #[test]
    fn zero_volume_component_is_rejected() {
        // Sweeping to v = V crushes the confined counter-species populations
        // into zero volume when p < 1.
        let s = spec();
        let net = partial_setup(0.75, &s);
        let crushed = net
            .with_displacement(PistonDisplacement::symmetric(1.0).unwrap())
            .unwrap();
        assert!(matches!(
            crushed.region_pressure(&s, 2),
            Err(ThermoError::ZeroVolume { .. })
        ));
        // The same collapse inside a work integral reports a singularity.
        let path = [
            PistonDisplacement::zero(),
            PistonDisplacement::symmetric(1.0).unwrap(),
        ];
        assert!(matches!(
            net.quasistatic_work(&s, &path, 1e-10),
            Err(ThermoError::Singularity(_))
        ));
    }

    #[test]
    fn full_correlation_boundary_is_not_singular() {
        // At p = 1 the counter-species counts are exactly zero, so the same
        // sweep to v = V stays finite all the way to the vessel wall.
        let s = spec();
        let net = full_setup(&s);
        let path = [
            PistonDisplacement::zero(),
            PistonDisplacement::symmetric(1.0).unwrap(),
        ];
        let work = net.quasistatic_work(&s, &path, 1e-10).unwrap();
        assert_abs_diff_eq!(work, LN_2, epsilon = 1e-9);
    }
}
