//! Control force/torque sets and the minimum guaranteed wrench.
//!
//! With bidirectional thrusts bounded by `|λ_i| ≤ λ_max` the reachable forces
//! `U λ` and torques `T λ` are zonotopes. The largest origin-centred ball
//! inside such a zonotope has radius
//!
//! ```text
//! min over generator pairs (i, j) of λ_max Σ_k |(g_i ∧ g_j)ᵀ g_k| / ‖g_i ∧ g_j‖
//! ```
//!
//! since every facet normal is the cross product of two generators.

use nalgebra::{Matrix3xX, Vector3, SVD};

use crate::error::{Error, Result};
use crate::tolerances;
use crate::vehicle::{allocation_matrix, RotorLayout};

/// Origin-symmetric zonotope `{Σ c_k λ_max g_k : |c_k| ≤ 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Zonotope {
    generators: Vec<Vector3<f64>>,
    half_width: f64,
}

impl Zonotope {
    pub fn new(generators: Vec<Vector3<f64>>, half_width: f64) -> Self {
        Self { generators, half_width }
    }

    pub fn generators(&self) -> &[Vector3<f64>] {
        &self.generators
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Dimension of the generator span.
    pub fn rank(&self) -> usize {
        if self.generators.is_empty() {
            return 0;
        }
        let m = Matrix3xX::from_columns(&self.generators);
        let sv = SVD::new(m, false, false).singular_values;
        let max = sv.max();
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > max * tolerances::RANK_RELATIVE).count()
    }

    /// Support function `h(n) = λ_max Σ_k |n · g_k|` for a unit `n`.
    pub fn support(&self, direction: &Vector3<f64>) -> f64 {
        self.half_width * self.generators.iter().map(|g| direction.dot(g).abs()).sum::<f64>()
    }

    /// Unit facet normals, one per non-parallel generator pair.
    pub fn facet_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = Vec::new();
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let c = a.cross(b);
                let n = c.norm();
                if n >= tolerances::DEGENERATE_PAIR {
                    normals.push(c / n);
                }
            }
        }
        normals
    }

    /// Inscribed-sphere radius from the pairwise facet formula.
    ///
    /// Fails with [`Error::DegenerateDesign`] when every generator pair is parallel.
    pub fn inscribed_radius(&self) -> Result<f64> {
        let normals = self.facet_normals();
        if normals.is_empty() {
            return Err(Error::DegenerateDesign(
                "all generator pairs are parallel".into(),
            ));
        }
        Ok(normals
            .iter()
            .map(|n| self.support(n))
            .fold(f64::INFINITY, f64::min))
    }

    /// `λ_max Σ_k |(g_i ∧ g_j)ᵀ g_k|` minimized over pairs without dividing by `‖g_i ∧ g_j‖`.
    ///
    /// Not a geometric radius: it under-reports the inscribed radius whenever the
    /// minimizing pair is not orthogonal. See [`ForceMeasure::UnnormalizedPairSum`].
    pub fn unnormalized_pair_sum(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let c = a.cross(b);
                if c.norm() >= tolerances::DEGENERATE_PAIR {
                    best = best.min(self.support(&c));
                }
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::DegenerateDesign("all generator pairs are parallel".into()))
        }
    }

    /// Largest `s` with `s·n` inside the zonotope, from its facet description.
    /// Only meaningful for full-dimensional zonotopes.
    pub fn radial_extent(&self, direction: &Vector3<f64>) -> f64 {
        let n = direction.normalize();
        self.facet_normals()
            .iter()
            .filter_map(|a| {
                let c = a.dot(&n).abs();
                (c > 1e-15).then(|| self.support(a) / c)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Images of all `2^k` extreme thrust vectors; a superset of the vertices.
    pub fn extreme_points(&self) -> Vec<(Vec<i8>, Vector3<f64>)> {
        let k = self.generators.len();
        (0..1usize << k)
            .map(|mask| {
                let signs: Vec<i8> = (0..k).map(|b| if mask >> b & 1 == 1 { 1 } else { -1 }).collect();
                let p = self
                    .generators
                    .iter()
                    .zip(&signs)
                    .fold(Vector3::zeros(), |acc, (g, &s)| acc + g * (f64::from(s) * self.half_width));
                (signs, p)
            })
            .collect()
    }
}

/// Control force set `U Λ`.
pub fn force_set(layout: &RotorLayout) -> Zonotope {
    Zonotope::new(layout.thrust_axes().to_vec(), layout.max_thrust())
}

/// Control torque set `T Λ`.
pub fn torque_set(layout: &RotorLayout) -> Zonotope {
    Zonotope::new(layout.torque_axes().to_vec(), layout.max_thrust())
}

/// Minimum guaranteed control force (N).
pub fn min_guaranteed_force(layout: &RotorLayout) -> Result<f64> {
    force_set(layout).inscribed_radius()
}

/// Minimum guaranteed control torque (N·m).
pub fn min_guaranteed_torque(layout: &RotorLayout) -> Result<f64> {
    torque_set(layout).inscribed_radius()
}

/// `n` points spread over the unit sphere on a Fibonacci lattice.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Inscribed radius by minimizing the support function over sampled directions.
///
/// Samples a Fibonacci sphere of `samples` points and, in addition, every
/// normalized pairwise generator cross product, which makes the minimum exact.
pub fn brute_force_inscribed_radius(
    generators: &[Vector3<f64>],
    half_width: f64,
    samples: usize,
) -> Result<f64> {
    let zonotope = Zonotope::new(generators.to_vec(), half_width);
    if zonotope.rank() < 3 {
        return Err(Error::DegenerateDesign(format!(
            "generator span is {}-dimensional",
            zonotope.rank()
        )));
    }
    let mut directions = fibonacci_sphere(samples);
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            let c = a.cross(b);
            let n = c.norm();
            if n > 0.0 {
                directions.push(c / n);
            }
        }
    }
    Ok(directions
        .iter()
        .map(|n| zonotope.support(n))
        .fold(f64::INFINITY, f64::min))
}

/// How the force-set size entering the design objective is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Hash, serde::Serialize, serde::Deserialize)]
pub enum ForceMeasure {
    /// Inscribed-sphere radius of the force zonotope (the minimum guaranteed force).
    #[default]
    #[serde(rename = "inscribed")]
    InscribedRadius,
    /// The pairwise sum without normalizing the facet normal, see
    /// [`Zonotope::unnormalized_pair_sum`]. Under this measure the balanced
    /// optimum moves from 45° to 47.67°. The torque measure is always the
    /// inscribed radius.
    #[serde(rename = "unnormalized")]
    UnnormalizedPairSum,
}

impl ForceMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            ForceMeasure::InscribedRadius => "inscribed",
            ForceMeasure::UnnormalizedPairSum => "unnormalized",
        }
    }

    pub fn evaluate(&self, layout: &RotorLayout) -> Result<f64> {
        match self {
            ForceMeasure::InscribedRadius => min_guaranteed_force(layout),
            ForceMeasure::UnnormalizedPairSum => force_set(layout).unnormalized_pair_sum(),
        }
    }
}

impl std::str::FromStr for ForceMeasure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "inscribed" => Ok(ForceMeasure::InscribedRadius),
            "unnormalized" => Ok(ForceMeasure::UnnormalizedPairSum),
            other => Err(format!("unknown force measure `{other}` (expected inscribed|unnormalized)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct WrenchSetMetrics {
    pub f_min: f64,
    pub t_min: f64,
}

impl WrenchSetMetrics {
    /// Both metrics, or [`Error::DegenerateDesign`] if either set has no valid facet pair.
    pub fn of(layout: &RotorLayout) -> Result<Self> {
        Self::measured(layout, ForceMeasure::InscribedRadius)
    }

    pub fn measured(layout: &RotorLayout, measure: ForceMeasure) -> Result<Self> {
        Ok(Self {
            f_min: measure.evaluate(layout)?,
            t_min: min_guaranteed_torque(layout)?,
        })
    }
}

/// Weighted design objective `ζ = c_F F_min + ((1 − c_F)/L) T_min`.
pub fn weighted_objective(metrics: &WrenchSetMetrics, c_f: f64, arm_length: f64) -> f64 {
    c_f * metrics.f_min + (1.0 - c_f) / arm_length * metrics.t_min
}

/// An evaluated tilt design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignPoint {
    pub alpha: f64,
    pub beta: f64,
    pub metrics: WrenchSetMetrics,
    pub objective: f64,
    /// False when the layout produced a degenerate wrench set (metrics and objective are zero).
    pub valid: bool,
}

impl DesignPoint {
    pub fn alpha_deg(&self) -> f64 {
        self.alpha.to_degrees()
    }

    pub fn beta_deg(&self) -> f64 {
        self.beta.to_degrees()
    }
}

/// Evaluates the design objective at `(α, β)` using `template` for `L`, `γ`, `λ_max` and spins.
///
/// Degenerate designs are reported with zero metrics and `ζ = 0`.
pub fn objective(alpha: f64, beta: f64, c_f: f64, template: &RotorLayout) -> Result<DesignPoint> {
    objective_with(alpha, beta, c_f, template, ForceMeasure::InscribedRadius)
}

/// [`objective`] with an explicit force measure.
pub fn objective_with(
    alpha: f64,
    beta: f64,
    c_f: f64,
    template: &RotorLayout,
    measure: ForceMeasure,
) -> Result<DesignPoint> {
    if !(0.0..=1.0).contains(&c_f) {
        return Err(Error::InvalidLayout(format!("weight c_F = {c_f} outside [0, 1]")));
    }
    let layout = template.with_tilt(alpha, beta)?;
    Ok(match WrenchSetMetrics::measured(&layout, measure) {
        Ok(metrics) => DesignPoint {
            alpha,
            beta,
            metrics,
            objective: weighted_objective(&metrics, c_f, template.arm_length()),
            valid: true,
        },
        Err(Error::DegenerateDesign(_)) => DesignPoint {
            alpha,
            beta,
            metrics: WrenchSetMetrics::default(),
            objective: 0.0,
            valid: false,
        },
        Err(e) => return Err(e),
    })
}

/// Extreme points of both control sets, with their inscribed radii.
#[derive(Clone, Debug, PartialEq)]
pub struct WrenchSetDump {
    pub layout: RotorLayout,
    pub metrics: WrenchSetMetrics,
    pub force_points: Vec<(Vec<i8>, Vector3<f64>)>,
    pub torque_points: Vec<(Vec<i8>, Vector3<f64>)>,
}

/// Enumerates the 2⁶ extreme thrust vectors through `U` and `T`. Rejects rank-deficient sets.
pub fn export_wrench_sets(layout: &RotorLayout) -> Result<WrenchSetDump> {
    let forces = force_set(layout);
    let torques = torque_set(layout);
    for (name, set) in [("force", &forces), ("torque", &torques)] {
        if set.rank() < 3 {
            return Err(Error::DegenerateDesign(format!(
                "{name} set spans only {} dimensions",
                set.rank()
            )));
        }
    }
    if !allocation_matrix(layout).is_full_rank() {
        return Err(Error::DegenerateDesign("allocation matrix is rank deficient".into()));
    }
    Ok(WrenchSetDump {
        layout: *layout,
        metrics: WrenchSetMetrics {
            f_min: forces.inscribed_radius()?,
            t_min: torques.inscribed_radius()?,
        },
        force_points: forces.extreme_points(),
        torque_points: torques.extreme_points(),
    })
}

/// Relative change of `value` with respect to `reference`, in percent.
pub fn percent_change(value: f64, reference: f64) -> f64 {
    100.0 * (value / reference - 1.0)
}

/// Pairwise comparison of the force-only, torque-only and balanced optima.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignComparison {
    pub force_only_vs_torque_only: (f64, f64),
    pub torque_only_vs_force_only: (f64, f64),
    pub balanced_vs_force_only: (f64, f64),
    pub balanced_vs_torque_only: (f64, f64),
}

impl DesignComparison {
    /// Each entry is `(F_min change %, T_min change %)`.
    pub fn new(force_only: &WrenchSetMetrics, torque_only: &WrenchSetMetrics, balanced: &WrenchSetMetrics) -> Self {
        let delta = |a: &WrenchSetMetrics, b: &WrenchSetMetrics| {
            (percent_change(a.f_min, b.f_min), percent_change(a.t_min, b.t_min))
        };
        Self {
            force_only_vs_torque_only: delta(force_only, torque_only),
            torque_only_vs_force_only: delta(torque_only, force_only),
            balanced_vs_force_only: delta(balanced, force_only),
            balanced_vs_torque_only: delta(balanced, torque_only),
        }
    }
}
