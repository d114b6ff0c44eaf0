//! Tilt-angle design by exhaustive grid search plus Nelder–Mead refinement.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::analysis::{objective_with, DesignPoint, ForceMeasure};
use crate::error::{Error, Result};
use crate::tolerances;
use crate::vehicle::RotorLayout;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerSettings {
    /// Grid spacing in radians.
    pub grid_step: f64,
    pub refine: bool,
    pub force_measure: ForceMeasure,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_step: 0.25f64.to_radians(),
            refine: true,
            force_measure: ForceMeasure::InscribedRadius,
        }
    }
}

/// Objective values on the `(α, β)` box, stored β-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub points: Vec<DesignPoint>,
}

impl ObjectiveGrid {
    pub fn get(&self, alpha_index: usize, beta_index: usize) -> &DesignPoint {
        &self.points[beta_index * self.alphas.len() + alpha_index]
    }

    /// Best cell, ties broken by lowest β then lowest α.
    pub fn best(&self) -> &DesignPoint {
        // β-major order means the first strict maximum is the tie-break winner
        let mut best = &self.points[0];
        for p in &self.points[1..] {
            if p.objective > best.objective {
                best = p;
            }
        }
        best
    }

    /// Best cell on the `β = 0` row with the same tie-break.
    pub fn best_untilted_beta(&self) -> &DesignPoint {
        let row = &self.points[..self.alphas.len()];
        let mut best = &row[0];
        for p in &row[1..] {
            if p.objective > best.objective {
                best = p;
            }
        }
        best
    }
}

fn axis(step: f64) -> Vec<f64> {
    let n = (FRAC_PI_2 / step).round() as usize;
    (0..=n).map(|k| (k as f64 * step).min(FRAC_PI_2)).collect()
}

/// Evaluates the objective on a uniform grid over `[0, π/2]²`.
pub fn evaluate_grid(c_f: f64, template: &RotorLayout, step: f64, measure: ForceMeasure) -> Result<ObjectiveGrid> {
    if !(step > 0.0 && step <= FRAC_PI_2) {
        return Err(Error::InvalidLayout(format!("grid step {step} rad must be in (0, π/2]")));
    }
    let alphas = axis(step);
    let betas = axis(step);
    let cells: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| alphas.iter().map(move |&a| (a, b)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(a, b)| objective_with(a, b, c_f, template, measure))
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectiveGrid { alphas, betas, points })
}

/// Result of [`optimize_tilt`].
#[derive(Clone, Debug, PartialEq)]
pub struct TiltOptimum {
    pub design: DesignPoint,
    /// The maximizer is not unique; `design` is the `β = 0` member with the smallest `α`.
    pub plateau: bool,
    pub grid: ObjectiveGrid,
}

/// Maximizes the weighted objective over the box `0 ≤ α, β ≤ π/2`.
pub fn optimize_tilt(c_f: f64, template: &RotorLayout, settings: &OptimizerSettings) -> Result<TiltOptimum> {
    let grid = evaluate_grid(c_f, template, settings.grid_step, settings.force_measure)?;
    let plateau = is_plateau(&grid, c_f, template, settings);
    let start = if plateau { *grid.best_untilted_beta() } else { *grid.best() };
    let design = if !settings.refine {
        start
    } else if plateau {
        refine_on_beta_zero(&start, c_f, template, settings)?
    } else {
        refine(&start, c_f, template, settings)?
    };
    Ok(TiltOptimum { design, plateau, grid })
}

/// Whether the maximizer set extends over more than a small neighbourhood.
///
/// Each grid row and column is refined to its 1-D maximum; the optimum is a
/// plateau when the rows (or columns) reaching the overall maximum span more than
/// [`tolerances::PLATEAU_ANGULAR_SPREAD`].
pub fn is_plateau(grid: &ObjectiveGrid, c_f: f64, template: &RotorLayout, settings: &OptimizerSettings) -> bool {
    let measure = settings.force_measure;
    let eval = |a: f64, b: f64| {
        objective_with(clamp_box(a), clamp_box(b), c_f, template, measure)
            .map(|p| p.objective)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let na = grid.alphas.len();
    let row_max: Vec<f64> = (0..grid.betas.len())
        .into_par_iter()
        .map(|j| {
            let b = grid.betas[j];
            let seed = (0..na).map(|i| grid.get(i, j)).max_by(|p, q| p.objective.total_cmp(&q.objective)).unwrap();
            let x = nelder_mead_max(&[seed.alpha], settings.grid_step, |x| eval(x[0], b), 1e-14, 500);
            eval(x[0], b).max(seed.objective)
        })
        .collect();
    let col_max: Vec<f64> = (0..na)
        .into_par_iter()
        .map(|i| {
            let a = grid.alphas[i];
            let seed = (0..grid.betas.len())
                .map(|j| grid.get(i, j))
                .max_by(|p, q| p.objective.total_cmp(&q.objective))
                .unwrap();
            let x = nelder_mead_max(&[seed.beta], settings.grid_step, |x| eval(a, x[0]), 1e-14, 500);
            eval(a, x[0]).max(seed.objective)
        })
        .collect();
    let best = row_max.iter().chain(&col_max).cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - tolerances::PLATEAU_VALUE_MARGIN * best.abs().max(1e-12);
    let spread = |values: &[f64], coords: &[f64]| {
        let hits: Vec<f64> = values.iter().zip(coords).filter(|(v, _)| **v >= threshold).map(|(_, c)| *c).collect();
        hits.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - hits.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    spread(&row_max, &grid.betas) > tolerances::PLATEAU_ANGULAR_SPREAD
        || spread(&col_max, &grid.alphas) > tolerances::PLATEAU_ANGULAR_SPREAD
}

fn clamp_box(x: f64) -> f64 {
    x.clamp(0.0, FRAC_PI_2)
}

fn refine(start: &DesignPoint, c_f: f64, template: &RotorLayout, settings: &OptimizerSettings) -> Result<DesignPoint> {
    let measure = settings.force_measure;
    let eval = |x: &[f64]| -> f64 {
        objective_with(clamp_box(x[0]), clamp_box(x[1]), c_f, template, measure)
            .map(|p| p.objective)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let x = nelder_mead_max(&[start.alpha, start.beta], settings.grid_step, eval, 1e-12, 2000);
    let refined = objective_with(clamp_box(x[0]), clamp_box(x[1]), c_f, template, measure)?;
    Ok(if refined.objective >= start.objective { refined } else { *start })
}

fn refine_on_beta_zero(
    start: &DesignPoint,
    c_f: f64,
    template: &RotorLayout,
    settings: &OptimizerSettings,
) -> Result<DesignPoint> {
    let measure = settings.force_measure;
    let eval = |x: &[f64]| -> f64 {
        objective_with(clamp_box(x[0]), 0.0, c_f, template, measure)
            .map(|p| p.objective)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let x = nelder_mead_max(&[start.alpha], settings.grid_step, eval, 1e-12, 2000);
    let refined = objective_with(clamp_box(x[0]), 0.0, c_f, template, measure)?;
    Ok(if refined.objective >= start.objective { refined } else { *start })
}

/// Nelder–Mead maximization with an axis-aligned initial simplex of edge `scale`.
///
/// Stops when the spread of simplex values falls below `tol` or after `max_iter` iterations.
pub fn nelder_mead_max<F>(start: &[f64], scale: f64, f: F, tol: f64, max_iter: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = start.len();
    // minimize −f
    let g = |x: &[f64]| -f(x);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), g(start)));
    for k in 0..n {
        let mut x = start.to_vec();
        x[k] += scale;
        let v = g(&x);
        simplex.push((x, v));
    }

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() < tol && size < 1e-10 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();

        let reflected = combine(&centroid, &worst.0, -REFLECT);
        let fr = g(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -EXPAND);
            let fe = g(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = combine(&centroid, &reflected, CONTRACT);
            let v = g(&c);
            (c, v)
        } else {
            let c = combine(&centroid, &worst.0, CONTRACT);
            let v = g(&c);
            (c, v)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = combine(&best, &entry.0, SHRINK);
            let v = g(&x);
            *entry = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0).0
}

/// Optimum for each weight in `weights`, in input order.
pub fn sweep_weight(weights: &[f64], template: &RotorLayout, settings: &OptimizerSettings) -> Result<Vec<(f64, TiltOptimum)>> {
    weights
        .iter()
        .map(|&c| optimize_tilt(c, template, settings).map(|o| (c, o)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleSweepRow {
    pub drag_ratio: f64,
    pub arm_length: f64,
    pub design: DesignPoint,
}

/// Optimal tilt for each `(γ, L)` combination, γ-major.
pub fn sweep_scale(
    arm_lengths: &[f64],
    drag_ratios: &[f64],
    c_f: f64,
    template: &RotorLayout,
    settings: &OptimizerSettings,
) -> Result<Vec<ScaleSweepRow>> {
    let mut rows = Vec::with_capacity(arm_lengths.len() * drag_ratios.len());
    for &gamma in drag_ratios {
        for &length in arm_lengths {
            let layout = template.with_arm_length(length)?.with_drag_ratio(gamma)?;
            let optimum = optimize_tilt(c_f, &layout, settings)?;
            rows.push(ScaleSweepRow {
                drag_ratio: gamma,
                arm_length: length,
                design: optimum.design,
            });
        }
    }
    Ok(rows)
}
