//! Box-constrained minimisers: a seeded particle swarm for the global phase
//! and Nelder-Mead for local polish.

use rand::Rng as _;

use crate::par::{self, Exec};

#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l < u), "empty box");
        Bounds { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = xi.clamp(self.lower[i], self.upper[i]);
        }
    }

    fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SwarmConfig {
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_evaluations: usize,
    /// Stop after this many iterations without relative improvement `tol`.
    pub patience: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        // Constriction-factor coefficients (Clerc & Kennedy).
        SwarmConfig {
            particles: 32,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            max_evaluations: 4_000,
            patience: 40,
            tol: 1e-10,
            seed: 0,
        }
    }
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Index of the smallest value; ties go to the lowest index so the result
/// does not depend on evaluation order.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Global-best particle swarm. Particle evaluations run through
/// [`par::map_indexed`]; every particle owns its RNG stream.
pub fn particle_swarm<F>(f: &F, bounds: &Bounds, cfg: &SwarmConfig, exec: Exec) -> OptimResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.dim();
    let np = cfg.particles.max(1);
    let mut rngs: Vec<par::Rng> = (0..np)
        .map(|i| par::child_rng(cfg.seed, par::stream::SWARM, i as u64))
        .collect();

    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(np);
    let mut vel: Vec<Vec<f64>> = Vec::with_capacity(np);
    for rng in rngs.iter_mut() {
        let x: Vec<f64> = (0..dim)
            .map(|d| bounds.lower[d] + rng.random::<f64>() * bounds.width(d))
            .collect();
        let v: Vec<f64> = (0..dim)
            .map(|d| (rng.random::<f64>() - 0.5) * 0.2 * bounds.width(d))
            .collect();
        pos.push(x);
        vel.push(v);
    }

    if cfg.max_evaluations < np {
        // Not enough budget for one sweep; score whoever fits.
        let vals: Vec<f64> = pos[..cfg.max_evaluations]
            .iter()
            .map(|x| finite_or_inf(f(x)))
            .collect();
        if vals.is_empty() {
            return OptimResult {
                x: pos.swap_remove(0),
                value: f64::INFINITY,
                evaluations: 0,
                converged: false,
            };
        }
        let b = argmin(&vals);
        return OptimResult {
            x: pos[b].clone(),
            value: vals[b],
            evaluations: vals.len(),
            converged: false,
        };
    }

    let eval_all = |pos: &[Vec<f64>]| -> Vec<f64> {
        par::map_indexed(pos.len(), exec, |i| finite_or_inf(f(&pos[i])))
    };

    let mut vals = eval_all(&pos);
    let mut evaluations = np;
    let mut best_pos = pos.clone();
    let mut best_val = vals.clone();
    let mut g = argmin(&best_val);
    let mut stale = 0usize;
    let mut converged = false;

    while evaluations + np <= cfg.max_evaluations {
        let gbest = best_pos[g].clone();
        for i in 0..np {
            let rng = &mut rngs[i];
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vmax = bounds.width(d);
                let v = cfg.inertia * vel[i][d]
                    + cfg.cognitive * r1 * (best_pos[i][d] - pos[i][d])
                    + cfg.social * r2 * (gbest[d] - pos[i][d]);
                vel[i][d] = v.clamp(-vmax, vmax);
                pos[i][d] += vel[i][d];
                if pos[i][d] < bounds.lower[d] || pos[i][d] > bounds.upper[d] {
                    pos[i][d] = pos[i][d].clamp(bounds.lower[d], bounds.upper[d]);
                    vel[i][d] *= -0.5;
                }
            }
        }
        vals = eval_all(&pos);
        evaluations += np;
        let previous = best_val[g];
        for i in 0..np {
            if vals[i] < best_val[i] {
                best_val[i] = vals[i];
                best_pos[i] = pos[i].clone();
            }
        }
        g = argmin(&best_val);
        if previous - best_val[g] > cfg.tol * (1.0 + previous.abs()) {
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                converged = true;
                break;
            }
        }
    }

    OptimResult {
        x: best_pos[g].clone(),
        value: best_val[g],
        evaluations,
        converged,
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadConfig {
    pub max_evaluations: usize,
    /// Relative spread of simplex values at convergence.
    pub ftol: f64,
    /// Simplex diameter at convergence.
    pub xtol: f64,
    /// Initial step per coordinate.
    pub step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            max_evaluations: 2_000,
            ftol: 1e-12,
            xtol: 1e-9,
            step: 0.05,
        }
    }
}

/// Nelder-Mead with points clamped to the box.
pub fn nelder_mead<F>(f: &F, start: &[f64], bounds: &Bounds, cfg: &NelderMeadConfig) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        finite_or_inf(f(x))
    };

    let mut x0 = start.to_vec();
    bounds.clamp(&mut x0);
    if cfg.max_evaluations < dim + 1 {
        let v = if cfg.max_evaluations > 0 { eval(&x0) } else { f64::INFINITY };
        return OptimResult {
            x: x0,
            value: v,
            evaluations: evaluations.get(),
            converged: false,
        };
    }

    let mut simplex: Vec<Vec<f64>> = vec![x0.clone()];
    for d in 0..dim {
        let mut x = x0.clone();
        let h = cfg.step * bounds.width(d).clamp(1e-3, 1.0);
        x[d] = if x[d] + h <= bounds.upper[d] { x[d] + h } else { x[d] - h };
        simplex.push(x);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let mut converged = false;

    loop {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fvals = order.iter().map(|&i| fvals[i]).collect();

        let fspread = (fvals[dim] - fvals[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if fspread <= cfg.ftol * (1.0 + fvals[0].abs()) && diameter <= cfg.xtol {
            converged = true;
            break;
        }
        if evaluations.get() + dim + 2 > cfg.max_evaluations {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|x| x[d]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + t * (simplex[dim][d] - centroid[d]))
                .collect();
            bounds.clamp(&mut x);
            x
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < fvals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[dim] = xe;
                fvals[dim] = fe;
            } else {
                simplex[dim] = xr;
                fvals[dim] = fr;
            }
        } else if fr < fvals[dim - 1] {
            simplex[dim] = xr;
            fvals[dim] = fr;
        } else {
            let (xc, fc) = if fr < fvals[dim] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fvals[dim].min(fr) {
                simplex[dim] = xc;
                fvals[dim] = fc;
            } else {
                for i in 1..=dim {
                    let x: Vec<f64> = (0..dim)
                        .map(|d| simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]))
                        .collect();
                    fvals[i] = eval(&x);
                    simplex[i] = x;
                }
            }
        }
    }

    let b = argmin(&fvals);
    OptimResult {
        x: simplex[b].clone(),
        value: fvals[b],
        evaluations: evaluations.get(),
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let b = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]);
        let cfg = NelderMeadConfig {
            max_evaluations: 10_000,
            ..Default::default()
        };
        let r = nelder_mead(&rosenbrock, &[-1.2, 1.0], &b, &cfg);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn swarm_locates_global_basin() {
        // Rastrigin has many local minima; the global one is at the origin.
        let f = |x: &[f64]| {
            20.0 + x
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>()
        };
        let b = Bounds::new(vec![-5.12; 2], vec![5.12; 2]);
        let cfg = SwarmConfig {
            max_evaluations: 20_000,
            seed: 5,
            ..Default::default()
        };
        let r = particle_swarm(&f, &b, &cfg, Exec::Auto);
        assert!(r.value < 1e-3, "{r:?}");
    }

    #[test]
    fn swarm_is_schedule_independent() {
        let b = Bounds::new(vec![-3.0; 3], vec![3.0; 3]);
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
        let cfg = SwarmConfig {
            seed: 9,
            ..Default::default()
        };
        let a = particle_swarm(&f, &b, &cfg, Exec::Auto);
        let s = particle_swarm(&f, &b, &cfg, Exec::Sequential);
        assert_eq!(a.x, s.x);
        assert_eq!(a.evaluations, s.evaluations);
    }

    #[test]
    fn tiny_budgets_do_not_converge() {
        let b = Bounds::new(vec![-1.0], vec![1.0]);
        let f = |x: &[f64]| x[0] * x[0];
        let cfg = SwarmConfig {
            max_evaluations: 1,
            ..Default::default()
        };
        let r = particle_swarm(&f, &b, &cfg, Exec::Sequential);
        assert!(!r.converged);
        assert_eq!(r.evaluations, 1);
        let nm = nelder_mead(
            &f,
            &[0.3],
            &b,
            &NelderMeadConfig {
                max_evaluations: 1,
                ..Default::default()
            },
        );
        assert!(!nm.converged);
    }
}
