use std::f64::consts::PI;

use clap::ValueEnum;
use flagvol::flag::random_flag;
use flagvol::flag_measure::{omega_integrate, Body};
use flagvol::kernel::{self, alpha_table, c_constants, d_matrix, CSource};
use flagvol::mc::McConfig;
use flagvol::mixed_volume::{divergence_scan, region_integral_target, square4d_region_integral};
use flagvol::oracle::phi22_closed_form;
use flagvol::polytope::{make_cube, make_square4d};
use flagvol::Result;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::report::Row;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Item {
    Moments,
    DMatrix,
    Kronecker,
    Alpha,
    Phi22,
    Mass,
    Region,
    Divergence,
}

impl Item {
    pub fn name(self) -> &'static str {
        match self {
            Item::Moments => "moments",
            Item::DMatrix => "d-matrix",
            Item::Kronecker => "kronecker",
            Item::Alpha => "alpha",
            Item::Phi22 => "phi22",
            Item::Mass => "mass",
            Item::Region => "region",
            Item::Divergence => "divergence",
        }
    }
}

/// Per-item samples unless `--samples` overrides them. The D-matrix and alpha
/// items always use `DEFAULT_SAMPLES`, since their tolerances assume it.
const DEFAULT_SAMPLES: u64 = 1_000_000;
const MASS_SAMPLES: u64 = 100_000;

pub struct Budget {
    pub samples: Option<u64>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Budget {
    fn config(&self, default: u64, offset: u64) -> McConfig {
        self.fixed(self.samples.unwrap_or(default), offset)
    }

    /// For checks whose absolute tolerance is tied to a sample size.
    fn fixed(&self, samples: u64, offset: u64) -> McConfig {
        let cfg = McConfig::new(samples, self.seed.wrapping_add(offset));
        match self.threads {
            Some(t) => cfg.with_threads(t),
            None => cfg,
        }
    }
}

fn check(name: &str, value: f64, std_error: f64, target: f64, tol: f64) -> Row {
    let pass = (value - target).abs() <= tol;
    let row = Row::value(name, value).target(target, pass);
    if std_error > 0.0 {
        row.err(std_error)
    } else {
        row
    }
}

fn z_check(name: &str, value: f64, std_error: f64, target: f64) -> Row {
    // rounding floor for estimators without variance
    let tol = (3.0 * std_error).max(1e-12 * target.abs());
    check(name, value, std_error, target, tol)
}

fn d31() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 2.0, 4.0]) / 15.0
}

fn alpha22() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[16.0, -4.0, -4.0, 1.0]) * (PI * PI)
}

pub fn run(item: Item, budget: &Budget) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    match item {
        Item::Moments => {
            let c = c_constants(3, 1, &CSource::MonteCarlo(budget.config(DEFAULT_SAMPLES, 1)))?;
            rows.push(z_check("c3_10", c.values[0], c.std_errors[0], 0.2));
            rows.push(z_check("c3_11", c.values[1], c.std_errors[1], 1.0 / 15.0));
        }
        Item::DMatrix => {
            let c = c_constants(3, 1, &CSource::MonteCarlo(budget.fixed(DEFAULT_SAMPLES, 2)))?;
            let err_mc = (d_matrix(3, 1, &c.values)? - d31()).amax();
            let err_exact = (d_matrix(3, 1, &[0.2, 1.0 / 15.0])? - d31()).amax();
            rows.push(check("D31 max error, MC c", err_mc, 0.0, 0.0, 2e-3));
            rows.push(check("D31 max error, exact c", err_exact, 0.0, 0.0, 1e-12));
        }
        Item::Kronecker => {
            let t = alpha_table(4, 2, &CSource::Exact)?;
            let expect = d31().kronecker(&d31());
            rows.push(check("D31 x D31 max error", (t.kronecker() - expect).amax(), 0.0, 0.0, 1e-12));
        }
        Item::Alpha => {
            let exact = alpha_table(4, 2, &CSource::Exact)?;
            rows.push(check("alpha max error, exact c", (exact.alpha_matrix() - alpha22()).amax(), 0.0, 0.0, 1e-10));
            let mc = alpha_table(4, 2, &CSource::MonteCarlo(budget.fixed(DEFAULT_SAMPLES, 4)))?;
            let rel = mc
                .alpha_matrix()
                .iter()
                .zip(alpha22().iter())
                .map(|(a, b)| ((a - b) / b).abs())
                .fold(0.0, f64::max);
            rows.push(check("alpha max relative error, MC c", rel, 0.0, 0.0, 1e-2));
        }
        Item::Phi22 => {
            let table = alpha_table(4, 2, &CSource::Exact)?;
            let mut rng = budget.config(1, 5).stream(0);
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let fu = random_flag(4, 1, &mut rng);
                let fv = random_flag(4, 1, &mut rng);
                worst = worst.max((kernel::phi(&fu, &fv, &table)? - phi22_closed_form(&fu, &fv)).abs());
            }
            rows.push(check("phi22 max deviation from closed form", worst, 0.0, 0.0, 1e-8));
        }
        Item::Mass => {
            let cfg = budget.config(MASS_SAMPLES, 6);
            let square = Body::Polytope(make_square4d()?);
            let cube = Body::Polytope(make_cube(3)?);
            for (name, body, k, target) in [
                ("mass square4d k=2", &square, 2, 1.0),
                ("mass cube3 k=1", &cube, 1, 3.0),
                ("mass cube3 k=2", &cube, 2, 3.0),
            ] {
                let est = omega_integrate(body, k, |_| 1.0, &cfg)?.estimate;
                rows.push(z_check(name, est.mean, est.std_error, target));
            }
        }
        Item::Region => {
            let est = square4d_region_integral(&budget.config(DEFAULT_SAMPLES, 7))?;
            rows.push(z_check("region integral", est.mean, est.std_error, region_integral_target()));
        }
        Item::Divergence => {
            let table = alpha_table(4, 2, &CSource::Exact)?;
            let eps = [1e-1, 1e-2, 1e-3, 1e-4];
            let scan = divergence_scan(&eps, &table, &budget.config(DEFAULT_SAMPLES, 8))?;
            for (e, n) in eps.iter().zip(&scan.negative) {
                rows.push(Row::value(format!("N(eps={e:e})"), n.mean).err(n.std_error));
            }
            for (i, inc) in scan.increments.iter().enumerate() {
                let pass = inc.mean > 3.0 * inc.std_error;
                rows.push(
                    Row::value(format!("increment {}", i + 1), inc.mean)
                        .err(inc.std_error)
                        .target(0.0, pass),
                );
            }
            for (i, r) in scan.ratios.iter().enumerate() {
                let pass = (0.5..=2.0).contains(r);
                rows.push(Row::value(format!("increment ratio {}", i + 1), *r).target(1.0, pass));
            }
        }
    }
    Ok(rows)
}
