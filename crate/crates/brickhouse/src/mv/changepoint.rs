//! Change-point regression of daily energy on daily mean temperature.
//!
//! The model decomposes consumption into a baseload and temperature-
//! dependent components:
//!
//! ```text
//! E_d = b0 + bh · max(0, th − T_d) + bc · max(0, T_d − tc)
//! ```
//!
//! Change points are chosen by grid search over the observed temperature
//! range at 0.5 °C steps (aligned to absolute half-degree marks); for fixed
//! change points the coefficients are the least-squares optimum with slopes
//! constrained non-negative (exact, by active-set enumeration). Candidate
//! variants are compared by adjusted coefficient of determination, ties
//! going to the simpler model.

use serde::{Deserialize, Serialize};

use super::MvError;

/// Minimum usable day pairs required to fit.
pub const MIN_FIT_DAYS: usize = 30;

const GRID_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    BaseloadOnly,
    Heating,
    Cooling,
    HeatingCooling,
}

#[derive(Debug, Clone, Copy)]
pub struct DayRecord {
    pub day_start: i64,
    pub temperature: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChangePointModel {
    pub variant: ModelVariant,
    /// kWh/day consumed independent of temperature.
    pub baseload: f64,
    /// kWh/day per °C below the heating change point (≥ 0).
    pub heating_slope: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub heating_change_point: Option<f64>,
    /// kWh/day per °C above the cooling change point (≥ 0).
    pub cooling_slope: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cooling_change_point: Option<f64>,
    /// Fitted day count.
    pub n: usize,
    /// Residual standard error, sqrt(SSE / (n − k)).
    pub rmse: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Fitted parameter count k, change points included.
    pub parameter_count: usize,
}

impl ChangePointModel {
    pub fn predict(&self, temperature: f64) -> f64 {
        let mut e = self.baseload;
        if let Some(th) = self.heating_change_point {
            e += self.heating_slope * (th - temperature).max(0.0);
        }
        if let Some(tc) = self.cooling_change_point {
            e += self.cooling_slope * (temperature - tc).max(0.0);
        }
        e
    }
}

/// Gaussian elimination with partial pivoting for the tiny normal-equation
/// systems (≤ 3 unknowns). Returns `None` when singular.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

struct LsFit {
    beta: Vec<f64>,
    sse: f64,
    /// Diagonal of (XᵀX)⁻¹, for coefficient standard errors.
    inv_diag: Vec<f64>,
}

/// Least squares for `energy ~ intercept + regressors`, dense normal
/// equations. Coefficients are intercept first.
#[allow(clippy::needless_range_loop)]
fn least_squares(regressors: &[Vec<f64>], energy: &[f64]) -> Option<LsFit> {
    let n = energy.len();
    let p = regressors.len() + 1;
    let col = |j: usize, i: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            regressors[j - 1][i]
        }
    };
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            let xj = col(j, i);
            xty[j] += xj * energy[i];
            for k in j..p {
                xtx[j][k] += xj * col(k, i);
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            xtx[j][k] = xtx[k][j];
        }
    }
    let beta = solve(xtx.clone(), xty)?;
    let mut inv_diag = Vec::with_capacity(p);
    for j in 0..p {
        let mut unit = vec![0.0; p];
        unit[j] = 1.0;
        inv_diag.push(solve(xtx.clone(), unit)?[j]);
    }
    let mut sse = 0.0;
    for i in 0..n {
        let mut pred = beta[0];
        for (j, reg) in regressors.iter().enumerate() {
            pred += beta[j + 1] * reg[i];
        }
        sse += (energy[i] - pred).powi(2);
    }
    Some(LsFit { beta, sse, inv_diag })
}

struct ConstrainedFit {
    beta: Vec<f64>,
    sse: f64,
    /// Weakest t-statistic among the retained slopes (infinite when the
    /// residual is exactly zero or no slope is retained).
    min_slope_t: f64,
}

/// Non-negative slopes via active-set enumeration: fit every subset of the
/// slope columns unconstrained, keep feasible fits, take minimum SSE. Exact
/// for the ≤ 2 constrained coefficients used here.
fn constrained_fit(regressors: &[Vec<f64>], energy: &[f64]) -> Option<ConstrainedFit> {
    let n = energy.len();
    let m = regressors.len();
    let mut best: Option<ConstrainedFit> = None;
    for mask in 0..(1u32 << m) {
        let included: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        let cols: Vec<Vec<f64>> = included.iter().map(|&j| regressors[j].clone()).collect();
        let Some(fit) = least_squares(&cols, energy) else {
            continue;
        };
        if fit.beta[1..].iter().any(|&b| b < 0.0) {
            continue;
        }
        let dof = n.saturating_sub(included.len() + 1);
        let sigma2 = if dof > 0 { fit.sse / dof as f64 } else { 0.0 };
        let mut min_slope_t = f64::INFINITY;
        for (idx, _) in included.iter().enumerate() {
            let se = (sigma2 * fit.inv_diag[idx + 1]).sqrt();
            let t = if se > 0.0 {
                fit.beta[idx + 1] / se
            } else {
                f64::INFINITY
            };
            min_slope_t = min_slope_t.min(t);
        }
        let mut full = vec![0.0; m + 1];
        full[0] = fit.beta[0];
        for (idx, &j) in included.iter().enumerate() {
            full[j + 1] = fit.beta[idx + 1];
        }
        if best.as_ref().is_none_or(|b| fit.sse < b.sse) {
            best = Some(ConstrainedFit {
                beta: full,
                sse: fit.sse,
                min_slope_t,
            });
        }
    }
    best
}

fn grid(min_t: f64, max_t: f64) -> Vec<f64> {
    let lo = (min_t / GRID_STEP).ceil() as i64;
    let hi = (max_t / GRID_STEP).floor() as i64;
    (lo..=hi).map(|k| k as f64 * GRID_STEP).collect()
}

struct Candidate {
    variant: ModelVariant,
    beta: Vec<f64>, // intercept, then slopes in variant order
    th: Option<f64>,
    tc: Option<f64>,
    sse: f64,
    k: usize,
}

/// Fits the change-point model over usable day pairs.
pub fn fit_baseline(days: &[DayRecord]) -> Result<ChangePointModel, MvError> {
    let n = days.len();
    if n < MIN_FIT_DAYS {
        return Err(MvError::InsufficientDays {
            got: n,
            need: MIN_FIT_DAYS,
        });
    }
    let temps: Vec<f64> = days.iter().map(|d| d.temperature).collect();
    let energy: Vec<f64> = days.iter().map(|d| d.energy_kwh).collect();
    let mean = energy.iter().sum::<f64>() / n as f64;
    let sst: f64 = energy.iter().map(|e| (e - mean).powi(2)).sum();

    let mut candidates = vec![Candidate {
        variant: ModelVariant::BaseloadOnly,
        beta: vec![mean],
        th: None,
        tc: None,
        sse: sst,
        k: 1,
    }];

    let mut distinct = temps.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let heating_col = |th: f64| -> Vec<f64> { temps.iter().map(|&t| (th - t).max(0.0)).collect() };
    let cooling_col = |tc: f64| -> Vec<f64> { temps.iter().map(|&t| (t - tc).max(0.0)).collect() };
    // A hinge needs support on its active side, or the slope just soaks
    // noise from a handful of days. Retained slopes must also clear a
    // t-statistic floor, which keeps low-support noise hinges from entering
    // the variant comparison at all.
    let min_active = (n / 10).max(6).min(n - 1);
    let active = |col: &[f64]| col.iter().filter(|&&v| v > 0.0).count() >= min_active;
    const SLOPE_T_FLOOR: f64 = 2.5;

    let make_candidate = |variant: ModelVariant, th: Option<f64>, tc: Option<f64>| -> Option<Candidate> {
        let mut cols = Vec::new();
        if let Some(th) = th {
            let col = heating_col(th);
            if !active(&col) {
                return None;
            }
            cols.push(col);
        }
        if let Some(tc) = tc {
            let col = cooling_col(tc);
            if !active(&col) {
                return None;
            }
            cols.push(col);
        }
        let fit = constrained_fit(&cols, &energy)?;
        if fit.min_slope_t < SLOPE_T_FLOOR {
            return None;
        }
        // A dropped slope duplicates a simpler variant.
        if fit.beta[1..].contains(&0.0) {
            return None;
        }
        let k = 1 + 2 * cols.len();
        Some(Candidate {
            variant,
            beta: fit.beta,
            th,
            tc,
            sse: fit.sse,
            k,
        })
    };

    // Degenerate temperature range: baseload-only is the only sound model.
    if distinct.len() >= 2 {
        let min_t = *distinct.first().unwrap();
        let max_t = *distinct.last().unwrap();
        let taus = grid(min_t, max_t);
        for &th in &taus {
            candidates.extend(make_candidate(ModelVariant::Heating, Some(th), None));
        }
        for &tc in &taus {
            candidates.extend(make_candidate(ModelVariant::Cooling, None, Some(tc)));
        }
        for (hi, &th) in taus.iter().enumerate() {
            for &tc in &taus[hi..] {
                candidates.extend(make_candidate(
                    ModelVariant::HeatingCooling,
                    Some(th),
                    Some(tc),
                ));
            }
        }
    }

    // Adjusted R², ties to the simpler variant.
    let adj = |sse: f64, k: usize| -> f64 {
        if n <= k {
            return f64::NEG_INFINITY;
        }
        let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - k as f64)
    };
    let select = |candidates: Vec<Candidate>| -> Candidate {
        candidates
            .into_iter()
            .map(|c| {
                let score = adj(c.sse, c.k);
                (c, score)
            })
            .max_by(|(a, sa), (b, sb)| {
                sa.partial_cmp(sb)
                    .unwrap()
                    .then(b.k.cmp(&a.k)) // fewer parameters wins exact ties
                    .then(
                        // deterministic final tie-break on change points
                        (b.th.unwrap_or(0.0), b.tc.unwrap_or(0.0))
                            .partial_cmp(&(a.th.unwrap_or(0.0), a.tc.unwrap_or(0.0)))
                            .unwrap(),
                    )
            })
            .map(|(c, _)| c)
            .expect("baseload candidate always present")
    };
    let coarse = select(candidates);

    // Local refinement: the 0.5 °C grid quantizes the change point, which
    // biases the attached slope on neighbor picks. Re-fit the winning
    // variant on a 0.1 °C lattice within ±0.5 °C of the coarse optimum.
    let refine_axis = |tau: Option<f64>| -> Vec<Option<f64>> {
        match tau {
            None => vec![None],
            Some(t) => {
                let base = (t * 10.0).round() as i64;
                (-5..=5).map(|j| Some((base + j) as f64 / 10.0)).collect()
            }
        }
    };
    let mut refined = vec![coarse];
    let (variant, th0, tc0) = {
        let c = &refined[0];
        (c.variant, c.th, c.tc)
    };
    if variant != ModelVariant::BaseloadOnly {
        for th in refine_axis(th0) {
            for tc in refine_axis(tc0) {
                if let (Some(h), Some(c)) = (th, tc) {
                    if h > c {
                        continue;
                    }
                }
                refined.extend(make_candidate(variant, th, tc));
            }
        }
    }
    let best = select(refined);

    let k = best.k;
    let r_squared = if sst > 0.0 { 1.0 - best.sse / sst } else { 1.0 };
    let adj_r_squared = adj(best.sse, k);
    let rmse = if n > k {
        (best.sse / (n - k) as f64).sqrt()
    } else {
        0.0
    };
    let (heating_slope, cooling_slope) = match best.variant {
        ModelVariant::BaseloadOnly => (0.0, 0.0),
        ModelVariant::Heating => (best.beta[1], 0.0),
        ModelVariant::Cooling => (0.0, best.beta[1]),
        ModelVariant::HeatingCooling => (best.beta[1], best.beta[2]),
    };
    Ok(ChangePointModel {
        variant: best.variant,
        baseload: best.beta[0],
        heating_slope,
        heating_change_point: best.th,
        cooling_slope,
        cooling_change_point: best.tc,
        n,
        rmse,
        r_squared,
        adj_r_squared,
        parameter_count: k,
    })
}
