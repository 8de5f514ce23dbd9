//! Fit a change-point baseline to a year of synthetic daily energy and
//! temperature, then estimate savings over an analysis period with a
//! confidence interval. The synthetic process has a known answer, so the
//! printout shows how closely the fit recovers it.
//!
//! Run with: `cargo run --example mv_baseline`

use brickhouse::mv::{estimate_savings, fit_baseline, DayRecord};

/// True process: 100 kWh/day baseload plus 5 kWh/day per degree above 18.
fn truth(t: f64) -> f64 {
    100.0 + 5.0 * (t - 18.0).max(0.0)
}

/// Small deterministic PRNG so the example is reproducible.
struct Lcg(u64);
impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn gaussian(&mut self, sigma: f64) -> f64 {
        let u1 = self.next_f64().max(1e-12);
        let u2 = self.next_f64();
        sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = Lcg(7);
    let day = 86_400i64;

    let baseline: Vec<DayRecord> = (0..365)
        .map(|i| {
            let t = 8.0 + 22.0 * rng.next_f64();
            DayRecord {
                day_start: i * day,
                temperature: t,
                energy_kwh: truth(t) + rng.gaussian(5.0),
            }
        })
        .collect();

    let model = fit_baseline(&baseline)?;
    println!("fitted variant: {:?}", model.variant);
    println!("  baseload   {:8.3} kWh/day   (true 100)", model.baseload);
    println!("  slope      {:8.3} kWh/day°C (true 5)", model.cooling_slope);
    println!(
        "  change pt  {:8.3} °C         (true 18)",
        model.cooling_change_point.unwrap_or(f64::NAN)
    );
    println!("  R² {:.4}, residual standard error {:.3}", model.r_squared, model.rmse);

    // Analysis period: the same process minus a 12 kWh/day intervention.
    let analysis: Vec<DayRecord> = (365..455)
        .map(|i| {
            let t = 8.0 + 22.0 * rng.next_f64();
            DayRecord {
                day_start: i * day,
                temperature: t,
                energy_kwh: truth(t) - 12.0 + rng.gaussian(5.0),
            }
        })
        .collect();

    let result = estimate_savings(&model, &analysis, 90, 0, 1.0, 0, 1.0, 0.0, 0.95)?;
    println!(
        "\nsavings over {} days: {:.1} kWh (true 1080)",
        result.analysis_days_used, result.savings_kwh
    );
    println!(
        "95% interval: [{:.1}, {:.1}] kWh",
        result.ci_low, result.ci_high
    );
    Ok(())
}
