use homodyne_core::gaussian_core::CapacityRecord;
use serde_json::json;

use crate::args::{Format, SweepArgs};
use crate::config::{layer, require, Context};
use crate::output::{emit, fmt_g};
use crate::{CliError, Outcome};

pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_ENERGY_MIN: f64 = 0.5;
pub const DEFAULT_ENERGY_MAX: f64 = 8.0;
pub const DEFAULT_STEPS: usize = 76;

pub fn run(args: SweepArgs) -> Result<Outcome, CliError> {
    let args = layer(args)?;
    let ctx = Context::resolve(&args.common, Format::Csv)?;
    let beta = args.beta.unwrap_or(DEFAULT_BETA);
    let e_min = args.energy_min.unwrap_or(DEFAULT_ENERGY_MIN);
    let e_max = args.energy_max.unwrap_or(DEFAULT_ENERGY_MAX);
    let steps = args.steps.unwrap_or(DEFAULT_STEPS);
    require(steps >= 2, format!("--steps must be at least 2 (got {steps})"))?;
    require(
        e_min.is_finite() && e_max.is_finite() && e_max > e_min,
        format!("--energy-max ({e_max}) must exceed --energy-min ({e_min})"),
    )?;
    let records = energies(e_min, e_max, steps)
        .map(|e| CapacityRecord::compute(e, beta))
        .collect::<Result<Vec<_>, _>>()?;

    let u = ctx.unit.suffix();
    let text = match ctx.format {
        Format::Csv => {
            let mut out = format!("E,capacity_{u},upper_bound_{u},alpha_p,alpha_q,delta,gamma\n");
            for r in &records {
                let row = [
                    r.energy,
                    ctx.unit.convert(r.capacity),
                    ctx.unit.convert(r.upper_bound),
                    r.alpha_p,
                    r.alpha_q,
                    r.delta,
                    r.gamma,
                ];
                out += &row.map(fmt_g).join(",");
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = records
                .iter()
                .map(|r| {
                    json!({
                        "E": r.energy,
                        "capacity": ctx.unit.convert(r.capacity),
                        "upper_bound": ctx.unit.convert(r.upper_bound),
                        "alpha_p": r.alpha_p,
                        "alpha_q": r.alpha_q,
                        "delta": r.delta,
                        "gamma": r.gamma,
                    })
                })
                .collect();
            let v = json!({ "beta": beta, "unit": u, "rows": rows });
            serde_json::to_string_pretty(&v).expect("serializes") + "\n"
        }
    };
    emit(&text, ctx.out.as_deref())?;
    Ok(Outcome::Pass)
}

/// `steps` equally spaced energies from `e_min` to `e_max` inclusive.
pub fn energies(e_min: f64, e_max: f64, steps: usize) -> impl Iterator<Item = f64> {
    let h = (e_max - e_min) / (steps - 1) as f64;
    (0..steps).map(move |i| if i + 1 == steps { e_max } else { e_min + i as f64 * h })
}
