use homodyne_core::gaussian_core::CapacityRecord;
use serde_json::json;

use crate::args::{CapacityArgs, Format, Unit};
use crate::config::{layer, Context};
use crate::output::{emit, fmt_g};
use crate::{CliError, Outcome};

pub const DEFAULT_ENERGY: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 1.0;

pub fn run(args: CapacityArgs) -> Result<Outcome, CliError> {
    let args = layer(args)?;
    let ctx = Context::resolve(&args.common, Format::Csv)?;
    let energy = args.energy.unwrap_or(DEFAULT_ENERGY);
    let beta = args.beta.unwrap_or(DEFAULT_BETA);
    let record = CapacityRecord::compute(energy, beta)?;
    emit(&render(&record, ctx.format, ctx.unit), ctx.out.as_deref())?;
    Ok(Outcome::Pass)
}

pub fn render(r: &CapacityRecord<f64>, format: Format, unit: Unit) -> String {
    let u = unit.suffix();
    match format {
        Format::Csv => format!(
            "E,beta,capacity_{u},upper_bound_{u},alpha_p,alpha_q,delta,gamma\n{}\n",
            [
                r.energy,
                r.beta,
                unit.convert(r.capacity),
                unit.convert(r.upper_bound),
                r.alpha_p,
                r.alpha_q,
                r.delta,
                r.gamma
            ]
            .map(fmt_g)
            .join(",")
        ),
        Format::Json => {
            let v = json!({
                "E": r.energy,
                "beta": r.beta,
                "unit": u,
                "capacity": unit.convert(r.capacity),
                "upper_bound": unit.convert(r.upper_bound),
                "alpha_q": r.alpha_q,
                "alpha_p": r.alpha_p,
                "delta": r.delta,
                "gamma": r.gamma,
            });
            serde_json::to_string_pretty(&v).expect("serializes") + "\n"
        }
    }
}
