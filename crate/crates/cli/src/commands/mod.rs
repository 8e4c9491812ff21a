pub mod capacity;
pub mod logsob;
pub mod optimality;
pub mod simulate;
pub mod sweep;

use std::time::Instant;

use crate::config::Context;

/// Wall time since `start`, always logged to stderr and reported only with
/// `--timing` so that reports stay byte-identical across runs.
pub(crate) fn wall_time(ctx: &Context, suite: &str, start: Instant) -> Option<f64> {
    let secs = start.elapsed().as_secs_f64();
    eprintln!("{suite}: {secs:.3} s on {} worker(s)", ctx.workers);
    ctx.timing.then_some(secs)
}
