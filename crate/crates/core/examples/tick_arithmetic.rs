//! 40-bit timestamps: wraparound, unit conversion and span arithmetic.

use uwb_selfcal::ticks::{seconds_to_ticks, span_to_meters, wrap_diff, TickSpan, TickTime, METERS_PER_TICK, TICK_PERIOD_S};

fn main() -> uwb_selfcal::Result<()> {
    println!("one tick = {:.3} ps = {:.4} mm", TICK_PERIOD_S * 1e12, METERS_PER_TICK * 1e3);

    // the counter wraps every 2^40 ticks, about 17.2 s
    let before = TickTime::new((1 << 40) - 1000)?;
    let after = before.offset(TickSpan::new(5000)?);
    println!("{} -> {}: span {} ticks", before.ticks(), after.ticks(), wrap_diff(before, after).ticks());
    println!("reversed: {} ticks", wrap_diff(after, before).ticks());

    let turnaround = seconds_to_ticks(2e-3)?;
    println!(
        "2 ms = {} ticks = {:.1} km of light travel",
        turnaround.ticks(),
        span_to_meters(turnaround) / 1e3
    );
    Ok(())
}
