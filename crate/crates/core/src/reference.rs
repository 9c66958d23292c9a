//! Reference schedules, in ascending order and units of `Δt`.

/// Greedy integer schedule for five measurements.
pub const LONA_5: [u32; 5] = [1, 1, 1, 2, 3];

/// Swarm-optimized continuous schedule for five measurements.
pub const PSO_5: [f64; 5] = [1.060, 1.082, 1.419, 2.138, 2.870];

/// Greedy integer schedule for ten measurements.
pub const LONA_10: [u32; 10] = [1, 1, 1, 1, 1, 2, 2, 3, 4, 6];

/// Swarm-optimized continuous schedule for ten measurements.
pub const PSO_10: [f64; 10] = [1.071, 1.107, 1.161, 1.180, 1.200, 2.041, 2.152, 3.070, 3.970, 4.906];

/// Swarm-optimized reference schedule for `n` measurements, if there is one.
pub fn pso_schedule(n: usize) -> Option<&'static [f64]> {
    match n {
        5 => Some(&PSO_5),
        10 => Some(&PSO_10),
        _ => None,
    }
}

/// Initialization radius used around the greedy schedule for `n` measurements.
pub fn around_lona_radius(n: usize) -> f64 {
    if n >= 10 {
        0.1
    } else {
        0.5
    }
}
