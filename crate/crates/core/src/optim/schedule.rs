/// Step decay `base * decay^floor(step / period)`.
pub fn lr_at(step: usize, base: f64, decay: f64, period: usize) -> f64 {
    let period = period.max(1);
    base * decay.powi((step / period) as i32)
}
