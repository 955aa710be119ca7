/// Cantor pairing `(x, y) ↦ (x + y)(x + y + 1)/2 + y`.
pub fn cantor_pair(x: u64, y: u64) -> u64 {
    let s = x + y;
    s * (s + 1) / 2 + y
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(n: u64) -> (u64, u64) {
    // w = floor((sqrt(8n + 1) - 1) / 2), computed exactly.
    let r = (8 * u128::from(n) + 1).isqrt();
    let w = ((r - 1) / 2) as u64;
    let t = w * (w + 1) / 2;
    let y = n - t;
    (w - y, y)
}

/// Stage `n` works on world `i` and sentence `e`: unpair `n` into
/// `(m, k)`, drop `k`, and unpair `m` into `(i, e)`. Every pair comes up
/// once for each `k`, hence infinitely often.
pub fn pair_schedule(n: u64) -> (u64, u64) {
    let (m, _k) = cantor_unpair(n);
    cantor_unpair(m)
}

/// First stage at which `pair_schedule` yields `(i, e)`.
pub fn first_stage_for(i: u64, e: u64) -> u64 {
    cantor_pair(cantor_pair(i, e), 0)
}
