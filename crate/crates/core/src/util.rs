use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vector::Vector;

/// Generator seeded from the bit pattern of `x`, so audits are reproducible.
pub(crate) fn seeded_rng(x: &Vector, salt: u64) -> ChaCha8Rng {
    let mut seed = 0x9e37_79b9_7f4a_7c15_u64 ^ salt;
    for c in x.as_slice() {
        seed = seed.rotate_left(17) ^ c.to_bits();
        seed = seed.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    }
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere.
pub(crate) fn random_direction(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let comps: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = Vector::new(comps).expect("finite components");
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

/// Competitor points around `center` at log-uniform radii in
/// `[1e−4, 1]·scale`.
pub(crate) fn competitors(center: &Vector, scale: f64, count: usize, salt: u64) -> Vec<Vector> {
    let mut rng = seeded_rng(center, salt);
    (0..count)
        .map(|_| {
            let dir = random_direction(&mut rng, center.dim());
            let radius = scale * 10f64.powf(rng.random_range(-4.0..0.0));
            center.add_scaled(radius, &dir)
        })
        .collect()
}
