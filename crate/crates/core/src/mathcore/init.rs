//! Glorot and He weight initializers (normal variants).

use super::{Mat64, MathError, RngStream};

/// Glorot-normal initialization: shape (fan_out, fan_in), entries drawn
/// N(0, 2/(fan_in+fan_out)). Entries are drawn in row-major order, so a
/// fixed stream yields a bit-identical matrix.
pub fn init_glorot(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Result<Mat64, MathError> {
    let var = 2.0 / (fan_in + fan_out) as f64;
    fill_normal(fan_in, fan_out, var, rng)
}

/// He-normal initialization: shape (fan_out, fan_in), entries N(0, 2/fan_in).
pub fn init_he(fan_in: usize, fan_out: usize, rng: &mut RngStream) -> Result<Mat64, MathError> {
    let var = 2.0 / fan_in as f64;
    fill_normal(fan_in, fan_out, var, rng)
}

fn fill_normal(
    fan_in: usize,
    fan_out: usize,
    var: f64,
    rng: &mut RngStream,
) -> Result<Mat64, MathError> {
    if fan_in == 0 || fan_out == 0 {
        return Err(MathError::ZeroFan);
    }
    let sd = var.sqrt();
    let mut m = Mat64::zeros(fan_out, fan_in);
    for v in m.as_mut_slice() {
        *v = sd * rng.standard_normal();
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(m: &Mat64) -> (f64, f64) {
        let n = m.as_slice().len() as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var)
    }

    #[test]
    fn shapes_and_determinism() {
        let mut rng = RngStream::new(11);
        let a = init_glorot(1, 1, &mut rng).unwrap();
        assert_eq!((a.rows(), a.cols()), (1, 1));
        assert!(a.all_finite());

        let b1 = init_glorot(3, 4, &mut RngStream::new(5)).unwrap();
        let b2 = init_glorot(3, 4, &mut RngStream::new(5)).unwrap();
        assert_eq!(b1, b2);

        let h1 = init_he(3, 4, &mut RngStream::new(5)).unwrap();
        let h2 = init_he(3, 4, &mut RngStream::new(5)).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn zero_fan_rejected() {
        let mut rng = RngStream::new(0);
        assert!(matches!(init_glorot(0, 1, &mut rng), Err(MathError::ZeroFan)));
        assert!(matches!(init_he(1, 0, &mut rng), Err(MathError::ZeroFan)));
    }

    #[test]
    fn glorot_variance() {
        // 100x100 draw: variance 2/200 = 0.01 within +/-15%.
        let m = init_glorot(100, 100, &mut RngStream::new(17)).unwrap();
        let (_, var) = stats(&m);
        assert!((var - 0.01).abs() < 0.0015, "glorot variance {var}");
    }

    #[test]
    fn he_variance() {
        // fan_in 200: variance 2/200 = 0.01 within +/-15%.
        let m = init_he(200, 50, &mut RngStream::new(17)).unwrap();
        let (_, var) = stats(&m);
        assert!((var - 0.01).abs() < 0.0015, "he variance {var}");
    }

    #[test]
    fn large_draw_mean_near_zero() {
        // mean of a 500x500 draw within 3 standard errors of 0
        let m = init_glorot(500, 500, &mut RngStream::new(23)).unwrap();
        let (mean, var) = stats(&m);
        let se = (var / (500.0 * 500.0)).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3se {}", 3.0 * se);
    }
}
