use num_complex::Complex64;
use taulab::whittaker::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() {
    let a = c(0.0, 1.0);
    let (mu_l, mu_r) = (1.0f64, 1.0f64);
    let phi_of_y = |y: f64| -y / 2.0;
    let reference = |y: f64| -> Complex64 {
        let z = 2.0 * (mu_l * mu_r).sqrt() * (-phi_of_y(y)).exp();
        macdonald_k_auto(a, z).unwrap()
    };
    let y0 = -0.4;
    let norm = whittaker_integral_p2(a, mu_l, mu_r, y0, 0.6).unwrap() / reference(y0);
    let mut y = -4.0;
    while y <= 0.0 {
        let w = whittaker_integral_p2(a, mu_l, mu_r, y, 0.6).unwrap();
        let r = norm * reference(y);
        println!("y={y:+.1}: rel diff {:.2e}", (w - r).norm() / r.norm());
        y += 0.8;
    }
}
