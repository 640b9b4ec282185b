use num_complex::Complex64;
use shadowlab::matrix::ComplexMatrix;
use shadowlab::zernike::*;
use shadowlab::radial::{ellipse_of_2x2, density_2x2};
fn c(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }
fn l1(exp: &ZernikeExpansion) -> f64 {
    let a = ComplexMatrix::jordan(2);
    let e = ellipse_of_2x2(&a).unwrap();
    let cells = 240usize;
    let h = 0.9 / cells as f64;
    let mut l1 = 0.0;
    for iy in 0..cells { for ix in 0..cells {
        let z = c(-0.45 + (ix as f64 + 0.5) * h, -0.45 + (iy as f64 + 0.5) * h);
        if z.norm() <= 0.45 {
            l1 += (exp.eval(z) - density_2x2(&e, z).unwrap()).abs() * h * h;
        }
    }}
    l1
}
fn main() {
    let a = ComplexMatrix::jordan(2);
    for m in [10usize, 12, 14, 16] {
        let exp = zernike_coeffs(&a, m).unwrap();
        println!("M={m} scale={:.4} L1={:.5}", exp.scale, l1(&exp));
    }
}
