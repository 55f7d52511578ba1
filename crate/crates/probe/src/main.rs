use oamplab::constellation::Constellation;
use oamplab::quadrature::{adaptive_simpson, GaussHermite};

fn tanh_mmse(rho: f64, rule: &GaussHermite) -> f64 {
    1.0 - rule.expect_std_normal(|u| (rho + rho.sqrt() * u).tanh())
}

fn main() {
    let c = Constellation::qpsk();
    let r64 = GaussHermite::new(64);
    let r128 = GaussHermite::new(128);
    println!("rho | omega_s @32 | @48 | @64 | @96 | tanh@128");
    for rho in [0.1, 0.5, 1.0, 3.0, 10.0, 30.0] {
        let o = tanh_mmse(rho, &r128);
        for ord in [32usize, 48, 64, 96] {
            let v = c.omega_s_with_rule(rho, &GaussHermite::new(ord));
            print!("rho={rho} ord={ord} relerr={:+.3e}  ", (v - o) / o);
        }
        println!();
    }
    // mutual information route comparison at a=8
    for a in [2.0f64, 8.0, 20.0] {
        let int_tanh = adaptive_simpson(&mut |r| tanh_mmse(r, &r128), 0.0, a, 1e-9);
        let int_gh = adaptive_simpson(&mut |r| c.omega_s_with_rule(r, &r64), 0.0, a, 1e-8);
        let mi = c.mutual_info(a);
        println!(
            "a={a}: int_tanh={int_tanh:.9} int_gh64={int_gh:.9} mi_gh32={mi:.9} (mi-int_tanh={:+.2e})",
            mi - int_tanh
        );
    }
}
