use num_bigint::BigInt;
use num_rational::BigRational;
use orbitlab::poly::exact::{RatPoly, SturmChain};
use std::time::Instant;

#[test]
#[ignore]
fn bench_sturm_iterates() {
    let q = RatPoly::new(
        [-2i64, 0, 1]
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect(),
    );
    for n in [6usize, 7, 8, 9, 10] {
        let t0 = Instant::now();
        let it = q.iterate(n);
        let p = it.sub(&RatPoly::new(vec![
            BigRational::from_integer(BigInt::from(0)),
            BigRational::from_integer(BigInt::from(1)),
        ]));
        let compose_t = t0.elapsed();
        let ip = p.clear_denominators();
        let max_bits = ip.coeffs.iter().map(|c| c.bits()).max().unwrap();
        let t1 = Instant::now();
        let chain = SturmChain::build(&ip, 1 << 26);
        match chain {
            Ok(c) => {
                let t2 = Instant::now();
                let count = c.count_all_real_roots();
                println!(
                    "n={n} deg={} maxbits={} compose={:?} chain={:?} count_time={:?} count={} gcd_deg={}",
                    ip.degree(), max_bits, compose_t, t1.elapsed(), t2.elapsed(), count, c.gcd_degree
                );
            }
            Err(e) => println!("n={n} deg={} maxbits={} compose={:?} chain FAILED: {e}", ip.degree(), max_bits, compose_t),
        }
    }
}
