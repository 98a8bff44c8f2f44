#![no_main]

use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;
use shc_core::signal::{qam_demap, qam_map, Constellation};

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let order = [4, 16, 32, 64][usize::from(selector) % 4];
    let c = Constellation::qam(order).expect("supported order");
    let symbols: Vec<Complex64> = rest
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let bits = qam_demap(&symbols, &c);
    assert_eq!(bits.len(), symbols.len() * c.bits_per_symbol());
    assert!(bits.iter().all(|&b| b <= 1));
    // decisions are constellation points, which demap to themselves
    let points = qam_map(&bits, &c).expect("whole labels");
    assert_eq!(qam_demap(&points, &c), bits);
});
