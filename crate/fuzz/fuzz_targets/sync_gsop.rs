#![no_main]

use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;
use shc_core::rx::{gsop, synchronize};
use shc_core::signal::ComplexWaveform;

fuzz_target!(|data: &[u8]| {
    let samples: Vec<Complex64> = data
        .chunks_exact(8)
        .map(|b| {
            let re = f32::from_le_bytes(b[..4].try_into().unwrap());
            let im = f32::from_le_bytes(b[4..].try_into().unwrap());
            Complex64::new(f64::from(re), f64::from(im))
        })
        .collect();
    let Ok(w) = ComplexWaveform::new(samples, 25e9) else {
        return;
    };
    if let Ok(orth) = gsop(&w) {
        assert_eq!(orth.len(), w.len());
    }
    let reference: Vec<Complex64> = (0..256)
        .map(|k| Complex64::from_polar(1.0, 0.7 * (k * k) as f64))
        .collect();
    if let Ok((aligned, res)) = synchronize(&w, &[&reference]) {
        assert_eq!(aligned.len(), w.len());
        assert!(res.offset < w.len());
    }
});
