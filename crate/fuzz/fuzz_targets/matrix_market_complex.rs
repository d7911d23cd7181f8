#![no_main]

use libfuzzer_sys::fuzz_target;
use num_complex::Complex64;
use spectral_schwarz::numerics::matrix_market::parse_matrix_market;

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_matrix_market::<Complex64>(data) {
        assert_eq!(m.values().len(), m.nnz());
        assert!(m.col_idx().iter().all(|&j| j < m.ncols()));
    }
});
