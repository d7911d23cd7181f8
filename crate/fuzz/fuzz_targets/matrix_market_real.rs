#![no_main]

use libfuzzer_sys::fuzz_target;
use spectral_schwarz::numerics::matrix_market::{parse_matrix_market, write_general};

fuzz_target!(|data: &str| {
    let Ok(m) = parse_matrix_market::<f64>(data) else {
        return;
    };
    assert_eq!(m.row_ptr().len(), m.nrows() + 1);
    assert!(m.col_idx().iter().all(|&j| j < m.ncols()));

    // Whatever parsed must survive a write/read round trip.
    let mut buf = Vec::new();
    write_general(&mut buf, &m).unwrap();
    let back = parse_matrix_market::<f64>(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.nrows(), m.nrows());
    assert_eq!(back.ncols(), m.ncols());
});
