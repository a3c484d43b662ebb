#![no_main]

use libfuzzer_sys::fuzz_target;
use zeno_cavity::experiments::{emit_trajectory_csv, parse_trajectory_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(traj) = parse_trajectory_csv(text) else { return };
    // anything the writer accepts must read back bit for bit
    let mut out = Vec::new();
    if emit_trajectory_csv(&traj, &mut out).is_ok() {
        let again = parse_trajectory_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again.t.len(), traj.t.len());
        for (a, b) in again.rho_pm.iter().zip(&traj.rho_pm) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
});
