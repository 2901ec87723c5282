//! Regenerates assets/eps_unstable.fsnp: a uniform permittivity map with
//! eps = 0.2. The phase velocity in such a medium exceeds the grid's
//! stable limit at the default time step, so running `simulate` on it is
//! a reproducible solver-divergence case (exit code 3).
//!
//! Run from the workspace root:
//!   cargo run -p phc-lab-cli --example gen_eps_unstable

use phc_lab::fdtd::{FieldComponent, FieldSnapshot};
use phc_lab::io::write_snapshot;

fn main() {
    let (nx, ny) = (60, 40);
    let snap = FieldSnapshot {
        component: FieldComponent::Eps,
        nx,
        ny,
        data: vec![0.2; nx * ny],
        step: 0,
    };
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/eps_unstable.fsnp");
    let mut file = std::fs::File::create(path).unwrap();
    write_snapshot(&mut file, &snap).unwrap();
    println!("wrote {path} ({nx} x {ny}, eps = 0.2)");
}
