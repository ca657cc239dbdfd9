use wada_lab::chart::*;
use wada_lab::families::EPS0;
fn main() {
    let dm = DiskMap::pants(EPS0).unwrap();
    // track a single C2 point: u=0.9 (slow side), s=0.0
    for &(u0, s0) in &[(0.9f64, 0.0f64), (0.1, 0.0), (0.3, 0.5)] {
        let mut p = ChartPoint::new(Component::C2, u0, s0);
        print!("start ({u0},{s0}): s path ");
        for _ in 0..12 {
            p = dm.psi(p).unwrap();
            print!("{:.3}@{:?}:{:.2} ", p.s, p.c, p.u);
        }
        println!();
    }
}
