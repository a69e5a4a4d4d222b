//! CSV export of recorded trajectories.

use std::fmt::Write as _;
use std::path::Path;

use super::Trajectory;
use crate::discretize::Grid;

/// One row per recorded time and interior node:
/// `t,x1[,x2],u,z1..zn,reflection`. Floats use Rust's shortest round-trip
/// scientific notation, so equal values give equal bytes.
pub fn trajectory_csv(traj: &Trajectory, grid: &Grid) -> String {
    let d = grid.dim();
    let n = traj.grads.first().map_or(0, Vec::len);
    let mut s = String::from("t");
    for a in 1..=d {
        let _ = write!(s, ",x{a}");
    }
    s.push_str(",u");
    for k in 1..=n {
        let _ = write!(s, ",z{k}");
    }
    s.push_str(",reflection\n");
    for i in 0..traj.times.len() {
        for p in 0..traj.states[i].len() {
            let _ = write!(s, "{:e}", traj.times[i]);
            for x in grid.interior_coords(p) {
                let _ = write!(s, ",{x:e}");
            }
            let _ = write!(s, ",{:e}", traj.states[i][p]);
            if let Some(g) = traj.grads.get(i) {
                for zk in g {
                    let _ = write!(s, ",{:e}", zk[p]);
                }
            }
            let _ = writeln!(s, ",{:e}", traj.reflection[i][p]);
        }
    }
    s
}

pub fn write_trajectory_csv(traj: &Trajectory, grid: &Grid, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, trajectory_csv(traj, grid))
}
