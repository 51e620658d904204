//! Exact line of sight between cell centers.
//!
//! The segment joining two cell centers is walked with integer arithmetic in
//! doubled coordinates, so the crossing order is decided without rounding.
//! A cell is "on" the segment when the segment meets the cell's open
//! interior; a segment passing exactly through a grid corner touches the two
//! side cells only at a point and does not visit them.

use crate::grid::Cell;

/// Cells whose interior the segment from `from` to `to` crosses, in order,
/// both endpoints included.
pub fn segment_cells(from: Cell, to: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    walk(from, to, |c| {
        out.push(c);
        true
    });
    out
}

/// True when no cell strictly between `from` and `to` satisfies `blocks`.
/// The endpoints themselves are never tested.
pub fn line_of_sight(from: Cell, to: Cell, mut blocks: impl FnMut(Cell) -> bool) -> bool {
    walk(from, to, |c| c == from || c == to || !blocks(c))
}

/// Visits cells along the segment, stopping early when `visit` returns false.
/// Returns whether the walk reached `to`.
fn walk(from: Cell, to: Cell, mut visit: impl FnMut(Cell) -> bool) -> bool {
    let dx = i64::from(to.x - from.x);
    let dy = i64::from(to.y - from.y);
    let (adx, ady) = (dx.abs() * 2, dy.abs() * 2);
    let (sx, sy) = (dx.signum() as i32, dy.signum() as i32);
    // Parameter of the next boundary crossing along each axis is n / |2d|,
    // with n = 1, 3, 5, ... in doubled units.
    let (mut nx, mut ny) = (1i64, 1i64);
    let mut cur = from;
    if !visit(cur) {
        return false;
    }
    while cur != to {
        let x_next = if adx == 0 { None } else { Some((nx, adx)) };
        let y_next = if ady == 0 { None } else { Some((ny, ady)) };
        let order = match (x_next, y_next) {
            (Some((a, b)), Some((c, d))) => (a * d).cmp(&(c * b)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => unreachable!("distinct cells imply a nonzero direction"),
        };
        match order {
            std::cmp::Ordering::Less => {
                cur.x += sx;
                nx += 2;
            }
            std::cmp::Ordering::Greater => {
                cur.y += sy;
                ny += 2;
            }
            std::cmp::Ordering::Equal => {
                cur.x += sx;
                cur.y += sy;
                nx += 2;
                ny += 2;
            }
        }
        if !visit(cur) {
            return false;
        }
    }
    true
}
