//! Grid geometry: states, actions, state-group tiling and action muting.
//!
//! Row 0 is the north edge, column 0 the west edge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId {
    pub row: usize,
    pub col: usize,
}

impl StateId {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn manhattan(self, other: StateId) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionId {
    North,
    South,
    East,
    West,
    /// Re-sense without moving.
    SenseHold,
}

impl ActionId {
    pub const ALL: [ActionId; 5] =
        [ActionId::North, ActionId::South, ActionId::East, ActionId::West, ActionId::SenseHold];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn is_move(self) -> bool {
        self != ActionId::SenseHold
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionId::North => "N",
            ActionId::South => "S",
            ActionId::East => "E",
            ActionId::West => "W",
            ActionId::SenseHold => "H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
}

impl GridDims {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn n_states(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, s: StateId) -> bool {
        s.row < self.height && s.col < self.width
    }

    pub fn index(&self, s: StateId) -> usize {
        s.row * self.width + s.col
    }

    pub fn state(&self, index: usize) -> StateId {
        StateId::new(index / self.width, index % self.width)
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.n_states()).map(|i| self.state(i))
    }

    /// Applies `action` to `s`, or `None` if that would leave the grid.
    pub fn apply(&self, s: StateId, action: ActionId) -> Option<StateId> {
        let next = match action {
            ActionId::North => StateId::new(s.row.checked_sub(1)?, s.col),
            ActionId::South => StateId::new(s.row + 1, s.col),
            ActionId::East => StateId::new(s.row, s.col + 1),
            ActionId::West => StateId::new(s.row, s.col.checked_sub(1)?),
            ActionId::SenseHold => s,
        };
        self.contains(next).then_some(next)
    }

    /// One step of a Manhattan path towards `to`, rows first.
    pub fn step_towards(&self, from: StateId, to: StateId) -> Option<(ActionId, StateId)> {
        let action = if from.row > to.row {
            ActionId::North
        } else if from.row < to.row {
            ActionId::South
        } else if from.col < to.col {
            ActionId::East
        } else if from.col > to.col {
            ActionId::West
        } else {
            return None;
        };
        self.apply(from, action).map(|s| (action, s))
    }
}

/// Actions the driver leaves unmuted at `state`: moves that stay on the grid
/// plus `SenseHold`, in ordinal order.
pub fn valid_actions(state: StateId, dims: GridDims) -> Vec<ActionId> {
    ActionId::ALL.into_iter().filter(|&a| dims.apply(state, a).is_some()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateGroupId(pub usize);

/// Rectangular tiling anchored at the origin; edge tiles may be smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    pub tile_width: usize,
    pub tile_height: usize,
}

impl Default for Tiling {
    fn default() -> Self {
        Self { tile_width: 3, tile_height: 3 }
    }
}

impl Tiling {
    pub fn new(tile_width: usize, tile_height: usize) -> Self {
        assert!(tile_width >= 1 && tile_height >= 1, "tiles must be non-empty");
        Self { tile_width, tile_height }
    }

    pub fn tiles_across(&self, dims: GridDims) -> usize {
        dims.width.div_ceil(self.tile_width)
    }

    pub fn tiles_down(&self, dims: GridDims) -> usize {
        dims.height.div_ceil(self.tile_height)
    }

    pub fn n_groups(&self, dims: GridDims) -> usize {
        self.tiles_across(dims) * self.tiles_down(dims)
    }

    /// Largest possible group, i.e. one full tile.
    pub fn group_size(&self) -> usize {
        self.tile_width * self.tile_height
    }

    /// Row-major (tile row, tile column) of a group.
    pub fn tile_coords(&self, group: StateGroupId, dims: GridDims) -> (usize, usize) {
        let across = self.tiles_across(dims);
        (group.0 / across, group.0 % across)
    }

    pub fn group_states(&self, group: StateGroupId, dims: GridDims) -> Vec<StateId> {
        let (tr, tc) = self.tile_coords(group, dims);
        let rows = tr * self.tile_height..((tr + 1) * self.tile_height).min(dims.height);
        let cols = tc * self.tile_width..((tc + 1) * self.tile_width).min(dims.width);
        rows.flat_map(|r| cols.clone().map(move |c| StateId::new(r, c))).collect()
    }
}

pub fn group_of(state: StateId, dims: GridDims, tiling: Tiling) -> Result<StateGroupId> {
    if !dims.contains(state) {
        return Err(contract(format!("state {state} outside {}x{} grid", dims.width, dims.height)));
    }
    let across = tiling.tiles_across(dims);
    Ok(StateGroupId((state.row / tiling.tile_height) * across + state.col / tiling.tile_width))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_examples() {
        let nine = GridDims::new(9, 9);
        let t = Tiling::default();
        assert_eq!(group_of(StateId::new(0, 0), nine, t).unwrap(), StateGroupId(0));
        assert_eq!(group_of(StateId::new(4, 4), nine, t).unwrap(), StateGroupId(4));
        let eight = GridDims::new(8, 8);
        let last = group_of(StateId::new(7, 7), eight, t).unwrap();
        assert_eq!(last, StateGroupId(8));
        assert_eq!(t.group_states(last, eight).len(), 4);
        assert!(group_of(StateId::new(9, 0), nine, t).is_err());
    }

    #[test]
    fn valid_action_examples() {
        let dims = GridDims::new(5, 5);
        assert_eq!(valid_actions(StateId::new(2, 2), dims), ActionId::ALL.to_vec());
        assert_eq!(
            valid_actions(StateId::new(0, 4), dims),
            vec![ActionId::South, ActionId::West, ActionId::SenseHold]
        );
        assert_eq!(valid_actions(StateId::new(0, 0), GridDims::new(1, 1)), vec![ActionId::SenseHold]);
    }

    #[test]
    fn step_towards_reaches_target() {
        let dims = GridDims::new(6, 4);
        let (mut s, goal) = (StateId::new(3, 0), StateId::new(0, 5));
        let mut n = 0;
        while let Some((_, next)) = dims.step_towards(s, goal) {
            s = next;
            n += 1;
        }
        assert_eq!(s, goal);
        assert_eq!(n, 8);
    }
}
