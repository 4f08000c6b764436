//! Patch-grid layout of one hot zone docked to a data block pair.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gidney,
    Cuccaro,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Gidney => "gidney",
            Variant::Cuccaro => "cuccaro",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gidney" => Ok(Variant::Gidney),
            "cuccaro" => Ok(Variant::Cuccaro),
            other => domain(format!("unknown adder variant `{other}`")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Horizontal rows of patch slots, top to bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    DataA,
    DataB,
    Bridge1,
    Bridge2,
    LandAncilla,
    Factory2,
    Factory1,
    Pg,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::DataA => "data_a",
            RowKind::DataB => "data_b",
            RowKind::Bridge1 => "bridge_1",
            RowKind::Bridge2 => "bridge_2",
            RowKind::LandAncilla => "land_ancilla",
            RowKind::Factory2 => "factory_2",
            RowKind::Factory1 => "factory_1",
            RowKind::Pg => "pg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "data_a" => RowKind::DataA,
            "data_b" => RowKind::DataB,
            "bridge_1" => RowKind::Bridge1,
            "bridge_2" => RowKind::Bridge2,
            "land_ancilla" => RowKind::LandAncilla,
            "factory_2" => RowKind::Factory2,
            "factory_1" => RowKind::Factory1,
            "pg" => RowKind::Pg,
            _ => return None,
        })
    }

    pub fn is_data(self) -> bool {
        matches!(self, RowKind::DataA | RowKind::DataB)
    }

    pub fn is_factory(self) -> bool {
        matches!(self, RowKind::Factory1 | RowKind::Factory2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Register bits; data rows hold this many slots.
    pub width: usize,
    /// Columns of every non-data row. Equals `width` for a zone sized to the
    /// adder; a wider zone runs a narrow adder with its full resource rows.
    pub zone_width: usize,
    pub variant: Variant,
    /// Row kinds in vertical order; row `r` sits at grid y = `r`.
    pub rows: Vec<RowKind>,
    pub buffer_slots: usize,
}

/// Builds the stall-free hot-zone layout for a `w`-bit adder. Both variants
/// carry two bridge rows; Gidney adds a logical-AND ancilla row where
/// Cuccaro adds a second factory row, so the footprints match.
pub fn build_layout(variant: Variant, w: usize, with_pg_row: bool) -> Result<Layout> {
    build_zone_layout(variant, w, w, with_pg_row)
}

/// Layout of a `w`-bit adder inside a hot zone whose resource rows are
/// `zone_width` columns wide.
pub fn build_zone_layout(
    variant: Variant,
    w: usize,
    zone_width: usize,
    with_pg_row: bool,
) -> Result<Layout> {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&w) {
        return domain(format!("adder width {w} outside {MIN_WIDTH}..={MAX_WIDTH}"));
    }
    if zone_width < w {
        return domain(format!(
            "zone width {zone_width} narrower than adder width {w}"
        ));
    }
    let mut rows = vec![
        RowKind::DataA,
        RowKind::DataB,
        RowKind::Bridge1,
        RowKind::Bridge2,
    ];
    match variant {
        Variant::Gidney => rows.push(RowKind::LandAncilla),
        Variant::Cuccaro => rows.push(RowKind::Factory2),
    }
    rows.push(RowKind::Factory1);
    if with_pg_row {
        rows.push(RowKind::Pg);
    }
    Ok(Layout {
        width: w,
        zone_width,
        variant,
        rows,
        buffer_slots: 0,
    })
}

impl Layout {
    pub fn row_index(&self, kind: RowKind) -> Option<i32> {
        self.rows.iter().position(|&r| r == kind).map(|r| r as i32)
    }

    pub fn has_row(&self, kind: RowKind) -> bool {
        self.rows.contains(&kind)
    }

    pub fn row_width(&self, kind: RowKind) -> usize {
        if kind.is_data() {
            self.width
        } else {
            self.zone_width
        }
    }

    pub fn total_patches(&self) -> usize {
        self.rows.iter().map(|&r| self.row_width(r)).sum::<usize>() + self.buffer_slots
    }

    /// Non-data patches, excluding the phase-gradient row.
    pub fn resource_patches(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !r.is_data() && **r != RowKind::Pg)
            .count()
            * self.zone_width
    }

    pub fn bridge_patches(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| matches!(r, RowKind::Bridge1 | RowKind::Bridge2))
            .count()
            * self.zone_width
    }

    /// Factory patch coordinates, column-major within each row, rows top down.
    pub fn factory_slots(&self) -> Vec<(i32, i32)> {
        let mut slots = Vec::new();
        for (r, kind) in self.rows.iter().enumerate() {
            if kind.is_factory() {
                slots.extend((0..self.zone_width as i32).map(|c| (c, r as i32)));
            }
        }
        slots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gidney_32() {
        let l = build_layout(Variant::Gidney, 32, false).unwrap();
        assert_eq!(l.total_patches(), 192);
        assert_eq!(l.resource_patches(), 128);
        let with_pg = build_layout(Variant::Gidney, 32, true).unwrap();
        assert_eq!(with_pg.total_patches(), 192 + 32);
        assert_eq!(with_pg.resource_patches(), 128);
    }

    #[test]
    fn footprints_match() {
        for w in MIN_WIDTH..=MAX_WIDTH {
            let g = build_layout(Variant::Gidney, w, false).unwrap();
            let c = build_layout(Variant::Cuccaro, w, false).unwrap();
            assert_eq!(g.total_patches(), c.total_patches());
            assert_eq!(g.bridge_patches(), 2 * w);
            assert_eq!(c.factory_slots().len(), 2 * g.factory_slots().len());
        }
    }

    #[test]
    fn zone_layout() {
        let l = build_zone_layout(Variant::Gidney, 4, 32, false).unwrap();
        assert_eq!(l.total_patches(), 2 * 4 + 4 * 32);
        assert_eq!(l.resource_patches(), 128);
        assert_eq!(l.factory_slots().len(), 32);
        assert_eq!(l, {
            let mut b = build_layout(Variant::Gidney, 4, false).unwrap();
            b.zone_width = 32;
            b
        });
        assert!(build_zone_layout(Variant::Gidney, 8, 4, false).is_err());
    }

    #[test]
    fn width_bounds() {
        let l = build_layout(Variant::Cuccaro, 2, false).unwrap();
        assert_eq!(l.width, 2);
        assert!(build_layout(Variant::Gidney, 1, false).is_err());
        assert!(build_layout(Variant::Gidney, 33, false).is_err());
    }
}
