//! Reference-range entities for the RefRange task.
//!
//! The bundled table is a small demo with bounds picked to sit inside the
//! interpolation range. It makes no clinical claim; supply a CSV with header
//! `entity,unit,low,high` for real use.

use std::path::Path;

use serde::Deserialize;

use super::{io_err, DatagenError, Result};
use crate::numerics::{parse_number, ExactDecimal};
use crate::units::{parse_unit, Unit};

const BUNDLED: &str = "\
entity,unit,low,high
Glucose,mg/dL,70,99
Potassium,mEq/l,3.5,5.1
Calcium,mg/dL,8.5,10.2
Creatinine,mg/dL,0.6,1.2
Urea nitrogen,mg/dL,7,20
Hemoglobin,g/dL,12,17.5
Albumin,g/dL,3.5,5.0
Total bilirubin,mg/dL,0.1,1.2
Magnesium,mg/dL,1.7,2.2
Phosphate,mg/dL,2.5,4.5
Chloride,g/l,3.4,3.8
Sodium,g/l,3.1,3.34
Bicarbonate,mEq/l,22,29
White blood cells,k/µl,4.5,11
Neutrophils,k/µl,1.5,8
Lymphocytes,k/µl,1,4.8
Lactate,mM,0.5,2.2
TSH,mIU/l,0.4,4.0
Insulin,µIU/ml,2.6,24.9
Free T4,ng/dl,0.8,1.8
Vitamin B12,ng/dl,20,90
Ammonia,µg/dl,15,45
Cortisol,µg/dl,5,23
ALT,U/l,7,56
AST,U/l,10,40
Fibrinogen,g/l,2,4
Sedimentation rate,mm/hr,1,20
Urine output,ml/hr,30,60
";

/// One entity with its inclusive normal range in `unit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub entity_name: String,
    pub unit: Unit,
    pub range_low: ExactDecimal,
    pub range_high: ExactDecimal,
}

#[derive(Debug, Deserialize)]
struct Row {
    entity: String,
    unit: String,
    low: String,
    high: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityTable {
    records: Vec<EntityRecord>,
}

impl EntityTable {
    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED).expect("bundled entity table")
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut records = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            // header is line 1
            let line = i + 2;
            let err = |message: String| DatagenError::Entity { line, message };
            let row = row.map_err(|e| err(e.to_string()))?;
            if row.entity.is_empty() {
                return Err(err("empty entity name".into()));
            }
            let unit = parse_unit(&row.unit).map_err(|e| err(e.to_string()))?;
            let range_low = parse_number(&row.low).map_err(|e| err(e.to_string()))?;
            let range_high = parse_number(&row.high).map_err(|e| err(e.to_string()))?;
            if range_low.cmp_value(&range_high) != std::cmp::Ordering::Less {
                return Err(err(format!("low {} is not below high {}", row.low, row.high)));
            }
            records.push(EntityRecord { entity_name: row.entity, unit, range_low, range_high });
        }
        if records.is_empty() {
            return Err(DatagenError::EmptyEntityTable);
        }
        Ok(Self { records })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_csv_str(&text)
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<&EntityRecord> {
        self.records.iter().find(|r| r.entity_name == name)
    }
}

impl Default for EntityTable {
    fn default() -> Self {
        Self::bundled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::NumberRange;
    use crate::units::UnitInventory;

    #[test]
    fn bundled_table_loads_and_fits_interpolation_range() {
        let t = EntityTable::bundled();
        assert!(t.len() >= 20);
        let inv = UnitInventory::builtin();
        for r in t.records() {
            assert!(inv.knows_dimension(&r.unit), "{}", r.unit);
            assert!(r.range_high.in_range(NumberRange::INTERPOLATION), "{}", r.entity_name);
            assert!(r.range_low.in_range(NumberRange::INTERPOLATION), "{}", r.entity_name);
        }
    }

    #[test]
    fn glucose_range_contains_85() {
        let g = EntityTable::bundled().find("Glucose").cloned().unwrap();
        let v = parse_number("85").unwrap();
        assert!(g.range_low.cmp_value(&v).is_le() && v.cmp_value(&g.range_high).is_le());
        assert_eq!(g.unit.to_string(), "mg/dL");
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = "entity,unit,low,high\nX,mg,5,3\n";
        assert!(matches!(EntityTable::from_csv_str(bad), Err(DatagenError::Entity { line: 2, .. })));
        let bad = "entity,unit,low,high\nX,zz,1,3\n";
        assert!(matches!(EntityTable::from_csv_str(bad), Err(DatagenError::Entity { line: 2, .. })));
        let empty = "entity,unit,low,high\n";
        assert!(matches!(EntityTable::from_csv_str(empty), Err(DatagenError::EmptyEntityTable)));
    }
}
