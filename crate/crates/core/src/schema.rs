//! Questionnaire structure: ordered items, each owned by one competency
//! category, answered on a closed integer mark scale.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single answer on the questionnaire's mark scale.
pub type Mark = u8;

/// The bundled schema document (same content as [`default_schema`]).
pub const DEFAULT_SCHEMA_DOCUMENT: &str = include_str!("../data/default_schema.json");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed schema document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scale: min {min} must be below max {max}")]
    InvalidScaleBounds { min: i64, max: i64 },
    #[error("scale: bounds {min}..{max} fall outside 0..=255")]
    ScaleOutOfRange { min: i64, max: i64 },
    #[error("scale.labels: missing label for mark {0}")]
    MissingLabel(Mark),
    #[error("scale.labels: label key {0:?} is not a mark inside the scale")]
    StrayLabel(String),
    #[error("categories[{index}]: duplicate category id {id}")]
    DuplicateCategory { index: usize, id: u32 },
    #[error("categories: ids must be contiguous from 1, expected {expected} at categories[{index}], found {found}")]
    NonContiguousCategories {
        index: usize,
        expected: u32,
        found: u32,
    },
    #[error("categories: at least one category is required")]
    NoCategories,
    #[error("items: item list is empty")]
    NoItems,
    #[error("items: item {item} references unknown category {category}")]
    UnknownCategory { item: usize, category: u32 },
    #[error("categories: category {0} owns no items")]
    EmptyCategory(u32),
}

/// Closed integer mark scale with one display label per mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkScale {
    min_mark: Mark,
    max_mark: Mark,
    labels: BTreeMap<Mark, String>,
}

impl MarkScale {
    pub fn new(
        min_mark: Mark,
        max_mark: Mark,
        labels: BTreeMap<Mark, String>,
    ) -> Result<Self, SchemaError> {
        if min_mark >= max_mark {
            return Err(SchemaError::InvalidScaleBounds {
                min: min_mark.into(),
                max: max_mark.into(),
            });
        }
        for mark in min_mark..=max_mark {
            if !labels.contains_key(&mark) {
                return Err(SchemaError::MissingLabel(mark));
            }
        }
        if let Some(stray) = labels.keys().find(|m| **m < min_mark || **m > max_mark) {
            return Err(SchemaError::StrayLabel(stray.to_string()));
        }
        Ok(Self {
            min_mark,
            max_mark,
            labels,
        })
    }

    pub fn min_mark(&self) -> Mark {
        self.min_mark
    }

    pub fn max_mark(&self) -> Mark {
        self.max_mark
    }

    pub fn labels(&self) -> &BTreeMap<Mark, String> {
        &self.labels
    }

    pub fn label(&self, mark: Mark) -> Option<&str> {
        self.labels.get(&mark).map(String::as_str)
    }

    pub fn contains(&self, mark: i64) -> bool {
        mark >= i64::from(self.min_mark) && mark <= i64::from(self.max_mark)
    }

    /// Every mark of the scale in ascending order.
    pub fn marks(&self) -> impl Iterator<Item = Mark> {
        self.min_mark..=self.max_mark
    }

    pub fn width(&self) -> f64 {
        f64::from(self.max_mark - self.min_mark)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: u32,
    pub name: String,
}

/// Ordered items mapped onto contiguous category ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionnaireSchema {
    name: String,
    scale: MarkScale,
    categories: Vec<Category>,
    item_category: Vec<u32>,
}

impl QuestionnaireSchema {
    pub fn new(
        name: impl Into<String>,
        scale: MarkScale,
        categories: Vec<Category>,
        item_category: Vec<u32>,
    ) -> Result<Self, SchemaError> {
        if categories.is_empty() {
            return Err(SchemaError::NoCategories);
        }
        let mut seen = BTreeSet::new();
        for (index, category) in categories.iter().enumerate() {
            if !seen.insert(category.id) {
                return Err(SchemaError::DuplicateCategory {
                    index,
                    id: category.id,
                });
            }
        }
        for (index, category) in categories.iter().enumerate() {
            let expected = index as u32 + 1;
            if category.id != expected {
                return Err(SchemaError::NonContiguousCategories {
                    index,
                    expected,
                    found: category.id,
                });
            }
        }
        if item_category.is_empty() {
            return Err(SchemaError::NoItems);
        }
        let category_count = categories.len() as u32;
        for (index, &category) in item_category.iter().enumerate() {
            if category == 0 || category > category_count {
                return Err(SchemaError::UnknownCategory {
                    item: index + 1,
                    category,
                });
            }
        }
        for category in &categories {
            if !item_category.contains(&category.id) {
                return Err(SchemaError::EmptyCategory(category.id));
            }
        }
        Ok(Self {
            name: name.into(),
            scale,
            categories,
            item_category,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scale(&self) -> &MarkScale {
        &self.scale
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, id: u32) -> Option<&Category> {
        self.categories.iter().find(|c| c.id == id)
    }

    /// Category id per item, in item order (index 0 is item 1).
    pub fn item_categories(&self) -> &[u32] {
        &self.item_category
    }

    pub fn item_count(&self) -> usize {
        self.item_category.len()
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    /// Category of a 1-based item index.
    pub fn category_of(&self, item: usize) -> Option<u32> {
        item.checked_sub(1)
            .and_then(|i| self.item_category.get(i))
            .copied()
    }

    /// 1-based item indices owned by `category`, ascending.
    pub fn items_in_category(&self, category: u32) -> Vec<usize> {
        self.item_category
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == category)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Items ordered by (category, item index).
    pub fn items_by_category(&self) -> Vec<usize> {
        let mut items: Vec<usize> = (1..=self.item_count()).collect();
        items.sort_by_key(|&item| (self.item_category[item - 1], item));
        items
    }

    /// Serializes to the schema document format read by [`load_schema`].
    pub fn to_document(&self) -> String {
        let doc = SchemaDocument {
            name: self.name.clone(),
            scale: ScaleDocument {
                min: self.scale.min_mark.into(),
                max: self.scale.max_mark.into(),
                labels: self
                    .scale
                    .labels
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect(),
            },
            categories: self.categories.clone(),
            items: self.item_category.clone(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("schema document serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDocument {
    name: String,
    scale: ScaleDocument,
    categories: Vec<Category>,
    items: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleDocument {
    min: i64,
    max: i64,
    labels: BTreeMap<String, String>,
}

/// Parses a JSON schema document and checks every schema invariant.
pub fn load_schema(source: &str) -> Result<QuestionnaireSchema, SchemaError> {
    let doc: SchemaDocument = serde_json::from_str(source).map_err(|e| SchemaError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let (min, max) = (doc.scale.min, doc.scale.max);
    if !(0..=255).contains(&min) || !(0..=255).contains(&max) {
        return Err(SchemaError::ScaleOutOfRange { min, max });
    }
    if min >= max {
        return Err(SchemaError::InvalidScaleBounds { min, max });
    }
    let mut labels = BTreeMap::new();
    for (key, label) in doc.scale.labels {
        let mark = key
            .trim()
            .parse::<i64>()
            .ok()
            .filter(|m| (min..=max).contains(m))
            .ok_or_else(|| SchemaError::StrayLabel(key.clone()))?;
        labels.insert(mark as Mark, label);
    }
    let scale = MarkScale::new(min as Mark, max as Mark, labels)?;
    QuestionnaireSchema::new(doc.name, scale, doc.categories, doc.items)
}

/// The 58-item questionnaire with four competency categories.
pub fn default_schema() -> QuestionnaireSchema {
    const ITEMS: [u32; 58] = [
        1, 3, 1, 1, 2, 4, 1, 3, 2, 1, 3, 4, 1, 3, 2, 3, 4, 2, 3, 2, 1, 4, 2, 4, 1, 3, 2, 1, 4, 3,
        4, 2, 1, 4, 3, 3, 4, 2, 4, 1, 4, 2, 1, 3, 4, 2, 2, 3, 2, 2, 2, 2, 2, 2, 3, 2, 4, 2,
    ];
    let labels = [
        (1, "very poor"),
        (2, "poor"),
        (3, "medium"),
        (4, "good"),
        (5, "very good"),
    ]
    .into_iter()
    .map(|(m, l)| (m, l.to_string()))
    .collect();
    let categories = [
        "scientific competence",
        "psycho-pedagogical competence",
        "psychosocial competence",
        "managerial competence",
    ]
    .iter()
    .enumerate()
    .map(|(i, name)| Category {
        id: i as u32 + 1,
        name: name.to_string(),
    })
    .collect();
    let scale = MarkScale::new(1, 5, labels).expect("default scale is valid");
    QuestionnaireSchema::new(
        "teaching-staff-evaluation",
        scale,
        categories,
        ITEMS.to_vec(),
    )
    .expect("default schema is valid")
}
