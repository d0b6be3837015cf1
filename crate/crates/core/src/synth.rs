//! Seeded synthetic evaluation stores for load and property testing.
//!
//! Marks come from a ChaCha8 stream seeded with the caller's `u64`, drawn
//! record by record and item by item, so a seed and parameter set always
//! produce the same store.

use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::records::{EvaluationRecord, RecordSet};
use crate::schema::{Mark, QuestionnaireSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkDistribution {
    /// Every scale mark equally likely.
    #[default]
    Uniform,
    /// Mark `k` weighted by `(k - min + 1)^2`: 1, 4, 9, 16, 25 on a 1..5 scale.
    Skewed,
}

impl FromStr for MarkDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(MarkDistribution::Uniform),
            "skewed" => Ok(MarkDistribution::Skewed),
            other => Err(format!(
                "unknown distribution {other:?} (expected uniform or skewed)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthParams {
    pub seed: u64,
    pub teachers: usize,
    pub records_per_teacher: usize,
    pub distribution: MarkDistribution,
}

/// First synthetic timestamp; record `i` is stamped `i` minutes later.
pub fn synth_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

/// Builds `teachers × records_per_teacher` complete records.
///
/// Teachers are named `Teacher-1` .. `Teacher-N`; record ids run from 1 in
/// generation order (all of one teacher's records, then the next teacher's).
pub fn generate(schema: Arc<QuestionnaireSchema>, params: &SynthParams) -> RecordSet {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let scale = schema.scale();
    let marks: Vec<Mark> = scale.marks().collect();
    let sampler: Box<dyn Fn(&mut ChaCha8Rng) -> Mark> = match params.distribution {
        MarkDistribution::Uniform => {
            let dist = Uniform::new_inclusive(scale.min_mark(), scale.max_mark())
                .expect("scale bounds are ordered");
            Box::new(move |rng| dist.sample(rng))
        }
        MarkDistribution::Skewed => {
            let weights: Vec<u32> = (1..=marks.len() as u32).map(|w| w * w).collect();
            let dist = WeightedIndex::new(weights).expect("weights are positive");
            let marks = marks.clone();
            Box::new(move |rng| marks[dist.sample(rng)])
        }
    };

    let mut records = Vec::with_capacity(params.teachers * params.records_per_teacher);
    let mut next_id = 1u64;
    for teacher in 1..=params.teachers {
        let teacher_id = format!("Teacher-{teacher}");
        for _ in 0..params.records_per_teacher {
            let answers = (0..schema.item_count())
                .map(|_| sampler(&mut rng))
                .collect();
            records.push(EvaluationRecord {
                record_id: next_id,
                submitted_at: synth_epoch() + Duration::minutes(next_id as i64 - 1),
                teacher_id: teacher_id.clone(),
                answers,
            });
            next_id += 1;
        }
    }
    RecordSet::new(schema, records).expect("generated records satisfy the schema")
}
