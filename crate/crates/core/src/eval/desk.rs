//! Seeded generator for a demographic-like evaluation dataset.
//!
//! Fifteen discrete features (five ordinal, ten nominal) over individuals
//! grouped into households of 1 to 10 people. Household members share
//! location, ethnicity and an income level; per-person features follow a
//! fixed chain of planted dependencies (age drives marital status and
//! education, education drives occupation, and so on).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tabular::{Dataset, Feature, FeatureKind, Schema};

pub const AGE: usize = 0;
pub const STATE: usize = 1;
pub const SEX: usize = 2;
pub const MARITAL: usize = 3;
pub const CHILDREN: usize = 4;
pub const ETHNICITY: usize = 5;
pub const EDUCATION: usize = 6;
pub const OCCUPATION: usize = 7;
pub const HOURS: usize = 8;
pub const INCOME: usize = 9;
pub const RELATIONSHIP: usize = 10;
pub const CITIZENSHIP: usize = 11;
pub const LANGUAGE: usize = 12;
pub const VETERAN: usize = 13;
pub const DISABILITY: usize = 14;

const N_STATES: usize = 30;
const N_ETHNICITIES: usize = 7;
const N_OCCUPATIONS: usize = 18;

const HOUSEHOLD_SIZE_WEIGHTS: [f64; 10] = [0.28, 0.30, 0.15, 0.13, 0.07, 0.03, 0.015, 0.01, 0.0075, 0.0075];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeskConfig {
    pub records: usize,
    pub seed: u64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        Self {
            records: 20_000,
            seed: 0,
        }
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:02}")).collect()
}

pub fn desk_schema() -> Schema {
    use FeatureKind::{Nominal, Ordinal};
    let f = Feature::new;
    Schema::new(vec![
        f(
            "age",
            Ordinal,
            labels(&[
                "0-9", "10-17", "18-24", "25-29", "30-34", "35-39", "40-44", "45-49", "50-54", "55-59", "60-64",
                "65-69", "70-74", "75-79", "80-84", "85+",
            ]),
        ),
        f("state", Nominal, numbered("S", N_STATES)),
        f("sex", Nominal, labels(&["female", "male"])),
        f(
            "marital",
            Nominal,
            labels(&["never_married", "married", "divorced", "widowed", "separated"]),
        ),
        f("children", Ordinal, labels(&["0", "1", "2", "3", "4", "5+"])),
        f("ethnicity", Nominal, numbered("E", N_ETHNICITIES)),
        f(
            "education",
            Ordinal,
            labels(&[
                "none", "primary", "some_high", "high_school", "some_college", "associate", "bachelor", "master",
                "doctorate",
            ]),
        ),
        f("occupation", Nominal, numbered("OCC", N_OCCUPATIONS)),
        f("hours", Ordinal, labels(&["0", "1-14", "15-29", "30-39", "40", "41-49", "50+"])),
        f("income", Ordinal, numbered("INC", 10)),
        f(
            "relationship",
            Nominal,
            labels(&["householder", "spouse", "child", "parent", "other_relative", "non_relative"]),
        ),
        f("citizenship", Nominal, labels(&["native", "naturalized", "non_citizen"])),
        f("language", Nominal, numbered("L", 6)),
        f("veteran", Nominal, labels(&["no", "yes"])),
        f("disability", Nominal, labels(&["no", "yes"])),
    ])
    .expect("desk schema is valid")
}

struct Household {
    state: usize,
    ethnicity: usize,
    wealth: usize,
    citizenship: usize,
}

fn clamp(v: i64, hi: usize) -> u32 {
    v.clamp(0, hi as i64 - 1) as u32
}

/// Weights peaked at `center` with geometric decay `decay` per step.
fn peaked(n: usize, center: f64, decay: f64) -> Vec<f64> {
    (0..n).map(|i| decay.powf((i as f64 - center).abs())).collect()
}

/// Generates `records` rows with household ids `0, 1, ...`. The last
/// household is truncated so the row count is exact.
pub fn generate_desk_dataset(config: &DeskConfig) -> Result<Dataset> {
    if config.records == 0 {
        return Err(Error::param("desk dataset needs at least one record"));
    }
    let schema = Arc::new(desk_schema());
    let root = RandomSource::new(config.seed, 0).fork("desk");
    let mut rng = root.fork("people");

    let state_weights: Vec<f64> = (0..N_STATES).map(|s| 1.0 / (s as f64 + 1.0).powf(0.8)).collect();
    let base_ethnicity = [0.6, 0.13, 0.12, 0.06, 0.04, 0.03, 0.02];

    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(config.records);
    let mut households: Vec<u64> = Vec::with_capacity(config.records);
    let mut hid = 0u64;
    while rows.len() < config.records {
        let size = rng.weighted(&HOUSEHOLD_SIZE_WEIGHTS) + 1;
        let state = rng.weighted(&state_weights);
        let mut eth_w = base_ethnicity.to_vec();
        eth_w[state % N_ETHNICITIES] *= 1.0 + (state % 5) as f64;
        let ethnicity = rng.weighted(&eth_w);
        let citizenship = if ethnicity == 0 {
            rng.weighted(&[0.94, 0.04, 0.02])
        } else {
            rng.weighted(&[0.45 + 0.05 * ethnicity as f64, 0.3, 0.25 - 0.03 * ethnicity as f64])
        };
        let wealth = rng.weighted(&peaked(10, 3.0 + (state % 4) as f64 + (ethnicity == 0) as usize as f64, 0.6));
        let home = Household {
            state,
            ethnicity,
            wealth,
            citizenship,
        };
        let people = person_roles(size, &mut rng);
        let n_children = people.iter().filter(|r| **r == 2).count();
        let head_age = rng.weighted(&peaked(16, 8.0, 0.8)[..]).max(2) as i64;
        let head_sex = rng.below(2) as u32;
        for &relationship in &people {
            if rows.len() == config.records {
                break;
            }
            rows.push(person(&home, relationship, head_age, head_sex, n_children, &mut rng));
            households.push(hid);
        }
        hid += 1;
    }
    Dataset::from_rows(schema, &rows, Some(households))
}

/// Relationship code per member; position 0 is the householder.
fn person_roles(size: usize, rng: &mut RandomSource) -> Vec<u32> {
    let mut roles = vec![0u32];
    if size >= 2 {
        roles.push(if rng.uniform() < 0.65 { 1 } else { 4 + rng.below(2) as u32 });
    }
    for _ in 2..size {
        roles.push([2, 2, 2, 2, 2, 2, 2, 3, 4, 5][rng.below(10)]);
    }
    roles
}

fn person(
    home: &Household,
    relationship: u32,
    head_age: i64,
    head_sex: u32,
    n_children: usize,
    rng: &mut RandomSource,
) -> Vec<u32> {
    let mut r = vec![0u32; 15];
    r[RELATIONSHIP] = relationship;
    r[STATE] = if rng.uniform() < 0.97 { home.state as u32 } else { rng.below(N_STATES) as u32 };
    r[ETHNICITY] = if rng.uniform() < 0.92 { home.ethnicity as u32 } else { rng.below(N_ETHNICITIES) as u32 };

    let age = match relationship {
        0 => head_age,
        1 => head_age + rng.below(3) as i64 - 1,
        2 => (head_age - 5 - rng.below(3) as i64).min(4),
        3 => head_age + 5 + rng.below(2) as i64,
        _ => 2 + rng.below(10) as i64,
    };
    r[AGE] = clamp(age, 16);
    let age = r[AGE] as usize;
    let adult = age >= 2;

    r[SEX] = match relationship {
        0 => head_sex,
        1 if rng.uniform() < 0.95 => 1 - head_sex,
        _ => rng.below(2) as u32,
    };

    r[MARITAL] = if !adult {
        0
    } else {
        match relationship {
            0 | 1 if n_children > 0 || relationship == 1 => {
                if rng.uniform() < 0.85 { 1 } else { [2, 4][rng.below(2)] }
            }
            _ => {
                let widow = if age >= 12 { 3.0 } else { 0.1 };
                let single = if age <= 4 { 6.0 } else { 1.5 };
                rng.weighted(&[single, 1.0, 1.2, widow, 0.4]) as u32
            }
        }
    };

    r[CHILDREN] = match relationship {
        0 | 1 => n_children.min(5) as u32,
        3 => rng.weighted(&[0.1, 0.2, 0.35, 0.2, 0.1, 0.05]) as u32,
        _ if adult && age >= 4 => rng.weighted(&[0.6, 0.2, 0.12, 0.05, 0.02, 0.01]) as u32,
        _ => 0,
    };

    let edu_center = match age {
        0 => 0.0,
        1 => 1.6,
        _ => 2.5 + home.wealth as f64 * 0.45 - if age >= 12 { 1.0 } else { 0.0 },
    };
    r[EDUCATION] = if age == 0 {
        rng.weighted(&[0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]) as u32
    } else {
        rng.weighted(&peaked(9, edu_center, 0.45)) as u32
    };
    let edu = r[EDUCATION] as usize;

    let working = adult && age <= 12 && rng.uniform() < if age >= 11 { 0.45 } else { 0.85 };
    r[OCCUPATION] = if !working {
        0
    } else {
        // Education selects a band of six occupations; sex tilts within it.
        let band = (edu * 2).min(N_OCCUPATIONS - 6);
        let mut w = vec![0.02; N_OCCUPATIONS];
        for (i, slot) in w.iter_mut().enumerate().skip(band.max(1)).take(6) {
            *slot = 1.0 + if (i + r[SEX] as usize).is_multiple_of(2) { 1.5 } else { 0.0 };
        }
        w[0] = 0.0;
        rng.weighted(&w) as u32
    };

    r[HOURS] = if r[OCCUPATION] == 0 {
        if rng.uniform() < 0.9 { 0 } else { 1 }
    } else {
        let center = 3.0 + (r[OCCUPATION] % 4) as f64 * 0.6 + r[SEX] as f64 * 0.5;
        rng.weighted(&peaked(7, center, 0.35)).max(1) as u32
    };

    let income_center = home.wealth as f64 * 0.5 + edu as f64 * 0.35 + r[HOURS] as f64 * 0.4 - if adult { 0.0 } else { 3.0 };
    r[INCOME] = rng.weighted(&peaked(10, income_center, 0.5)) as u32;

    r[CITIZENSHIP] = if rng.uniform() < 0.9 { home.citizenship as u32 } else { rng.below(3) as u32 };
    let eth = r[ETHNICITY] as usize;
    r[LANGUAGE] = if eth == 0 || (r[CITIZENSHIP] == 0 && rng.uniform() < 0.6) {
        if rng.uniform() < 0.95 { 0 } else { 1 + rng.below(5) as u32 }
    } else if rng.uniform() < 0.8 {
        1 + (eth % 5) as u32
    } else {
        rng.below(6) as u32
    };

    let vet_p = if age >= 4 { 0.02 + 0.012 * age as f64 } else { 0.0 } * if r[SEX] == 1 { 1.0 } else { 0.15 };
    r[VETERAN] = (rng.uniform() < vet_p) as u32;
    let dis_p = 0.03 + 0.025 * age as f64 + if r[OCCUPATION] == 0 && adult { 0.05 } else { 0.0 };
    r[DISABILITY] = (rng.uniform() < dis_p) as u32;
    r
}
