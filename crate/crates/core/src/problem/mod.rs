//! The synthetic verifiable-reward task.
//!
//! A [`Problem`] hides an answer sequence of `L = 4` tokens over an alphabet
//! of `A` symbols. The verifier pays 1 for an exact match and 0 otherwise.
//! Each problem carries a three-tier hint hierarchy whose levels reveal the
//! first `l` answer positions at increasing granularity:
//!
//! | tier      | granularity | class of token `v` |
//! |-----------|-------------|--------------------|
//! | knowledge | parity      | `v % 2`            |
//! | planning  | quartile    | `v / 2`            |
//! | solution  | exact       | `v`                |

pub mod bank_io;
pub mod hint_doc;

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, TAG_BANK};

/// Number of progressive levels per hint tier; also the answer length.
pub const HINT_LEVELS: usize = 4;

/// One task instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub id: usize,
    #[serde(rename = "A")]
    pub alphabet: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub answer: Vec<usize>,
    /// Initial logit boost on the answer tokens.
    pub beta: f64,
}

impl Problem {
    /// Checks the structural invariants of a single problem.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.length != HINT_LEVELS {
            return Err(format!("L must be {HINT_LEVELS}, got {}", self.length));
        }
        if self.alphabet < 4 || !self.alphabet.is_multiple_of(2) {
            return Err(format!("A must be even and >= 4, got {}", self.alphabet));
        }
        if self.answer.len() != self.length {
            return Err(format!(
                "answer has {} tokens, expected {}",
                self.answer.len(),
                self.length
            ));
        }
        if let Some(&tok) = self.answer.iter().find(|&&t| t >= self.alphabet) {
            return Err(format!("answer token {tok} outside [0, {})", self.alphabet));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        Ok(())
    }
}

/// Verifier: 1 iff `tokens` equals the answer elementwise.
pub fn verify(problem: &Problem, tokens: &[usize]) -> Result<f64> {
    if tokens.len() != problem.length {
        return Err(Error::LengthMismatch {
            expected: problem.length,
            found: tokens.len(),
        });
    }
    Ok(if tokens == problem.answer.as_slice() {
        1.0
    } else {
        0.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintCategory {
    Knowledge,
    Planning,
    Solution,
}

impl HintCategory {
    pub const ALL: [HintCategory; 3] = [
        HintCategory::Knowledge,
        HintCategory::Planning,
        HintCategory::Solution,
    ];

    pub fn granularity(self) -> Granularity {
        match self {
            HintCategory::Knowledge => Granularity::Parity,
            HintCategory::Planning => Granularity::Quartile,
            HintCategory::Solution => Granularity::Exact,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HintCategory::Knowledge => "knowledge",
            HintCategory::Planning => "planning",
            HintCategory::Solution => "solution",
        }
    }
}

impl fmt::Display for HintCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How much of a token a constraint pins down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Parity,
    Quartile,
    Exact,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [
        Granularity::Parity,
        Granularity::Quartile,
        Granularity::Exact,
    ];

    /// Class index of `token` under this granularity.
    pub fn class_of(self, token: usize) -> usize {
        match self {
            Granularity::Parity => token % 2,
            Granularity::Quartile => token / 2,
            Granularity::Exact => token,
        }
    }

    /// Number of distinct classes for an alphabet of size `alphabet`.
    pub fn class_count(self, alphabet: usize) -> usize {
        match self {
            Granularity::Parity => 2,
            Granularity::Quartile => alphabet / 2,
            Granularity::Exact => alphabet,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Identifies one cumulative hint `C_c^l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HintRef {
    pub category: HintCategory,
    level: u8,
}

impl HintRef {
    pub fn new(category: HintCategory, level: usize) -> Result<Self> {
        if !(1..=HINT_LEVELS).contains(&level) {
            return Err(Error::Precondition(format!(
                "hint level must be in 1..={HINT_LEVELS}, got {level}"
            )));
        }
        Ok(Self {
            category,
            level: level as u8,
        })
    }

    pub fn level(&self) -> usize {
        self.level as usize
    }
}

impl fmt::Display for HintRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.category, self.level)
    }
}

/// A per-position statement about the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    pub position: usize,
    pub granularity: Granularity,
    pub value: usize,
}

impl Constraint {
    pub fn admits(&self, token: usize) -> bool {
        self.granularity.class_of(token) == self.value
    }
}

/// Resolves a hint reference to the constraints it reveals: one constraint
/// per position `0..level` at the tier's granularity.
pub fn hint_content(problem: &Problem, hint: HintRef) -> Vec<Constraint> {
    let granularity = hint.category.granularity();
    problem.answer[..hint.level()]
        .iter()
        .enumerate()
        .map(|(position, &tok)| Constraint {
            position,
            granularity,
            value: granularity.class_of(tok),
        })
        .collect()
}

/// The full 3 x 4 hierarchy for one problem, resolved to constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct HintHierarchy {
    /// `levels[c][l - 1]` holds the cumulative constraints for tier `c`, level `l`.
    levels: [[Vec<Constraint>; HINT_LEVELS]; 3],
}

impl HintHierarchy {
    pub fn for_problem(problem: &Problem) -> Self {
        let levels = HintCategory::ALL.map(|c| {
            std::array::from_fn(|i| {
                hint_content(problem, HintRef::new(c, i + 1).expect("level in range"))
            })
        });
        Self { levels }
    }

    pub fn cumulative(&self, hint: HintRef) -> &[Constraint] {
        &self.levels[hint.category.index()][hint.level() - 1]
    }

    /// The item newly added at `hint.level()` (`h_c^l`).
    pub fn item(&self, hint: HintRef) -> &Constraint {
        &self.cumulative(hint)[hint.level() - 1]
    }
}

/// An ordered collection of problems with dense ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBank {
    pub problems: Vec<Problem>,
    pub bank_seed: u64,
    pub schema_version: u32,
}

pub const BANK_SCHEMA_VERSION: u32 = 1;

impl ProblemBank {
    pub fn new(problems: Vec<Problem>, bank_seed: u64) -> Result<Self> {
        let bank = Self {
            problems,
            bank_seed,
            schema_version: BANK_SCHEMA_VERSION,
        };
        bank.validate()?;
        Ok(bank)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.problems.iter().enumerate() {
            if p.id != i {
                return Err(Error::Precondition(format!(
                    "problem ids must be dense: position {i} holds id {}",
                    p.id
                )));
            }
            p.validate().map_err(Error::Precondition)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: usize) -> Result<&Problem> {
        self.problems.get(id).ok_or(Error::UnknownProblem(id))
    }

    /// Alphabet shared by all problems (the first problem's, or 0 when empty).
    pub fn alphabet(&self) -> usize {
        self.problems.first().map_or(0, |p| p.alphabet)
    }
}

/// Fractions of easy, medium and hard problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifficultyMix {
    pub easy: f64,
    pub medium: f64,
    pub hard: f64,
}

impl DifficultyMix {
    pub fn new(easy: f64, medium: f64, hard: f64) -> Result<Self> {
        let mix = Self { easy, medium, hard };
        mix.validate()?;
        Ok(mix)
    }

    fn validate(&self) -> Result<()> {
        let parts = [self.easy, self.medium, self.hard];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidMix(format!(
                "fractions must lie in [0, 1], got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMix(format!(
                "fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    /// Largest-remainder split of `count` into tier sizes; ties go to the easier tier.
    pub fn tier_counts(&self, count: usize) -> [usize; 3] {
        let exact = [self.easy, self.medium, self.hard].map(|f| f * count as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let mut remaining = count - counts.iter().sum::<usize>();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if remaining == 0 {
                break;
            }
            counts[i] += 1;
            remaining -= 1;
        }
        counts
    }
}

/// Difficulty tier of a generated problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Easy,
    Medium,
    Hard,
}

impl Tier {
    pub fn beta_range(self) -> (f64, f64) {
        match self {
            Tier::Easy => (2.0, 4.0),
            Tier::Medium => (0.5, 1.5),
            Tier::Hard => (0.0, 0.0),
        }
    }

    /// Classifies a beta value back into the tier whose range contains it.
    pub fn of_beta(beta: f64) -> Option<Tier> {
        [Tier::Easy, Tier::Medium, Tier::Hard]
            .into_iter()
            .find(|t| {
                let (lo, hi) = t.beta_range();
                beta >= lo && beta <= hi
            })
    }
}

/// Generates a deterministic bank of `count` problems.
///
/// Tier sizes are fixed by [`DifficultyMix::tier_counts`]; the tier labels are
/// then shuffled across ids. Answers are uniform over `[0, A)^L`.
pub fn generate_bank(
    seed: u64,
    count: usize,
    alphabet: usize,
    length: usize,
    mix: DifficultyMix,
) -> Result<ProblemBank> {
    if count == 0 {
        return Err(Error::InvalidDimension("count must be positive".into()));
    }
    if length != HINT_LEVELS {
        return Err(Error::InvalidDimension(format!(
            "length must equal the number of hint levels ({HINT_LEVELS}), got {length}"
        )));
    }
    if alphabet < 4 || !alphabet.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "alphabet must be even and >= 4, got {alphabet}"
        )));
    }
    mix.validate()?;

    let [easy, medium, hard] = mix.tier_counts(count);
    let mut tiers: Vec<Tier> = std::iter::repeat_n(Tier::Easy, easy)
        .chain(std::iter::repeat_n(Tier::Medium, medium))
        .chain(std::iter::repeat_n(Tier::Hard, hard))
        .collect();
    let mut rng = rng::stream(seed, &[TAG_BANK]);
    tiers.shuffle(&mut rng);

    let problems = tiers
        .into_iter()
        .enumerate()
        .map(|(id, tier)| {
            let (lo, hi) = tier.beta_range();
            let beta = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            let answer = (0..length).map(|_| rng.gen_range(0..alphabet)).collect();
            Problem {
                id,
                alphabet,
                length,
                answer,
                beta,
            }
        })
        .collect();
    ProblemBank::new(problems, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(answer: Vec<usize>) -> Problem {
        Problem {
            id: 0,
            alphabet: 8,
            length: 4,
            answer,
            beta: 0.0,
        }
    }

    fn href(c: HintCategory, l: usize) -> HintRef {
        HintRef::new(c, l).unwrap()
    }

    #[test]
    fn all_hard_mix() {
        let bank = generate_bank(7, 10, 8, 4, DifficultyMix::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(bank.len(), 10);
        assert!(bank.problems.iter().all(|p| p.beta == 0.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let mix = DifficultyMix::new(0.2, 0.3, 0.5).unwrap();
        let a = generate_bank(7, 10, 8, 4, mix).unwrap();
        let b = generate_bank(7, 10, 8, 4, mix).unwrap();
        assert_eq!(a, b);
        let c = generate_bank(8, 10, 8, 4, mix).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_tier_counts() {
        let bank =
            generate_bank(3, 200, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap();
        let mut counts = [0usize; 3];
        for p in &bank.problems {
            match Tier::of_beta(p.beta).unwrap() {
                Tier::Easy => counts[0] += 1,
                Tier::Medium => counts[1] += 1,
                Tier::Hard => counts[2] += 1,
            }
        }
        assert_eq!(counts, [50, 100, 50]);
    }

    #[test]
    fn tier_counts_sum_to_total() {
        let mix = DifficultyMix::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_eq!(mix.tier_counts(10), [4, 3, 3]);
        assert_eq!(mix.tier_counts(1).iter().sum::<usize>(), 1);
    }

    #[test]
    fn rejects_bad_dimensions_and_mix() {
        let mix = DifficultyMix::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            generate_bank(1, 5, 8, 5, mix),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            generate_bank(1, 5, 7, 4, mix),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            generate_bank(1, 0, 8, 4, mix),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            DifficultyMix::new(0.5, 0.5, 0.1),
            Err(Error::InvalidMix(_))
        ));
        assert!(matches!(
            DifficultyMix::new(-0.1, 0.6, 0.5),
            Err(Error::InvalidMix(_))
        ));
    }

    #[test]
    fn verify_examples() {
        let p = Problem {
            alphabet: 8,
            ..problem(vec![1, 2, 3, 4])
        };
        assert_eq!(verify(&p, &[1, 2, 3, 4]).unwrap(), 1.0);
        assert_eq!(verify(&p, &[1, 2, 3, 5]).unwrap(), 0.0);
        assert!(matches!(
            verify(&p, &[1, 2, 3]),
            Err(Error::LengthMismatch {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn uniform_success_probability_by_enumeration() {
        let p = problem(vec![1, 2, 3, 4]);
        let mut hits = 0usize;
        let mut total = 0usize;
        for code in 0..8usize.pow(4) {
            let seq: Vec<usize> = (0..4).map(|i| (code / 8usize.pow(i)) % 8).collect();
            hits += verify(&p, &seq).unwrap() as usize;
            total += 1;
        }
        assert_eq!(total, 4096);
        assert_eq!(hits, 1);
    }

    #[test]
    fn hint_content_examples() {
        let p = problem(vec![5, 0, 7, 2]);
        let c = |position, granularity, value| Constraint {
            position,
            granularity,
            value,
        };
        assert_eq!(
            hint_content(&p, href(HintCategory::Solution, 2)),
            vec![c(0, Granularity::Exact, 5), c(1, Granularity::Exact, 0)]
        );
        assert_eq!(
            hint_content(&p, href(HintCategory::Knowledge, 1)),
            vec![c(0, Granularity::Parity, 1)]
        );
        assert_eq!(
            hint_content(&p, href(HintCategory::Planning, 3)),
            vec![
                c(0, Granularity::Quartile, 2),
                c(1, Granularity::Quartile, 0),
                c(2, Granularity::Quartile, 3)
            ]
        );
    }

    #[test]
    fn hint_level_bounds() {
        assert!(HintRef::new(HintCategory::Knowledge, 0).is_err());
        assert!(HintRef::new(HintCategory::Knowledge, 5).is_err());
        assert_eq!(HintRef::new(HintCategory::Planning, 4).unwrap().level(), 4);
    }

    #[test]
    fn hierarchy_items_extend_cumulatively() {
        let p = problem(vec![5, 0, 7, 2]);
        let h = HintHierarchy::for_problem(&p);
        for c in HintCategory::ALL {
            for l in 1..=4 {
                let r = href(c, l);
                assert_eq!(h.cumulative(r).len(), l);
                assert_eq!(h.item(r).position, l - 1);
                if l > 1 {
                    assert_eq!(&h.cumulative(r)[..l - 1], h.cumulative(href(c, l - 1)));
                }
            }
        }
    }

    #[test]
    fn validation_catches_out_of_range_answer() {
        let mut p = problem(vec![1, 2, 3, 8]);
        assert!(p.validate().is_err());
        p.answer[3] = 7;
        assert!(p.validate().is_ok());
        p.beta = -1.0;
        assert!(p.validate().is_err());
    }
}
