//! JSON rule configuration.

use std::path::Path;

use bmn_core::rules::{Diagnostic, FixtureTable, Indexing, RelativePlayer, RuleDecision, Verdict};
use bmn_core::{validate, DeckSpec, PickupOrder, Player, RankSpec, RuleSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pickup {
    Played,
    Reverse,
}

impl From<Pickup> for PickupOrder {
    fn from(p: Pickup) -> Self {
        match p {
            Pickup::Played => PickupOrder::Played,
            Pickup::Reverse => PickupOrder::ReversePlayed,
        }
    }
}

/// One row of an explicit rule table. `pile` lists card names top-first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureEntry {
    pub pile: Vec<String>,
    pub verdict: Verdict,
    pub who: RelativePlayer,
}

fn relative() -> Indexing {
    Indexing::Relative
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub ranks: Vec<RankSpec>,
    #[serde(default = "relative")]
    pub indexing: Indexing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_table: Option<Vec<FixtureEntry>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub court_free: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub games: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deals: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket_width: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pickup: Option<Pickup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_leader: Option<Player>,
}

/// A problem with the configuration, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Invalid {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> Invalid {
    Invalid { key: key.into(), message: message.into() }
}

/// serde_json names the field in its message but not as a separate value.
fn key_of_serde_error(message: &str) -> String {
    for marker in ["missing field `", "unknown field `", "duplicate field `"] {
        if let Some(rest) = message.split_once(marker).map(|x| x.1) {
            if let Some((key, _)) = rest.split_once('`') {
                return key.to_string();
            }
        }
    }
    "config".to_string()
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, Vec<Invalid>> {
        serde_json::from_str::<Config>(text).map_err(|e| {
            let message = e.to_string();
            vec![invalid(key_of_serde_error(&message), message)]
        })
    }

    pub fn load(path: &Path) -> Result<Config, Vec<Invalid>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![invalid("config", format!("cannot read {}: {e}", path.display()))])?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn deck(&self) -> DeckSpec {
        DeckSpec::new(self.ranks.clone())
    }

    /// Builds the rule spec, reporting every structural problem found.
    pub fn rules(&self) -> Result<RuleSpec, Vec<Invalid>> {
        let mut errors = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errors.push(invalid(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let deck = self.deck();
        let fixture = match (&self.indexing, &self.fixture_table) {
            (Indexing::Relative, Some(_)) => {
                errors.push(invalid("fixture_table", "only allowed with \"indexing\": \"absolute_fixture\""));
                None
            }
            (Indexing::AbsoluteFixture, Some(rows)) => {
                let mut table = FixtureTable::new();
                for (i, row) in rows.iter().enumerate() {
                    match deck.parse_pile(&row.pile) {
                        Ok(pile) if !pile.is_empty() && !pile.has_duplicates() => {
                            table.insert(&pile, RuleDecision { verdict: row.verdict, who: row.who })
                        }
                        Ok(_) => errors.push(invalid(
                            format!("fixture_table[{i}].pile"),
                            "pile must be non-empty without repeated cards",
                        )),
                        Err(e) => errors.push(invalid(format!("fixture_table[{i}].pile"), e.to_string())),
                    }
                }
                Some(table)
            }
            _ => None,
        };
        let rules = RuleSpec::from_parts(deck, self.indexing, fixture, self.court_free);
        for d in validate(&rules) {
            let key = match d {
                Diagnostic::FixtureTooLargeToCheck { .. } => continue,
                Diagnostic::MissingFixtureTable | Diagnostic::PartialFixtureTable { .. } => "fixture_table",
                Diagnostic::NoPenaltyRank => "ranks (or court_free)",
                _ => "ranks",
            };
            errors.push(invalid(key, d.to_string()));
        }
        if let Some(p) = self.p {
            if let Err(e) = check_p(p) {
                errors.push(e);
            }
        }
        if let Some(k) = self.left_size {
            if let Err(e) = check_left_size(k, rules.deck().len()) {
                errors.push(e);
            }
        }
        if errors.is_empty() {
            Ok(rules)
        } else {
            Err(errors)
        }
    }
}

pub fn check_p(p: f64) -> Result<(), Invalid> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid("p", format!("p must lie strictly inside (0,1), got {p}")))
    }
}

pub fn check_left_size(k: usize, cards: usize) -> Result<(), Invalid> {
    if k <= cards {
        Ok(())
    } else {
        Err(invalid("left_size", format!("left_size {k} exceeds the {cards}-card deck")))
    }
}
