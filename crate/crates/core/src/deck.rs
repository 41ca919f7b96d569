//! Cards, ordered piles, deck descriptions and the split state space.
//!
//! Every pile in this crate uses the same orientation: index 0 is the top.
//! For a player's deck that is the next card to be drawn; for a table pile it
//! is the most recently played card. With that convention placing a card on a
//! pile is a prepend and putting a pile under a deck is a concatenation.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default largest deck for which the split space may be enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeckError {
    #[error("state space too large: {} splits for {cards} cards (cap is {cap} cards)", count_text(*.cards, *.states))]
    TooLarge { cards: usize, states: Option<u128>, cap: usize },
    #[error("left_size {left_size} out of range for a {cards}-card deck")]
    LeftSizeOutOfRange { left_size: usize, cards: usize },
    #[error("unknown card `{0}`")]
    UnknownCard(String),
    #[error("malformed state encoding `{0}`")]
    BadEncoding(String),
    #[error("state is not a partition of the deck: {0}")]
    NotAPartition(String),
}

/// One physical card: a rank from the deck table and the copy number that
/// tells identical-rank cards apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub rank: u8,
    pub copy: u8,
}

impl Card {
    pub const fn new(rank: u8, copy: u8) -> Self {
        Card { rank, copy }
    }
}

/// An ordered sequence of distinct cards, top first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct OrderedPile(Vec<Card>);

impl OrderedPile {
    pub fn new(cards: Vec<Card>) -> Self {
        OrderedPile(cards)
    }

    pub fn empty() -> Self {
        OrderedPile(Vec::new())
    }

    pub fn top(&self) -> Option<Card> {
        self.0.first().copied()
    }

    pub fn bottom(&self) -> Option<Card> {
        self.0.last().copied()
    }

    /// `self ∐ other`: the cards of `self` followed by the cards of `other`.
    pub fn concat(&self, other: &OrderedPile) -> OrderedPile {
        let mut cards = Vec::with_capacity(self.len() + other.len());
        cards.extend_from_slice(&self.0);
        cards.extend_from_slice(&other.0);
        OrderedPile(cards)
    }

    /// Places `card` on top.
    pub fn prepend(&self, card: Card) -> OrderedPile {
        let mut cards = Vec::with_capacity(self.len() + 1);
        cards.push(card);
        cards.extend_from_slice(&self.0);
        OrderedPile(cards)
    }

    /// The pile read bottom to top. For a table pile this is play order.
    pub fn reversed(&self) -> OrderedPile {
        OrderedPile(self.0.iter().rev().copied().collect())
    }

    pub fn has_duplicates(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.len());
        !self.0.iter().all(|c| seen.insert(*c))
    }

    pub fn into_vec(self) -> Vec<Card> {
        self.0
    }
}

impl Deref for OrderedPile {
    type Target = [Card];

    fn deref(&self) -> &[Card] {
        &self.0
    }
}

impl From<Vec<Card>> for OrderedPile {
    fn from(cards: Vec<Card>) -> Self {
        OrderedPile(cards)
    }
}

impl FromIterator<Card> for OrderedPile {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        OrderedPile(iter.into_iter().collect())
    }
}

/// One row of the rank table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankSpec {
    pub name: String,
    pub count: i64,
    /// Cards the opponent must pay when this rank is played; 0 for ordinary cards.
    pub penalty: i64,
}

impl RankSpec {
    pub fn new(name: impl Into<String>, count: i64, penalty: i64) -> Self {
        RankSpec { name: name.into(), count, penalty }
    }
}

/// The card set W, described rank by rank.
///
/// Counts and penalties are kept signed so that malformed input survives
/// parsing and can be reported by [`crate::rules::validate`]; the accessors
/// below treat negative values as zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeckSpec {
    pub ranks: Vec<RankSpec>,
}

impl DeckSpec {
    pub fn new(ranks: Vec<RankSpec>) -> Self {
        DeckSpec { ranks }
    }

    fn count_of(&self, rank: usize) -> usize {
        self.ranks[rank].count.max(0) as usize
    }

    /// Total number of cards.
    pub fn len(&self) -> usize {
        (0..self.ranks.len()).map(|r| self.count_of(r)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All cards, ordered by rank then copy.
    pub fn cards(&self) -> Vec<Card> {
        let mut cards = Vec::with_capacity(self.len());
        for rank in 0..self.ranks.len() {
            for copy in 0..self.count_of(rank) {
                cards.push(Card::new(rank as u8, copy as u8));
            }
        }
        cards
    }

    pub fn contains(&self, card: Card) -> bool {
        (card.rank as usize) < self.ranks.len() && (card.copy as usize) < self.count_of(card.rank as usize)
    }

    /// Position of `card` in [`DeckSpec::cards`].
    pub fn card_index(&self, card: Card) -> usize {
        let offset: usize = (0..card.rank as usize).map(|r| self.count_of(r)).sum();
        offset + card.copy as usize
    }

    pub fn penalty(&self, card: Card) -> u32 {
        self.ranks[card.rank as usize].penalty.max(0) as u32
    }

    pub fn penalties(&self) -> Vec<u32> {
        self.ranks.iter().map(|r| r.penalty.max(0) as u32).collect()
    }

    /// Card label: rank name followed by the copy index, e.g. `J0`.
    pub fn card_name(&self, card: Card) -> String {
        format!("{}{}", self.ranks[card.rank as usize].name, card.copy)
    }

    /// Inverse of [`DeckSpec::card_name`]. Rank names ending in digits are
    /// resolved by trying every rank name that prefixes the label.
    pub fn parse_card(&self, label: &str) -> Result<Card, DeckError> {
        let mut found = None;
        for (rank, spec) in self.ranks.iter().enumerate() {
            let Some(rest) = label.strip_prefix(spec.name.as_str()) else { continue };
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                continue;
            }
            let Ok(copy) = rest.parse::<usize>() else { continue };
            if copy < self.count_of(rank) {
                if found.is_some() {
                    return Err(DeckError::UnknownCard(format!("{label} (ambiguous)")));
                }
                found = Some(Card::new(rank as u8, copy as u8));
            }
        }
        found.ok_or_else(|| DeckError::UnknownCard(label.to_string()))
    }

    pub fn pile_names(&self, pile: &[Card]) -> Vec<String> {
        pile.iter().map(|&c| self.card_name(c)).collect()
    }

    pub fn parse_pile<S: AsRef<str>>(&self, labels: &[S]) -> Result<OrderedPile, DeckError> {
        labels.iter().map(|l| self.parse_card(l.as_ref())).collect()
    }
}

/// Absolute player. Player one holds the left deck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl Serialize for Player {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for Player {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let n = u8::deserialize(deserializer)?;
        Player::from_number(n).ok_or_else(|| serde::de::Error::custom(format!("player must be 1 or 2, got {n}")))
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A state between tricks: player one's deck and player two's deck.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Split {
    pub left: OrderedPile,
    pub right: OrderedPile,
}

impl Split {
    pub fn new(left: impl Into<OrderedPile>, right: impl Into<OrderedPile>) -> Self {
        Split { left: left.into(), right: right.into() }
    }

    pub fn side(&self, player: Player) -> &OrderedPile {
        match player {
            Player::One => &self.left,
            Player::Two => &self.right,
        }
    }

    /// A split with an empty side ends the game.
    pub fn is_absorbing(&self) -> bool {
        self.left.is_empty() || self.right.is_empty()
    }

    /// Checks `left ⊔ right = W`.
    pub fn is_partition_of(&self, deck: &DeckSpec) -> bool {
        is_partition(deck, &[&self.left, &self.right])
    }

    /// Canonical text form, e.g. `L:J0,N3|R:Q1`.
    pub fn encode(&self, deck: &DeckSpec) -> String {
        format!("L:{}|R:{}", deck.pile_names(&self.left).join(","), deck.pile_names(&self.right).join(","))
    }

    pub fn decode(deck: &DeckSpec, text: &str) -> Result<Split, DeckError> {
        let bad = || DeckError::BadEncoding(text.to_string());
        let (l, r) = text.split_once('|').ok_or_else(bad)?;
        let l = l.trim().strip_prefix("L:").ok_or_else(bad)?;
        let r = r.trim().strip_prefix("R:").ok_or_else(bad)?;
        let pile = |s: &str| -> Result<OrderedPile, DeckError> {
            if s.trim().is_empty() {
                return Ok(OrderedPile::empty());
            }
            s.split(',').map(|label| deck.parse_card(label.trim())).collect()
        };
        let split = Split::new(pile(l)?, pile(r)?);
        if !split.is_partition_of(deck) {
            return Err(DeckError::NotAPartition(text.to_string()));
        }
        Ok(split)
    }
}

/// True when the piles together hold every card of `deck` exactly once.
pub fn is_partition(deck: &DeckSpec, piles: &[&[Card]]) -> bool {
    let n = deck.len();
    let mut seen = vec![false; n];
    let mut total = 0;
    for pile in piles {
        for &card in pile.iter() {
            if !deck.contains(card) {
                return false;
            }
            let i = deck.card_index(card);
            if seen[i] {
                return false;
            }
            seen[i] = true;
            total += 1;
        }
    }
    total == n
}

/// `(n+1)!`, the number of ordered splits of `n` distinguishable cards, or
/// `None` when it does not fit in a `u128` (n > 33).
pub fn split_count(n: usize) -> Option<u128> {
    (1..=n as u128 + 1).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

fn count_text(cards: usize, states: Option<u128>) -> String {
    match states {
        Some(s) => s.to_string(),
        None => format!("{}!", cards + 1),
    }
}

/// Dense bijection between the splits of a deck and `0..(n+1)!`.
///
/// A split is read as the permutation `left ++ right` of the deck plus the
/// cut position `|left|`; the index is `rank(permutation) * (n + 1) + |left|`
/// with the permutation ranked by its Lehmer code.
#[derive(Debug, Clone)]
pub struct SplitIndexer {
    deck: DeckSpec,
    cards: Vec<Card>,
    offsets: Vec<usize>,
    factorials: Vec<usize>,
}

impl SplitIndexer {
    pub fn new(deck: &DeckSpec) -> Result<Self, DeckError> {
        Self::with_cap(deck, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(deck: &DeckSpec, cap: usize) -> Result<Self, DeckError> {
        let n = deck.len();
        if n > cap {
            return Err(DeckError::TooLarge { cards: n, states: split_count(n), cap });
        }
        let mut offsets = Vec::with_capacity(deck.ranks.len());
        let mut acc = 0;
        for r in &deck.ranks {
            offsets.push(acc);
            acc += r.count.max(0) as usize;
        }
        let mut factorials = vec![1usize; n + 2];
        for i in 1..n + 2 {
            factorials[i] = factorials[i - 1] * i;
        }
        Ok(SplitIndexer { deck: deck.clone(), cards: deck.cards(), offsets, factorials })
    }

    pub fn deck(&self) -> &DeckSpec {
        &self.deck
    }

    pub fn cards(&self) -> usize {
        self.cards.len()
    }

    /// Number of splits, `(n+1)!`.
    pub fn len(&self) -> usize {
        self.factorials[self.cards.len() + 1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn id(&self, card: Card) -> usize {
        self.offsets[card.rank as usize] + card.copy as usize
    }

    /// Index of a split given as the two piles. The caller guarantees the
    /// piles partition the deck.
    pub fn index_of(&self, left: &[Card], right: &[Card]) -> usize {
        let n = self.cards.len();
        let mut used: u64 = 0;
        let mut rank = 0usize;
        for (pos, &card) in left.iter().chain(right.iter()).enumerate() {
            let id = self.id(card);
            let smaller_unused = (0..id).filter(|&j| used & (1 << j) == 0).count();
            rank += smaller_unused * self.factorials[n - 1 - pos];
            used |= 1 << id;
        }
        rank * (n + 1) + left.len()
    }

    pub fn index(&self, split: &Split) -> usize {
        self.index_of(&split.left, &split.right)
    }

    pub fn left_len(&self, index: usize) -> usize {
        index % (self.cards.len() + 1)
    }

    pub fn is_absorbing(&self, index: usize) -> bool {
        let cut = self.left_len(index);
        cut == 0 || cut == self.cards.len()
    }

    pub fn split(&self, index: usize) -> Split {
        let n = self.cards.len();
        let cut = index % (n + 1);
        let mut rank = index / (n + 1);
        let mut pool: Vec<Card> = self.cards.clone();
        let mut order = Vec::with_capacity(n);
        for pos in 0..n {
            let f = self.factorials[n - 1 - pos];
            let digit = rank / f;
            rank %= f;
            order.push(pool.remove(digit));
        }
        let right = order.split_off(cut);
        Split::new(order, right)
    }
}

/// Every ordered split of the deck, each exactly once, in index order.
pub fn enumerate_splits(deck: &DeckSpec) -> Result<Vec<Split>, DeckError> {
    enumerate_splits_with_cap(deck, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_splits_with_cap(deck: &DeckSpec, cap: usize) -> Result<Vec<Split>, DeckError> {
    let indexer = SplitIndexer::with_cap(deck, cap)?;
    Ok((0..indexer.len()).map(|i| indexer.split(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn plain(n: i64) -> DeckSpec {
        DeckSpec::new(vec![RankSpec::new("N", n, 0)])
    }

    #[test]
    fn one_card_has_two_splits() {
        let deck = plain(1);
        let x = Card::new(0, 0);
        let splits = enumerate_splits(&deck).unwrap();
        assert_eq!(splits.len(), 2);
        assert!(splits.contains(&Split::new(vec![x], vec![])));
        assert!(splits.contains(&Split::new(vec![], vec![x])));
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        for n in 1..=6 {
            let deck = plain(n);
            let splits = enumerate_splits(&deck).unwrap();
            let distinct: HashSet<_> = splits.iter().cloned().collect();
            assert_eq!(distinct.len(), splits.len());
            assert_eq!(Some(splits.len() as u128), split_count(n as usize));
            assert!(splits.iter().all(|s| s.is_partition_of(&deck)));
        }
    }

    #[test]
    fn indexer_round_trips() {
        let deck = DeckSpec::new(vec![RankSpec::new("P", 1, 1), RankSpec::new("N", 3, 0)]);
        let ix = SplitIndexer::new(&deck).unwrap();
        for i in 0..ix.len() {
            let s = ix.split(i);
            assert_eq!(ix.index(&s), i);
            assert_eq!(ix.is_absorbing(i), s.is_absorbing());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_splits(&plain(9)).unwrap_err();
        assert_eq!(err, DeckError::TooLarge { cards: 9, states: Some(3_628_800), cap: 8 });
        assert!(err.to_string().contains("3628800"));
        let err = enumerate_splits(&plain(52)).unwrap_err();
        assert!(err.to_string().contains("53! splits for 52 cards"));
        assert_eq!(split_count(33), Some((1..=34u128).product()));
        assert_eq!(split_count(34), None);
    }

    #[test]
    fn encoding_round_trip() {
        let deck = DeckSpec::new(vec![RankSpec::new("10", 2, 0), RankSpec::new("J", 1, 1), RankSpec::new("N", 4, 0)]);
        let s = Split::new(
            vec![Card::new(1, 0), Card::new(2, 3), Card::new(0, 1)],
            vec![Card::new(0, 0), Card::new(2, 0), Card::new(2, 1), Card::new(2, 2)],
        );
        let text = s.encode(&deck);
        assert_eq!(text, "L:J0,N3,101|R:100,N0,N1,N2");
        assert_eq!(Split::decode(&deck, &text).unwrap(), s);
    }

    #[test]
    fn decode_rejects_non_partitions() {
        let deck = plain(2);
        assert!(matches!(Split::decode(&deck, "L:N0|R:"), Err(DeckError::NotAPartition(_))));
        assert!(matches!(Split::decode(&deck, "L:N0|R:N0,N1"), Err(DeckError::NotAPartition(_))));
        assert!(matches!(Split::decode(&deck, "N0,N1"), Err(DeckError::BadEncoding(_))));
        assert!(matches!(Split::decode(&deck, "L:N7|R:N1"), Err(DeckError::UnknownCard(_))));
        assert_eq!(Split::decode(&deck, "L:|R:N1,N0").unwrap().right.len(), 2);
    }

    #[test]
    fn concat_and_prepend_follow_top_first_order() {
        let a = Card::new(0, 0);
        let b = Card::new(0, 1);
        let c = Card::new(0, 2);
        let l = OrderedPile::new(vec![a]);
        let s = OrderedPile::new(vec![b]).prepend(c);
        assert_eq!(&*s, &[c, b]);
        assert_eq!(&*l.concat(&s), &[a, c, b]);
        assert_eq!(s.top(), Some(c));
        assert_eq!(s.bottom(), Some(b));
    }
}
