//! Closed word-level vocabulary for the character-level number tokenizer.

use std::collections::HashMap;

use crate::datagen::templates;
use crate::datagen::{EntityTable, TaskKind, MASK};
use crate::measure_text::{tokenize_with, PUNCTUATION};
use crate::units::UnitInventory;

pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Builds a vocabulary from tokens in order; repeats are dropped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocab { tokens: Vec::new(), index: HashMap::new() };
        for t in [UNK, CLS, SEP, MASK] {
            v.push(t.to_string());
        }
        for t in tokens {
            v.push(t.into());
        }
        v
    }

    fn push(&mut self, t: String) {
        if !self.index.contains_key(&t) {
            self.index.insert(t.clone(), self.tokens.len() as u32);
            self.tokens.push(t);
        }
    }

    /// Specials, number characters, punctuation, every template word, all
    /// candidate words, every unit of the inventory (prefixed and
    /// prefix-free) and the entity table's names and units.
    pub fn standard(inventory: &UnitInventory, entities: &EntityTable) -> Self {
        let mut words: Vec<String> = Vec::new();
        words.extend("0123456789.E+-".chars().map(String::from));
        words.extend(PUNCTUATION.iter().map(|c| c.to_string()));
        for task in TaskKind::ALL {
            let mut ts = vec![templates::base_template(task)];
            ts.extend(templates::context_templates(task).iter().copied());
            for t in ts {
                let bare = ["{m0}", "{m1}", "{list0}", "{list1}", "{target}", "{ent}"]
                    .iter()
                    .fold(t.to_string(), |acc, p| acc.replace(p, " "));
                words.extend(tokenize_with(&bare, inventory).tokens);
            }
        }
        words.extend(templates::all_candidate_words().into_iter().map(String::from));
        for f in inventory.families() {
            words.push(f.head.to_string());
            words.extend(f.variants.iter().map(|u| u.to_string()));
        }
        for r in entities.records() {
            words.push(r.unit.to_string());
            words.push(r.unit.prefix_free().to_string());
            words.extend(tokenize_with(&r.entity_name, inventory).tokens);
        }
        Self::from_tokens(words)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(0)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
