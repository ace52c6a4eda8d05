//! Adaptive retrieval budgets.
//!
//! A constant retriever fetches the same number of documents for every
//! question. The adaptive policy instead multiplies a base depth by a
//! per-class factor, spending the documents saved on easy questions on
//! the hard ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{BucketAssignment, DifficultyClass};

/// Per-class budget multipliers over a base retrieval depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetPolicy {
    pub easy: u64,
    pub hard: u64,
    pub extra_hard: u64,
    pub base_k: u64,
}

impl Default for BudgetPolicy {
    fn default() -> Self {
        Self {
            easy: 1,
            hard: 4,
            extra_hard: 5,
            base_k: 5,
        }
    }
}

impl BudgetPolicy {
    /// Multipliers and base depth must be at least 1, and budgets must be
    /// monotone in difficulty.
    pub fn validate(&self) -> Result<()> {
        if self.easy < 1 || self.hard < 1 || self.extra_hard < 1 || self.base_k < 1 {
            return Err(Error::InvalidPolicy(
                "multipliers and base_k must be at least 1".into(),
            ));
        }
        if !(self.easy <= self.hard && self.hard <= self.extra_hard) {
            return Err(Error::InvalidPolicy(format!(
                "multipliers must satisfy easy <= hard <= extra_hard, got ({}, {}, {})",
                self.easy, self.hard, self.extra_hard
            )));
        }
        Ok(())
    }

    fn multiplier(&self, class: DifficultyClass) -> u64 {
        match class {
            DifficultyClass::Easy => self.easy,
            DifficultyClass::Hard => self.hard,
            DifficultyClass::ExtraHard => self.extra_hard,
        }
    }
}

/// Documents to retrieve for one question of the given class.
pub fn plan_budget(class: DifficultyClass, policy: &BudgetPolicy) -> u64 {
    policy.multiplier(class) * policy.base_k
}

/// One question's planned budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionBudget {
    pub question_id: String,
    pub class: DifficultyClass,
    pub budget: u64,
}

/// A batch plan plus the cost comparison against a constant retriever
/// fetching `base_k` documents per question.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchPlan {
    pub budgets: Vec<QuestionBudget>,
    pub total_documents: u64,
    pub constant_total: u64,
}

/// Plan budgets for a bucketed batch.
pub fn plan_batch(assignments: &[BucketAssignment], policy: &BudgetPolicy) -> Result<BatchPlan> {
    policy.validate()?;
    let budgets: Vec<QuestionBudget> = assignments
        .iter()
        .map(|a| QuestionBudget {
            question_id: a.question_id.clone(),
            class: a.class,
            budget: plan_budget(a.class, policy),
        })
        .collect();
    let total_documents = budgets.iter().map(|b| b.budget).sum();
    let constant_total = policy.base_k * assignments.len() as u64;
    Ok(BatchPlan {
        budgets,
        total_documents,
        constant_total,
    })
}
