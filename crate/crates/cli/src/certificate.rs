//! Machine-readable certificates and their re-check.

use anyhow::{bail, Context as _, Result};
use endo_dga::homology::WitnessCheck;
use endo_dga::{differential, Cochain, CochainRecord, Context, ScalarMode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextInfo {
    pub p: u64,
    pub precision: u32,
    pub length: usize,
    pub unit: u64,
    #[serde(default)]
    pub scalars: ScalarMode,
}

impl ContextInfo {
    pub fn of(ctx: &Context) -> Self {
        Self {
            p: ctx.p(),
            precision: ctx.precision(),
            length: ctx.length(),
            unit: ctx.unit(),
            scalars: ctx.scalars(),
        }
    }

    pub fn build(&self) -> Result<Context> {
        Ok(Context::builder(self.p)
            .precision(self.precision)
            .length(self.length)
            .unit(self.unit)
            .scalars(self.scalars)
            .build()?)
    }
}

/// A target cochain and the witness claimed to bound it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub target: CochainRecord,
    pub witness: CochainRecord,
}

impl WitnessRecord {
    pub fn new(target: &Cochain, witness: &Cochain) -> Self {
        Self {
            target: target.to_record(),
            witness: witness.to_record(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub context: ContextInfo,
    pub command: String,
    pub inputs: Value,
    pub results: Vec<Value>,
    pub witness_checks: Vec<WitnessCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessRecord>,
    pub passed: bool,
    pub version: String,
}

impl Certificate {
    pub fn new(ctx: &Context, command: &str, inputs: Value) -> Self {
        Self {
            context: ContextInfo::of(ctx),
            command: command.to_string(),
            inputs,
            results: Vec::new(),
            witness_checks: Vec::new(),
            witnesses: Vec::new(),
            passed: true,
            version: endo_dga::VERSION.to_string(),
        }
    }

    /// Records a witness check together with the cochains behind it.
    pub fn witness(&mut self, target: &Cochain, witness: &Cochain) -> Result<()> {
        let check = WitnessCheck::of(target, witness)?;
        self.passed &= check.residue_zero;
        self.witness_checks.push(check);
        self.witnesses.push(WitnessRecord::new(target, witness));
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Recheck {
    pub checked: usize,
    /// Recomputed residues that disagree with the recorded ones.
    pub mismatches: Vec<usize>,
    /// Whether every recomputed witness maps onto its target.
    pub witnesses_valid: bool,
    /// Whether the recomputation reproduces the recorded pass status.
    pub reproduced: bool,
}

/// Rebuilds the context and recomputes d(witness) == target for every recorded witness.
pub fn recheck(cert: &Certificate) -> Result<Recheck> {
    if cert.witnesses.len() != cert.witness_checks.len() {
        bail!(
            "certificate lists {} witness checks but {} witnesses",
            cert.witness_checks.len(),
            cert.witnesses.len()
        );
    }
    let ctx = cert.context.build().context("rebuilding the certificate context")?;
    let mut mismatches = Vec::new();
    let mut valid = true;
    for (idx, (check, record)) in cert.witness_checks.iter().zip(&cert.witnesses).enumerate() {
        let target = Cochain::from_record(&ctx, &record.target)?;
        let witness = Cochain::from_record(&ctx, &record.witness)?;
        let ok = target.degree() == check.degree && differential(&witness)? == target;
        valid &= ok;
        if ok != check.residue_zero {
            mismatches.push(idx);
        }
    }
    let witnesses_ok_recorded = cert.witness_checks.iter().all(|w| w.residue_zero);
    Ok(Recheck {
        checked: cert.witnesses.len(),
        reproduced: mismatches.is_empty() && (valid == witnesses_ok_recorded),
        mismatches,
        witnesses_valid: valid,
    })
}
