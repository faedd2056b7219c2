//! Shredding environments: ordered maps from graph variables to graph terms.

use nrc_core::{free_vars, typecheck, Ctx, Signature, Term, Type, TypeError};
use std::fmt;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShreddingEnv {
    entries: Vec<(String, Term)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("graph variable {0} is defined twice")]
    Duplicate(String),
    #[error("entry {entry} refers to {target}, which is not defined to its left")]
    ForwardReference { entry: String, target: String },
    #[error("entry {0} has type {1}, not a graph type")]
    NotGraph(String, Type),
    #[error("entry {0} is ill-typed: {1}")]
    Type(String, TypeError),
}

impl ShreddingEnv {
    pub fn new() -> ShreddingEnv {
        ShreddingEnv::default()
    }

    pub fn entries(&self) -> &[(String, Term)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, phi: &str) -> bool {
        self.lookup(phi).is_some()
    }

    pub fn lookup(&self, phi: &str) -> Option<&Term> {
        self.entries.iter().find(|(p, _)| p == phi).map(|(_, t)| t)
    }

    /// `self` extended on the right with `phi ↦ t`.
    pub fn extend(mut self, phi: &str, t: Term) -> ShreddingEnv {
        self.entries.push((phi.to_string(), t));
        self
    }

    /// The entries whose variable is not in `phis`, in order.
    pub fn without(&self, phis: &[String]) -> ShreddingEnv {
        ShreddingEnv { entries: self.entries.iter().filter(|(p, _)| !phis.contains(p)).cloned().collect() }
    }

    /// Graph variables in definition order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(p, _)| p.as_str())
    }
}

impl fmt::Display for ShreddingEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, t) in &self.entries {
            writeln!(f, "{} = {}", p, nrc_core::pretty(t))?;
        }
        Ok(())
    }
}

/// The typing context `ty(env)`, checking each entry against its predecessors.
pub fn typecheck_env(env: &ShreddingEnv, sig: &Signature) -> Result<Ctx, EnvError> {
    let mut ctx = Ctx::new();
    for (i, (phi, t)) in env.entries.iter().enumerate() {
        if ctx.lookup(phi).is_some() {
            return Err(EnvError::Duplicate(phi.clone()));
        }
        let later: Vec<&str> = env.entries[i..].iter().map(|(p, _)| p.as_str()).collect();
        if let Some(target) = free_vars(t).into_iter().find(|v| later.contains(&v.as_str())) {
            return Err(EnvError::ForwardReference { entry: phi.clone(), target });
        }
        let ty = typecheck(&ctx, t, sig).map_err(|e| EnvError::Type(phi.clone(), e))?;
        if !matches!(ty, Type::Graph(..)) {
            return Err(EnvError::NotGraph(phi.clone(), ty));
        }
        ctx.push(phi, ty);
    }
    Ok(ctx)
}
