/// Deterministic supply of fresh variable names. One per pipeline run.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    next: u64,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh { next: 0 }
    }

    /// A supply whose names cannot collide with any variable of `t`.
    pub fn avoiding(t: &crate::term::Term) -> Fresh {
        let mut f = Fresh::new();
        f.reserve(t);
        f
    }

    /// Advances the counter past every `_gN` suffix occurring in `t`.
    pub fn reserve(&mut self, t: &crate::term::Term) {
        for v in crate::subst::all_vars(t) {
            if let Some(n) = suffix(&v) {
                self.next = self.next.max(n);
            }
        }
    }

    /// `base` with any earlier `_gN` suffix replaced by a new one.
    pub fn name(&mut self, base: &str) -> String {
        let stem = strip_suffix(base);
        self.next += 1;
        format!("{}_g{}", stem, self.next)
    }
}

fn suffix(s: &str) -> Option<u64> {
    let i = s.rfind("_g")?;
    s[i + 2..].parse().ok()
}

fn strip_suffix(s: &str) -> &str {
    if let Some(i) = s.rfind("_g") {
        let tail = &s[i + 2..];
        if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) {
            return &s[..i];
        }
    }
    s
}
