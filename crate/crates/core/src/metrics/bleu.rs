use std::collections::{HashMap, HashSet};

/// Clipped n-gram matches and candidate n-gram total for one order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Counts {
    matched: f64,
    total: f64,
}

fn ngrams<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut map = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *map.entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    map
}

fn counts<T: AsRef<str>>(cand: &[T], reference: &[T], n: usize) -> Counts {
    let c = ngrams(cand, n);
    let r = ngrams(reference, n);
    let mut out = Counts::default();
    for (gram, &count) in &c {
        out.matched += count.min(r.get(gram).copied().unwrap_or(0)) as f64;
        out.total += count as f64;
    }
    out
}

/// Combines per-order counts: geometric mean of precisions × brevity penalty.
///
/// A zero precision at order ≥ 2 is smoothed by adding one to both numerator and
/// denominator; a zero unigram precision makes the score 0.
fn combine(per_order: &[Counts], cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 || per_order.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (i, c) in per_order.iter().enumerate() {
        let p = if c.matched > 0.0 {
            c.matched / c.total
        } else if i == 0 {
            return 0.0;
        } else {
            1.0 / (c.total + 1.0)
        };
        log_sum += p.ln();
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    (bp * (log_sum / per_order.len() as f64).exp()).clamp(0.0, 1.0)
}

/// Sentence BLEU with uniform weights over orders `1..=max_n`.
/// Returns 0 for an empty candidate or reference.
pub fn bleu<T: AsRef<str>>(candidate: &[T], reference: &[T], max_n: usize) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    let per_order: Vec<Counts> = (1..=max_n)
        .map(|n| counts(candidate, reference, n))
        .collect();
    combine(&per_order, candidate.len(), reference.len())
}

/// BLEU variant for code: the unigram term is a recall over the reference in which
/// keyword tokens weigh 5× other tokens, so dropping a keyword costs more than
/// dropping an identifier. Higher orders are the ordinary modified precisions.
pub fn weighted_ngram_match<T: AsRef<str>>(
    candidate: &[T],
    reference: &[T],
    keywords: &HashSet<&str>,
    max_n: usize,
) -> f64 {
    if reference.is_empty() || max_n == 0 {
        return 0.0;
    }
    // integer tallies per weight class keep the sum independent of map order
    let (mut kw, mut other) = ((0usize, 0usize), (0usize, 0usize));
    let c = ngrams(candidate, 1);
    for (gram, &count) in &ngrams(reference, 1) {
        let hit = count.min(c.get(gram).copied().unwrap_or(0));
        let slot = if keywords.contains(gram[0]) {
            &mut kw
        } else {
            &mut other
        };
        slot.0 += hit;
        slot.1 += count;
    }
    let first = Counts {
        matched: kw.0 as f64 + 0.2 * other.0 as f64,
        total: kw.1 as f64 + 0.2 * other.1 as f64,
    };
    let mut per_order = vec![first];
    per_order.extend((2..=max_n).map(|n| counts(candidate, reference, n)));
    combine(&per_order, candidate.len(), reference.len())
}

/// Corpus BLEU: counts and lengths pooled over all pairs before combining.
pub fn corpus_bleu<T: AsRef<str>>(pairs: &[(Vec<T>, Vec<T>)], max_n: usize) -> f64 {
    let mut pooled = vec![Counts::default(); max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (cand, reference) in pairs {
        c_len += cand.len();
        r_len += reference.len();
        for (n, slot) in (1..=max_n).zip(pooled.iter_mut()) {
            let c = counts(cand, reference, n);
            slot.matched += c.matched;
            slot.total += c.total;
        }
    }
    if r_len == 0 {
        return 0.0;
    }
    combine(&pooled, c_len, r_len)
}
