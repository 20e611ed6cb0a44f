use std::collections::BTreeSet;

use crate::corpus::FunctionRecord;
use crate::metrics::tokenize_code;

/// Suggests the APIs a function with the given signature is likely to call next.
pub trait ApiInquirer: Send + Sync {
    /// APIs still to come after `history`; an empty list means "no further API".
    fn recommend(&self, signature: &str, history: &[String]) -> Vec<String>;
}

impl<I: ApiInquirer + ?Sized> ApiInquirer for &I {
    fn recommend(&self, signature: &str, history: &[String]) -> Vec<String> {
        (**self).recommend(signature, history)
    }
}

/// Always recommends the same sequence (minus the history prefix).
#[derive(Debug, Clone, Default)]
pub struct FixedInquirer(pub Vec<String>);

impl ApiInquirer for FixedInquirer {
    fn recommend(&self, _signature: &str, history: &[String]) -> Vec<String> {
        remaining(&self.0, history)
    }
}

#[derive(Debug, Clone)]
struct IndexEntry {
    id: String,
    tokens: BTreeSet<String>,
    apis: Vec<String>,
}

/// Nearest-neighbour inquirer: the API sequence of the indexed record whose signature
/// shares the most identifier sub-words with the query (Jaccard), ties to the smallest id.
#[derive(Debug, Clone, Default)]
pub struct RetrievalInquirer {
    entries: Vec<IndexEntry>,
}

/// Lowercased sub-words of the identifiers in `signature`: `HandleGetRequest` gives
/// `handle`, `get`, `request`; `user_id` gives `user`, `id`.
pub fn identifier_tokens(signature: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for tok in tokenize_code(signature) {
        if !tok
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() || c == '_')
        {
            continue;
        }
        out.extend(split_identifier(&tok));
    }
    out
}

fn split_identifier(ident: &str) -> Vec<String> {
    let chars: Vec<char> = ident.chars().collect();
    let mut words = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if let Some(&prev) = cur.chars().last().as_ref() {
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = (prev.is_lowercase() && c.is_uppercase())
                || (prev.is_uppercase() && c.is_uppercase() && next_lower)
                || (prev.is_ascii_digit() != c.is_ascii_digit());
            if boundary {
                words.push(std::mem::take(&mut cur));
            }
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words.into_iter().map(|w| w.to_lowercase()).collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// The part of `seq` after its longest prefix that agrees with `history`.
fn remaining(seq: &[String], history: &[String]) -> Vec<String> {
    let k = seq.iter().zip(history).take_while(|(a, b)| a == b).count();
    seq[k..].to_vec()
}

impl RetrievalInquirer {
    pub fn build<'a>(records: impl IntoIterator<Item = &'a FunctionRecord>) -> Self {
        let mut entries: Vec<IndexEntry> = records
            .into_iter()
            .map(|r| IndexEntry {
                id: r.id.clone(),
                tokens: identifier_tokens(r.prompt_signature()),
                apis: r.api_names(),
            })
            .collect();
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Id and similarity of the best match, skipping `exclude`.
    pub fn nearest(&self, signature: &str, exclude: Option<&str>) -> Option<(&str, f64)> {
        let query = identifier_tokens(signature);
        let mut best: Option<(&IndexEntry, f64)> = None;
        for e in self
            .entries
            .iter()
            .filter(|e| Some(e.id.as_str()) != exclude)
        {
            let score = jaccard(&query, &e.tokens);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((e, score));
            }
        }
        best.map(|(e, s)| (e.id.as_str(), s))
    }

    pub fn recommend_excluding(
        &self,
        signature: &str,
        history: &[String],
        exclude: Option<&str>,
    ) -> Vec<String> {
        let Some((id, _)) = self.nearest(signature, exclude) else {
            return Vec::new();
        };
        let entry = self
            .entries
            .iter()
            .find(|e| e.id == id)
            .expect("id from index");
        remaining(&entry.apis, history)
    }

    /// View of the index without one record, for leave-one-out evaluation.
    pub fn excluding<'a>(&'a self, id: &'a str) -> LeaveOneOut<'a> {
        LeaveOneOut { index: self, id }
    }
}

impl ApiInquirer for RetrievalInquirer {
    fn recommend(&self, signature: &str, history: &[String]) -> Vec<String> {
        self.recommend_excluding(signature, history, None)
    }
}

pub struct LeaveOneOut<'a> {
    index: &'a RetrievalInquirer,
    id: &'a str,
}

impl ApiInquirer for LeaveOneOut<'_> {
    fn recommend(&self, signature: &str, history: &[String]) -> Vec<String> {
        self.index
            .recommend_excluding(signature, history, Some(self.id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ApiCall;
    use crate::{ByteSpan, SubjectLanguage};

    fn rec(id: &str, sig: &str, apis: &[&str]) -> FunctionRecord {
        FunctionRecord {
            id: id.into(),
            repo_id: "r".into(),
            path: "p.go".into(),
            subject_language: SubjectLanguage::Go,
            library: "gin".into(),
            name: "f".into(),
            signature: format!("{sig} "),
            body: "{}".into(),
            api_calls: apis
                .iter()
                .map(|a| ApiCall {
                    qualified_name: a.to_string(),
                    call_byte_span: ByteSpan::new(0, 0),
                    stmt_byte_span: ByteSpan::new(0, 0),
                    receiver_var: None,
                })
                .collect(),
        }
    }

    fn fixture() -> Vec<FunctionRecord> {
        vec![
            rec(
                "01",
                "func HandleGetRequest(c *gin.Context)",
                &["gin.Context.Query", "gin.Context.JSON"],
            ),
            rec(
                "02",
                "func HandlePost(c *gin.Context)",
                &["gin.Context.BindJSON", "gin.Context.JSON"],
            ),
            rec(
                "03",
                "func GetUser(ctx *gin.Context)",
                &["gin.Context.Param"],
            ),
            rec(
                "04",
                "func Routes(r *gin.Engine)",
                &["gin.RouterGroup.Use", "gin.RouterGroup.GET"],
            ),
            rec(
                "05",
                "func handleGet(c *gin.Context, id int)",
                &["gin.Context.String"],
            ),
        ]
    }

    #[test]
    fn self_retrieval() {
        let recs = fixture();
        let inq = RetrievalInquirer::build(&recs);
        for r in &recs {
            assert_eq!(inq.recommend(r.prompt_signature(), &[]), r.api_names());
        }
    }

    #[test]
    fn splits_identifiers() {
        assert_eq!(
            split_identifier("HandleGetRequest"),
            ["handle", "get", "request"]
        );
        assert_eq!(split_identifier("HTTPServer2"), ["http", "server", "2"]);
        assert_eq!(split_identifier("user_id"), ["user", "id"]);
        assert_eq!(split_identifier("x"), ["x"]);
    }

    #[test]
    fn hand_computed_neighbour() {
        // query {func, handle, get, request, c, gin, context}, 01 left out:
        // 02 {func, handle, post, c, gin, context}            -> 5/8
        // 03 {func, get, user, ctx, gin, context}             -> 4/9
        // 04 {func, routes, r, gin, engine}                   -> 2/10
        // 05 {func, handle, get, c, gin, context, id, int}    -> 6/9
        let recs = fixture();
        let inq = RetrievalInquirer::build(&recs);
        let (id, score) = inq
            .nearest("func HandleGetRequest(c *gin.Context)", Some("01"))
            .unwrap();
        assert_eq!(id, "05");
        assert!((score - 6.0 / 9.0).abs() < 1e-12);
        let loo = inq.excluding("01");
        assert_eq!(
            loo.recommend("func HandleGetRequest(c *gin.Context)", &[]),
            ["gin.Context.String"]
        );
    }

    #[test]
    fn history_suffix_and_empty_index() {
        let recs = fixture();
        let inq = RetrievalInquirer::build(&recs);
        let sig = "func HandleGetRequest(c *gin.Context)";
        assert_eq!(
            inq.recommend(sig, &["gin.Context.Query".into()]),
            ["gin.Context.JSON"]
        );
        assert!(inq
            .recommend(
                sig,
                &["gin.Context.Query".into(), "gin.Context.JSON".into()]
            )
            .is_empty());
        assert!(RetrievalInquirer::default().recommend(sig, &[]).is_empty());
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let recs = vec![
            rec("b", "func F(x int)", &["B"]),
            rec("a", "func F(x int)", &["A"]),
        ];
        let inq = RetrievalInquirer::build(&recs);
        assert_eq!(inq.recommend("func F(x int)", &[]), ["A"]);
    }
}
