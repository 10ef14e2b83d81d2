//! The four prompt templates and slot substitution.

use sha2::{Digest, Sha256};

/// A prompt template with `{slot}` placeholders. Templates that write
/// literal braces doubled (`{{`) get them collapsed on render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: &'static str,
    pub text: &'static str,
    pub slots: &'static [&'static str],
}

pub const STRUCTURE: PromptTemplate =
    PromptTemplate { name: "structure", text: include_str!("prompts/structure.txt"), slots: &[] };

pub const TEMPLATE_MERGE: PromptTemplate = PromptTemplate {
    name: "template_merge",
    text: include_str!("prompts/template_merge.txt"),
    slots: &["structure_result"],
};

pub const TEMPLATE_SPEC: PromptTemplate = PromptTemplate {
    name: "template_spec",
    text: include_str!("prompts/template_spec.txt"),
    slots: &["structure_result", "cleaned_dsl", "template_index"],
};

pub const LEAF_ENCODING: PromptTemplate = PromptTemplate {
    name: "leaf_encoding",
    text: include_str!("prompts/leaf_encoding.txt"),
    slots: &["dsl", "mark_type", "container_id"],
};

pub const ALL: [PromptTemplate; 4] = [STRUCTURE, TEMPLATE_MERGE, TEMPLATE_SPEC, LEAF_ENCODING];

impl PromptTemplate {
    /// Hex SHA-256 of the template text as embedded.
    pub fn sha256(&self) -> String {
        Sha256::digest(self.text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn doubled_braces(&self) -> bool {
        self.text.contains("{{")
    }

    /// Substitutes every slot. Panics if a declared slot has no value, since
    /// that is a programming error rather than an input problem.
    pub fn render(&self, values: &[(&str, &str)]) -> String {
        let doubled = self.doubled_braces();
        let mut out = String::with_capacity(self.text.len());
        let mut rest = self.text;
        while !rest.is_empty() {
            let next = self
                .slots
                .iter()
                .filter_map(|s| rest.find(&format!("{{{s}}}")).map(|at| (at, *s)))
                .min_by_key(|(at, _)| *at);
            let (literal, slot) = match next {
                Some((at, s)) => (&rest[..at], Some(s)),
                None => (rest, None),
            };
            if doubled {
                out.push_str(&literal.replace("{{", "{").replace("}}", "}"));
            } else {
                out.push_str(literal);
            }
            match slot {
                Some(s) => {
                    let v = values
                        .iter()
                        .find(|(k, _)| *k == s)
                        .unwrap_or_else(|| panic!("prompt `{}` needs a value for `{s}`", self.name));
                    out.push_str(v.1);
                    rest = &rest[literal.len() + s.len() + 2..];
                }
                None => rest = "",
            }
        }
        out
    }
}

/// Follow-up message sent once when a response cannot be used.
pub fn corrective(errors: &[String]) -> String {
    let mut s = String::from(
        "Your previous response could not be used. It failed these checks:\n",
    );
    for e in errors {
        s.push_str("- ");
        s.push_str(e);
        s.push('\n');
    }
    s.push_str("\nReturn ONLY the corrected JSON. No extra text.\n");
    s
}
