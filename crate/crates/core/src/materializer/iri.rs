use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

/// Everything except the RFC 3986 unreserved characters.
const IRI_SAFE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// Percent-encodes a value for substitution into an IRI template.
pub fn iri_safe(value: &str) -> String {
    utf8_percent_encode(value, IRI_SAFE).to_string()
}

/// Checks that `iri` is absolute and contains no characters forbidden in
/// N-Triples IRI references.
pub fn check_iri(iri: &str) -> Result<(), String> {
    let Some(colon) = iri.find(':') else {
        return Err(format!("{iri:?} is not an absolute IRI (no scheme)"));
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return Err(format!("{iri:?} has an invalid scheme"));
    }
    if let Some(bad) =
        iri.chars().find(|&c| c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`'))
    {
        return Err(format!("{iri:?} contains forbidden character {bad:?}"));
    }
    Ok(())
}
