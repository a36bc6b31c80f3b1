//! Unicode block ranges for the scripts named in language catalogs.
//!
//! Used by the core-character filter: a language's core characters are the
//! code points of its declared scripts, plus whitespace, numbers,
//! punctuation, and (for non-Latin-script languages) Latin letters.
//!
//! Script names are matched case-insensitively after trimming; a few catalog
//! spellings map onto the same ranges (e.g. "Latin-Welsch" -> Latin,
//! "Persian" -> Arabic ranges, "Kanji" -> Han).

/// Inclusive (start, end) code point ranges for one script.
pub type Ranges = &'static [(u32, u32)];

const LATIN: Ranges = &[
    (0x0041, 0x005A),
    (0x0061, 0x007A),
    (0x00C0, 0x00D6),
    (0x00D8, 0x00F6),
    (0x00F8, 0x024F),
    (0x1E00, 0x1EFF),
];
const CYRILLIC: Ranges = &[(0x0400, 0x04FF), (0x0500, 0x052F)];
const GREEK: Ranges = &[(0x0370, 0x03FF), (0x1F00, 0x1FFF)];
const ARABIC: Ranges = &[
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
];
const HEBREW: Ranges = &[(0x0590, 0x05FF)];
const ARMENIAN: Ranges = &[(0x0530, 0x058F)];
const GEORGIAN: Ranges = &[(0x10A0, 0x10FF)];
const DEVANAGARI: Ranges = &[(0x0900, 0x097F)];
const EASTERN_NAGARI: Ranges = &[(0x0980, 0x09FF)];
const GURMUKHI: Ranges = &[(0x0A00, 0x0A7F)];
const GUJARATI: Ranges = &[(0x0A80, 0x0AFF)];
const ODIA: Ranges = &[(0x0B00, 0x0B7F)];
const TAMIL: Ranges = &[(0x0B80, 0x0BFF)];
const TELUGU: Ranges = &[(0x0C00, 0x0C7F)];
const KANNADA: Ranges = &[(0x0C80, 0x0CFF)];
const MALAYALAM: Ranges = &[(0x0D00, 0x0D7F)];
const SINHALA: Ranges = &[(0x0D80, 0x0DFF)];
const THAI: Ranges = &[(0x0E00, 0x0E7F)];
const LAO: Ranges = &[(0x0E80, 0x0EFF)];
const BURMESE: Ranges = &[(0x1000, 0x109F), (0xAA60, 0xAA7F)];
const KHMER: Ranges = &[(0x1780, 0x17FF), (0x19E0, 0x19FF)];
const ETHIOPIC: Ranges = &[(0x1200, 0x137F), (0x1380, 0x139F)];
const HANGUL: Ranges = &[(0x1100, 0x11FF), (0x3130, 0x318F), (0xAC00, 0xD7AF)];
const HAN: Ranges = &[(0x3400, 0x4DBF), (0x4E00, 0x9FFF), (0xF900, 0xFAFF)];
const KANA: Ranges = &[(0x3040, 0x309F), (0x30A0, 0x30FF), (0x31F0, 0x31FF)];
const CJK_PUNCT: Ranges = &[(0x3000, 0x303F), (0xFF00, 0xFFEF)];

/// Resolves a script name as spelled in a catalog to its code point ranges.
/// Returns `None` for unknown script names.
pub fn ranges_for(script: &str) -> Option<Vec<(u32, u32)>> {
    let key = script.trim().to_ascii_lowercase();
    let ranges: &[Ranges] = match key.as_str() {
        "latin" | "latin-welsch" => &[LATIN],
        "cyrillic" => &[CYRILLIC],
        "greek" => &[GREEK],
        "arabic" | "persian" => &[ARABIC],
        "hebrew" => &[HEBREW],
        "armenian" => &[ARMENIAN],
        "georgian" => &[GEORGIAN],
        "devanagari" => &[DEVANAGARI],
        "eastern-nagari" | "eastern nagari" | "bengali" => &[EASTERN_NAGARI],
        "gurmukhi" => &[GURMUKHI],
        "gujarati" => &[GUJARATI],
        "odia" | "oriya" => &[ODIA],
        "tamil" => &[TAMIL],
        "telugu" => &[TELUGU],
        "kannada" => &[KANNADA],
        "malayalam" => &[MALAYALAM],
        "sinhala" => &[SINHALA],
        "thai" => &[THAI],
        "lao" => &[LAO],
        "burmese" | "myanmar" => &[BURMESE],
        "khmer" => &[KHMER],
        "ge'ez" | "geez" | "ethiopic" => &[ETHIOPIC],
        "hangul" => &[HANGUL],
        "chinese" | "han" => &[HAN, CJK_PUNCT],
        "kanji" => &[HAN],
        "kana" => &[KANA, CJK_PUNCT],
        _ => return None,
    };
    Some(ranges.iter().flat_map(|r| r.iter().copied()).collect())
}

/// True when the script writes with Latin letters, which disables the
/// Latin-character exception in core-character filtering.
pub fn is_latin(script: &str) -> bool {
    matches!(
        script.trim().to_ascii_lowercase().as_str(),
        "latin" | "latin-welsch"
    )
}

pub fn char_in_ranges(c: char, ranges: &[(u32, u32)]) -> bool {
    let cp = c as u32;
    ranges.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}
