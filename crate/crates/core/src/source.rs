//! Source files and positions.
//!
//! All offsets are byte offsets into the LF-normalized text; lines and columns
//! are 1-based, columns count Unicode scalar values.

use std::ops::Range;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub path: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

/// A scenario file with CRLF line endings normalized to LF.
#[derive(Debug, Clone)]
pub struct SourceFile {
    path: Arc<str>,
    text: String,
    line_starts: Vec<usize>,
}

impl SourceFile {
    pub fn new(path: impl Into<Arc<str>>, raw: &str) -> Self {
        let text = raw.replace("\r\n", "\n");
        let line_starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .collect();
        SourceFile {
            path: path.into(),
            text,
            line_starts,
        }
    }

    pub fn path(&self) -> &Arc<str> {
        &self.path
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// 1-based (line, col) of a byte offset.
    pub fn position(&self, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.text.len());
        let line = self.line_starts.partition_point(|&s| s <= offset) - 1;
        let start = self.line_starts[line];
        let col = self.text[start..offset].chars().count() + 1;
        (line as u32 + 1, col as u32)
    }

    pub fn span(&self, range: Range<usize>) -> SourceSpan {
        let (start_line, start_col) = self.position(range.start);
        let (end_line, end_col) = self.position(range.end);
        SourceSpan {
            path: self.path.clone(),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Byte offset of a 1-based (line, byte column) pair relative to a
    /// sub-range, clamped to the range and to a char boundary.
    pub fn offset_in(&self, range: Range<usize>, line: usize, byte_col: usize) -> usize {
        let slice = &self.text[range.clone()];
        let mut start = 0;
        for _ in 1..line.max(1) {
            match slice[start..].find('\n') {
                Some(i) => start += i + 1,
                None => break,
            }
        }
        let line_end = slice[start..].find('\n').map_or(slice.len(), |i| start + i);
        let mut at = (start + byte_col.saturating_sub(1)).min(line_end);
        while !slice.is_char_boundary(at) {
            at -= 1;
        }
        range.start + at
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let f = SourceFile::new("f.md", "ab\ncd\n");
        assert_eq!(f.position(0), (1, 1));
        assert_eq!(f.position(1), (1, 2));
        assert_eq!(f.position(3), (2, 1));
        assert_eq!(f.position(6), (3, 1));
    }

    #[test]
    fn crlf_is_normalized() {
        let f = SourceFile::new("f.md", "a\r\nb");
        assert_eq!(f.text(), "a\nb");
        assert_eq!(f.position(2), (2, 1));
    }

    #[test]
    fn columns_count_chars() {
        let f = SourceFile::new("f.md", "äö<x");
        assert_eq!(f.position(4), (1, 3));
    }

    #[test]
    fn offset_in_subrange() {
        let f = SourceFile::new("f.md", "xx{\n  \"a\"}");
        assert_eq!(f.offset_in(2..10, 2, 3), 6);
        assert_eq!(f.offset_in(2..10, 1, 99), 3);
    }
}
