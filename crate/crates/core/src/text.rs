//! Byte-level line splitting that keeps terminators intact.
//!
//! A line is everything up to and including a `\n`. Its terminator is
//! `\r\n` when the byte before the `\n` is a carriage return, `\n`
//! otherwise, and empty for a final line that has no newline. Content
//! never includes the terminator. Concatenating `content + terminator`
//! over all lines reproduces the input exactly.

/// One physical line of a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line<'a> {
    pub content: &'a [u8],
    pub terminator: &'a [u8],
}

impl<'a> Line<'a> {
    /// Splits a raw line (as produced by `read_until(b'\n')`) into content
    /// and terminator.
    pub fn from_raw(raw: &'a [u8]) -> Self {
        let term_len = if raw.ends_with(b"\r\n") {
            2
        } else if raw.ends_with(b"\n") {
            1
        } else {
            0
        };
        let (content, terminator) = raw.split_at(raw.len() - term_len);
        Line {
            content,
            terminator,
        }
    }

    /// Leading run of spaces and tabs.
    pub fn indent(&self) -> &'a [u8] {
        let n = self
            .content
            .iter()
            .take_while(|b| **b == b' ' || **b == b'\t')
            .count();
        &self.content[..n]
    }
}

/// Iterator over the lines of a byte buffer. An empty buffer has no lines;
/// a trailing newline does not start an extra empty line.
pub fn lines(bytes: &[u8]) -> Lines<'_> {
    Lines { rest: bytes }
}

pub struct Lines<'a> {
    rest: &'a [u8],
}

impl<'a> Iterator for Lines<'a> {
    type Item = Line<'a>;

    fn next(&mut self) -> Option<Line<'a>> {
        if self.rest.is_empty() {
            return None;
        }
        let end = match self.rest.iter().position(|b| *b == b'\n') {
            Some(i) => i + 1,
            None => self.rest.len(),
        };
        let (raw, rest) = self.rest.split_at(end);
        self.rest = rest;
        Some(Line::from_raw(raw))
    }
}

/// Number of lines as counted by [`lines`].
pub fn line_count(bytes: &[u8]) -> usize {
    let newlines = bytes.iter().filter(|b| **b == b'\n').count();
    if bytes.last().is_some_and(|b| *b != b'\n') {
        newlines + 1
    } else {
        newlines
    }
}

/// The first terminator found in the buffer, or `\n` when there is none.
pub fn dominant_terminator(bytes: &[u8]) -> &'static [u8] {
    for line in lines(bytes) {
        match line.terminator {
            b"\r\n" => return b"\r\n",
            b"\n" => return b"\n",
            _ => {}
        }
    }
    b"\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_preserves_bytes() {
        let input = b"a\r\nb\nc\r\rd";
        let joined: Vec<u8> = lines(input)
            .flat_map(|l| [l.content, l.terminator].concat())
            .collect();
        assert_eq!(joined, input);
        let contents: Vec<&[u8]> = lines(input).map(|l| l.content).collect();
        assert_eq!(contents, vec![&b"a"[..], b"b", b"c\r\rd"]);
    }

    #[test]
    fn counts() {
        assert_eq!(line_count(b""), 0);
        assert_eq!(line_count(b"\n"), 1);
        assert_eq!(line_count(b"a\nb"), 2);
        assert_eq!(line_count(b"a\nb\n"), 2);
        assert_eq!(lines(b"a\nb\n").count(), 2);
    }

    #[test]
    fn terminator_detection() {
        assert_eq!(dominant_terminator(b"x"), b"\n");
        assert_eq!(dominant_terminator(b"x\r\ny\n"), b"\r\n");
        assert_eq!(Line::from_raw(b"  \tx y").indent(), b"  \t");
    }
}
