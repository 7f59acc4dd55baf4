use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

/// Rows of numbers separated by commas and/or whitespace, flattened row-major,
/// together with the number of columns. Blank lines are skipped. The first
/// non-blank line is taken as a header when it does not parse and more lines follow.
pub fn parse_table(text: &str) -> Result<(Vec<f64>, usize), ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut values = Vec::new();
    let mut dim = None;
    for (pos, &(line, content)) in lines.iter().enumerate() {
        let row = match parse_row(content) {
            Ok(row) => row,
            Err(_) if pos == 0 && lines.len() > 1 => continue,
            Err(message) => return Err(ParseError { line, message }),
        };
        match dim {
            None => dim = Some(row.len()),
            Some(p) if p != row.len() => {
                return Err(ParseError {
                    line,
                    message: format!("expected {p} columns, found {}", row.len()),
                })
            }
            Some(_) => {}
        }
        values.extend(row);
    }
    match dim {
        Some(p) => Ok((values, p)),
        None => Err(ParseError {
            line: 0,
            message: "no observations in input".into(),
        }),
    }
}

fn parse_row(content: &str) -> Result<Vec<f64>, String> {
    content
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(format!("non-finite value '{t}'")),
            Err(_) => Err(format!("cannot parse '{t}' as a number")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_column() {
        assert_eq!(parse_table("0\n0\n1\n1\n").unwrap(), (vec![0.0, 0.0, 1.0, 1.0], 1));
    }

    #[test]
    fn header_and_separators() {
        let text = "a, b\n1, 2\n\n3 4\n5,6";
        assert_eq!(parse_table(text).unwrap(), (vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2));
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(parse_table("abc").unwrap_err().line, 1);
        assert_eq!(parse_table("1\n2\nx\n").unwrap_err().line, 3);
        assert_eq!(parse_table("1 2\n3\n").unwrap_err().line, 2);
        assert_eq!(parse_table("1\nnan\n").unwrap_err().line, 2);
        assert_eq!(parse_table("\n\n").unwrap_err().line, 0);
        assert_eq!(parse_table("x\ny\n").unwrap_err().line, 2);
    }
}
