use std::collections::BTreeSet;

use super::{RbdNode, SystemSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Name(String),
    Open,
    Close,
    Comma,
    At,
    End,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Self {
            chars: source.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn next_token(&mut self) -> Result<(Token, Pos)> {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while !matches!(self.chars.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        let Some(c) = self.bump() else {
            return Ok((Token::End, start));
        };
        let token = match c {
            '(' => Token::Open,
            ')' => Token::Close,
            ',' => Token::Comma,
            '@' => Token::At,
            c if is_name_char(c) => {
                let mut name = String::from(c);
                while let Some(&c) = self.chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    name.push(c);
                    self.bump();
                }
                Token::Name(name)
            }
            other => return Err(syntax(start, format!("unexpected character `{other}`"))),
        };
        Ok((token, start))
    }
}

fn syntax(pos: Pos, message: String) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message,
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: (Token, Pos),
    names: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(Token, Pos)> {
        let next = self.lexer.next_token()?;
        Ok(std::mem::replace(&mut self.current, next))
    }

    fn claim(&mut self, name: &str) -> Result<()> {
        if !self.names.insert(name.to_string()) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    fn node(&mut self) -> Result<RbdNode> {
        let (token, pos) = self.advance()?;
        let Token::Name(name) = token else {
            return Err(syntax(
                pos,
                format!("expected a name, found {}", describe(&token)),
            ));
        };
        match self.current.0 {
            Token::At => {
                self.advance()?;
                let (label_pos, group_pos) = (pos, self.current.1);
                let Token::Name(keyword) = self.advance()?.0 else {
                    return Err(syntax(
                        group_pos,
                        "expected `series` or `parallel` after `@`".into(),
                    ));
                };
                if !matches!(self.current.0, Token::Open) {
                    return Err(syntax(
                        group_pos,
                        "a label must be followed by a group".into(),
                    ));
                }
                let node = self.group(&keyword, group_pos)?;
                if is_keyword(&name) {
                    return Err(syntax(label_pos, format!("`{name}` is reserved")));
                }
                self.claim(&name)?;
                Ok(node.labeled(name))
            }
            Token::Open => self.group(&name, pos),
            _ => {
                if is_keyword(&name) {
                    return Err(syntax(pos, format!("`{name}` must be followed by `(`")));
                }
                self.claim(&name)?;
                Ok(RbdNode::component(name))
            }
        }
    }

    fn group(&mut self, keyword: &str, pos: Pos) -> Result<RbdNode> {
        if !is_keyword(keyword) {
            return Err(syntax(pos, format!("unknown keyword `{keyword}`")));
        }
        self.advance()?; // (
        let mut children = vec![self.node()?];
        loop {
            let (token, at) = self.advance()?;
            match token {
                Token::Comma => children.push(self.node()?),
                Token::Close => break,
                Token::End => {
                    return Err(syntax(
                        at,
                        format!("unclosed `(` opened at {}:{}", pos.line, pos.column),
                    ))
                }
                other => {
                    return Err(syntax(
                        at,
                        format!("expected `,` or `)`, found {}", describe(&other)),
                    ))
                }
            }
        }
        if children.len() < 2 {
            return Err(syntax(
                pos,
                format!(
                    "`{keyword}` group needs at least 2 children, found {}",
                    children.len()
                ),
            ));
        }
        Ok(if keyword == "series" {
            RbdNode::series(children)
        } else {
            RbdNode::parallel(children)
        })
    }
}

fn is_keyword(s: &str) -> bool {
    s == "series" || s == "parallel"
}

fn describe(token: &Token) -> String {
    match token {
        Token::Name(n) => format!("`{n}`"),
        Token::Open => "`(`".into(),
        Token::Close => "`)`".into(),
        Token::Comma => "`,`".into(),
        Token::At => "`@`".into(),
        Token::End => "end of input".into(),
    }
}

/// Parses the block-diagram DSL.
pub fn parse_rbd(source: &str) -> Result<SystemSpec> {
    let mut lexer = Lexer::new(source);
    let first = lexer.next_token()?;
    let mut parser = Parser {
        lexer,
        current: first,
        names: BTreeSet::new(),
    };
    let root = parser.node()?;
    let (token, pos) = parser.advance()?;
    if token != Token::End {
        return Err(syntax(
            pos,
            format!("unexpected {} after the diagram", describe(&token)),
        ));
    }
    Ok(SystemSpec::new(root))
}
