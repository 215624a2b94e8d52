//! Tolerant HTML flattening.
//!
//! Pages are parsed with an HTML5 tree builder, which never fails on
//! malformed markup. Nothing is rendered or executed.

use scraper::{Html, Node};

/// Text and attribute content of one page, in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageText {
    /// Text nodes outside `<script>`/`<style>`, one segment per node.
    pub visible: Vec<String>,
    /// Contents of `<script>` and `<style>` elements.
    pub script: Vec<String>,
    /// Every attribute as `(name, value)`, names lowercased.
    pub attrs: Vec<(String, String)>,
}

impl PageText {
    pub fn parse(bytes: &[u8]) -> Self {
        let source = String::from_utf8_lossy(bytes);
        let doc = Html::parse_document(&source);
        let mut out = PageText::default();
        for node in doc.tree.nodes() {
            match node.value() {
                Node::Text(text) => {
                    let t: &str = text;
                    if t.trim().is_empty() {
                        continue;
                    }
                    let hidden = node
                        .parent()
                        .and_then(|p| p.value().as_element().map(|e| e.name()))
                        .is_some_and(|name| matches!(name, "script" | "style"));
                    if hidden {
                        out.script.push(t.to_string());
                    } else {
                        out.visible.push(t.to_string());
                    }
                }
                Node::Element(el) => {
                    for (name, value) in el.attrs() {
                        out.attrs.push((name.to_ascii_lowercase(), value.to_string()));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Visible text joined with newlines.
    pub fn visible_text(&self) -> String {
        self.visible.join("\n")
    }

    /// Values of `href` and `src` attributes.
    pub fn link_targets(&self) -> impl Iterator<Item = &str> {
        self.attrs
            .iter()
            .filter(|(name, _)| name == "href" || name == "src")
            .map(|(_, v)| v.as_str())
    }

    /// Tag-stripped text (visible and script) plus all attribute values,
    /// newline separated. This is what address extraction scans.
    pub fn scan_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        parts.extend(self.visible.iter().map(String::as_str));
        parts.extend(self.script.iter().map(String::as_str));
        parts.extend(self.attrs.iter().map(|(_, v)| v.as_str()));
        parts.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_visible_script_and_attrs() {
        let page = PageText::parse(
            br#"<html><head><title>Shop</title><style>p{}</style></head>
            <body><p>Hello <b>world</b></p><a href="http://x.onion/">go</a>
            <script>var a = "addr";</script></body></html>"#,
        );
        assert_eq!(page.visible, vec!["Shop", "Hello ", "world", "go"]);
        assert_eq!(page.script, vec!["p{}", "var a = \"addr\";"]);
        assert_eq!(page.link_targets().collect::<Vec<_>>(), vec!["http://x.onion/"]);
    }

    #[test]
    fn malformed_markup_is_tolerated() {
        let page = PageText::parse(b"<div><p>unclosed <a href='q'>link<td>cell</div></span>&amp; more");
        assert!(page.visible_text().contains("unclosed"));
        assert!(page.visible_text().contains("& more"));
        assert!(page.link_targets().all(|t| t == "q"));
    }

    #[test]
    fn invalid_utf8_does_not_panic() {
        let page = PageText::parse(&[0xff, 0xfe, b'<', b'p', b'>', b'o', b'k']);
        assert!(page.visible_text().contains("ok"));
    }
}
