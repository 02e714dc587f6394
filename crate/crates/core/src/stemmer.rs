//! Porter stemmer.
//!
//! This is the original Porter algorithm as distributed in Martin Porter's
//! reference C implementation, including its two well-known departures from
//! the published rules (`bli -> ble` in place of `abli -> able`, and
//! `logi -> log`). Output agrees with the reference vocabulary word for word.
//!
//! Only lowercase ASCII letter words are stemmed. Anything else, and any word
//! of two letters or fewer, is returned as is.

/// Number of `VC` sequences in `word` viewed as `[C](VC)^m[V]`.
///
/// Returns `None` unless the word consists solely of lowercase ASCII letters.
pub fn porter_measure(word: &str) -> Option<usize> {
    if !is_stemmable(word) {
        return None;
    }
    let s = Stemmer::new(word);
    Some(s.measure(s.b.len()))
}

/// Stems one word.
pub fn porter_stem(word: &str) -> String {
    if word.len() <= 2 || !is_stemmable(word) {
        return word.to_string();
    }
    let mut s = Stemmer::new(word);
    s.step1ab();
    if s.b.len() > 1 {
        s.step1c();
        s.step2();
        s.step3();
        s.step4();
        s.step5();
    }
    // Only ASCII bytes were ever written into the buffer.
    String::from_utf8(s.b).expect("stemmer buffer is ASCII")
}

/// Element-wise [`porter_stem`], preserving order and length.
pub fn stem_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| porter_stem(t.as_ref())).collect()
}

fn is_stemmable(word: &str) -> bool {
    word.bytes().all(|c| c.is_ascii_lowercase())
}

struct Stemmer {
    b: Vec<u8>,
    /// Length of the stem preceding the suffix most recently matched by `ends`.
    j: usize,
}

impl Stemmer {
    fn new(word: &str) -> Self {
        Self {
            b: word.as_bytes().to_vec(),
            j: 0,
        }
    }

    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Measure of the prefix `b[..len]`.
    fn measure(&self, len: usize) -> usize {
        let mut n = 0;
        let mut i = 0;
        // skip the optional leading consonants
        while i < len && self.cons(i) {
            i += 1;
        }
        loop {
            while i < len && !self.cons(i) {
                i += 1;
            }
            if i >= len {
                return n;
            }
            while i < len && self.cons(i) {
                i += 1;
            }
            n += 1;
            if i >= len {
                return n;
            }
        }
    }

    fn m(&self) -> usize {
        self.measure(self.j)
    }

    fn vowel_in_stem(&self) -> bool {
        (0..self.j).any(|i| !self.cons(i))
    }

    /// `b[..len]` ends in a double consonant.
    fn double_c(&self, len: usize) -> bool {
        len >= 2 && self.b[len - 1] == self.b[len - 2] && self.cons(len - 1)
    }

    /// `b[..len]` ends consonant-vowel-consonant, the last not w, x or y.
    fn cvc(&self, len: usize) -> bool {
        if len < 3 || !self.cons(len - 1) || self.cons(len - 2) || !self.cons(len - 3) {
            return false;
        }
        !matches!(self.b[len - 1], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, suffix: &str) -> bool {
        let s = suffix.as_bytes();
        if s.len() > self.b.len() || !self.b.ends_with(s) {
            return false;
        }
        self.j = self.b.len() - s.len();
        true
    }

    fn set_to(&mut self, s: &str) {
        self.b.truncate(self.j);
        self.b.extend_from_slice(s.as_bytes());
    }

    fn replace(&mut self, s: &str) {
        if self.m() > 0 {
            self.set_to(s);
        }
    }

    fn last(&self) -> u8 {
        self.b[self.b.len() - 1]
    }

    fn penultimate(&self) -> u8 {
        self.b[self.b.len() - 2]
    }

    /// Plurals and -ed / -ing.
    fn step1ab(&mut self) {
        if self.last() == b's' {
            if self.ends("sses") {
                self.b.truncate(self.b.len() - 2);
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.penultimate() != b's' {
                self.b.pop();
            }
        }
        if self.ends("eed") {
            if self.m() > 0 {
                self.b.pop();
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            self.b.truncate(self.j);
            self.j = self.b.len();
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_c(self.b.len()) {
                if !matches!(self.last(), b'l' | b's' | b'z') {
                    self.b.pop();
                }
            } else if self.m() == 1 && self.cvc(self.b.len()) {
                self.set_to("e");
            }
        }
    }

    /// Terminal y to i when there is another vowel in the stem.
    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            let last = self.b.len() - 1;
            self.b[last] = b'i';
        }
    }

    /// The first matching suffix ends the search, whether or not its
    /// measure condition then allows the replacement.
    fn apply_first(&mut self, rules: &[(&str, &str)]) {
        for (suffix, replacement) in rules {
            if self.ends(suffix) {
                self.replace(replacement);
                return;
            }
        }
    }

    fn step2(&mut self) {
        let rules: &[(&str, &str)] = match self.penultimate() {
            b'a' => &[("ational", "ate"), ("tional", "tion")],
            b'c' => &[("enci", "ence"), ("anci", "ance")],
            b'e' => &[("izer", "ize")],
            b'l' => &[
                ("bli", "ble"),
                ("alli", "al"),
                ("entli", "ent"),
                ("eli", "e"),
                ("ousli", "ous"),
            ],
            b'o' => &[("ization", "ize"), ("ation", "ate"), ("ator", "ate")],
            b's' => &[
                ("alism", "al"),
                ("iveness", "ive"),
                ("fulness", "ful"),
                ("ousness", "ous"),
            ],
            b't' => &[("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")],
            b'g' => &[("logi", "log")],
            _ => &[],
        };
        self.apply_first(rules);
    }

    fn step3(&mut self) {
        let rules: &[(&str, &str)] = match self.last() {
            b'e' => &[("icate", "ic"), ("ative", ""), ("alize", "al")],
            b'i' => &[("iciti", "ic")],
            b'l' => &[("ical", "ic"), ("ful", "")],
            b's' => &[("ness", "")],
            _ => &[],
        };
        self.apply_first(rules);
    }

    /// Strips a residual suffix when the remaining stem has measure > 1.
    fn step4(&mut self) {
        let suffixes: &[&str] = match self.penultimate() {
            b'a' => &["al"],
            b'c' => &["ance", "ence"],
            b'e' => &["er"],
            b'i' => &["ic"],
            b'l' => &["able", "ible"],
            b'n' => &["ant", "ement", "ment", "ent"],
            b'o' => {
                let ion = self.ends("ion") && self.j >= 1 && matches!(self.b[self.j - 1], b's' | b't');
                if !ion && !self.ends("ou") {
                    return;
                }
                &[]
            }
            b's' => &["ism"],
            b't' => &["ate", "iti"],
            b'u' => &["ous"],
            b'v' => &["ive"],
            b'z' => &["ize"],
            _ => return,
        };
        if !suffixes.is_empty() && !suffixes.iter().any(|s| self.ends(s)) {
            return;
        }
        if self.m() > 1 {
            self.b.truncate(self.j);
        }
    }

    /// Final -e removal, then -ll to -l. A trailing vowel never changes the
    /// measure, so both tests can use the current word.
    fn step5(&mut self) {
        let len = self.b.len();
        self.j = len;
        if self.last() == b'e' {
            let m = self.m();
            if m > 1 || (m == 1 && !self.cvc(len - 1)) {
                self.b.pop();
            }
        }
        if self.last() == b'l' && self.double_c(self.b.len()) && self.measure(self.b.len()) > 1 {
            self.b.pop();
        }
    }
}
