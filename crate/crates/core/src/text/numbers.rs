//! Integer tokens spelled out as English cardinal words.

use alloc::vec::Vec;

use super::TextError;

/// Exclusive upper bound of the integers that are spelled out.
pub const NUMBER_WORD_LIMIT: u64 = 1_000_000;

const ONES: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];

const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Every word [`number_to_words`] can emit.
pub fn cardinal_vocabulary() -> impl Iterator<Item = &'static str> {
    ONES.iter()
        .chain(TENS.iter().skip(2))
        .copied()
        .chain(["hundred", "thousand"])
}

/// Spell a digit string as cardinal word tokens. `Ok(None)` means the value
/// is out of range and the token should be dropped.
pub fn number_to_words(token: &str) -> Result<Option<Vec<&'static str>>, TextError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TextError::NotDigits);
    }
    let digits = token.trim_start_matches('0');
    // anything this long is out of range and may not fit in u64
    if digits.len() > 7 {
        return Ok(None);
    }
    let n: u64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| TextError::NotDigits)?
    };
    if n >= NUMBER_WORD_LIMIT {
        return Ok(None);
    }
    let mut words = Vec::new();
    if n == 0 {
        words.push(ONES[0]);
        return Ok(Some(words));
    }
    let thousands = n / 1000;
    let rest = n % 1000;
    if thousands > 0 {
        below_thousand(thousands, &mut words);
        words.push("thousand");
    }
    if rest > 0 {
        below_thousand(rest, &mut words);
    }
    Ok(Some(words))
}

fn below_thousand(n: u64, out: &mut Vec<&'static str>) {
    let hundreds = n / 100;
    let rest = (n % 100) as usize;
    if hundreds > 0 {
        out.push(ONES[hundreds as usize]);
        out.push("hundred");
    }
    if rest == 0 {
        return;
    }
    if rest < 20 {
        out.push(ONES[rest]);
    } else {
        out.push(TENS[rest / 10]);
        if !rest.is_multiple_of(10) {
            out.push(ONES[rest % 10]);
        }
    }
}
