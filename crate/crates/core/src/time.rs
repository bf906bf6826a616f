//! Resolution of relative temporal phrases into strict UTC ranges.
//!
//! Weeks are ISO-8601 weeks starting on Monday. Months and years are
//! calendar months and years. Anything that is not a recognized temporal
//! expression resolves to [`Unresolvable`], which callers treat as
//! ordinary content (e.g. "during CHI 2024" names an event, not a time).

use chrono::{DateTime, Datelike, Days, Months, NaiveDate, Utc};
use thiserror::Error;

use crate::model::TimeRange;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not a recognized temporal phrase: {0:?}")]
pub struct Unresolvable(pub String);

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn month_index(word: &str) -> Option<u32> {
    MONTHS
        .iter()
        .position(|m| *m == word || (word.len() == 3 && m.starts_with(word)))
        .map(|i| i as u32 + 1)
}

fn month_start(year: i32, month: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, month, 1).expect("valid month")
}

fn month_end(year: i32, month: u32) -> NaiveDate {
    month_start(year, month) + Months::new(1) - Days::new(1)
}

fn week_start(date: NaiveDate) -> NaiveDate {
    date - Days::new(u64::from(date.weekday().num_days_from_monday()))
}

/// Resolves `phrase` against `reference_time`.
///
/// Recognized forms: `today`, `yesterday`, `this|last week`,
/// `this|last month`, `this|last year`, `in <month>` (the most recent such
/// month that has already begun), `in <month> <year>`, `in <year>`.
/// A leading `in`, `during` or `from` is accepted in front of the
/// relative forms.
pub fn resolve_relative_time(
    phrase: &str,
    reference_time: DateTime<Utc>,
) -> Result<TimeRange, Unresolvable> {
    let lowered = phrase.trim().to_lowercase();
    let words: Vec<&str> = lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    let unresolvable = || Unresolvable(phrase.to_string());
    let today = reference_time.date_naive();

    let (lead, rest) = match words.split_first() {
        Some((first, rest)) if matches!(*first, "in" | "during" | "from" | "on") => {
            (Some(*first), rest)
        }
        _ => (None, words.as_slice()),
    };

    let range = |s: NaiveDate, e: NaiveDate| Ok(TimeRange::from_dates(s, e, true));

    match rest {
        ["today"] => range(today, today),
        ["yesterday"] => {
            let d = today - Days::new(1);
            range(d, d)
        }
        ["this", "week"] => {
            let s = week_start(today);
            range(s, s + Days::new(6))
        }
        ["last", "week"] => {
            let s = week_start(today) - Days::new(7);
            range(s, s + Days::new(6))
        }
        ["this", "month"] => range(
            month_start(today.year(), today.month()),
            month_end(today.year(), today.month()),
        ),
        ["last", "month"] => {
            let prev = month_start(today.year(), today.month()) - Months::new(1);
            range(prev, month_end(prev.year(), prev.month()))
        }
        ["this", "year"] => range(
            month_start(today.year(), 1),
            month_end(today.year(), 12),
        ),
        ["last", "year"] => range(
            month_start(today.year() - 1, 1),
            month_end(today.year() - 1, 12),
        ),
        [word] if lead.is_some() => {
            if let Some(month) = month_index(word) {
                let year = if month <= today.month() {
                    today.year()
                } else {
                    today.year() - 1
                };
                range(month_start(year, month), month_end(year, month))
            } else if let Some(year) = parse_year(word) {
                range(month_start(year, 1), month_end(year, 12))
            } else {
                Err(unresolvable())
            }
        }
        [word, year] if lead.is_some() => match (month_index(word), parse_year(year)) {
            (Some(month), Some(year)) => range(month_start(year, month), month_end(year, month)),
            _ => Err(unresolvable()),
        },
        _ => Err(unresolvable()),
    }
}

fn parse_year(word: &str) -> Option<i32> {
    if word.len() != 4 {
        return None;
    }
    word.parse::<i32>().ok().filter(|y| (1900..=2200).contains(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    #[test]
    fn yesterday() {
        let r = resolve_relative_time("yesterday", t("2024-05-15T12:00:00Z")).unwrap();
        assert_eq!(r.start, t("2024-05-14T00:00:00Z"));
        assert_eq!(r.end, t("2024-05-14T23:59:59Z"));
        assert!(r.strict);
    }

    #[test]
    fn month_phrases() {
        let reference = t("2024-05-15T12:00:00Z");
        let r = resolve_relative_time("in April", reference).unwrap();
        assert_eq!(r.start, t("2024-04-01T00:00:00Z"));
        assert_eq!(r.end, t("2024-04-30T23:59:59Z"));
        // A month that has not started yet this year refers to last year.
        let r = resolve_relative_time("in June", reference).unwrap();
        assert_eq!(r.start, t("2023-06-01T00:00:00Z"));
        let r = resolve_relative_time("last month", t("2024-03-31T08:00:00Z")).unwrap();
        assert_eq!(r.start, t("2024-02-01T00:00:00Z"));
        assert_eq!(r.end, t("2024-02-29T23:59:59Z"));
        let r = resolve_relative_time("last month", t("2024-01-10T08:00:00Z")).unwrap();
        assert_eq!(r.start, t("2023-12-01T00:00:00Z"));
        assert_eq!(r.end, t("2023-12-31T23:59:59Z"));
        let r = resolve_relative_time("in March 2023", reference).unwrap();
        assert_eq!(r.end, t("2023-03-31T23:59:59Z"));
    }

    #[test]
    fn year_phrases() {
        let r = resolve_relative_time("last year", t("2024-05-15T12:00:00Z")).unwrap();
        assert_eq!(r.start, t("2023-01-01T00:00:00Z"));
        assert_eq!(r.end, t("2023-12-31T23:59:59Z"));
        let r = resolve_relative_time("in 2022", t("2024-05-15T12:00:00Z")).unwrap();
        assert_eq!(r.start, t("2022-01-01T00:00:00Z"));
    }

    #[test]
    fn composite_phrases_are_not_temporal() {
        let reference = t("2024-05-15T12:00:00Z");
        assert!(resolve_relative_time("during CHI 2024", reference).is_err());
        assert!(resolve_relative_time("at my graduation ceremony", reference).is_err());
        assert!(resolve_relative_time("", reference).is_err());
        assert!(resolve_relative_time("in the morning", reference).is_err());
    }
}
