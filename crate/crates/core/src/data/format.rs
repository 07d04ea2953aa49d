//! Readers and writers for the supported rating-log formats.
//!
//! * MovieLens: `UserID::MovieID::Rating::Timestamp`
//! * CSV: `user,item,rating,timestamp`, optional header line
//! * canonical dump: `#users=M items=N` then `user\titem\trating\ttimestamp`
//!   using vocabulary indices.

use std::io::{BufRead, Write};

use super::{DataError, Interaction, InteractionLog, Vocab, MAX_RATING, MIN_RATING};

struct Record<'a> {
    user: &'a str,
    item: &'a str,
    rating: f64,
    timestamp: u64,
}

fn parse_rating(field: &str, line: usize) -> Result<f64, DataError> {
    let rating: f64 = field.trim().parse().map_err(|_| DataError::Parse {
        line,
        message: format!("rating {field:?} is not a number"),
    })?;
    if !(MIN_RATING..=MAX_RATING).contains(&rating) {
        return Err(DataError::RatingOutOfScale { line, rating });
    }
    Ok(rating)
}

fn parse_timestamp(field: &str, line: usize) -> Result<u64, DataError> {
    field.trim().parse().map_err(|_| DataError::Parse {
        line,
        message: format!("timestamp {field:?} is not a non-negative integer"),
    })
}

fn split_fields<'a>(text: &'a str, sep: &str, line: usize) -> Result<[&'a str; 4], DataError> {
    let fields: Vec<&str> = text.split(sep).collect();
    match fields.as_slice() {
        [u, i, r, t] if !u.trim().is_empty() && !i.trim().is_empty() => Ok([u.trim(), i.trim(), r, t]),
        _ => Err(DataError::Parse {
            line,
            message: format!("expected 4 {sep:?}-separated fields, found {:?}", text),
        }),
    }
}

/// Feeds each nonempty line (CR stripped, 1-based number) to `handle`.
fn for_each_line<R: BufRead>(
    reader: R,
    mut handle: impl FnMut(usize, &str) -> Result<(), DataError>,
) -> Result<(), DataError> {
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        handle(idx + 1, line)?;
    }
    Ok(())
}

#[derive(Default)]
struct Builder {
    users: Vocab,
    items: Vocab,
    raw: Vec<Interaction>,
}

impl Builder {
    fn push(&mut self, record: Record<'_>) {
        self.raw.push(Interaction {
            user: self.users.intern(record.user),
            item: self.items.intern(record.item),
            rating: record.rating,
            timestamp: record.timestamp,
        });
    }

    fn finish(self) -> InteractionLog {
        InteractionLog::from_parts(self.raw, self.users, self.items)
    }
}

/// Parses the `::`-delimited MovieLens 1M ratings format.
pub fn parse_movielens<R: BufRead>(reader: R) -> Result<InteractionLog, DataError> {
    let mut builder = Builder::default();
    for_each_line(reader, |line, text| {
        let [user, item, rating, timestamp] = split_fields(text, "::", line)?;
        builder.push(Record {
            user,
            item,
            rating: parse_rating(rating, line)?,
            timestamp: parse_timestamp(timestamp, line)?,
        });
        Ok(())
    })?;
    Ok(builder.finish())
}

/// Parses `user,item,rating,timestamp` lines. A first line whose rating field
/// is not numeric is taken as a header.
pub fn parse_csv_ratings<R: BufRead>(reader: R) -> Result<InteractionLog, DataError> {
    let mut builder = Builder::default();
    let mut first = true;
    for_each_line(reader, |line, text| {
        let [user, item, rating, timestamp] = split_fields(text, ",", line)?;
        let is_header = first && rating.trim().parse::<f64>().is_err();
        first = false;
        if is_header {
            return Ok(());
        }
        builder.push(Record {
            user,
            item,
            rating: parse_rating(rating, line)?,
            timestamp: parse_timestamp(timestamp, line)?,
        });
        Ok(())
    })?;
    Ok(builder.finish())
}

fn parse_header(text: &str) -> Option<(usize, usize)> {
    let rest = text.strip_prefix("#users=")?;
    let (users, items) = rest.split_once(" items=")?;
    Some((users.trim().parse().ok()?, items.trim().parse().ok()?))
}

/// Parses the canonical tab-separated dump written by [`write_canonical`].
/// External ids become the decimal index strings.
pub fn parse_canonical<R: BufRead>(reader: R) -> Result<InteractionLog, DataError> {
    let mut dims: Option<(usize, usize)> = None;
    let mut raw = Vec::new();
    for_each_line(reader, |line, text| {
        let Some((num_users, num_items)) = dims else {
            dims = Some(parse_header(text).ok_or_else(|| DataError::Parse {
                line,
                message: format!("expected `#users=M items=N` header, found {text:?}"),
            })?);
            return Ok(());
        };
        let [user, item, rating, timestamp] = split_fields(text, "\t", line)?;
        let index = |field: &str, bound: usize, what: &str| -> Result<usize, DataError> {
            match field.parse::<usize>() {
                Ok(v) if v < bound => Ok(v),
                _ => Err(DataError::Parse {
                    line,
                    message: format!("{what} index {field:?} outside 0..{bound}"),
                }),
            }
        };
        raw.push(Interaction {
            user: index(user, num_users, "user")?,
            item: index(item, num_items, "item")?,
            rating: parse_rating(rating, line)?,
            timestamp: parse_timestamp(timestamp, line)?,
        });
        Ok(())
    })?;
    let (num_users, num_items) = dims.unwrap_or((0, 0));
    let mut users = Vocab::default();
    let mut items = Vocab::default();
    for u in 0..num_users {
        users.intern(&u.to_string());
    }
    for i in 0..num_items {
        items.intern(&i.to_string());
    }
    Ok(InteractionLog::from_parts(raw, users, items))
}

pub fn write_movielens<W: Write>(log: &InteractionLog, mut out: W) -> std::io::Result<()> {
    for r in log.interactions() {
        writeln!(
            out,
            "{}::{}::{}::{}",
            log.users.ids[r.user], log.items.ids[r.item], r.rating, r.timestamp
        )?;
    }
    Ok(())
}

pub fn write_csv_ratings<W: Write>(log: &InteractionLog, mut out: W) -> std::io::Result<()> {
    writeln!(out, "user,item,rating,timestamp")?;
    for r in log.interactions() {
        writeln!(
            out,
            "{},{},{},{}",
            log.users.ids[r.user], log.items.ids[r.item], r.rating, r.timestamp
        )?;
    }
    Ok(())
}

pub fn write_canonical<W: Write>(log: &InteractionLog, mut out: W) -> std::io::Result<()> {
    writeln!(out, "#users={} items={}", log.num_users(), log.num_items())?;
    for r in log.interactions() {
        writeln!(out, "{}\t{}\t{}\t{}", r.user, r.item, r.rating, r.timestamp)?;
    }
    Ok(())
}
