use serde::Serialize;

/// Serializes rows with a header line. Writing into memory cannot fail for
/// plain record types.
pub(crate) fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("serializable csv row");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

/// Like [`to_csv`] but always emits the header, even with no rows.
pub(crate) fn to_csv_with_header<T: Serialize>(header: &[&str], rows: &[T]) -> String {
    if rows.is_empty() {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("csv header");
        return String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf-8 csv");
    }
    to_csv(rows)
}
